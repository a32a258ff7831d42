// Independent first-order verifier. Walks the block metadata recorded in a
// ClearingProblem (objective coefficients, row definitions, bound tags) and
// checks a candidate solution against the stationarity system, the
// complementarity products, and primal feasibility. It shares no evaluation
// code with the solver: the matrix action is re-derived from the named row
// coefficient lists, and bound multipliers are reconstructed from the
// recomputed Lagrangian derivative, never read off solver reduced costs.
#pragma once

#include <hmg/clearing.hpp>

#include <cmath>
#include <map>
#include <string>
#include <vector>

namespace hmg {

namespace detail {

// Activity tolerance: a variable is "at" a bound when within this distance.
inline constexpr double kActiveTol = 1e-7;

struct KKTScan {
    KKTReport report;
    std::map<std::string, double> stationarity;     // label -> |residual|
    std::map<std::string, double> complementarity;  // label -> product / sign violation
};

inline void note_s(KKTScan& s, int eq, const std::string& label, double res) {
    s.report.entries.push_back({eq, label, res});
    s.stationarity[label] = res;
    if (res > s.report.max_stationarity) {
        s.report.max_stationarity = res;
        s.report.worst_stationarity = label;
    }
}

inline void note_c(KKTScan& s, int eq, const std::string& label, double res) {
    s.report.entries.push_back({eq, label, res});
    s.complementarity[label] = res;
    if (res > s.report.max_complementarity) {
        s.report.max_complementarity = res;
        s.report.worst_complementarity = label;
    }
}

inline KKTScan kkt_scan(const ClearingProblem& p, const ClearingSolution& sol) {
    KKTScan s;
    if (sol.status != SolveStatus::optimal) return s;  // evaluated stays false
    const int n = static_cast<int>(p.vars.size());
    const int m = static_cast<int>(p.rows.size());
    if (static_cast<int>(sol.x.size()) != n || static_cast<int>(sol.row_dual.size()) != m)
        throw std::invalid_argument("verifier: solution shape does not match the problem");
    s.report.evaluated = true;

    // Re-derive A'y and Ax from the named row definitions.
    std::vector<double> aty(n, 0.0), ax(m, 0.0);
    for (int i = 0; i < m; ++i) {
        for (const auto& [name, coef] : p.rows[i].coeffs) {
            auto it = p.lp.registry.find(name);
            if (it == p.lp.registry.end())
                throw std::invalid_argument("verifier: unresolved multiplier tag " + p.rows[i].dual_tag);
            aty[it->second] += coef * sol.row_dual[i];
            ax[i] += coef * sol.x[it->second];
        }
    }

    auto note_primal = [&](double res) {
        if (res > s.report.max_primal) s.report.max_primal = res;
    };

    for (int j = 0; j < n; ++j) {
        const VarDef& v = p.vars[j];
        const double x = sol.x[j];
        note_primal(std::max(v.lo - x, x - v.hi) / (1.0 + std::fabs(x)));
        if (v.hi - v.lo <= kActiveTol) continue;  // fixed variables carry no conditions

        const double c = v.keep_sign ? v.obj : -v.obj;
        double grad = c - aty[j];
        if (v.role == VarRole::demand && p.flags.demand_pairing_literal) {
            // verbatim variant: the demand stationarity row is read against
            // the thermal price instead of the electrical one
            int re = p.balance_e.at(bal_key(v.owner, v.t));
            int rh = p.balance_h.at(bal_key(v.owner, v.t));
            grad += sol.row_dual[re] - sol.row_dual[rh];
        }

        const bool at_lo = x <= v.lo + kActiveTol;
        const bool at_hi = std::isfinite(v.hi) && x >= v.hi - kActiveTol;
        // Bound multipliers exist only where the bound is active; whatever the
        // derivative leaves over is the stationarity residual.
        const double eta_lo = at_lo ? std::max(0.0, -grad) : 0.0;
        const double eta_hi = at_hi ? std::max(0.0, grad) : 0.0;
        note_s(s, stationarity_eq(v.role), v.name, std::fabs(grad - (eta_hi - eta_lo)));

        if (!v.lo_tag.empty())
            note_c(s, v.lo_eq, v.lo_tag, std::max({(x - v.lo) * eta_lo, v.lo - x, -eta_lo}));
        if (!v.hi_tag.empty() && std::isfinite(v.hi))
            note_c(s, v.hi_eq, v.hi_tag, std::max({(v.hi - x) * eta_hi, x - v.hi, -eta_hi}));
    }

    for (int i = 0; i < m; ++i) {
        const RowDef& r = p.rows[i];
        const double scale = 1.0 + std::fabs(r.rhs);
        if (r.sense == RowSense::eq) {
            note_primal(std::fabs(ax[i] - r.rhs) / scale);
            continue;
        }
        // Nonnegative slack and multiplier under the reporting convention.
        const double slack = (r.sense == RowSense::le ? r.rhs - ax[i] : ax[i] - r.rhs) / scale;
        const double mult = r.sense == RowSense::le ? sol.row_dual[i] : -sol.row_dual[i];
        note_primal(-slack);
        note_c(s, r.eq_id, r.dual_tag, std::max({std::fabs(slack * mult), -slack, -mult}));
    }
    return s;
}

}  // namespace detail

inline std::map<std::string, double> stationarity_residuals(const ClearingProblem& p,
                                                            const ClearingSolution& sol) {
    return detail::kkt_scan(p, sol).stationarity;
}

inline std::map<std::string, double> complementarity_residuals(const ClearingProblem& p,
                                                               const ClearingSolution& sol) {
    return detail::kkt_scan(p, sol).complementarity;
}

inline KKTReport assert_kkt(const ClearingProblem& p, const ClearingSolution& sol,
                            double tol_s = 1e-6, double tol_c = 1e-6) {
    auto scan = detail::kkt_scan(p, sol);
    KKTReport rep = std::move(scan.report);
    rep.pass = rep.evaluated && rep.max_stationarity <= tol_s && rep.max_complementarity <= tol_c &&
               rep.max_primal <= tol_c;
    return rep;
}

// Verified clear: solve and embed the first-order report.
inline MarketOutcome clear_market(const ValidatedCase& vc, const CoalitionStructure& structure,
                                  const BidVector& bids, int w, double tol = 1e-6) {
    ClearingProblem p = assemble_clearing_lp(vc, structure, bids, w);
    MarketOutcome out = summarize_outcome(vc, p, solve_lp(p.lp));
    out.kkt = assert_kkt(p, out.solution, tol, tol);
    return out;
}

}  // namespace hmg
