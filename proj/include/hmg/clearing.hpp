// Market clearing: assemble the per-scenario lower-level LP for a coalition
// structure, solve it, read market prices off the balance-row duals, and
// account profits per player.
#pragma once

#include <hmg/bids.hpp>
#include <hmg/blocks.hpp>
#include <hmg/lp.hpp>
#include <hmg/model.hpp>

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace hmg {

struct ClearingProblem {
    LinearProgram lp;
    std::vector<VarDef> vars;  // aligned with lp columns
    std::vector<RowDef> rows;  // aligned with lp rows (balance rows included)
    std::map<std::string, int> balance_e, balance_h;  // "{hmg}.{t}" -> row
    SolverFlags flags;
    CoalitionStructure structure;
    int w = 0;
    int T = 0;
};

struct KKTReport {
    bool evaluated = false;
    bool pass = false;
    double max_stationarity = 0.0;
    double max_complementarity = 0.0;
    double max_primal = 0.0;
    std::string worst_stationarity, worst_complementarity;
    // (equation id, index label, residual) triples for export.
    std::vector<std::tuple<int, std::string, double>> entries;
};

struct MarketOutcome {
    SolveStatus status = SolveStatus::infeasible;
    double objective = 0.0;
    ClearingSolution solution;
    // Per-H-MG and demand-weighted grid prices, [t].
    std::map<std::string, std::vector<double>> mcp_e_hmg, mcp_h_hmg;
    std::vector<double> mcp_e, mcp_h;
    std::vector<uint8_t> degenerate_e, degenerate_h;  // [t], any H-MG row degenerate
    std::map<std::string, double> profit;             // per player, this scenario
    KKTReport kkt;
};

namespace detail {

inline std::string bal_key(const std::string& hmg, int t) { return hmg + "." + std::to_string(t); }

// Member groups of a structure (upper group plus each lower group).
inline std::vector<std::vector<std::string>> structure_groups(const CoalitionStructure& s) {
    std::vector<std::vector<std::string>> g;
    g.push_back(s.upper);
    for (const auto& l : s.lower) g.push_back(l);
    return g;
}

inline std::vector<std::string> peers_of(const CoalitionStructure& s, const std::string& id) {
    for (const auto& grp : structure_groups(s)) {
        bool in = false;
        for (const auto& m : grp) in = in || m == id;
        if (!in) continue;
        std::vector<std::string> peers;
        for (const auto& m : grp)
            if (m != id) peers.push_back(m);
        return peers;
    }
    throw std::invalid_argument("structure does not place H-MG " + id);
}

// Cheap infeasibility screen: aggregate capacity vs. aggregate load per
// coalition group per period for each carrier. Catches unservable demand
// before the solver does and names the first offending balance.
inline void assembly_precheck(const ValidatedCase& vc, const CoalitionStructure& s, int w) {
    const int T = vc.def.grid.T;
    double retail_cap = 0.0;
    for (const auto& r : vc.def.retailers) retail_cap += r.capacity;
    for (const auto& grp : structure_groups(s)) {
        if (grp.empty()) continue;
        for (int t = 0; t < T; ++t) {
            double cap_e = retail_cap * grp.size(), load_e = 0.0;
            double cap_h = 0.0, load_h = 0.0;
            for (const auto& id : grp) {
                const auto& h = find_hmg(vc, id);
                load_e += h.load_e[w][t];
                load_h += h.load_h[w][t];
                for (const auto& d : h.devices) switch (d.kind) {
                        case DeviceKind::CHP:
                            cap_e += d.p_max;
                            cap_h += d.p_max_h;
                            break;
                        case DeviceKind::WT: cap_e += d.availability[w][t]; break;
                        case DeviceKind::ES: cap_e += d.p_max; break;
                        case DeviceKind::STP: cap_h += d.availability[w][t]; break;
                        case DeviceKind::TES: cap_h += d.p_max; break;
                        case DeviceKind::GB: cap_h += d.p_max; break;
                        case DeviceKind::EB:
                        case DeviceKind::EHP: cap_h += d.p_max; break;
                    }
            }
            if (load_e > cap_e + 1e-9)
                throw std::invalid_argument("unservable electrical balance at (" + grp[0] +
                                            " group, t=" + std::to_string(t) + ", w=" + std::to_string(w) +
                                            "): load " + std::to_string(load_e) + " kW exceeds capacity " +
                                            std::to_string(cap_e) + " kW");
            if (load_h > cap_h + 1e-9)
                throw std::invalid_argument("unservable thermal balance at (" + grp[0] +
                                            " group, t=" + std::to_string(t) + ", w=" + std::to_string(w) +
                                            "): load " + std::to_string(load_h) + " kW exceeds capacity " +
                                            std::to_string(cap_h) + " kW");
        }
    }
}

inline void lp_add(ClearingProblem& p, VarDef v, double cost) {
    p.lp.add_var(v.name, v.lo, v.hi, cost);
    p.vars.push_back(std::move(v));
}

}  // namespace detail

inline ClearingProblem assemble_clearing_lp(const ValidatedCase& vc, const CoalitionStructure& structure,
                                            const BidVector& bids, int w) {
    auto violations = bid_bounds(bids, vc);
    if (!violations.empty())
        throw std::invalid_argument("inadmissible bids: " + violations.front());
    detail::assembly_precheck(vc, structure, w);

    const int T = vc.def.grid.T;
    const auto& lambda = vc.def.scenarios.mcp_pred[w];

    ClearingProblem p;
    p.flags = vc.def.flags;
    p.structure = structure;
    p.w = w;
    p.T = T;

    std::vector<ConstraintBlock> blocks;
    for (const auto& h : vc.def.hmgs) {
        blocks.push_back(build_dr_block(h, lambda, w));
        const auto& db = bids.device.at(h.id);
        for (size_t j = 0; j < h.devices.size(); ++j) {
            const auto& d = h.devices[j];
            switch (d.kind) {
                case DeviceKind::CHP:
                case DeviceKind::WT:
                case DeviceKind::STP:
                case DeviceKind::GB:
                    blocks.push_back(build_generation_block(h.id, static_cast<int>(j), d, db[j], w));
                    break;
                case DeviceKind::ES:
                case DeviceKind::TES:
                    blocks.push_back(build_storage_block(h.id, static_cast<int>(j), d, db[j], w,
                                                         vc.def.grid, vc.def.flags));
                    break;
                case DeviceKind::EB:
                case DeviceKind::EHP:
                    blocks.push_back(build_conversion_block(h.id, static_cast<int>(j), d, db[j], w));
                    break;
            }
        }
        blocks.push_back(build_exchange_block(h, vc.def.retailers, detail::peers_of(structure, h.id),
                                              bids, lambda, w));
    }

    // Pass 1: variables (clearing objective = DSM reward minus offered cost).
    for (auto& blk : blocks)
        for (auto& v : blk.vars) {
            double c = v.keep_sign ? v.obj : -v.obj;
            detail::lp_add(p, std::move(v), c);
        }

    // Pass 2: block rows.
    for (auto& blk : blocks)
        for (auto& r : blk.rows) {
            std::vector<std::pair<int, double>> coeffs;
            for (auto& [name, coef] : r.coeffs) {
                auto it = p.lp.registry.find(name);
                if (it == p.lp.registry.end())
                    throw std::logic_error("row " + r.dual_tag + " references unknown variable " + name);
                coeffs.push_back({it->second, coef});
            }
            p.lp.add_row(r.sense, r.rhs, coeffs, r.dual_tag);
            p.rows.push_back(std::move(r));
        }

    // Pass 3: balance rows, consumption-positive, one per (H-MG, carrier, t).
    std::map<std::string, std::vector<std::pair<int, double>>> acc_e, acc_h;
    for (int j = 0; j < static_cast<int>(p.vars.size()); ++j)
        for (const auto& bt : p.vars[j].balance) {
            auto& acc = bt.carrier == 'e' ? acc_e : acc_h;
            acc[detail::bal_key(bt.hmg, p.vars[j].t)].push_back({j, bt.coeff});
        }
    for (const auto& h : vc.def.hmgs)
        for (int t = 0; t < T; ++t) {
            {
                RowDef r;
                r.sense = RowSense::eq;
                r.rhs = 0.0;
                r.dual_tag = "lambda^e." + h.id + detail::idx(t, w);
                r.eq_id = 62;
                const auto& acc = acc_e[detail::bal_key(h.id, t)];
                for (const auto& [col, coef] : acc) r.coeffs.push_back({p.vars[col].name, coef});
                int row = p.lp.add_row(r.sense, r.rhs, acc, r.dual_tag);
                p.balance_e[detail::bal_key(h.id, t)] = row;
                p.rows.push_back(std::move(r));
            }
            {
                RowDef r;
                r.sense = RowSense::eq;
                r.rhs = -h.load_h[w][t];  // fixed thermal demand moved to the rhs
                r.dual_tag = "lambda^h." + h.id + detail::idx(t, w);
                r.eq_id = 63;
                const auto& acc = acc_h[detail::bal_key(h.id, t)];
                for (const auto& [col, coef] : acc) r.coeffs.push_back({p.vars[col].name, coef});
                int row = p.lp.add_row(r.sense, r.rhs, acc, r.dual_tag);
                p.balance_h[detail::bal_key(h.id, t)] = row;
                p.rows.push_back(std::move(r));
            }
        }
    return p;
}

// Rewrites the bid-dependent coefficients (objective and income terms) of an
// assembled problem in place. Equivalent to re-assembling with the new bids:
// the constraint matrix never depends on bids, only costs and bookkeeping do.
inline void update_bids(const ValidatedCase& vc, ClearingProblem& p, const BidVector& bids) {
    auto violations = bid_bounds(bids, vc);
    if (!violations.empty())
        throw std::invalid_argument("inadmissible bids: " + violations.front());
    const int w = p.w;
    for (size_t j = 0; j < p.vars.size(); ++j) {
        VarDef& v = p.vars[j];
        double obj = v.obj;
        switch (v.role) {
            case VarRole::demand:
            case VarRole::dr_shift:
            case VarRole::peer:
            case VarRole::es_soc:
            case VarRole::tes_soc:
                continue;  // bid-independent
            case VarRole::chp_e:
            case VarRole::wt:
            case VarRole::es_p: {
                obj = bids.device.at(v.owner)[v.device].e[w][v.t];
                v.profit[0].coeff = obj;
                break;
            }
            case VarRole::chp_h:
            case VarRole::gb: {
                const auto& d = find_hmg(vc, v.owner).devices[v.device];
                double bid = bids.device.at(v.owner)[v.device].h[w][v.t];
                obj = bid - d.fuel_price / d.n_fuel;
                v.profit[0].coeff = bid;
                break;
            }
            case VarRole::stp:
            case VarRole::tes_p:
            case VarRole::eb_h:
            case VarRole::ehp_h: {
                obj = bids.device.at(v.owner)[v.device].h[w][v.t];
                v.profit[0].coeff = obj;
                break;
            }
            case VarRole::eb_e:
            case VarRole::ehp_e: {
                obj = -bids.device.at(v.owner)[v.device].e[w][v.t];
                v.profit[0].coeff = obj;
                break;
            }
            case VarRole::buy_e: {
                obj = bids.retail_sell.at(v.profit[1].player)[w][v.t];
                v.profit[0].coeff = obj;
                v.profit[1].coeff = obj;
                break;
            }
            case VarRole::sell_e: {
                double buy = bids.retail_buy.at(v.profit[1].player)[w][v.t];
                obj = -buy;
                v.profit[0].coeff = buy;
                v.profit[1].coeff = -buy;
                break;
            }
        }
        v.obj = obj;
        p.lp.cost[j] = v.keep_sign ? obj : -obj;
    }
}

// Per-player income for one cleared scenario, from the primal schedule and
// the bids recorded on each variable.
inline double compute_player_profit(const ClearingProblem& p, const ClearingSolution& sol,
                                    const std::string& player) {
    if (sol.status != SolveStatus::optimal)
        throw std::invalid_argument("profit requested on non-optimal outcome");
    double total = 0.0;
    bool known = false;
    for (int j = 0; j < static_cast<int>(p.vars.size()); ++j)
        for (const auto& pt : p.vars[j].profit)
            if (pt.player == player) {
                total += pt.coeff * sol.x[j];
                known = true;
            }
    if (!known) {
        // A player with no terms is legal (empty H-MG); an unknown id is not.
        bool exists = false;
        for (const auto& v : p.vars) exists = exists || v.owner == player;
        for (const auto& v : p.vars)
            for (const auto& pt : v.profit) exists = exists || pt.player == player;
        if (!exists) throw std::out_of_range("unknown player id: " + player);
    }
    return total;
}

inline MarketOutcome summarize_outcome(const ValidatedCase& vc, const ClearingProblem& p,
                                       ClearingSolution sol) {
    MarketOutcome out;
    out.status = sol.status;
    if (sol.status != SolveStatus::optimal) {
        out.solution = std::move(sol);
        return out;
    }
    out.objective = sol.objective;
    const int T = p.T;
    out.mcp_e.assign(T, 0.0);
    out.mcp_h.assign(T, 0.0);
    out.degenerate_e.assign(T, 0);
    out.degenerate_h.assign(T, 0);
    std::vector<double> wsum_e(T, 0.0), wsum_h(T, 0.0);
    for (const auto& h : vc.def.hmgs) {
        auto& me = out.mcp_e_hmg[h.id];
        auto& mh = out.mcp_h_hmg[h.id];
        me.assign(T, 0.0);
        mh.assign(T, 0.0);
        for (int t = 0; t < T; ++t) {
            int re = p.balance_e.at(detail::bal_key(h.id, t));
            int rh = p.balance_h.at(detail::bal_key(h.id, t));
            me[t] = sol.row_dual[re];
            mh[t] = sol.row_dual[rh];
            out.degenerate_e[t] |= sol.degenerate_row[re];
            out.degenerate_h[t] |= sol.degenerate_row[rh];
            // Demand weights: realized electrical load; fixed thermal load.
            int dcol = p.lp.registry.at(h.id + ".load.d" + detail::idx(t, p.w));
            double we = sol.x[dcol];
            double wh = h.load_h[p.w][t];
            out.mcp_e[t] += me[t] * we;
            out.mcp_h[t] += mh[t] * wh;
            wsum_e[t] += we;
            wsum_h[t] += wh;
        }
    }
    const double n = static_cast<double>(vc.def.hmgs.size());
    for (int t = 0; t < T; ++t) {
        if (wsum_e[t] > 1e-12) out.mcp_e[t] /= wsum_e[t];
        else {
            out.mcp_e[t] = 0.0;
            for (const auto& [id, v] : out.mcp_e_hmg) out.mcp_e[t] += v[t] / n;
        }
        if (wsum_h[t] > 1e-12) out.mcp_h[t] /= wsum_h[t];
        else {
            out.mcp_h[t] = 0.0;
            for (const auto& [id, v] : out.mcp_h_hmg) out.mcp_h[t] += v[t] / n;
        }
    }
    for (const auto& h : vc.def.hmgs) out.profit[h.id] = compute_player_profit(p, sol, h.id);
    for (const auto& r : vc.def.retailers) out.profit[r.id] = compute_player_profit(p, sol, r.id);
    out.solution = std::move(sol);
    return out;
}

// One-shot clear (cold solve). The warm-start session used by the bid search
// lives in coalition.hpp; the verifier wrapper lives in kkt.hpp.
inline MarketOutcome clear_market_unverified(const ValidatedCase& vc, const CoalitionStructure& structure,
                                             const BidVector& bids, int w) {
    ClearingProblem p = assemble_clearing_lp(vc, structure, bids, w);
    return summarize_outcome(vc, p, solve_lp(p.lp));
}

}  // namespace hmg
