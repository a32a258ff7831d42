#ifndef HMG_LP_HPP
#define HMG_LP_HPP

// Bounded-variable revised primal simplex for market clearing.
// Exact row duals and reduced costs are first-class outputs: clearing
// prices are read off balance-row duals, so an interior-point method
// is not an option here.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hmg {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RowSense : uint8_t { eq, le, ge };

struct Row {
    RowSense sense = RowSense::eq;
    double rhs = 0.0;
    std::vector<std::pair<int, double>> coeffs;  // (column, value)
    std::string dual_tag;
};

// Maximization problem over box-bounded variables.
struct LinearProgram {
    std::vector<double> cost;
    std::vector<double> lo, hi;
    std::vector<std::string> names;
    std::map<std::string, int> registry;
    std::vector<Row> rows;

    int num_vars() const { return static_cast<int>(cost.size()); }
    int num_rows() const { return static_cast<int>(rows.size()); }

    int add_var(const std::string& name, double lo_, double hi_, double cost_ = 0.0) {
        if (lo_ > hi_) throw std::invalid_argument("lp: variable '" + name + "' has lo > hi");
        if (!std::isfinite(cost_)) throw std::invalid_argument("lp: non-finite cost for '" + name + "'");
        int idx = num_vars();
        cost.push_back(cost_);
        lo.push_back(lo_);
        hi.push_back(hi_);
        names.push_back(name);
        if (!registry.emplace(name, idx).second)
            throw std::invalid_argument("lp: duplicate variable name '" + name + "'");
        return idx;
    }

    int add_row(RowSense sense, double rhs, std::vector<std::pair<int, double>> coeffs,
                std::string dual_tag = {}) {
        if (!std::isfinite(rhs)) throw std::invalid_argument("lp: non-finite rhs");
        for (auto& [j, v] : coeffs) {
            if (j < 0 || j >= num_vars()) throw std::invalid_argument("lp: row references unknown column");
            if (!std::isfinite(v)) throw std::invalid_argument("lp: non-finite row coefficient");
        }
        rows.push_back(Row{sense, rhs, std::move(coeffs), std::move(dual_tag)});
        return num_rows() - 1;
    }
};

enum class SolveStatus : uint8_t { optimal, infeasible, unbounded, iteration_limit };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::unbounded: return "unbounded";
        case SolveStatus::iteration_limit: return "iteration_limit";
    }
    return "?";
}

// Nonbasic variable rest state.
enum : uint8_t { kAtLo = 0, kAtHi = 1, kBasic = 2 };

struct Basis {
    std::vector<int> basic;           // row -> column (structural or slack)
    std::vector<uint8_t> state;       // column -> kAtLo/kAtHi/kBasic
    bool empty() const { return basic.empty(); }
};

struct ClearingSolution {
    SolveStatus status = SolveStatus::infeasible;
    std::vector<double> x;             // structural primal values
    std::vector<double> row_dual;      // dual = d(objective)/d(rhs), maximization
    std::vector<double> reduced_cost;  // c_j - y'A_j per structural column
    std::vector<uint8_t> degenerate_row;
    double objective = 0.0;
    int iterations = 0;
    Basis basis;
};

struct DualityReport {
    double max_primal_residual = 0.0;
    double max_dual_residual = 0.0;
    double duality_gap = 0.0;
};

struct SimplexOptions {
    double feas_tol = 1e-9;
    double opt_tol = 1e-9;
    int max_iterations = 0;       // 0 -> 50*(rows+cols)
    int refactor_every = 150;
    bool scale = true;
};

namespace detail {

// Dense basis inverse kept column-major so that ftran (B^-1 * sparse col)
// touches contiguous memory.
class DenseInverse {
  public:
    void reset_identity(int m) {
        m_ = m;
        data_.assign(static_cast<size_t>(m) * m, 0.0);
        for (int i = 0; i < m; ++i) at(i, i) = 1.0;
    }
    double& at(int r, int c) { return data_[static_cast<size_t>(c) * m_ + r]; }
    double at(int r, int c) const { return data_[static_cast<size_t>(c) * m_ + r]; }
    const double* col(int c) const { return data_.data() + static_cast<size_t>(c) * m_; }
    double* col(int c) { return data_.data() + static_cast<size_t>(c) * m_; }
    int dim() const { return m_; }

    // Replace basic variable in row r by a column with ftran image alpha.
    // Binv <- E * Binv with eta column derived from alpha.
    void pivot_update(int r, const std::vector<double>& alpha) {
        const double piv = alpha[r];
        std::vector<double> eta(m_);
        const double inv = 1.0 / piv;
        for (int i = 0; i < m_; ++i) eta[i] = -alpha[i] * inv;
        eta[r] = inv;
        for (int c = 0; c < m_; ++c) {
            double* colp = col(c);
            const double br = colp[r];
            if (br == 0.0) continue;
            for (int i = 0; i < m_; ++i) colp[i] += eta[i] * br;
            colp[r] = eta[r] * br;
        }
    }

  private:
    int m_ = 0;
    std::vector<double> data_;
};

}  // namespace detail

// Single-use simplex instance. A solver may be kept alive after solve() and
// re-costed / re-bounded for warm restarts over the same constraint matrix
// (re_cost changes only the objective; set_var_bounds may only touch columns
// that are nonbasic at a bound inside the new range, or basic within it).
class SimplexSolver {
  public:
    SimplexSolver(const LinearProgram& lp, SimplexOptions opts = {})
        : lp_(lp), opts_(opts) {
        build();
    }

    ClearingSolution solve(const Basis* warm = nullptr) {
        if (warm && !warm->empty())
            install_basis(*warm);
        else if (!installed_)
            install_slack_basis();
        run();
        return extract();
    }

    // Objective-only update; primal feasibility of the current basis is kept.
    void re_cost(const std::vector<double>& new_cost) {
        if (static_cast<int>(new_cost.size()) != n_) throw std::invalid_argument("re_cost: size mismatch");
        for (int j = 0; j < n_; ++j) cost_[j] = new_cost[j] * colscale_[j];
    }

    // Bound update for one structural column. Valid mid-session only if the
    // column is nonbasic and the new interval contains its rest point, or basic
    // with its value inside the new interval.
    void set_var_bounds(int j, double lo, double hi) {
        hi_[j] = std::isfinite(hi) ? hi / colscale_[j] : kInf;
        lo_[j] = std::isfinite(lo) ? lo / colscale_[j] : -kInf;
        if (installed_ && state_[j] == kAtHi && !std::isfinite(hi_[j]))
            state_[j] = kAtLo;
        bounds_dirty_ = true;
    }

    ClearingSolution resolve() {
        if (!installed_) return solve();
        if (bounds_dirty_) {
            // Nonbasic rest values may have moved; refresh x_B before pricing.
            compute_xb();
            bounds_dirty_ = false;
        }
        run();
        return extract();
    }

  private:
    const LinearProgram& lp_;
    SimplexOptions opts_;
    int n_ = 0;      // structural columns
    int m_ = 0;      // rows
    int ncols_ = 0;  // n_ + m_ (slacks appended)
    // Scaled problem data, column-wise sparse.
    std::vector<std::vector<std::pair<int, double>>> acols_;
    std::vector<double> cost_, lo_, hi_, rhs_;
    std::vector<double> rowscale_, colscale_;
    // Basis state.
    detail::DenseInverse binv_;
    std::vector<int> basic_;
    std::vector<uint8_t> state_;
    std::vector<double> xb_;  // basic values
    bool installed_ = false;
    bool bounds_dirty_ = false;
    SolveStatus status_ = SolveStatus::iteration_limit;
    int iters_ = 0;

    void build() {
        n_ = lp_.num_vars();
        m_ = lp_.num_rows();
        ncols_ = n_ + m_;
        acols_.assign(ncols_, {});
        for (int r = 0; r < m_; ++r)
            for (auto& [j, v] : lp_.rows[r].coeffs)
                if (v != 0.0) acols_[j].push_back({r, v});
        rowscale_.assign(m_, 1.0);
        colscale_.assign(n_, 1.0);
        if (opts_.scale) equilibrate();
        for (int j = 0; j < n_; ++j)
            for (auto& [r, v] : acols_[j]) v *= rowscale_[r] * colscale_[j];
        cost_.assign(ncols_, 0.0);
        lo_.assign(ncols_, 0.0);
        hi_.assign(ncols_, 0.0);
        for (int j = 0; j < n_; ++j) {
            cost_[j] = lp_.cost[j] * colscale_[j];
            lo_[j] = std::isfinite(lp_.lo[j]) ? lp_.lo[j] / colscale_[j] : -kInf;
            hi_[j] = std::isfinite(lp_.hi[j]) ? lp_.hi[j] / colscale_[j] : kInf;
        }
        rhs_.assign(m_, 0.0);
        for (int r = 0; r < m_; ++r) {
            rhs_[r] = lp_.rows[r].rhs * rowscale_[r];
            int sj = n_ + r;
            acols_[sj].push_back({r, 1.0});
            switch (lp_.rows[r].sense) {
                case RowSense::eq: lo_[sj] = hi_[sj] = 0.0; break;
                case RowSense::le: lo_[sj] = 0.0; hi_[sj] = kInf; break;
                case RowSense::ge: lo_[sj] = -kInf; hi_[sj] = 0.0; break;
            }
        }
    }

    void equilibrate() {
        // Geometric mean equilibration over rows then columns, two sweeps.
        for (int sweep = 0; sweep < 2; ++sweep) {
            std::vector<double> rmax(m_, 0.0), rmin(m_, kInf);
            for (int j = 0; j < n_; ++j)
                for (auto& [r, v] : acols_[j]) {
                    double a = std::fabs(v) * rowscale_[r] * colscale_[j];
                    if (a > 0) { rmax[r] = std::max(rmax[r], a); rmin[r] = std::min(rmin[r], a); }
                }
            for (int r = 0; r < m_; ++r)
                if (rmax[r] > 0) rowscale_[r] /= std::sqrt(rmax[r] * rmin[r]);
            std::vector<double> cmax(n_, 0.0), cmin(n_, kInf);
            for (int j = 0; j < n_; ++j)
                for (auto& [r, v] : acols_[j]) {
                    double a = std::fabs(v) * rowscale_[r] * colscale_[j];
                    if (a > 0) { cmax[j] = std::max(cmax[j], a); cmin[j] = std::min(cmin[j], a); }
                }
            for (int j = 0; j < n_; ++j)
                if (cmax[j] > 0) colscale_[j] /= std::sqrt(cmax[j] * cmin[j]);
        }
    }

    double rest_value(int j) const {
        if (state_[j] == kAtLo) return std::isfinite(lo_[j]) ? lo_[j] : (std::isfinite(hi_[j]) ? hi_[j] : 0.0);
        return std::isfinite(hi_[j]) ? hi_[j] : (std::isfinite(lo_[j]) ? lo_[j] : 0.0);
    }

    void install_slack_basis() {
        basic_.resize(m_);
        state_.assign(ncols_, kAtLo);
        for (int j = 0; j < n_; ++j)
            state_[j] = std::isfinite(lo_[j]) ? kAtLo : (std::isfinite(hi_[j]) ? kAtHi : kAtLo);
        for (int r = 0; r < m_; ++r) {
            basic_[r] = n_ + r;
            state_[n_ + r] = kBasic;
        }
        binv_.reset_identity(m_);
        compute_xb();
        installed_ = true;
    }

    void install_basis(const Basis& b) {
        basic_ = b.basic;
        state_.assign(ncols_, kAtLo);
        for (int j = 0; j < std::min<size_t>(b.state.size(), state_.size()); ++j) state_[j] = b.state[j];
        for (int j = 0; j < n_; ++j)
            if (state_[j] == kAtLo && !std::isfinite(lo_[j])) state_[j] = std::isfinite(hi_[j]) ? kAtHi : kAtLo;
        for (int r : basic_)
            if (r < 0 || r >= ncols_) throw std::invalid_argument("warm basis references unknown column");
        refactor();
        compute_xb();
        installed_ = true;
    }

    void refactor() {
        // Gauss-Jordan inversion of the basis matrix.
        binv_.reset_identity(m_);
        std::vector<std::vector<double>> B(m_, std::vector<double>(m_, 0.0));
        for (int k = 0; k < m_; ++k)
            for (auto& [r, v] : acols_[basic_[k]]) B[r][k] = v;
        std::vector<int> perm(m_);
        for (int i = 0; i < m_; ++i) perm[i] = i;
        for (int c = 0; c < m_; ++c) {
            int piv = -1;
            double best = 0.0;
            for (int r = c; r < m_; ++r) {
                double a = std::fabs(B[r][c]);
                if (a > best) { best = a; piv = r; }
            }
            if (piv < 0 || best < 1e-12) throw std::runtime_error("simplex: singular basis during refactor");
            if (piv != c) {
                std::swap(B[piv], B[c]);
                for (int k = 0; k < m_; ++k) std::swap(binv_.col(k)[piv], binv_.col(k)[c]);
            }
            const double inv = 1.0 / B[c][c];
            for (int k = c; k < m_; ++k) B[c][k] *= inv;
            for (int k = 0; k < m_; ++k) binv_.col(k)[c] *= inv;
            for (int r = 0; r < m_; ++r) {
                if (r == c) continue;
                const double f = B[r][c];
                if (f == 0.0) continue;
                for (int k = c; k < m_; ++k) B[r][k] -= f * B[c][k];
                for (int k = 0; k < m_; ++k) binv_.col(k)[r] -= f * binv_.col(k)[c];
            }
        }
    }

    void compute_xb() {
        // x_B = B^-1 (b - N x_N)
        std::vector<double> res(rhs_);
        for (int j = 0; j < ncols_; ++j) {
            if (state_[j] == kBasic) continue;
            double v = rest_value(j);
            if (v == 0.0) continue;
            for (auto& [r, a] : acols_[j]) res[r] -= a * v;
        }
        xb_.assign(m_, 0.0);
        for (int r = 0; r < m_; ++r) {
            const double rv = res[r];
            if (rv == 0.0) continue;
            const double* bc = binv_.col(r);
            for (int i = 0; i < m_; ++i) xb_[i] += bc[i] * rv;
        }
    }

    void ftran(int j, std::vector<double>& alpha) const {
        alpha.assign(m_, 0.0);
        for (auto& [r, v] : acols_[j]) {
            const double* bc = binv_.col(r);
            for (int i = 0; i < m_; ++i) alpha[i] += bc[i] * v;
        }
    }

    void btran(const std::vector<double>& cb, std::vector<double>& y) const {
        y.assign(m_, 0.0);
        for (int c = 0; c < m_; ++c) {
            const double* bc = binv_.col(c);
            double acc = 0.0;
            for (int i = 0; i < m_; ++i) acc += cb[i] * bc[i];
            y[c] = acc;
        }
    }

    double infeasibility() const {
        double s = 0.0;
        for (int i = 0; i < m_; ++i) {
            int j = basic_[i];
            if (xb_[i] < lo_[j] - opts_.feas_tol) s += lo_[j] - xb_[i];
            else if (xb_[i] > hi_[j] + opts_.feas_tol) s += xb_[i] - hi_[j];
        }
        return s;
    }

    // Phase-aware basic cost: in phase 1 cost is the infeasibility gradient.
    void basic_costs(bool phase1, std::vector<double>& cb) const {
        cb.assign(m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            int j = basic_[i];
            if (phase1) {
                if (xb_[i] < lo_[j] - opts_.feas_tol) cb[i] = 1.0;        // want increase
                else if (xb_[i] > hi_[j] + opts_.feas_tol) cb[i] = -1.0;  // want decrease
            } else {
                cb[i] = cost_[j];
            }
        }
    }

    void run() {
        status_ = SolveStatus::iteration_limit;
        iters_ = 0;
        const int max_it = opts_.max_iterations > 0 ? opts_.max_iterations : 50 * (m_ + ncols_ + 1);
        int since_refactor = 0;
        int stall = 0;
        bool bland = false;
        double last_obj = -kInf;
        std::vector<double> cb, y, alpha;
        bool phase1 = infeasibility() > opts_.feas_tol;

        while (true) {
            if (iters_ >= max_it) { status_ = SolveStatus::iteration_limit; return; }
            if (!phase1 && infeasibility() > 1e-7) {
                // Drift guard: rebuild and, if genuinely infeasible, re-enter phase 1.
                refactor();
                compute_xb();
                if (infeasibility() > opts_.feas_tol) phase1 = true;
            }
            if (phase1 && infeasibility() <= opts_.feas_tol) {
                phase1 = false;
                bland = false;
                stall = 0;
                last_obj = -kInf;
            }

            basic_costs(phase1, cb);
            btran(cb, y);

            // Pricing: largest violation (Dantzig), lowest index ties; Bland when stalling.
            int q = -1;
            double best = phase1 ? opts_.feas_tol : opts_.opt_tol;
            int dirq = 0;
            for (int j = 0; j < ncols_; ++j) {
                if (state_[j] == kBasic) continue;
                if (lo_[j] == hi_[j] && std::isfinite(lo_[j])) continue;  // fixed
                double cj = phase1 ? 0.0 : cost_[j];
                double d = cj;
                for (auto& [r, v] : acols_[j]) d -= y[r] * v;
                int dir = 0;
                if (state_[j] == kAtLo && d > (phase1 ? opts_.feas_tol : opts_.opt_tol)) dir = +1;
                else if (state_[j] == kAtHi && d < -(phase1 ? opts_.feas_tol : opts_.opt_tol)) dir = -1;
                if (!dir) continue;
                if (bland) { q = j; dirq = dir; break; }
                if (std::fabs(d) > best) { best = std::fabs(d); q = j; dirq = dir; }
            }
            if (q < 0) {
                if (phase1) {
                    status_ = infeasibility() <= opts_.feas_tol ? SolveStatus::optimal : SolveStatus::infeasible;
                    if (status_ == SolveStatus::infeasible) return;
                    phase1 = false;
                    continue;
                }
                status_ = SolveStatus::optimal;
                return;
            }

            ftran(q, alpha);
            // Ratio test along x_q moving dirq from its rest bound.
            double tmax = kInf;
            if (std::isfinite(lo_[q]) && std::isfinite(hi_[q])) tmax = hi_[q] - lo_[q];
            double tstar = tmax;
            int leave = -1;       // row index of leaving basic
            double leave_to = 0;  // bound the leaving basic lands on
            double best_piv = 0.0;
            for (int i = 0; i < m_; ++i) {
                const double a = alpha[i];
                if (std::fabs(a) < 1e-10) continue;
                const double delta = -dirq * a;  // d x_Bi / d t
                int j = basic_[i];
                double target, room;
                if (delta > 0) {
                    if (xb_[i] < lo_[j] - opts_.feas_tol) target = lo_[j];        // infeasible below: stop at lo
                    else if (xb_[i] > hi_[j] + opts_.feas_tol) continue;          // moving away from hi: no block
                    else if (!std::isfinite(hi_[j])) continue;
                    else target = hi_[j];
                    room = (target - xb_[i]) / delta;
                } else {
                    if (xb_[i] > hi_[j] + opts_.feas_tol) target = hi_[j];        // infeasible above: stop at hi
                    else if (xb_[i] < lo_[j] - opts_.feas_tol) continue;          // moving away from lo: no block
                    else if (!std::isfinite(lo_[j])) continue;
                    else target = lo_[j];
                    room = (target - xb_[i]) / delta;
                }
                if (room < -1e-9) room = 0.0;
                if (room < tstar - 1e-12 ||
                    (room < tstar + 1e-12 && std::fabs(a) > best_piv)) {
                    tstar = std::max(room, 0.0);
                    leave = i;
                    leave_to = target;
                    best_piv = std::fabs(a);
                }
            }
            if (!std::isfinite(tstar)) {
                status_ = phase1 ? SolveStatus::infeasible : SolveStatus::unbounded;
                return;
            }

            ++iters_;
            if (leave < 0 || (std::isfinite(tmax) && tmax <= tstar)) {
                // Bound flip: the entering column hits its opposite bound first.
                double t = tmax;
                for (int i = 0; i < m_; ++i) xb_[i] += -dirq * alpha[i] * t;
                state_[q] = state_[q] == kAtLo ? kAtHi : kAtLo;
            } else {
                const double t = tstar;
                for (int i = 0; i < m_; ++i) xb_[i] += -dirq * alpha[i] * t;
                int jl = basic_[leave];
                double xq = rest_value(q) + dirq * t;
                // Entering becomes basic in row `leave`.
                state_[jl] = (std::fabs(leave_to - lo_[jl]) <= std::fabs(leave_to - hi_[jl])) ? kAtLo : kAtHi;
                if (!std::isfinite(lo_[jl]) && state_[jl] == kAtLo) state_[jl] = kAtHi;
                state_[q] = kBasic;
                basic_[leave] = q;
                binv_.pivot_update(leave, alpha);
                xb_[leave] = xq;
                if (++since_refactor >= opts_.refactor_every) {
                    refactor();
                    compute_xb();
                    since_refactor = 0;
                }
            }

            // Stall detection for Bland fallback (phase 1 tracks -infeasibility).
            double obj = phase1 ? -infeasibility() : current_objective();
            if (obj <= last_obj + 1e-12) ++stall; else stall = 0;
            last_obj = obj;
            bland = stall > 200;
        }
    }

    double current_objective() const {
        double obj = 0.0;
        for (int j = 0; j < ncols_; ++j)
            if (state_[j] != kBasic) obj += cost_[j] * rest_value(j);
        for (int i = 0; i < m_; ++i) obj += cost_[basic_[i]] * xb_[i];
        return obj;
    }

    ClearingSolution extract() {
        ClearingSolution out;
        out.status = status_;
        out.iterations = iters_;
        if (status_ != SolveStatus::optimal) return out;
        refactor();  // clean inverse before reading duals
        compute_xb();

        std::vector<double> xfull(ncols_, 0.0);
        for (int j = 0; j < ncols_; ++j)
            if (state_[j] != kBasic) xfull[j] = rest_value(j);
        for (int i = 0; i < m_; ++i) xfull[basic_[i]] = xb_[i];

        std::vector<double> cb, y;
        basic_costs(false, cb);
        btran(cb, y);

        out.x.resize(n_);
        for (int j = 0; j < n_; ++j) out.x[j] = xfull[j] * colscale_[j];
        out.row_dual.resize(m_);
        for (int r = 0; r < m_; ++r) out.row_dual[r] = y[r] * rowscale_[r];
        out.reduced_cost.resize(n_);
        for (int j = 0; j < n_; ++j) {
            double d = cost_[j];
            for (auto& [r, v] : acols_[j]) d -= y[r] * v;
            out.reduced_cost[j] = d / colscale_[j];
        }
        out.objective = 0.0;
        for (int j = 0; j < n_; ++j) out.objective += (cost_[j] / colscale_[j]) * out.x[j];

        out.degenerate_row.assign(m_, 0);
        for (int r = 0; r < m_; ++r) {
            double slack = xfull[n_ + r];  // scaled slack
            if (std::fabs(slack) <= 1e-7 && std::fabs(y[r]) <= 1e-7) {
                // A binding row with zero dual: price is basis-dependent.
                if (lp_.rows[r].sense != RowSense::eq) out.degenerate_row[r] = 1;
                else if (state_[n_ + r] == kBasic) out.degenerate_row[r] = 1;
            }
        }

        out.basis.basic = basic_;
        out.basis.state = state_;
        return out;
    }
};

inline ClearingSolution solve_lp(const LinearProgram& lp, const Basis* warm = nullptr,
                                 SimplexOptions opts = {}) {
    if (lp.num_vars() == 0 && lp.num_rows() == 0) {
        ClearingSolution s;
        s.status = SolveStatus::optimal;
        s.objective = 0.0;
        return s;
    }
    SimplexSolver solver(lp, opts);
    return solver.solve(warm);
}

// Residual report for an optimal solution; report-only, never throws.
inline DualityReport check_strong_duality(const LinearProgram& lp, const ClearingSolution& sol) {
    DualityReport rep;
    if (sol.status != SolveStatus::optimal) return rep;
    const int n = lp.num_vars(), m = lp.num_rows();
    if (n == 0 && m == 0) return rep;

    for (int r = 0; r < m; ++r) {
        double ax = 0.0;
        for (auto& [j, v] : lp.rows[r].coeffs) ax += v * sol.x[j];
        double scale = 1.0 + std::fabs(lp.rows[r].rhs);
        double viol = 0.0;
        switch (lp.rows[r].sense) {
            case RowSense::eq: viol = std::fabs(ax - lp.rows[r].rhs); break;
            case RowSense::le: viol = std::max(0.0, ax - lp.rows[r].rhs); break;
            case RowSense::ge: viol = std::max(0.0, lp.rows[r].rhs - ax); break;
        }
        rep.max_primal_residual = std::max(rep.max_primal_residual, viol / scale);
    }
    for (int j = 0; j < n; ++j) {
        double bviol = std::max({0.0, lp.lo[j] - sol.x[j], sol.x[j] - lp.hi[j]});
        rep.max_primal_residual = std::max(rep.max_primal_residual, bviol / (1.0 + std::fabs(sol.x[j])));
    }

    // Dual residual: c_j - y'A_j must match the reported reduced cost, must
    // vanish on columns away from both bounds, and row duals must carry the
    // right sign for inequality rows (maximization).
    for (int j = 0; j < n; ++j) {
        double d = lp.cost[j];
        for (int r = 0; r < m; ++r)
            for (auto& [k, v] : lp.rows[r].coeffs)
                if (k == j) d -= sol.row_dual[r] * v;
        rep.max_dual_residual = std::max(rep.max_dual_residual, std::fabs(d - sol.reduced_cost[j]));
        bool at_lo = sol.x[j] <= lp.lo[j] + 1e-7 * (1.0 + std::fabs(lp.lo[j]));
        bool at_hi = sol.x[j] >= lp.hi[j] - 1e-7 * (1.0 + std::fabs(lp.hi[j]));
        if (!at_lo && !at_hi) rep.max_dual_residual = std::max(rep.max_dual_residual, std::fabs(d));
        else if (at_lo && !at_hi) rep.max_dual_residual = std::max(rep.max_dual_residual, std::max(0.0, d));
        else if (at_hi && !at_lo) rep.max_dual_residual = std::max(rep.max_dual_residual, std::max(0.0, -d));
    }
    for (int r = 0; r < m; ++r) {
        if (lp.rows[r].sense == RowSense::le)
            rep.max_dual_residual = std::max(rep.max_dual_residual, std::max(0.0, -sol.row_dual[r]));
        else if (lp.rows[r].sense == RowSense::ge)
            rep.max_dual_residual = std::max(rep.max_dual_residual, std::max(0.0, sol.row_dual[r]));
    }

    // Strong duality: c'x == y'b + sum of bound terms at reduced costs.
    double dual_obj = 0.0;
    for (int r = 0; r < m; ++r) dual_obj += sol.row_dual[r] * lp.rows[r].rhs;
    for (int j = 0; j < n; ++j) {
        double d = sol.reduced_cost[j];
        bool at_lo = sol.x[j] <= lp.lo[j] + 1e-7 * (1.0 + std::fabs(lp.lo[j]));
        bool at_hi = sol.x[j] >= lp.hi[j] - 1e-7 * (1.0 + std::fabs(lp.hi[j]));
        if (at_lo && d < 0) dual_obj += d * lp.lo[j];
        else if (at_hi && d > 0) dual_obj += d * lp.hi[j];
    }
    rep.duality_gap = std::fabs(sol.objective - dual_obj) / (1.0 + std::fabs(sol.objective));
    return rep;
}

// Plain-text dump for external cross-checks. One variable or row per line.
inline std::string dump_lp(const LinearProgram& lp) {
    std::ostringstream os;
    os.precision(17);
    os << "maximize " << lp.num_vars() << " " << lp.num_rows() << "\n";
    for (int j = 0; j < lp.num_vars(); ++j)
        os << "var " << lp.names[j] << " " << lp.lo[j] << " " << lp.hi[j] << " " << lp.cost[j] << "\n";
    for (auto& row : lp.rows) {
        os << "row " << (row.sense == RowSense::eq ? "=" : row.sense == RowSense::le ? "<=" : ">=")
           << " " << row.rhs;
        for (auto& [j, v] : row.coeffs) os << " " << lp.names[j] << ":" << v;
        if (!row.dual_tag.empty()) os << " : " << row.dual_tag;
        os << "\n";
    }
    return os.str();
}

}  // namespace hmg

#endif  // HMG_LP_HPP
