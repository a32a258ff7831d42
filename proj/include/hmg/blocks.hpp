// Constraint blocks: each builder turns one device (or the DR program, or a
// player's exchange links) into variables, rows, and objective terms for one
// scenario. Blocks carry enough metadata for the market assembly, the profit
// accounting, and the independent first-order verifier.
#pragma once

#include <hmg/bids.hpp>
#include <hmg/lp.hpp>
#include <hmg/model.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace hmg {

enum class VarRole {
    demand,
    dr_shift,
    chp_e,
    chp_h,
    wt,
    stp,
    gb,
    es_p,
    es_soc,
    tes_p,
    tes_soc,
    eb_h,
    eb_e,
    ehp_h,
    ehp_e,
    buy_e,   // import from retailer
    sell_e,  // export to retailer
    peer,    // directed intra-coalition transfer
};

// Stationarity equation id for reporting, per variable role.
inline int stationarity_eq(VarRole r) {
    switch (r) {
        case VarRole::dr_shift: return 67;
        case VarRole::demand: return 68;
        case VarRole::chp_e: return 69;
        case VarRole::chp_h: return 70;
        case VarRole::wt: return 71;
        case VarRole::es_p: return 72;
        case VarRole::es_soc: return 73;
        case VarRole::eb_h: return 74;
        case VarRole::eb_e: return 75;
        case VarRole::ehp_h: return 76;
        case VarRole::ehp_e: return 77;
        case VarRole::stp: return 78;
        case VarRole::gb: return 79;
        case VarRole::tes_p: return 80;
        case VarRole::tes_soc: return 81;
        default: return 0;  // exchange variables have no numbered stationarity row
    }
}

struct BalanceTerm {
    std::string hmg;
    char carrier;  // 'e' or 'h'
    double coeff;  // consumption-positive convention
};

struct ProfitTerm {
    std::string player;
    double coeff;  // pounds per unit of the variable
};

struct VarDef {
    std::string name;
    double lo = 0.0, hi = kInf;
    std::string lo_tag, hi_tag;  // bound multiplier names (empty = untracked)
    int lo_eq = 0, hi_eq = 0;    // complementarity pair ids
    double obj = 0.0;            // revenue-form block objective coefficient
    bool keep_sign = false;      // true: enters the clearing objective as-is (DR)
    VarRole role = VarRole::demand;
    std::string owner;
    int device = -1, t = -1, w = -1, t2 = -1;  // t2: shift destination period
    std::vector<BalanceTerm> balance;
    std::vector<ProfitTerm> profit;
};

struct RowDef {
    RowSense sense = RowSense::eq;
    double rhs = 0.0;
    std::vector<std::pair<std::string, double>> coeffs;  // by variable name
    std::string dual_tag;
    int eq_id = 0;
};

struct ConstraintBlock {
    std::vector<VarDef> vars;
    std::vector<RowDef> rows;
};

namespace detail {

inline std::string idx(int t, int w) { return "." + std::to_string(t) + "." + std::to_string(w); }

inline std::string dev_name(const std::string& hmg, DeviceKind k, int j) {
    return hmg + "." + device_kind_name(k) + std::to_string(j);
}

inline std::string tag(const std::string& base, const std::string& scope, int t, int w) {
    return base + "." + scope + idx(t, w);
}

}  // namespace detail

// Demand-response program (one H-MG, one scenario): realized demand variables
// and profitable shift variables. A shift from expensive period t to cheaper
// t2 raises the realized load at t and lowers it at t2 by the same amount;
// the antisymmetric counterpart is eliminated by substitution, so each pair
// appears once with the full price spread as its reward.
inline ConstraintBlock build_dr_block(const HMGSpec& h, const std::vector<double>& lambda, int w) {
    const int T = static_cast<int>(lambda.size());
    for (int t = 0; t < T; ++t)
        if (h.load_e[w][t] < 0.0)
            throw std::invalid_argument(h.id + ": negative predicted load at t=" + std::to_string(t));

    ConstraintBlock b;
    std::vector<std::vector<std::string>> out_shifts(T), in_shifts(T);
    for (int t = 0; t < T; ++t)
        for (int t2 = 0; t2 < T; ++t2) {
            if (t == t2 || lambda[t] <= lambda[t2]) continue;
            VarDef v;
            v.name = h.id + ".dr.s" + std::to_string(t) + "_" + std::to_string(t2) + detail::idx(t, w);
            v.lo = 0.0;
            v.hi = kInf;
            v.obj = lambda[t] - lambda[t2];  // both ordered pairs of the 0.5-weighted sum
            v.keep_sign = true;
            v.role = VarRole::dr_shift;
            v.owner = h.id;
            v.t = t;
            v.t2 = t2;
            v.w = w;
            v.profit.push_back({h.id, v.obj});
            out_shifts[t].push_back(v.name);
            in_shifts[t2].push_back(v.name);
            b.vars.push_back(std::move(v));
        }

    for (int t = 0; t < T; ++t) {
        VarDef v;
        v.name = h.id + ".load.d" + detail::idx(t, w);
        v.lo = 0.0;
        v.hi = kInf;
        v.role = VarRole::demand;
        v.owner = h.id;
        v.t = t;
        v.w = w;
        v.balance.push_back({h.id, 'e', +1.0});
        b.vars.push_back(std::move(v));

        RowDef def;  // realized load definition
        def.sense = RowSense::eq;
        def.rhs = h.load_e[w][t];
        def.coeffs.push_back({h.id + ".load.d" + detail::idx(t, w), 1.0});
        for (const auto& s : out_shifts[t]) def.coeffs.push_back({s, -1.0});
        for (const auto& s : in_shifts[t]) def.coeffs.push_back({s, +1.0});
        def.dual_tag = detail::tag("gamma^D,e", h.id, t, w);
        def.eq_id = 2;
        b.rows.push_back(std::move(def));

        if (!out_shifts[t].empty()) {  // total outgoing shift capped by the prediction
            RowDef cap;
            cap.sense = RowSense::le;
            cap.rhs = h.load_e[w][t];
            for (const auto& s : out_shifts[t]) cap.coeffs.push_back({s, 1.0});
            cap.dual_tag = detail::tag("etabar^D,e", h.id, t, w);
            cap.eq_id = 3;
            b.rows.push_back(std::move(cap));
        }
    }
    return b;
}

inline ConstraintBlock build_generation_block(const std::string& hmg_id, int j, const DeviceSpec& d,
                                              const DeviceBids& bids, int w) {
    ConstraintBlock b;
    const std::string dev = detail::dev_name(hmg_id, d.kind, j);
    switch (d.kind) {
        case DeviceKind::CHP: {
            if (d.zeta_e <= 0.0 || d.zeta_h <= 0.0 || d.n_fuel <= 0.0)
                throw std::invalid_argument(dev + ": missing CHP efficiency");
            const int T = static_cast<int>(bids.e[w].size());
            for (int t = 0; t < T; ++t) {
                VarDef pe;
                pe.name = dev + ".e" + detail::idx(t, w);
                pe.lo = d.p_min;
                pe.hi = d.p_max;
                pe.lo_tag = detail::tag("etaunder^CHP,e", dev, t, w);
                pe.hi_tag = detail::tag("etabar^CHP,e", dev, t, w);
                pe.lo_eq = 82;
                pe.hi_eq = 83;
                pe.obj = bids.e[w][t];
                pe.role = VarRole::chp_e;
                pe.owner = hmg_id;
                pe.device = j;
                pe.t = t;
                pe.w = w;
                pe.balance.push_back({hmg_id, 'e', -1.0});
                pe.profit.push_back({hmg_id, bids.e[w][t]});
                b.vars.push_back(std::move(pe));

                VarDef ph;
                ph.name = dev + ".h" + detail::idx(t, w);
                ph.lo = 0.0;
                ph.hi = d.p_max_h;
                ph.lo_tag = detail::tag("etaunder^CHP,h", dev, t, w);
                ph.hi_tag = detail::tag("etabar^CHP,h", dev, t, w);
                ph.lo_eq = 84;
                ph.hi_eq = 85;
                ph.obj = bids.h[w][t] - d.fuel_price / d.n_fuel;
                ph.role = VarRole::chp_h;
                ph.owner = hmg_id;
                ph.device = j;
                ph.t = t;
                ph.w = w;
                ph.balance.push_back({hmg_id, 'h', -1.0});
                ph.profit.push_back({hmg_id, bids.h[w][t]});
                b.vars.push_back(std::move(ph));

                RowDef c;  // electric output tied to heat output
                c.sense = RowSense::eq;
                c.rhs = d.zeta_prime_e;
                c.coeffs.push_back({dev + ".e" + detail::idx(t, w), 1.0});
                c.coeffs.push_back({dev + ".h" + detail::idx(t, w), -d.zeta_e / d.zeta_h});
                c.dual_tag = detail::tag("gamma^CHP,e", dev, t, w);
                c.eq_id = 10;
                b.rows.push_back(std::move(c));
            }
            break;
        }
        case DeviceKind::WT: {
            const int T = static_cast<int>(bids.e[w].size());
            for (int t = 0; t < T; ++t) {
                VarDef v;
                v.name = dev + ".e" + detail::idx(t, w);
                v.lo = 0.0;
                v.hi = d.availability[w][t];
                v.lo_tag = detail::tag("gammaunder^WT,e", dev, t, w);
                v.hi_tag = detail::tag("gammabar^WT,e", dev, t, w);
                v.lo_eq = 86;
                v.hi_eq = 87;
                v.obj = bids.e[w][t];
                v.role = VarRole::wt;
                v.owner = hmg_id;
                v.device = j;
                v.t = t;
                v.w = w;
                v.balance.push_back({hmg_id, 'e', -1.0});
                v.profit.push_back({hmg_id, bids.e[w][t]});
                b.vars.push_back(std::move(v));
            }
            break;
        }
        case DeviceKind::STP: {
            const int T = static_cast<int>(bids.h[w].size());
            for (int t = 0; t < T; ++t) {
                VarDef v;
                v.name = dev + ".h" + detail::idx(t, w);
                v.lo = 0.0;
                v.hi = d.availability[w][t];
                v.lo_tag = detail::tag("etaunder^STP,h", dev, t, w);
                v.hi_tag = detail::tag("etabar^STP,h", dev, t, w);
                v.lo_eq = 102;
                v.hi_eq = 103;
                v.obj = bids.h[w][t];
                v.role = VarRole::stp;
                v.owner = hmg_id;
                v.device = j;
                v.t = t;
                v.w = w;
                v.balance.push_back({hmg_id, 'h', -1.0});
                v.profit.push_back({hmg_id, bids.h[w][t]});
                b.vars.push_back(std::move(v));
            }
            break;
        }
        case DeviceKind::GB: {
            if (d.n_fuel <= 0.0) throw std::invalid_argument(dev + ": missing GB fuel factor");
            const int T = static_cast<int>(bids.h[w].size());
            for (int t = 0; t < T; ++t) {
                VarDef v;
                v.name = dev + ".h" + detail::idx(t, w);
                v.lo = d.p_min;
                v.hi = d.p_max;
                v.lo_tag = detail::tag("etaunder^GB,h", dev, t, w);
                v.hi_tag = detail::tag("etabar^GB,h", dev, t, w);
                v.lo_eq = 100;
                v.hi_eq = 101;
                v.obj = bids.h[w][t] - d.fuel_price / d.n_fuel;
                v.role = VarRole::gb;
                v.owner = hmg_id;
                v.device = j;
                v.t = t;
                v.w = w;
                v.balance.push_back({hmg_id, 'h', -1.0});
                v.profit.push_back({hmg_id, bids.h[w][t]});
                b.vars.push_back(std::move(v));
            }
            break;
        }
        default:
            throw std::invalid_argument(dev + ": not a generation device");
    }
    return b;
}

inline ConstraintBlock build_storage_block(const std::string& hmg_id, int j, const DeviceSpec& d,
                                           const DeviceBids& bids, int w, const TimeGrid& grid,
                                           const SolverFlags& flags) {
    if (d.kind != DeviceKind::ES && d.kind != DeviceKind::TES)
        throw std::invalid_argument("not a storage device");
    const bool es = d.kind == DeviceKind::ES;
    const std::string dev = detail::dev_name(hmg_id, d.kind, j);
    const int T = grid.T;
    const double charge_cap = d.p_min > 0.0 ? d.p_min : d.p_max;
    const double retain = (!es && flags.tes_loss) ? d.zeta_tes : 1.0;
    const double soc_step = grid.step / d.p_max;  // SOC change per kW over one period

    // Reachability of the terminal anchor by interval propagation. In
    // physical mode discharging (P up to p_max) drains SOC and charging
    // (down to -charge_cap) fills it; literal mode swaps the roles.
    {
        const double drop = (flags.soc_physical ? d.p_max : charge_cap) * soc_step;
        const double rise = (flags.soc_physical ? charge_cap : d.p_max) * soc_step;
        double lo = d.soc_ini, hi = d.soc_ini;
        for (int t = 1; t <= T; ++t) {
            lo = std::max(retain * lo - drop, d.soc_min);
            hi = std::min(retain * hi + rise, d.soc_max);
            if (lo > hi)
                throw std::invalid_argument(dev + ": SOC window empty at t=" + std::to_string(t));
        }
        if (d.soc_end < lo - 1e-12 || d.soc_end > hi + 1e-12)
            throw std::invalid_argument(dev + ": terminal SOC " + std::to_string(d.soc_end) +
                                        " unreachable (window [" + std::to_string(lo) + "," +
                                        std::to_string(hi) + "])");
    }

    ConstraintBlock b;
    const auto& price = es ? bids.e : bids.h;
    const char* base = es ? "ES" : "TES";
    for (int t = 0; t < T; ++t) {
        VarDef p;
        p.name = dev + ".p" + detail::idx(t, w);
        p.lo = -charge_cap;
        p.hi = d.p_max;
        p.lo_tag = detail::tag(std::string("etaunder^") + base, dev, t, w);
        p.hi_tag = detail::tag(std::string("etabar^") + base, dev, t, w);
        p.lo_eq = es ? 88 : 96;
        p.hi_eq = es ? 89 : 97;
        p.obj = price[w][t];
        p.role = es ? VarRole::es_p : VarRole::tes_p;
        p.owner = hmg_id;
        p.device = j;
        p.t = t;
        p.w = w;
        p.balance.push_back({hmg_id, es ? 'e' : 'h', -1.0});  // positive P = discharge/supply
        p.profit.push_back({hmg_id, price[w][t]});
        b.vars.push_back(std::move(p));
    }
    for (int t = 0; t <= T; ++t) {
        VarDef s;
        s.name = dev + ".soc" + detail::idx(t, w);
        s.lo = d.soc_min;
        s.hi = d.soc_max;
        s.lo_tag = detail::tag(std::string("etaunder^SOC,") + base, dev, t, w);
        s.hi_tag = detail::tag(std::string("etabar^SOC,") + base, dev, t, w);
        s.lo_eq = es ? 90 : 98;
        s.hi_eq = es ? 91 : 99;
        s.role = es ? VarRole::es_soc : VarRole::tes_soc;
        s.owner = hmg_id;
        s.device = j;
        s.t = t;
        s.w = w;
        b.vars.push_back(std::move(s));
    }

    {
        RowDef ini;  // initial anchor
        ini.sense = RowSense::eq;
        ini.rhs = d.soc_ini;
        ini.coeffs.push_back({dev + ".soc" + detail::idx(0, w), 1.0});
        ini.dual_tag = detail::tag(std::string("gamma'^") + base, dev, 0, w);
        ini.eq_id = 20;
        b.rows.push_back(std::move(ini));
    }
    const double psign = flags.soc_physical ? +1.0 : -1.0;  // discharge drains in physical mode
    for (int t = 1; t <= T; ++t) {
        RowDef rec;
        rec.sense = RowSense::eq;
        rec.rhs = 0.0;
        rec.coeffs.push_back({dev + ".soc" + detail::idx(t, w), 1.0});
        rec.coeffs.push_back({dev + ".soc" + detail::idx(t - 1, w), -retain});
        rec.coeffs.push_back({dev + ".p" + detail::idx(t - 1, w), psign * soc_step});
        rec.dual_tag = detail::tag(std::string("gamma^") + base, dev, t, w);
        rec.eq_id = 18;
        b.rows.push_back(std::move(rec));
    }
    {
        RowDef fin;  // terminal anchor
        fin.sense = RowSense::eq;
        fin.rhs = d.soc_end;
        fin.coeffs.push_back({dev + ".soc" + detail::idx(T, w), 1.0});
        fin.dual_tag = detail::tag(std::string("gamma''^") + base, dev, T, w);
        fin.eq_id = 21;
        b.rows.push_back(std::move(fin));
    }
    return b;
}

inline ConstraintBlock build_conversion_block(const std::string& hmg_id, int j, const DeviceSpec& d,
                                              const DeviceBids& bids, int w) {
    if (d.kind != DeviceKind::EB && d.kind != DeviceKind::EHP)
        throw std::invalid_argument("not a conversion device");
    const bool eb = d.kind == DeviceKind::EB;
    const double ratio = eb ? d.zeta_eb : d.cop;  // heat output per unit electricity
    if (ratio <= 0.0)
        throw std::invalid_argument(detail::dev_name(hmg_id, d.kind, j) + ": nonpositive conversion factor");
    const std::string dev = detail::dev_name(hmg_id, d.kind, j);
    const int T = static_cast<int>(bids.h[w].size());

    ConstraintBlock b;
    for (int t = 0; t < T; ++t) {
        VarDef ph;
        ph.name = dev + ".h" + detail::idx(t, w);
        ph.lo = 0.0;
        ph.hi = d.p_max;
        ph.lo_tag = detail::tag(eb ? "etaunder^EB,h" : "etaunder^EHP,h", dev, t, w);
        ph.hi_tag = detail::tag(eb ? "etabar^EB,h" : "etabar^EHP,h", dev, t, w);
        ph.lo_eq = eb ? 92 : 94;
        ph.hi_eq = eb ? 93 : 95;
        ph.obj = bids.h[w][t];
        ph.role = eb ? VarRole::eb_h : VarRole::ehp_h;
        ph.owner = hmg_id;
        ph.device = j;
        ph.t = t;
        ph.w = w;
        ph.balance.push_back({hmg_id, 'h', -1.0});
        ph.profit.push_back({hmg_id, bids.h[w][t]});
        b.vars.push_back(std::move(ph));

        VarDef pe;
        pe.name = dev + ".e" + detail::idx(t, w);
        pe.lo = 0.0;
        pe.hi = d.p_max / ratio;
        pe.obj = -bids.e[w][t];
        pe.role = eb ? VarRole::eb_e : VarRole::ehp_e;
        pe.owner = hmg_id;
        pe.device = j;
        pe.t = t;
        pe.w = w;
        pe.balance.push_back({hmg_id, 'e', +1.0});  // converters consume electricity
        pe.profit.push_back({hmg_id, -bids.e[w][t]});
        b.vars.push_back(std::move(pe));

        RowDef c;
        c.sense = RowSense::eq;
        c.rhs = 0.0;
        c.coeffs.push_back({dev + ".h" + detail::idx(t, w), 1.0});
        c.coeffs.push_back({dev + ".e" + detail::idx(t, w), -ratio});
        c.dual_tag = detail::tag(eb ? "zeta^EB,h" : "gamma^HP,h", dev, t, w);
        c.eq_id = eb ? 24 : 28;
        b.rows.push_back(std::move(c));
    }
    return b;
}

// Exchange links for one H-MG: retailer imports/exports plus the directed peer
// links through which this H-MG *imports* from coalition members (each directed
// link is created exactly once, by its buyer). Export-side variables of this
// H-MG live in its peers' blocks and are referenced here by name for the
// share-limit rows.
inline ConstraintBlock build_exchange_block(const HMGSpec& h, const std::vector<RetailerSpec>& retailers,
                                            const std::vector<std::string>& peers, const BidVector& bids,
                                            const std::vector<double>& lambda, int w) {
    ConstraintBlock b;
    const int T = static_cast<int>(lambda.size());
    std::vector<std::vector<std::string>> imports(T), exports(T);

    for (const auto& r : retailers) {
        const auto& sell = bids.retail_sell.at(r.id);
        const auto& buy = bids.retail_buy.at(r.id);
        for (int t = 0; t < T; ++t) {
            VarDef in;
            in.name = h.id + ".x" + r.id + ".in" + detail::idx(t, w);
            in.lo = 0.0;
            in.hi = r.capacity;
            in.obj = sell[w][t];  // purchases enter the income statement positively
            in.role = VarRole::buy_e;
            in.owner = h.id;
            in.t = t;
            in.w = w;
            in.balance.push_back({h.id, 'e', -1.0});
            in.profit.push_back({h.id, sell[w][t]});
            in.profit.push_back({r.id, sell[w][t]});
            imports[t].push_back(in.name);
            b.vars.push_back(std::move(in));

            VarDef out;
            out.name = h.id + ".x" + r.id + ".out" + detail::idx(t, w);
            out.lo = 0.0;
            out.hi = r.capacity;
            out.obj = -buy[w][t];
            out.role = VarRole::sell_e;
            out.owner = h.id;
            out.t = t;
            out.w = w;
            out.balance.push_back({h.id, 'e', +1.0});
            out.profit.push_back({h.id, buy[w][t]});
            out.profit.push_back({r.id, -buy[w][t]});
            exports[t].push_back(out.name);
            b.vars.push_back(std::move(out));
        }
    }

    for (const auto& m : peers) {
        for (int t = 0; t < T; ++t) {
            for (char carrier : {'e', 'h'}) {
                VarDef v;  // m sells to h
                v.name = m + ".p" + h.id + "." + carrier + detail::idx(t, w);
                v.lo = 0.0;
                v.hi = kInf;
                v.role = VarRole::peer;
                v.owner = h.id;
                v.t = t;
                v.w = w;
                v.balance.push_back({h.id, carrier, -1.0});
                v.balance.push_back({m, carrier, +1.0});
                v.profit.push_back({h.id, -lambda[t]});  // buyer pays the transfer price
                v.profit.push_back({m, lambda[t]});      // seller collects it
                if (carrier == 'e') {
                    imports[t].push_back(v.name);
                    exports[t].push_back(h.id + ".p" + m + ".e" + detail::idx(t, w));
                }
                b.vars.push_back(std::move(v));
            }
        }
    }

    // Per-counterparty share limits; vacuous (and omitted) at eta = 1.
    if (h.eta < 1.0) {
        auto emit = [&](const std::vector<std::string>& names, int t, bool import_side) {
            for (size_t c = 0; c < names.size(); ++c) {
                RowDef row;
                row.sense = RowSense::le;
                row.rhs = 0.0;
                for (size_t c2 = 0; c2 < names.size(); ++c2) {
                    double coef = (c2 == c ? 1.0 : 0.0) - h.eta;
                    if (coef != 0.0) row.coeffs.push_back({names[c2], coef});
                }
                row.dual_tag = detail::tag(import_side ? "etabar^Grid,e" : "etaunder^Grid,e",
                                           h.id + ".c" + std::to_string(c), t, w);
                row.eq_id = import_side ? 60 : 61;
                b.rows.push_back(std::move(row));
            }
        };
        for (int t = 0; t < T; ++t) {
            if (!imports[t].empty()) emit(imports[t], t, true);
            if (!exports[t].empty()) emit(exports[t], t, false);
        }
    }
    return b;
}

}  // namespace hmg
