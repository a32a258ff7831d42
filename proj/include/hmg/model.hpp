// Domain model: time grid, scenarios, devices, H-MGs, retailers, coalition
// structures, and case validation.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace hmg {

struct TimeGrid {
    int T = 24;
    double step = 1.0;  // hours
};

// Scenario weights plus the predicted market-clearing price overlay. Other
// per-scenario series (loads, renewable caps) live on their owners.
struct ScenarioSet {
    int W = 1;
    std::vector<double> weights;                // [W]
    std::vector<std::vector<double>> mcp_pred;  // [W][T], pounds/kWh
};

enum class DeviceKind { CHP, WT, STP, ES, TES, EB, EHP, GB };

inline const char* device_kind_name(DeviceKind k) {
    switch (k) {
        case DeviceKind::CHP: return "chp";
        case DeviceKind::WT: return "wt";
        case DeviceKind::STP: return "stp";
        case DeviceKind::ES: return "es";
        case DeviceKind::TES: return "tes";
        case DeviceKind::EB: return "eb";
        case DeviceKind::EHP: return "ehp";
        case DeviceKind::GB: return "gb";
    }
    return "?";
}

inline std::optional<DeviceKind> device_kind_from_name(const std::string& s) {
    static const std::map<std::string, DeviceKind> m = {
        {"chp", DeviceKind::CHP}, {"wt", DeviceKind::WT},   {"stp", DeviceKind::STP},
        {"es", DeviceKind::ES},   {"tes", DeviceKind::TES}, {"eb", DeviceKind::EB},
        {"ehp", DeviceKind::EHP}, {"gb", DeviceKind::GB}};
    auto it = m.find(s);
    if (it == m.end()) return std::nullopt;
    return it->second;
}

// One physical unit. "2x150" bank entries are flattened by the loader into
// independent duplicate instances, indexed by j within the H-MG.
struct DeviceSpec {
    DeviceKind kind = DeviceKind::WT;
    double p_min = 0.0;    // kW; electrical for CHP/WT/ES, thermal for the rest
    double p_max = 0.0;    // kW
    double p_max_h = 0.0;  // kW, CHP thermal cap

    // Efficiencies / conversion factors (only those the kind needs are read).
    double zeta_e = 0.0;        // CHP electrical efficiency
    double zeta_h = 0.0;        // CHP thermal efficiency
    double zeta_prime_e = 0.0;  // CHP affine offset, default 0
    double zeta_eb = 0.0;       // EB electric-to-heat
    double cop = 0.0;           // EHP coefficient of performance
    double n_fuel = 0.0;        // fuel conversion for CHP heat / GB
    double fuel_price = 0.0;    // pounds/kWh

    // Storage (ES/TES); SOC values are normalized to [0,1].
    double soc_min = 0.0, soc_max = 1.0;
    double soc_ini = 0.5, soc_end = 0.5;
    double zeta_tes = 1.0;  // TES retention factor (used only with tes-loss on)

    // Scenario-dependent generation cap for WT/STP, absolute kW: [W][T].
    std::vector<std::vector<double>> availability;
};

struct HMGSpec {
    std::string id;
    std::vector<DeviceSpec> devices;
    double eta = 1.0;                         // export/import split fraction, Eq. (60)-(61) style limit
    std::vector<std::vector<double>> load_e;  // [W][T] predicted electrical load, kW
    std::vector<std::vector<double>> load_h;  // [W][T] thermal load, kW
};

struct RetailerSpec {
    std::string id;
    double sell_min = 0.0, sell_max = 0.0;  // price band for energy sold to H-MGs
    double buy_min = 0.0, buy_max = 0.0;    // price band for energy bought from H-MGs
    double capacity = 0.0;                  // kW per period
};

struct CoalitionStructure {
    std::vector<std::string> upper;               // coalesced upper-level group
    std::vector<std::vector<std::string>> lower;  // lower-level groups
    std::string label;
};

struct SolverFlags {
    bool soc_physical = true;       // false = literal recursion sign
    bool tes_loss = false;          // retention factor in SOC recursion
    bool demand_pairing_literal = false;      // verifier pairs demand with thermal price
    double tolerance = 1e-6;
};

struct CaseDefinition {
    TimeGrid grid;
    ScenarioSet scenarios;
    std::vector<HMGSpec> hmgs;
    std::vector<RetailerSpec> retailers;
    int bid_levels = 5;  // K
    SolverFlags flags;
};

class ValidationError : public std::runtime_error {
  public:
    ValidationError(std::string location, std::string message)
        : std::runtime_error(location + ": " + message),
          location_(std::move(location)) {}
    const std::string& location() const { return location_; }

  private:
    std::string location_;
};

// A CaseDefinition whose invariants have been checked and whose scenario
// weights have been normalized. Immutable by convention after construction.
struct ValidatedCase {
    CaseDefinition def;
};

namespace detail {

inline void require(bool ok, const std::string& loc, const std::string& msg) {
    if (!ok) throw ValidationError(loc, msg);
}

inline void check_series(const std::vector<std::vector<double>>& s, int W, int T,
                         const std::string& loc, bool nonneg = true) {
    require(static_cast<int>(s.size()) == W, loc,
            "expected " + std::to_string(W) + " scenario series, found " + std::to_string(s.size()));
    for (int w = 0; w < W; ++w) {
        require(static_cast<int>(s[w].size()) == T, loc + ".w" + std::to_string(w),
                "series length " + std::to_string(s[w].size()) + " != T=" + std::to_string(T));
        for (int t = 0; t < T; ++t) {
            require(std::isfinite(s[w][t]), loc + ".w" + std::to_string(w) + ".t" + std::to_string(t),
                    "non-finite value");
            if (nonneg)
                require(s[w][t] >= 0.0, loc + ".w" + std::to_string(w) + ".t" + std::to_string(t),
                        "negative value");
        }
    }
}

inline void check_device(const DeviceSpec& d, int W, int T, const std::string& loc) {
    require(d.p_min >= 0.0 && d.p_min <= d.p_max, loc, "capacity bounds must satisfy 0 <= min <= max");
    auto eff_ok = [](double z) { return z > 0.0 && z <= 1.5; };
    switch (d.kind) {
        case DeviceKind::CHP:
            require(eff_ok(d.zeta_e), loc + ".zeta_e", "CHP electrical efficiency must be in (0,1.5]");
            require(eff_ok(d.zeta_h), loc + ".zeta_h", "CHP thermal efficiency must be in (0,1.5]");
            require(d.n_fuel > 0.0, loc + ".n_fuel", "CHP fuel conversion factor must be positive");
            require(d.p_max_h >= 0.0, loc + ".p_max_h", "CHP thermal cap must be nonnegative");
            require(d.fuel_price >= 0.0, loc + ".fuel_price", "fuel price must be nonnegative");
            break;
        case DeviceKind::GB:
            require(d.n_fuel > 0.0, loc + ".n_fuel", "GB fuel conversion factor must be positive");
            require(d.fuel_price >= 0.0, loc + ".fuel_price", "fuel price must be nonnegative");
            break;
        case DeviceKind::EB:
            require(eff_ok(d.zeta_eb), loc + ".zeta_eb", "EB efficiency must be in (0,1.5]");
            break;
        case DeviceKind::EHP:
            require(d.cop >= 1.0, loc + ".cop", "EHP COP must be >= 1");
            break;
        case DeviceKind::ES:
        case DeviceKind::TES:
            require(0.0 <= d.soc_min && d.soc_min <= d.soc_ini && d.soc_ini <= d.soc_max && d.soc_max <= 1.0,
                    loc + ".soc", "SOC bounds must satisfy 0 <= min <= ini <= max <= 1");
            require(d.soc_min <= d.soc_end && d.soc_end <= d.soc_max,
                    loc + ".soc_end", "SOC terminal anchor outside bounds");
            if (d.kind == DeviceKind::TES)
                require(eff_ok(d.zeta_tes), loc + ".zeta_tes", "TES retention must be in (0,1.5]");
            break;
        case DeviceKind::WT:
        case DeviceKind::STP:
            check_series(d.availability, W, T, loc + ".availability");
            break;
    }
}

}  // namespace detail

inline ValidatedCase validate_case(CaseDefinition raw) {
    using detail::require;
    const int T = raw.grid.T;
    require(T >= 1, "grid.T", "T must be >= 1");
    require(raw.grid.step > 0.0, "grid.step", "step must be positive");

    const int W = raw.scenarios.W;
    require(W >= 1, "scenarios.W", "W must be >= 1");
    require(static_cast<int>(raw.scenarios.weights.size()) == W, "scenarios.weights",
            "expected " + std::to_string(W) + " weights");
    double wsum = 0.0;
    for (double p : raw.scenarios.weights) {
        require(std::isfinite(p) && p >= 0.0, "scenarios.weights", "weights must be nonnegative");
        wsum += p;
    }
    require(std::fabs(wsum - 1.0) <= 1e-6, "scenarios.weights",
            "weights sum " + std::to_string(wsum));
    for (double& p : raw.scenarios.weights) p /= wsum;
    detail::check_series(raw.scenarios.mcp_pred, W, T, "scenarios.mcp_pred");

    require(!raw.hmgs.empty(), "hmgs", "no H-MGs");
    std::set<std::string> ids;
    for (size_t i = 0; i < raw.hmgs.size(); ++i) {
        const auto& h = raw.hmgs[i];
        std::string loc = "hmgs." + (h.id.empty() ? std::to_string(i) : h.id);
        require(!h.id.empty(), loc + ".id", "missing id");
        require(ids.insert(h.id).second, loc + ".id", "duplicate id");
        require(h.eta >= 0.0 && h.eta <= 1.0, loc + ".eta", "eta must be in [0,1]");
        detail::check_series(h.load_e, W, T, loc + ".load_e");
        detail::check_series(h.load_h, W, T, loc + ".load_h");
        for (size_t j = 0; j < h.devices.size(); ++j)
            detail::check_device(h.devices[j], W, T,
                                 loc + "." + device_kind_name(h.devices[j].kind) + std::to_string(j));
    }
    for (size_t k = 0; k < raw.retailers.size(); ++k) {
        const auto& r = raw.retailers[k];
        std::string loc = "retailers." + (r.id.empty() ? std::to_string(k) : r.id);
        require(!r.id.empty(), loc + ".id", "missing id");
        require(ids.insert(r.id).second, loc + ".id", "duplicate id");
        require(r.sell_min >= 0.0 && r.sell_min <= r.sell_max, loc + ".sell", "bad sell price band");
        require(r.buy_min >= 0.0 && r.buy_min <= r.buy_max, loc + ".buy", "bad buy price band");
        require(r.capacity >= 0.0, loc + ".capacity", "capacity must be >= 0");
    }
    require(raw.bid_levels >= 1, "bid_levels", "K must be >= 1");
    return ValidatedCase{std::move(raw)};
}

enum class StructureMode { independent, coalitional, all };

namespace detail {

inline std::string join_ids(const std::vector<std::string>& g) {
    std::string s;
    for (const auto& id : g) s += id;
    return s;
}

inline std::string structure_label(const CoalitionStructure& cs) {
    std::string s = "{" + join_ids(cs.upper) + "|";
    for (size_t g = 0; g < cs.lower.size(); ++g) {
        if (g) s += ";";
        s += join_ids(cs.lower[g]);
    }
    s += "}";
    return s;
}

}  // namespace detail

// Coalition placements. Independent mode is the all-singletons market with the
// lexicographically first H-MG taking the upper level; coalitional mode puts a
// merged group at exactly one level. Output is sorted by label and stable.
inline std::vector<CoalitionStructure> enumerate_structures(const ValidatedCase& vc,
                                                            StructureMode mode) {
    std::vector<std::string> ids;
    for (const auto& h : vc.def.hmgs) ids.push_back(h.id);
    std::sort(ids.begin(), ids.end());
    const int n = static_cast<int>(ids.size());

    auto finish = [](CoalitionStructure cs) {
        std::sort(cs.upper.begin(), cs.upper.end());
        for (auto& g : cs.lower) std::sort(g.begin(), g.end());
        std::sort(cs.lower.begin(), cs.lower.end());
        cs.label = detail::structure_label(cs);
        return cs;
    };

    std::vector<CoalitionStructure> out;
    if (mode == StructureMode::independent || mode == StructureMode::all) {
        CoalitionStructure cs;
        cs.upper = {ids[0]};
        for (int i = 1; i < n; ++i) cs.lower.push_back({ids[i]});
        out.push_back(finish(std::move(cs)));
    }
    if (mode == StructureMode::coalitional || mode == StructureMode::all) {
        if (n == 2) {
            // Only a grand coalition can merge anything with two players.
            CoalitionStructure cs;
            cs.upper = ids;
            out.push_back(finish(std::move(cs)));
        } else if (n >= 3) {
            // Merged group at the upper level, singletons below.
            for (int mask = 1; mask < (1 << n) - 1; ++mask) {
                if (__builtin_popcount(static_cast<unsigned>(mask)) < 2) continue;
                CoalitionStructure cs;
                for (int i = 0; i < n; ++i)
                    if (mask & (1 << i)) cs.upper.push_back(ids[i]);
                    else cs.lower.push_back({ids[i]});
                out.push_back(finish(std::move(cs)));
            }
            // Singleton leader, all the rest merged below.
            for (int i = 0; i < n; ++i) {
                CoalitionStructure cs;
                cs.upper = {ids[i]};
                std::vector<std::string> rest;
                for (int k = 0; k < n; ++k)
                    if (k != i) rest.push_back(ids[k]);
                cs.lower.push_back(std::move(rest));
                out.push_back(finish(std::move(cs)));
            }
        }
    }
    std::sort(out.begin(), out.end(),
              [](const CoalitionStructure& a, const CoalitionStructure& b) { return a.label < b.label; });
    out.erase(std::unique(out.begin(), out.end(),
                          [](const CoalitionStructure& a, const CoalitionStructure& b) {
                              return a.label == b.label;
                          }),
              out.end());
    return out;
}

inline const HMGSpec& find_hmg(const ValidatedCase& vc, const std::string& id) {
    for (const auto& h : vc.def.hmgs)
        if (h.id == id) return h;
    throw std::out_of_range("unknown H-MG id: " + id);
}

inline const RetailerSpec& find_retailer(const ValidatedCase& vc, const std::string& id) {
    for (const auto& r : vc.def.retailers)
        if (r.id == id) return r;
    throw std::out_of_range("unknown retailer id: " + id);
}

}  // namespace hmg
