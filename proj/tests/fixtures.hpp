// Shared in-code test cases. table_case() mirrors the shipped three-H-MG
// reference case (synthetic 24h profiles, two scenarios); micro_case() builds
// tiny instances for oracle-checked tests.
#pragma once

#include <hmg/model.hpp>

#include <cmath>
#include <vector>

namespace fixtures {

inline bool is_peak_hour(int t) {
    return (t >= 7 && t <= 9) || (t >= 18 && t <= 20);
}

// Two-level price profile: exactly two distinct values per scenario keeps the
// number of profitable shift pairs small and the tests fast.
inline std::vector<std::vector<double>> price_profile() {
    std::vector<std::vector<double>> p(2, std::vector<double>(24));
    for (int t = 0; t < 24; ++t) {
        p[0][t] = is_peak_hour(t) ? 0.12 : 0.06;
        p[1][t] = is_peak_hour(t) ? 0.13 : 0.05;
    }
    return p;
}

inline std::vector<std::vector<double>> two_peak_load(double base, double peak) {
    std::vector<std::vector<double>> s(2, std::vector<double>(24));
    for (int t = 0; t < 24; ++t) {
        double v = is_peak_hour(t) ? peak : base;
        s[0][t] = v;
        s[1][t] = 1.1 * v;
    }
    return s;
}

inline std::vector<std::vector<double>> flat_series(double v0, double v1) {
    return {std::vector<double>(24, v0), std::vector<double>(24, v1)};
}

inline std::vector<std::vector<double>> nocturnal_wind(double cap) {
    std::vector<std::vector<double>> s(2, std::vector<double>(24));
    for (int t = 0; t < 24; ++t) {
        bool night = t <= 6 || t >= 21;
        s[0][t] = cap * (night ? 0.8 : 0.3);
        s[1][t] = cap * (night ? 0.6 : 0.4);
    }
    return s;
}

inline std::vector<std::vector<double>> midday_solar(double cap) {
    std::vector<std::vector<double>> s(2, std::vector<double>(24));
    for (int t = 0; t < 24; ++t) {
        double bell = (t >= 9 && t <= 16) ? 1.0 - std::fabs(t - 12.5) / 5.0 : 0.0;
        s[0][t] = cap * 0.6 * bell;
        s[1][t] = cap * 0.45 * bell;
    }
    return s;
}

inline hmg::DeviceSpec chp(double pe, double ph) {
    hmg::DeviceSpec d;
    d.kind = hmg::DeviceKind::CHP;
    d.p_max = pe;
    d.p_max_h = ph;
    d.zeta_e = 0.35;
    d.zeta_h = 0.45;
    d.n_fuel = 0.9;
    d.fuel_price = 0.03;
    return d;
}

inline hmg::DeviceSpec gas_boiler() {
    hmg::DeviceSpec d;
    d.kind = hmg::DeviceKind::GB;
    d.p_max = 150.0;
    d.n_fuel = 0.9;
    d.fuel_price = 0.03;
    return d;
}

inline hmg::ValidatedCase table_case() {
    hmg::CaseDefinition def;
    def.grid.T = 24;
    def.scenarios.W = 2;
    def.scenarios.weights = {0.6, 0.4};
    def.scenarios.mcp_pred = price_profile();

    hmg::HMGSpec a;
    a.id = "A";
    a.eta = 1.0;
    a.load_e = two_peak_load(40, 90);
    a.load_h = two_peak_load(40, 60);
    a.devices.push_back(chp(142, 104));
    {
        hmg::DeviceSpec wt;
        wt.kind = hmg::DeviceKind::WT;
        wt.p_max = 50.0;
        wt.availability = nocturnal_wind(50.0);
        a.devices.push_back(wt);
    }
    a.devices.push_back(gas_boiler());
    a.devices.push_back(gas_boiler());

    hmg::HMGSpec b;
    b.id = "B";
    b.eta = 1.0;
    b.load_e = two_peak_load(60, 140);
    b.load_h = two_peak_load(80, 120);
    b.devices.push_back(chp(207, 140));
    {
        hmg::DeviceSpec ehp;
        ehp.kind = hmg::DeviceKind::EHP;
        ehp.p_max = 700.0;
        ehp.cop = 3.0;
        b.devices.push_back(ehp);
    }
    {
        hmg::DeviceSpec stp;
        stp.kind = hmg::DeviceKind::STP;
        stp.p_max = 600.0;
        stp.availability = midday_solar(600.0);
        b.devices.push_back(stp);
    }
    {
        hmg::DeviceSpec es;
        es.kind = hmg::DeviceKind::ES;
        es.p_max = 500.0;
        es.soc_min = 0.1;
        es.soc_max = 0.9;
        es.soc_ini = 0.5;
        es.soc_end = 0.5;
        b.devices.push_back(es);
    }
    b.devices.push_back(gas_boiler());
    b.devices.push_back(gas_boiler());

    hmg::HMGSpec c;
    c.id = "C";
    c.eta = 1.0;
    c.load_e = two_peak_load(30, 70);
    c.load_h = two_peak_load(60, 140);
    {
        hmg::DeviceSpec tes;
        tes.kind = hmg::DeviceKind::TES;
        tes.p_max = 240.0;  // 4 m3 at 60 kWh/m3
        tes.soc_min = 0.0;
        tes.soc_max = 1.0;
        tes.soc_ini = 0.5;
        tes.soc_end = 0.5;
        tes.zeta_tes = 0.98;
        c.devices.push_back(tes);
    }
    for (int u = 0; u < 2; ++u) {
        hmg::DeviceSpec eb;
        eb.kind = hmg::DeviceKind::EB;
        eb.p_max = 100.0;
        eb.zeta_eb = 0.95;
        c.devices.push_back(eb);
    }

    def.hmgs = {a, b, c};

    hmg::RetailerSpec r;
    r.id = "R";
    r.sell_min = 0.05;
    r.sell_max = 0.15;
    r.buy_min = 0.01;
    r.buy_max = 0.05;
    r.capacity = 1000.0;
    def.retailers = {r};

    def.bid_levels = 5;
    return hmg::validate_case(std::move(def));
}

// n H-MGs (n in {1,2}), T=2, W=1, one WT each plus a retailer; tiny enough
// for exhaustive oracles.
inline hmg::ValidatedCase micro_case(int n, bool with_retailer = true) {
    hmg::CaseDefinition def;
    def.grid.T = 2;
    def.scenarios.W = 1;
    def.scenarios.weights = {1.0};
    def.scenarios.mcp_pred = {{0.10, 0.10}};

    const char* names[] = {"A", "B"};
    for (int i = 0; i < n; ++i) {
        hmg::HMGSpec h;
        h.id = names[i];
        h.eta = 1.0;
        h.load_e = {{40.0, 30.0}};
        h.load_h = {{0.0, 0.0}};
        hmg::DeviceSpec wt;
        wt.kind = hmg::DeviceKind::WT;
        wt.p_max = 50.0;
        wt.availability = {{50.0, 50.0}};
        h.devices.push_back(wt);
        def.hmgs.push_back(h);
    }
    if (with_retailer) {
        hmg::RetailerSpec r;
        r.id = "R";
        r.sell_min = 0.0;
        r.sell_max = 0.08;
        r.buy_min = 0.0;
        r.buy_max = 0.04;
        r.capacity = 500.0;
        def.retailers = {r};
    }
    def.bid_levels = 5;
    return hmg::validate_case(std::move(def));
}

}  // namespace fixtures
