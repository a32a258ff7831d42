// Supply bids: per-device electrical/thermal price series, retailer price
// bands, admissible-range checks, and the discrete bid grid used by the
// upper-level search.
#pragma once

#include <hmg/model.hpp>

#include <map>
#include <string>
#include <vector>

namespace hmg {

// Which price series a device kind bids. Conversion devices (EB/EHP) carry
// both: heat is sold at the h bid, the electricity they draw is priced at
// their e bid.
inline bool device_has_e_bid(DeviceKind k) {
    return k == DeviceKind::CHP || k == DeviceKind::WT || k == DeviceKind::ES ||
           k == DeviceKind::EB || k == DeviceKind::EHP;
}
inline bool device_has_h_bid(DeviceKind k) {
    return k == DeviceKind::CHP || k == DeviceKind::STP || k == DeviceKind::TES ||
           k == DeviceKind::EB || k == DeviceKind::EHP || k == DeviceKind::GB;
}

struct DeviceBids {
    std::vector<std::vector<double>> e;  // [W][T], pounds/kWh (empty if kind has no e bid)
    std::vector<std::vector<double>> h;  // [W][T]
};

struct BidVector {
    std::map<std::string, std::vector<DeviceBids>> device;                  // hmg id -> per device j
    std::map<std::string, std::vector<std::vector<double>>> retail_sell;    // retailer id -> [W][T]
    std::map<std::string, std::vector<std::vector<double>>> retail_buy;     // retailer id -> [W][T]
};

// Admissible intervals: electrical bids in [0, lambda_tw], thermal bids in
// [0, 2*lambda_tw], retailers within their configured bands.
struct BidInterval {
    double lo = 0.0, hi = 0.0;
};

inline BidInterval device_bid_interval(char carrier, double lambda) {
    if (carrier == 'e') return {0.0, lambda};
    return {0.0, 2.0 * lambda};
}

// Bid at a fixed fraction of every admissible interval; level in [0,1].
inline BidVector bids_at_level(const ValidatedCase& vc, double level) {
    const int W = vc.def.scenarios.W, T = vc.def.grid.T;
    BidVector out;
    for (const auto& h : vc.def.hmgs) {
        auto& vec = out.device[h.id];
        vec.resize(h.devices.size());
        for (size_t j = 0; j < h.devices.size(); ++j) {
            const auto& d = h.devices[j];
            if (device_has_e_bid(d.kind)) vec[j].e.assign(W, std::vector<double>(T, 0.0));
            if (device_has_h_bid(d.kind)) vec[j].h.assign(W, std::vector<double>(T, 0.0));
            for (int w = 0; w < W; ++w)
                for (int t = 0; t < T; ++t) {
                    double lam = vc.def.scenarios.mcp_pred[w][t];
                    if (device_has_e_bid(d.kind)) {
                        auto iv = device_bid_interval('e', lam);
                        vec[j].e[w][t] = iv.lo + level * (iv.hi - iv.lo);
                    }
                    if (device_has_h_bid(d.kind)) {
                        auto iv = device_bid_interval('h', lam);
                        vec[j].h[w][t] = iv.lo + level * (iv.hi - iv.lo);
                    }
                }
        }
    }
    for (const auto& r : vc.def.retailers) {
        out.retail_sell[r.id].assign(W, std::vector<double>(T, r.sell_min + level * (r.sell_max - r.sell_min)));
        out.retail_buy[r.id].assign(W, std::vector<double>(T, r.buy_min + level * (r.buy_max - r.buy_min)));
    }
    return out;
}

inline BidVector mid_bids(const ValidatedCase& vc) { return bids_at_level(vc, 0.5); }

// Returns a description of every out-of-range bid; empty means admissible.
inline std::vector<std::string> bid_bounds(const BidVector& bids, const ValidatedCase& vc) {
    const int W = vc.def.scenarios.W, T = vc.def.grid.T;
    std::vector<std::string> viol;
    auto flag = [&](const std::string& where, double v, const BidInterval& iv) {
        if (v < iv.lo - 1e-12 || v > iv.hi + 1e-12)
            viol.push_back(where + ": bid " + std::to_string(v) + " outside [" +
                           std::to_string(iv.lo) + "," + std::to_string(iv.hi) + "]");
    };
    for (const auto& h : vc.def.hmgs) {
        auto it = bids.device.find(h.id);
        if (it == bids.device.end() || it->second.size() != h.devices.size()) {
            viol.push_back(h.id + ": missing device bid series");
            continue;
        }
        for (size_t j = 0; j < h.devices.size(); ++j) {
            const auto& d = h.devices[j];
            const auto& b = it->second[j];
            std::string base = h.id + "." + device_kind_name(d.kind) + std::to_string(j);
            for (int w = 0; w < W; ++w)
                for (int t = 0; t < T; ++t) {
                    double lam = vc.def.scenarios.mcp_pred[w][t];
                    std::string at = "." + std::to_string(t) + "." + std::to_string(w);
                    if (device_has_e_bid(d.kind))
                        flag(base + ".e" + at, b.e[w][t], device_bid_interval('e', lam));
                    if (device_has_h_bid(d.kind))
                        flag(base + ".h" + at, b.h[w][t], device_bid_interval('h', lam));
                }
        }
    }
    for (const auto& r : vc.def.retailers) {
        auto s = bids.retail_sell.find(r.id);
        auto b = bids.retail_buy.find(r.id);
        if (s == bids.retail_sell.end() || b == bids.retail_buy.end()) {
            viol.push_back(r.id + ": missing retailer bid series");
            continue;
        }
        for (int w = 0; w < W; ++w)
            for (int t = 0; t < T; ++t) {
                std::string at = "." + std::to_string(t) + "." + std::to_string(w);
                flag(r.id + ".sell" + at, s->second[w][t], {r.sell_min, r.sell_max});
                flag(r.id + ".buy" + at, b->second[w][t], {r.buy_min, r.buy_max});
            }
    }
    return viol;
}

}  // namespace hmg
