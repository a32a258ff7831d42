// Upper level of the bilevel game: strategic players (coalition groups and
// retailers) choose bid levels on a discretized grid; the market clears at the
// lower level for every scenario. Equilibria are searched by iterated best
// response with memoized evaluations and certified by an exhaustive one-shot
// deviation scan.
#pragma once

#include <hmg/kkt.hpp>

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace hmg {

// One strategic player: either a coalition group (bids tied per carrier) or a
// retailer (one level per price band).
struct Player {
    std::string id;                    // "AB" for a group, retailer id otherwise
    std::vector<std::string> members;  // H-MG ids; empty for retailers
    bool retailer = false;
    std::vector<char> dims;  // 'e'/'h' carrier levels, 's'/'b' retailer bands
};

struct DRStats {
    double shift_share = 0.0;     // shifted energy over predicted energy
    double dr_plus_share = 0.0;   // share of periods with net load inflow
    double dr_minus_share = 0.0;  // share of periods with net load outflow
};

struct EquilibriumRecord {
    CoalitionStructure structure;
    BidVector bids;
    std::map<std::string, double> expected_profit;  // per H-MG and retailer
    std::map<std::string, double> group_profit;     // per group id
    double deviation_margin = 0.0;  // best on-grid unilateral improvement found
    bool equilibrium = false;
    bool cycle = false;
    int rounds = 0;
    std::vector<double> mcp_e, mcp_h;     // scenario-weighted, per period
    std::vector<MarketOutcome> outcomes;  // per scenario, verifier report embedded
};

inline std::vector<Player> strategic_players(const ValidatedCase& vc, const CoalitionStructure& s) {
    std::vector<Player> players;
    auto add_group = [&](const std::vector<std::string>& members) {
        if (members.empty()) return;
        Player p;
        p.members = members;
        for (const auto& m : members) p.id += m;
        bool any_e = false, any_h = false;
        for (const auto& m : members)
            for (const auto& d : find_hmg(vc, m).devices) {
                any_e = any_e || device_has_e_bid(d.kind);
                any_h = any_h || device_has_h_bid(d.kind);
            }
        if (any_e) p.dims.push_back('e');
        if (any_h) p.dims.push_back('h');
        players.push_back(std::move(p));
    };
    add_group(s.upper);
    for (const auto& g : s.lower) add_group(g);
    for (const auto& r : vc.def.retailers) {
        Player p;
        p.id = r.id;
        p.retailer = true;
        p.dims = {'s', 'b'};
        players.push_back(std::move(p));
    }
    return players;
}

namespace detail {

inline double grid_frac(int level, int K) {
    return K <= 1 ? 0.5 : static_cast<double>(level) / static_cast<double>(K - 1);
}

inline void apply_component(BidVector& bids, const ValidatedCase& vc, const Player& p, char dim,
                            double frac) {
    if (p.retailer) {
        const auto& r = find_retailer(vc, p.id);
        auto& series = dim == 's' ? bids.retail_sell[p.id] : bids.retail_buy[p.id];
        const double lo = dim == 's' ? r.sell_min : r.buy_min;
        const double hi = dim == 's' ? r.sell_max : r.buy_max;
        for (auto& row : series)
            for (auto& v : row) v = lo + frac * (hi - lo);
        return;
    }
    for (const auto& m : p.members) {
        const auto& h = find_hmg(vc, m);
        auto& dev = bids.device.at(m);
        for (size_t j = 0; j < h.devices.size(); ++j) {
            DeviceKind k = h.devices[j].kind;
            if (dim == 'e' && device_has_e_bid(k)) {
                for (size_t w = 0; w < dev[j].e.size(); ++w)
                    for (size_t t = 0; t < dev[j].e[w].size(); ++t) {
                        auto iv = device_bid_interval('e', vc.def.scenarios.mcp_pred[w][t]);
                        dev[j].e[w][t] = iv.lo + frac * (iv.hi - iv.lo);
                    }
            }
            if (dim == 'h' && device_has_h_bid(k)) {
                for (size_t w = 0; w < dev[j].h.size(); ++w)
                    for (size_t t = 0; t < dev[j].h[w].size(); ++t) {
                        auto iv = device_bid_interval('h', vc.def.scenarios.mcp_pred[w][t]);
                        dev[j].h[w][t] = iv.lo + frac * (iv.hi - iv.lo);
                    }
            }
        }
    }
}

}  // namespace detail

inline BidVector bids_from_levels(const ValidatedCase& vc, const std::vector<Player>& players,
                                  const std::vector<std::vector<int>>& levels, int K) {
    BidVector bids = mid_bids(vc);
    for (size_t i = 0; i < players.size(); ++i)
        for (size_t d = 0; d < players[i].dims.size(); ++d)
            detail::apply_component(bids, vc, players[i], players[i].dims[d],
                                    detail::grid_frac(levels[i][d], K));
    return bids;
}

// Holds one warm-started solver per scenario for a fixed coalition structure;
// repeated evaluations change only objective coefficients.
class MarketSession {
  public:
    MarketSession(const ValidatedCase& vc, CoalitionStructure structure)
        : vc_(vc), structure_(std::move(structure)) {}

    // Expected (scenario-weighted) profit per H-MG and retailer id.
    std::map<std::string, double> evaluate(const BidVector& bids) {
        std::map<std::string, double> out;
        for (int w = 0; w < vc_.def.scenarios.W; ++w) {
            const double rho = vc_.def.scenarios.weights[w];
            const ClearingProblem& p = *problem(w, bids);
            ClearingSolution sol = solve_scenario(w);
            if (sol.status != SolveStatus::optimal)
                throw std::runtime_error("market evaluation not optimal for scenario " +
                                         std::to_string(w));
            for (const auto& h : vc_.def.hmgs)
                out[h.id] += rho * compute_player_profit(p, sol, h.id);
            for (const auto& r : vc_.def.retailers)
                out[r.id] += rho * compute_player_profit(p, sol, r.id);
        }
        return out;
    }

  private:
    struct Scenario {
        std::unique_ptr<ClearingProblem> base;  // owns the LP the solver points at
        std::unique_ptr<SimplexSolver> solver;
    };

    // Assembles the scenario problem once; later calls only swap the bids in.
    const ClearingProblem* problem(int w, const BidVector& bids) {
        if (scenarios_.size() < static_cast<size_t>(vc_.def.scenarios.W))
            scenarios_.resize(vc_.def.scenarios.W);
        auto& sc = scenarios_[w];
        if (!sc.base)
            sc.base = std::make_unique<ClearingProblem>(
                assemble_clearing_lp(vc_, structure_, bids, w));
        else
            update_bids(vc_, *sc.base, bids);
        return sc.base.get();
    }

    ClearingSolution solve_scenario(int w) {
        auto& sc = scenarios_[w];
        if (!sc.solver) {
            sc.solver = std::make_unique<SimplexSolver>(sc.base->lp);
            return sc.solver->solve();
        }
        sc.solver->re_cost(sc.base->lp.cost);
        return sc.solver->resolve();
    }

    const ValidatedCase& vc_;
    CoalitionStructure structure_;
    std::vector<Scenario> scenarios_;
};

// Group incomes with intra-coalition transfers cancelled; cancellation is
// structural (the two sides of every internal link are booked at the same
// price), so the group income is the plain sum of member incomes.
inline std::map<std::string, double> coalition_profit(const CoalitionStructure& s,
                                                      const MarketOutcome& out) {
    if (out.status != SolveStatus::optimal)
        throw std::invalid_argument("coalition profit requested on non-optimal outcome");
    std::map<std::string, double> g;
    auto add = [&](const std::vector<std::string>& members) {
        if (members.empty()) return;
        std::string id;
        double total = 0.0;
        for (const auto& m : members) {
            id += m;
            total += out.profit.at(m);
        }
        g[id] = total;
    };
    add(s.upper);
    for (const auto& l : s.lower) add(l);
    return g;
}

namespace detail {

// Enumerates the K^d level grid of one player in ascending lexicographic
// order, calling fn(levels) for each point. Ascending order realizes the tie
// rule: lower bids first, then lexicographic.
template <typename Fn>
inline void for_each_combo(int dims, int K, Fn&& fn) {
    std::vector<int> lv(dims, 0);
    if (dims == 0) {
        fn(lv);
        return;
    }
    while (true) {
        fn(lv);
        int d = dims - 1;
        while (d >= 0 && lv[d] == K - 1) lv[d--] = 0;
        if (d < 0) break;
        ++lv[d];
    }
}

struct BidSearch {
    const ValidatedCase& vc;
    const std::vector<Player>& players;
    int K;
    MarketSession session;
    std::map<std::vector<int>, std::map<std::string, double>> memo;

    BidSearch(const ValidatedCase& v, const CoalitionStructure& s, const std::vector<Player>& pl,
              int k)
        : vc(v), players(pl), K(k), session(v, s) {}

    static std::vector<int> flatten(const std::vector<std::vector<int>>& levels) {
        std::vector<int> f;
        for (const auto& l : levels) f.insert(f.end(), l.begin(), l.end());
        return f;
    }

    const std::map<std::string, double>& evaluate(const std::vector<std::vector<int>>& levels) {
        auto key = flatten(levels);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        auto profits = session.evaluate(bids_from_levels(vc, players, levels, K));
        return memo.emplace(std::move(key), std::move(profits)).first->second;
    }

    double player_profit(const std::map<std::string, double>& profits, const Player& p) const {
        if (p.retailer) return profits.at(p.id);
        double total = 0.0;
        for (const auto& m : p.members) total += profits.at(m);
        return total;
    }

    // Best on-grid reply of player i against the other players' current
    // levels. Returns (levels, profit); ties resolved toward the first
    // (lowest, lexicographic) maximizer.
    std::pair<std::vector<int>, double> best_reply(std::vector<std::vector<int>> levels, size_t i) {
        std::pair<std::vector<int>, double> best{{}, -kInf};
        for_each_combo(static_cast<int>(players[i].dims.size()), K, [&](const std::vector<int>& lv) {
            levels[i] = lv;
            double profit = player_profit(evaluate(levels), players[i]);
            if (profit > best.second) best = {lv, profit};
        });
        return best;
    }
};

}  // namespace detail

// Best on-grid bids for one player (group member list or retailer id) with all
// rival components held at `rivals`.
inline BidVector best_response_bids(const ValidatedCase& vc, const CoalitionStructure& structure,
                                    const Player& player, const BidVector& rivals, int K) {
    MarketSession session(vc, structure);
    BidVector best = rivals;
    double best_profit = -kInf;
    detail::for_each_combo(static_cast<int>(player.dims.size()), K, [&](const std::vector<int>& lv) {
        BidVector cand = rivals;
        for (size_t d = 0; d < player.dims.size(); ++d)
            detail::apply_component(cand, vc, player, player.dims[d], detail::grid_frac(lv[d], K));
        auto profits = session.evaluate(cand);
        double profit = 0.0;
        if (player.retailer)
            profit = profits.at(player.id);
        else
            for (const auto& m : player.members) profit += profits.at(m);
        if (profit > best_profit) {
            best_profit = profit;
            best = std::move(cand);
        }
    });
    return best;
}

inline EquilibriumRecord solve_bilevel(const ValidatedCase& vc, const CoalitionStructure& structure,
                                       int K = 0, int max_rounds = 50, double eps_nash = 1e-6) {
    if (K <= 0) K = vc.def.bid_levels;
    auto players = strategic_players(vc, structure);
    detail::BidSearch search(vc, structure, players, K);

    std::vector<std::vector<int>> levels(players.size());
    for (size_t i = 0; i < players.size(); ++i)
        levels[i].assign(players[i].dims.size(), (K - 1) / 2);

    EquilibriumRecord rec;
    rec.structure = structure;

    auto total_profit = [&](const std::vector<std::vector<int>>& l) {
        const auto& profits = search.evaluate(l);
        double s = 0.0;
        for (const auto& [id, v] : profits) s += v;
        return s;
    };

    std::set<std::vector<int>> visited;
    std::vector<std::vector<int>> best_state = levels;
    double best_total = total_profit(levels);
    visited.insert(detail::BidSearch::flatten(levels));

    for (rec.rounds = 1; rec.rounds <= max_rounds; ++rec.rounds) {
        bool changed = false;
        for (size_t i = 0; i < players.size(); ++i) {
            double current = search.player_profit(search.evaluate(levels), players[i]);
            auto [reply, profit] = search.best_reply(levels, i);
            if (profit > current + eps_nash && reply != levels[i]) {
                levels[i] = reply;
                changed = true;
            }
        }
        double tp = total_profit(levels);
        if (tp > best_total) {
            best_total = tp;
            best_state = levels;
        }
        if (!changed) break;
        if (!visited.insert(detail::BidSearch::flatten(levels)).second) {
            rec.cycle = true;
            levels = best_state;  // return the best visited point
            break;
        }
    }

    // One-shot deviation scan at the terminal point.
    for (size_t i = 0; i < players.size(); ++i) {
        double current = search.player_profit(search.evaluate(levels), players[i]);
        auto [reply, profit] = search.best_reply(levels, i);
        (void)reply;
        rec.deviation_margin = std::max(rec.deviation_margin, profit - current);
    }
    rec.deviation_margin = std::max(rec.deviation_margin, 0.0);
    rec.equilibrium = !rec.cycle && rec.deviation_margin <= eps_nash;

    rec.bids = bids_from_levels(vc, players, levels, K);
    rec.expected_profit = search.evaluate(levels);
    const int T = vc.def.grid.T;
    rec.mcp_e.assign(T, 0.0);
    rec.mcp_h.assign(T, 0.0);
    for (int w = 0; w < vc.def.scenarios.W; ++w) {
        auto out = clear_market(vc, structure, rec.bids, w);
        const double rho = vc.def.scenarios.weights[w];
        for (int t = 0; t < T; ++t) {
            rec.mcp_e[t] += rho * out.mcp_e[t];
            rec.mcp_h[t] += rho * out.mcp_h[t];
        }
        for (const auto& [id, v] : coalition_profit(structure, out)) rec.group_profit[id] += rho * v;
        rec.outcomes.push_back(std::move(out));
    }
    return rec;
}

// Per-H-MG demand-response statistics at given bids, scenario-weighted.
inline std::map<std::string, DRStats> dr_statistics(const ValidatedCase& vc,
                                                    const CoalitionStructure& structure,
                                                    const BidVector& bids) {
    std::map<std::string, DRStats> stats;
    std::map<std::string, double> shifted, predicted, plus, minus;
    const int T = vc.def.grid.T;
    for (int w = 0; w < vc.def.scenarios.W; ++w) {
        const double rho = vc.def.scenarios.weights[w];
        ClearingProblem p = assemble_clearing_lp(vc, structure, bids, w);
        auto sol = solve_lp(p.lp);
        if (sol.status != SolveStatus::optimal)
            throw std::runtime_error("dr statistics: scenario " + std::to_string(w) + " not optimal");
        for (int j = 0; j < static_cast<int>(p.vars.size()); ++j)
            if (p.vars[j].role == VarRole::dr_shift) shifted[p.vars[j].owner] += rho * sol.x[j];
        for (const auto& h : vc.def.hmgs)
            for (int t = 0; t < T; ++t) {
                predicted[h.id] += rho * h.load_e[w][t];
                double d = sol.x[p.lp.registry.at(h.id + ".load.d." + std::to_string(t) + "." +
                                                  std::to_string(w))];
                double net = d - h.load_e[w][t];
                if (net > 1e-9) plus[h.id] += rho;
                if (net < -1e-9) minus[h.id] += rho;
            }
    }
    for (const auto& h : vc.def.hmgs) {
        DRStats& s = stats[h.id];
        s.shift_share = predicted[h.id] > 0.0 ? shifted[h.id] / predicted[h.id] : 0.0;
        s.dr_plus_share = plus[h.id] / T;
        s.dr_minus_share = minus[h.id] / T;
    }
    return stats;
}

struct SweepRow {
    std::string structure, hmg;
    double expected_income = 0.0;
    double avg_mcp_e = 0.0, avg_mcp_h = 0.0;
    bool equilibrium = false;
    double deviation_margin = 0.0;
    bool best_for_hmg = false;  // argmax structure for this H-MG
};

struct SweepResult {
    std::vector<SweepRow> rows;                           // structure-major, H-MG order
    std::vector<EquilibriumRecord> records;               // aligned with structure order
    std::map<std::string, std::map<std::string, DRStats>> dr;  // structure -> hmg -> stats
};

inline SweepResult structure_sweep(const ValidatedCase& vc, int K = 0, int max_rounds = 50) {
    SweepResult res;
    auto structures = enumerate_structures(vc, StructureMode::all);
    std::map<std::string, std::pair<double, std::string>> best;  // hmg -> (income, structure)
    for (const auto& s : structures) {
        auto rec = solve_bilevel(vc, s, K, max_rounds);
        double avg_e = 0.0, avg_h = 0.0;
        for (double v : rec.mcp_e) avg_e += v / rec.mcp_e.size();
        for (double v : rec.mcp_h) avg_h += v / rec.mcp_h.size();
        for (const auto& h : vc.def.hmgs) {
            SweepRow row;
            row.structure = s.label;
            row.hmg = h.id;
            row.expected_income = rec.expected_profit.at(h.id);
            row.avg_mcp_e = avg_e;
            row.avg_mcp_h = avg_h;
            row.equilibrium = rec.equilibrium;
            row.deviation_margin = rec.deviation_margin;
            res.rows.push_back(row);
            auto it = best.find(h.id);
            if (it == best.end() || row.expected_income > it->second.first)
                best[h.id] = {row.expected_income, s.label};
        }
        res.dr[s.label] = dr_statistics(vc, s, rec.bids);
        res.records.push_back(std::move(rec));
    }
    for (auto& row : res.rows)
        row.best_for_hmg = best.at(row.hmg).second == row.structure;
    return res;
}

}  // namespace hmg
