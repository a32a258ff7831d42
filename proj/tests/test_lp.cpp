#include <catch2/catch_amalgamated.hpp>

#include <hmg/lp.hpp>

#include "oracle.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

using namespace hmg;

namespace {

std::string solution_bytes(const ClearingSolution& s) {
    std::ostringstream os;
    os.precision(17);
    os << static_cast<int>(s.status) << '|' << s.objective << '|';
    for (double v : s.x) os << v << ',';
    os << '|';
    for (double v : s.row_dual) os << v << ',';
    os << '|';
    for (double v : s.reduced_cost) os << v << ',';
    return os.str();
}

}  // namespace

TEST_CASE("forced equality: maximize 0 s.t. x = 1") {
    LinearProgram lp;
    int x = lp.add_var("x", 0.0, 10.0, 0.0);
    lp.add_row(RowSense::eq, 1.0, {{x, 1.0}}, "fix");
    auto sol = solve_lp(lp);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.x[x] == Catch::Approx(1.0).margin(1e-9));
    CHECK(sol.objective == Catch::Approx(0.0).margin(1e-9));
    CHECK(sol.row_dual[0] == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("two-variable vertex LP with known dual") {
    // maximize 3x + 2y s.t. x + y <= 4, x <= 2, x,y >= 0
    LinearProgram lp;
    int x = lp.add_var("x", 0.0, 2.0, 3.0);
    int y = lp.add_var("y", 0.0, kInf, 2.0);
    int r = lp.add_row(RowSense::le, 4.0, {{x, 1.0}, {y, 1.0}}, "cap");
    auto sol = solve_lp(lp);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.x[x] == Catch::Approx(2.0).margin(1e-9));
    CHECK(sol.x[y] == Catch::Approx(2.0).margin(1e-9));
    CHECK(sol.objective == Catch::Approx(10.0).margin(1e-9));
    CHECK(sol.row_dual[r] == Catch::Approx(2.0).margin(1e-9));

    auto rep = check_strong_duality(lp, sol);
    CHECK(rep.max_primal_residual <= 1e-8);
    CHECK(rep.max_dual_residual <= 1e-8);
    CHECK(rep.duality_gap <= 1e-8);
}

TEST_CASE("contradictory constraints are reported infeasible") {
    LinearProgram lp;
    int x = lp.add_var("x", -kInf, kInf, 1.0);
    lp.add_row(RowSense::ge, 1.0, {{x, 1.0}}, "lo");
    lp.add_row(RowSense::le, 0.0, {{x, 1.0}}, "hi");
    auto sol = solve_lp(lp);
    CHECK(sol.status == SolveStatus::infeasible);
}

TEST_CASE("unbounded ray is reported as unbounded") {
    LinearProgram lp;
    int x = lp.add_var("x", 0.0, kInf, 1.0);
    lp.add_var("y", 0.0, 1.0, 0.0);
    lp.add_row(RowSense::ge, 0.0, {{x, 1.0}}, "r");
    auto sol = solve_lp(lp);
    CHECK(sol.status == SolveStatus::unbounded);
}

TEST_CASE("empty LP: all residuals zero") {
    LinearProgram lp;
    auto sol = solve_lp(lp);
    REQUIRE(sol.status == SolveStatus::optimal);
    CHECK(sol.objective == 0.0);
    auto rep = check_strong_duality(lp, sol);
    CHECK(rep.max_primal_residual == 0.0);
    CHECK(rep.max_dual_residual == 0.0);
    CHECK(rep.duality_gap == 0.0);
}

TEST_CASE("perturbed dual is detected by the duality check") {
    LinearProgram lp;
    int x = lp.add_var("x", 0.0, 2.0, 3.0);
    int y = lp.add_var("y", 0.0, kInf, 2.0);
    lp.add_row(RowSense::le, 4.0, {{x, 1.0}, {y, 1.0}}, "cap");
    auto sol = solve_lp(lp);
    REQUIRE(sol.status == SolveStatus::optimal);
    sol.row_dual[0] += 0.1;
    auto rep = check_strong_duality(lp, sol);
    CHECK(rep.max_dual_residual >= 0.1 - 1e-9);
    (void)x;
    (void)y;
}

TEST_CASE("determinism: identical input gives identical solution bytes") {
    auto make = [] {
        LinearProgram lp;
        int a = lp.add_var("a", 0.0, 5.0, 1.5);
        int b = lp.add_var("b", -2.0, 7.0, -0.5);
        int c = lp.add_var("c", 0.0, kInf, 2.25);
        lp.add_row(RowSense::le, 6.0, {{a, 1.0}, {b, 0.5}, {c, 2.0}}, "r0");
        lp.add_row(RowSense::eq, 1.0, {{b, 1.0}, {c, -1.0}}, "r1");
        lp.add_row(RowSense::ge, -3.0, {{a, -1.0}, {c, 1.0}}, "r2");
        return lp;
    };
    auto s1 = solve_lp(make());
    auto s2 = solve_lp(make());
    CHECK(solution_bytes(s1) == solution_bytes(s2));
}

TEST_CASE("sensitivity: equality rhs perturbation moves objective by dual*eps") {
    std::mt19937_64 rng(20240817);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    std::uniform_real_distribution<double> pos(0.5, 3.0);
    int tested = 0;
    for (int inst = 0; inst < 60 && tested < 20; ++inst) {
        LinearProgram lp;
        const int n = 3;
        for (int j = 0; j < n; ++j)
            lp.add_var("v" + std::to_string(j), 0.0, pos(rng) * 4.0, coef(rng));
        // One equality whose rhs we perturb, plus a couple of inequalities.
        std::vector<std::pair<int, double>> eq;
        for (int j = 0; j < n; ++j) eq.push_back({j, pos(rng)});
        double rhs = pos(rng);
        int er = lp.add_row(RowSense::eq, rhs, eq, "eq");
        lp.add_row(RowSense::le, pos(rng) * 3.0, {{0, 1.0}, {1, 1.0}}, "le");
        auto base = solve_lp(lp);
        if (base.status != SolveStatus::optimal) continue;
        // Skip degenerate instances: the criterion only applies when the basis
        // is stable under the perturbation.
        bool degen = false;
        for (bool d : base.degenerate_row) degen = degen || d;
        if (degen) continue;

        const double eps = 1e-4;
        LinearProgram lp2 = lp;
        lp2.rows[er].rhs = rhs + eps;
        auto pert = solve_lp(lp2);
        if (pert.status != SolveStatus::optimal) continue;
        double predicted = base.row_dual[er] * eps;
        double actual = pert.objective - base.objective;
        double tol = 1e-6 * (1.0 + std::fabs(base.objective));
        if (std::fabs(actual - predicted) > tol) {
            // Basis may still have changed at a dual-degenerate point; verify
            // via the perturbed problem's own dual instead of failing blindly.
            double alt = pert.row_dual[er] * eps;
            CHECK(std::min(std::fabs(actual - predicted), std::fabs(actual - alt)) <= tol);
        } else {
            CHECK(std::fabs(actual - predicted) <= tol);
        }
        ++tested;
    }
    CHECK(tested >= 20);
}

TEST_CASE("oracle equivalence on 200 random boxed LPs") {
    std::mt19937_64 rng(987654321);
    std::uniform_int_distribution<int> nd(1, 6), md(0, 6), sd(0, 2);
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    std::uniform_real_distribution<double> width(0.0, 4.0);
    std::uniform_int_distribution<int> sparse(0, 2);

    int solved = 0, infeas_agree = 0;
    for (int inst = 0; inst < 200; ++inst) {
        LinearProgram lp;
        const int n = nd(rng);
        const int m = md(rng);
        for (int j = 0; j < n; ++j) {
            double lo = coef(rng);
            lp.add_var("x" + std::to_string(j), lo, lo + width(rng), coef(rng));
        }
        for (int r = 0; r < m; ++r) {
            std::vector<std::pair<int, double>> row;
            for (int j = 0; j < n; ++j)
                if (sparse(rng) != 0) row.push_back({j, coef(rng)});
            if (row.empty()) row.push_back({0, 1.0});
            RowSense s = sd(rng) == 0 ? RowSense::eq : (sd(rng) == 0 ? RowSense::ge : RowSense::le);
            lp.add_row(s, coef(rng), row, "r" + std::to_string(r));
        }

        auto sol = solve_lp(lp);
        auto ref = oracle::solve_by_enumeration(lp, 1e-8);
        if (sol.status == SolveStatus::infeasible) {
            CHECK_FALSE(ref.feasible);
            ++infeas_agree;
            continue;
        }
        REQUIRE(sol.status == SolveStatus::optimal);  // boxed -> never unbounded
        REQUIRE(ref.feasible);
        CHECK(sol.objective == Catch::Approx(ref.objective).margin(1e-7 * (1.0 + std::fabs(ref.objective))));

        auto rep = check_strong_duality(lp, sol);
        CHECK(rep.max_primal_residual <= 1e-8);
        CHECK(rep.duality_gap <= 1e-8 * (1.0 + std::fabs(sol.objective)));
        ++solved;
    }
    INFO("optimal " << solved << ", infeasible " << infeas_agree);
    CHECK(solved + infeas_agree == 200);
    CHECK(solved >= 50);  // mix sanity: the generator must exercise the solver
}

TEST_CASE("warm restart with new costs matches a cold solve") {
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    LinearProgram lp;
    const int n = 8;
    for (int j = 0; j < n; ++j) lp.add_var("x" + std::to_string(j), 0.0, 3.0 + j, coef(rng));
    for (int r = 0; r < 5; ++r) {
        std::vector<std::pair<int, double>> row;
        for (int j = 0; j < n; ++j) row.push_back({j, coef(rng)});
        lp.add_row(r % 2 ? RowSense::le : RowSense::ge, coef(rng), row, "r" + std::to_string(r));
    }
    SimplexSolver solver(lp);
    auto first = solver.solve();
    REQUIRE(first.status == SolveStatus::optimal);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> c(n);
        for (double& v : c) v = coef(rng);
        solver.re_cost(c);
        auto warm = solver.resolve();
        LinearProgram lp2 = lp;
        lp2.cost = c;
        auto cold = solve_lp(lp2);
        REQUIRE(warm.status == cold.status);
        if (warm.status == SolveStatus::optimal)
            CHECK(warm.objective == Catch::Approx(cold.objective).margin(1e-8 * (1.0 + std::fabs(cold.objective))));
    }
}

TEST_CASE("bound tightening via set_var_bounds matches a rebuilt LP") {
    LinearProgram lp;
    int x = lp.add_var("x", 0.0, 10.0, 1.0);
    int y = lp.add_var("y", 0.0, 10.0, 2.0);
    lp.add_row(RowSense::le, 12.0, {{x, 1.0}, {y, 1.0}}, "cap");
    SimplexSolver solver(lp);
    auto s0 = solver.solve();
    REQUIRE(s0.status == SolveStatus::optimal);
    CHECK(s0.objective == Catch::Approx(22.0).margin(1e-9));

    solver.set_var_bounds(y, 0.0, 0.0);  // deactivate y
    auto s1 = solver.resolve();
    REQUIRE(s1.status == SolveStatus::optimal);
    CHECK(s1.objective == Catch::Approx(10.0).margin(1e-9));
    CHECK(s1.x[y] == Catch::Approx(0.0).margin(1e-9));

    solver.set_var_bounds(y, 0.0, 10.0);  // reactivate
    auto s2 = solver.resolve();
    REQUIRE(s2.status == SolveStatus::optimal);
    CHECK(s2.objective == Catch::Approx(22.0).margin(1e-9));
    (void)x;
}

TEST_CASE("registry rejects malformed variables") {
    LinearProgram lp;
    lp.add_var("dup", 0.0, 1.0, 0.0);
    CHECK_THROWS(lp.add_var("dup", 0.0, 1.0, 0.0));
    CHECK_THROWS(lp.add_var("bad_bounds", 2.0, 1.0, 0.0));
    CHECK_THROWS(lp.add_row(RowSense::eq, std::nan(""), {{0, 1.0}}, "nan_rhs"));
    CHECK_THROWS(lp.add_row(RowSense::eq, 0.0, {{5, 1.0}}, "bad_col"));
}

TEST_CASE("dump format round-trips key fields") {
    LinearProgram lp;
    int x = lp.add_var("a.chp0.e.0.0", 0.0, 142.0, 0.05);
    lp.add_row(RowSense::eq, 0.0, {{x, 1.0}}, "gamma");
    std::string text = dump_lp(lp);
    CHECK(text.find("a.chp0.e.0.0") != std::string::npos);
    CHECK(text.find("gamma") != std::string::npos);
    CHECK(text.find("maximize") != std::string::npos);
}
