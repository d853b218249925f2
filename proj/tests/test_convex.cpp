#include <catch_amalgamated.hpp>

#include <wpt/convex.hpp>

#include <cmath>

using namespace wpt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("linear objective over a disc") {
    // min x + y s.t. x^2 + y^2 <= 1  ->  (-1/sqrt2, -1/sqrt2)
    ConvexSubproblem sp;
    sp.objective = {1.0, 1.0};
    QuadraticConstraint q;
    q.P = RMatrix(2, 2);
    q.P(0, 0) = q.P(1, 1) = 1.0;
    q.q = {0.0, 0.0};
    q.bound = 1.0;
    sp.constraints.emplace_back(q);
    sp.start = {0.1, -0.2};
    const auto sol = solve_convex(sp);
    CHECK_THAT(sol.x[0], WithinAbs(-std::sqrt(0.5), 1e-8));
    CHECK_THAT(sol.x[1], WithinAbs(-std::sqrt(0.5), 1e-8));
    CHECK(sol.max_violation < 0.0);
    CHECK(sol.kkt_residual < 1e-6);
}

TEST_CASE("geometric program with closed form") {
    // max zeta s.t. sum e^{2 x_n} <= 2P, zeta <= log c + sum a_n x_n.
    // The optimum puts xi_n^2 = 2P a_n / (2 sum a).
    const double P = 1e-6;
    const std::vector<double> a{1.0, 0.5, 2.5};
    const double logc = std::log(3.0);
    ConvexSubproblem sp;
    sp.objective = {-1.0, 0.0, 0.0, 0.0};
    SumExpConstraint budget;
    budget.bound = 2.0 * P;
    for (std::size_t n = 0; n < 3; ++n) {
        std::vector<double> row(4, 0.0);
        row[1 + n] = 2.0;
        budget.a.push_back(row);
        budget.b.push_back(0.0);
    }
    sp.constraints.emplace_back(budget);
    AffineConstraint mono;
    mono.a = {1.0, -a[0], -a[1], -a[2]};
    mono.b = -logc;
    sp.constraints.emplace_back(mono);
    const double x0 = 0.5 * std::log(2.0 * P / 4.0);
    sp.start = {logc + (a[0] + a[1] + a[2]) * x0 - 1.0, x0, x0, x0};

    const auto sol = solve_convex(sp);
    const double asum = a[0] + a[1] + a[2];
    for (std::size_t n = 0; n < 3; ++n) {
        const double xi2 = std::exp(2.0 * sol.x[1 + n]);
        CHECK_THAT(xi2, WithinRel(2.0 * P * a[n] / asum, 1e-7));
    }
    CHECK(sol.kkt_residual < 1e-6);
}

TEST_CASE("exponential below affine") {
    // max x s.t. e^{x} <= 2 - y, y^2 <= 1 -> y = -1, x = log 3
    ConvexSubproblem sp;
    sp.objective = {-1.0, 0.0};
    sp.constraints.emplace_back(ExpAffineConstraint{{1.0, 0.0}, 0.0, {0.0, -1.0}, 2.0});
    QuadraticConstraint q;
    q.P = RMatrix(2, 2);
    q.P(1, 1) = 1.0;
    q.q = {0.0, 0.0};
    q.bound = 1.0;
    sp.constraints.emplace_back(q);
    sp.start = {0.0, 0.0};
    const auto sol = solve_convex(sp);
    CHECK_THAT(sol.x[0], WithinAbs(std::log(3.0), 1e-7));
    CHECK_THAT(sol.x[1], WithinAbs(-1.0, 1e-6));
}

TEST_CASE("errors") {
    ConvexSubproblem sp;
    sp.objective = {1.0};
    sp.constraints.emplace_back(AffineConstraint{{-1.0}, 0.0}); // x >= 0
    SECTION("infeasible start") {
        sp.start = {-1.0};
        CHECK_THROWS_AS(solve_convex(sp), FeasibilityError);
    }
    SECTION("dimension mismatch") {
        sp.start = {1.0, 2.0};
        CHECK_THROWS_AS(solve_convex(sp), DimensionError);
    }
    SECTION("iteration cap reports the last iterate") {
        sp.start = {1.0};
        ConvexOptions o;
        o.max_total_newton = 1;
        try {
            solve_convex(sp, o);
            FAIL("expected ConvergenceError");
        } catch (const ConvergenceError& e) {
            REQUIRE(e.best_iterate.size() == 1);
            CHECK(e.best_iterate[0] > 0.0);
        }
    }
    SECTION("bounded below by a single affine constraint") {
        sp.start = {3.0};
        const auto sol = solve_convex(sp);
        CHECK_THAT(sol.x[0], WithinAbs(0.0, 1e-9));
    }
}
