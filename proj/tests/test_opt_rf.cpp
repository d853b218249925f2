#include <catch_amalgamated.hpp>

#include <wpt/baseline.hpp>
#include <wpt/channel.hpp>
#include <wpt/opt_rf.hpp>

#include "oracles.hpp"

using namespace wpt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Channel random_channel(std::mt19937_64& rng, std::size_t M, std::size_t N, std::size_t Q) {
    Channel c;
    c.tx = M;
    c.rx = Q;
    for (std::size_t n = 0; n < N; ++n) c.tones.push_back(oracle::random_matrix(rng, Q, M));
    return c;
}

bool nondecreasing(const std::vector<double>& t) {
    for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i] < t[i - 1] - 1e-12 * std::max(1.0, std::abs(t[i - 1]))) return false;
    return true;
}

double budget(const std::vector<double>& xi) {
    double e = 0.0;
    for (double v : xi) e += v * v;
    return 0.5 * e;
}

} // namespace

TEST_CASE("optimal receive beamformer") {
    SECTION("equal-gain combining") {
        const auto r = optimal_receive_beamformer(CMatrix{{1.0}, {1.0}});
        CHECK_THAT(r.sigma, WithinRel(std::sqrt(2.0), 1e-12));
        CHECK_THAT(std::abs(r.w[0]), WithinRel(std::sqrt(0.5), 1e-12));
        CHECK_THAT(std::abs(r.w[1]), WithinRel(std::sqrt(0.5), 1e-12));
    }
    SECTION("identity tie") {
        const auto r = optimal_receive_beamformer(CMatrix::identity(2));
        CHECK_THAT(r.sigma, WithinRel(1.0, 1e-12));
        CHECK_THAT(norm(adjoint_times(CMatrix::identity(2), r.w)), WithinRel(1.0, 1e-12));
    }
    SECTION("random matrices") {
        std::mt19937_64 rng(6);
        for (int trial = 0; trial < 20; ++trial) {
            const CMatrix H = oracle::random_matrix(rng, 4, 3);
            const auto r = optimal_receive_beamformer(H);
            CHECK_THAT(norm(r.w), WithinAbs(1.0, 1e-12));
            CHECK_THAT(r.sigma, WithinAbs(oracle::singular_values(H)[0], 1e-9));
            for (int k = 0; k < 100; ++k) {
                CVector u = oracle::random_vector(rng, 4);
                u *= 1.0 / norm(u);
                CHECK(norm(adjoint_times(H, u)) <= r.sigma + 1e-9);
            }
        }
    }
}

TEST_CASE("matched transmit") {
    std::mt19937_64 rng(12);
    const CMatrix H = oracle::random_matrix(rng, 3, 2);
    const auto r = optimal_receive_beamformer(H);
    const auto mt = matched_transmit(r.w, H, 0.3);
    CHECK_FALSE(mt.structural_zero);
    CHECK_THAT(norm(mt.s), WithinRel(0.3, 1e-14));
    CHECK_THAT(std::abs(dot(r.w, H * mt.s)), WithinRel(0.3 * r.sigma, 1e-12));
    CHECK(norm(matched_transmit(r.w, H, 0.0).s) == 0.0);

    const CMatrix scalar{{cplx{0.6, -0.8}}};
    const auto one = matched_transmit(CVector{1.0}, scalar, 2.0);
    CHECK(std::abs(one.s[0] - 2.0 * cplx{0.6, 0.8}) <= 1e-15);

    const auto zero = matched_transmit(CVector{1.0, 0.0}, CMatrix(2, 2), 1.0);
    CHECK(zero.structural_zero);
    CHECK(norm(zero.s) == 0.0);
}

TEST_CASE("v_out posynomial") {
    const Betas b = beta_coeffs(RectifierParams{});
    SECTION("N = 1") {
        const auto f = build_vout_posynomial({0.8}, b);
        REQUIRE(f.monomials().size() == 2);
        CHECK_THAT(f.monomials()[0].coefficient, WithinRel(0.5 * b.beta2 * 0.64, 1e-15));
        CHECK_THAT(f.monomials()[1].coefficient, WithinRel(0.375 * b.beta4 * 0.4096, 1e-15));
    }
    SECTION("N = 2 hand expansion") {
        const auto f = build_vout_posynomial({1.0, 1.0}, Betas{0.0, 1.0});
        const std::vector<double> xi{0.3, 0.7};
        const double x1 = xi[0] * xi[0], x2 = xi[1] * xi[1];
        CHECK_THAT(f.evaluate(xi), WithinRel(0.375 * (x1 * x1 + x2 * x2 + 4 * x1 * x2), 1e-14));
    }
    SECTION("zero gains are pruned") {
        const auto f = build_vout_posynomial({1.0, 0.0, 0.5}, b);
        CHECK(f.unused(1));
        CHECK_FALSE(f.unused(0));
        CHECK_THROWS_AS(build_vout_posynomial({-1.0}, b), ValidationError);
    }
    SECTION("agrees with the moment evaluation") {
        std::mt19937_64 rng(77);
        std::uniform_real_distribution<double> u(0.0, 2.0);
        for (std::size_t N = 1; N <= 8; ++N) {
            std::vector<double> sigma(N), xi(N);
            for (auto& v : sigma) v = u(rng);
            for (auto& v : xi) v = u(rng) * 1e-3;
            const auto f = build_vout_posynomial(sigma, b);
            CHECK_THAT(f.evaluate(xi), WithinRel(oracle::vout_aligned(sigma, xi, b.beta2, b.beta4), 1e-12));
        }
    }
}

TEST_CASE("solve_power_allocation") {
    const Betas b = beta_coeffs(RectifierParams{});
    const double P = 1e-6;
    SECTION("single tone") {
        const auto [a, rep] = solve_power_allocation(build_vout_posynomial({1.3}, b), P);
        CHECK_THAT(a.xi[0], WithinAbs(std::sqrt(2 * P), 1e-9));
    }
    SECTION("symmetric gains split evenly") {
        const auto [a, rep] = solve_power_allocation(build_vout_posynomial({1.0, 1.0}, b), P);
        const auto best = oracle::maximize_on_quarter([&](double th) {
            return oracle::vout_aligned({1.0, 1.0}, {std::sqrt(2 * P) * std::cos(th), std::sqrt(2 * P) * std::sin(th)},
                                        b.beta2, b.beta4);
        });
        CHECK_THAT(best.first, WithinAbs(std::numbers::pi / 4, 1e-3));
        CHECK_THAT(a.xi[0], WithinRel(std::sqrt(P), 5e-3));
        CHECK_THAT(a.xi[1], WithinRel(std::sqrt(P), 5e-3));
        CHECK(nondecreasing(rep.objective_trace));
    }
    SECTION("unequal gains beat both baselines") {
        const auto f = build_vout_posynomial({1.0, 0.1}, b);
        const auto [a, rep] = solve_power_allocation(f, P);
        const double ass = f.evaluate(std::vector<double>{std::sqrt(2 * P), 0.0});
        const double uni = f.evaluate(std::vector<double>{std::sqrt(P), std::sqrt(P)});
        CHECK(f.evaluate(a.xi) >= std::max(ass, uni) * (1.0 - 1e-12));
    }
    SECTION("grid oracle at two tones, high power") {
        // at 1 mW the quartic term matters and the optimum is interior
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.5, 1.5);
        for (int trial = 0; trial < 10; ++trial) {
            const std::vector<double> sigma{u(rng), u(rng)};
            const double Ph = 1e-3;
            const auto f = build_vout_posynomial(sigma, b);
            const auto [a, rep] = solve_power_allocation(f, Ph);
            const auto best = oracle::maximize_on_quarter([&](double th) {
                return oracle::vout_aligned(sigma, {std::sqrt(2 * Ph) * std::cos(th), std::sqrt(2 * Ph) * std::sin(th)},
                                            b.beta2, b.beta4);
            });
            CHECK(f.evaluate(a.xi) >= best.second * (1.0 - 5e-3));
            CHECK(nondecreasing(rep.objective_trace));
            CHECK_THAT(budget(a.xi), WithinRel(Ph, 1e-9));
        }
    }
    SECTION("all gains zero") {
        const auto [a, rep] = solve_power_allocation(build_vout_posynomial({0.0, 0.0}, b), P);
        CHECK(rep.degenerate);
        CHECK_THAT(a.xi[0], WithinRel(std::sqrt(P), 1e-14));
    }
    SECTION("a zero-gain tone gets no power") {
        const auto [a, rep] = solve_power_allocation(build_vout_posynomial({1.0, 0.0, 0.9}, b), 1e-3);
        CHECK(a.xi[1] == 0.0);
        CHECK(a.xi[0] > 0.0);
        CHECK_THAT(budget(a.xi), WithinRel(1e-3, 1e-9));
    }
}

TEST_CASE("solve_rf_general") {
    const RectifierParams p;
    const Betas b = beta_coeffs(p);
    const double P = 1e-6;
    std::mt19937_64 rng(21);

    SECTION("objective is the moment evaluation of the assembled solution") {
        for (int trial = 0; trial < 20; ++trial) {
            const std::size_t M = 1 + trial % 3, N = 1 + trial % 8, Q = 1 + trial % 4;
            const Channel c = random_channel(rng, M, N, Q);
            const auto [sol, rep] = solve_rf_general(c, p, P);
            CHECK_THAT(sol.objective, WithinRel(rf_vout(sol.waveform, c, sol.receive, p), 1e-10));
            std::vector<double> sigma(N), xi(N);
            for (std::size_t n = 0; n < N; ++n) {
                sigma[n] = optimal_receive_beamformer(c.tones[n]).sigma;
                xi[n] = norm(CVector(std::vector<cplx>(sol.waveform.tone(n).begin(), sol.waveform.tone(n).end())));
            }
            CHECK_THAT(build_vout_posynomial(sigma, b).evaluate(xi), WithinRel(sol.objective, 1e-10));
            CHECK_THAT(sol.waveform.power(), WithinRel(P, 1e-9));
            CHECK(nondecreasing(rep.objective_trace));
            CHECK(sol.objective >= solve_ass_rf(c, p, P).objective * (1.0 - 1e-12));
        }
    }
    SECTION("N = 1 coincides with ASS") {
        const Channel c = random_channel(rng, 2, 1, 3);
        const auto [sol, rep] = solve_rf_general(c, p, P);
        CHECK_THAT(sol.objective, WithinRel(solve_ass_rf(c, p, P).objective, 1e-10));
        CHECK_THAT(sol.waveform.power(), WithinRel(P, 1e-12));
    }
    SECTION("Q = 1 is waveform design with sigma_n = ||h_n||") {
        const Channel c = random_channel(rng, 3, 4, 1);
        const auto [sol, rep] = solve_rf_general(c, p, P);
        std::vector<double> g(4);
        for (std::size_t n = 0; n < 4; ++n) {
            g[n] = norm(c.tones[n].row(0));
        }
        const auto [a, r2] = solve_power_allocation(build_vout_posynomial(g, b), P);
        CHECK_THAT(sol.objective, WithinRel(build_vout_posynomial(g, b).evaluate(a.xi), 1e-9));
    }
}
