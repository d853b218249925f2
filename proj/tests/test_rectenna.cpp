#include <catch_amalgamated.hpp>

#include <wpt/channel.hpp>
#include <wpt/rectenna.hpp>

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

Waveform random_waveform(std::mt19937_64& rng, std::size_t M, std::size_t N, double power) {
    CVector s = oracle::random_vector(rng, M * N);
    s *= std::sqrt(2.0 * power) / norm(s);
    return Waveform(M, N, s);
}

Channel siso(cplx h) {
    Channel c;
    c.tx = c.rx = 1;
    c.tones = {CMatrix{{h}}};
    return c;
}

std::vector<CVector> unit_beams(std::mt19937_64& rng, std::size_t N, std::size_t Q) {
    std::vector<CVector> w;
    for (std::size_t n = 0; n < N; ++n) {
        CVector v = oracle::random_vector(rng, Q);
        v *= 1.0 / norm(v);
        w.push_back(v);
    }
    return w;
}

} // namespace

TEST_CASE("beta coefficients") {
    const Betas b = beta_coeffs(RectifierParams{});
    CHECK_THAT(b.beta2, WithinRel(oracle::beta_closed_form(2), 1e-14));
    CHECK_THAT(b.beta4, WithinRel(oracle::beta_closed_form(4), 1e-14));
    CHECK_THAT(b.beta2, WithinRel(9.207e2, 1e-3));
    CHECK_THAT(b.beta4, WithinRel(5.203e6, 1e-3));

    RectifierParams unit;
    unit.antenna_resistance = 1.0;
    unit.thermal_voltage = 1.0;
    unit.ideality = 1.0;
    const Betas u = beta_coeffs(unit);
    CHECK(u.beta2 == 0.5);
    CHECK_THAT(u.beta4, WithinRel(1.0 / 24.0, 1e-15));

    RectifierParams second = unit;
    second.truncation_order = 2;
    CHECK(beta_coeffs(second).beta4 == 0.0);

    RectifierParams bad;
    bad.ideality = 0.0;
    CHECK_THROWS_AS(beta_coeffs(bad), ValidationError);
    bad = RectifierParams{};
    bad.truncation_order = 6;
    CHECK_THROWS_AS(beta_coeffs(bad), ValidationError);
}

TEST_CASE("single-tone closed forms") {
    const RectifierParams p;
    const Channel c = siso(1.0);
    const Waveform s(1, 1, CVector{std::sqrt(2e-6)});
    const Moments m = dc_moments(s, c, 0);
    CHECK_THAT(m.second, WithinRel(1e-6, 1e-14));
    CHECK_THAT(m.fourth, WithinRel(1.5e-12, 1e-14));
    const double v = dc_vout(s, c, p, 0);
    CHECK_THAT(v, WithinRel(9.285e-4, 1e-3));
    const Betas b = beta_coeffs(p);
    CHECK_THAT(v, WithinRel(b.beta2 * 1e-6 + b.beta4 * 1.5e-12, 1e-14));
    CHECK_THAT(dc_total_power(s, c, p), WithinRel(8.62e-11, 1e-3));

    const Waveform zero(1, 1);
    CHECK(dc_moments(zero, c, 0).second == 0.0);
    CHECK(dc_moments(zero, c, 0).fourth == 0.0);
    CHECK(dc_vout(zero, c, p, 0) == 0.0);
    CHECK(dc_total_power(zero, c, p) == 0.0);
}

TEST_CASE("two identical antennas double the output power") {
    Channel one = siso({0.3, -0.8});
    Channel two = one;
    two.rx = 2;
    two.tones = {CMatrix{{cplx{0.3, -0.8}}, {cplx{0.3, -0.8}}}};
    const Waveform s(1, 1, CVector{cplx{1e-3, 2e-3}});
    const RectifierParams p;
    CHECK_THAT(dc_total_power(s, two, p), WithinRel(2.0 * dc_total_power(s, one, p), 1e-15));
}

TEST_CASE("time-average oracle") {
    CHECK_THAT(time_average_oracle(std::vector<cplx>{2.0}, 2), WithinRel(2.0, 1e-13));
    CHECK_THAT(time_average_oracle(std::vector<cplx>{2.0}, 4), WithinRel(0.375 * 16.0, 1e-13));
    const double a1 = 0.7, a2 = 1.3;
    CHECK_THAT(time_average_oracle(std::vector<cplx>{a1, a2}, 4),
               WithinRel(0.375 * (std::pow(a1, 4) + std::pow(a2, 4) + 4 * a1 * a1 * a2 * a2), 1e-13));
    CHECK_THROWS_AS(time_average_oracle(std::vector<cplx>{1.0}, 3), ValidationError);

    std::mt19937_64 rng(5);
    for (std::size_t N = 1; N <= 8; ++N) {
        const CVector a = oracle::random_vector(rng, N);
        const std::vector<cplx> av(a.begin(), a.end());
        const auto [m2, m4] = oracle::moments_envelope(av);
        CHECK_THAT(time_average_oracle(av, 2), WithinRel(m2, 1e-12));
        CHECK_THAT(time_average_oracle(av, 4), WithinRel(m4, 1e-12));
    }
}

TEST_CASE("moments agree with independent oracles") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<std::size_t> dn(1, 8), dm(1, 4), dq(1, 4);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t M = dm(rng), N = dn(rng), Q = dq(rng);
        const Channel c = random_channel(rng, M, N, Q);
        const Waveform s = random_waveform(rng, M, N, 1e-6);
        for (std::size_t q = 0; q < Q; ++q) {
            const Moments m = dc_moments(s, c, q);
            const auto a = antenna_amplitudes(s, c, q);
            const auto [q2, q4] = oracle::moments_quadruple(a);
            const auto [e2, e4] = oracle::moments_envelope(a);
            CHECK_THAT(m.second, WithinRel(q2, 1e-12));
            CHECK_THAT(m.fourth, WithinRel(q4, 1e-12));
            CHECK_THAT(m.second, WithinRel(e2, 1e-9));
            CHECK_THAT(m.fourth, WithinRel(e4, 1e-9));
            CHECK(m.second >= 0.0);
            CHECK(m.fourth >= 0.0);
        }
        const auto w = unit_beams(rng, N, Q);
        const Moments r = rf_moments(s, c, w);
        const auto a = combined_amplitudes(s, c, w);
        const auto [e2, e4] = oracle::moments_envelope(a);
        CHECK_THAT(r.second, WithinRel(e2, 1e-9));
        CHECK_THAT(r.fourth, WithinRel(e4, 1e-9));
    }
}

TEST_CASE("combined signal specializations") {
    std::mt19937_64 rng(23);
    SECTION("Q = 1 with w = 1 is the single antenna") {
        const Channel c = random_channel(rng, 2, 4, 1);
        const Waveform s = random_waveform(rng, 2, 4, 1e-6);
        const std::vector<CVector> w(4, CVector{1.0});
        const Moments a = rf_moments(s, c, w), b = dc_moments(s, c, 0);
        CHECK_THAT(a.second, WithinRel(b.second, 1e-14));
        CHECK_THAT(a.fourth, WithinRel(b.fourth, 1e-14));
    }
    SECTION("N = 1") {
        const Channel c = random_channel(rng, 3, 1, 2);
        const Waveform s = random_waveform(rng, 3, 1, 1e-6);
        const auto w = unit_beams(rng, 1, 2);
        const cplx y = dot(w[0], c.tones[0] * s.stacked());
        CHECK_THAT(rf_moments(s, c, w).second, WithinRel(0.5 * std::norm(y), 1e-13));
    }
    SECTION("beamformer norm above one is rejected") {
        const Channel c = random_channel(rng, 1, 1, 2);
        const Waveform s = random_waveform(rng, 1, 1, 1e-6);
        CHECK_THROWS_AS(rf_moments(s, c, {CVector{1.0, 0.1}}), ValidationError);
        CHECK_THROWS_AS(rf_moments(s, c, {}), DimensionError);
    }
}

TEST_CASE("block bands") {
    std::mt19937_64 rng(31);
    SECTION("N = 1 has a single band") {
        const Channel c = random_channel(rng, 2, 1, 1);
        const auto bands = build_block_bands(c);
        REQUIRE(bands.bands[0].size() == 1);
        const CVector h(std::vector<cplx>(c.gain_row(0, 0).begin(), c.gain_row(0, 0).end()));
        // M_{q,0} = h^H h as an outer product of conj(h) and h
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 0; j < 2; ++j) CHECK(bands.at(0, 0)(i, j) == std::conj(h[i]) * h[j]);
    }
    SECTION("N = 2, M = 1 hand assembly") {
        Channel c;
        c.tx = c.rx = 1;
        const cplx h1{0.4, 0.1}, h2{-0.2, 0.9};
        c.tones = {CMatrix{{h1}}, CMatrix{{h2}}};
        const auto bands = build_block_bands(c);
        const CMatrix& M1 = bands.at(0, 1);
        CHECK(std::abs(M1(0, 1) - std::conj(h1) * h2) <= 1e-15);
        CHECK(M1(0, 0) == 0.0);
        CHECK(M1(1, 0) == 0.0);
        CHECK(M1(1, 1) == 0.0);
    }
    SECTION("bands reconstruct h^H h and the two forms of v_out agree") {
        const RectifierParams p;
        for (int trial = 0; trial < 30; ++trial) {
            const std::size_t M = 1 + trial % 3, N = 1 + trial % 6, Q = 1 + trial % 2;
            const Channel c = random_channel(rng, M, N, Q);
            const auto bands = build_block_bands(c);
            for (std::size_t q = 0; q < Q; ++q) {
                CVector h(M * N);
                for (std::size_t n = 0; n < N; ++n)
                    for (std::size_t m = 0; m < M; ++m) h[n * M + m] = c.gain_row(q, n)[m];
                CVector hc = h;
                for (auto& v : hc) v = std::conj(v);
                const CMatrix full = outer(hc, hc); // (h^H h)_{ij} = conj(h_i) h_j
                CMatrix sum = bands.at(q, 0);
                for (std::size_t k = 1; k < N; ++k) {
                    sum += bands.at(q, k);
                    sum += bands.at(q, k).adjoint();
                    // strictly on the k-th block band
                    for (std::size_t i = 0; i < M * N; ++i)
                        for (std::size_t j = 0; j < M * N; ++j)
                            if (bands.at(q, k)(i, j) != cplx{}) CHECK(j / M == i / M + k);
                }
                CHECK((sum - full).frobenius() <= 1e-15 * full.frobenius());

                const Waveform s = random_waveform(rng, M, N, 1e-6);
                CHECK_THAT(dc_vout_block_band(s, bands, p, q), WithinRel(dc_vout(s, c, p, q), 1e-10));
                const auto t = band_values(bands, q, s);
                CHECK(t[0].real() >= 0.0);
                CHECK(std::abs(t[0].imag()) <= 1e-12 * t[0].real());
            }
        }
    }
}

TEST_CASE("global phase invariance") {
    std::mt19937_64 rng(41);
    const Channel c = random_channel(rng, 2, 5, 2);
    const Waveform s = random_waveform(rng, 2, 5, 1e-6);
    CVector rotated = s.stacked();
    rotated *= std::polar(1.0, 1.234);
    const Waveform r(2, 5, rotated);
    const auto bands = build_block_bands(c);
    const RectifierParams p;
    for (std::size_t q = 0; q < 2; ++q) {
        const auto t1 = band_values(bands, q, s), t2 = band_values(bands, q, r);
        for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(t1[k] - t2[k]) <= 1e-12 * std::abs(t1[0]));
        CHECK_THAT(dc_vout(r, c, p, q), WithinRel(dc_vout(s, c, p, q), 1e-12));
    }
}

TEST_CASE("received RF power") {
    std::mt19937_64 rng(43);
    const Channel c = random_channel(rng, 2, 3, 3);
    const Waveform zero(2, 3);
    CHECK(received_rf_power_dc(zero, c) == 0.0);
    const Waveform s = random_waveform(rng, 2, 3, 1e-6);
    double expect = 0.0;
    for (std::size_t n = 0; n < 3; ++n) {
        CVector y = c.tones[n] * s.tone(n);
        expect += 0.5 * norm_sq(y);
    }
    CHECK_THAT(received_rf_power_dc(s, c), WithinRel(expect, 1e-13));
}

TEST_CASE("dimension errors") {
    std::mt19937_64 rng(47);
    const Channel c = random_channel(rng, 2, 3, 2);
    CHECK_THROWS_AS(dc_moments(Waveform(2, 2), c, 0), DimensionError);
    CHECK_THROWS_AS(dc_moments(Waveform(2, 3), c, 2), ValidationError);
    CHECK_THROWS_AS(Waveform(2, 3, CVector(5)), DimensionError);
}
