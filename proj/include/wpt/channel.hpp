// SPDX-License-Identifier: Apache-2.0
//
// Frequency-selective MIMO channel from a tapped-delay-line model.
//
// Each transmit/receive antenna pair draws i.i.d. circularly symmetric
// complex Gaussian taps with powers rho_l; the per-tone gain is the tap
// response evaluated at the tone frequency.

#pragma once

#include "errors.hpp"
#include "numerics.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace wpt {

struct TapProfile {
    std::vector<double> powers; // rho_l, sums to 1
    double spacing_s = 10e-9;

    void validate() const {
        if (powers.empty()) throw ValidationError("TapProfile: no taps");
        double total = 0.0;
        for (double p : powers) {
            if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("TapProfile: tap power must be finite and >= 0");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw ValidationError("TapProfile: tap powers must sum to 1 (got " + std::to_string(total) + ")");
        if (!(spacing_s > 0.0)) throw ValidationError("TapProfile: tap spacing must be positive");
    }

    /// 18 taps at 10 ns with exponentially decaying power, normalized.
    /// Approximates an indoor NLOS profile with roughly 100 ns delay spread;
    /// not the exact tabulated per-tap values of any standard model.
    static TapProfile default_profile() {
        TapProfile p;
        p.spacing_s = 10e-9;
        p.powers.resize(18);
        double total = 0.0;
        for (std::size_t l = 0; l < p.powers.size(); ++l) {
            p.powers[l] = std::exp(-static_cast<double>(l) / 6.0);
            total += p.powers[l];
        }
        for (auto& v : p.powers) v /= total;
        return p;
    }

    static TapProfile flat() { return TapProfile{{1.0}, 10e-9}; }
};

struct BandPlan {
    double center_hz = 5.18e9;
    double bandwidth_hz = 10e6;
    std::size_t tones = 1;

    void validate() const {
        if (tones < 1) throw ValidationError("BandPlan: need at least one tone");
        if (!(center_hz > 0.0) || !(bandwidth_hz > 0.0)) throw ValidationError("BandPlan: frequencies must be positive");
    }

    double spacing_hz() const { return bandwidth_hz / static_cast<double>(tones); }

    /// Tone n (0-based) sits at f_c + (n - (N-1)/2) * B/N.
    double tone_hz(std::size_t n) const {
        return center_hz + (static_cast<double>(n) - 0.5 * static_cast<double>(tones - 1)) * spacing_hz();
    }
};

struct ChannelProvenance {
    std::uint64_t seed = 0;
    std::uint64_t realization = 0;
    TapProfile profile;
    BandPlan plan;
};

/// Per-tone Q x M matrices H_n.
struct Channel {
    std::size_t tx = 0;  // M
    std::size_t rx = 0;  // Q
    std::vector<CMatrix> tones;
    ChannelProvenance provenance;

    std::size_t tone_count() const noexcept { return tones.size(); }

    void validate() const {
        if (tx == 0 || rx == 0 || tones.empty()) throw DimensionError("Channel: empty dimensions");
        for (const auto& H : tones) {
            if (H.rows() != rx || H.cols() != tx) throw DimensionError("Channel: tone matrix is not Q x M");
            if (!all_finite(std::span<const cplx>(H.values()))) throw ValidationError("Channel: non-finite gain");
        }
    }

    /// Row q of tone n: h_{q,n} (length M).
    std::span<const cplx> gain_row(std::size_t q, std::size_t n) const { return tones[n].row(q); }

    bool operator==(const Channel& o) const {
        return tx == o.tx && rx == o.rx && tones == o.tones && provenance.seed == o.provenance.seed &&
               provenance.realization == o.provenance.realization &&
               provenance.profile.powers == o.provenance.profile.powers &&
               provenance.profile.spacing_s == o.provenance.profile.spacing_s &&
               provenance.plan.center_hz == o.provenance.plan.center_hz &&
               provenance.plan.bandwidth_hz == o.provenance.plan.bandwidth_hz &&
               provenance.plan.tones == o.provenance.plan.tones;
    }
};

/// Draws the taps of one antenna pair. The generator is keyed by
/// (seed, realization, q, m) only, so a given pair sees the same taps
/// whatever the array sizes, tone count or evaluation order.
inline std::vector<cplx> draw_taps(const TapProfile& profile, std::uint64_t seed, std::uint64_t realization,
                                   std::size_t q, std::size_t m) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(realization), static_cast<std::uint32_t>(realization >> 32),
                      static_cast<std::uint32_t>(q), static_cast<std::uint32_t>(m), 0x57505431u};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<cplx> taps(profile.powers.size());
    for (std::size_t l = 0; l < taps.size(); ++l) {
        const double sd = std::sqrt(profile.powers[l] / 2.0);
        const double re = gauss(rng);
        const double im = gauss(rng);
        taps[l] = cplx(sd * re, sd * im);
    }
    return taps;
}

inline Channel generate_channel(const TapProfile& profile, const BandPlan& plan, std::size_t tx, std::size_t rx,
                                std::uint64_t seed, std::uint64_t realization = 0) {
    profile.validate();
    plan.validate();
    if (tx < 1 || rx < 1) throw ValidationError("generate_channel: M and Q must be >= 1");

    Channel ch;
    ch.tx = tx;
    ch.rx = rx;
    ch.provenance = {seed, realization, profile, plan};
    ch.tones.assign(plan.tones, CMatrix(rx, tx));

    // phase rotation per (tone, tap)
    std::vector<std::vector<cplx>> rot(plan.tones, std::vector<cplx>(profile.powers.size()));
    for (std::size_t n = 0; n < plan.tones; ++n)
        for (std::size_t l = 0; l < profile.powers.size(); ++l) {
            const double phase = -2.0 * std::numbers::pi * plan.tone_hz(n) * static_cast<double>(l) * profile.spacing_s;
            rot[n][l] = std::polar(1.0, phase);
        }

    for (std::size_t q = 0; q < rx; ++q)
        for (std::size_t m = 0; m < tx; ++m) {
            const auto taps = draw_taps(profile, seed, realization, q, m);
            for (std::size_t n = 0; n < plan.tones; ++n) {
                cplx h{};
                for (std::size_t l = 0; l < taps.size(); ++l) h += taps[l] * rot[n][l];
                ch.tones[n](q, m) = h;
            }
        }
    return ch;
}

} // namespace wpt
