// SPDX-License-Identifier: Apache-2.0
//
// Adaptive single sinewave (ASS): all power on the tone whose channel has the
// largest singular value, transmitted along its dominant right singular
// vector. Optimal under a linear rectenna model.

#pragma once

#include "channel.hpp"
#include "numerics.hpp"
#include "rectenna.hpp"
#include "solution.hpp"

#include <cmath>
#include <optional>
#include <vector>

namespace wpt {

struct AssSolution {
    std::size_t tone = 0;          // n-bar, 0-based
    Waveform waveform;
    std::optional<CVector> receive; // [U_nbar]_max for RF combining
    double sigma = 0.0;             // largest singular value of H_nbar
    bool degenerate = false;
};

namespace detail {

struct ToneSvd {
    std::vector<SvdTriple> svd;
    std::size_t best = 0;
    double sigma = 0.0;
};

inline ToneSvd strongest_tone(const Channel& c) {
    c.validate();
    ToneSvd out;
    out.svd.reserve(c.tone_count());
    for (const auto& H : c.tones) out.svd.push_back(svd_complex(H));
    for (std::size_t n = 0; n < c.tone_count(); ++n) {
        const double s = out.svd[n].singulars[0];
        if (s > out.sigma) { // strict: ties stay on the lowest index
            out.sigma = s;
            out.best = n;
        }
    }
    return out;
}

} // namespace detail

inline AssSolution ass_transmit(const Channel& c, double power) {
    if (!(power > 0.0)) throw ValidationError("ass_transmit: power must be positive");
    auto t = detail::strongest_tone(c);
    AssSolution a;
    a.tone = t.best;
    a.sigma = t.sigma;
    a.waveform = Waveform(c.tx, c.tone_count());
    if (t.sigma == 0.0) {
        a.degenerate = true;
        return a;
    }
    CVector v = t.svd[t.best].right.col(0);
    const double scale = std::sqrt(2.0 * power);
    auto block = a.waveform.tone(t.best);
    for (std::size_t m = 0; m < c.tx; ++m) block[m] = scale * v[m];
    return a;
}

inline AssSolution ass_rf(const Channel& c, double power) {
    AssSolution a = ass_transmit(c, power);
    CVector w(c.rx);
    if (a.degenerate) {
        w[0] = 1.0;
    } else {
        // [U_nbar]_max paired with the transmit vector: H v / ||H v||
        w = c.tones[a.tone] * a.waveform.tone(a.tone);
        w *= 1.0 / norm(w);
    }
    a.receive = std::move(w);
    return a;
}

/// Receive beamformer list for RF evaluation of an ASS solution: the
/// selected tone's vector is repeated (only that tone carries power).
inline std::vector<CVector> ass_receive_list(const AssSolution& a, std::size_t tones) {
    return std::vector<CVector>(tones, *a.receive);
}

inline CombinerSolution solve_ass_dc(const Channel& c, const RectifierParams& p, double power) {
    AssSolution a = ass_transmit(c, power);
    CombinerSolution sol;
    sol.scheme = Scheme::DcAss;
    sol.waveform = a.waveform;
    sol.objective = dc_total_power(a.waveform, c, p);
    sol.report = {0, true, a.degenerate, 0.0, {sol.objective}};
    return sol;
}

inline CombinerSolution solve_ass_rf(const Channel& c, const RectifierParams& p, double power) {
    AssSolution a = ass_rf(c, power);
    CombinerSolution sol;
    sol.scheme = Scheme::RfAss;
    sol.waveform = a.waveform;
    sol.receive = ass_receive_list(a, c.tone_count());
    sol.objective = rf_vout(a.waveform, c, sol.receive, p);
    sol.report = {0, true, a.degenerate, 0.0, {sol.objective}};
    return sol;
}

} // namespace wpt
