// SPDX-License-Identifier: Apache-2.0
//
// Joint waveform / transmit beamforming for DC combining.
//
// With t_{q,k} = s^H M_{q,k} s the per-antenna voltage is a convex quadratic
// in t_q, so sum_q v_q^2 is convex in t. Each SCA step maximizes its
// first-order under-estimator, which after lifting X = s s^H reads
// max Tr(A1 X) s.t. Tr(X) <= 2P. That program has a rank-one optimum on the
// dominant eigenvector of A1, so each step is one Hermitian eigenproblem.

#pragma once

#include "baseline.hpp"
#include "channel.hpp"
#include "numerics.hpp"
#include "rectenna.hpp"
#include "solution.hpp"

#include <cmath>
#include <vector>

namespace wpt {

struct DcIterate {
    Waveform waveform;
    std::vector<std::vector<cplx>> t; // [q][k], k = 0..N-1
    std::vector<double> vout;         // per receive antenna, volts
    double objective = 0.0;           // sum_q v_q^2 (load division deferred)
};

/// Recomputes t_{q,k}, v_out,q and the objective for the iterate's waveform.
inline void refresh(DcIterate& it, const BlockBandSet& bands, const Betas& b) {
    const std::size_t Q = bands.bands.size();
    it.t.assign(Q, {});
    it.vout.assign(Q, 0.0);
    it.objective = 0.0;
    for (std::size_t q = 0; q < Q; ++q) {
        it.t[q] = band_values(bands, q, it.waveform);
        it.vout[q] = vout_from_band_values(it.t[q], b);
        it.objective += it.vout[q] * it.vout[q];
    }
}

inline DcIterate make_dc_iterate(Waveform s, const BlockBandSet& bands, const Betas& b) {
    DcIterate it;
    it.waveform = std::move(s);
    refresh(it, bands, b);
    return it;
}

/// A1 = C1 + C1^H with
/// C1 = sum_q v_q ( (2 beta2 + 3 beta4 t_{q,0}) / 4 M_{q,0} + 3/2 beta4 sum_{k>=1} t_{q,k}^* M_{q,k} ).
inline CMatrix build_A1(const DcIterate& it, const BlockBandSet& bands, const Betas& b) {
    const std::size_t Q = bands.bands.size();
    if (it.t.size() != Q || it.vout.size() != Q) throw DimensionError("build_A1: iterate does not match band set");
    const std::size_t MN = bands.tx * bands.tones;
    CMatrix C(MN, MN);
    for (std::size_t q = 0; q < Q; ++q) {
        if (it.t[q].size() != bands.tones) throw DimensionError("build_A1: t_q has wrong length");
        const double v = it.vout[q];
        if (v == 0.0) continue;
        C.add_scaled(v * (2.0 * b.beta2 + 3.0 * b.beta4 * it.t[q][0].real()) / 4.0, bands.at(q, 0));
        for (std::size_t k = 1; k < bands.tones; ++k)
            C.add_scaled(v * 1.5 * b.beta4 * std::conj(it.t[q][k]), bands.at(q, k));
    }
    CMatrix A = C.adjoint();
    A += C;
    // exact Hermitian symmetry
    for (std::size_t i = 0; i < MN; ++i) {
        A(i, i) = A(i, i).real();
        for (std::size_t j = i + 1; j < MN; ++j) A(j, i) = std::conj(A(i, j));
    }
    return A;
}

/// Rank-one optimum of max Tr(A1 X) s.t. Tr(X) <= 2P, X >= 0:
/// s = sqrt(2P) * dominant eigenvector, phase fixed on the largest entry.
/// The AP value is 2P * lambda_max(A1).
struct ApSolution {
    CVector s;
    double lambda_max = 0.0;
    double value = 0.0;
};

inline ApSolution sca_ap_solution(const CMatrix& A1, double power) {
    if (!(power > 0.0)) throw ValidationError("sca_ap_solution: power must be positive");
    EigPair top = hermitian_max_eigpair(A1);
    CVector s = top.vector;
    fix_phase_largest(s);
    s *= std::sqrt(2.0 * power);
    return {std::move(s), top.value, 2.0 * power * top.value};
}

enum class DcInit {
    Ass,            // all power on the strongest tone
    UniformMatched, // equal power per tone along each tone's dominant right singular vector
    BestOfBoth      // run from both starts, keep the better stationary point
};

struct DcOptions : SolveOptions {
    DcInit init = DcInit::BestOfBoth;
};

inline Waveform uniform_matched_waveform(const Channel& c, double power) {
    Waveform s(c.tx, c.tone_count());
    const double xi = std::sqrt(2.0 * power / static_cast<double>(c.tone_count()));
    for (std::size_t n = 0; n < c.tone_count(); ++n) {
        const auto svd = svd_complex(c.tones[n]);
        const CVector v = svd.right.col(0);
        auto block = s.tone(n);
        for (std::size_t m = 0; m < c.tx; ++m) block[m] = xi * v[m];
    }
    return s;
}

namespace detail {

inline bool channel_is_zero(const Channel& c) {
    for (const auto& H : c.tones)
        for (auto v : H.values())
            if (v != cplx{}) return false;
    return true;
}

inline std::pair<DcIterate, SolveReport> run_dc_sca(Waveform start, const BlockBandSet& bands, const Betas& b,
                                                    double power, const SolveOptions& opts) {
    DcIterate it = make_dc_iterate(std::move(start), bands, b);
    fix_phase_largest(it.waveform.stacked());
    SolveReport rep;
    rep.objective_trace.push_back(it.objective);
    for (int i = 1; i <= opts.max_iterations; ++i) {
        const CMatrix A1 = build_A1(it, bands, b);
        ApSolution ap = sca_ap_solution(A1, power);
        const CVector diff = ap.s - it.waveform.stacked();
        rep.relative_step = norm(diff) / norm(ap.s);
        it.waveform = Waveform(bands.tx, bands.tones, std::move(ap.s));
        refresh(it, bands, b);
        rep.objective_trace.push_back(it.objective);
        rep.iterations = i;
        if (rep.relative_step <= opts.epsilon) {
            rep.converged = true;
            break;
        }
    }
    return {std::move(it), std::move(rep)};
}

} // namespace detail

/// Algorithm 1: SCA with rank-one eigenvector updates. The returned
/// solution's objective is the total output DC power sum_q v_q^2 / R_L; the
/// report's trace is sum_q v_q^2 per iteration.
inline std::pair<CombinerSolution, SolveReport> solve_dc(const Channel& c, const RectifierParams& p, double power,
                                                         const DcOptions& opts = {}) {
    c.validate();
    if (!(power > 0.0)) throw ValidationError("solve_dc: power must be positive");
    const Betas b = beta_coeffs(p);

    CombinerSolution sol;
    sol.scheme = Scheme::DcOpt;
    if (detail::channel_is_zero(c)) {
        sol.waveform = Waveform(c.tx, c.tone_count());
        sol.report = {0, true, true, 0.0, {0.0}};
        return {sol, sol.report};
    }

    const BlockBandSet bands = build_block_bands(c);
    std::pair<DcIterate, SolveReport> best;
    bool have = false;
    auto consider = [&](Waveform start) {
        auto run = detail::run_dc_sca(std::move(start), bands, b, power, opts);
        if (!have || run.first.objective > best.first.objective) {
            best = std::move(run);
            have = true;
        }
    };
    if (opts.init == DcInit::Ass || opts.init == DcInit::BestOfBoth) consider(ass_transmit(c, power).waveform);
    if (opts.init == DcInit::UniformMatched || opts.init == DcInit::BestOfBoth)
        consider(uniform_matched_waveform(c, power));

    sol.waveform = std::move(best.first.waveform);
    sol.objective = dc_total_power(sol.waveform, c, p);
    sol.report = std::move(best.second);
    return {sol, sol.report};
}

} // namespace wpt
