// SPDX-License-Identifier: Apache-2.0
//
// Nonlinear rectenna model truncated at fourth order:
//
//   v_out = beta2 E{y(t)^2} + beta4 E{y(t)^4},
//   beta_i = R_ant^{i/2} / (i! (n_i v_t)^{i-1}).
//
// For a multi-sine y(t) = Re{ sum_n a_n e^{j w_n t} } with a carrier well
// above the tone spacing, the DC parts of the moments are
//
//   E{y^2} = 1/2 sum_n |a_n|^2
//   E{y^4} = 3/8 sum_{n1+n2=n3+n4} a_{n3}^* a_{n1} a_{n4}^* a_{n2}
//
// where a_n = h_{q,n} s_n for one antenna (DC combining) or
// a_n = w_n^H H_n s_n for the combined signal (RF combining).

#pragma once

#include "channel.hpp"
#include "errors.hpp"
#include "numerics.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace wpt {

struct RectifierParams {
    double antenna_resistance = 50.0; // ohm
    double thermal_voltage = 25.86e-3; // V
    double ideality = 1.05;
    double load_resistance = 10e3; // ohm
    int truncation_order = 4;

    void validate() const {
        if (!(antenna_resistance > 0.0) || !(thermal_voltage > 0.0) || !(ideality > 0.0) || !(load_resistance > 0.0))
            throw ValidationError("RectifierParams: all constants must be positive");
        if (truncation_order != 2 && truncation_order != 4)
            throw ValidationError("RectifierParams: truncation order must be 2 or 4");
    }
};

struct Betas {
    double beta2 = 0.0;
    double beta4 = 0.0; // zero when the model is truncated at second order
};

inline Betas beta_coeffs(const RectifierParams& p) {
    p.validate();
    const double nv = p.ideality * p.thermal_voltage;
    Betas b;
    b.beta2 = p.antenna_resistance / (2.0 * nv);
    b.beta4 = p.truncation_order >= 4 ? p.antenna_resistance * p.antenna_resistance / (24.0 * nv * nv * nv) : 0.0;
    return b;
}

/// Stacked per-tone transmit weights s = [s_1; ...; s_N], each block length M.
class Waveform {
public:
    Waveform() = default;
    Waveform(std::size_t tx, std::size_t tones) : tx_(tx), tones_(tones), s_(tx * tones) {}
    Waveform(std::size_t tx, std::size_t tones, CVector s) : tx_(tx), tones_(tones), s_(std::move(s)) {
        if (s_.size() != tx_ * tones_) throw DimensionError("Waveform: length must be M*N");
    }

    std::size_t tx() const noexcept { return tx_; }
    std::size_t tones() const noexcept { return tones_; }

    std::span<const cplx> tone(std::size_t n) const { return s_.span().subspan(n * tx_, tx_); }
    std::span<cplx> tone(std::size_t n) { return s_.span().subspan(n * tx_, tx_); }

    const CVector& stacked() const noexcept { return s_; }
    CVector& stacked() noexcept { return s_; }

    /// 1/2 ||s||^2
    double power() const { return 0.5 * norm_sq(s_); }

private:
    std::size_t tx_ = 0;
    std::size_t tones_ = 0;
    CVector s_;
};

struct Moments {
    double second = 0.0; // E{y^2}, W
    double fourth = 0.0; // E{y^4}, W^2
};

/// M_{q,k} for k = 0..N-1; band k keeps only blocks (n, n+k) of h_q^H h_q.
struct BlockBandSet {
    std::size_t tx = 0;
    std::size_t tones = 0;
    std::vector<std::vector<CMatrix>> bands; // [q][k]

    const CMatrix& at(std::size_t q, std::size_t k) const { return bands[q][k]; }
};

namespace detail {

inline void check_waveform(const Waveform& s, const Channel& c) {
    if (s.tx() != c.tx || s.tones() != c.tone_count())
        throw DimensionError("waveform dimensions do not match the channel");
}

/// Moments from the per-tone complex amplitudes a_n. The quartic sum runs
/// over (n1, n3, n4) with n2 = n3 + n4 - n1, so O(N^3).
inline Moments moments_from_amplitudes(std::span<const cplx> a) {
    const auto N = static_cast<long>(a.size());
    Moments m;
    for (auto v : a) m.second += 0.5 * std::norm(v);

    cplx acc{};
    double mag = 0.0;
    for (long n1 = 0; n1 < N; ++n1)
        for (long n3 = 0; n3 < N; ++n3)
            for (long n4 = 0; n4 < N; ++n4) {
                const long n2 = n3 + n4 - n1;
                if (n2 < 0 || n2 >= N) continue;
                const cplx term = std::conj(a[n3]) * a[n1] * std::conj(a[n4]) * a[n2];
                acc += term;
                mag += std::abs(term);
            }
    if (std::abs(acc.imag()) > 1e-12 * std::max(mag, 1e-300))
        throw std::logic_error("moments_from_amplitudes: quartic sum is not real");
    m.fourth = 0.375 * acc.real();
    return m;
}

} // namespace detail

/// a_n = h_{q,n} s_n for n = 1..N.
inline std::vector<cplx> antenna_amplitudes(const Waveform& s, const Channel& c, std::size_t q) {
    detail::check_waveform(s, c);
    if (q >= c.rx) throw ValidationError("receive antenna index out of range");
    std::vector<cplx> a(c.tone_count());
    for (std::size_t n = 0; n < a.size(); ++n) {
        auto h = c.gain_row(q, n);
        auto sn = s.tone(n);
        cplx v{};
        for (std::size_t m = 0; m < c.tx; ++m) v += h[m] * sn[m];
        a[n] = v;
    }
    return a;
}

/// a_n = w_n^H H_n s_n for n = 1..N.
inline std::vector<cplx> combined_amplitudes(const Waveform& s, const Channel& c, const std::vector<CVector>& w) {
    detail::check_waveform(s, c);
    if (w.size() != c.tone_count()) throw DimensionError("need one receive beamformer per tone");
    std::vector<cplx> a(c.tone_count());
    for (std::size_t n = 0; n < a.size(); ++n) {
        if (w[n].size() != c.rx) throw DimensionError("receive beamformer length must be Q");
        if (norm(w[n]) > 1.0 + 1e-9) throw ValidationError("receive beamformer norm exceeds 1");
        a[n] = dot(w[n].span(), (c.tones[n] * s.tone(n)).span());
    }
    return a;
}

inline Moments dc_moments(const Waveform& s, const Channel& c, std::size_t q) {
    return detail::moments_from_amplitudes(antenna_amplitudes(s, c, q));
}

inline Moments rf_moments(const Waveform& s, const Channel& c, const std::vector<CVector>& w) {
    return detail::moments_from_amplitudes(combined_amplitudes(s, c, w));
}

inline double vout_from_moments(const Moments& m, const Betas& b) { return b.beta2 * m.second + b.beta4 * m.fourth; }

/// Output voltage of antenna q's rectifier (moment expansion).
inline double dc_vout(const Waveform& s, const Channel& c, const RectifierParams& p, std::size_t q) {
    return vout_from_moments(dc_moments(s, c, q), beta_coeffs(p));
}

/// Output voltage of the single rectifier behind the RF combiner.
inline double rf_vout(const Waveform& s, const Channel& c, const std::vector<CVector>& w, const RectifierParams& p) {
    return vout_from_moments(rf_moments(s, c, w), beta_coeffs(p));
}

/// sum_q v_out,q^2 / R_L
inline double dc_total_power(const Waveform& s, const Channel& c, const RectifierParams& p) {
    double acc = 0.0;
    for (std::size_t q = 0; q < c.rx; ++q) {
        const double v = dc_vout(s, c, p, q);
        acc += v * v;
    }
    return acc / p.load_resistance;
}

inline double rf_total_power(const Waveform& s, const Channel& c, const std::vector<CVector>& w,
                             const RectifierParams& p) {
    const double v = rf_vout(s, c, w, p);
    return v * v / p.load_resistance;
}

/// Received RF power with one rectifier per antenna: sum_q E{y_q^2}.
inline double received_rf_power_dc(const Waveform& s, const Channel& c) {
    double acc = 0.0;
    for (std::size_t q = 0; q < c.rx; ++q) acc += dc_moments(s, c, q).second;
    return acc;
}

/// Received RF power at the combiner output: E{y~^2}.
inline double received_rf_power_rf(const Waveform& s, const Channel& c, const std::vector<CVector>& w) {
    return rf_moments(s, c, w).second;
}

// ---------------------------------------------------------------------------
// Block-band form
// ---------------------------------------------------------------------------

inline BlockBandSet build_block_bands(const Channel& c) {
    c.validate();
    const std::size_t M = c.tx, N = c.tone_count(), MN = M * N;
    BlockBandSet set{M, N, std::vector<std::vector<CMatrix>>(c.rx)};
    for (std::size_t q = 0; q < c.rx; ++q) {
        set.bands[q].assign(N, CMatrix(MN, MN));
        for (std::size_t n = 0; n < N; ++n)
            for (std::size_t k = 0; n + k < N; ++k) {
                // block (n, n+k) = h_{q,n}^H h_{q,n+k}
                auto hn = c.gain_row(q, n);
                auto hk = c.gain_row(q, n + k);
                CMatrix& B = set.bands[q][k];
                for (std::size_t i = 0; i < M; ++i)
                    for (std::size_t j = 0; j < M; ++j) B(n * M + i, (n + k) * M + j) = std::conj(hn[i]) * hk[j];
            }
    }
    return set;
}

/// t_{q,k} = s^H M_{q,k} s for k = 0..N-1, computed from the bands.
inline std::vector<cplx> band_values(const BlockBandSet& bands, std::size_t q, const Waveform& s) {
    std::vector<cplx> t(bands.tones);
    for (std::size_t k = 0; k < bands.tones; ++k) t[k] = quad_form(bands.at(q, k), s.stacked());
    return t;
}

/// v_out,q = 1/2 beta2 t0 + 3/8 beta4 |t0|^2 + 3/4 beta4 sum_{k>=1} |t_k|^2
inline double vout_from_band_values(std::span<const cplx> t, const Betas& b) {
    double v = 0.5 * b.beta2 * t[0].real() + 0.375 * b.beta4 * std::norm(t[0]);
    for (std::size_t k = 1; k < t.size(); ++k) v += 0.75 * b.beta4 * std::norm(t[k]);
    return v;
}

inline double dc_vout_block_band(const Waveform& s, const BlockBandSet& bands, const RectifierParams& p,
                                 std::size_t q) {
    if (q >= bands.bands.size()) throw ValidationError("receive antenna index out of range");
    if (s.tx() != bands.tx || s.tones() != bands.tones) throw DimensionError("waveform does not match band set");
    return vout_from_band_values(band_values(bands, q, s), beta_coeffs(p));
}

// ---------------------------------------------------------------------------
// Time-domain oracle
// ---------------------------------------------------------------------------

/// Mean of y(t)^degree for y(t) = Re{ sum_n a_n e^{j 2 pi (N+1+n) t} },
/// n = 1..N, by uniform sampling over one period. With K = 8(2N+1)+1 samples
/// the rule is exact for every trigonometric polynomial appearing in y^4.
inline double time_average_oracle(std::span<const cplx> amplitudes, int degree) {
    if (degree != 2 && degree != 4) throw ValidationError("time_average_oracle: degree must be 2 or 4");
    const std::size_t N = amplitudes.size();
    const std::size_t K = 8 * (2 * N + 1) + 1;
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(K);
        double y = 0.0;
        for (std::size_t n = 0; n < N; ++n) {
            const double freq = static_cast<double>(N + 2 + n); // N+1+n with 1-based n
            y += (amplitudes[n] * std::polar(1.0, 2.0 * std::numbers::pi * freq * t)).real();
        }
        acc += degree == 2 ? y * y : (y * y) * (y * y);
    }
    return acc / static_cast<double>(K);
}

} // namespace wpt
