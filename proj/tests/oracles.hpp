// Independent reference computations used by the tests. Nothing here calls
// into the library's solvers or decompositions.

#pragma once

#include <wpt/numerics.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

using wpt::cplx;

inline wpt::CMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, std::sqrt(0.5) * scale);
    wpt::CMatrix A(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) A(i, j) = {g(rng), g(rng)};
    return A;
}

inline wpt::CVector random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, std::sqrt(0.5) * scale);
    wpt::CVector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = {g(rng), g(rng)};
    return v;
}

inline wpt::CMatrix random_hermitian(std::mt19937_64& rng, std::size_t n) {
    const auto B = random_matrix(rng, n, n);
    wpt::CMatrix A = B + B.adjoint();
    for (std::size_t i = 0; i < n; ++i) A(i, i) = A(i, i).real();
    return A;
}

/// Cyclic complex Jacobi rotations; eigenvalues descending, eigenvectors as columns.
struct JacobiResult {
    std::vector<double> values;
    wpt::CMatrix vectors;
};

inline JacobiResult jacobi_eig(wpt::CMatrix A) {
    const std::size_t n = A.rows();
    wpt::CMatrix V = wpt::CMatrix::identity(n);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += std::norm(A(i, j));
        if (off < 1e-30 * std::max(1.0, A.frobenius() * A.frobenius())) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                const cplx apq = A(p, q);
                const double mag = std::abs(apq);
                if (mag == 0.0) continue;
                const cplx ph = apq / mag;
                const double app = A(p, p).real(), aqq = A(q, q).real();
                const double theta = 0.5 * std::atan2(2.0 * mag, aqq - app);
                const double c = std::cos(theta), s = std::sin(theta);
                // A <- J^H A J with J = diag(1, conj(ph)) * [[c, s], [-s, c]] on (p, q)
                const cplx e = std::conj(ph);
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - s * e * akq;
                    A(k, q) = s * akp + c * e * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * ph * aqk;
                    A(q, k) = s * apk + c * ph * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const cplx vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * e * vkq;
                    V(k, q) = s * vkp + c * e * vkq;
                }
            }
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return A(a, a).real() > A(b, b).real(); });
    JacobiResult r{std::vector<double>(n), wpt::CMatrix(n, n)};
    for (std::size_t i = 0; i < n; ++i) {
        r.values[i] = A(order[i], order[i]).real();
        for (std::size_t k = 0; k < n; ++k) r.vectors(k, i) = V(k, order[i]);
    }
    return r;
}

/// Singular values as square roots of the Jacobi eigenvalues of H^H H.
inline std::vector<double> singular_values(const wpt::CMatrix& H) {
    auto e = jacobi_eig(H.adjoint() * H);
    for (auto& v : e.values) v = std::sqrt(std::max(v, 0.0));
    return e.values;
}

/// E{y^2}, E{y^4} by the literal quadruple sum over n1 + n2 = n3 + n4.
inline std::pair<double, double> moments_quadruple(const std::vector<cplx>& a) {
    const std::size_t N = a.size();
    double second = 0.0;
    for (auto v : a) second += 0.5 * std::norm(v);
    cplx fourth{};
    for (std::size_t n1 = 0; n1 < N; ++n1)
        for (std::size_t n2 = 0; n2 < N; ++n2)
            for (std::size_t n3 = 0; n3 < N; ++n3)
                for (std::size_t n4 = 0; n4 < N; ++n4)
                    if (n1 + n2 == n3 + n4) fourth += std::conj(a[n3]) * a[n1] * std::conj(a[n4]) * a[n2];
    return {second, 0.375 * fourth.real()};
}

/// Same moments from the baseband envelope x(t) = sum a_n e^{j 2 pi n t}:
/// averaging over the carrier gives E{y^2} = <|x|^2>/2 and E{y^4} = 3/8 <|x|^4>.
/// |x|^4 has harmonics up to 2(N-1), so any K > 2(N-1) uniform samples average it exactly.
inline std::pair<double, double> moments_envelope(const std::vector<cplx>& a) {
    const std::size_t N = a.size();
    const std::size_t K = 4 * N + 3;
    double m2 = 0.0, m4 = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(K);
        cplx x{};
        for (std::size_t n = 0; n < N; ++n) x += a[n] * std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(n) * t);
        const double p = std::norm(x);
        m2 += p;
        m4 += p * p;
    }
    return {0.5 * m2 / static_cast<double>(K), 0.375 * m4 / static_cast<double>(K)};
}

/// v_out for tone amplitudes with real nonnegative magnitudes g_n xi_n
/// (phase-aligned tones): beta2 E{y^2} + beta4 E{y^4}.
inline double vout_aligned(const std::vector<double>& gains, const std::vector<double>& xi, double beta2,
                           double beta4) {
    std::vector<cplx> a(gains.size());
    for (std::size_t n = 0; n < a.size(); ++n) a[n] = gains[n] * xi[n];
    const auto [m2, m4] = moments_quadruple(a);
    return beta2 * m2 + beta4 * m4;
}

/// Maximum of f(theta) over [0, pi/2] by a fine grid plus golden-section refinement.
inline std::pair<double, double> maximize_on_quarter(const std::function<double(double)>& f, int grid = 20001) {
    double best_t = 0.0, best = -INFINITY;
    const double h = 0.5 * std::numbers::pi / (grid - 1);
    for (int i = 0; i < grid; ++i) {
        const double t = i * h;
        const double v = f(t);
        if (v > best) {
            best = v;
            best_t = t;
        }
    }
    double lo = std::max(0.0, best_t - h), hi = std::min(0.5 * std::numbers::pi, best_t + h);
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 200; ++it) {
        const double a = hi - g * (hi - lo), b = lo + g * (hi - lo);
        if (f(a) > f(b))
            hi = b;
        else
            lo = a;
    }
    const double t = 0.5 * (lo + hi);
    const double v = f(t);
    return v > best ? std::make_pair(t, v) : std::make_pair(best_t, best);
}

inline double beta_closed_form(int i, double r_ant = 50.0, double n = 1.05, double vt = 25.86e-3) {
    double fact = 1.0;
    for (int k = 2; k <= i; ++k) fact *= k;
    return std::pow(r_ant, i / 2.0) / (fact * std::pow(n * vt, i - 1));
}

} // namespace oracle
