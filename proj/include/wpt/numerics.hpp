// SPDX-License-Identifier: Apache-2.0
//
// Dense complex linear algebra for the small matrices that show up in
// multi-sine MIMO power transfer: per-tone channels (Q x M), block-band
// matrices (MN x MN) and their Hermitian combinations.

#pragma once

#include "errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wpt {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------------
// Vectors and matrices
// ---------------------------------------------------------------------------

class CVector {
public:
    CVector() = default;
    explicit CVector(std::size_t n, cplx fill = {}) : data_(n, fill) {}
    CVector(std::initializer_list<cplx> init) : data_(init) {}
    explicit CVector(std::vector<cplx> data) : data_(std::move(data)) {}

    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    cplx& operator[](std::size_t i) { return data_[i]; }
    const cplx& operator[](std::size_t i) const { return data_[i]; }

    auto begin() noexcept { return data_.begin(); }
    auto end() noexcept { return data_.end(); }
    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

    std::span<cplx> span() noexcept { return data_; }
    std::span<const cplx> span() const noexcept { return data_; }
    const std::vector<cplx>& values() const noexcept { return data_; }

    CVector& operator*=(cplx a) {
        for (auto& x : data_) x *= a;
        return *this;
    }
    CVector& operator+=(const CVector& o) {
        check_same(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    CVector& operator-=(const CVector& o) {
        check_same(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }

    bool operator==(const CVector&) const = default;

private:
    void check_same(const CVector& o) const {
        if (o.size() != size()) throw DimensionError("CVector: length mismatch");
    }

    std::vector<cplx> data_;
};

inline CVector operator*(cplx a, CVector v) { return v *= a; }
inline CVector operator*(CVector v, cplx a) { return v *= a; }
inline CVector operator+(CVector a, const CVector& b) { return a += b; }
inline CVector operator-(CVector a, const CVector& b) { return a -= b; }

/// x^H y
inline cplx dot(std::span<const cplx> x, std::span<const cplx> y) {
    if (x.size() != y.size()) throw DimensionError("dot: length mismatch");
    cplx acc{};
    for (std::size_t i = 0; i < x.size(); ++i) acc += std::conj(x[i]) * y[i];
    return acc;
}
inline cplx dot(const CVector& x, const CVector& y) { return dot(x.span(), y.span()); }

inline double norm_sq(std::span<const cplx> x) {
    double acc = 0.0;
    for (auto v : x) acc += std::norm(v);
    return acc;
}
inline double norm_sq(const CVector& x) { return norm_sq(x.span()); }
inline double norm(std::span<const cplx> x) { return std::sqrt(norm_sq(x)); }
inline double norm(const CVector& x) { return norm(x.span()); }

inline bool all_finite(std::span<const cplx> x) {
    return std::all_of(x.begin(), x.end(),
                       [](cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

/// Rotates v so that its first entry with magnitude above `floor` is real-positive.
inline void fix_phase_first(CVector& v, double floor = 1e-9) {
    for (auto x : v) {
        if (std::abs(x) > floor) {
            v *= std::conj(x) / std::abs(x);
            return;
        }
    }
}

/// Rotates v so that its largest-magnitude entry is real-positive.
inline void fix_phase_largest(CVector& v) {
    if (v.empty()) return;
    auto it = std::max_element(v.begin(), v.end(),
                               [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
    if (std::abs(*it) > 0.0) v *= std::conj(*it) / std::abs(*it);
}

/// Row-major dense complex matrix.
class CMatrix {
public:
    CMatrix() = default;
    CMatrix(std::size_t rows, std::size_t cols, cplx fill = {})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    CMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) throw DimensionError("CMatrix: entry count != rows*cols");
    }
    CMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw DimensionError("CMatrix: ragged initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static CMatrix identity(std::size_t n) {
        CMatrix I(n, n);
        for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
        return I;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool empty() const noexcept { return data_.empty(); }
    bool square() const noexcept { return rows_ == cols_; }

    cplx& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<const cplx> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::span<cplx> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

    CVector col(std::size_t c) const {
        CVector v(rows_);
        for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
        return v;
    }
    void set_col(std::size_t c, const CVector& v) {
        if (v.size() != rows_) throw DimensionError("CMatrix::set_col: length mismatch");
        for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
    }

    const std::vector<cplx>& values() const noexcept { return data_; }

    CMatrix adjoint() const {
        CMatrix out(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) out(c, r) = std::conj((*this)(r, c));
        return out;
    }

    double frobenius() const { return std::sqrt(norm_sq(std::span<const cplx>(data_))); }

    CMatrix& operator+=(const CMatrix& o) {
        check_same(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    CMatrix& operator-=(const CMatrix& o) {
        check_same(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    CMatrix& operator*=(cplx a) {
        for (auto& x : data_) x *= a;
        return *this;
    }

    /// this += a * B
    void add_scaled(cplx a, const CMatrix& B) {
        check_same(B);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * B.data_[i];
    }

    bool operator==(const CMatrix&) const = default;

private:
    void check_same(const CMatrix& o) const {
        if (o.rows_ != rows_ || o.cols_ != cols_) throw DimensionError("CMatrix: shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

inline CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
inline CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
inline CMatrix operator*(cplx s, CMatrix a) { return a *= s; }

inline CMatrix operator*(const CMatrix& A, const CMatrix& B) {
    if (A.cols() != B.rows()) throw DimensionError("matmul: inner dimension mismatch");
    CMatrix C(A.rows(), B.cols());
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t k = 0; k < A.cols(); ++k) {
            const cplx a = A(i, k);
            if (a == cplx{}) continue;
            for (std::size_t j = 0; j < B.cols(); ++j) C(i, j) += a * B(k, j);
        }
    return C;
}

inline CVector operator*(const CMatrix& A, std::span<const cplx> x) {
    if (A.cols() != x.size()) throw DimensionError("matvec: dimension mismatch");
    CVector y(A.rows());
    for (std::size_t i = 0; i < A.rows(); ++i) {
        cplx acc{};
        auto r = A.row(i);
        for (std::size_t j = 0; j < x.size(); ++j) acc += r[j] * x[j];
        y[i] = acc;
    }
    return y;
}
inline CVector operator*(const CMatrix& A, const CVector& x) { return A * x.span(); }

/// A^H x without forming the adjoint.
inline CVector adjoint_times(const CMatrix& A, std::span<const cplx> x) {
    if (A.rows() != x.size()) throw DimensionError("adjoint_times: dimension mismatch");
    CVector y(A.cols());
    for (std::size_t i = 0; i < A.rows(); ++i) {
        auto r = A.row(i);
        for (std::size_t j = 0; j < A.cols(); ++j) y[j] += std::conj(r[j]) * x[i];
    }
    return y;
}
inline CVector adjoint_times(const CMatrix& A, const CVector& x) { return adjoint_times(A, x.span()); }

/// x^H A x
inline cplx quad_form(const CMatrix& A, std::span<const cplx> x) {
    if (!A.square() || A.rows() != x.size()) throw DimensionError("quad_form: dimension mismatch");
    cplx acc{};
    for (std::size_t i = 0; i < A.rows(); ++i) {
        if (x[i] == cplx{}) continue;
        cplx row{};
        auto r = A.row(i);
        for (std::size_t j = 0; j < x.size(); ++j) row += r[j] * x[j];
        acc += std::conj(x[i]) * row;
    }
    return acc;
}
inline cplx quad_form(const CMatrix& A, const CVector& x) { return quad_form(A, x.span()); }

/// x y^H
inline CMatrix outer(const CVector& x, const CVector& y) {
    CMatrix out(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j) out(i, j) = x[i] * std::conj(y[j]);
    return out;
}

inline bool is_hermitian(const CMatrix& A, double rel_tol = 1e-12) {
    if (!A.square()) return false;
    const double scale = std::max(A.frobenius(), 1e-300);
    for (std::size_t i = 0; i < A.rows(); ++i)
        for (std::size_t j = i; j < A.cols(); ++j)
            if (std::abs(A(i, j) - std::conj(A(j, i))) > rel_tol * scale) return false;
    return true;
}

/// Row-major dense real matrix. Used by the real-symmetric eigensolver and
/// the Newton systems of the convex solver.
class RMatrix {
public:
    RMatrix() = default;
    RMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Eigen / singular value decompositions
// ---------------------------------------------------------------------------

struct EigPair {
    double value = 0.0;
    CVector vector;
};

/// Full Hermitian eigendecomposition: values nonincreasing, eigenvectors as
/// the columns of `vectors` (unitary).
struct HermitianEig {
    std::vector<double> values;
    CMatrix vectors;
};

struct SvdTriple {
    CMatrix left;                  // rows x rows, unitary
    std::vector<double> singulars; // min(rows, cols), nonincreasing
    CMatrix right;                 // cols x cols, unitary
};

namespace detail {

// Householder tridiagonalization followed by implicit QL with shifts
// (EISPACK tred2/tql2). On return `d` holds the eigenvalues in ascending
// order and the columns of V the corresponding orthonormal eigenvectors.
inline void symmetric_tridiagonal_ql(RMatrix& V, std::vector<double>& d) {
    const std::size_t n = V.rows();
    d.assign(n, 0.0);
    std::vector<double> e(n, 0.0);
    if (n == 0) return;

    for (std::size_t j = 0; j < n; ++j) d[j] = V(n - 1, j);

    for (std::size_t i = n - 1; i > 0; --i) {
        double scale = 0.0;
        double h = 0.0;
        for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
        if (scale == 0.0) {
            e[i] = d[i - 1];
            for (std::size_t j = 0; j < i; ++j) {
                d[j] = V(i - 1, j);
                V(i, j) = 0.0;
                V(j, i) = 0.0;
            }
        } else {
            for (std::size_t k = 0; k < i; ++k) {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            double f = d[i - 1];
            double g = std::sqrt(h);
            if (f > 0) g = -g;
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;
            for (std::size_t j = 0; j < i; ++j) {
                f = d[j];
                V(j, i) = f;
                g = e[j] + V(j, j) * f;
                for (std::size_t k = j + 1; k + 1 <= i; ++k) {
                    g += V(k, j) * d[k];
                    e[k] += V(k, j) * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for (std::size_t j = 0; j < i; ++j) {
                e[j] /= h;
                f += e[j] * d[j];
            }
            const double hh = f / (h + h);
            for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
            for (std::size_t j = 0; j < i; ++j) {
                f = d[j];
                g = e[j];
                for (std::size_t k = j; k + 1 <= i; ++k) V(k, j) -= (f * e[k] + g * d[k]);
                d[j] = V(i - 1, j);
                V(i, j) = 0.0;
            }
        }
        d[i] = h;
    }

    for (std::size_t i = 0; i + 1 < n; ++i) {
        V(n - 1, i) = V(i, i);
        V(i, i) = 1.0;
        const double h = d[i + 1];
        if (h != 0.0) {
            for (std::size_t k = 0; k <= i; ++k) d[k] = V(k, i + 1) / h;
            for (std::size_t j = 0; j <= i; ++j) {
                double g = 0.0;
                for (std::size_t k = 0; k <= i; ++k) g += V(k, i + 1) * V(k, j);
                for (std::size_t k = 0; k <= i; ++k) V(k, j) -= g * d[k];
            }
        }
        for (std::size_t k = 0; k <= i; ++k) V(k, i + 1) = 0.0;
    }
    for (std::size_t j = 0; j < n; ++j) {
        d[j] = V(n - 1, j);
        V(n - 1, j) = 0.0;
    }
    V(n - 1, n - 1) = 1.0;
    e[0] = 0.0;

    // QL iterations
    for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;

    double f = 0.0;
    double tst1 = 0.0;
    const double eps = std::ldexp(1.0, -52);
    for (std::size_t l = 0; l < n; ++l) {
        tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
        std::size_t m = l;
        while (m < n) {
            if (std::abs(e[m]) <= eps * tst1) break;
            ++m;
        }
        if (m > l) {
            int iter = 0;
            do {
                if (++iter > 300) throw std::runtime_error("symmetric_tridiagonal_ql: no convergence");
                double g = d[l];
                double p = (d[l + 1] - g) / (2.0 * e[l]);
                double r = std::hypot(p, 1.0);
                if (p < 0) r = -r;
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                const double dl1 = d[l + 1];
                double h = g - d[l];
                for (std::size_t i = l + 2; i < n; ++i) d[i] -= h;
                f += h;

                p = d[m];
                double c = 1.0, c2 = 1.0, c3 = 1.0;
                const double el1 = e[l + 1];
                double s = 0.0, s2 = 0.0;
                for (std::size_t ii = m; ii-- > l;) {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[ii];
                    h = c * p;
                    r = std::hypot(p, e[ii]);
                    e[ii + 1] = s * r;
                    s = e[ii] / r;
                    c = p / r;
                    p = c * d[ii] - s * g;
                    d[ii + 1] = h + s * (c * g + s * d[ii]);
                    for (std::size_t k = 0; k < n; ++k) {
                        h = V(k, ii + 1);
                        V(k, ii + 1) = s * V(k, ii) + c * h;
                        V(k, ii) = c * V(k, ii) - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
            } while (std::abs(e[l]) > eps * tst1);
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // ascending sort
    for (std::size_t i = 0; i + 1 < n; ++i) {
        std::size_t k = i;
        double p = d[i];
        for (std::size_t j = i + 1; j < n; ++j)
            if (d[j] < p) {
                k = j;
                p = d[j];
            }
        if (k != i) {
            d[k] = d[i];
            d[i] = p;
            for (std::size_t j = 0; j < n; ++j) std::swap(V(j, i), V(j, k));
        }
    }
}

inline void require_hermitian(const CMatrix& A, const char* who) {
    if (!A.square()) throw DimensionError(std::string(who) + ": matrix is not square");
    if (!all_finite(std::span<const cplx>(A.values())))
        throw ValidationError(std::string(who) + ": non-finite entry");
    if (!is_hermitian(A, 1e-12)) throw ValidationError(std::string(who) + ": matrix is not Hermitian");
}

} // namespace detail

/// Full spectrum of a Hermitian matrix via the real symmetric embedding
/// [[Re A, -Im A], [Im A, Re A]], whose spectrum is that of A with every
/// eigenvalue doubled.
inline HermitianEig hermitian_eig(const CMatrix& A) {
    detail::require_hermitian(A, "hermitian_eig");
    const std::size_t n = A.rows();
    HermitianEig out{std::vector<double>(n), CMatrix(n, n)};
    if (n == 0) return out;

    RMatrix V(2 * n, 2 * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            // symmetrize so that tiny Hermitian defects do not leak in
            const cplx a = 0.5 * (A(i, j) + std::conj(A(j, i)));
            V(i, j) = a.real();
            V(i + n, j + n) = a.real();
            V(i + n, j) = a.imag();
            V(i, j + n) = -a.imag();
        }
    std::vector<double> d;
    detail::symmetric_tridiagonal_ql(V, d);

    // Each complex eigenvector appears twice in the doubled spectrum (as x and jx).
    // Pivoted modified Gram-Schmidt over the 2n candidates keeps the n directions
    // with the largest complex residual; a cluster of multiplicity k contributes
    // 2k real candidates whose residuals shrink as the cluster fills up.
    std::vector<CVector> cand(2 * n, CVector(n));
    for (std::size_t idx = 0; idx < 2 * n; ++idx)
        for (std::size_t i = 0; i < n; ++i) cand[idx][i] = cplx(V(i, idx), V(i + n, idx));
    std::vector<bool> used(2 * n, false);
    std::vector<std::pair<double, CVector>> picked;
    std::size_t found = 0;
    for (; found < n; ++found) {
        std::size_t best = 2 * n;
        double best_norm = 0.0;
        for (std::size_t idx = 0; idx < 2 * n; ++idx) {
            if (used[idx]) continue;
            const double nx = norm(cand[idx]);
            if (nx > best_norm) {
                best_norm = nx;
                best = idx;
            }
        }
        if (best == 2 * n || best_norm < 1e-3) break;
        used[best] = true;
        CVector x = cand[best];
        x *= 1.0 / best_norm;
        // one more pass keeps orthogonality at the rounding level
        for (const auto& [val, u] : picked) x -= dot(u, x) * u;
        x *= 1.0 / norm(x);
        for (std::size_t idx = 0; idx < 2 * n; ++idx)
            if (!used[idx]) cand[idx] -= dot(x, cand[idx]) * x;
        picked.emplace_back(d[best], std::move(x));
    }
    std::stable_sort(picked.begin(), picked.end(), [](const auto& l, const auto& r) { return l.first > r.first; });
    for (std::size_t j = 0; j < picked.size(); ++j) {
        fix_phase_first(picked[j].second);
        out.vectors.set_col(j, picked[j].second);
        out.values[j] = picked[j].first;
    }
    if (found != n) throw std::runtime_error("hermitian_eig: failed to extract a complete basis");
    return out;
}

/// Largest eigenvalue of a Hermitian matrix and a unit eigenvector.
///
/// Power iteration on A + ||A||_F I (which is PSD, so the dominant direction
/// is the algebraically largest eigenvalue of A). Iteration stops once the
/// eigen-residual ||Av - lambda v|| drops below 1e-12 ||A||_F. When that does
/// not happen within the iteration cap (near-degenerate top pair), the full
/// tridiagonal QL decomposition is used instead. The phase is fixed so that
/// the first nonzero component is real-positive.
inline EigPair hermitian_max_eigpair(const CMatrix& A, std::size_t max_power_iterations = 500) {
    detail::require_hermitian(A, "hermitian_max_eigpair");
    const std::size_t n = A.rows();
    if (n == 0) throw DimensionError("hermitian_max_eigpair: empty matrix");

    const double scale = A.frobenius();
    if (scale == 0.0) {
        CVector e(n);
        e[0] = 1.0;
        return {0.0, e};
    }

    // deterministic, generic start vector
    CVector x(n);
    std::uint64_t state = 0x9E3779B97F4A7C15ull;
    for (std::size_t i = 0; i < n; ++i) {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        const double re = static_cast<double>(state >> 11) * 0x1.0p-53 + 0.5;
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        const double im = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
        x[i] = cplx(re, im);
    }
    x *= 1.0 / norm(x);

    const double tol = 1e-12 * scale;
    for (std::size_t it = 0; it < max_power_iterations; ++it) {
        CVector Ax = A * x;
        const double lambda = dot(x, Ax).real();
        CVector r = Ax - lambda * x;
        if (norm(r) <= tol) {
            fix_phase_first(x);
            return {lambda, x};
        }
        Ax += scale * x;
        x = std::move(Ax);
        x *= 1.0 / norm(x);
    }

    HermitianEig full = hermitian_eig(A);
    return {full.values[0], full.vectors.col(0)};
}

/// Complex SVD through the eigendecomposition of the smaller Gram matrix.
inline SvdTriple svd_complex(const CMatrix& H) {
    if (H.empty()) throw DimensionError("svd_complex: empty matrix");
    if (!all_finite(std::span<const cplx>(H.values()))) throw ValidationError("svd_complex: non-finite entry");

    if (H.rows() < H.cols()) {
        SvdTriple t = svd_complex(H.adjoint());
        return {std::move(t.right), std::move(t.singulars), std::move(t.left)};
    }

    const std::size_t rows = H.rows();
    const std::size_t cols = H.cols();
    const CMatrix G = H.adjoint() * H;
    HermitianEig eig = hermitian_eig(G);

    SvdTriple out{CMatrix(rows, rows), std::vector<double>(cols), std::move(eig.vectors)};
    const double hscale = H.frobenius();
    std::size_t filled = 0;

    auto orthogonalize = [&](CVector& u) {
        for (int pass = 0; pass < 2; ++pass)
            for (std::size_t j = 0; j < filled; ++j) {
                const CVector c = out.left.col(j);
                u -= dot(c, u) * c;
            }
    };

    for (std::size_t i = 0; i < cols; ++i) {
        CVector z = H * out.right.col(i);
        const double sigma = norm(z);
        out.singulars[i] = i > 0 ? std::min(sigma, out.singulars[i - 1]) : sigma;
        if (filled != i || sigma <= 1e-10 * hscale) continue;
        orthogonalize(z);
        const double nz = norm(z);
        if (nz > 0.5 * sigma) {
            z *= 1.0 / nz;
            out.left.set_col(filled++, z);
        }
    }
    // numerically null directions and the rows > cols remainder: complete the
    // left basis with canonical vectors
    for (std::size_t k = 0; k < rows && filled < rows; ++k) {
        CVector e(rows);
        e[k] = 1.0;
        orthogonalize(e);
        const double ne = norm(e);
        if (ne < 1e-6) continue;
        e *= 1.0 / ne;
        orthogonalize(e);
        e *= 1.0 / norm(e);
        out.left.set_col(filled++, e);
    }
    return out;
}

} // namespace wpt
