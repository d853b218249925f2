// SPDX-License-Identifier: Apache-2.0
//
// Small dense log-barrier interior-point solver for the convex subproblems
// produced by the geometric-programming steps:
//
//   minimize    c^T x
//   subject to  f_i(x) <= 0
//
// with every f_i drawn from a fixed set of smooth convex families. Each
// family supplies its value, gradient and Hessian; the solver runs damped
// Newton on  t c^T x - sum_i log(-f_i(x))  for t = 1, 10, 100, ...

#pragma once

#include "errors.hpp"
#include "numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace wpt {

/// log( sum_j exp(a_j . x + b_j) ) <= log(bound), i.e. sum of exponentials <= bound.
struct SumExpConstraint {
    std::vector<std::vector<double>> a;
    std::vector<double> b;
    double bound = 1.0;
};

/// a . x + b <= 0
struct AffineConstraint {
    std::vector<double> a;
    double b = 0.0;
};

/// x^T P x + q . x + r <= bound, P symmetric positive semidefinite.
struct QuadraticConstraint {
    RMatrix P;
    std::vector<double> q;
    double r = 0.0;
    double bound = 0.0;
};

/// exp(a . x + b) <= g . x + h
struct ExpAffineConstraint {
    std::vector<double> a;
    double b = 0.0;
    std::vector<double> g;
    double h = 0.0;
};

using Constraint = std::variant<SumExpConstraint, AffineConstraint, QuadraticConstraint, ExpAffineConstraint>;

struct ConvexSubproblem {
    std::vector<double> objective; // linear cost, minimized
    std::vector<Constraint> constraints;
    std::vector<double> start;     // strictly feasible
};

struct ConvexOptions {
    double gap_tolerance = 1e-10;     // stop once (#constraints)/t falls below this
    double newton_tolerance = 1e-12;  // half squared Newton decrement per centering
    int max_newton_per_center = 100;
    int max_total_newton = 3000;
};

struct ConvexSolution {
    std::vector<double> x;
    double objective = 0.0;
    double max_violation = 0.0;   // max_i f_i(x), negative when strictly feasible
    double kkt_residual = 0.0;    // ||c + sum lambda_i grad f_i|| / max(1, ||c||)
    int newton_iterations = 0;
};

namespace detail {

inline double dotv(const std::vector<double>& a, const std::vector<double>& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * x[i];
    return s;
}

struct ConstraintEval {
    double value = 0.0;
    std::vector<double> grad;
    RMatrix hess; // empty (0x0) when identically zero
};

inline void check_len(const std::vector<double>& v, std::size_t n, const char* what) {
    if (v.size() != n) throw DimensionError(std::string("solve_convex: ") + what + " has wrong length");
}

inline void validate(const Constraint& c, std::size_t n) {
    std::visit(
        [n](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, SumExpConstraint>) {
                if (k.a.empty() || k.a.size() != k.b.size())
                    throw DimensionError("solve_convex: malformed sum-of-exponentials constraint");
                for (const auto& row : k.a) check_len(row, n, "exponent row");
                if (!(k.bound > 0.0)) throw ValidationError("solve_convex: sum-of-exponentials bound must be positive");
            } else if constexpr (std::is_same_v<K, AffineConstraint>) {
                check_len(k.a, n, "affine row");
            } else if constexpr (std::is_same_v<K, QuadraticConstraint>) {
                if (k.P.rows() != n || k.P.cols() != n) throw DimensionError("solve_convex: quadratic P has wrong shape");
                check_len(k.q, n, "quadratic q");
            } else {
                check_len(k.a, n, "exponential row");
                check_len(k.g, n, "affine bound row");
            }
        },
        c);
}

inline double value_only(const Constraint& c, const std::vector<double>& x) {
    return std::visit(
        [&x](const auto& k) -> double {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, SumExpConstraint>) {
                double zmax = -std::numeric_limits<double>::infinity();
                std::vector<double> z(k.a.size());
                for (std::size_t j = 0; j < k.a.size(); ++j) {
                    z[j] = dotv(k.a[j], x) + k.b[j];
                    zmax = std::max(zmax, z[j]);
                }
                double s = 0.0;
                for (double zj : z) s += std::exp(zj - zmax);
                return zmax + std::log(s) - std::log(k.bound);
            } else if constexpr (std::is_same_v<K, AffineConstraint>) {
                return dotv(k.a, x) + k.b;
            } else if constexpr (std::is_same_v<K, QuadraticConstraint>) {
                double v = k.r - k.bound + dotv(k.q, x);
                const std::size_t n = x.size();
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) v += x[i] * k.P(i, j) * x[j];
                return v;
            } else {
                return std::exp(dotv(k.a, x) + k.b) - dotv(k.g, x) - k.h;
            }
        },
        c);
}

inline ConstraintEval evaluate(const Constraint& c, const std::vector<double>& x) {
    const std::size_t n = x.size();
    return std::visit(
        [&](const auto& k) -> ConstraintEval {
            using K = std::decay_t<decltype(k)>;
            ConstraintEval e;
            e.grad.assign(n, 0.0);
            if constexpr (std::is_same_v<K, SumExpConstraint>) {
                const std::size_t m = k.a.size();
                std::vector<double> z(m);
                double zmax = -std::numeric_limits<double>::infinity();
                for (std::size_t j = 0; j < m; ++j) {
                    z[j] = dotv(k.a[j], x) + k.b[j];
                    zmax = std::max(zmax, z[j]);
                }
                double s = 0.0;
                for (auto& zj : z) {
                    zj = std::exp(zj - zmax);
                    s += zj;
                }
                e.value = zmax + std::log(s) - std::log(k.bound);
                for (auto& zj : z) zj /= s; // softmax weights
                for (std::size_t j = 0; j < m; ++j)
                    for (std::size_t i = 0; i < n; ++i) e.grad[i] += z[j] * k.a[j][i];
                e.hess = RMatrix(n, n);
                for (std::size_t j = 0; j < m; ++j)
                    for (std::size_t r = 0; r < n; ++r) {
                        const double ar = k.a[j][r];
                        if (ar == 0.0) continue;
                        for (std::size_t s2 = 0; s2 < n; ++s2) e.hess(r, s2) += z[j] * ar * k.a[j][s2];
                    }
                for (std::size_t r = 0; r < n; ++r)
                    for (std::size_t s2 = 0; s2 < n; ++s2) e.hess(r, s2) -= e.grad[r] * e.grad[s2];
            } else if constexpr (std::is_same_v<K, AffineConstraint>) {
                e.value = dotv(k.a, x) + k.b;
                e.grad = k.a;
            } else if constexpr (std::is_same_v<K, QuadraticConstraint>) {
                e.value = k.r - k.bound + dotv(k.q, x);
                e.hess = RMatrix(n, n);
                for (std::size_t i = 0; i < n; ++i) {
                    double px = 0.0;
                    for (std::size_t j = 0; j < n; ++j) {
                        px += k.P(i, j) * x[j];
                        e.hess(i, j) = k.P(i, j) + k.P(j, i);
                    }
                    e.value += x[i] * px;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    double g = k.q[i];
                    for (std::size_t j = 0; j < n; ++j) g += (k.P(i, j) + k.P(j, i)) * x[j];
                    e.grad[i] = g;
                }
            } else {
                const double ex = std::exp(dotv(k.a, x) + k.b);
                e.value = ex - dotv(k.g, x) - k.h;
                for (std::size_t i = 0; i < n; ++i) e.grad[i] = ex * k.a[i] - k.g[i];
                e.hess = RMatrix(n, n);
                for (std::size_t i = 0; i < n; ++i) {
                    if (k.a[i] == 0.0) continue;
                    for (std::size_t j = 0; j < n; ++j) e.hess(i, j) = ex * k.a[i] * k.a[j];
                }
            }
            return e;
        },
        c);
}

// In-place Cholesky solve of H d = rhs; adds diagonal jitter until H is
// numerically positive definite. Returns false if that never happens.
inline bool cholesky_solve(RMatrix H, std::vector<double>& rhs) {
    const std::size_t n = H.rows();
    double diag_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) diag_max = std::max(diag_max, std::abs(H(i, i)));
    double jitter = 0.0;
    for (int attempt = 0; attempt < 12; ++attempt) {
        RMatrix L(n, n);
        bool ok = true;
        for (std::size_t j = 0; j < n && ok; ++j) {
            double s = H(j, j) + jitter;
            for (std::size_t k = 0; k < j; ++k) s -= L(j, k) * L(j, k);
            if (!(s > 0.0)) {
                ok = false;
                break;
            }
            L(j, j) = std::sqrt(s);
            for (std::size_t i = j + 1; i < n; ++i) {
                double t = H(i, j);
                for (std::size_t k = 0; k < j; ++k) t -= L(i, k) * L(j, k);
                L(i, j) = t / L(j, j);
            }
        }
        if (ok) {
            for (std::size_t i = 0; i < n; ++i) {
                double t = rhs[i];
                for (std::size_t k = 0; k < i; ++k) t -= L(i, k) * rhs[k];
                rhs[i] = t / L(i, i);
            }
            for (std::size_t i = n; i-- > 0;) {
                double t = rhs[i];
                for (std::size_t k = i + 1; k < n; ++k) t -= L(k, i) * rhs[k];
                rhs[i] = t / L(i, i);
            }
            return true;
        }
        jitter = jitter == 0.0 ? 1e-14 * std::max(diag_max, 1.0) : jitter * 100.0;
    }
    return false;
}

} // namespace detail

/// Largest constraint value at x (negative means strictly feasible).
inline double max_constraint_value(const ConvexSubproblem& sp, const std::vector<double>& x) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& c : sp.constraints) worst = std::max(worst, detail::value_only(c, x));
    return worst;
}

inline ConvexSolution solve_convex(const ConvexSubproblem& sp, const ConvexOptions& opts = {}) {
    const std::size_t n = sp.objective.size();
    if (n == 0) throw DimensionError("solve_convex: no decision variables");
    detail::check_len(sp.start, n, "start point");
    for (const auto& c : sp.constraints) detail::validate(c, n);

    const std::size_t m = sp.constraints.size();
    std::vector<double> x = sp.start;

    auto strictly_feasible = [&](const std::vector<double>& p) {
        for (const auto& c : sp.constraints) {
            const double v = detail::value_only(c, p);
            if (!(v < 0.0)) return false;
        }
        return true;
    };
    if (!strictly_feasible(x)) throw FeasibilityError("solve_convex: start point is not strictly feasible");

    const auto& c = sp.objective;
    // barrier(p) - barrier(x), formed as a difference so it stays accurate once t is large
    auto barrier_change = [&](const std::vector<double>& p, const std::vector<double>& slack_x, double t) {
        double lin = 0.0;
        for (std::size_t i = 0; i < n; ++i) lin += c[i] * (p[i] - x[i]);
        double v = t * lin;
        for (std::size_t i = 0; i < m; ++i) v -= std::log(-detail::value_only(sp.constraints[i], p) / slack_x[i]);
        return v;
    };

    ConvexSolution out;
    if (m == 0) throw ValidationError("solve_convex: unconstrained linear objective is unbounded");

    double t = 1.0;
    int total = 0;
    std::vector<double> grad(n);
    RMatrix hess(n, n);

    while (true) {
        // centering
        for (int it = 0; it < opts.max_newton_per_center; ++it) {
            if (++total > opts.max_total_newton)
                throw ConvergenceError("solve_convex: Newton iteration limit reached", x);

            for (std::size_t i = 0; i < n; ++i) grad[i] = t * c[i];
            hess.fill(0.0);
            for (const auto& k : sp.constraints) {
                const auto e = detail::evaluate(k, x);
                const double inv = 1.0 / (-e.value);
                for (std::size_t i = 0; i < n; ++i) grad[i] += inv * e.grad[i];
                for (std::size_t i = 0; i < n; ++i) {
                    const double gi = e.grad[i] * inv * inv;
                    for (std::size_t j = 0; j < n; ++j) hess(i, j) += gi * e.grad[j];
                }
                if (e.hess.rows() == n)
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < n; ++j) hess(i, j) += inv * e.hess(i, j);
            }

            std::vector<double> dx(n);
            for (std::size_t i = 0; i < n; ++i) dx[i] = -grad[i];
            if (!detail::cholesky_solve(hess, dx))
                throw ConvergenceError("solve_convex: singular Newton system", x);

            const double decrement_sq = -detail::dotv(grad, dx);
            if (decrement_sq / 2.0 <= opts.newton_tolerance) break;

            // backtracking: stay strictly feasible, then Armijo
            double step = 1.0;
            std::vector<double> trial(n);
            std::vector<double> slack(m);
            for (std::size_t i = 0; i < m; ++i) slack[i] = -detail::value_only(sp.constraints[i], x);
            bool moved = false;
            for (int ls = 0; ls < 80; ++ls) {
                for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + step * dx[i];
                if (strictly_feasible(trial)) {
                    const double df = barrier_change(trial, slack, t);
                    if (std::isfinite(df) && df <= -0.01 * step * decrement_sq) {
                        moved = true;
                        break;
                    }
                }
                step *= 0.5;
            }
            if (!moved) break; // no further progress representable at this t
            x = trial;
        }

        if (static_cast<double>(m) / t < opts.gap_tolerance) break;
        t *= 10.0;
    }

    out.x = x;
    out.objective = detail::dotv(c, x);
    out.max_violation = max_constraint_value(sp, x);
    out.newton_iterations = total;

    // Dual estimates. The barrier one, lambda_i = 1 / (t (-f_i)), loses accuracy once
    // the slacks approach rounding level, so a least-squares fit over the near-active
    // constraints is tried as well and the smaller stationarity residual is kept.
    std::vector<detail::ConstraintEval> ev;
    std::vector<double> lambda(m);
    double lambda_max = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        ev.push_back(detail::evaluate(sp.constraints[k], x));
        lambda[k] = 1.0 / (t * (-ev[k].value));
        lambda_max = std::max(lambda_max, lambda[k]);
    }
    auto residual = [&](const std::vector<double>& lam) {
        std::vector<double> r = c;
        for (std::size_t k = 0; k < m; ++k)
            for (std::size_t i = 0; i < n; ++i) r[i] += lam[k] * ev[k].grad[i];
        return std::sqrt(detail::dotv(r, r));
    };
    double rn = residual(lambda);

    std::vector<std::size_t> act;
    for (std::size_t k = 0; k < m; ++k)
        if (lambda[k] >= 1e-6 * lambda_max) act.push_back(k);
    RMatrix gram(act.size(), act.size());
    std::vector<double> rhs(act.size());
    for (std::size_t a = 0; a < act.size(); ++a) {
        rhs[a] = -detail::dotv(ev[act[a]].grad, c);
        for (std::size_t b = 0; b < act.size(); ++b) gram(a, b) = detail::dotv(ev[act[a]].grad, ev[act[b]].grad);
    }
    if (!act.empty() && detail::cholesky_solve(gram, rhs) &&
        std::all_of(rhs.begin(), rhs.end(), [](double v) { return v >= 0.0; })) {
        std::vector<double> fit(m, 0.0);
        for (std::size_t a = 0; a < act.size(); ++a) fit[act[a]] = rhs[a];
        rn = std::min(rn, residual(fit));
    }
    out.kkt_residual = rn / std::max(1.0, std::sqrt(detail::dotv(c, c)));
    return out;
}

} // namespace wpt
