// SPDX-License-Identifier: Apache-2.0
//
// RF combining with general receive beamforming.
//
// Per tone the best receive beamformer is the dominant left singular vector
// of H_n and the best transmit vector is matched to the effective channel
// w_n^H H_n, which reduces the problem to a SISO power allocation over tones
// with gains sigma_n. v_out is then a posynomial in the amplitudes xi_n and
// is maximized by SCA: each step condenses v_out into a monomial (AM-GM) and
// solves the resulting geometric program in log variables.

#pragma once

#include "channel.hpp"
#include "convex.hpp"
#include "numerics.hpp"
#include "posynomial.hpp"
#include "rectenna.hpp"
#include "solution.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace wpt {

struct ReceiveBeam {
    CVector w;
    double sigma = 0.0;
};

/// w_n = [U_n]_max; sigma_n = sigma_max(H_n) = ||w_n^H H_n||.
inline ReceiveBeam optimal_receive_beamformer(const CMatrix& H) {
    const SvdTriple svd = svd_complex(H);
    CVector w = svd.left.col(0);
    // consistent with the singular value actually achieved by w
    const double achieved = norm(adjoint_times(H, w));
    return {std::move(w), achieved};
}

struct MatchedTransmit {
    CVector s;
    bool structural_zero = false; // effective channel vanished
};

/// s_n = xi_n (w^H H)^H / ||w^H H||
inline MatchedTransmit matched_transmit(const CVector& w, const CMatrix& H, double xi) {
    if (w.size() != H.rows()) throw DimensionError("matched_transmit: beamformer length must be Q");
    if (xi < 0.0) throw ValidationError("matched_transmit: amplitude must be nonnegative");
    CVector h = adjoint_times(H, w); // (w^H H)^H
    const double g = norm(h);
    if (g == 0.0) return {CVector(H.cols()), true};
    h *= xi / g;
    return {std::move(h), false};
}

namespace detail {

/// Calls f(n1, n2, n3, n4) for every 0-based tuple with n1 + n2 = n3 + n4.
template <class F>
void for_each_quartic_tuple(std::size_t N, F&& f) {
    const auto n = static_cast<long>(N);
    for (long n1 = 0; n1 < n; ++n1)
        for (long n3 = 0; n3 < n; ++n3)
            for (long n4 = 0; n4 < n; ++n4) {
                const long n2 = n3 + n4 - n1;
                if (n2 < 0 || n2 >= n) continue;
                f(static_cast<std::size_t>(n1), static_cast<std::size_t>(n2), static_cast<std::size_t>(n3),
                  static_cast<std::size_t>(n4));
            }
}

} // namespace detail

/// v_out(xi) = beta2/2 sum sigma_n^2 xi_n^2 + 3/8 beta4 sum_{n1+n2=n3+n4} prod_j sigma_{nj} xi_{nj},
/// with terms of identical exponent merged and terms touching a zero gain dropped.
inline Posynomial build_vout_posynomial(const std::vector<double>& sigma, const Betas& b) {
    const std::size_t N = sigma.size();
    for (double s : sigma)
        if (!(s >= 0.0)) throw ValidationError("build_vout_posynomial: gains must be nonnegative");
    Posynomial f(N);
    for (std::size_t n = 0; n < N; ++n) {
        if (sigma[n] == 0.0 || b.beta2 == 0.0) continue;
        std::vector<int> e(N, 0);
        e[n] = 2;
        f.add(0.5 * b.beta2 * sigma[n] * sigma[n], std::move(e));
    }
    if (b.beta4 > 0.0)
        detail::for_each_quartic_tuple(N, [&](std::size_t n1, std::size_t n2, std::size_t n3, std::size_t n4) {
            const double g = sigma[n1] * sigma[n2] * sigma[n3] * sigma[n4];
            if (g == 0.0) return;
            std::vector<int> e(N, 0);
            ++e[n1];
            ++e[n2];
            ++e[n3];
            ++e[n4];
            f.add(0.375 * b.beta4 * g, std::move(e));
        });
    return f;
}

struct PowerAllocation {
    std::vector<double> xi; // amplitudes, 1/2 sum xi^2 <= P
};

struct PowerAllocationOptions : SolveOptions {
    std::optional<std::vector<double>> initial; // strictly positive on used variables
    bool vertex_check = true; // compare with every single-tone allocation at the end
    bool extrapolate = true;  // safeguarded over-relaxation of each SCA step
    bool polish = true;       // Newton on the stationarity conditions after SCA
    ConvexOptions solver;
};

namespace detail {

inline void scale_to_budget(std::vector<double>& xi, double power) {
    double e = 0.0;
    for (double v : xi) e += v * v;
    if (e <= 0.0) return;
    const double k = std::sqrt(2.0 * power / e);
    for (auto& v : xi) v *= k;
}

inline double relative_change(const std::vector<double>& a, const std::vector<double>& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += a[i] * a[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

/// Gaussian elimination with partial pivoting; false when singular.
inline bool solve_dense(RMatrix A, std::vector<double>& b) {
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(A(i, k)) > std::abs(A(piv, k))) piv = i;
        if (!(std::abs(A(piv, k)) > 0.0)) return false;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(A(k, j), A(piv, j));
            std::swap(b[k], b[piv]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = A(i, k) / A(k, k);
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) A(i, j) -= f * A(k, j);
            b[i] -= f * b[k];
        }
    }
    for (std::size_t k = n; k-- > 0;) {
        double v = b[k];
        for (std::size_t j = k + 1; j < n; ++j) v -= A(k, j) * b[j];
        b[k] = v / A(k, k);
    }
    return std::all_of(b.begin(), b.end(), [](double v) { return std::isfinite(v); });
}

/// Newton on the stationarity conditions in log amplitudes y = log xi:
/// xi_n df/dxi_n = mu xi_n^2 and 1/2 |xi|^2 = P, over the active tones,
/// starting from an SCA output. Log coordinates keep amplitudes positive and
/// handle the tones that drift toward zero. A step is kept only if it does
/// not lower f; returns the number of kept steps.
inline int polish_allocation(const Posynomial& f, const std::vector<std::size_t>& active, std::vector<double>& xi,
                             double& value, double power) {
    const std::size_t n = active.size();
    int kept = 0;
    for (int it = 0; it < 50; ++it) {
        // u_a = xi_a df/dxi_a and W_ab = xi_a xi_b d2f/dxi_a dxi_b, both exact per monomial
        std::vector<double> u(n, 0.0);
        RMatrix W(n, n);
        for (const auto& m : f.monomials()) {
            const double v = m.evaluate(xi);
            if (v == 0.0) continue;
            for (std::size_t a = 0; a < n; ++a) {
                const int ea = m.exponents[active[a]];
                if (ea == 0) continue;
                u[a] += ea * v;
                for (std::size_t b = 0; b < n; ++b) {
                    const int eb = m.exponents[active[b]];
                    if (eb != 0) W(a, b) += (a == b ? ea * (ea - 1) : ea * eb) * v;
                }
            }
        }
        std::vector<double> q(n);
        double xx = 0.0, uq = 0.0, qq = 0.0, uu = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            q[a] = xi[active[a]] * xi[active[a]];
            xx += q[a];
            uq += u[a] * q[a];
            qq += q[a] * q[a];
            uu += u[a] * u[a];
        }
        const double mu = uq / qq;
        RMatrix K(n + 1, n + 1);
        std::vector<double> rhs(n + 1);
        double rr = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = 0; b < n; ++b) K(a, b) = W(a, b);
            K(a, a) += u[a] - 2.0 * mu * q[a];
            K(a, n) = -q[a];
            K(n, a) = q[a];
            rhs[a] = -(u[a] - mu * q[a]);
            rr += rhs[a] * rhs[a];
        }
        rhs[n] = -(0.5 * xx - power);
        if (rr <= 1e-30 * uu) break;
        if (!solve_dense(K, rhs)) break;
        double big = 0.0;
        for (std::size_t a = 0; a < n; ++a) big = std::max(big, std::abs(rhs[a]));

        std::vector<double> trial = xi;
        double tv = -1.0;
        bool ok = false;
        double step = big > 5.0 ? 5.0 / big : 1.0;
        for (int ls = 0; ls < 40 && !ok; ++ls, step *= 0.5) {
            for (std::size_t a = 0; a < n; ++a) trial[active[a]] = xi[active[a]] * std::exp(step * rhs[a]);
            scale_to_budget(trial, power);
            tv = f.evaluate(trial);
            ok = tv >= value;
        }
        if (!ok) break;
        xi = std::move(trial);
        value = tv;
        ++kept;
    }
    return kept;
}

} // namespace detail

/// Geometric program of one SCA step in log variables z = (zeta~, xi~_active):
///   min -zeta~  s.t.  sum_n e^{2 xi~_n} <= 2P,  zeta~ - log(condensed monomial) <= 0.
inline ConvexSubproblem power_allocation_gp(const LogMonomial& condensed, const std::vector<std::size_t>& active,
                                            const std::vector<double>& xi_start, double power) {
    const std::size_t n = 1 + active.size();
    ConvexSubproblem sp;
    sp.objective.assign(n, 0.0);
    sp.objective[0] = -1.0;

    SumExpConstraint budget;
    budget.bound = 2.0 * power;
    for (std::size_t j = 0; j < active.size(); ++j) {
        std::vector<double> a(n, 0.0);
        a[1 + j] = 2.0;
        budget.a.push_back(std::move(a));
        budget.b.push_back(0.0);
    }
    sp.constraints.emplace_back(std::move(budget));

    AffineConstraint cond;
    cond.a.assign(n, 0.0);
    cond.a[0] = 1.0;
    for (std::size_t j = 0; j < active.size(); ++j) cond.a[1 + j] = -condensed.exponents[active[j]];
    cond.b = -condensed.log_coefficient;
    sp.constraints.emplace_back(cond);

    sp.start.assign(n, 0.0);
    double lm = condensed.log_coefficient;
    for (std::size_t j = 0; j < active.size(); ++j) {
        sp.start[1 + j] = std::log(xi_start[active[j]]) + std::log1p(-1e-6);
        lm += condensed.exponents[active[j]] * sp.start[1 + j];
    }
    sp.start[0] = lm - 1e-6;
    return sp;
}

/// Algorithm 2's SCA over the power allocation. Variables that appear in no
/// monomial (zero-gain tones) get zero amplitude. The trace holds v_out(p)
/// at each accepted iterate.
inline std::pair<PowerAllocation, SolveReport> solve_power_allocation(const Posynomial& pos, double power,
                                                                      const PowerAllocationOptions& opts = {}) {
    if (!(power > 0.0)) throw ValidationError("solve_power_allocation: power must be positive");
    const std::size_t N = pos.variables();
    if (N == 0) throw DimensionError("solve_power_allocation: no variables");

    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < N; ++i)
        if (!pos.unused(i)) active.push_back(i);

    PowerAllocation alloc{std::vector<double>(N, 0.0)};
    SolveReport rep;
    if (active.empty()) {
        alloc.xi.assign(N, std::sqrt(2.0 * power / static_cast<double>(N)));
        rep.converged = true;
        rep.degenerate = true;
        rep.objective_trace = {0.0};
        return {alloc, rep};
    }

    if (opts.initial) {
        if (opts.initial->size() != N) throw DimensionError("solve_power_allocation: initial point has wrong length");
        for (std::size_t i : active) {
            if (!((*opts.initial)[i] > 0.0))
                throw ValidationError("solve_power_allocation: initial point must be positive on used tones");
            alloc.xi[i] = (*opts.initial)[i];
        }
    } else {
        for (std::size_t i : active) alloc.xi[i] = 1.0;
    }
    detail::scale_to_budget(alloc.xi, power);

    double value = pos.evaluate(alloc.xi);
    rep.objective_trace.push_back(value);

    if (active.size() > 1) {
        for (int it = 1; it <= opts.max_iterations; ++it) {
            const LogMonomial cond = condense(pos, alloc.xi);
            const ConvexSubproblem gp = power_allocation_gp(cond, active, alloc.xi, power);
            std::vector<double> next(N, 0.0);
            try {
                const ConvexSolution sol = solve_convex(gp, opts.solver);
                for (std::size_t j = 0; j < active.size(); ++j) next[active[j]] = std::exp(sol.x[1 + j]);
            } catch (const ConvergenceError& e) {
                for (std::size_t j = 0; j < active.size(); ++j) next[active[j]] = std::exp(e.best_iterate[1 + j]);
            }
            detail::scale_to_budget(next, power);
            double next_value = pos.evaluate(next);
            if (opts.extrapolate && next_value >= value) {
                // MM steps contract slowly near the optimum; stretch the log-domain
                // step while the true objective keeps improving. No amplitude may
                // move by more than a factor of 10 per stretch, since collapsing
                // toward a vertex leaves MM in a region where it barely moves.
                for (double alpha = 2.0; alpha <= 16.0; alpha *= 2.0) {
                    std::vector<double> trial(N, 0.0);
                    bool bounded = true;
                    for (std::size_t i : active) {
                        trial[i] = alloc.xi[i] * std::pow(next[i] / alloc.xi[i], alpha);
                        const double r = trial[i] / alloc.xi[i];
                        bounded = bounded && r >= 0.1 && r <= 10.0;
                    }
                    if (!bounded) break;
                    detail::scale_to_budget(trial, power);
                    const double tv = pos.evaluate(trial);
                    if (!(tv > next_value)) break;
                    next = std::move(trial);
                    next_value = tv;
                }
            }
            rep.iterations = it;
            rep.relative_step = detail::relative_change(next, alloc.xi);
            if (!(next_value >= value)) {
                // the step cannot improve within solver accuracy: stationary
                rep.converged = true;
                break;
            }
            alloc.xi = std::move(next);
            value = next_value;
            rep.objective_trace.push_back(value);
            if (rep.relative_step <= opts.epsilon) {
                rep.converged = true;
                break;
            }
        }
    } else {
        rep.converged = true;
    }

    if (opts.polish && active.size() > 1) {
        const double before = value;
        detail::polish_allocation(pos, active, alloc.xi, value, power);
        if (value > before) rep.objective_trace.push_back(value);
    }

    if (opts.vertex_check && active.size() > 1) {
        for (std::size_t i : active) {
            std::vector<double> vertex(N, 0.0);
            vertex[i] = std::sqrt(2.0 * power);
            const double v = pos.evaluate(vertex);
            if (v > value) {
                value = v;
                alloc.xi = std::move(vertex);
            }
        }
        if (value > rep.objective_trace.back()) rep.objective_trace.push_back(value);
    }
    return {alloc, rep};
}

struct RfOptions : SolveOptions {
    bool vertex_check = true;
    bool extrapolate = true;
    bool polish = true;
    ConvexOptions solver;
};

/// Algorithm 2. The reported objective is v_out of the assembled (s, w_n),
/// evaluated through the moment expressions.
inline std::pair<CombinerSolution, SolveReport> solve_rf_general(const Channel& c, const RectifierParams& p,
                                                                 double power, const RfOptions& opts = {}) {
    c.validate();
    if (!(power > 0.0)) throw ValidationError("solve_rf_general: power must be positive");
    const Betas b = beta_coeffs(p);
    const std::size_t N = c.tone_count();

    std::vector<CVector> w(N);
    std::vector<double> sigma(N);
    for (std::size_t n = 0; n < N; ++n) {
        auto beam = optimal_receive_beamformer(c.tones[n]);
        w[n] = std::move(beam.w);
        sigma[n] = beam.sigma;
    }

    const Posynomial pos = build_vout_posynomial(sigma, b);
    PowerAllocationOptions po;
    po.epsilon = opts.epsilon;
    po.max_iterations = opts.max_iterations;
    po.vertex_check = opts.vertex_check;
    po.extrapolate = opts.extrapolate;
    po.polish = opts.polish;
    po.solver = opts.solver;
    auto [alloc, rep] = solve_power_allocation(pos, power, po);

    CombinerSolution sol;
    sol.scheme = Scheme::RfOpt;
    sol.waveform = Waveform(c.tx, N);
    for (std::size_t n = 0; n < N; ++n) {
        const double xi = rep.degenerate ? 0.0 : alloc.xi[n];
        const auto mt = matched_transmit(w[n], c.tones[n], xi);
        auto block = sol.waveform.tone(n);
        for (std::size_t m = 0; m < c.tx; ++m) block[m] = mt.s[m];
    }
    sol.receive = std::move(w);
    sol.objective = rf_vout(sol.waveform, c, sol.receive, p);
    sol.report = rep;
    return {sol, rep};
}

} // namespace wpt
