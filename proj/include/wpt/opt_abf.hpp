// SPDX-License-Identifier: Apache-2.0
//
// RF combining through a phase-shifter / power-combiner receive chain: one
// analog beamformer w, common to all tones, with |w_q| = 1/sqrt(Q).
//
// The effective gains r_n = ||w^H H_n|| become variables. The modulus
// equality is relaxed to |w_q| <= 1/sqrt(Q), the gain equality to
// r_n^2 <= w^H H_n H_n^H w, whose right side is linearized from below at the
// previous beamformer. v_out(p, r) is condensed to a monomial as in the
// general case, so each SCA step is a convex program in
// (zeta~, xi~_n, r~_n, Re w_q, Im w_q).

#pragma once

#include "channel.hpp"
#include "convex.hpp"
#include "numerics.hpp"
#include "opt_rf.hpp"
#include "posynomial.hpp"
#include "rectenna.hpp"
#include "solution.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace wpt {

struct AnalogBeamformer {
    std::vector<double> theta; // radians in [-pi, pi)

    /// Entries (1/sqrt(Q)) e^{-j theta_q}.
    CVector vector() const {
        CVector w(theta.size());
        const double a = 1.0 / std::sqrt(static_cast<double>(theta.size()));
        for (std::size_t q = 0; q < theta.size(); ++q) w[q] = std::polar(a, -theta[q]);
        return w;
    }

    /// Phases of an arbitrary vector; zero entries map to theta = 0.
    static AnalogBeamformer from_phases(const CVector& w) {
        AnalogBeamformer b;
        b.theta.resize(w.size());
        for (std::size_t q = 0; q < w.size(); ++q) {
            double t = w[q] == cplx{} ? 0.0 : -std::arg(w[q]);
            if (t >= std::numbers::pi) t -= 2.0 * std::numbers::pi;
            b.theta[q] = t;
        }
        return b;
    }
};

struct AbfIterate {
    std::vector<double> xi; // amplitudes, 0 on unusable tones
    CVector w;              // |w_q| <= 1/sqrt(Q)
    std::vector<double> r;  // effective gains, 0 on unusable tones
    double zeta = 0.0;      // v_out(p, r)
};

/// Coefficient and exponents of the condensed constraint
/// log c1 + zeta~ + sum a_n xi~_n + sum b_n r~_n <= 0.
struct CondensedConstraint {
    double log_c1 = 0.0;
    std::vector<double> a;
    std::vector<double> b;
};

/// `pos` is over (xi_1..xi_N, r_1..r_N), see build_vout_posynomial_joint.
inline CondensedConstraint condense_constraint(const Posynomial& pos, const AbfIterate& at) {
    const std::size_t N = at.xi.size();
    if (pos.variables() != 2 * N || at.r.size() != N) throw DimensionError("condense_constraint: size mismatch");
    std::vector<double> x(at.xi);
    x.insert(x.end(), at.r.begin(), at.r.end());
    const LogMonomial m = condense(pos, x);
    CondensedConstraint out;
    out.log_c1 = -m.log_coefficient;
    out.a.assign(m.exponents.begin(), m.exponents.begin() + static_cast<long>(N));
    out.b.assign(m.exponents.begin() + static_cast<long>(N), m.exponents.end());
    for (auto& v : out.a) v = -v;
    for (auto& v : out.b) v = -v;
    return out;
}

/// Joint posynomial restricted to usable tones: terms touching a tone with
/// usable[n] == false are dropped.
inline Posynomial build_vout_posynomial_joint(const std::vector<bool>& usable, const Betas& b) {
    const std::size_t N = usable.size();
    Posynomial f(2 * N);
    for (std::size_t n = 0; n < N; ++n) {
        if (!usable[n] || b.beta2 == 0.0) continue;
        std::vector<int> e(2 * N, 0);
        e[n] = 2;
        e[N + n] = 2;
        f.add(0.5 * b.beta2, std::move(e));
    }
    if (b.beta4 > 0.0)
        detail::for_each_quartic_tuple(N, [&](std::size_t n1, std::size_t n2, std::size_t n3, std::size_t n4) {
            if (!usable[n1] || !usable[n2] || !usable[n3] || !usable[n4]) return;
            std::vector<int> e(2 * N, 0);
            for (std::size_t n : {n1, n2, n3, n4}) {
                ++e[n];
                ++e[N + n];
            }
            f.add(0.375 * b.beta4, std::move(e));
        });
    return f;
}

/// Index map of the subproblem variables: zeta~, then xi~ and r~ for each
/// usable tone, then (Re w_q, Im w_q) interleaved.
struct AbfLayout {
    std::vector<std::size_t> tones; // usable tone indices
    std::size_t rx = 0;

    std::size_t size() const { return 1 + 2 * tones.size() + 2 * rx; }
    std::size_t xi(std::size_t j) const { return 1 + j; }
    std::size_t r(std::size_t j) const { return 1 + tones.size() + j; }
    std::size_t re(std::size_t q) const { return 1 + 2 * tones.size() + 2 * q; }
    std::size_t im(std::size_t q) const { return 2 + 2 * tones.size() + 2 * q; }
};

inline AbfLayout abf_layout(const Channel& c) {
    AbfLayout l;
    l.rx = c.rx;
    for (std::size_t n = 0; n < c.tone_count(); ++n)
        if (c.tones[n].frobenius() > 0.0) l.tones.push_back(n);
    return l;
}

/// The convex program of one SCA step, started at the iterate.
inline ConvexSubproblem abf_subproblem(const AbfIterate& at, const Channel& c, double power,
                                       const CondensedConstraint& cond, const AbfLayout& L) {
    const std::size_t n = L.size();
    const std::size_t Q = c.rx;
    ConvexSubproblem sp;
    sp.objective.assign(n, 0.0);
    sp.objective[0] = -1.0;

    SumExpConstraint budget;
    budget.bound = 2.0 * power;
    for (std::size_t j = 0; j < L.tones.size(); ++j) {
        std::vector<double> a(n, 0.0);
        a[L.xi(j)] = 2.0;
        budget.a.push_back(std::move(a));
        budget.b.push_back(0.0);
    }
    sp.constraints.emplace_back(std::move(budget));

    for (std::size_t q = 0; q < Q; ++q) {
        QuadraticConstraint mod;
        mod.P = RMatrix(n, n);
        mod.P(L.re(q), L.re(q)) = 1.0;
        mod.P(L.im(q), L.im(q)) = 1.0;
        mod.q.assign(n, 0.0);
        mod.bound = 1.0 / static_cast<double>(Q);
        sp.constraints.emplace_back(std::move(mod));
    }

    // e^{2 r~_n} <= 2 Re{w0^H G_n w} - w0^H G_n w0, G_n = H_n H_n^H
    for (std::size_t j = 0; j < L.tones.size(); ++j) {
        const CMatrix& H = c.tones[L.tones[j]];
        const CVector y = H * adjoint_times(H, at.w); // G_n w0
        ExpAffineConstraint g;
        g.a.assign(n, 0.0);
        g.a[L.r(j)] = 2.0;
        g.g.assign(n, 0.0);
        for (std::size_t q = 0; q < Q; ++q) {
            g.g[L.re(q)] = 2.0 * y[q].real();
            g.g[L.im(q)] = 2.0 * y[q].imag();
        }
        g.h = -dot(at.w, y).real();
        sp.constraints.emplace_back(std::move(g));
    }

    AffineConstraint aff;
    aff.a.assign(n, 0.0);
    aff.a[0] = 1.0;
    aff.b = cond.log_c1;
    for (std::size_t j = 0; j < L.tones.size(); ++j) {
        aff.a[L.xi(j)] = cond.a[L.tones[j]];
        aff.a[L.r(j)] = cond.b[L.tones[j]];
    }
    sp.constraints.emplace_back(aff);

    sp.start.assign(n, 0.0);
    double lhs = cond.log_c1;
    for (std::size_t j = 0; j < L.tones.size(); ++j) {
        const std::size_t t = L.tones[j];
        sp.start[L.xi(j)] = std::log(at.xi[t]);
        sp.start[L.r(j)] = std::log(at.r[t]);
        lhs += cond.a[t] * sp.start[L.xi(j)] + cond.b[t] * sp.start[L.r(j)];
    }
    for (std::size_t q = 0; q < Q; ++q) {
        sp.start[L.re(q)] = at.w[q].real();
        sp.start[L.im(q)] = at.w[q].imag();
    }
    sp.start[0] = -lhs - 1e-9; // just inside the condensed constraint
    return sp;
}

namespace detail {

inline double gain_sq(const CMatrix& H, const CVector& w) { return norm_sq(adjoint_times(H, w)); }

// Initial point: phases of the dominant eigenvector of sum_n H_n H_n^H,
// moduli slightly inside the bound, uniform power, gains just below the
// achieved ones.
inline AbfIterate abf_initial(const Channel& c, double power, const AbfLayout& L) {
    const std::size_t N = c.tone_count();
    const std::size_t Q = c.rx;
    CMatrix S(Q, Q);
    for (const auto& H : c.tones) S += H * H.adjoint();
    for (std::size_t i = 0; i < Q; ++i) {
        S(i, i) = S(i, i).real();
        for (std::size_t j = i + 1; j < Q; ++j) S(j, i) = std::conj(S(i, j));
    }
    const CVector u = hermitian_max_eigpair(S).vector;
    AbfIterate it;
    it.w = AnalogBeamformer::from_phases(u).vector();
    it.w *= 1.0 - 1e-3;
    it.xi.assign(N, 0.0);
    it.r.assign(N, 0.0);
    const double xi = std::sqrt(2.0 * power / static_cast<double>(L.tones.size())) * (1.0 - 1e-6);
    for (std::size_t t : L.tones) {
        it.xi[t] = xi;
        it.r[t] = std::max(std::sqrt(gain_sq(c.tones[t], it.w)) * (1.0 - 1e-6), 1e-12);
    }
    return it;
}

inline void shrink_inside(AbfIterate& it, double factor) {
    for (auto& v : it.xi) v *= factor;
    for (auto& v : it.r) v *= factor;
    it.w *= factor;
}

} // namespace detail

struct AbfOptions : SolveOptions {
    ConvexOptions solver;
};

/// Algorithm 3. The trace holds v_out(p, r) at each accepted iterate, a
/// conservative proxy since r_n never exceeds the achieved gain; the
/// returned objective is v_out of the projected, re-optimized final point.
inline std::pair<CombinerSolution, SolveReport> solve_abf(const Channel& c, const RectifierParams& p, double power,
                                                          const AbfOptions& opts = {}) {
    c.validate();
    if (!(power > 0.0)) throw ValidationError("solve_abf: power must be positive");
    const Betas b = beta_coeffs(p);
    const std::size_t N = c.tone_count();
    const std::size_t Q = c.rx;
    const AbfLayout L = abf_layout(c);

    CombinerSolution sol;
    sol.scheme = Scheme::RfAbf;
    SolveReport rep;

    if (L.tones.empty()) {
        sol.waveform = Waveform(c.tx, N);
        sol.receive.assign(N, AnalogBeamformer{std::vector<double>(Q, 0.0)}.vector());
        rep = {0, true, true, 0.0, {0.0}};
        sol.report = rep;
        return {sol, rep};
    }

    std::vector<bool> usable(N, false);
    for (std::size_t t : L.tones) usable[t] = true;
    const Posynomial pos = build_vout_posynomial_joint(usable, b);
    auto proxy = [&](const AbfIterate& it) {
        std::vector<double> x(it.xi);
        x.insert(x.end(), it.r.begin(), it.r.end());
        return pos.evaluate(x);
    };

    AbfIterate cur = detail::abf_initial(c, power, L);
    cur.zeta = proxy(cur);
    rep.objective_trace.push_back(cur.zeta);

    for (int i = 1; i <= opts.max_iterations; ++i) {
        ConvexSubproblem sp;
        for (int attempt = 0;; ++attempt) {
            const CondensedConstraint cond = condense_constraint(pos, cur);
            sp = abf_subproblem(cur, c, power, cond, L);
            if (max_constraint_value(sp, sp.start) < 0.0) break;
            if (attempt == 8) throw std::logic_error("solve_abf: iterate is not strictly feasible");
            detail::shrink_inside(cur, 1.0 - 1e-9);
        }

        std::vector<double> x;
        try {
            x = solve_convex(sp, opts.solver).x;
        } catch (const ConvergenceError& e) {
            x = e.best_iterate;
        }
        AbfIterate next;
        next.xi.assign(N, 0.0);
        next.r.assign(N, 0.0);
        next.w = CVector(Q);
        for (std::size_t j = 0; j < L.tones.size(); ++j) {
            next.xi[L.tones[j]] = std::exp(x[L.xi(j)]);
            next.r[L.tones[j]] = std::exp(x[L.r(j)]);
        }
        for (std::size_t q = 0; q < Q; ++q) next.w[q] = {x[L.re(q)], x[L.im(q)]};
        next.zeta = proxy(next);

        rep.iterations = i;
        if (!(next.zeta >= cur.zeta)) {
            // no improvement representable at solver accuracy
            rep.relative_step = 0.0;
            rep.converged = true;
            break;
        }
        rep.relative_step = std::abs(next.zeta - cur.zeta) / std::abs(next.zeta);
        cur = std::move(next);
        rep.objective_trace.push_back(cur.zeta);
        if (rep.relative_step < opts.epsilon) {
            rep.converged = true;
            break;
        }
    }

    // restore exact unit modulus, then re-solve the power allocation with
    // the realized gains
    const CVector w = AnalogBeamformer::from_phases(cur.w).vector();
    std::vector<double> gains(N, 0.0);
    for (std::size_t n = 0; n < N; ++n) gains[n] = std::sqrt(detail::gain_sq(c.tones[n], w));
    const Posynomial fixed = build_vout_posynomial(gains, b);
    PowerAllocationOptions po;
    po.epsilon = opts.epsilon;
    po.max_iterations = opts.max_iterations;
    po.solver = opts.solver;
    std::vector<double> init(N, 0.0);
    for (std::size_t n = 0; n < N; ++n)
        init[n] = fixed.unused(n) ? 0.0 : std::max(cur.xi[n], 1e-12 * std::sqrt(2.0 * power));
    po.initial = init;
    auto [alloc, final_rep] = solve_power_allocation(fixed, power, po);

    sol.waveform = Waveform(c.tx, N);
    for (std::size_t n = 0; n < N; ++n) {
        const double xi = final_rep.degenerate ? 0.0 : alloc.xi[n];
        const auto mt = matched_transmit(w, c.tones[n], xi);
        auto block = sol.waveform.tone(n);
        for (std::size_t m = 0; m < c.tx; ++m) block[m] = mt.s[m];
    }
    sol.receive.assign(N, w);
    sol.objective = rf_vout(sol.waveform, c, sol.receive, p);
    sol.report = rep;
    return {sol, rep};
}

} // namespace wpt
