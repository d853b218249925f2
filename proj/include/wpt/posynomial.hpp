// SPDX-License-Identifier: Apache-2.0
//
// Posynomials with integer exponents and their AM-GM monomial condensation.

#pragma once

#include "errors.hpp"

#include <cmath>
#include <map>
#include <span>
#include <vector>

namespace wpt {

struct Monomial {
    double coefficient = 0.0;  // > 0
    std::vector<int> exponents;

    double evaluate(std::span<const double> x) const {
        double v = coefficient;
        for (std::size_t i = 0; i < exponents.size(); ++i)
            if (exponents[i] != 0) v *= std::pow(x[i], exponents[i]);
        return v;
    }
    double log_value(std::span<const double> logx) const {
        double v = std::log(coefficient);
        for (std::size_t i = 0; i < exponents.size(); ++i) v += exponents[i] * logx[i];
        return v;
    }
};

/// Monomial with real exponents, kept in log form: log c + sum_i e_i log x_i.
struct LogMonomial {
    double log_coefficient = 0.0;
    std::vector<double> exponents;

    double log_value(std::span<const double> logx) const {
        double v = log_coefficient;
        for (std::size_t i = 0; i < exponents.size(); ++i) v += exponents[i] * logx[i];
        return v;
    }
    double evaluate(std::span<const double> x) const {
        double v = log_coefficient;
        for (std::size_t i = 0; i < exponents.size(); ++i)
            if (exponents[i] != 0.0) v += exponents[i] * std::log(x[i]);
        return std::exp(v);
    }
};

class Posynomial {
public:
    explicit Posynomial(std::size_t variables = 0) : vars_(variables) {}

    std::size_t variables() const noexcept { return vars_; }
    const std::vector<Monomial>& monomials() const noexcept { return terms_; }
    bool empty() const noexcept { return terms_.empty(); }

    /// Adds c * prod x^a, merging with an existing term of identical exponents.
    void add(double coefficient, std::vector<int> exponents) {
        if (exponents.size() != vars_) throw DimensionError("Posynomial: exponent vector has wrong length");
        if (!(coefficient > 0.0)) throw ValidationError("Posynomial: coefficients must be positive");
        auto [it, inserted] = index_.try_emplace(exponents, terms_.size());
        if (inserted)
            terms_.push_back({coefficient, std::move(exponents)});
        else
            terms_[it->second].coefficient += coefficient;
    }

    double evaluate(std::span<const double> x) const {
        if (x.size() != vars_) throw DimensionError("Posynomial: point has wrong length");
        double v = 0.0;
        for (const auto& t : terms_) v += t.evaluate(x);
        return v;
    }

    /// True when variable i appears in no term.
    bool unused(std::size_t i) const {
        for (const auto& t : terms_)
            if (t.exponents[i] != 0) return false;
        return true;
    }

private:
    std::size_t vars_;
    std::vector<Monomial> terms_;
    std::map<std::vector<int>, std::size_t> index_;
};

/// Weights gamma_k = g_k(x) / sum_j g_j(x) at a strictly positive point.
inline std::vector<double> amgm_weights(const Posynomial& f, std::span<const double> x) {
    std::vector<double> logs(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) && !f.unused(i)) throw ValidationError("amgm_weights: expansion point must be positive");
        logs[i] = x[i] > 0.0 ? std::log(x[i]) : 0.0;
    }
    std::vector<double> lg(f.monomials().size());
    double mx = -INFINITY;
    for (std::size_t k = 0; k < lg.size(); ++k) {
        lg[k] = f.monomials()[k].log_value(logs);
        mx = std::max(mx, lg[k]);
    }
    double s = 0.0;
    for (auto& v : lg) {
        v = std::exp(v - mx);
        s += v;
    }
    for (auto& v : lg) v /= s;
    return lg;
}

/// AM-GM condensation at x: the monomial prod_k (g_k(y)/gamma_k)^{gamma_k},
/// which under-estimates f everywhere and touches it at y = x.
inline LogMonomial condense(const Posynomial& f, std::span<const double> x) {
    if (f.empty()) throw ValidationError("condense: empty posynomial");
    const auto gamma = amgm_weights(f, x);
    LogMonomial out{0.0, std::vector<double>(f.variables(), 0.0)};
    for (std::size_t k = 0; k < gamma.size(); ++k) {
        const auto& t = f.monomials()[k];
        if (gamma[k] <= 0.0) continue; // underflowed weight contributes nothing
        out.log_coefficient += gamma[k] * (std::log(t.coefficient) - std::log(gamma[k]));
        for (std::size_t i = 0; i < out.exponents.size(); ++i) out.exponents[i] += gamma[k] * t.exponents[i];
    }
    return out;
}

} // namespace wpt
