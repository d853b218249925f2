// SPDX-License-Identifier: Apache-2.0
//
// Monte-Carlo sweep over (M, N, Q, scheme). Every realization draws one
// channel per (M, N, Q) and runs all requested schemes on it, so schemes are
// compared on common random numbers. Work items run on a small thread pool;
// rows come back ordered by (cell, realization) regardless of completion
// order, and each item's result depends only on its indices.

#pragma once

#include "baseline.hpp"
#include "channel.hpp"
#include "errors.hpp"
#include "opt_abf.hpp"
#include "opt_dc.hpp"
#include "opt_rf.hpp"
#include "rectenna.hpp"
#include "solution.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

namespace wpt {

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

struct ExperimentSpec {
    std::vector<std::size_t> tx{2};
    std::vector<std::size_t> tones{1, 2, 4, 8};
    std::vector<std::size_t> rx{1, 2, 4};
    std::vector<Scheme> schemes{Scheme::DcOpt, Scheme::DcAss, Scheme::RfOpt, Scheme::RfAss, Scheme::RfAbf};
    std::size_t realizations = 100;
    std::uint64_t seed = 1;
    double power_dbm = -30.0;
    double center_hz = 5.18e9;
    double bandwidth_hz = 10e6;
    TapProfile taps = TapProfile::default_profile();
    RectifierParams rectifier;
    SolveOptions solver;

    void validate() const {
        if (tx.empty() || tones.empty() || rx.empty()) throw ValidationError("ExperimentSpec: antenna and tone lists must be nonempty");
        for (auto v : tx)
            if (v < 1) throw ValidationError("ExperimentSpec: M must be >= 1");
        for (auto v : tones)
            if (v < 1) throw ValidationError("ExperimentSpec: N must be >= 1");
        for (auto v : rx)
            if (v < 1) throw ValidationError("ExperimentSpec: Q must be >= 1");
        if (schemes.empty()) throw ValidationError("ExperimentSpec: scheme list is empty");
        if (realizations < 1) throw ValidationError("ExperimentSpec: need at least one realization");
        if (!std::isfinite(power_dbm)) throw ValidationError("ExperimentSpec: power must be finite");
        if (!(solver.epsilon > 0.0) || solver.max_iterations < 1)
            throw ValidationError("ExperimentSpec: solver epsilon must be positive and i_max >= 1");
        taps.validate();
        rectifier.validate();
        BandPlan{center_hz, bandwidth_hz, 1}.validate();
    }
};

struct ResultRow {
    std::size_t M = 0, N = 0, Q = 0;
    Scheme scheme = Scheme::DcOpt;
    std::size_t realization = 0;
    double p_out = 0.0; // W
    double p_rf = 0.0;  // W
    int iterations = 0;
    bool converged = false;
    double wall_time = 0.0; // s
};

struct CellSummary {
    std::size_t M = 0, N = 0, Q = 0;
    Scheme scheme = Scheme::DcOpt;
    std::size_t count = 0;
    std::size_t converged = 0;
    double p_out_mean = 0.0, p_out_ci95 = 0.0;
    double p_rf_mean = 0.0, p_rf_ci95 = 0.0;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::vector<CellSummary> cells;
};

// ---------------------------------------------------------------------------
// Single solve
// ---------------------------------------------------------------------------

inline CombinerSolution solve_scheme(Scheme s, const Channel& c, const RectifierParams& p, double power,
                                     const SolveOptions& opts) {
    switch (s) {
    case Scheme::DcOpt: {
        DcOptions o;
        static_cast<SolveOptions&>(o) = opts;
        return solve_dc(c, p, power, o).first;
    }
    case Scheme::DcAss: return solve_ass_dc(c, p, power);
    case Scheme::RfOpt: {
        RfOptions o;
        static_cast<SolveOptions&>(o) = opts;
        return solve_rf_general(c, p, power, o).first;
    }
    case Scheme::RfAss: return solve_ass_rf(c, p, power);
    case Scheme::RfAbf: {
        AbfOptions o;
        static_cast<SolveOptions&>(o) = opts;
        return solve_abf(c, p, power, o).first;
    }
    }
    throw ValidationError("solve_scheme: unknown scheme");
}

/// Output DC power and received RF power of an assembled solution,
/// recomputed through the rectenna model.
inline std::pair<double, double> evaluate_solution(const CombinerSolution& sol, const Channel& c,
                                                   const RectifierParams& p) {
    if (is_dc_scheme(sol.scheme))
        return {dc_total_power(sol.waveform, c, p), received_rf_power_dc(sol.waveform, c)};
    return {rf_total_power(sol.waveform, c, sol.receive, p), received_rf_power_rf(sol.waveform, c, sol.receive)};
}

// ---------------------------------------------------------------------------
// Threads
// ---------------------------------------------------------------------------

/// --threads beats WPT_THREADS beats hardware concurrency.
inline unsigned resolve_threads(std::optional<long> flag) {
    auto check = [](long v, const char* src) {
        if (v < 1) throw ValidationError(std::string(src) + ": thread count must be >= 1");
        return static_cast<unsigned>(v);
    };
    if (flag) return check(*flag, "--threads");
    if (const char* env = std::getenv("WPT_THREADS"); env && *env) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0') throw ValidationError("WPT_THREADS: not an integer");
        return check(v, "WPT_THREADS");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

inline std::vector<CellSummary> summarize(const ExperimentSpec& spec, const std::vector<ResultRow>& rows) {
    std::vector<CellSummary> out;
    const std::size_t R = spec.realizations;
    for (std::size_t start = 0; start < rows.size(); start += R) {
        CellSummary s;
        const ResultRow& first = rows[start];
        s.M = first.M;
        s.N = first.N;
        s.Q = first.Q;
        s.scheme = first.scheme;
        s.count = R;
        double so = 0.0, sr = 0.0;
        for (std::size_t i = start; i < start + R; ++i) {
            so += rows[i].p_out;
            sr += rows[i].p_rf;
            s.converged += rows[i].converged ? 1 : 0;
        }
        s.p_out_mean = so / static_cast<double>(R);
        s.p_rf_mean = sr / static_cast<double>(R);
        if (R > 1) {
            double vo = 0.0, vr = 0.0;
            for (std::size_t i = start; i < start + R; ++i) {
                vo += (rows[i].p_out - s.p_out_mean) * (rows[i].p_out - s.p_out_mean);
                vr += (rows[i].p_rf - s.p_rf_mean) * (rows[i].p_rf - s.p_rf_mean);
            }
            const double k = 1.96 / std::sqrt(static_cast<double>(R));
            s.p_out_ci95 = k * std::sqrt(vo / static_cast<double>(R - 1));
            s.p_rf_ci95 = k * std::sqrt(vr / static_cast<double>(R - 1));
        }
        out.push_back(s);
    }
    return out;
}

/// Runs the sweep. `progress`, if set, is called after each finished work
/// item with (done, total); calls are serialized.
inline ExperimentResult run_experiment(const ExperimentSpec& spec, unsigned threads = 1,
                                       std::function<void(std::size_t, std::size_t)> progress = {}) {
    spec.validate();
    if (threads < 1) threads = 1;
    const double power = dbm_to_watts(spec.power_dbm);
    const std::size_t S = spec.schemes.size();
    const std::size_t R = spec.realizations;

    struct Geometry {
        std::size_t M, N, Q;
    };
    std::vector<Geometry> geo;
    for (auto M : spec.tx)
        for (auto N : spec.tones)
            for (auto Q : spec.rx) geo.push_back({M, N, Q});

    // rows laid out as [geometry][scheme][realization]
    std::vector<ResultRow> rows(geo.size() * S * R);
    const std::size_t total = geo.size() * R;
    std::atomic<std::size_t> next{0};
    std::size_t done = 0;
    std::mutex mu;
    std::exception_ptr failure;

    auto work = [&]() {
        while (true) {
            const std::size_t item = next.fetch_add(1);
            if (item >= total) return;
            const std::size_t g = item / R;
            const std::size_t r = item % R;
            try {
                const auto [M, N, Q] = geo[g];
                const BandPlan plan{spec.center_hz, spec.bandwidth_hz, N};
                const Channel c = generate_channel(spec.taps, plan, M, Q, spec.seed, r);
                for (std::size_t k = 0; k < S; ++k) {
                    ResultRow& row = rows[(g * S + k) * R + r];
                    row.M = M;
                    row.N = N;
                    row.Q = Q;
                    row.scheme = spec.schemes[k];
                    row.realization = r;
                    const auto t0 = std::chrono::steady_clock::now();
                    try {
                        const CombinerSolution sol = solve_scheme(row.scheme, c, spec.rectifier, power, spec.solver);
                        const auto [pout, prf] = evaluate_solution(sol, c, spec.rectifier);
                        row.p_out = pout;
                        row.p_rf = prf;
                        row.iterations = sol.report.iterations;
                        row.converged = sol.report.converged;
                    } catch (const ConvergenceError&) {
                        row.converged = false;
                    } catch (const FeasibilityError&) {
                        row.converged = false;
                    }
                    row.wall_time =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                }
            } catch (...) {
                std::lock_guard lock(mu);
                if (!failure) failure = std::current_exception();
                next.store(total);
                return;
            }
            if (progress) {
                std::lock_guard lock(mu);
                progress(++done, total);
            }
        }
    };

    const unsigned n = static_cast<unsigned>(std::min<std::size_t>(threads, total));
    if (n <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < n; ++i) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    ExperimentResult res;
    res.cells = summarize(spec, rows);
    res.rows = std::move(rows);
    return res;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv(std::ostream& os, const std::vector<ResultRow>& rows, bool wall_time = false) {
    os << "M,N,Q,scheme,realization,P_out_W,P_rf_W,iterations,converged";
    if (wall_time) os << ",wall_time_s";
    os << '\n';
    for (const auto& r : rows) {
        os << r.M << ',' << r.N << ',' << r.Q << ',' << scheme_name(r.scheme) << ',' << r.realization << ','
           << format_double(r.p_out) << ',' << format_double(r.p_rf) << ',' << r.iterations << ','
           << (r.converged ? 1 : 0);
        if (wall_time) os << ',' << format_double(r.wall_time);
        os << '\n';
    }
}

inline nlohmann::json summary_to_json(const ExperimentSpec& spec, const std::vector<CellSummary>& cells);

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

inline nlohmann::json spec_to_json(const ExperimentSpec& s) {
    nlohmann::json j;
    j["tx_antennas"] = s.tx;
    j["tones"] = s.tones;
    j["rx_antennas"] = s.rx;
    auto& sch = j["schemes"] = nlohmann::json::array();
    for (auto x : s.schemes) sch.push_back(std::string(scheme_name(x)));
    j["realizations"] = s.realizations;
    j["seed"] = s.seed;
    j["power_dbm"] = s.power_dbm;
    j["center_hz"] = s.center_hz;
    j["bandwidth_hz"] = s.bandwidth_hz;
    j["taps"] = {{"powers", s.taps.powers}, {"spacing_s", s.taps.spacing_s}};
    j["rectifier"] = {{"antenna_resistance", s.rectifier.antenna_resistance},
                      {"thermal_voltage", s.rectifier.thermal_voltage},
                      {"ideality", s.rectifier.ideality},
                      {"load_resistance", s.rectifier.load_resistance},
                      {"truncation_order", s.rectifier.truncation_order}};
    j["solver"] = {{"epsilon", s.solver.epsilon}, {"max_iterations", s.solver.max_iterations}};
    return j;
}

/// Every key is optional and falls back to the ExperimentSpec default.
/// Unknown keys are rejected. "taps" is either "default", "flat" or an
/// object {powers, spacing_s}.
inline ExperimentSpec spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("config: top level must be an object");
    static const std::vector<std::string> known{"tx_antennas", "tones",        "rx_antennas", "schemes",
                                                "realizations", "seed",        "power_dbm",   "center_hz",
                                                "bandwidth_hz", "taps",        "rectifier",   "solver"};
    for (const auto& [k, v] : j.items())
        if (std::find(known.begin(), known.end(), k) == known.end()) throw ParseError("config: unknown key '" + k + "'");

    ExperimentSpec s;
    auto field = [&](const nlohmann::json& obj, const char* key, auto& out, const std::string& ctx) {
        if (!obj.contains(key)) return;
        try {
            obj.at(key).get_to(out);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("config: " + ctx + key + ": " + e.what());
        }
    };
    field(j, "tx_antennas", s.tx, "");
    field(j, "tones", s.tones, "");
    field(j, "rx_antennas", s.rx, "");
    if (j.contains("schemes")) {
        std::vector<std::string> names;
        field(j, "schemes", names, "");
        s.schemes.clear();
        for (const auto& n : names) s.schemes.push_back(parse_scheme(n));
    }
    field(j, "realizations", s.realizations, "");
    field(j, "seed", s.seed, "");
    field(j, "power_dbm", s.power_dbm, "");
    field(j, "center_hz", s.center_hz, "");
    field(j, "bandwidth_hz", s.bandwidth_hz, "");
    if (j.contains("taps")) {
        const auto& t = j.at("taps");
        if (t.is_string()) {
            const auto name = t.get<std::string>();
            if (name == "default")
                s.taps = TapProfile::default_profile();
            else if (name == "flat")
                s.taps = TapProfile::flat();
            else
                throw ParseError("config: taps: unknown profile '" + name + "'");
        } else if (t.is_object()) {
            s.taps = TapProfile{};
            field(t, "powers", s.taps.powers, "taps.");
            field(t, "spacing_s", s.taps.spacing_s, "taps.");
        } else {
            throw ParseError("config: taps must be a profile name or an object");
        }
    }
    if (j.contains("rectifier")) {
        const auto& r = j.at("rectifier");
        if (!r.is_object()) throw ParseError("config: rectifier must be an object");
        field(r, "antenna_resistance", s.rectifier.antenna_resistance, "rectifier.");
        field(r, "thermal_voltage", s.rectifier.thermal_voltage, "rectifier.");
        field(r, "ideality", s.rectifier.ideality, "rectifier.");
        field(r, "load_resistance", s.rectifier.load_resistance, "rectifier.");
        field(r, "truncation_order", s.rectifier.truncation_order, "rectifier.");
    }
    if (j.contains("solver")) {
        const auto& o = j.at("solver");
        if (!o.is_object()) throw ParseError("config: solver must be an object");
        field(o, "epsilon", s.solver.epsilon, "solver.");
        field(o, "max_iterations", s.solver.max_iterations, "solver.");
    }
    s.validate();
    return s;
}

inline ExperimentSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("config '" + path + "': " + e.what());
    }
    return spec_from_json(j);
}

inline nlohmann::json summary_to_json(const ExperimentSpec& spec, const std::vector<CellSummary>& cells) {
    nlohmann::json out;
    out["spec"] = spec_to_json(spec);
    auto& arr = out["cells"] = nlohmann::json::array();
    for (const auto& c : cells)
        arr.push_back({{"M", c.M},
                       {"N", c.N},
                       {"Q", c.Q},
                       {"scheme", std::string(scheme_name(c.scheme))},
                       {"realizations", c.count},
                       {"converged", c.converged},
                       {"P_out_mean_W", c.p_out_mean},
                       {"P_out_ci95_W", c.p_out_ci95},
                       {"P_rf_mean_W", c.p_rf_mean},
                       {"P_rf_ci95_W", c.p_rf_ci95}});
    return out;
}

} // namespace wpt
