// Command-line front end: simulate, optimize, oracle, channel-gen.
//
// Exit status: 0 success, 1 runtime failure (or oracle mismatch), 2 usage
// error (bad flags, malformed config or channel file).

#include <wpt/wpt.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>

namespace {

constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

nlohmann::json complex_list(std::span<const wpt::cplx> v) {
    nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
    for (auto x : v) {
        re.push_back(x.real());
        im.push_back(x.imag());
    }
    return {{"re", re}, {"im", im}};
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
    if (path.empty() || path == "-") return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
    return file;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    std::string config;
    std::vector<std::size_t> tx, tones, rx;
    std::vector<std::string> schemes;
    std::optional<std::size_t> realizations;
    std::optional<std::uint64_t> seed;
    std::optional<double> power_dbm, epsilon;
    std::optional<int> max_iterations;
    std::optional<long> threads;
    std::string out = "-";
    std::string summary;
    bool wall_time = false;
    bool quiet = false;
};

int run_simulate(const SimulateArgs& a) {
    wpt::ExperimentSpec spec;
    try {
        if (!a.config.empty()) spec = wpt::load_spec(a.config);
        if (!a.tx.empty()) spec.tx = a.tx;
        if (!a.tones.empty()) spec.tones = a.tones;
        if (!a.rx.empty()) spec.rx = a.rx;
        if (!a.schemes.empty()) {
            spec.schemes.clear();
            for (const auto& s : a.schemes) spec.schemes.push_back(wpt::parse_scheme(s));
        }
        if (a.realizations) spec.realizations = *a.realizations;
        if (a.seed) spec.seed = *a.seed;
        if (a.power_dbm) spec.power_dbm = *a.power_dbm;
        if (a.epsilon) spec.solver.epsilon = *a.epsilon;
        if (a.max_iterations) spec.solver.max_iterations = *a.max_iterations;
        spec.validate();
    } catch (const wpt::ParseError& e) {
        throw UsageError(e.what());
    } catch (const wpt::ValidationError& e) {
        throw UsageError(e.what());
    }
    unsigned threads = 1;
    try {
        threads = wpt::resolve_threads(a.threads);
    } catch (const wpt::ValidationError& e) {
        throw UsageError(e.what());
    }

    std::function<void(std::size_t, std::size_t)> progress;
    if (!a.quiet)
        progress = [](std::size_t done, std::size_t total) {
            if (done == total || done % 50 == 0) std::fprintf(stderr, "\r%zu/%zu", done, total);
            if (done == total) std::fputc('\n', stderr);
        };
    const auto res = wpt::run_experiment(spec, threads, progress);

    std::ofstream file;
    std::ostream& os = open_out(a.out, file);
    wpt::write_csv(os, res.rows, a.wall_time);
    if (!a.summary.empty()) {
        std::ofstream js(a.summary);
        if (!js) throw std::runtime_error("cannot open '" + a.summary + "' for writing");
        js << wpt::summary_to_json(spec, res.cells).dump(2) << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct OptimizeArgs {
    std::string channel;
    std::string scheme;
    double power_dbm = -30.0;
    double epsilon = 1e-4;
    int max_iterations = 100;
    std::string out = "-";
};

int run_optimize(const OptimizeArgs& a) {
    wpt::Channel c;
    wpt::Scheme scheme;
    try {
        c = wpt::load_channel(a.channel);
        scheme = wpt::parse_scheme(a.scheme);
    } catch (const wpt::ParseError& e) {
        throw UsageError(e.what());
    } catch (const wpt::ValidationError& e) {
        throw UsageError(e.what());
    }
    const wpt::RectifierParams p;
    const double power = wpt::dbm_to_watts(a.power_dbm);
    const wpt::CombinerSolution sol = wpt::solve_scheme(scheme, c, p, power, {a.epsilon, a.max_iterations});
    const auto [pout, prf] = wpt::evaluate_solution(sol, c, p);

    nlohmann::json j;
    j["scheme"] = std::string(wpt::scheme_name(scheme));
    j["M"] = c.tx;
    j["N"] = c.tone_count();
    j["Q"] = c.rx;
    j["power_W"] = power;
    j["objective"] = sol.objective;
    j["P_out_W"] = pout;
    j["P_rf_W"] = prf;
    j["iterations"] = sol.report.iterations;
    j["converged"] = sol.report.converged;
    j["degenerate"] = sol.report.degenerate;
    j["trace"] = sol.report.objective_trace;
    auto& tones = j["waveform"] = nlohmann::json::array();
    for (std::size_t n = 0; n < c.tone_count(); ++n) tones.push_back(complex_list(sol.waveform.tone(n)));
    auto& rx = j["receive"] = nlohmann::json::array();
    for (const auto& w : sol.receive) rx.push_back(complex_list(w.span()));

    std::ofstream file;
    open_out(a.out, file) << j.dump(2) << '\n';
    return 0;
}

// ---------------------------------------------------------------------------

struct OracleArgs {
    std::size_t tones = 8;
    std::size_t trials = 100;
    std::uint64_t seed = 1;
};

int run_oracle(const OracleArgs& a) {
    if (a.tones < 1 || a.trials < 1) throw UsageError("--tones and --trials must be >= 1");
    std::mt19937_64 rng(a.seed);
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    std::uniform_int_distribution<std::size_t> dim(1, 4);
    auto rel = [](double x, double ref) { return std::abs(x - ref) / std::max(std::abs(ref), 1e-300); };
    double worst = 0.0;
    for (std::size_t t = 0; t < a.trials; ++t) {
        const std::size_t M = dim(rng), Q = dim(rng), N = a.tones;
        wpt::Channel c;
        c.tx = M;
        c.rx = Q;
        for (std::size_t n = 0; n < N; ++n) {
            wpt::CMatrix H(Q, M);
            for (std::size_t i = 0; i < Q; ++i)
                for (std::size_t j = 0; j < M; ++j) H(i, j) = {g(rng), g(rng)};
            c.tones.push_back(std::move(H));
        }
        wpt::CVector s(M * N);
        for (auto& v : s) v = {g(rng), g(rng)};
        s *= std::sqrt(2e-6) / wpt::norm(s);
        const wpt::Waveform wf(M, N, s);
        for (std::size_t q = 0; q < Q; ++q) {
            const auto m = wpt::dc_moments(wf, c, q);
            const auto amp = wpt::antenna_amplitudes(wf, c, q);
            worst = std::max(worst, rel(m.second, wpt::time_average_oracle(amp, 2)));
            worst = std::max(worst, rel(m.fourth, wpt::time_average_oracle(amp, 4)));
        }
        std::vector<wpt::CVector> w;
        for (std::size_t n = 0; n < N; ++n) {
            wpt::CVector v(Q);
            for (auto& x : v) x = {g(rng), g(rng)};
            v *= 1.0 / wpt::norm(v);
            w.push_back(std::move(v));
        }
        const auto m = wpt::rf_moments(wf, c, w);
        const auto amp = wpt::combined_amplitudes(wf, c, w);
        worst = std::max(worst, rel(m.second, wpt::time_average_oracle(amp, 2)));
        worst = std::max(worst, rel(m.fourth, wpt::time_average_oracle(amp, 4)));
    }
    std::printf("max relative moment error: %.3e over %zu trials (N = %zu)\n", worst, a.trials, a.tones);
    return worst <= 1e-9 ? 0 : 1;
}

// ---------------------------------------------------------------------------

struct ChannelGenArgs {
    std::size_t tx = 2, tones = 4, rx = 2;
    std::uint64_t seed = 1;
    std::uint64_t realization = 0;
    double center_hz = 5.18e9, bandwidth_hz = 10e6;
    bool flat = false;
    std::string out = "-";
};

int run_channel_gen(const ChannelGenArgs& a) {
    wpt::Channel c;
    try {
        const auto profile = a.flat ? wpt::TapProfile::flat() : wpt::TapProfile::default_profile();
        c = wpt::generate_channel(profile, wpt::BandPlan{a.center_hz, a.bandwidth_hz, a.tones}, a.tx, a.rx, a.seed,
                                  a.realization);
    } catch (const wpt::ValidationError& e) {
        throw UsageError(e.what());
    }
    std::ofstream file;
    open_out(a.out, file) << wpt::channel_to_json(c).dump(1) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multisine waveform and beamforming design for wireless power transfer"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Monte-Carlo sweep, CSV rows to --out");
    s->add_option("--config", sim.config, "JSON experiment spec")->check(CLI::ExistingFile);
    s->add_option("--tx-antennas,-M", sim.tx, "transmit antenna counts");
    s->add_option("--tones,-N", sim.tones, "tone counts");
    s->add_option("--rx-antennas,-Q", sim.rx, "receive antenna counts");
    s->add_option("--scheme", sim.schemes, "dc-opt, dc-ass, rf-opt, rf-ass, rf-abf");
    s->add_option("--realizations", sim.realizations);
    s->add_option("--seed", sim.seed);
    s->add_option("--power-dbm", sim.power_dbm);
    s->add_option("--epsilon", sim.epsilon);
    s->add_option("--max-iterations", sim.max_iterations);
    s->add_option("--threads", sim.threads, "worker threads (overrides WPT_THREADS)");
    s->add_option("--out,-o", sim.out, "CSV path, '-' for stdout");
    s->add_option("--summary", sim.summary, "per-cell summary JSON path");
    s->add_flag("--wall-time", sim.wall_time, "append a wall_time_s column");
    s->add_flag("--quiet", sim.quiet, "no progress on stderr");

    OptimizeArgs opt;
    auto* o = app.add_subcommand("optimize", "solve one channel file, JSON to --out");
    o->add_option("--channel", opt.channel)->required();
    o->add_option("--scheme", opt.scheme)->required();
    o->add_option("--power-dbm", opt.power_dbm);
    o->add_option("--epsilon", opt.epsilon);
    o->add_option("--max-iterations", opt.max_iterations);
    o->add_option("--out,-o", opt.out);

    OracleArgs orc;
    auto* q = app.add_subcommand("oracle", "moment formulas vs time-domain quadrature");
    q->add_option("--tones", orc.tones);
    q->add_option("--trials", orc.trials);
    q->add_option("--seed", orc.seed);

    ChannelGenArgs gen;
    auto* g = app.add_subcommand("channel-gen", "write one channel realization as JSON");
    g->add_option("--tx-antennas,-M", gen.tx);
    g->add_option("--tones,-N", gen.tones);
    g->add_option("--rx-antennas,-Q", gen.rx);
    g->add_option("--seed", gen.seed);
    g->add_option("--realization", gen.realization);
    g->add_option("--center-hz", gen.center_hz);
    g->add_option("--bandwidth-hz", gen.bandwidth_hz);
    g->add_flag("--flat", gen.flat, "single-tap channel");
    g->add_option("--out,-o", gen.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*s) return run_simulate(sim);
        if (*o) return run_optimize(opt);
        if (*q) return run_oracle(orc);
        if (*g) return run_channel_gen(gen);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return kUsage;
}
