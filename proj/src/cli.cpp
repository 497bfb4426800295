#include "allee/cli.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "allee/bounds.hpp"
#include "allee/csv.hpp"
#include "allee/error.hpp"
#include "allee/maps.hpp"
#include "allee/montecarlo.hpp"
#include "allee/noise.hpp"
#include "allee/thresholds.hpp"
#include "allee/trajectory.hpp"

namespace allee {

namespace {

const std::vector<std::string> kCommands{"analyze", "simulate", "bounds", "montecarlo", "sweep"};

std::unique_ptr<CLI::App> build_app(RunConfig& cfg) {
    auto app = std::make_unique<CLI::App>("Truncated stochastic difference equations with Allee effect",
                                          "allee-dyn");
    app->set_config("--config", "", "key = value file; command-line flags take precedence");
    app->add_option("command", cfg.command, "analyze | simulate | bounds | montecarlo | sweep")
        ->required()
        ->check(CLI::IsMember(kCommands));
    app->add_option("--map", cfg.map, "built-in map id, e.g. example-6-1 or boukal-burgman:4:2:2");
    app->add_option("--map-file", cfg.map_file, "piecewise map definition file");
    app->add_option("--noise", cfg.noise, "uniform | tnormal:<sigma> | triangular | table:<file>");
    app->add_option("--a", cfg.a, "left end of the persistence interval");
    app->add_option("--H", cfg.H, "right end of the persistence interval");
    app->add_option("--b1", cfg.b1, "point of the Allee zone for the trap condition");
    app->add_option("--l", cfg.l, "noise amplitude");
    app->add_option("--x0", cfg.x0, "initial value");
    app->add_option("--x0-grid", cfg.x0_grid, "initial values lo:hi:step");
    app->add_option("--l-grid", cfg.l_grid, "amplitudes lo:hi:step");
    app->add_option("--trials", cfg.trials, "runs per point");
    app->add_option("--n-max", cfg.n_max, "step budget per run");
    app->add_option("--seed", cfg.seed, "base seed");
    app->add_option("--alpha-frac", cfg.alpha_frac, "free parameter of the escape bound, in (0, 1)");
    app->add_flag("--tail", cfg.tail, "montecarlo: run every trial to n-max and report the tail mean");
    app->add_option("--out", cfg.out, "CSV output path (default stdout)");
    return app;
}

std::vector<std::string> reversed(const std::vector<std::string>& args) { return {args.rbegin(), args.rend()}; }

struct Builtin {
    double a;
    double H;
};

std::optional<Builtin> default_window(std::string_view id) {
    const auto base = id.substr(0, id.find(':'));
    static const std::map<std::string_view, Builtin> table{
        {"example-6-1", {1.8, 6.5}},        {"boukal-hop", {1.8, 6.5}},
        {"example-6-2", {0.2, 1.8}},        {"boukal-burgman", {0.2, 1.8}},
        {"demo-4-3", {5.2, 7.0}},           {"demo-4-4", {12.3, 14.5}},
        {"sine", {1.1 * std::numbers::pi, 2.9 * std::numbers::pi}},
    };
    const auto it = table.find(base);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

// Validated inputs shared by every command.
struct Setup {
    MapSpec map;
    NoiseSpec noise;
    double a;
    double H;
};

Setup prepare(const RunConfig& cfg) {
    MapSpec map = cfg.map_file.empty() ? MapSpec::builtin(cfg.map) : MapSpec::from_file(cfg.map_file);
    NoiseSpec noise = NoiseSpec::parse(cfg.noise);
    const auto def = cfg.map_file.empty() ? default_window(cfg.map) : std::nullopt;
    if ((!cfg.a || !cfg.H) && !def) throw PreconditionError("--a and --H are required for this map");
    const double a = cfg.a ? *cfg.a : def->a;
    const double H = cfg.H ? *cfg.H : def->H;
    if (!(a > 0.0 && a < H)) throw PreconditionError(fmt::format("need 0 < a < H (a = {}, H = {})", a, H));
    if (cfg.l && !(*cfg.l >= 0.0)) throw PreconditionError(fmt::format("l = {} must be non-negative", *cfg.l));
    if (cfg.trials && *cfg.trials < 1) throw PreconditionError("trials must be at least 1");
    if (cfg.n_max < 0) throw PreconditionError("n-max must be non-negative");
    return {std::move(map), std::move(noise), a, H};
}

double require_l(const RunConfig& cfg) {
    if (!cfg.l) throw PreconditionError(fmt::format("{} needs --l", cfg.command));
    return *cfg.l;
}

std::vector<double> x0_values(const RunConfig& cfg) {
    if (!cfg.x0_grid.empty()) return parse_grid(cfg.x0_grid);
    if (cfg.x0) return {*cfg.x0};
    throw PreconditionError(fmt::format("{} needs --x0 or --x0-grid", cfg.command));
}

std::vector<double> l_values(const RunConfig& cfg) {
    if (!cfg.l_grid.empty()) return parse_grid(cfg.l_grid);
    return {require_l(cfg)};
}

void check_x0(const Setup& s, double x0) {
    if (!(x0 >= 0.0 && x0 <= s.H)) throw DomainError(fmt::format("x0 = {} outside [0, H] = [0, {}]", x0, s.H));
}

// Routes CSV to --out when given, otherwise to `out`.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (path.empty()) return;
        file_.open(path, std::ios::binary);
        if (!file_) throw PreconditionError(fmt::format("cannot write '{}'", path));
        stream_ = &file_;
    }
    std::ostream& get() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

std::string fmt_opt(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

int cmd_analyze(const RunConfig& cfg, std::ostream& out) {
    const auto s = prepare(cfg);
    const auto st = structural_thresholds(s.map, s.a, s.H);
    out << "map=" << s.map.name() << '\n'
        << "noise=" << s.noise.describe() << '\n'
        << "a=" << format_number(s.a) << '\n'
        << "H=" << format_number(s.H) << '\n'
        << "b=" << format_number(st.b) << '\n'
        << "F_b=" << format_number(st.F_b) << '\n'
        << "F_a=" << format_number(st.F_a) << '\n'
        << "fH=" << format_number(st.fH) << '\n'
        << "fH_argmax=" << format_number(st.fH_argmax) << '\n'
        << "f_at_H=" << format_number(st.f_H) << '\n'
        << "l_max_invariance=" << format_number(st.l_max_invariance) << '\n'
        << "l_escape_threshold=" << format_number(st.l_escape_threshold) << '\n'
        << "unconditional_window=" << (st.unconditional_window() ? "true" : "false") << '\n';
    std::vector<std::string> roots;
    for (double r : fixed_points(s.map, 1e-9 * s.H, s.H)) roots.push_back(format_number(r));
    out << "sign_changes_of_F=" << fmt::format("{}", fmt::join(roots, ";")) << '\n';
    out << "alpha=" << format_number(s.noise.mean_positive_part()) << '\n';

    const auto report = validate_assumptions(s.map, StructuralParams{s.a, s.H, cfg.b1, {}});
    for (const auto& c : report.checks)
        out << "check[" << c.name << "]=" << (c.passed ? "pass" : "fail") << " margin=" << format_number(c.margin)
            << (c.witness ? " at=" + format_number(*c.witness) : "") << '\n';

    if (cfg.l) {
        const double l = *cfg.l;
        const auto r = analyze(s.map, s.a, s.H, l);
        out << "l=" << format_number(l) << '\n'
            << "regime=" << (r.regime == NoiseRegime::mixed ? "mixed" : "unconditional") << '\n'
            << "invariance_holds=" << (r.invariance_holds ? "true" : "false") << '\n'
            << "u_l=" << format_number(r.u_l) << '\n'
            << "v_l=" << fmt_opt(r.v_l) << '\n'
            << "alpha_l=" << fmt_opt(r.alpha_l) << '\n'
            << "beta_l=" << fmt_opt(r.beta_l) << '\n'
            << "flbound=" << (r.flbound_holds ? (*r.flbound_holds ? "true" : "false") : "NA") << '\n'
            << "F_monotone_on_core=" << (r.F_monotone_on_core ? "true" : "false") << '\n'
            << "kappa=" << fmt_opt(r.kappa) << '\n'
            << "ill_conditioned=" << (r.ill_conditioned ? "true" : "false") << '\n'
            << "min_expectation=" << format_number(min_expectation(s.noise, l)) << '\n';
        if (cfg.b1) {
            const double margin = *cfg.b1 - s.map.f(*cfg.b1);
            out << "trap_margin_b1=" << format_number(margin) << '\n'
                << "trap_holds=" << (l <= margin ? "true" : "false") << '\n';
        }
    }

    if (!cfg.out.empty()) {
        Sink sink(cfg.out, out);
        CsvWriter csv(sink.get(), {"x", "f", "F"});
        constexpr int points = 1000;
        for (int i = 0; i <= points; ++i) {
            const double x = s.H * i / points;
            const double fx = s.map.f(x);
            csv.row({format_number(x), format_number(fx), format_number(fx - x)});
        }
    }
    return 0;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto s = prepare(cfg);
    const double l = require_l(cfg);
    const auto xs = x0_values(cfg);
    for (double x0 : xs) check_x0(s, x0);

    Classifier classifier;
    try {
        classifier = Classifier::from(analyze(s.map, s.a, s.H, l));
    } catch (const PreconditionError& e) {
        err << "note: classification disabled (" << e.what() << ")\n";
    }

    SimOptions opt;
    opt.n_max = cfg.n_max;
    const std::int64_t runs = cfg.trials.value_or(1);

    Sink sink(cfg.out, out);
    CsvWriter csv(sink.get(), {"run_id", "n", "x_n"});
    std::uint64_t run_id = 0;
    for (double x0 : xs) {
        for (std::int64_t k = 0; k < runs; ++k, ++run_id) {
            const auto r = simulate(s.map, s.noise, l, x0, classifier, opt, derive_stream(cfg.seed, run_id));
            const auto id = std::to_string(run_id);
            for (const auto& p : r.path) csv.row({id, std::to_string(p.n), format_number(p.x)});
            err << fmt::format("run_id={} x0={} outcome={} hit_step={} seed={} stream={} steps={}\n", run_id,
                               format_number(x0), to_string(r.outcome),
                               r.hit_step ? std::to_string(*r.hit_step) : "NA", r.seed, r.stream, r.steps);
        }
    }
    return 0;
}

template <class Fn>
BoundReport try_bound(BoundMethod method, double x0, double l, Fn&& fn) {
    try {
        return fn();
    } catch (const PreconditionError&) {
    } catch (const DomainError&) {
    } catch (const RootNotFound&) {
    }
    BoundReport r{};
    r.x0 = x0;
    r.l = l;
    r.method = method;
    return r;
}

std::vector<BoundReport> all_bounds(const Setup& s, const RegimeAnalysis& regime, double x0, double alpha_frac) {
    const double l = regime.l;
    std::vector<BoundReport> rows;
    rows.push_back(try_bound(BoundMethod::basic, x0, l, [&] { return basic_bounds(s.map, s.noise, regime, x0); }));
    rows.push_back(
        try_bound(BoundMethod::improved, x0, l, [&] { return improved_bounds(s.map, s.noise, regime, x0); }));
    for (auto m : {BoundMethod::explicit_h, BoundMethod::explicit_h_kappa, BoundMethod::explicit_uniform})
        rows.push_back(try_bound(m, x0, l, [&] { return explicit_bounds(s.map, s.noise, regime, x0, m); }));
    rows.push_back(
        try_bound(BoundMethod::boundary, x0, l, [&] { return boundary_bounds(s.map, s.noise, regime, x0); }));
    rows.push_back(try_bound(BoundMethod::escape, x0, l, [&] {
        if (!(x0 > 0.0 && x0 <= s.a)) throw DomainError("escape bound covers x0 in (0, a]");
        auto r = escape_bound(s.map, s.noise, regime.thresholds, l, alpha_frac);
        r.x0 = x0;
        return r;
    }));
    return rows;
}

int cmd_bounds(const RunConfig& cfg, std::ostream& out) {
    const auto s = prepare(cfg);
    const auto xs = x0_values(cfg);
    for (double x0 : xs) check_x0(s, x0);
    const auto ls = l_values(cfg);
    Sink sink(cfg.out, out);
    CsvWriter csv(sink.get(), {"x0", "l", "method", "P_p_bound", "P_e_bound", "K1", "K2"});
    for (double l : ls) {
        const auto regime = analyze(s.map, s.a, s.H, l);
        for (double x0 : xs)
            for (const auto& r : all_bounds(s, regime, x0, cfg.alpha_frac))
                csv.row({format_number(x0), format_number(l), std::string(to_string(r.method)),
                         format_number(r.persistence_bound), format_number(r.lowdensity_bound), format_number(r.K1),
                         format_number(r.K2)});
    }
    return 0;
}

const std::vector<std::string> kMcColumns{
    "x0",           "l",          "trials",          "n_max",           "seed",        "n_persistent",
    "n_low",        "n_undecided", "p_hat_persist",  "ci_persist_low",  "ci_persist_high",
    "p_hat_low",    "ci_low_low", "ci_low_high",     "mean_tail",       "absorption_failures",
    "verdict"};

Verdict judge(const Setup& s, const RegimeAnalysis& regime, const McEstimate& e, double alpha_frac,
              std::ostream& err) {
    const auto reports = all_bounds(s, regime, e.x0, alpha_frac);
    const auto verdicts = verify_bounds(e, reports);
    Verdict v = combine(verdicts);
    for (const auto& bv : verdicts)
        if (bv.verdict == Verdict::fail) err << "  " << to_string(bv.method) << ": " << bv.detail << '\n';
    if (e.absorption_failures && *e.absorption_failures > 0) {
        err << "  absorption: " << *e.absorption_failures << " trials missed their trap\n";
        v = Verdict::fail;
    }
    return v;
}

std::vector<std::string> mc_row(const McEstimate& e, Verdict v) {
    return {format_number(e.x0),
            format_number(e.l),
            std::to_string(e.trials),
            std::to_string(e.n_max),
            std::to_string(e.base_seed),
            std::to_string(e.n_persistent),
            std::to_string(e.n_low),
            std::to_string(e.n_undecided),
            format_number(e.p_hat_persist),
            format_number(e.ci_persist.low),
            format_number(e.ci_persist.high),
            format_number(e.p_hat_low),
            format_number(e.ci_low.low),
            format_number(e.ci_low.high),
            format_number(e.mean_tail),
            format_number(e.absorption_failures),
            to_string(v)};
}

void summarize(const McEstimate& e, Verdict v, std::ostream& err) {
    err << fmt::format(
        "x0={} l={} trials={} persistent={} low_density={} undecided={} P_p~{} [{}, {}] P_e~{} [{}, {}] {}\n",
        format_number(e.x0), format_number(e.l), e.trials, e.n_persistent, e.n_low, e.n_undecided,
        format_number(e.p_hat_persist), format_number(e.ci_persist.low), format_number(e.ci_persist.high),
        format_number(e.p_hat_low), format_number(e.ci_low.low), format_number(e.ci_low.high), to_string(v));
}

int run_grid(const RunConfig& cfg, std::ostream& out, std::ostream& err, bool derive_rows) {
    const auto s = prepare(cfg);
    const auto xs = x0_values(cfg);
    for (double x0 : xs) check_x0(s, x0);
    const auto ls = l_values(cfg);

    Sink sink(cfg.out, out);
    CsvWriter csv(sink.get(), kMcColumns);
    bool any_fail = false;
    std::uint64_t row = 0;
    for (double l : ls) {
        const auto regime = analyze(s.map, s.a, s.H, l);
        for (double x0 : xs) {
            McConfig mc;
            mc.x0 = x0;
            mc.trials = cfg.trials.value_or(1000);
            mc.n_max = cfg.n_max;
            mc.base_seed = derive_rows ? derive_seed(cfg.seed, row) : cfg.seed;
            mc.track_tail = cfg.tail;
            mc.check_absorption = !cfg.tail;
            ++row;
            const auto e = estimate(s.map, s.noise, regime, mc);
            Verdict v = judge(s, regime, e, cfg.alpha_frac, err);
            if (cfg.tail && e.mean_tail && e.tail_std) {
                const double se = *e.tail_std / std::sqrt(static_cast<double>(e.trials));
                if (*e.mean_tail < min_expectation(s.noise, l) - 3.0 * se) {
                    err << "  tail mean below l*alpha\n";
                    v = Verdict::fail;
                }
            }
            any_fail = any_fail || v == Verdict::fail;
            csv.row(mc_row(e, v));
            summarize(e, v, err);
        }
    }
    return any_fail ? 2 : 0;
}

}  // namespace

std::string RunConfig::to_config_text() const {
    std::string t = fmt::format("# command: {}\n", command);
    auto line = [&t](std::string_view key, const std::string& value) {
        t += fmt::format("{} = \"{}\"\n", key, value);
    };
    auto num = [&](std::string_view key, const std::optional<double>& v) {
        if (v) t += fmt::format("{} = {}\n", key, *v);
    };
    line("map", map);
    if (!map_file.empty()) line("map-file", map_file);
    line("noise", noise);
    num("a", a);
    num("H", H);
    num("b1", b1);
    num("l", l);
    num("x0", x0);
    if (!x0_grid.empty()) line("x0-grid", x0_grid);
    if (!l_grid.empty()) line("l-grid", l_grid);
    if (trials) t += fmt::format("trials = {}\n", *trials);
    t += fmt::format("n-max = {}\n", n_max);
    t += fmt::format("seed = {}\n", seed);
    t += fmt::format("alpha-frac = {}\n", alpha_frac);
    t += fmt::format("tail = {}\n", tail);
    if (!out.empty()) line("out", out);
    return t;
}

RunConfig parse_args(const std::vector<std::string>& args) {
    RunConfig cfg;
    auto app = build_app(cfg);
    auto rev = reversed(args);
    try {
        app->parse(rev);
    } catch (const CLI::ParseError& e) {
        throw ParseError(e.what());
    }
    return cfg;
}

std::vector<double> parse_grid(std::string_view text) {
    auto number = [&](std::string_view part) {
        const std::string s(part);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size() || !std::isfinite(v))
            throw ParseError(fmt::format("grid '{}': bad number '{}'", text, part));
        return v;
    };
    const auto c1 = text.find(':');
    if (c1 == std::string_view::npos) return {number(text)};
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string_view::npos || text.find(':', c2 + 1) != std::string_view::npos)
        throw ParseError(fmt::format("grid '{}': expected lo:hi:step", text));
    const double lo = number(text.substr(0, c1));
    const double hi = number(text.substr(c1 + 1, c2 - c1 - 1));
    const double step = number(text.substr(c2 + 1));
    if (!(step > 0.0)) throw ParseError(fmt::format("grid '{}': step must be positive", text));
    if (hi < lo) throw ParseError(fmt::format("grid '{}': hi < lo", text));
    const double count = std::floor((hi - lo) / step + 1e-9);
    if (count > 1e6) throw ParseError(fmt::format("grid '{}': too many points", text));
    std::vector<double> xs;
    for (int i = 0; i <= static_cast<int>(count); ++i) xs.push_back(lo + step * i);
    return xs;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    auto app = build_app(cfg);
    auto rev = reversed(args);
    try {
        app->parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app->help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    try {
        if (cfg.command == "analyze") return cmd_analyze(cfg, out);
        if (cfg.command == "simulate") return cmd_simulate(cfg, out, err);
        if (cfg.command == "bounds") return cmd_bounds(cfg, out);
        if (cfg.command == "montecarlo") return run_grid(cfg, out, err, false);
        if (cfg.command == "sweep") return run_grid(cfg, out, err, true);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    err << "error: unknown command '" << cfg.command << "'\n";
    return 1;
}

}  // namespace allee
