// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "allee/bounds.hpp"
#include "allee/cli.hpp"
#include "allee/maps.hpp"
#include "allee/montecarlo.hpp"
#include "allee/noise.hpp"
#include "allee/thresholds.hpp"
#include "allee/trajectory.hpp"

using namespace allee;

namespace {

struct Check {
    bool pass = true;
    std::vector<std::string> notes;

    void expect(bool ok, std::string what) {
        if (!ok) pass = false;
        notes.push_back(fmt::format("{}{}", ok ? "" : "MISS ", what));
    }
    void near(std::string_view name, double got, double want, double tol) {
        expect(std::abs(got - want) <= tol, fmt::format("{}={:.6g} (want {} +- {})", name, got, want, tol));
    }
};

int failures = 0;

void criterion(int id, std::string_view title, double time_limit, const std::function<void(Check&)>& body) {
    Check o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.expect(false, fmt::format("exception: {}", e.what()));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (time_limit > 0) o.expect(secs < time_limit, fmt::format("runtime {:.2f} s < {} s", secs, time_limit));
    if (!o.pass) ++failures;
    std::cout << fmt::format("criterion {:2d} {}: {} ({:.2f} s)\n", id, o.pass ? "PASS" : "FAIL", title, secs);
    for (const auto& n : o.notes) std::cout << "    " << n << '\n';
    std::cout.flush();
}

const NoiseSpec uni = NoiseSpec::uniform();

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

int main() {
    const MapSpec hop = MapSpec::builtin("example-6-1");
    const MapSpec burgman = MapSpec::builtin("example-6-2");

    criterion(1, "thresholds of example-6-1", 1.0, [&](Check& o) {
        const auto s = structural_thresholds(hop, 1.8, 6.5);
        o.near("b", s.b, 0.907, 0.005);
        o.near("F(b)", s.F_b, -0.3384, 0.001);
        o.near("F(a)", s.F_a, 0.293, 0.001);
        o.near("fH", s.fH, 6.317, 0.001);
        o.near("argmax", s.fH_argmax, std::sqrt(11.0), 0.001);
        const auto r = analyze(hop, 1.8, 6.5, 0.2);
        o.near("u_l", r.u_l, 1.74, 0.01);
        o.near("v_l", r.v_l.value_or(NAN), 0.361, 0.005);
    });

    criterion(2, "thresholds of example-6-2", 1.0, [&](Check& o) {
        const auto fp = fixed_points(burgman, 1e-9, 1.8);
        o.expect(fp.size() == 2, fmt::format("{} sign changes of F on (0, H]", fp.size()));
        if (fp.size() == 2) {
            o.near("c", fp[0], 0.0833, 0.0005);
            o.near("d", fp[1], 1.2037, 0.001);
        }
        const auto s = structural_thresholds(burgman, 0.2, 1.8);
        o.near("f_m", s.fH, 1.3688, 0.001);
        o.near("argmax", s.fH_argmax, 0.8508, 0.001);
        o.near("b", s.b, 0.0392, 0.0005);
        o.near("F(b)", s.F_b, -0.0186, 0.0005);
        o.near("F(a)", s.F_a, 0.16, 0.005);
        o.near("f(H)", s.f_H, 0.6886, 0.001);
    });

    criterion(3, "regime switch of demo-4-4", 0, [&](Check& o) {
        const MapSpec m = MapSpec::builtin("demo-4-4");
        const auto r1 = analyze(m, 12.3, 14.5, 0.1);
        const auto r2 = analyze(m, 12.3, 14.5, 0.05);
        o.expect(r1.flbound_holds.value_or(false), "flbound holds at l = 0.1");
        o.expect(!r2.flbound_holds.value_or(true), "flbound fails at l = 0.05");
        const double xs[] = {3, 5, 7, 9, 11};
        const double want[] = {1.0 / 12, -1.0 / 20, 1.0 / 28, -1.0 / 36, 1.0 / 44};
        for (int i = 0; i < 5; ++i) o.near(fmt::format("F({})", xs[i]), m.F(xs[i]), want[i], 1e-9);
    });

    criterion(4, "ordering beta_l < alpha_l on demo-4-3", 0, [&](Check& o) {
        const MapSpec m = MapSpec::builtin("demo-4-3");
        const double b = find_b(m, 5.2);
        const auto ab = compute_alpha_beta(m, 5.2, b, 0.19);
        o.expect(ab.beta_l < ab.alpha_l, fmt::format("beta_l = {:.6g} < alpha_l = {:.6g}", ab.beta_l, ab.alpha_l));
        o.expect(ab.beta_l > 1.5 && ab.beta_l < 2.5, "beta_l in (1.5, 2.5)");
        o.expect(ab.alpha_l > 3.5 && ab.alpha_l < 5.2, "alpha_l in (3.5, 5.2)");
    });

    const auto core = analyze(hop, 1.8, 6.5, 0.2);

    criterion(5, "almost-sure zones are pure", 60.0, [&](Check& o) {
        McConfig c;
        c.trials = 10000;
        c.n_max = 100000;
        c.base_seed = 501;
        c.x0 = 0.2;
        const auto low = estimate(hop, uni, core, c);
        o.expect(low.n_low == c.trials && low.n_undecided == 0,
                 fmt::format("x0 = 0.2: low_density {} / {}, undecided {}", low.n_low, c.trials, low.n_undecided));
        c.x0 = 3.0;
        const auto high = estimate(hop, uni, core, c);
        o.expect(high.n_persistent == c.trials, fmt::format("x0 = 3: persistent {} / {}", high.n_persistent, c.trials));
    });

    criterion(6, "mixed zone of example-6-1", 0, [&](Check& o) {
        std::vector<McEstimate> rows;
        for (double x0 : {1.4, 1.5, 1.6, 1.7}) {
            McConfig c;
            c.x0 = x0;
            c.trials = 10000;
            c.n_max = 100000;
            c.base_seed = derive_seed(601, rows.size());
            const auto e = estimate(hop, uni, core, c);
            rows.push_back(e);
            o.expect(e.n_persistent > 0 && e.n_low > 0,
                     fmt::format("x0 = {}: persistent {}, low {}, undecided {}", x0, e.n_persistent, e.n_low,
                                 e.n_undecided));
            const std::vector<BoundReport> reports{
                basic_bounds(hop, uni, core, x0), improved_bounds(hop, uni, core, x0),
                explicit_bounds(hop, uni, core, x0, BoundMethod::explicit_uniform)};
            for (const auto& v : verify_bounds(e, reports)) {
                o.expect(v.verdict == Verdict::pass,
                         fmt::format("x0 = {} {}: {} {}", x0, to_string(v.method), to_string(v.verdict), v.detail));
            }
        }
        o.expect(persistence_nondecreasing(rows), "P_p non-decreasing across x0 at 99% CI separation");
    });

    criterion(7, "Allee-effect erasure on example-6-2", 120.0, [&](Check& o) {
        McConfig c;
        c.x0 = 0.01;
        c.trials = 1000;
        c.n_max = 100000;
        c.check_absorption = true;
        c.base_seed = 701;
        const auto hi = estimate(burgman, uni, analyze(burgman, 0.2, 1.8, 0.04), c);
        o.expect(hi.n_persistent >= 990 && hi.n_low == 0 && hi.absorption_failures.value_or(1) == 0,
                 fmt::format("l = 0.04: persistent {}, low {}, absorption failures {}", hi.n_persistent, hi.n_low,
                             hi.absorption_failures.value_or(-1)));
        c.base_seed = 702;
        const auto lo = estimate(burgman, uni, analyze(burgman, 0.2, 1.8, 0.01), c);
        o.expect(lo.n_low >= 990 && lo.n_persistent == 0,
                 fmt::format("l = 0.01: low {}, persistent {}", lo.n_low, lo.n_persistent));
    });

    criterion(8, "pathwise invariance suites", 0, [&](Check& o) {
        constexpr int trials = 1000;
        constexpr std::int64_t steps = 10000;
        SimOptions opt;
        opt.n_max = steps;
        opt.full_path = true;
        opt.stop_on_classification = false;
        std::mt19937_64 gen(801);

        const double b1 = find_b(hop, 1.8);
        int trap_bad = 0;
        std::uniform_real_distribution<double> u_trap(0.0, b1);
        for (int t = 0; t < trials; ++t) {
            const double x0 = u_trap(gen);
            const auto r = simulate(hop, uni, 0.2, x0, Classifier{}, opt, derive_stream(gen(), 0));
            if (!check_trap_below_b1(hop, 0.2, b1, x0, r.path)) ++trap_bad;
        }
        o.expect(trap_bad == 0, fmt::format("trap below b1 (example-6-1, l = 0.2): {} violations", trap_bad));

        struct Config {
            const char* label;
            const MapSpec* map;
            double a, H, l;
        };
        const MapSpec sine = MapSpec::builtin("sine");
        const double pi = std::numbers::pi;
        for (const auto& c : {Config{"example-6-2 (0.2, 1.8), l = 0.04", &burgman, 0.2, 1.8, 0.04},
                              Config{"example-6-1 (1.65, 6.55), l = 0.07", &hop, 1.65, 6.55, 0.07},
                              Config{"sine window 1, l = 0.3", &sine, 1.1 * pi, 2.9 * pi, 0.3},
                              Config{"sine window 2, l = 0.3", &sine, 3.1 * pi, 4.9 * pi, 0.3}}) {
            int bad = 0;
            std::uniform_real_distribution<double> u(c.a, c.H);
            for (int t = 0; t < trials; ++t) {
                double x0 = u(gen);
                if (!(x0 > c.a)) x0 = std::nextafter(c.a, c.H);
                const auto r = simulate(*c.map, uni, c.l, x0, Classifier{}, opt, derive_stream(gen(), 0));
                if (!check_invariance_aH(*c.map, c.l, c.a, c.H, x0, r.path)) ++bad;
            }
            o.expect(bad == 0, fmt::format("invariance {}: {} violations", c.label, bad));
        }
    });

    criterion(9, "expectation floor", 0, [&](Check& o) {
        const auto chk = verify_expectation(hop, uni, 0.2, 0.1, 1000, 100000, 901);
        o.expect(chk.verdict == Verdict::pass, fmt::format("tail mean {:.5f} >= {} - 3 * {:.2e}", chk.mean_tail,
                                                           chk.floor, chk.standard_error));
    });

    criterion(10, "bound dominance chain", 0, [&](Check& o) {
        int bad = 0;
        for (int k = 1; k <= 20; ++k) {
            const double x0 = *core.v_l + (core.u_l - *core.v_l) * k / 21.0;
            const auto basic = basic_bounds(hop, uni, core, x0);
            const auto imp = improved_bounds(hop, uni, core, x0);
            for (auto m : {BoundMethod::explicit_h, BoundMethod::explicit_h_kappa, BoundMethod::explicit_uniform}) {
                const auto ex = explicit_bounds(hop, uni, core, x0, m);
                if (*ex.persistence_bound > *imp.persistence_bound * (1 + 1e-12) ||
                    *ex.lowdensity_bound > *imp.lowdensity_bound * (1 + 1e-12))
                    ++bad;
            }
            if (*basic.persistence_bound > *imp.persistence_bound * (1 + 1e-12) ||
                *basic.lowdensity_bound > *imp.lowdensity_bound * (1 + 1e-12))
                ++bad;
            for (const auto* r : {&basic, &imp})
                for (double p : {*r->persistence_bound, *r->lowdensity_bound})
                    if (!(p >= 0.0 && p <= 1.0)) ++bad;
        }
        o.expect(bad == 0, fmt::format("20 points in (v_l, u_l): {} ordering or range violations", bad));
        const double x0 = core.u_l - 1e-4;
        const auto edge = boundary_bounds(hop, uni, core, x0);
        o.expect(*edge.persistence_bound > 0.9,
                 fmt::format("boundary bound at u_l - 1e-4: {:.6f} > 0.9 (improved bound there: {:.6f})",
                             *edge.persistence_bound, *improved_bounds(hop, uni, core, x0).persistence_bound));
    });

    criterion(11, "byte-identical CSV at 1, 2 and 8 threads", 0, [&](Check& o) {
        const auto dir = std::filesystem::temp_directory_path() / "allee_acceptance";
        std::filesystem::create_directories(dir);
        const std::vector<std::vector<std::string>> commands{
            {"analyze", "--l", "0.2"},
            {"simulate", "--l", "0.2", "--x0", "1.5", "--trials", "5", "--seed", "11"},
            {"bounds", "--l", "0.2", "--x0-grid", "1.4:1.7:0.1"},
            {"montecarlo", "--l", "0.2", "--x0", "1.5", "--trials", "3000", "--seed", "12"},
            {"sweep", "--l", "0.2", "--x0-grid", "1.4:1.7:0.1", "--trials", "1000", "--seed", "13"},
            {"montecarlo", "--map", "example-6-2", "--l", "0.04", "--x0", "0.01", "--trials", "500", "--tail",
             "--n-max", "5000"},
        };
        for (std::size_t i = 0; i < commands.size(); ++i) {
            std::string reference;
            bool same = true;
            int runs = 0;
            for (const char* threads : {"1", "2", "8", "8"}) {
                setenv("ALLEE_DYN_THREADS", threads, 1);
                auto args = commands[i];
                const auto path = dir / fmt::format("cmd{}_{}_{}.csv", i, threads, runs++);
                args.insert(args.end(), {"--out", path.string()});
                std::ostringstream out, err;
                const int code = run_cli(args, out, err);
                const auto bytes = slurp(path);
                if (code == 1 || bytes.empty()) same = false;
                if (reference.empty()) reference = bytes;
                else if (bytes != reference) same = false;
            }
            unsetenv("ALLEE_DYN_THREADS");
            o.expect(same, fmt::format("{}: identical output across thread counts and reruns", commands[i][0]));
        }
    });

    std::cout << fmt::format("{} of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
