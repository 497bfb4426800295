#include "allee/trajectory.hpp"

#include <cmath>
#include <deque>

#include <fmt/format.h>

#include "allee/error.hpp"

namespace allee {

const char* to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::persistent: return "persistent";
        case Outcome::low_density: return "low_density";
        case Outcome::undecided: return "undecided";
    }
    return "?";
}

namespace {

Outcome classify(const Classifier& c, double x) {
    if (c.upper && x > *c.upper) return Outcome::persistent;
    if (c.lower && x < *c.lower) return Outcome::low_density;
    return Outcome::undecided;
}

}  // namespace

TrajectoryResult simulate(const MapSpec& map, const NoiseSpec& noise, double l, double x0,
                          const Classifier& classifier, const SimOptions& options, RngState rng) {
    if (!std::isfinite(x0) || x0 < 0.0) throw DomainError(fmt::format("x0 = {} must be finite and >= 0", x0));
    if (!std::isfinite(l) || l < 0.0) throw DomainError(fmt::format("l = {} must be finite and >= 0", l));
    if (options.n_max < 0) throw PreconditionError("n_max must be non-negative");

    TrajectoryResult r;
    r.seed = rng.seed();
    r.stream = rng.stream();
    r.n_max = options.n_max;

    const auto window = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::floor(options.tail_fraction * static_cast<double>(options.n_max))));
    const std::int64_t tail_start = options.n_max - window + 1;
    double tail_sum = 0.0;

    std::deque<PathPoint> recent;
    const auto thin = std::max<std::int64_t>(1, options.thin);
    auto keep = [&](std::int64_t n) {
        if (options.full_path || n <= options.full_prefix || n % thin == 0) return true;
        return r.hit_step && n <= *r.hit_step + options.context;
    };
    auto record = [&](std::int64_t n, double x) {
        if (!options.record_path) return;
        if (keep(n)) {
            r.path.push_back({n, x});
        } else if (!r.hit_step && options.context > 0) {
            recent.push_back({n, x});
            if (static_cast<std::int64_t>(recent.size()) > options.context) recent.pop_front();
        }
    };
    auto on_hit = [&](std::int64_t n, Outcome o) {
        r.outcome = o;
        r.hit_step = n;
        if (!options.record_path) return;
        r.path.insert(r.path.end(), recent.begin(), recent.end());
        recent.clear();
    };

    double x = x0;
    std::int64_t n = 0;
    record(0, x);
    if (const auto o = classify(classifier, x); o != Outcome::undecided) {
        r.outcome = o;
        r.hit_step = 0;
    }
    if (!(r.hit_step && options.stop_on_classification)) {
        for (n = 1; n <= options.n_max; ++n) {
            x = step(map, x, noise.sample(rng), l);
            if (n >= tail_start) tail_sum += x;
            if (!r.hit_step) {
                if (const auto o = classify(classifier, x); o != Outcome::undecided) on_hit(n, o);
            }
            record(n, x);
            if (r.hit_step && *r.hit_step == n && options.stop_on_classification) break;
        }
        if (n > options.n_max) n = options.n_max;
    }

    r.steps = n;
    r.final_x = x;
    if (r.steps == options.n_max) r.tail_mean = tail_sum / static_cast<double>(window);
    if (options.record_path) {
        if (r.path.empty() || r.path.back().n != n) r.path.push_back({n, x});
        std::stable_sort(r.path.begin(), r.path.end(),
                         [](const PathPoint& p, const PathPoint& q) { return p.n < q.n; });
        r.path.erase(std::unique(r.path.begin(), r.path.end(),
                                 [](const PathPoint& p, const PathPoint& q) { return p.n == q.n; }),
                     r.path.end());
    }
    r.rng = rng;
    return r;
}

TrajectoryResult simulate(const MapSpec& map, const NoiseSpec& noise, const RegimeAnalysis& regime,
                          double x0, std::int64_t n_max, std::uint64_t seed, std::uint64_t stream) {
    if (!(x0 >= 0.0 && x0 <= regime.H()))
        throw DomainError(fmt::format("x0 = {} outside [0, H] = [0, {}]", x0, regime.H()));
    SimOptions opt;
    opt.n_max = n_max;
    return simulate(map, noise, regime.l, x0, Classifier::from(regime), opt, derive_stream(seed, stream));
}

bool check_trap_below_b1(const MapSpec& map, double l, double b1, double x0,
                         std::span<const PathPoint> path) {
    const double margin = b1 - map.f(b1);
    if (!(l <= margin))
        throw PreconditionError(fmt::format("trap: need l <= b1 - f(b1) = {} (l = {})", margin, l));
    if (!(x0 >= 0.0 && x0 <= b1)) throw PreconditionError(fmt::format("trap: x0 = {} outside [0, {}]", x0, b1));
    return std::all_of(path.begin(), path.end(), [b1](const PathPoint& p) { return p.x >= 0.0 && p.x <= b1; });
}

bool check_invariance_aH(const MapSpec& map, double l, double a, double H, double x0,
                         std::span<const PathPoint> path) {
    const double limit = std::min(H - compute_fH(map, H).value, map.F(a));
    if (!(l < limit))
        throw PreconditionError(fmt::format("invariance: need l < min{{H - fH, F(a)}} = {} (l = {})", limit, l));
    if (!(x0 > a && x0 < H)) throw PreconditionError(fmt::format("invariance: x0 = {} outside ({}, {})", x0, a, H));
    return std::all_of(path.begin(), path.end(), [a, H](const PathPoint& p) { return p.x > a && p.x < H; });
}

TrajectoryResult check_escape_all(const MapSpec& map, const NoiseSpec& noise, double l, double a1,
                                  double H1, double x0, std::int64_t n_max, std::uint64_t seed,
                                  std::uint64_t stream) {
    const auto s = structural_thresholds(map, a1, H1);
    if (!(l > s.l_escape_threshold && l < s.l_max_invariance))
        throw PreconditionError(fmt::format("escape: need {} < l < {} (l = {})", s.l_escape_threshold,
                                            s.l_max_invariance, l));
    if (!(x0 >= 0.0 && x0 <= H1)) throw DomainError(fmt::format("x0 = {} outside [0, {}]", x0, H1));
    SimOptions opt;
    opt.n_max = n_max;
    const Classifier c{compute_ul(map, a1, s.b, l), std::nullopt};
    return simulate(map, noise, l, x0, c, opt, derive_stream(seed, stream));
}

AbsorptionCheck verify_absorption(const MapSpec& map, const NoiseSpec& noise, const RegimeAnalysis& regime,
                                  const TrajectoryResult& run, std::int64_t extra_steps) {
    if (run.outcome == Outcome::undecided) return {true, 0, 0};
    if (!run.hit_step || run.steps != *run.hit_step)
        throw PreconditionError("absorption check needs a run stopped at its classification step");

    const double l = regime.l;
    const double a = regime.a();
    const double H = regime.H();
    const double b = regime.b();
    RngState rng = run.rng;
    double x = run.final_x;

    if (run.outcome == Outcome::persistent) {
        auto inside = [&](double y) { return y > a && y < H; };
        std::int64_t budget = 0;
        if (!(x >= a)) budget = ascent_steps(map, a, regime.u_l, l, x).K;
        std::int64_t taken = 0;
        while (!inside(x) && taken < budget) {
            x = step(map, x, noise.sample(rng), l);
            ++taken;
        }
        if (!inside(x)) return {false, budget, -1};
        if (regime.invariance_holds) {
            for (std::int64_t i = 0; i < extra_steps; ++i) {
                x = step(map, x, noise.sample(rng), l);
                if (!inside(x)) return {false, budget, taken};
            }
        }
        return {true, budget, taken};
    }

    std::int64_t budget = 0;
    if (x > b) budget = descent_steps(map, b, *regime.v_l, l, x).K;
    std::int64_t taken = 0;
    while (x > b && taken < budget) {
        x = step(map, x, noise.sample(rng), l);
        ++taken;
    }
    if (x > b) return {false, budget, -1};
    return {true, budget, taken};
}

}  // namespace allee
