#include "allee/montecarlo.hpp"

#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <string>

#include <fmt/format.h>
#include <omp.h>

#include "allee/error.hpp"
#include "allee/trajectory.hpp"

namespace allee {

ProportionInterval wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
    if (trials <= 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
    const double low = successes == 0 ? 0.0 : std::max(0.0, centre - half);
    const double high = successes == trials ? 1.0 : std::min(1.0, centre + half);
    return {low, high};
}

int resolve_threads() {
    if (const char* env = std::getenv("ALLEE_DYN_THREADS"); env && *env) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end && *end == '\0' && v > 0 && v <= 4096) return static_cast<int>(v);
    }
    return std::max(1, omp_get_max_threads());
}

namespace {

struct TrialResult {
    Outcome outcome = Outcome::undecided;
    double tail = 0.0;
    bool absorbed = true;
};

TrialResult run_trial(const MapSpec& map, const NoiseSpec& noise, const RegimeAnalysis& regime,
                      const McConfig& cfg, std::int64_t index) {
    SimOptions opt;
    opt.n_max = cfg.n_max;
    opt.record_path = false;
    opt.stop_on_classification = !cfg.track_tail;
    const auto run = simulate(map, noise, regime.l, cfg.x0, Classifier::from(regime), opt,
                              derive_stream(cfg.base_seed, static_cast<std::uint64_t>(index)));
    TrialResult t;
    t.outcome = run.outcome;
    if (run.tail_mean) t.tail = *run.tail_mean;
    if (cfg.check_absorption && !cfg.track_tail) t.absorbed = verify_absorption(map, noise, regime, run).ok;
    return t;
}

template <class Kernel>
std::vector<TrialResult> run_parallel(std::int64_t trials, int threads, Kernel&& kernel) {
    std::vector<TrialResult> out(static_cast<std::size_t>(trials));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(trials));
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads)
    for (std::int64_t i = 0; i < trials; ++i) {
        try {
            out[static_cast<std::size_t>(i)] = kernel(i);
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

McEstimate reduce(const RegimeAnalysis& regime, const McConfig& cfg, const std::vector<TrialResult>& trials) {
    McEstimate e{};
    e.x0 = cfg.x0;
    e.l = regime.l;
    e.trials = cfg.trials;
    e.n_max = cfg.n_max;
    e.base_seed = cfg.base_seed;
    std::int64_t failures = 0;
    double sum = 0.0;
    for (const auto& t : trials) {
        switch (t.outcome) {
            case Outcome::persistent: ++e.n_persistent; break;
            case Outcome::low_density: ++e.n_low; break;
            case Outcome::undecided: ++e.n_undecided; break;
        }
        if (!t.absorbed) ++failures;
        sum += t.tail;
    }
    const double n = static_cast<double>(cfg.trials);
    e.p_hat_persist = static_cast<double>(e.n_persistent) / n;
    e.p_hat_low = static_cast<double>(e.n_low) / n;
    e.ci_persist = wilson_interval(e.n_persistent, cfg.trials);
    e.ci_low = wilson_interval(e.n_low, cfg.trials);
    if (cfg.track_tail) {
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto& t : trials) ss += (t.tail - mean) * (t.tail - mean);
        e.mean_tail = mean;
        e.tail_std = cfg.trials > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    }
    if (cfg.check_absorption && !cfg.track_tail) e.absorption_failures = failures;
    return e;
}

void validate(const McConfig& cfg, const RegimeAnalysis& regime) {
    if (cfg.trials < 1) throw PreconditionError("trials must be at least 1");
    if (cfg.n_max < 0) throw PreconditionError("n_max must be non-negative");
    if (!(cfg.x0 >= 0.0 && cfg.x0 <= regime.H()))
        throw DomainError(fmt::format("x0 = {} outside [0, H] = [0, {}]", cfg.x0, regime.H()));
}

}  // namespace

McEstimate estimate(const MapSpec& map, const NoiseSpec& noise, const RegimeAnalysis& regime,
                    const McConfig& config) {
    validate(config, regime);
    const int threads = config.threads > 0 ? config.threads : resolve_threads();
    const auto trials = run_parallel(config.trials, threads, [&](std::int64_t i) {
        return run_trial(map, noise, regime, config, i);
    });
    return reduce(regime, config, trials);
}

McEstimate estimate_serial(const MapSpec& map, const NoiseSpec& noise, const RegimeAnalysis& regime,
                           const McConfig& config) {
    validate(config, regime);
    std::vector<TrialResult> trials;
    trials.reserve(static_cast<std::size_t>(config.trials));
    for (std::int64_t i = 0; i < config.trials; ++i) trials.push_back(run_trial(map, noise, regime, config, i));
    return reduce(regime, config, trials);
}

const char* to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::pass: return "PASS";
        case Verdict::fail: return "FAIL";
        case Verdict::inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

std::vector<BoundVerdict> verify_bounds(const McEstimate& est, std::span<const BoundReport> reports) {
    constexpr double slack = 1e-12;
    std::vector<BoundVerdict> out;
    const bool too_many_undecided = est.n_undecided * 100 > est.trials;
    for (const auto& r : reports) {
        if (std::abs(r.l - est.l) > 1e-12)
            throw PreconditionError(fmt::format("bound report l = {} does not match estimate l = {}", r.l, est.l));
        if (!std::isnan(r.x0) && std::abs(r.x0 - est.x0) > 1e-12)
            throw PreconditionError(
                fmt::format("bound report x0 = {} does not match estimate x0 = {}", r.x0, est.x0));
        BoundVerdict v{r.method, Verdict::pass, {}};
        if (too_many_undecided) {
            v.verdict = Verdict::inconclusive;
            v.detail = fmt::format("{} of {} trials undecided", est.n_undecided, est.trials);
        } else {
            std::vector<std::string> failed;
            if (r.persistence_bound && est.ci_persist.high + slack < *r.persistence_bound)
                failed.push_back(fmt::format("P_p bound {} above CI upper {}", *r.persistence_bound, est.ci_persist.high));
            if (r.lowdensity_bound && est.ci_low.high + slack < *r.lowdensity_bound)
                failed.push_back(fmt::format("P_e bound {} above CI upper {}", *r.lowdensity_bound, est.ci_low.high));
            if (!failed.empty()) {
                v.verdict = Verdict::fail;
                v.detail = fmt::format("{}", fmt::join(failed, "; "));
            }
        }
        out.push_back(std::move(v));
    }
    return out;
}

Verdict combine(std::span<const BoundVerdict> verdicts) {
    Verdict v = Verdict::pass;
    for (const auto& b : verdicts) {
        if (b.verdict == Verdict::fail) return Verdict::fail;
        if (b.verdict == Verdict::inconclusive) v = Verdict::inconclusive;
    }
    return v;
}

ExpectationCheck verify_expectation(const MapSpec& map, const NoiseSpec& noise, double l, double x0,
                                    std::int64_t trials, std::int64_t n_max, std::uint64_t base_seed,
                                    int threads) {
    if (trials < 1000) throw PreconditionError(fmt::format("expectation check needs >= 1000 trials, got {}", trials));
    if (n_max < 1) throw PreconditionError("expectation check needs n_max >= 1");
    SimOptions opt;
    opt.n_max = n_max;
    opt.record_path = false;
    opt.stop_on_classification = false;
    const int nthreads = threads > 0 ? threads : resolve_threads();
    const auto runs = run_parallel(trials, nthreads, [&](std::int64_t i) {
        const auto run = simulate(map, noise, l, x0, Classifier{}, opt,
                                  derive_stream(base_seed, static_cast<std::uint64_t>(i)));
        return TrialResult{Outcome::undecided, run.tail_mean.value_or(0.0), true};
    });
    const double n = static_cast<double>(trials);
    double sum = 0.0;
    for (const auto& t : runs) sum += t.tail;
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& t : runs) ss += (t.tail - mean) * (t.tail - mean);
    const double se = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
    const double floor = min_expectation(noise, l);
    return {mean >= floor - 3.0 * se ? Verdict::pass : Verdict::fail, mean, se, floor};
}

std::vector<McEstimate> sweep(const MapSpec& map, const NoiseSpec& noise, double a, double H,
                              std::span<const GridPoint> grid, std::int64_t trials, std::int64_t n_max,
                              std::uint64_t base_seed, bool check_absorption, int threads) {
    std::map<double, RegimeAnalysis> regimes;
    for (const auto& g : grid)
        if (!regimes.contains(g.l)) regimes.emplace(g.l, analyze(map, a, H, g.l));
    std::vector<McEstimate> rows;
    rows.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        McConfig cfg;
        cfg.x0 = grid[i].x0;
        cfg.trials = trials;
        cfg.n_max = n_max;
        cfg.base_seed = derive_seed(base_seed, i);
        cfg.check_absorption = check_absorption;
        cfg.threads = threads;
        rows.push_back(estimate(map, noise, regimes.at(grid[i].l), cfg));
    }
    return rows;
}

bool persistence_nondecreasing(std::span<const McEstimate> rows) {
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = i + 1; j < rows.size(); ++j)
            if (rows[j].ci_persist.high < rows[i].ci_persist.low) return false;
    return true;
}

}  // namespace allee
