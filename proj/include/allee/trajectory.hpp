#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "allee/maps.hpp"
#include "allee/noise.hpp"
#include "allee/rng.hpp"
#include "allee/thresholds.hpp"

namespace allee {

/// max{f(x) + l chi, 0}.
inline double step(const MapSpec& map, double x, double chi, double l) {
    return std::max(map.f(x) + l * chi, 0.0);
}

/// Absorbing thresholds: persistent once x > upper, low density once
/// x < lower. An empty classifier never decides.
struct Classifier {
    std::optional<double> upper;
    std::optional<double> lower;

    static Classifier from(const RegimeAnalysis& regime) { return {regime.u_l, regime.v_l}; }
    bool active() const { return upper || lower; }
};

struct SimOptions {
    std::int64_t n_max = 100000;
    bool record_path = true;
    /// Keep every point (overrides thinning).
    bool full_path = false;
    /// Points up to this step are always kept.
    std::int64_t full_prefix = 10000;
    /// Beyond the prefix keep every `thin`-th point.
    std::int64_t thin = 100;
    /// Points kept on each side of the classification step.
    std::int64_t context = 50;
    bool stop_on_classification = true;
    /// Fraction of n_max averaged into tail_mean.
    double tail_fraction = 0.2;
};

struct PathPoint {
    std::int64_t n;
    double x;
    bool operator==(const PathPoint&) const = default;
};

enum class Outcome { persistent, low_density, undecided };
const char* to_string(Outcome outcome);

struct TrajectoryResult {
    std::vector<PathPoint> path;
    Outcome outcome = Outcome::undecided;
    std::optional<std::int64_t> hit_step;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::int64_t n_max = 0;
    /// Steps actually taken.
    std::int64_t steps = 0;
    double final_x = 0.0;
    /// Mean of x_n over the last tail_fraction * n_max steps; empty when the
    /// run stopped before the end of the budget.
    std::optional<double> tail_mean;
    /// Generator state after the last step; continuing from it extends the run.
    RngState rng{0, 0};

    bool operator==(const TrajectoryResult&) const = default;
};

TrajectoryResult simulate(const MapSpec& map, const NoiseSpec& noise, double l, double x0,
                          const Classifier& classifier, const SimOptions& options, RngState rng);

/// Classified run with default storage. Throws DomainError for x0 outside [0, H].
TrajectoryResult simulate(const MapSpec& map, const NoiseSpec& noise, const RegimeAnalysis& regime,
                          double x0, std::int64_t n_max, std::uint64_t seed, std::uint64_t stream);

/// Every path value lies in [0, b1]. Requires l <= b1 - f(b1) and x0 in [0, b1].
bool check_trap_below_b1(const MapSpec& map, double l, double b1, double x0,
                         std::span<const PathPoint> path);

/// Every path value lies in (a, H). Requires l < min{H - fH, F(a)} and x0 in (a, H).
bool check_invariance_aH(const MapSpec& map, double l, double a, double H, double x0,
                         std::span<const PathPoint> path);

/// Run until x > u_l or the budget is spent. Requires
/// -F(b) < l < min{H1 - fH, F(a1)}.
TrajectoryResult check_escape_all(const MapSpec& map, const NoiseSpec& noise, double l, double a1,
                                  double H1, double x0, std::int64_t n_max, std::uint64_t seed,
                                  std::uint64_t stream);

struct AbsorptionCheck {
    bool ok;
    /// Deterministic worst-case step budget from the hit point.
    std::int64_t budget;
    /// Steps it took to enter the trap (-1 if it never did).
    std::int64_t steps_taken;
};

/// Continues a classified run from its stored state: a persistent run must
/// enter (a, H) within the ascent budget (and stay there for `extra_steps`
/// when (a, H) is invariant); a low-density run must enter [0, b] within
/// the descent budget. Undecided runs pass trivially.
AbsorptionCheck verify_absorption(const MapSpec& map, const NoiseSpec& noise, const RegimeAnalysis& regime,
                                  const TrajectoryResult& run, std::int64_t extra_steps = 1000);

}  // namespace allee
