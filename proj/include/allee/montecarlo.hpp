#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "allee/bounds.hpp"
#include "allee/maps.hpp"
#include "allee/noise.hpp"
#include "allee/thresholds.hpp"

namespace allee {

/// Two-sided 99% normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

struct ProportionInterval {
    double low;
    double high;
    bool operator==(const ProportionInterval&) const = default;
};

/// Wilson score interval for `successes` out of `trials`.
ProportionInterval wilson_interval(std::int64_t successes, std::int64_t trials, double z = kZ99);

struct McConfig {
    double x0 = 0.0;
    std::int64_t trials = 1000;
    std::int64_t n_max = 100000;
    std::uint64_t base_seed = 0;
    /// Run every trial for the full budget and average its tail; otherwise
    /// stop at classification.
    bool track_tail = false;
    /// Continue each classified trial to its trap (ignored with track_tail).
    bool check_absorption = false;
    /// Worker threads; 0 means resolve_threads().
    int threads = 0;
};

struct McEstimate {
    double x0;
    double l;
    std::int64_t trials;
    std::int64_t n_max;
    std::uint64_t base_seed;
    std::int64_t n_persistent = 0;
    std::int64_t n_low = 0;
    std::int64_t n_undecided = 0;
    /// Proportions over all trials; undecided trials count for neither side.
    double p_hat_persist = 0.0;
    double p_hat_low = 0.0;
    ProportionInterval ci_persist{0.0, 1.0};
    ProportionInterval ci_low{0.0, 1.0};
    /// Mean over trials of the per-trial tail average, and the sample
    /// standard deviation of those averages.
    std::optional<double> mean_tail;
    std::optional<double> tail_std;
    std::optional<std::int64_t> absorption_failures;

    bool operator==(const McEstimate&) const = default;
};

/// Thread count: ALLEE_DYN_THREADS when set to a positive integer, else the
/// OpenMP default.
int resolve_threads();

/// OpenMP estimate. Trial i uses stream i under `base_seed`; results are
/// reduced in trial order, so the output does not depend on the thread count.
McEstimate estimate(const MapSpec& map, const NoiseSpec& noise, const RegimeAnalysis& regime,
                    const McConfig& config);
/// Single-threaded reference for `estimate`.
McEstimate estimate_serial(const MapSpec& map, const NoiseSpec& noise, const RegimeAnalysis& regime,
                           const McConfig& config);

enum class Verdict { pass, fail, inconclusive };
const char* to_string(Verdict verdict);

struct BoundVerdict {
    BoundMethod method;
    Verdict verdict;
    std::string detail;
};

/// Each report passes when the empirical upper confidence limits are not
/// below its bounds. More than 1% undecided trials makes every verdict
/// inconclusive. Reports whose x0 is NaN hold for a range and are not
/// matched against the estimate's x0.
std::vector<BoundVerdict> verify_bounds(const McEstimate& estimate, std::span<const BoundReport> reports);
Verdict combine(std::span<const BoundVerdict> verdicts);

struct ExpectationCheck {
    Verdict verdict;
    double mean_tail;
    double standard_error;
    /// l * alpha.
    double floor;
};

/// Tail mean against l * alpha with a 3 standard error allowance.
/// Requires trials >= 1000.
ExpectationCheck verify_expectation(const MapSpec& map, const NoiseSpec& noise, double l, double x0,
                                    std::int64_t trials, std::int64_t n_max, std::uint64_t base_seed,
                                    int threads = 0);

struct GridPoint {
    double x0;
    double l;
};

/// One estimate per grid point; row i is seeded with derive_seed(base_seed, i).
std::vector<McEstimate> sweep(const MapSpec& map, const NoiseSpec& noise, double a, double H,
                              std::span<const GridPoint> grid, std::int64_t trials, std::int64_t n_max,
                              std::uint64_t base_seed, bool check_absorption = false, int threads = 0);

/// False when some earlier row's persistence interval lies entirely above
/// a later row's.
bool persistence_nondecreasing(std::span<const McEstimate> rows);

}  // namespace allee
