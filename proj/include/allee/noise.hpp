#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "allee/rng.hpp"

namespace allee {

/// A probability density supported on [-1, 1], positive on (-1, 1).
///
/// Closed forms are used for the CDF where available; `integrate` is the
/// independent quadrature route (adaptive Simpson, or exact trapezoid for
/// tabulated densities) and the two are cross-checked in the tests.
class NoiseSpec {
public:
    enum class Kind { uniform, truncated_normal, triangular, table };

    static NoiseSpec uniform();
    /// Normal(0, sigma^2) conditioned on [-1, 1].
    static NoiseSpec truncated_normal(double sigma);
    /// phi(x) = 1 - |x|.
    static NoiseSpec triangular();
    /// Piecewise-linear density through (xs[i], density[i]). The grid must
    /// run from -1 to 1; values are renormalized to unit mass.
    static NoiseSpec table(std::vector<double> xs, std::vector<double> density);
    /// Two-column text file "x phi(x)"; '#' starts a comment.
    static NoiseSpec table_from_file(const std::filesystem::path& path);
    /// CLI syntax: `uniform`, `tnormal:<sigma>`, `triangular`, `table:<file>`.
    static NoiseSpec parse(std::string_view spec);

    Kind kind() const { return kind_; }
    std::string describe() const;

    double density(double x) const;
    double cdf(double t) const;
    /// P{chi > t}; 1 for t <= -1 and 0 for t >= 1.
    double tail_upper(double t) const;
    /// P{chi < t}; 0 for t <= -1 and 1 for t >= 1.
    double tail_lower(double t) const;
    /// Quadrature of the density over [lo, hi] clipped to [-1, 1].
    double integrate(double lo, double hi) const;
    /// Integral of x phi(x) over [0, 1].
    double mean_positive_part() const;

    /// Largest h with phi >= h on [-1, 1], when known in closed form.
    std::optional<double> density_floor() const { return floor_; }
    /// Smallest C with phi <= C on [-1, 1], when known in closed form.
    std::optional<double> density_ceiling() const { return ceiling_; }

    double inverse_cdf(double u) const;
    /// One draw in [-1, 1]; advances `rng` by exactly one word.
    double sample(RngState& rng) const { return inverse_cdf(rng.next_unit()); }

private:
    NoiseSpec() = default;

    Kind kind_ = Kind::uniform;
    double sigma_ = 0.0;
    double erf_edge_ = 0.0;  // erf(1 / (sigma sqrt 2))
    double norm_ = 0.0;      // normalizing constant of the truncated normal
    std::vector<double> xs_;
    std::vector<double> ys_;
    std::vector<double> cum_;  // table CDF at the nodes
    std::string source_;
    std::optional<double> floor_;
    std::optional<double> ceiling_;
};

inline double tail_prob_upper(const NoiseSpec& noise, double t) { return noise.tail_upper(t); }
inline double tail_prob_lower(const NoiseSpec& noise, double t) { return noise.tail_lower(t); }
inline double sample(const NoiseSpec& noise, RngState& rng) { return noise.sample(rng); }

}  // namespace allee
