#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "allee/maps.hpp"
#include "allee/noise.hpp"
#include "allee/thresholds.hpp"

namespace allee {

enum class BoundMethod {
    escape,
    basic,
    uniform,
    improved,
    explicit_h,
    explicit_h_kappa,
    explicit_uniform,
    /// One-step bound near the thresholds, from a density ceiling C.
    boundary,
};

std::string_view to_string(BoundMethod method);
BoundMethod parse_bound_method(std::string_view name);

/// Lower bounds on P_p(x0) (persistence) and P_e(x0) (low density).
/// An empty bound means the method says nothing for that side; it is never
/// reported as 0.
struct BoundReport {
    double x0;
    double l;
    BoundMethod method;
    std::optional<double> persistence_bound;
    std::optional<double> lowdensity_bound;
    std::optional<std::int64_t> K1;
    std::optional<std::int64_t> K2;
    std::map<std::string, double> constants;
    std::map<std::string, std::vector<double>> sequences;
    std::string note;
};

/// Bound on reaching (a, H) within K steps from any x0 in (0, a] when
/// -F(b) < l < min{H - fH, F(a)}: delta = alpha_frac (l + F(b)),
/// p1 = P{chi > (delta - F(b)) / l}, K = floor(a / delta) + 1, bound p1^K.
/// The report's x0 is NaN; K is stored in K1.
BoundReport escape_bound(const MapSpec& map, const NoiseSpec& noise, const StructuralThresholds& s,
                         double l, double alpha_frac = 0.5);

/// Geometric bounds p1^K1 / p2^K2 built from A = min F on [x0, u_l] and
/// B = max F on [v_l, x0]. x0 above u_l gives P_p = 1, x0 below v_l gives
/// P_e = 1. Throws DomainError for x0 outside [0, H].
BoundReport basic_bounds(const MapSpec& map, const NoiseSpec& noise, const RegimeAnalysis& regime,
                         double x0);

/// Bounds holding for every x0 in [alpha, H] (persistence) and every x0 in
/// [0, beta] (low density). Requires alpha in (alpha_l, u_l) and beta in
/// (v_l, beta_l). constants["mixed_zone"] is 1 when both apply on
/// (alpha, beta).
BoundReport uniform_bounds(const MapSpec& map, const NoiseSpec& noise, const RegimeAnalysis& regime,
                           double alpha, double beta);

/// Product bounds prod lambda_i and prod mu_i. Requires F increasing on
/// [v_l, u_l] and x0 in (v_l, u_l).
BoundReport improved_bounds(const MapSpec& map, const NoiseSpec& noise, const RegimeAnalysis& regime,
                            double x0);

/// Closed-form relaxations of the product bounds.
///   explicit_h        h^K prod eps_i              (h defaults to the density floor)
///   explicit_h_kappa  h^K (eps/l)^K prod(1 + kappa (i-1))
///   explicit_uniform  the previous one with h = 1/2; uniform noise only
/// kappa defaults to regime.kappa.
BoundReport explicit_bounds(const MapSpec& map, const NoiseSpec& noise, const RegimeAnalysis& regime,
                            double x0, BoundMethod variant, std::optional<double> h = std::nullopt,
                            std::optional<double> kappa = std::nullopt);

/// P_p >= 1 - C (u_l - x0 + l - F(x0)) / l and
/// P_e >= 1 - C (x0 - v_l + F(x0) + l) / l, where C bounds the density.
/// Both tend to 1 at the respective threshold. The exact one-step
/// probabilities are kept as constants "one_step_persist" / "one_step_low".
BoundReport boundary_bounds(const MapSpec& map, const NoiseSpec& noise, const RegimeAnalysis& regime,
                            double x0);

/// l * integral_0^1 x phi(x) dx: floor on the eventual mean of x_n.
double min_expectation(const NoiseSpec& noise, double l);

}  // namespace allee
