#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "allee/maps.hpp"

namespace allee {

/// Resolution of the directional scans and extremum grids.
inline constexpr std::size_t kScanGrid = 10000;
/// Bisection stops once the bracket is narrower than this.
inline constexpr double kRootTol = 1e-9;
/// Minima closer than this are considered tied (leftmost wins).
inline constexpr double kTieTol = 1e-9;

struct Extremum {
    double x;
    double value;
};

/// Leftmost global minimizer of F on [0, a]. Throws PreconditionError when
/// the minimum is not attained strictly inside (0, a) or is not negative.
double find_b(const MapSpec& map, double a);

/// Maximum of f on [0, H] and its leftmost argmax.
Extremum compute_fH(const MapSpec& map, double H);

/// min / max of F over [lo, hi]; grid plus golden-section refinement.
Extremum minimize_F(const MapSpec& map, double lo, double hi);
Extremum maximize_F(const MapSpec& map, double lo, double hi);
inline double local_min_over(const MapSpec& map, double lo, double hi) { return minimize_F(map, lo, hi).value; }
inline double local_max_over(const MapSpec& map, double lo, double hi) { return maximize_F(map, lo, hi).value; }

/// All sign changes of F on [lo, hi] (grid of `grid` cells), bisected.
std::vector<double> fixed_points(const MapSpec& map, double lo, double hi,
                                 std::size_t grid = kScanGrid);

/// Configuration constants that do not depend on the noise amplitude.
struct StructuralThresholds {
    double a;
    double H;
    double b;
    double F_b;
    double fH;
    double fH_argmax;
    double F_a;
    double f_H;  // f evaluated at H
    /// min{H - fH, F(a)}: (a, H) is invariant for l below this.
    double l_max_invariance;
    /// -F(b): above this the trap near zero is escaped a.s.
    double l_escape_threshold;

    /// True when some l satisfies -F(b) < l < min{H - fH, F(a)}.
    bool unconditional_window() const { return l_escape_threshold < l_max_invariance; }
};

StructuralThresholds structural_thresholds(const MapSpec& map, double a, double H);

/// sup{u < a : F(u) < l}: scan down from a, bisect. Requires 0 < l < F(a).
double compute_ul(const MapSpec& map, double a, double b, double l);
/// inf{v > b : F(v) > -l}: scan up from b, bisect. Requires 0 < l < -F(b).
double compute_vl(const MapSpec& map, double a, double b, double l);

struct AlphaBeta {
    double alpha_l;  // sup{b < x < a : F(x) < -l}
    double beta_l;   // inf{b < x < a : F(x) > l}
};
/// Throws RootNotFound when either defining set is empty.
AlphaBeta compute_alpha_beta(const MapSpec& map, double a, double b, double l);

/// Largest kappa with |F(y) - F(x)| >= kappa |y - x| on [lo, hi], estimated
/// from adjacent secants of a 10^4-point grid. Empty unless F is strictly
/// increasing there.
std::optional<double> check_expansivity(const MapSpec& map, double lo, double hi);

enum class NoiseRegime {
    /// l < -F(b): a.s. zones below v_l and above u_l, mixed zone between.
    mixed,
    /// l > -F(b): every solution eventually enters (a, H).
    unconditional,
};

struct RegimeAnalysis {
    StructuralThresholds thresholds;
    double l;
    NoiseRegime regime;
    /// l < min{H - fH, F(a)}.
    bool invariance_holds;

    double u_l;
    // Defined in the mixed regime only.
    std::optional<double> v_l;
    std::optional<double> alpha_l;
    std::optional<double> beta_l;
    /// |F| < l on (v_l, u_l).
    std::optional<bool> flbound_holds;
    bool F_monotone_on_core = false;
    std::optional<double> kappa;
    /// Some threshold root is (nearly) tangential: |F'| < 1e-6 there.
    bool ill_conditioned = false;

    double a() const { return thresholds.a; }
    double H() const { return thresholds.H; }
    double b() const { return thresholds.b; }
};

/// Full threshold analysis for amplitude l. Requires 0 < l < F(a) and
/// l != -F(b). Failure of l < H - fH is reported through
/// `invariance_holds`, not thrown.
RegimeAnalysis analyze(const MapSpec& map, double a, double H, double l);

/// Worst-case number of steps to absorption from x0 (proof of the a.s.
/// zones): descent into [0, b] from x0 in (b, v_l), or ascent into
/// (a, H) from x0 in (u_l, a).
struct HittingBound {
    enum class Direction { descent, ascent } direction;
    double delta;
    std::int64_t K;
};

HittingBound descent_steps(const MapSpec& map, double b, double v_l, double l, double x0);
HittingBound ascent_steps(const MapSpec& map, double a, double u_l, double l, double x0);
/// Dispatches on where x0 lies; throws DomainError outside both cases.
HittingBound hitting_time_bounds(const MapSpec& map, const RegimeAnalysis& regime, double x0);

}  // namespace allee
