#include "allee/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "allee/error.hpp"

namespace allee {

namespace {

// Golden-section search on [lo, hi]. Returns the best point evaluated,
// preferring the smaller x among equal values.
template <class G>
Extremum golden_min(G& g, double lo, double hi) {
    constexpr double inv_phi = 0.6180339887498949;
    Extremum best{lo, g(lo)};
    auto consider = [&](double x, double v) {
        if (v < best.value || (v == best.value && x < best.x)) best = {x, v};
    };
    consider(hi, g(hi));
    double a = lo;
    double b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double gc = g(c);
    double gd = g(d);
    consider(c, gc);
    consider(d, gd);
    for (int it = 0; it < 200 && b - a > 1e-13 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
        if (gc <= gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = g(c);
            consider(c, gc);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = g(d);
            consider(d, gd);
        }
    }
    return best;
}

// Leftmost global minimizer of g on [lo, hi]: every grid-local minimum is
// refined by golden section on its two neighbouring cells, then the smallest
// x whose refined value is within kTieTol of the best wins.
template <class G>
Extremum leftmost_global_min(G&& g, double lo, double hi, std::size_t cells = kScanGrid) {
    if (!(hi > lo)) return {lo, g(lo)};
    const double h = (hi - lo) / static_cast<double>(cells);
    auto xi = [&](std::size_t i) { return i == cells ? hi : lo + h * static_cast<double>(i); };
    std::vector<double> v(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) v[i] = g(xi(i));

    std::vector<Extremum> refined;
    for (std::size_t i = 0; i <= cells; ++i) {
        const bool left_ok = i == 0 || v[i] <= v[i - 1];
        const bool right_ok = i == cells || v[i] <= v[i + 1];
        if (!(left_ok && right_ok)) continue;
        const double a = xi(i == 0 ? 0 : i - 1);
        const double b = xi(std::min(i + 1, cells));
        Extremum r = golden_min(g, a, b);
        if (v[i] < r.value) r = {xi(i), v[i]};
        refined.push_back(r);
    }
    double global = std::numeric_limits<double>::infinity();
    for (const auto& r : refined) global = std::min(global, r.value);
    Extremum best{hi, global};
    for (const auto& r : refined)
        if (r.value <= global + kTieTol && r.x < best.x) best = r;
    return best;
}

// Bisection for a sign change of g between x_false (condition false) and
// x_true (condition true).
template <class G, class Cond>
double bisect(G& g, Cond& cond, double x_false, double x_true) {
    for (int it = 0; it < 200 && std::abs(x_true - x_false) > 1e-13; ++it) {
        const double mid = 0.5 * (x_false + x_true);
        if (cond(g(mid))) x_true = mid;
        else x_false = mid;
    }
    return 0.5 * (x_false + x_true);
}

// Walks from `from` toward `to` and returns the root inside the first grid
// cell where `cond(g)` becomes true.
template <class G, class Cond>
std::optional<double> first_crossing(G&& g, Cond&& cond, double from, double to,
                                     std::size_t cells = kScanGrid) {
    if (cond(g(from))) return from;
    double prev = from;
    for (std::size_t i = 1; i <= cells; ++i) {
        const double x = i == cells ? to : from + (to - from) * static_cast<double>(i) / cells;
        if (cond(g(x))) return bisect(g, cond, prev, x);
        prev = x;
    }
    return std::nullopt;
}

double slope_at(const MapSpec& map, double x) {
    constexpr double h = 1e-6;
    const double lo = std::max(0.0, x - h);
    return (map.F(x + h) - map.F(lo)) / (x + h - lo);
}

}  // namespace

Extremum minimize_F(const MapSpec& map, double lo, double hi) {
    if (hi < lo) throw DomainError(fmt::format("minimize_F: empty interval [{}, {}]", lo, hi));
    return leftmost_global_min([&](double x) { return map.F(x); }, lo, hi);
}

Extremum maximize_F(const MapSpec& map, double lo, double hi) {
    if (hi < lo) throw DomainError(fmt::format("maximize_F: empty interval [{}, {}]", lo, hi));
    const auto r = leftmost_global_min([&](double x) { return -map.F(x); }, lo, hi);
    return {r.x, -r.value};
}

double find_b(const MapSpec& map, double a) {
    if (!(a > 0.0)) throw PreconditionError(fmt::format("find_b: a = {} must be positive", a));
    const auto m = minimize_F(map, 0.0, a);
    const double edge = 1e-9 * a;
    if (!(m.value < 0.0) || m.x <= edge || m.x >= a - edge)
        throw PreconditionError(fmt::format(
            "find_b: F has no negative interior minimum on [0, {}] (min {} at x = {})", a, m.value,
            m.x));
    return m.x;
}

Extremum compute_fH(const MapSpec& map, double H) {
    if (!(H > 0.0)) throw PreconditionError(fmt::format("compute_fH: H = {} must be positive", H));
    const auto r = leftmost_global_min([&](double x) { return -map.f(x); }, 0.0, H);
    return {r.x, -r.value};
}

std::vector<double> fixed_points(const MapSpec& map, double lo, double hi, std::size_t grid) {
    std::vector<double> roots;
    auto F = [&](double x) { return map.F(x); };
    double prev_x = lo;
    double prev_v = F(lo);
    for (std::size_t i = 1; i <= grid; ++i) {
        const double x = i == grid ? hi : lo + (hi - lo) * static_cast<double>(i) / grid;
        const double v = F(x);
        if ((prev_v < 0.0) != (v < 0.0)) {
            const bool rising = v >= 0.0;
            auto cond = [rising](double g) { return rising ? g >= 0.0 : g < 0.0; };
            roots.push_back(bisect(F, cond, prev_x, x));
        }
        prev_x = x;
        prev_v = v;
    }
    return roots;
}

StructuralThresholds structural_thresholds(const MapSpec& map, double a, double H) {
    if (!(a > 0.0 && a < H))
        throw PreconditionError(fmt::format("need 0 < a < H (a = {}, H = {})", a, H));
    StructuralThresholds s{};
    s.a = a;
    s.H = H;
    s.b = find_b(map, a);
    s.F_b = map.F(s.b);
    const auto top = compute_fH(map, H);
    s.fH = top.value;
    s.fH_argmax = top.x;
    s.F_a = map.F(a);
    s.f_H = map.f(H);
    s.l_max_invariance = std::min(H - s.fH, s.F_a);
    s.l_escape_threshold = -s.F_b;
    return s;
}

double compute_ul(const MapSpec& map, double a, double b, double l) {
    const double Fa = map.F(a);
    if (!(l > 0.0) || !(l < Fa))
        throw PreconditionError(fmt::format("u_l: need 0 < l < F(a) = {} (l = {})", Fa, l));
    auto g = [&](double x) { return map.F(x) - l; };
    const auto root = first_crossing(g, [](double v) { return v < 0.0; }, a, b);
    if (!root) throw RootNotFound(fmt::format("u_l: F - l has no sign change on [{}, {}]", b, a));
    return *root;
}

double compute_vl(const MapSpec& map, double a, double b, double l) {
    const double Fb = map.F(b);
    if (!(l > 0.0) || !(l < -Fb))
        throw PreconditionError(fmt::format("v_l: need 0 < l < -F(b) = {} (l = {})", -Fb, l));
    auto g = [&](double x) { return map.F(x) + l; };
    const auto root = first_crossing(g, [](double v) { return v > 0.0; }, b, a);
    if (!root) throw RootNotFound(fmt::format("v_l: F + l has no sign change on [{}, {}]", b, a));
    return *root;
}

AlphaBeta compute_alpha_beta(const MapSpec& map, double a, double b, double l) {
    if (!(l > 0.0)) throw PreconditionError("alpha/beta: l must be positive");
    auto up = [&](double x) { return map.F(x) - l; };
    auto down = [&](double x) { return map.F(x) + l; };
    const auto beta = first_crossing(up, [](double v) { return v > 0.0; }, b, a);
    const auto alpha = first_crossing(down, [](double v) { return v < 0.0; }, a, b);
    if (!beta) throw RootNotFound(fmt::format("beta_l: F never exceeds l = {} on ({}, {})", l, b, a));
    if (!alpha) throw RootNotFound(fmt::format("alpha_l: F never drops below -l = {} on ({}, {})", -l, b, a));
    return {*alpha, *beta};
}

std::optional<double> check_expansivity(const MapSpec& map, double lo, double hi) {
    if (!(hi > lo)) return std::nullopt;
    constexpr std::size_t cells = kScanGrid;
    const double h = (hi - lo) / static_cast<double>(cells);
    double prev = map.F(lo);
    double kappa = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i <= cells; ++i) {
        const double x = i == cells ? hi : lo + h * static_cast<double>(i);
        const double v = map.F(x);
        kappa = std::min(kappa, (v - prev) / h);
        prev = v;
    }
    if (!(kappa > 0.0)) return std::nullopt;
    return kappa;
}

RegimeAnalysis analyze(const MapSpec& map, double a, double H, double l) {
    RegimeAnalysis r{};
    r.thresholds = structural_thresholds(map, a, H);
    const auto& s = r.thresholds;
    r.l = l;
    if (!(l > 0.0)) throw PreconditionError(fmt::format("noise amplitude l = {} must be positive", l));
    if (!(l < s.F_a))
        throw PreconditionError(fmt::format("l = {} must be below F(a) = {}", l, s.F_a));
    if (std::abs(l - s.l_escape_threshold) <= 1e-12)
        throw PreconditionError(fmt::format("l = {} sits exactly on -F(b)", l));
    r.regime = l < s.l_escape_threshold ? NoiseRegime::mixed : NoiseRegime::unconditional;
    r.invariance_holds = l < s.l_max_invariance;

    r.u_l = compute_ul(map, a, s.b, l);
    std::vector<double> roots{r.u_l};
    if (r.regime == NoiseRegime::mixed) {
        r.v_l = compute_vl(map, a, s.b, l);
        const auto ab = compute_alpha_beta(map, a, s.b, l);
        r.alpha_l = ab.alpha_l;
        r.beta_l = ab.beta_l;
        roots.insert(roots.end(), {*r.v_l, ab.alpha_l, ab.beta_l});

        const double lo = *r.v_l;
        const double hi = r.u_l;
        bool inside = true;
        bool increasing = true;
        double prev = map.F(lo);
        for (std::size_t i = 1; i <= kScanGrid; ++i) {
            const double x = i == kScanGrid ? hi : lo + (hi - lo) * static_cast<double>(i) / kScanGrid;
            const double v = map.F(x);
            if (i < kScanGrid && !(std::abs(v) < l)) inside = false;
            if (!(v > prev)) increasing = false;
            prev = v;
        }
        r.flbound_holds = inside;
        r.F_monotone_on_core = increasing;
        r.kappa = check_expansivity(map, lo, hi);
    }
    for (double x : roots)
        if (std::abs(slope_at(map, x)) < 1e-6) r.ill_conditioned = true;
    return r;
}

HittingBound descent_steps(const MapSpec& map, double b, double v_l, double l, double x0) {
    if (!(x0 > b && x0 < v_l))
        throw DomainError(fmt::format("descent bound needs x0 in (b, v_l) = ({}, {}), got {}", b, v_l, x0));
    const double delta = -maximize_F(map, b, x0).value - l;
    if (!(delta > 0.0)) throw DomainError(fmt::format("descent bound: Delta_l(x0) = {} is not positive", delta));
    const double ratio = (v_l - b) / delta;
    if (ratio > 1e15) throw DomainError("descent bound: step count overflows");
    return {HittingBound::Direction::descent, delta, static_cast<std::int64_t>(std::floor(ratio)) + 1};
}

HittingBound ascent_steps(const MapSpec& map, double a, double u_l, double l, double x0) {
    if (!(x0 > u_l && x0 < a))
        throw DomainError(fmt::format("ascent bound needs x0 in (u_l, a) = ({}, {}), got {}", u_l, a, x0));
    const double delta = minimize_F(map, x0, a).value - l;
    if (!(delta > 0.0)) throw DomainError(fmt::format("ascent bound: Delta_l(x0) = {} is not positive", delta));
    const double ratio = (a - u_l) / delta;
    if (ratio > 1e15) throw DomainError("ascent bound: step count overflows");
    return {HittingBound::Direction::ascent, delta, static_cast<std::int64_t>(std::floor(ratio)) + 1};
}

HittingBound hitting_time_bounds(const MapSpec& map, const RegimeAnalysis& regime, double x0) {
    if (regime.v_l && x0 > regime.b() && x0 < *regime.v_l)
        return descent_steps(map, regime.b(), *regime.v_l, regime.l, x0);
    if (x0 > regime.u_l && x0 < regime.a()) return ascent_steps(map, regime.a(), regime.u_l, regime.l, x0);
    throw DomainError(fmt::format("no hitting-time bound for x0 = {} (neither in (b, v_l) nor in (u_l, a))", x0));
}

}  // namespace allee
