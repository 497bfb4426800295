#include "allee/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "allee/error.hpp"

namespace allee {

namespace {

constexpr double kMaxSteps = 1e8;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::int64_t step_count(double ratio, std::string_view what) {
    if (!(ratio >= 0.0) || ratio > kMaxSteps)
        throw PreconditionError(fmt::format("{}: step count {} out of range", what, ratio));
    return static_cast<std::int64_t>(std::floor(ratio)) + 1;
}

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

BoundReport make_report(double x0, double l, BoundMethod method) {
    BoundReport r{};
    r.x0 = x0;
    r.l = l;
    r.method = method;
    return r;
}

void require_in_domain(const RegimeAnalysis& regime, double x0) {
    if (!(x0 >= 0.0 && x0 <= regime.H()))
        throw DomainError(fmt::format("x0 = {} outside [0, H] = [0, {}]", x0, regime.H()));
}

const RegimeAnalysis& require_core(const RegimeAnalysis& regime, double x0, std::string_view what) {
    if (regime.regime != NoiseRegime::mixed || !regime.v_l)
        throw PreconditionError(fmt::format("{}: needs the mixed regime l < -F(b)", what));
    if (!regime.F_monotone_on_core)
        throw PreconditionError(fmt::format("{}: F is not increasing on [v_l, u_l]", what));
    if (!(x0 > *regime.v_l && x0 < regime.u_l))
        throw PreconditionError(
            fmt::format("{}: x0 = {} outside (v_l, u_l) = ({}, {})", what, x0, *regime.v_l, regime.u_l));
    return regime;
}

// eps, K1 and eps_i of the product bound; delta, K2 and delta_i likewise.
struct CoreSteps {
    double eps;
    std::int64_t K1;
    std::vector<double> eps_i;
    double delta;
    std::int64_t K2;
    std::vector<double> delta_i;
};

CoreSteps core_steps(const MapSpec& map, const RegimeAnalysis& regime, double x0) {
    const double l = regime.l;
    const double Fx0 = map.F(x0);
    CoreSteps c{};
    c.eps = 0.5 * (l + Fx0);
    c.K1 = step_count((regime.u_l - x0) / c.eps, "K1");
    c.eps_i.reserve(static_cast<std::size_t>(c.K1));
    for (std::int64_t i = 1; i <= c.K1; ++i) {
        const double y = std::min(x0 + static_cast<double>(i - 1) * c.eps, regime.u_l);
        c.eps_i.push_back((l + 2.0 * map.F(y) - Fx0) / (2.0 * l));
    }
    c.delta = 0.5 * (l - Fx0);
    c.K2 = step_count((x0 - *regime.v_l) / c.delta, "K2");
    c.delta_i.reserve(static_cast<std::size_t>(c.K2));
    for (std::int64_t i = 1; i <= c.K2; ++i) {
        const double y = std::max(x0 - static_cast<double>(i - 1) * c.delta, *regime.v_l);
        c.delta_i.push_back((l - 2.0 * map.F(y) + Fx0) / (2.0 * l));
    }
    return c;
}

}  // namespace

std::string_view to_string(BoundMethod method) {
    switch (method) {
        case BoundMethod::escape: return "escape";
        case BoundMethod::basic: return "basic";
        case BoundMethod::uniform: return "uniform";
        case BoundMethod::improved: return "improved";
        case BoundMethod::explicit_h: return "explicit_h";
        case BoundMethod::explicit_h_kappa: return "explicit_h_kappa";
        case BoundMethod::explicit_uniform: return "explicit_uniform";
        case BoundMethod::boundary: return "boundary";
    }
    return "?";
}

BoundMethod parse_bound_method(std::string_view name) {
    for (auto m : {BoundMethod::escape, BoundMethod::basic, BoundMethod::uniform, BoundMethod::improved,
                   BoundMethod::explicit_h, BoundMethod::explicit_h_kappa, BoundMethod::explicit_uniform,
                   BoundMethod::boundary})
        if (to_string(m) == name) return m;
    throw ParseError(fmt::format("unknown bound method '{}'", name));
}

BoundReport escape_bound(const MapSpec& map, const NoiseSpec& noise, const StructuralThresholds& s,
                         double l, double alpha_frac) {
    (void)map;
    if (!(alpha_frac > 0.0 && alpha_frac < 1.0))
        throw PreconditionError(fmt::format("escape bound: alpha_frac = {} not in (0, 1)", alpha_frac));
    if (!(l > s.l_escape_threshold))
        throw PreconditionError(
            fmt::format("escape bound: need l > -F(b) = {} (l = {})", s.l_escape_threshold, l));
    if (!(l < s.l_max_invariance))
        throw PreconditionError(fmt::format(
            "escape bound: need l < min{{H - fH, F(a)}} = {} (l = {})", s.l_max_invariance, l));

    auto r = make_report(kNaN, l, BoundMethod::escape);
    const double delta = alpha_frac * (l + s.F_b);
    const double p1 = noise.tail_upper((-s.F_b + delta) / l);
    const auto K = step_count(s.a / delta, "escape K");
    r.K1 = K;
    r.persistence_bound = clamp01(std::pow(p1, static_cast<double>(K)));
    r.constants = {{"delta", delta}, {"p1", p1}, {"K", static_cast<double>(K)}, {"alpha_frac", alpha_frac}};
    r.note = fmt::format("reach (a, H) within K steps from any x0 in (0, {}]", s.a);
    return r;
}

BoundReport basic_bounds(const MapSpec& map, const NoiseSpec& noise, const RegimeAnalysis& regime,
                         double x0) {
    require_in_domain(regime, x0);
    const double l = regime.l;
    auto r = make_report(x0, l, BoundMethod::basic);

    if (x0 > regime.u_l) {
        r.persistence_bound = 1.0;
    } else if (!regime.alpha_l || x0 > *regime.alpha_l) {
        const double A = minimize_F(map, x0, regime.u_l).value;
        r.constants["A"] = A;
        if (l + A > 0.0) {
            const double p1 = noise.tail_upper(1.0 - (l + A) / (2.0 * l));
            const auto K1 = step_count(2.0 * (regime.u_l - x0) / (l + A), "K1");
            r.constants["p1"] = p1;
            r.K1 = K1;
            r.persistence_bound = clamp01(std::pow(p1, static_cast<double>(K1)));
        }
    }

    if (regime.v_l) {
        const double v_l = *regime.v_l;
        if (x0 < v_l) {
            r.lowdensity_bound = 1.0;
        } else if (x0 < *regime.beta_l) {
            const double B = maximize_F(map, v_l, x0).value;
            r.constants["B"] = B;
            if (l - B > 0.0) {
                const double p2 = noise.tail_lower(-1.0 + (l - B) / (2.0 * l));
                const auto K2 = step_count(2.0 * (x0 - v_l) / (l - B), "K2");
                r.constants["p2"] = p2;
                r.K2 = K2;
                r.lowdensity_bound = clamp01(std::pow(p2, static_cast<double>(K2)));
            }
        }
    }
    return r;
}

BoundReport uniform_bounds(const MapSpec& map, const NoiseSpec& noise, const RegimeAnalysis& regime,
                           double alpha, double beta) {
    if (regime.regime != NoiseRegime::mixed || !regime.v_l)
        throw PreconditionError("uniform bounds: needs the mixed regime l < -F(b)");
    const double l = regime.l;
    const double alpha_l = *regime.alpha_l;
    const double beta_l = *regime.beta_l;
    const double v_l = *regime.v_l;
    if (!(alpha > alpha_l && alpha < regime.u_l))
        throw PreconditionError(
            fmt::format("uniform bounds: alpha = {} outside (alpha_l, u_l) = ({}, {})", alpha, alpha_l, regime.u_l));
    if (!(beta > v_l && beta < beta_l))
        throw PreconditionError(
            fmt::format("uniform bounds: beta = {} outside (v_l, beta_l) = ({}, {})", beta, v_l, beta_l));

    auto r = make_report(kNaN, l, BoundMethod::uniform);
    const double A = minimize_F(map, alpha, regime.u_l).value;
    const double B = maximize_F(map, v_l, beta).value;
    const double p1 = noise.tail_upper(1.0 - (l + A) / (2.0 * l));
    const double p2 = noise.tail_lower(-1.0 + (l - B) / (2.0 * l));
    const auto K1 = step_count(2.0 * (regime.u_l - alpha) / (l + A), "K1");
    const auto K2 = step_count(2.0 * (beta - v_l) / (l - B), "K2");
    r.K1 = K1;
    r.K2 = K2;
    r.persistence_bound = clamp01(std::pow(p1, static_cast<double>(K1)));
    r.lowdensity_bound = clamp01(std::pow(p2, static_cast<double>(K2)));
    const bool mixed = alpha_l < beta_l && alpha < beta;
    r.constants = {{"alpha", alpha}, {"beta", beta}, {"A", A}, {"B", B},
                   {"p1", p1},       {"p2", p2},     {"mixed_zone", mixed ? 1.0 : 0.0}};
    r.note = fmt::format("P_p bound for x0 in [{}, H], P_e bound for x0 in [0, {}]", alpha, beta);
    return r;
}

BoundReport improved_bounds(const MapSpec& map, const NoiseSpec& noise, const RegimeAnalysis& regime,
                            double x0) {
    require_core(regime, x0, "improved bounds");
    auto r = make_report(x0, regime.l, BoundMethod::improved);
    auto c = core_steps(map, regime, x0);

    std::vector<double> lambda_i, mu_i;
    double pp = 1.0;
    for (double e : c.eps_i) {
        lambda_i.push_back(noise.tail_upper(1.0 - e));
        pp *= lambda_i.back();
    }
    double pe = 1.0;
    for (double d : c.delta_i) {
        mu_i.push_back(noise.tail_lower(-1.0 + d));
        pe *= mu_i.back();
    }
    r.K1 = c.K1;
    r.K2 = c.K2;
    r.persistence_bound = clamp01(pp);
    r.lowdensity_bound = clamp01(pe);
    r.constants = {{"eps", c.eps}, {"delta", c.delta}};
    r.sequences = {{"eps_i", std::move(c.eps_i)},
                   {"delta_i", std::move(c.delta_i)},
                   {"lambda_i", std::move(lambda_i)},
                   {"mu_i", std::move(mu_i)}};
    return r;
}

BoundReport explicit_bounds(const MapSpec& map, const NoiseSpec& noise, const RegimeAnalysis& regime,
                            double x0, BoundMethod variant, std::optional<double> h,
                            std::optional<double> kappa) {
    require_core(regime, x0, "explicit bounds");
    const double l = regime.l;
    switch (variant) {
        case BoundMethod::explicit_h:
        case BoundMethod::explicit_h_kappa:
            if (!h) h = noise.density_floor();
            if (!h || !(*h > 0.0))
                throw PreconditionError("explicit bounds: need a density floor h > 0");
            break;
        case BoundMethod::explicit_uniform:
            if (noise.kind() != NoiseSpec::Kind::uniform)
                throw PreconditionError("explicit_uniform: noise must be uniform");
            h = 0.5;
            break;
        default:
            throw PreconditionError(fmt::format("explicit bounds: '{}' is not an explicit variant", to_string(variant)));
    }
    if (variant != BoundMethod::explicit_h) {
        if (!kappa) kappa = regime.kappa;
        if (!kappa || !(*kappa >= 0.0))
            throw PreconditionError("explicit bounds: need an expansivity constant kappa >= 0");
    }

    auto r = make_report(x0, l, variant);
    auto c = core_steps(map, regime, x0);
    const double log_h = std::log(*h);

    double log_pp = 0.0;
    double log_pe = 0.0;
    if (variant == BoundMethod::explicit_h) {
        for (double e : c.eps_i) log_pp += log_h + std::log(std::max(e, 0.0));
        for (double d : c.delta_i) log_pe += log_h + std::log(std::max(d, 0.0));
    } else {
        const double k = *kappa;
        for (std::int64_t i = 1; i <= c.K1; ++i)
            log_pp += log_h + std::log(c.eps / l) + std::log1p(k * static_cast<double>(i - 1));
        for (std::int64_t i = 1; i <= c.K2; ++i)
            log_pe += log_h + std::log(c.delta / l) + std::log1p(k * static_cast<double>(i - 1));
        r.constants["kappa"] = k;
    }
    r.K1 = c.K1;
    r.K2 = c.K2;
    r.persistence_bound = clamp01(std::exp(log_pp));
    r.lowdensity_bound = clamp01(std::exp(log_pe));
    r.constants["h"] = *h;
    r.constants["eps"] = c.eps;
    r.constants["delta"] = c.delta;
    r.sequences = {{"eps_i", std::move(c.eps_i)}, {"delta_i", std::move(c.delta_i)}};
    return r;
}

BoundReport boundary_bounds(const MapSpec& map, const NoiseSpec& noise, const RegimeAnalysis& regime,
                            double x0) {
    require_in_domain(regime, x0);
    const auto C = noise.density_ceiling();
    if (!C) throw PreconditionError("boundary bounds: density ceiling unknown");
    const double l = regime.l;
    const double Fx0 = map.F(x0);
    auto r = make_report(x0, l, BoundMethod::boundary);
    r.constants["C"] = *C;

    if (x0 > regime.u_l) {
        r.persistence_bound = 1.0;
    } else {
        r.persistence_bound = clamp01(1.0 - *C * (regime.u_l - x0 + l - Fx0) / l);
        r.constants["one_step_persist"] = noise.tail_upper((regime.u_l - x0 - Fx0) / l);
    }
    if (regime.v_l) {
        const double v_l = *regime.v_l;
        if (x0 < v_l) {
            r.lowdensity_bound = 1.0;
        } else {
            r.lowdensity_bound = clamp01(1.0 - *C * (x0 - v_l + Fx0 + l) / l);
            r.constants["one_step_low"] = noise.tail_lower((v_l - x0 - Fx0) / l);
        }
    }
    return r;
}

double min_expectation(const NoiseSpec& noise, double l) { return l * noise.mean_positive_part(); }

}  // namespace allee
