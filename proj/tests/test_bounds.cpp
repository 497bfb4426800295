#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "allee/bounds.hpp"
#include "allee/error.hpp"
#include "oracles.hpp"

using namespace allee;

namespace {

const MapSpec hop = MapSpec::builtin("example-6-1");
const MapSpec burgman = MapSpec::builtin("example-6-2");
const NoiseSpec uni = NoiseSpec::uniform();
const RegimeAnalysis core = analyze(hop, 1.8, 6.5, 0.2);

}  // namespace

TEST_CASE("basic bound with uniform noise") {
    const double x0 = 1.5;
    const auto r = basic_bounds(hop, uni, core, x0);
    const double l = 0.2;
    const double A = oracle::grid_min([](double x) { return hop.F(x); }, x0, core.u_l, 100000).second;
    const double p1 = (l + A) / (4 * l);
    const auto K1 = static_cast<std::int64_t>(std::floor(2 * (core.u_l - x0) / (l + A))) + 1;
    REQUIRE(r.K1);
    CHECK(*r.K1 == K1);
    CHECK(*r.persistence_bound == doctest::Approx(std::pow(p1, K1)).epsilon(1e-6));
    const double B = oracle::grid_max([](double x) { return hop.F(x); }, *core.v_l, x0, 100000).second;
    const double p2 = (l - B) / (4 * l);
    const auto K2 = static_cast<std::int64_t>(std::floor(2 * (x0 - *core.v_l) / (l - B))) + 1;
    CHECK(*r.K2 == K2);
    CHECK(*r.lowdensity_bound == doctest::Approx(std::pow(p2, K2)).epsilon(1e-6));
}

TEST_CASE("basic bound edge cases") {
    const auto at_u = basic_bounds(hop, uni, core, core.u_l);
    CHECK(*at_u.K1 == 1);
    CHECK(*at_u.persistence_bound == doctest::Approx(at_u.constants.at("p1")));
    const auto above = basic_bounds(hop, uni, core, 3.0);
    CHECK(*above.persistence_bound == 1.0);
    const auto below = basic_bounds(hop, uni, core, 0.5);
    CHECK(*below.lowdensity_bound == 1.0);
    CHECK_FALSE(below.persistence_bound);
    CHECK_FALSE(above.lowdensity_bound);
    CHECK_THROWS_AS(basic_bounds(hop, uni, core, -0.1), DomainError);
    CHECK_THROWS_AS(basic_bounds(hop, uni, core, 7.0), DomainError);
}

TEST_CASE("improved bound with uniform noise") {
    const double x0 = 1.5, l = 0.2;
    const auto r = improved_bounds(hop, uni, core, x0);
    const double eps = (l + hop.F(x0)) / 2;
    const auto K1 = static_cast<std::int64_t>(std::floor((core.u_l - x0) / eps)) + 1;
    double prod = 1.0;
    for (int i = 1; i <= K1; ++i) {
        const double e = (l + 2 * hop.F(x0 + (i - 1) * eps) - hop.F(x0)) / (2 * l);
        prod *= std::min(e, 2.0) / 2;
    }
    CHECK(*r.K1 == K1);
    CHECK(*r.persistence_bound == doctest::Approx(prod).epsilon(1e-10));
    const double delta = (l - hop.F(x0)) / 2;
    const auto K2 = static_cast<std::int64_t>(std::floor((x0 - *core.v_l) / delta)) + 1;
    double prod2 = 1.0;
    for (int i = 1; i <= K2; ++i) {
        const double d = (l - 2 * hop.F(x0 - (i - 1) * delta) + hop.F(x0)) / (2 * l);
        prod2 *= std::min(d, 2.0) / 2;
    }
    CHECK(*r.K2 == K2);
    CHECK(r.sequences.at("mu_i").size() == static_cast<std::size_t>(K2));
    CHECK(*r.lowdensity_bound == doctest::Approx(prod2).epsilon(1e-10));
    const auto& lam = r.sequences.at("lambda_i");
    for (std::size_t i = 1; i < lam.size(); ++i) CHECK(lam[i] >= lam[i - 1]);
}

TEST_CASE("dominance chain on the example-6-1 core") {
    for (int k = 1; k <= 20; ++k) {
        const double x0 = *core.v_l + (core.u_l - *core.v_l) * k / 21.0;
        CAPTURE(x0);
        const auto basic = basic_bounds(hop, uni, core, x0);
        const auto imp = improved_bounds(hop, uni, core, x0);
        const auto eh = explicit_bounds(hop, uni, core, x0, BoundMethod::explicit_h);
        const auto ek = explicit_bounds(hop, uni, core, x0, BoundMethod::explicit_h_kappa);
        const auto eu = explicit_bounds(hop, uni, core, x0, BoundMethod::explicit_uniform);
        for (const auto* r : {&basic, &imp, &eh, &ek, &eu}) {
            CHECK(*r->persistence_bound >= 0.0);
            CHECK(*r->persistence_bound <= 1.0);
            CHECK(*r->lowdensity_bound >= 0.0);
            CHECK(*r->lowdensity_bound <= 1.0);
        }
        CHECK(*basic.persistence_bound <= *imp.persistence_bound * (1 + 1e-12));
        CHECK(*basic.lowdensity_bound <= *imp.lowdensity_bound * (1 + 1e-12));
        CHECK(*eh.persistence_bound <= *imp.persistence_bound * (1 + 1e-12));
        CHECK(*ek.persistence_bound <= *eh.persistence_bound * (1 + 1e-12));
        CHECK(*eh.lowdensity_bound <= *imp.lowdensity_bound * (1 + 1e-12));
        CHECK(*ek.lowdensity_bound <= *eh.lowdensity_bound * (1 + 1e-12));
        CHECK(*eu.persistence_bound == doctest::Approx(*ek.persistence_bound));
    }
}

TEST_CASE("explicit bounds: kappa = 0 collapses the product") {
    const double x0 = 1.5;
    const auto r = explicit_bounds(hop, uni, core, x0, BoundMethod::explicit_h_kappa, 0.5, 0.0);
    const double eps = r.constants.at("eps");
    CHECK(*r.persistence_bound ==
          doctest::Approx(std::pow(0.5 * eps / 0.2, static_cast<double>(*r.K1))).epsilon(1e-12));
    CHECK_THROWS_AS(explicit_bounds(hop, NoiseSpec::triangular(), core, x0, BoundMethod::explicit_h),
                    PreconditionError);
    CHECK_THROWS_AS(explicit_bounds(hop, NoiseSpec::triangular(), core, x0, BoundMethod::explicit_uniform),
                    PreconditionError);
    CHECK_THROWS_AS(explicit_bounds(hop, uni, core, x0, BoundMethod::basic), PreconditionError);
}

TEST_CASE("improved bound preconditions") {
    CHECK_THROWS_AS(improved_bounds(hop, uni, core, 1.0), PreconditionError);
    CHECK_THROWS_AS(improved_bounds(hop, uni, core, 1.8), PreconditionError);
    const MapSpec d44 = MapSpec::builtin("demo-4-4");
    const auto r = analyze(d44, 12.3, 14.5, 0.05);
    CHECK_FALSE(r.F_monotone_on_core);
    CHECK_THROWS_AS(improved_bounds(d44, uni, r, 6.0), PreconditionError);
}

TEST_CASE("uniform-interval bounds") {
    const auto r = uniform_bounds(hop, uni, core, 1.4, 1.7);
    CHECK(*r.persistence_bound > 0.0);
    CHECK(*r.lowdensity_bound > 0.0);
    CHECK(r.constants.at("mixed_zone") == 1.0);
    // The bound at alpha is no larger than the basic bound anywhere in [alpha, u_l].
    for (double x0 : {1.4, 1.5, 1.6, 1.7}) {
        CHECK(*basic_bounds(hop, uni, core, x0).persistence_bound >= *r.persistence_bound * (1 - 1e-12));
    }
    const auto near = uniform_bounds(hop, uni, core, core.u_l - 1e-9, 1.5);
    CHECK(*near.K1 == 1);
    CHECK_THROWS_AS(uniform_bounds(hop, uni, core, 1.0, 1.5), PreconditionError);
    CHECK_THROWS_AS(uniform_bounds(hop, uni, core, 1.5, 1.9), PreconditionError);
}

TEST_CASE("boundary bound tends to one at the thresholds") {
    const auto r = boundary_bounds(hop, uni, core, core.u_l - 1e-4);
    CHECK(*r.persistence_bound > 0.9);
    CHECK(*r.persistence_bound <= r.constants.at("one_step_persist") + 1e-12);
    const auto s = boundary_bounds(hop, uni, core, *core.v_l + 1e-4);
    CHECK(*s.lowdensity_bound > 0.9);
    CHECK(*s.lowdensity_bound <= s.constants.at("one_step_low") + 1e-12);
    const auto mid = boundary_bounds(hop, uni, core, 1.5);
    CHECK(*mid.persistence_bound >= 0.0);
    CHECK_THROWS_AS(boundary_bounds(hop, NoiseSpec::table({-1, 1}, {1, 1}), core, 7.0), DomainError);
}

TEST_CASE("escape bound") {
    const auto s = structural_thresholds(burgman, 0.2, 1.8);
    const auto r = escape_bound(burgman, uni, s, 0.04, 0.5);
    const double delta = 0.5 * (0.04 + s.F_b);
    const double p1 = uni.tail_upper((-s.F_b + delta) / 0.04);
    const auto K = static_cast<std::int64_t>(std::floor(0.2 / delta)) + 1;
    CHECK(*r.K1 == K);
    CHECK(*r.persistence_bound == doctest::Approx(std::pow(p1, K)).epsilon(1e-12));
    CHECK(*r.persistence_bound > 0.0);
    CHECK(std::isnan(r.x0));

    CHECK_THROWS_AS(escape_bound(burgman, uni, s, -s.F_b, 0.5), PreconditionError);
    CHECK_THROWS_AS(escape_bound(burgman, uni, s, 0.01, 0.5), PreconditionError);
    CHECK_THROWS_AS(escape_bound(burgman, uni, s, 0.04, 1.0), PreconditionError);
    // alpha_frac -> 1 pushes the tail threshold to 1: empty tail.
    CHECK(escape_bound(burgman, uni, s, 0.04, 1 - 1e-15).constants.at("p1") < 1e-12);

    double prev = 0.0;
    for (double l = 0.02; l < 0.16; l += 0.01) {
        const double v = *escape_bound(burgman, uni, s, l, 0.5).persistence_bound;
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("minimum expectation") {
    CHECK(min_expectation(uni, 0.2) == doctest::Approx(0.05));
    CHECK(min_expectation(NoiseSpec::triangular(), 0.3) == doctest::Approx(0.05));
    const auto tn = NoiseSpec::truncated_normal(0.5);
    const double h = 1e-5;
    double oracle = 0.0;
    for (double x = h / 2; x < 1.0; x += h) oracle += x * tn.density(x) * h;
    CHECK(min_expectation(tn, 1.0) == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("method names round-trip") {
    for (auto m : {BoundMethod::escape, BoundMethod::basic, BoundMethod::uniform, BoundMethod::improved,
                   BoundMethod::explicit_h, BoundMethod::explicit_h_kappa, BoundMethod::explicit_uniform,
                   BoundMethod::boundary})
        CHECK(parse_bound_method(to_string(m)) == m);
    CHECK_THROWS_AS(parse_bound_method("magic"), ParseError);
}
