#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "allee/error.hpp"
#include "allee/noise.hpp"

using allee::NoiseSpec;

namespace {

// Independent oracle: composite midpoint rule on a fine grid.
template <class Fn>
double midpoint(Fn f, double lo, double hi, int n = 200000) {
    const double h = (hi - lo) / n;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += f(lo + (i + 0.5) * h);
    return s * h;
}

std::vector<NoiseSpec> all_kinds() {
    return {NoiseSpec::uniform(), NoiseSpec::truncated_normal(0.5), NoiseSpec::truncated_normal(3.0),
            NoiseSpec::triangular(),
            NoiseSpec::table({-1.0, -0.5, 0.0, 0.5, 1.0}, {0.2, 0.6, 1.0, 0.6, 0.2})};
}

}  // namespace

TEST_CASE("densities integrate to one") {
    for (const auto& n : all_kinds()) {
        CAPTURE(n.describe());
        CHECK(n.integrate(-1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(midpoint([&](double x) { return n.density(x); }, -1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("closed-form tails match quadrature") {
    for (const auto& n : all_kinds()) {
        for (double t : {-0.95, -0.5, -0.1, 0.0, 0.3, 0.77, 0.99}) {
            CAPTURE(n.describe());
            CAPTURE(t);
            CHECK(n.tail_upper(t) == doctest::Approx(n.integrate(t, 1.0)).epsilon(1e-9));
            CHECK(n.tail_lower(t) == doctest::Approx(n.integrate(-1.0, t)).epsilon(1e-9));
            CHECK(n.tail_upper(t) + n.tail_lower(t) == doctest::Approx(1.0));
        }
        CHECK(n.tail_upper(-1.0) == 1.0);
        CHECK(n.tail_upper(1.0) == 0.0);
        CHECK(n.tail_upper(-3.0) == 1.0);
        CHECK(n.tail_lower(2.0) == 1.0);
        CHECK(n.tail_lower(-1.0) == 0.0);
    }
}

TEST_CASE("uniform tail formula") {
    const auto u = NoiseSpec::uniform();
    for (double t : {-1.0, -0.3, 0.0, 0.4, 1.0}) CHECK(u.tail_upper(t) == doctest::Approx((1 - t) / 2));
}

TEST_CASE("mean of the positive part") {
    CHECK(NoiseSpec::uniform().mean_positive_part() == doctest::Approx(0.25));
    CHECK(NoiseSpec::triangular().mean_positive_part() == doctest::Approx(1.0 / 6));
    const auto tn = NoiseSpec::truncated_normal(0.5);
    const double oracle = midpoint([&](double x) { return x * tn.density(x); }, 0.0, 1.0);
    CHECK(tn.mean_positive_part() == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("density floor and ceiling") {
    CHECK(*NoiseSpec::uniform().density_floor() == 0.5);
    CHECK(*NoiseSpec::uniform().density_ceiling() == 0.5);
    CHECK(*NoiseSpec::triangular().density_floor() == 0.0);
    const auto tn = NoiseSpec::truncated_normal(0.7);
    for (double x = -1.0; x <= 1.0; x += 0.01) {
        CHECK(tn.density(x) >= *tn.density_floor() - 1e-15);
        CHECK(tn.density(x) <= *tn.density_ceiling() + 1e-15);
    }
}

TEST_CASE("inverse CDF inverts the CDF") {
    for (const auto& n : all_kinds()) {
        for (double u = 0.001; u < 1.0; u += 0.0371) {
            CAPTURE(n.describe());
            CAPTURE(u);
            CHECK(n.cdf(n.inverse_cdf(u)) == doctest::Approx(u).epsilon(1e-9));
        }
    }
}

TEST_CASE("samples follow the distribution") {
    for (const auto& n : all_kinds()) {
        allee::RngState rng(2024, 1);
        constexpr int draws = 100000;
        int below = 0;
        for (int i = 0; i < draws; ++i) {
            const double x = n.sample(rng);
            REQUIRE(x >= -1.0);
            REQUIRE(x <= 1.0);
            if (x < 0.3) ++below;
        }
        CHECK(rng.draws() == draws);
        const double p = n.cdf(0.3);
        CAPTURE(n.describe());
        CHECK(std::abs(static_cast<double>(below) / draws - p) < 5 * std::sqrt(p * (1 - p) / draws));
    }
}

TEST_CASE("parse and table files") {
    CHECK(NoiseSpec::parse("uniform").kind() == NoiseSpec::Kind::uniform);
    CHECK(NoiseSpec::parse("tnormal:0.5").describe() == "tnormal:0.5");
    CHECK(NoiseSpec::parse("triangular").kind() == NoiseSpec::Kind::triangular);
    CHECK_THROWS_AS(NoiseSpec::parse("gauss"), allee::ParseError);
    CHECK_THROWS_AS(NoiseSpec::parse("tnormal:abc"), allee::ParseError);
    CHECK_THROWS_AS(NoiseSpec::parse("tnormal:-1"), allee::PreconditionError);

    const auto dir = std::filesystem::temp_directory_path();
    const auto good = dir / "allee_noise_good.txt";
    std::ofstream(good) << "# x phi\n-1, 1\n0 1\n1 1\n";
    const auto t = NoiseSpec::parse("table:" + good.string());
    CHECK(t.density(0.2) == doctest::Approx(0.5));
    CHECK(t.tail_upper(0.0) == doctest::Approx(0.5));

    const auto bad = dir / "allee_noise_bad.txt";
    std::ofstream(bad) << "-1 1\n0.5 1 2\n1 1\n";
    CHECK_THROWS_AS(NoiseSpec::parse("table:" + bad.string()), allee::ParseError);
    CHECK_THROWS_AS(NoiseSpec::table({-1.0, 0.5}, {1.0, 1.0}), allee::ParseError);
    CHECK_THROWS_AS(NoiseSpec::table({-1.0, 0.0, 1.0}, {1.0, 0.0, 1.0}), allee::ParseError);
    CHECK_THROWS_AS(NoiseSpec::parse("table:/nonexistent/file"), allee::ParseError);
}
