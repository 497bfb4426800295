#include "allee/noise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>
#include <fmt/format.h>

#include "allee/error.hpp"
#include "allee/quadrature.hpp"

namespace allee {

namespace {

constexpr double kQuadTol = 1e-10;

}  // namespace

NoiseSpec NoiseSpec::uniform() {
    NoiseSpec n;
    n.kind_ = Kind::uniform;
    n.floor_ = 0.5;
    n.ceiling_ = 0.5;
    return n;
}

NoiseSpec NoiseSpec::truncated_normal(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw PreconditionError(fmt::format("truncated normal: sigma = {} must be positive", sigma));
    NoiseSpec n;
    n.kind_ = Kind::truncated_normal;
    n.sigma_ = sigma;
    n.erf_edge_ = std::erf(1.0 / (sigma * std::numbers::sqrt2));
    n.norm_ = sigma * std::sqrt(2.0 * std::numbers::pi) * n.erf_edge_;
    n.floor_ = n.density(1.0);
    n.ceiling_ = n.density(0.0);
    return n;
}

NoiseSpec NoiseSpec::triangular() {
    NoiseSpec n;
    n.kind_ = Kind::triangular;
    n.floor_ = 0.0;
    n.ceiling_ = 1.0;
    return n;
}

NoiseSpec NoiseSpec::table(std::vector<double> xs, std::vector<double> density) {
    if (xs.size() != density.size() || xs.size() < 2)
        throw ParseError("noise table: need at least two (x, phi) rows");
    constexpr double snap = 1e-9;
    if (std::abs(xs.front() + 1.0) > snap || std::abs(xs.back() - 1.0) > snap)
        throw ParseError("noise table: grid must run from -1 to 1");
    xs.front() = -1.0;
    xs.back() = 1.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(density[i]) || density[i] < 0.0)
            throw ParseError(fmt::format("noise table: invalid row {}", i));
        if (i > 0 && !(xs[i] > xs[i - 1]))
            throw ParseError(fmt::format("noise table: x not strictly increasing at row {}", i));
        if (i > 0 && i + 1 < xs.size() && !(density[i] > 0.0))
            throw ParseError(fmt::format("noise table: density must be positive inside (-1,1), row {}", i));
    }
    const double mass = trapezoid(xs, density);
    if (!(mass > 0.0)) throw ParseError("noise table: zero total mass");

    NoiseSpec n;
    n.kind_ = Kind::table;
    n.xs_ = std::move(xs);
    n.ys_ = std::move(density);
    for (auto& y : n.ys_) y /= mass;
    n.cum_.assign(n.xs_.size(), 0.0);
    for (std::size_t i = 1; i < n.xs_.size(); ++i)
        n.cum_[i] = n.cum_[i - 1] + 0.5 * (n.ys_[i] + n.ys_[i - 1]) * (n.xs_[i] - n.xs_[i - 1]);
    n.floor_ = *std::min_element(n.ys_.begin(), n.ys_.end());
    n.ceiling_ = *std::max_element(n.ys_.begin(), n.ys_.end());
    n.source_ = "table";
    return n;
}

NoiseSpec NoiseSpec::table_from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(fmt::format("cannot open noise table '{}'", path.string()));
    std::vector<double> xs, ys;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double x = 0.0, y = 0.0;
        if (!(ls >> x)) continue;
        std::string extra;
        if (!(ls >> y) || (ls >> extra))
            throw ParseError(
                fmt::format("noise table '{}': line {} needs two columns", path.string(), lineno));
        xs.push_back(x);
        ys.push_back(y);
    }
    NoiseSpec n = table(std::move(xs), std::move(ys));
    n.source_ = path.string();
    return n;
}

NoiseSpec NoiseSpec::parse(std::string_view spec) {
    if (spec == "uniform") return uniform();
    if (spec == "triangular") return triangular();
    if (spec.starts_with("tnormal:")) {
        const std::string tail(spec.substr(8));
        double sigma = 0.0;
        try {
            std::size_t used = 0;
            sigma = std::stod(tail, &used);
            if (used != tail.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ParseError(fmt::format("noise '{}': bad sigma", spec));
        }
        return truncated_normal(sigma);
    }
    if (spec.starts_with("table:")) return table_from_file(std::string(spec.substr(6)));
    throw ParseError(fmt::format("unknown noise '{}' (uniform|tnormal:<sigma>|triangular|table:<file>)", spec));
}

std::string NoiseSpec::describe() const {
    switch (kind_) {
        case Kind::uniform: return "uniform";
        case Kind::truncated_normal: return fmt::format("tnormal:{}", sigma_);
        case Kind::triangular: return "triangular";
        case Kind::table: return fmt::format("table:{}", source_);
    }
    return "?";
}

double NoiseSpec::density(double x) const {
    if (x < -1.0 || x > 1.0) return 0.0;
    switch (kind_) {
        case Kind::uniform: return 0.5;
        case Kind::truncated_normal: return std::exp(-0.5 * x * x / (sigma_ * sigma_)) / norm_;
        case Kind::triangular: return 1.0 - std::abs(x);
        case Kind::table: {
            const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
            if (it == xs_.end()) return ys_.back();
            const auto i = static_cast<std::size_t>(it - xs_.begin()) - 1;
            const double w = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
            return ys_[i] + w * (ys_[i + 1] - ys_[i]);
        }
    }
    return 0.0;
}

double NoiseSpec::cdf(double t) const {
    if (t <= -1.0) return 0.0;
    if (t >= 1.0) return 1.0;
    switch (kind_) {
        case Kind::uniform: return 0.5 * (t + 1.0);
        case Kind::truncated_normal:
            return 0.5 * (std::erf(t / (sigma_ * std::numbers::sqrt2)) + erf_edge_) / erf_edge_;
        case Kind::triangular: return t <= 0.0 ? 0.5 * (1.0 + t) * (1.0 + t) : 1.0 - 0.5 * (1.0 - t) * (1.0 - t);
        case Kind::table: {
            const auto it = std::upper_bound(xs_.begin(), xs_.end(), t);
            const auto i = static_cast<std::size_t>(it - xs_.begin()) - 1;
            const double d = t - xs_[i];
            const double slope = (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
            return cum_[i] + ys_[i] * d + 0.5 * slope * d * d;
        }
    }
    return 0.0;
}

double NoiseSpec::tail_upper(double t) const {
    if (t <= -1.0) return 1.0;
    if (t >= 1.0) return 0.0;
    switch (kind_) {
        case Kind::uniform: return 0.5 * (1.0 - t);
        case Kind::truncated_normal:
            return 0.5 * (erf_edge_ - std::erf(t / (sigma_ * std::numbers::sqrt2))) / erf_edge_;
        case Kind::triangular: return t >= 0.0 ? 0.5 * (1.0 - t) * (1.0 - t) : 1.0 - 0.5 * (1.0 + t) * (1.0 + t);
        case Kind::table: return 1.0 - cdf(t);
    }
    return 0.0;
}

double NoiseSpec::tail_lower(double t) const { return cdf(t); }

double NoiseSpec::integrate(double lo, double hi) const {
    lo = std::max(lo, -1.0);
    hi = std::min(hi, 1.0);
    if (!(lo < hi)) return 0.0;
    std::vector<double> cuts{lo};
    if (kind_ == Kind::triangular && lo < 0.0 && hi > 0.0) cuts.push_back(0.0);
    if (kind_ == Kind::table)
        for (double x : xs_)
            if (x > lo && x < hi) cuts.push_back(x);
    cuts.push_back(hi);
    double total = 0.0;
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        const auto r = adaptive_simpson([this](double x) { return density(x); }, cuts[i - 1], cuts[i],
                                        kQuadTol / static_cast<double>(cuts.size()));
        if (!r.converged) throw QuadratureError("density quadrature did not converge");
        total += r.value;
    }
    return total;
}

double NoiseSpec::mean_positive_part() const {
    if (kind_ == Kind::table) {
        std::vector<double> xs{0.0};
        std::vector<double> ys{0.0};
        for (std::size_t i = 0; i < xs_.size(); ++i) {
            if (xs_[i] <= 0.0) continue;
            xs.push_back(xs_[i]);
            ys.push_back(xs_[i] * ys_[i]);
        }
        return trapezoid(xs, ys);
    }
    const auto r = adaptive_simpson([this](double x) { return x * density(x); }, 0.0, 1.0, kQuadTol);
    if (!r.converged) throw QuadratureError("mean_positive_part: quadrature did not converge");
    return r.value;
}

double NoiseSpec::inverse_cdf(double u) const {
    u = std::clamp(u, 0.0, 1.0);
    double x = 0.0;
    switch (kind_) {
        case Kind::uniform: x = 2.0 * u - 1.0; break;
        case Kind::truncated_normal: {
            const double arg = (2.0 * u - 1.0) * erf_edge_;
            if (arg <= -1.0) return -1.0;
            if (arg >= 1.0) return 1.0;
            x = sigma_ * std::numbers::sqrt2 * boost::math::erf_inv(arg);
            break;
        }
        case Kind::triangular:
            x = u <= 0.5 ? std::sqrt(2.0 * u) - 1.0 : 1.0 - std::sqrt(2.0 * (1.0 - u));
            break;
        case Kind::table: {
            const double target = u * cum_.back();
            auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
            if (it == cum_.end()) return 1.0;
            const auto i = static_cast<std::size_t>(it - cum_.begin()) - 1;
            const double rem = target - cum_[i];
            const double width = xs_[i + 1] - xs_[i];
            const double slope = (ys_[i + 1] - ys_[i]) / width;
            // y_i d + slope d^2 / 2 = rem, stable root
            const double disc = std::max(ys_[i] * ys_[i] + 2.0 * slope * rem, 0.0);
            const double denom = ys_[i] + std::sqrt(disc);
            const double d = denom > 0.0 ? 2.0 * rem / denom : 0.0;
            x = xs_[i] + std::clamp(d, 0.0, width);
            break;
        }
    }
    return std::clamp(x, -1.0, 1.0);
}

}  // namespace allee
