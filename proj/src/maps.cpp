#include "allee/maps.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <utility>

#include <fmt/format.h>

#include "allee/error.hpp"

namespace allee {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = std::numbers::pi;

double parse_bound(std::string_view token, std::string_view line) {
    if (token == "inf" || token == "+inf") return kInf;
    try {
        std::size_t used = 0;
        const double v = std::stod(std::string(token), &used);
        if (used != token.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw ParseError(fmt::format("map definition: bad bound '{}' in line '{}'", token, line));
    }
}

std::vector<double> parse_params(std::string_view rest, std::size_t count, std::string_view id) {
    std::vector<double> out;
    while (!rest.empty()) {
        const auto colon = rest.find(':');
        const auto tok = rest.substr(0, colon);
        try {
            std::size_t used = 0;
            out.push_back(std::stod(std::string(tok), &used));
            if (used != tok.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ParseError(fmt::format("map '{}': bad parameter '{}'", id, tok));
        }
        if (colon == std::string_view::npos) break;
        rest.remove_prefix(colon + 1);
    }
    if (out.size() != count)
        throw ParseError(fmt::format("map '{}': expected {} parameters", id, count));
    return out;
}

}  // namespace

std::vector<std::string> MapSpec::builtin_ids() {
    return {"boukal-burgman", "boukal-hop", "demo-4-3", "demo-4-4",
            "sine",           "example-6-1", "example-6-2"};
}

MapSpec MapSpec::builtin(std::string_view id) {
    MapSpec m;
    m.name_ = std::string(id);
    const auto colon = id.find(':');
    const std::string_view base = id.substr(0, colon);
    const std::string_view rest = colon == std::string_view::npos ? "" : id.substr(colon + 1);

    auto set_params = [&](std::array<double, 3> defaults) {
        if (rest.empty()) {
            m.params_ = defaults;
        } else {
            const auto p = parse_params(rest, 3, id);
            m.params_ = {p[0], p[1], p[2]};
        }
    };
    auto one = [](std::string_view text) {
        return std::vector<Piece>{Piece{0.0, kInf, Expr::parse(text)}};
    };

    if (base == "boukal-burgman" || (base == "example-6-2" && rest.empty())) {
        // A x^2 / (B + x) * exp(r (1 - x))
        m.builtin_ = Builtin::boukal_burgman;
        set_params({4.0, 2.0, 2.0});
        const auto [A, B, r] = m.params_;
        m.pieces_ = one(fmt::format("{}*x^2/({}+x)*exp({}*(1-x))", A, B, r));
    } else if (base == "boukal-hop" || (base == "example-6-1" && rest.empty())) {
        // A x / (B + (x - T)^2)
        m.builtin_ = Builtin::boukal_hop;
        set_params({4.0, 2.0, 3.0});
        const auto [A, B, T] = m.params_;
        m.pieces_ = one(fmt::format("{}*x/({}+(x-{})^2)", A, B, T));
    } else if (base == "demo-4-3" && rest.empty()) {
        m.builtin_ = Builtin::demo_4_3;
        m.pieces_ = {
            Piece{0.0, 1.0, Expr::parse("3*x/(3+(x-2)^2)")},
            Piece{1.0, 5.0, Expr::parse("x - sin(pi*(x-1)) - 1/4")},
            Piece{5.0, kInf, Expr::parse("8.55*x/(8+(x-6)^2)")},
        };
    } else if (base == "demo-4-4" && rest.empty()) {
        m.builtin_ = Builtin::demo_4_4;
        m.pieces_ = {
            Piece{0.0, 2.0, Expr::parse("16*x/(15+(x-3)^2)")},
            Piece{2.0, 12.0, Expr::parse("x - sin(pi/2*x)/(4*x)")},
            Piece{12.0, kInf, Expr::parse("(x-10)/(1+(x-13)^2) + 11")},
        };
    } else if (base == "sine" && rest.empty()) {
        m.builtin_ = Builtin::sine;
        m.pieces_ = one("x - sin(x)");
    } else {
        throw ParseError(fmt::format("unknown map id '{}'", id));
    }
    return m;
}

MapSpec MapSpec::piecewise(std::vector<Piece> pieces, std::string name) {
    if (pieces.empty()) throw ParseError("map definition: no pieces");
    if (pieces.front().lo != 0.0) throw ParseError("map definition: first piece must start at 0");
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const auto& p = pieces[i];
        if (!(p.hi > p.lo)) throw ParseError(fmt::format("map definition: piece {} is empty", i));
        if (i + 1 < pieces.size() && pieces[i + 1].lo != p.hi)
            throw ParseError(
                fmt::format("map definition: gap or overlap between pieces {} and {}", i, i + 1));
        if (std::isinf(p.hi) && i + 1 != pieces.size())
            throw ParseError("map definition: only the last piece may extend to inf");
    }
    MapSpec m;
    m.name_ = std::move(name);
    m.pieces_ = std::move(pieces);
    return m;
}

MapSpec MapSpec::parse(std::string_view text, std::string name) {
    std::vector<Piece> pieces;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string keyword, lo, hi;
        if (!(ls >> keyword)) continue;
        if (keyword != "piece")
            throw ParseError(fmt::format("map definition: expected 'piece', got '{}'", keyword));
        if (!(ls >> lo >> hi))
            throw ParseError(fmt::format("map definition: incomplete line '{}'", line));
        std::string expr;
        std::getline(ls, expr);
        if (expr.find_first_not_of(" \t\r") == std::string::npos)
            throw ParseError(fmt::format("map definition: missing expression in '{}'", line));
        pieces.push_back(Piece{parse_bound(lo, line), parse_bound(hi, line), Expr::parse(expr)});
    }
    return piecewise(std::move(pieces), std::move(name));
}

MapSpec MapSpec::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(fmt::format("cannot open map file '{}'", path.string()));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.filename().string());
}

std::vector<double> MapSpec::breakpoints() const {
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < pieces_.size(); ++i) out.push_back(pieces_[i].hi);
    return out;
}

const Piece& MapSpec::piece_for(double x) const {
    for (const auto& p : pieces_)
        if (x <= p.hi) return p;
    throw DomainError(fmt::format("map '{}': x = {} beyond domain end {}", name_, x, domain_max()));
}

double MapSpec::direct(double x) const {
    switch (builtin_) {
        case Builtin::boukal_burgman: {
            const auto [A, B, r] = params_;
            return A * x * x / (B + x) * std::exp(r * (1.0 - x));
        }
        case Builtin::boukal_hop: {
            const auto [A, B, T] = params_;
            return A * x / (B + (x - T) * (x - T));
        }
        case Builtin::demo_4_3:
            if (x <= 1.0) return 3.0 * x / (3.0 + (x - 2.0) * (x - 2.0));
            if (x <= 5.0) return x - std::sin(kPi * (x - 1.0)) - 0.25;
            return 8.55 * x / (8.0 + (x - 6.0) * (x - 6.0));
        case Builtin::demo_4_4:
            if (x <= 2.0) return 16.0 * x / (15.0 + (x - 3.0) * (x - 3.0));
            if (x <= 12.0) return x - std::sin(kPi / 2.0 * x) / (4.0 * x);
            return (x - 10.0) / (1.0 + (x - 13.0) * (x - 13.0)) + 11.0;
        case Builtin::sine:
            return x - std::sin(x);
        case Builtin::none:
            break;
    }
    return eval_tree(x);
}

double MapSpec::eval_tree(double x) const {
    if (!(x >= 0.0)) throw DomainError(fmt::format("map '{}': x = {} is negative", name_, x));
    return piece_for(x).expr(x);
}

double MapSpec::f(double x) const {
    if (!(x >= 0.0)) throw DomainError(fmt::format("map '{}': x = {} is negative", name_, x));
    if (x > domain_max())
        throw DomainError(fmt::format("map '{}': x = {} beyond domain end {}", name_, x, domain_max()));
    const double y = is_builtin() ? direct(x) : eval_tree(x);
    if (!std::isfinite(y) || y < 0.0) {
        // sin(k pi) leaves rounding residue of order 1e-16 at piece boundaries
        if (std::isfinite(y) && y > -1e-12) return 0.0;
        throw EvaluationError(fmt::format("map '{}': f({}) = {} is not a finite non-negative value",
                                          name_, x, y));
    }
    return y;
}

// ---------------------------------------------------------------------------
// Assumption validation
// ---------------------------------------------------------------------------

bool ValidationReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const ConditionCheck* ValidationReport::find(std::string_view name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

namespace {

struct MarginScan {
    double margin;
    double witness;
};

// Minimum of `margin(x)` over a uniform grid on [lo, hi] (endpoints optionally
// excluded), then over a 100x finer grid spanning the two cells around the
// witness whenever the minimum falls below 1e-3.
template <class Margin>
MarginScan scan_margin(Margin&& margin, double lo, double hi, std::size_t n, bool open_lo,
                       bool open_hi) {
    MarginScan best{std::numeric_limits<double>::infinity(), lo};
    const double h = (hi - lo) / static_cast<double>(n - 1);
    auto visit = [&](double x) {
        if ((open_lo && x <= lo) || (open_hi && x >= hi) || x < lo || x > hi) return;
        const double m = margin(x);
        if (m < best.margin) best = {m, x};
    };
    for (std::size_t i = 0; i < n; ++i) visit(lo + h * static_cast<double>(i));
    if (best.margin < 1e-3) {
        const double center = best.witness;
        const double fine = h / 100.0;
        for (int k = -100; k <= 100; ++k) visit(center + fine * k);
    }
    return best;
}

}  // namespace

ValidationReport validate_assumptions(const MapSpec& map, const StructuralParams& params,
                                      std::size_t grid_resolution) {
    ValidationReport report{{}, grid_resolution};
    const std::size_t n = std::max<std::size_t>(grid_resolution, 3);
    auto& out = report.checks;

    auto add = [&](std::string name, double margin, std::optional<double> witness, bool strict) {
        const bool ok = strict ? margin > 0.0 : margin >= -1e-12;
        out.push_back(ConditionCheck{std::move(name), ok, margin, witness});
    };

    const double a = params.a;
    const double H = params.H;
    if (!(a > 0.0 && a < H)) {
        add("0<a<H", std::min(a, H - a), std::nullopt, true);
        return report;
    }
    double top = H;
    if (params.b1) top = std::max(top, *params.b1);
    for (const auto& w : params.windows) top = std::max(top, w.H);
    if (top > map.domain_max()) {
        add("domain covers [0,H]", map.domain_max() - top, map.domain_max(), false);
        return report;
    }

    try {
        add("f(0)=0", -std::abs(map.f(0.0)), 0.0, false);

        const auto pos = scan_margin([&](double x) { return map.f(x); }, 0.0, H, n, true, false);
        add("f>0 on (0,H]", pos.margin, pos.witness, true);

        const auto top_scan =
            scan_margin([&](double x) { return H - map.f(x); }, 0.0, H, n, false, false);
        add("fH<H", top_scan.margin, top_scan.witness, true);

        const double fa = map.f(a);
        add("f(a)>a", fa - a, a, true);

        const auto above =
            scan_margin([&](double x) { return map.f(x) - fa; }, a, H, n, true, false);
        add("f(x)>f(a) on (a,H]", above.margin, above.witness, true);

        if (params.b1) {
            const double b1 = *params.b1;
            const auto below =
                scan_margin([&](double x) { return x - map.f(x); }, 0.0, b1, n, true, true);
            add("f(x)<x on (0,b1)", below.margin, below.witness, true);
            const double fb1 = map.f(b1);
            const auto capped =
                scan_margin([&](double x) { return fb1 - map.f(x); }, 0.0, b1, n, true, true);
            add("f(x)<=f(b1) on (0,b1)", capped.margin, capped.witness, false);
        }

        for (std::size_t i = 0; i < params.windows.size(); ++i) {
            const auto [ai, Hi] = params.windows[i];
            const std::string tag = fmt::format("window[{}] ", i);
            if (!(ai > 0.0 && ai < Hi)) {
                add(tag + "0<a_i<H_i", std::min(ai, Hi - ai), std::nullopt, true);
                continue;
            }
            const auto wmax =
                scan_margin([&](double x) { return Hi - map.f(x); }, 0.0, Hi, n, true, true);
            add(tag + "f_i<H_i", wmax.margin, wmax.witness, true);
            const double fai = map.f(ai);
            add(tag + "f(a_i)>a_i", fai - ai, ai, true);
            const auto wabove =
                scan_margin([&](double x) { return map.f(x) - fai; }, ai, Hi, n, true, false);
            add(tag + "f(x)>f(a_i) on (a_i,H_i]", wabove.margin, wabove.witness, true);
            if (i + 1 < params.windows.size())
                add(tag + "H_i<a_{i+1}", params.windows[i + 1].a - Hi, Hi, true);
        }
    } catch (const std::exception& e) {
        out.push_back(ConditionCheck{fmt::format("evaluation: {}", e.what()), false,
                                     -std::numeric_limits<double>::infinity(), std::nullopt});
    }
    return report;
}

}  // namespace allee
