#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "allee/expr.hpp"

namespace allee {

/// One piece of a piecewise map, active on (lo, hi]. The first piece of a
/// map also owns its left endpoint 0. `hi` may be +infinity.
struct Piece {
    double lo;
    double hi;
    Expr expr;
};

/// A continuous population map f on [0, x_max].
///
/// Built-in maps carry both an expression-tree definition and a direct
/// evaluator; `f` uses the direct one, `eval_tree` the tree. User maps have
/// only the tree.
///
/// Textual format (one piece per line, '#' starts a comment):
///
///     piece <lo> <hi> <expr>
///
/// `hi` may be `inf`. Pieces must start at 0 and be contiguous.
class MapSpec {
public:
    static MapSpec builtin(std::string_view id);
    static MapSpec piecewise(std::vector<Piece> pieces, std::string name = "user");
    static MapSpec parse(std::string_view text, std::string name = "user");
    static MapSpec from_file(const std::filesystem::path& path);

    static std::vector<std::string> builtin_ids();

    const std::string& name() const { return name_; }
    bool is_builtin() const { return builtin_ != Builtin::none; }
    std::span<const Piece> pieces() const { return pieces_; }
    double domain_max() const { return pieces_.back().hi; }
    std::vector<double> breakpoints() const;

    /// f(x). Throws DomainError for x < 0 or beyond the last piece, and
    /// EvaluationError for a non-finite or negative result.
    double f(double x) const;
    /// F(x) = f(x) - x.
    double F(double x) const { return f(x) - x; }
    /// f(x) through the expression tree, bypassing any direct evaluator.
    double eval_tree(double x) const;

private:
    enum class Builtin { none, boukal_burgman, boukal_hop, demo_4_3, demo_4_4, sine };

    MapSpec() = default;
    double direct(double x) const;
    const Piece& piece_for(double x) const;

    std::string name_;
    std::vector<Piece> pieces_;
    Builtin builtin_ = Builtin::none;
    std::array<double, 3> params_{};
};

inline double eval_f(const MapSpec& map, double x) { return map.f(x); }
inline double eval_F(const MapSpec& map, double x) { return map.F(x); }

struct Window {
    double a;
    double H;
};

/// Structural constants of a configuration: the persistence interval (a, H),
/// an optional Allee-zone point b1 and optional multistability windows.
struct StructuralParams {
    double a;
    double H;
    std::optional<double> b1;
    std::vector<Window> windows;
};

struct ConditionCheck {
    std::string name;
    bool passed;
    // Smallest value of the condition's margin (positive means satisfied).
    double margin;
    // Grid point where the margin is smallest.
    std::optional<double> witness;
};

struct ValidationReport {
    std::vector<ConditionCheck> checks;
    std::size_t grid_resolution;

    bool all_passed() const;
    const ConditionCheck* find(std::string_view name) const;
};

/// Checks the structural assumptions on a uniform grid with one level of
/// 100x refinement around any point whose margin is below 1e-3.
///
/// Condition names: `f(0)=0`, `f>0 on (0,H]`, `fH<H`, `f(a)>a`,
/// `f(x)>f(a) on (a,H]`, and when `b1` is set `f(x)<x on (0,b1)`,
/// `f(x)<=f(b1) on (0,b1)`. Window i adds `window[i] ...` entries.
ValidationReport validate_assumptions(const MapSpec& map, const StructuralParams& params,
                                      std::size_t grid_resolution = 10001);

}  // namespace allee
