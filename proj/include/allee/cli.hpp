#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace allee {

/// Everything a command-line run is determined by.
struct RunConfig {
    std::string command;
    std::string map = "example-6-1";
    std::string map_file;
    std::string noise = "uniform";
    std::optional<double> a;
    std::optional<double> H;
    std::optional<double> b1;
    std::optional<double> l;
    std::optional<double> x0;
    std::string x0_grid;
    std::string l_grid;
    std::optional<std::int64_t> trials;
    std::int64_t n_max = 100000;
    std::uint64_t seed = 1;
    double alpha_frac = 0.5;
    bool tail = false;
    std::string out;

    /// `key = value` lines accepted by --config; the command is written as
    /// a comment.
    std::string to_config_text() const;

    bool operator==(const RunConfig&) const = default;
};

/// Parses argv (without the program name). Throws ParseError on bad input.
RunConfig parse_args(const std::vector<std::string>& args);

/// lo:hi:step, or a single number.
std::vector<double> parse_grid(std::string_view text);

/// Runs a command. Exit codes: 0 success, 1 invalid input, 2 a
/// verification verdict of FAIL.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace allee
