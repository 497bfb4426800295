#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace allee {

/// Shortest round-trip decimal form, '.' separator, independent of locale.
/// Non-finite values print as NA.
std::string format_number(double v);
std::string format_number(std::optional<double> v);
std::string format_number(std::optional<std::int64_t> v);

/// RFC 4180 quoting: fields containing a comma, quote or line break are
/// wrapped in quotes with inner quotes doubled.
std::string csv_quote(std::string_view field);

class CsvWriter {
public:
    CsvWriter(std::ostream& out, std::vector<std::string> columns);

    /// Writes one record; the field count must match the header.
    void row(const std::vector<std::string>& fields);
    std::size_t columns() const { return columns_.size(); }

private:
    void write(const std::vector<std::string>& fields);

    std::ostream& out_;
    std::vector<std::string> columns_;
};

}  // namespace allee
