#include "allee/csv.hpp"

#include <cmath>

#include <fmt/format.h>

#include "allee/error.hpp"

namespace allee {

std::string format_number(double v) {
    if (!std::isfinite(v)) return "NA";
    return fmt::format("{}", v);
}

std::string format_number(std::optional<double> v) { return v ? format_number(*v) : "NA"; }

std::string format_number(std::optional<std::int64_t> v) { return v ? fmt::format("{}", *v) : "NA"; }

std::string csv_quote(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> columns)
    : out_(out), columns_(std::move(columns)) {
    write(columns_);
}

void CsvWriter::row(const std::vector<std::string>& fields) {
    if (fields.size() != columns_.size())
        throw PreconditionError(fmt::format("csv row has {} fields, header has {}", fields.size(), columns_.size()));
    write(fields);
}

void CsvWriter::write(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << csv_quote(fields[i]);
    }
    out_ << '\n';
}

}  // namespace allee
