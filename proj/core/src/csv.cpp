#include "bandtrack/csv.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#ifndef BANDTRACK_VERSION_STRING
#define BANDTRACK_VERSION_STRING "unknown"
#endif

namespace bandtrack {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

const char* version_string() noexcept { return BANDTRACK_VERSION_STRING; }

void write_comment_header(std::ostream& os, const ConfigEntries& entries) {
    os << "# bandtrack " << version_string() << '\n';
    for (const auto& [k, v] : entries) os << "# " << k << '=' << v << '\n';
}

void CsvWriter::header(const std::vector<std::string>& columns) {
    for (const auto& c : columns) field(c);
    end_row();
}

CsvWriter& CsvWriter::field(const std::string& s) {
    if (!first_) *os_ << ',';
    *os_ << s;
    first_ = false;
    return *this;
}

CsvWriter& CsvWriter::field(double x) { return field(format_double(x)); }

CsvWriter& CsvWriter::field(std::size_t n) { return field(std::to_string(n)); }

void CsvWriter::end_row() {
    *os_ << '\n';
    first_ = true;
}

}  // namespace bandtrack
