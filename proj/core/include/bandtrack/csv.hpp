#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace bandtrack {

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double x);

const char* version_string() noexcept;

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

/// Writes "# bandtrack <version>" followed by "# key=value" lines.
void write_comment_header(std::ostream& os, const ConfigEntries& entries);

/// Comma-separated row writer; fields are written verbatim.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& os) : os_(&os) {}

    void header(const std::vector<std::string>& columns);
    CsvWriter& field(const std::string& s);
    CsvWriter& field(double x);
    CsvWriter& field(std::size_t n);
    void end_row();

private:
    std::ostream* os_;
    bool first_ = true;
};

}  // namespace bandtrack
