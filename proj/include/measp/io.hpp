// Small I/O helpers shared by the CSV readers/writers and the CLI.
#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace measp {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
/// Strict parse of a whole field; throws std::invalid_argument.
double      parse_double(std::string_view s);

std::vector<std::string> split_csv_line(std::string_view line);
/// Reads the next non-empty line (CR stripped); false at EOF.
bool read_line(std::istream& in, std::string& line);

/// Rejects fields that cannot be written to a plain CSV cell.
void check_csv_field(std::string_view field);

/// Writes via a temporary sibling file and rename(2).
void write_file_atomic(const std::string& path, const std::function<void(std::ostream&)>& writer);

std::string read_file(const std::string& path);

/// Scratch directory: $MEASP_TMPDIR, else the system temp directory.
std::string scratch_dir();

} // namespace measp
