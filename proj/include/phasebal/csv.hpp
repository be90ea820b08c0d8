#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace phasebal::csv {

// Splits one line on commas and trims surrounding blanks of every field.
std::vector<std::string> split(std::string_view line);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

// Shortest text that parses back to exactly the same double.
std::string format_double(double value);

// Reads lines, skipping blank ones; tracks 1-based line numbers.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}
  bool next(std::string& line);
  std::size_t line_number() const noexcept { return line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

}  // namespace phasebal::csv
