#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace rfv::csv {

/// 17 significant digits, so every finite double round-trips.
std::string format_double(double value);

/// RFC-4180 quoting: fields with separators, quotes or line breaks are quoted.
std::string quote(std::string_view field);

/// Writes header and rows; numbers with 17 significant digits.
class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  /// Optional provenance line written before the header, prefixed with '#'.
  void comment(std::string_view text);
  void header(const std::vector<std::string>& names);
  void row(const std::vector<std::string>& fields);
  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);

 private:
  std::ostream& out_;
};

/// Parses one CSV record (RFC-4180 quoting, no embedded newlines).
std::vector<std::string> split_record(std::string_view line);

}  // namespace rfv::csv
