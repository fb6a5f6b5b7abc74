#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace ciaf::csv {

struct Row {
  std::size_t line = 0;  // 1-based physical line where the record starts
  std::vector<std::string> fields;
};

/// RFC 4180 reader: comma separator, double-quote quoting with "" escapes,
/// quoted fields may span lines, CRLF or LF line endings.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next record, or nullopt at end of input. Blank lines are skipped.
  /// Throws FormatError on an unterminated quoted field.
  std::optional<Row> next();

 private:
  std::istream& in_;
  std::size_t line_ = 0;
};

std::string quote(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace ciaf::csv
