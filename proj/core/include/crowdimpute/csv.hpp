#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace crowdimpute::csv {

using Record = std::vector<std::string>;

/// RFC-4180 style reader: comma separated, optional double-quoted fields with
/// "" escapes, CRLF or LF line ends. Blank lines are skipped.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// False at end of input.
  bool next(Record& record);
  /// 1-based physical line where the last record started.
  std::size_t line() const noexcept { return record_line_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t record_line_ = 0;
};

/// Quotes a field when it contains a comma, quote or line break.
std::string quote(std::string_view field);

void write_record(std::ostream& out, const Record& record);

}  // namespace crowdimpute::csv
