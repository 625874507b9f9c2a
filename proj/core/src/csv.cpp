#include "crowdimpute/csv.hpp"

#include <istream>
#include <ostream>

#include "crowdimpute/error.hpp"

namespace crowdimpute::csv {

bool Reader::next(Record& record) {
  record.clear();
  std::string line;
  while (true) {
    if (!std::getline(in_, line)) return false;
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) break;
  }
  record_line_ = line_;

  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  while (true) {
    if (i == line.size()) {
      if (quoted) {
        // Embedded line break inside a quoted field.
        std::string more;
        if (!std::getline(in_, more)) {
          throw ParseError(record_line_, record.size(), "unterminated quoted field");
        }
        ++line_;
        if (!more.empty() && more.back() == '\r') more.pop_back();
        field += '\n';
        line = std::move(more);
        i = 0;
        continue;
      }
      record.push_back(std::move(field));
      return true;
    }
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          i += 2;
          continue;
        }
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"' && field.empty()) {
      quoted = true;
    } else if (ch == ',') {
      record.push_back(std::move(field));
      field.clear();
    } else {
      field += ch;
    }
    ++i;
  }
}

std::string quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

void write_record(std::ostream& out, const Record& record) {
  for (std::size_t i = 0; i < record.size(); ++i) {
    if (i) out << ',';
    out << quote(record[i]);
  }
  out << '\n';
}

}  // namespace crowdimpute::csv
