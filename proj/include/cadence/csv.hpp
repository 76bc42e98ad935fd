#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace cadence {

/// Streaming CSV reader: comma separation, double-quote escaping (embedded
/// quotes doubled), quoted fields may contain commas and newlines, CRLF and
/// LF both accepted. line() is the 1-based line the current row started on.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string>& fields) {
    fields.clear();
    int ch = in_.get();
    if (ch == std::istream::traits_type::eof()) return false;
    row_start_line_ = line_;
    std::string field;
    bool quoted = false;
    for (;;) {
      if (ch == std::istream::traits_type::eof()) {
        fields.push_back(std::move(field));
        return true;
      }
      const char c = static_cast<char>(ch);
      if (quoted) {
        if (c == '"') {
          if (in_.peek() == '"') {
            field += '"';
            in_.get();
          } else {
            quoted = false;
          }
        } else {
          if (c == '\n') ++line_;
          field += c;
        }
      } else if (c == '"' && field.empty()) {
        quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
      } else if (c == '\n') {
        ++line_;
        if (!field.empty() && field.back() == '\r') field.pop_back();
        fields.push_back(std::move(field));
        return true;
      } else {
        field += c;
      }
      ch = in_.get();
    }
  }

  long line() const { return row_start_line_; }

 private:
  std::istream& in_;
  long line_ = 1;
  long row_start_line_ = 1;
};

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void write_csv_row(std::ostream& out,
                          const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(fields[i]);
  }
  out << '\n';
}

}  // namespace cadence
