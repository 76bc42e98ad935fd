#pragma once

#include "cadence/csv.hpp"
#include "cadence/demographics.hpp"
#include "cadence/tensor.hpp"

#include <cstdlib>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace cadence {

struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  friend bool operator==(const Date&, const Date&) = default;
};

/// Days since 1970-01-01 in the proleptic Gregorian calendar
/// (Howard Hinnant's civil-days algorithm).
inline long days_from_civil(const Date& d) {
  int y = d.year;
  const unsigned m = static_cast<unsigned>(d.month);
  const unsigned dd = static_cast<unsigned>(d.day);
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + dd - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

inline Date civil_from_days(long z) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long y = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned dd = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
              static_cast<int>(dd)};
}

/// 0 = Monday .. 6 = Sunday.
inline int weekday_index(const Date& d) {
  const long days = days_from_civil(d);
  return static_cast<int>(((days + 3) % 7 + 7) % 7);
}

inline bool is_leap_year(int y) {
  return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

inline int days_in_month(int y, int m) {
  static constexpr int lengths[12] = {31, 28, 31, 30, 31, 30,
                                      31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap_year(y)) return 29;
  return lengths[m - 1];
}

/// Strict ISO-8601 calendar date, YYYY-MM-DD.
inline std::optional<Date> parse_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
  Date d;
  d.year = std::stoi(s.substr(0, 4));
  d.month = std::stoi(s.substr(5, 2));
  d.day = std::stoi(s.substr(8, 2));
  if (d.month < 1 || d.month > 12) return std::nullopt;
  if (d.day < 1 || d.day > days_in_month(d.year, d.month)) return std::nullopt;
  return d;
}

inline std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

struct ReceiptRecord {
  std::string user_id;
  Date date;
  std::string item;
  double price = 0.0;
  bool has_price = false;
};

struct ParseReport {
  long rows_total = 0;  // data rows, header excluded
  long rows_ok = 0;
  long rows_bad = 0;
  std::vector<std::string> errors;  // "row N: reason"
};

struct ReceiptParseResult {
  std::vector<ReceiptRecord> records;
  ParseReport report;
};

namespace detail {

inline void expect_header(CsvReader& reader,
                          const std::vector<std::string>& expected,
                          const char* what) {
  std::vector<std::string> fields;
  if (!reader.next(fields))
    throw std::runtime_error(std::string(what) + ": empty input, header row required");
  if (fields != expected) {
    std::string got;
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) got += ',';
      got += fields[i];
    }
    throw std::runtime_error(std::string(what) + ": unexpected header '" + got + "'");
  }
}

inline bool parse_full_double(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  *out = v;
  return true;
}

}  // namespace detail

/// Reads rows of `user_id,date,item,price`. Malformed rows are skipped and
/// reported with their line numbers; a missing or wrong header is fatal.
inline ReceiptParseResult parse_receipts(std::istream& in) {
  if (!in) throw std::runtime_error("parse_receipts: unreadable input");
  CsvReader reader(in);
  detail::expect_header(reader, {"user_id", "date", "item", "price"},
                        "parse_receipts");

  ReceiptParseResult out;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    ++out.report.rows_total;
    const auto reject = [&](const std::string& reason) {
      ++out.report.rows_bad;
      out.report.errors.push_back("row " + std::to_string(reader.line()) +
                                  ": " + reason);
    };
    if (fields.size() != 4) {
      reject("expected 4 fields, got " + std::to_string(fields.size()));
      continue;
    }
    if (fields[0].empty()) {
      reject("empty user_id");
      continue;
    }
    const auto date = parse_date(fields[1]);
    if (!date) {
      reject("unparseable date '" + fields[1] + "'");
      continue;
    }
    ReceiptRecord rec;
    rec.user_id = fields[0];
    rec.date = *date;
    rec.item = fields[2];
    if (!fields[3].empty()) {
      if (!detail::parse_full_double(fields[3], &rec.price) || rec.price < 0.0) {
        reject("invalid price '" + fields[3] + "'");
        continue;
      }
      rec.has_price = true;
    }
    ++out.report.rows_ok;
    out.records.push_back(std::move(rec));
  }
  return out;
}

struct CalendarConfig {
  Date start;
  Date end;
  int week_start = 0;  // 0 = Monday .. 6 = Sunday
  bool include_partial_weeks = false;
};

struct TensorBuildResult {
  DenseTensor3 tensor;             // users x 7 x weeks
  std::vector<std::string> users;  // row -> user id, first-appearance order
  Date first_week_start;
  long included = 0;
  long out_of_window = 0;     // outside [start, end]
  long outside_week_grid = 0;  // inside the window but not in a counted week
};

/// Buckets records into (user, day-of-week, week) counts. The week grid
/// starts at the first week-start day inside the window (or the week
/// containing the window start when partial weeks are included) and, unless
/// partial weeks are included, only weeks fully inside the window count.
inline TensorBuildResult build_tensor(const std::vector<ReceiptRecord>& records,
                                      const CalendarConfig& cal) {
  const long start = days_from_civil(cal.start);
  const long end = days_from_civil(cal.end);
  if (start > end)
    throw std::invalid_argument("build_tensor: window start is after its end");
  if (cal.week_start < 0 || cal.week_start > 6)
    throw std::invalid_argument("build_tensor: week_start must be in 0..6");

  const int start_offset = (weekday_index(cal.start) - cal.week_start + 7) % 7;
  long first;
  long n_weeks;
  if (cal.include_partial_weeks) {
    first = start - start_offset;
    n_weeks = (end - first) / 7 + 1;
  } else {
    first = start_offset == 0 ? start : start + (7 - start_offset);
    n_weeks = (end - 6 >= first) ? (end - 6 - first) / 7 + 1 : 0;
  }
  if (n_weeks < 1)
    throw std::invalid_argument("build_tensor: the window contains no countable week");

  TensorBuildResult res;
  res.first_week_start = civil_from_days(first);

  struct Hit {
    Index user;
    Index day;
    Index week;
  };
  std::vector<Hit> hits;
  std::unordered_map<std::string, Index> user_index;
  for (const ReceiptRecord& rec : records) {
    const long day = days_from_civil(rec.date);
    if (day < start || day > end) {
      ++res.out_of_window;
      continue;
    }
    const long rel = day - first;
    if (rel < 0 || rel / 7 >= n_weeks) {
      ++res.outside_week_grid;
      continue;
    }
    auto [it, inserted] =
        user_index.emplace(rec.user_id, static_cast<Index>(res.users.size()));
    if (inserted) res.users.push_back(rec.user_id);
    hits.push_back({it->second, static_cast<Index>(rel % 7),
                    static_cast<Index>(rel / 7)});
    ++res.included;
  }
  if (res.users.empty())
    throw std::invalid_argument("build_tensor: no records inside the window");

  res.tensor = DenseTensor3(static_cast<Index>(res.users.size()), 7, n_weeks);
  for (const Hit& h : hits) res.tensor(h.user, h.day, h.week) += 1.0;
  return res;
}

struct DemographicParseResult {
  DemographicTable table;
  ParseReport report;
};

/// Reads rows of `user_id,gender,age_cohort,marital,child` with the category
/// domains Female|Male, 1..6, Married|Unmarried, No|Yes. Out-of-domain values
/// and duplicate user ids reject the row.
inline DemographicParseResult parse_demographics(std::istream& in) {
  if (!in) throw std::runtime_error("parse_demographics: unreadable input");
  CsvReader reader(in);
  detail::expect_header(reader,
                        {"user_id", "gender", "age_cohort", "marital", "child"},
                        "parse_demographics");

  DemographicParseResult out;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    ++out.report.rows_total;
    const auto reject = [&](const std::string& reason) {
      ++out.report.rows_bad;
      out.report.errors.push_back("row " + std::to_string(reader.line()) +
                                  ": " + reason);
    };
    if (fields.size() != 5) {
      reject("expected 5 fields, got " + std::to_string(fields.size()));
      continue;
    }
    DemographicRecord rec;
    rec.user_id = fields[0];
    if (rec.user_id.empty()) {
      reject("empty user_id");
      continue;
    }
    if (fields[1] == "Female")
      rec.gender = 0;
    else if (fields[1] == "Male")
      rec.gender = 1;
    else {
      reject("gender '" + fields[1] + "' not in {Female, Male}");
      continue;
    }
    if (fields[2].size() == 1 && fields[2][0] >= '1' && fields[2][0] <= '6')
      rec.age_cohort = fields[2][0] - '1';
    else {
      reject("age_cohort '" + fields[2] + "' not in 1..6");
      continue;
    }
    if (fields[3] == "Married")
      rec.marital = 0;
    else if (fields[3] == "Unmarried")
      rec.marital = 1;
    else {
      reject("marital '" + fields[3] + "' not in {Married, Unmarried}");
      continue;
    }
    if (fields[4] == "No")
      rec.child = 0;
    else if (fields[4] == "Yes")
      rec.child = 1;
    else {
      reject("child '" + fields[4] + "' not in {No, Yes}");
      continue;
    }
    if (!out.table.add(std::move(rec))) {
      reject("duplicate user_id '" + fields[0] + "'");
      continue;
    }
    ++out.report.rows_ok;
  }
  return out;
}

}  // namespace cadence
