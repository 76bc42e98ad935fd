#pragma once

#include "cadence/csv.hpp"
#include "cadence/linalg.hpp"
#include "cadence/tensor.hpp"

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cadence {

/// Shortest exact decimal form: 17 significant digits round-trip any double.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty())
    throw std::runtime_error("not a number: '" + s + "'");
  return v;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  return in;
}

inline void write_file(const std::string& path, const std::string& content) {
  auto out = open_output(path);
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path);
}

inline std::string read_file(const std::string& path) {
  auto in = open_input(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Headerless numeric CSV, one row per matrix row, exact round trip.
inline void save_matrix_csv(const std::string& path, const Matrix& m) {
  auto out = open_output(path);
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path);
}

inline Matrix load_matrix_csv(const std::string& path) {
  auto in = open_input(path);
  CsvReader reader(in);
  std::vector<std::vector<double>> rows;
  std::vector<std::string> fields;
  while (reader.next(fields)) {
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f));
    if (!rows.empty() && rows.front().size() != row.size())
      throw std::runtime_error(path + ": ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": empty matrix");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c)
      m(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  return m;
}

/// Every cell as an i,j,k,value row (i fastest), so the shape is implicit in
/// the final row and reloads are exact.
inline void save_tensor_csv(const std::string& path, const DenseTensor3& t) {
  auto out = open_output(path);
  out << "i,j,k,value\n";
  for (Index k = 0; k < t.dim2(); ++k)
    for (Index j = 0; j < t.dim1(); ++j)
      for (Index i = 0; i < t.dim0(); ++i)
        out << i << ',' << j << ',' << k << ',' << format_double(t(i, j, k))
            << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

inline DenseTensor3 load_tensor_csv(const std::string& path) {
  auto in = open_input(path);
  CsvReader reader(in);
  std::vector<std::string> fields;
  if (!reader.next(fields) ||
      fields != std::vector<std::string>{"i", "j", "k", "value"})
    throw std::runtime_error(path + ": expected tensor header i,j,k,value");
  struct Cell {
    Index i, j, k;
    double v;
  };
  std::vector<Cell> cells;
  Index d0 = 0, d1 = 0, d2 = 0;
  while (reader.next(fields)) {
    if (fields.size() != 4) throw std::runtime_error(path + ": bad tensor row");
    Cell c{static_cast<Index>(std::stol(fields[0])),
           static_cast<Index>(std::stol(fields[1])),
           static_cast<Index>(std::stol(fields[2])), parse_double(fields[3])};
    d0 = std::max(d0, c.i + 1);
    d1 = std::max(d1, c.j + 1);
    d2 = std::max(d2, c.k + 1);
    cells.push_back(c);
  }
  if (cells.empty()) throw std::runtime_error(path + ": empty tensor");
  if (static_cast<Index>(cells.size()) != d0 * d1 * d2)
    throw std::runtime_error(path + ": cell count does not match shape");
  DenseTensor3 t(d0, d1, d2);
  for (const Cell& c : cells) t(c.i, c.j, c.k) = c.v;
  return t;
}

inline void save_string_column_csv(const std::string& path,
                                   const std::string& header,
                                   const std::vector<std::string>& values) {
  auto out = open_output(path);
  out << header << '\n';
  for (const auto& v : values) out << csv_escape(v) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

/// FNV-1a, 64-bit; used for input-change detection in run manifests.
inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hash_file_hex(const std::string& path) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(read_file(path))));
  return buf;
}

}  // namespace cadence
