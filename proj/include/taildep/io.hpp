#pragma once

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "taildep/errors.hpp"
#include "taildep/ingest.hpp"

namespace taildep {

// A numeric sample plus at most one non-numeric (date/id) column and any
// '#' metadata lines found at the top of the file.
struct LoadedSample {
  SampleMatrix data;
  std::vector<std::string> keys;  // per-row values of the non-numeric column
  std::string key_label;          // empty when the file is all numeric
  std::vector<std::string> metadata;
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return s.substr(b, e - b);
}

inline std::vector<std::string> split_line(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

inline bool parse_double(const std::string& tok, double& out) {
  if (tok.empty()) return false;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc{} && res.ptr == last;
}

}  // namespace detail

// Tab wins when the header contains one; otherwise comma.
inline char detect_delimiter(const std::string& header_line) {
  return header_line.find('\t') != std::string::npos ? '\t' : ',';
}

// Reads a delimited text sample: optional '#' metadata lines, one header row
// of labels, then rows. Exactly one column may be non-numeric; NaN, infinity
// and empty numeric cells are rejected.
inline LoadedSample read_delimited(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open input file: " + path);

  LoadedSample out;
  std::string line;
  bool have_header = false;
  std::vector<std::string> labels;
  char delim = ',';
  std::vector<std::vector<std::string>> cells;

  while (std::getline(in, line)) {
    if (!have_header && !line.empty() && line[0] == '#') {
      out.metadata.push_back(detail::trim(line.substr(1)));
      continue;
    }
    const std::string t = detail::trim(line);
    if (t.empty()) continue;
    if (!have_header) {
      delim = detect_delimiter(line);
      labels = detail::split_line(line, delim);
      have_header = true;
      continue;
    }
    auto row = detail::split_line(line, delim);
    if (row.size() != labels.size())
      throw config_error(path + ": row " + std::to_string(cells.size() + 2) + " has " +
                         std::to_string(row.size()) + " fields, expected " +
                         std::to_string(labels.size()));
    cells.push_back(std::move(row));
  }
  if (!have_header) throw config_error(path + ": no header row");
  if (cells.empty()) throw config_error(path + ": no data rows");

  const std::size_t ncols = labels.size();
  std::vector<bool> numeric(ncols, true);
  for (const auto& row : cells)
    for (std::size_t j = 0; j < ncols; ++j) {
      double v;
      if (!detail::parse_double(row[j], v)) numeric[j] = false;
    }

  std::size_t key_col = ncols;  // sentinel: none
  for (std::size_t j = 0; j < ncols; ++j) {
    if (numeric[j]) continue;
    if (key_col != ncols)
      throw config_error(path + ": more than one non-numeric column ('" + labels[key_col] +
                         "' and '" + labels[j] + "')");
    key_col = j;
  }
  const std::size_t d = ncols - (key_col != ncols ? 1 : 0);
  if (d == 0) throw config_error(path + ": no numeric columns");

  out.data = SampleMatrix(cells.size(), d);
  out.data.labels.clear();
  for (std::size_t j = 0; j < ncols; ++j)
    if (j != key_col) out.data.labels.push_back(labels[j]);
  if (key_col != ncols) {
    out.key_label = labels[key_col];
    out.keys.reserve(cells.size());
  }

  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::size_t jj = 0;
    for (std::size_t j = 0; j < ncols; ++j) {
      if (j == key_col) {
        out.keys.push_back(cells[i][j]);
        continue;
      }
      double v;
      if (!detail::parse_double(cells[i][j], v))
        throw config_error(path + ": unparseable value '" + cells[i][j] + "' at row " +
                           std::to_string(i + 2) + ", column '" + labels[j] + "'");
      if (!std::isfinite(v))
        throw config_error(path + ": non-finite value at row " + std::to_string(i + 2) +
                           ", column '" + labels[j] + "'");
      out.data(i, jj++) = v;
    }
  }
  return out;
}

inline std::string format_double(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

// Writes a sample at full precision (%.17g round-trips doubles exactly, so
// re-ingesting reproduces identical ranks). Metadata lines go first.
inline void write_sample(const std::string& path, const SampleMatrix& data,
                         const std::vector<std::string>& metadata = {},
                         const std::vector<std::string>& keys = {},
                         const std::string& key_label = "") {
  std::ofstream outf(path);
  if (!outf) throw config_error("cannot open output file: " + path);
  for (const auto& m : metadata) outf << "# " << m << '\n';
  const bool with_keys = !keys.empty();
  if (with_keys && keys.size() != data.n)
    throw config_error("write_sample: key column length mismatch");
  if (with_keys) outf << key_label << ',';
  for (std::size_t j = 0; j < data.d; ++j)
    outf << data.labels[j] << (j + 1 < data.d ? "," : "");
  outf << '\n';
  for (std::size_t i = 0; i < data.n; ++i) {
    if (with_keys) outf << keys[i] << ',';
    for (std::size_t j = 0; j < data.d; ++j)
      outf << format_double(data(i, j), 17) << (j + 1 < data.d ? "," : "");
    outf << '\n';
  }
  if (!outf) throw computation_error("write failed: " + path);
}

// Tabular report payload: named columns, all-numeric rows, written as TSV
// at plot precision (%.12g).
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> metadata;

  void add_row(std::vector<double> row) {
    if (row.size() != columns.size()) throw config_error("table row width mismatch");
    rows.push_back(std::move(row));
  }
};

inline void write_table(const std::string& path, const Table& table) {
  std::ofstream outf(path);
  if (!outf) throw config_error("cannot open output file: " + path);
  for (const auto& m : table.metadata) outf << "# " << m << '\n';
  for (std::size_t j = 0; j < table.columns.size(); ++j)
    outf << table.columns[j] << (j + 1 < table.columns.size() ? "\t" : "");
  outf << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t j = 0; j < row.size(); ++j)
      outf << format_double(row[j], 12) << (j + 1 < row.size() ? "\t" : "");
    outf << '\n';
  }
  if (!outf) throw computation_error("write failed: " + path);
}

}  // namespace taildep
