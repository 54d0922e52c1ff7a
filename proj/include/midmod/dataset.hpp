#pragma once

// Labeled row-major feature matrix shared by the learners, plus the CSV
// dataset format: header `src,dst,bin,<features...>,label`.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "midmod/common.hpp"

namespace midmod {

struct RowKey {
  NodeId src = 0;
  NodeId dst = 0;
  int bin = 0;

  auto operator<=>(const RowKey&) const = default;
};

class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_row(const RowKey& key, std::span<const double> x, int label) {
    if (x.size() != columns_.size()) {
      throw DataError("row has " + std::to_string(x.size()) + " values, expected " +
                      std::to_string(columns_.size()));
    }
    values_.insert(values_.end(), x.begin(), x.end());
    keys_.push_back(key);
    labels_.push_back(label);
  }

  std::size_t rows() const { return labels_.size(); }
  std::size_t cols() const { return columns_.size(); }
  bool empty() const { return labels_.empty(); }

  const std::vector<std::string>& columns() const { return columns_; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * cols(), cols()};
  }
  double at(std::size_t i, std::size_t j) const { return values_[i * cols() + j]; }
  int label(std::size_t i) const { return labels_[i]; }
  const std::vector<int>& labels() const { return labels_; }
  const RowKey& key(std::size_t i) const { return keys_[i]; }

  std::size_t positives() const {
    return static_cast<std::size_t>(std::count(labels_.begin(), labels_.end(), 1));
  }

  // Column position by name, or cols() when absent.
  std::size_t column_index(std::string_view name) const {
    const auto it = std::find(columns_.begin(), columns_.end(), name);
    return static_cast<std::size_t>(it - columns_.begin());
  }

  Dataset select_rows(std::span<const std::size_t> idx) const {
    Dataset out(columns_);
    out.values_.reserve(idx.size() * cols());
    for (std::size_t i : idx) out.add_row(keys_[i], row(i), labels_[i]);
    return out;
  }

  // Keeps the given columns in the given order.
  Dataset select_columns(std::span<const std::size_t> cols_idx) const {
    std::vector<std::string> names;
    for (std::size_t c : cols_idx) names.push_back(columns_.at(c));
    Dataset out(std::move(names));
    std::vector<double> x(cols_idx.size());
    for (std::size_t i = 0; i < rows(); ++i) {
      for (std::size_t k = 0; k < cols_idx.size(); ++k) x[k] = at(i, cols_idx[k]);
      out.add_row(keys_[i], x, labels_[i]);
    }
    return out;
  }

  // Same rows, with a replacement label vector.
  Dataset relabeled(std::span<const int> labels) const {
    if (labels.size() != rows()) throw DataError("label count mismatch");
    Dataset out = *this;
    out.labels_.assign(labels.begin(), labels.end());
    return out;
  }

  // Rows sorted by key, then by values; makes row order irrelevant.
  Dataset canonical() const {
    std::vector<std::size_t> order(rows());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (keys_[a] != keys_[b]) return keys_[a] < keys_[b];
      const auto ra = row(a);
      const auto rb = row(b);
      if (!std::equal(ra.begin(), ra.end(), rb.begin())) {
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
      }
      return labels_[a] < labels_[b];
    });
    return select_rows(order);
  }

  // Stacks rows of datasets with identical columns.
  static Dataset concat(std::span<const Dataset> parts) {
    if (parts.empty()) return {};
    Dataset out(parts.front().columns());
    for (const auto& p : parts) {
      if (p.columns() != out.columns()) throw DataError("column schema mismatch");
      for (std::size_t i = 0; i < p.rows(); ++i) out.add_row(p.key(i), p.row(i), p.label(i));
    }
    return out;
  }

 private:
  std::vector<std::string> columns_;
  std::vector<double> values_;
  std::vector<RowKey> keys_;
  std::vector<int> labels_;
};

// Nine significant digits, shortest form.
inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline void write_csv(std::ostream& out, const Dataset& d) {
  out << "src,dst,bin";
  for (const auto& c : d.columns()) out << ',' << c;
  out << ",label\n";
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const auto& k = d.key(i);
    out << k.src << ',' << k.dst << ',' << k.bin;
    for (double v : d.row(i)) out << ',' << format_value(v);
    out << ',' << d.label(i) << '\n';
  }
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline double parse_double(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DataError("dataset line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

}  // namespace detail

inline Dataset read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("dataset is empty");
  const auto header = detail::split_csv(line);
  if (header.size() < 5 || header[0] != "src" || header[1] != "dst" ||
      header[2] != "bin" || header.back() != "label") {
    throw DataError("dataset header must be src,dst,bin,<features>,label");
  }
  Dataset d(std::vector<std::string>(header.begin() + 3, header.end() - 1));
  std::vector<double> x(d.cols());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = detail::split_csv(line);
    if (cells.size() != header.size()) {
      throw DataError("dataset line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " cells");
    }
    RowKey key;
    key.src = static_cast<NodeId>(std::stoull(cells[0]));
    key.dst = static_cast<NodeId>(std::stoull(cells[1]));
    key.bin = std::stoi(cells[2]);
    for (std::size_t j = 0; j < d.cols(); ++j) {
      x[j] = detail::parse_double(cells[3 + j], line_no);
    }
    const int label = std::stoi(cells.back());
    if (label != 0 && label != 1) {
      throw DataError("dataset line " + std::to_string(line_no) + ": label must be 0/1");
    }
    d.add_row(key, x, label);
  }
  return d;
}

inline Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read dataset: " + path);
  return read_csv(in);
}

}  // namespace midmod
