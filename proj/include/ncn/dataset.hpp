#pragma once

// Truth-table generators and CSV ingestion.

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ncn/error.hpp"
#include "ncn/format.hpp"

namespace ncn {

struct Dataset {
  std::vector<std::vector<double>> inputs;
  std::vector<std::size_t> targets;
  std::size_t input_dim = 0;
  std::size_t num_classes = 0;

  [[nodiscard]] std::size_t size() const noexcept { return inputs.size(); }

  void validate() const {
    if (inputs.empty() || inputs.size() != targets.size())
      throw ShapeError("dataset must hold a non-empty, equal number of inputs and targets");
    for (const auto& row : inputs)
      if (row.size() != input_dim) throw ShapeError("dataset row has wrong input dimension");
    for (std::size_t t : targets)
      if (t >= num_classes) throw ShapeError("dataset target exceeds num_classes");
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// The four rows of the XOR truth table, in binary counting order.
inline Dataset make_xor() {
  Dataset ds;
  ds.input_dim = 2;
  ds.num_classes = 2;
  ds.inputs = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
  ds.targets = {0, 1, 1, 0};
  return ds;
}

/// All 2^k bit vectors (first input is the most significant bit), labelled
/// 1 iff more than half of the bits are set.
inline Dataset make_majority(int k) {
  if (k < 3 || k % 2 == 0)
    throw ConfigError("majority size must be odd and at least 3, got " + std::to_string(k));
  if (k > 24) throw ConfigError("majority size " + std::to_string(k) + " is too large");
  Dataset ds;
  ds.input_dim = static_cast<std::size_t>(k);
  ds.num_classes = 2;
  const std::uint32_t rows = 1u << k;
  ds.inputs.reserve(rows);
  ds.targets.reserve(rows);
  for (std::uint32_t code = 0; code < rows; ++code) {
    std::vector<double> row(ds.input_dim);
    for (int bit = 0; bit < k; ++bit) row[bit] = (code >> (k - 1 - bit)) & 1u;
    ds.inputs.push_back(std::move(row));
    ds.targets.push_back(2 * static_cast<unsigned>(std::popcount(code)) > static_cast<unsigned>(k) ? 1 : 0);
  }
  return ds;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    cells.push_back(trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

inline bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

/// Parses comma-separated rows of feature columns followed by an integer
/// label. A first line that does not parse as numbers is taken as a header.
inline Dataset parse_csv(std::istream& in, const std::string& source = "<stream>") {
  Dataset ds;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_commas(line);
    std::vector<double> values(cells.size());
    bool numeric = true;
    for (std::size_t c = 0; c < cells.size() && numeric; ++c)
      numeric = detail::parse_double(cells[c], values[c]);
    if (first_content) {
      first_content = false;
      if (!numeric) continue;  // header
    }
    if (!numeric)
      throw ParseError(line_no, source + ":" + std::to_string(line_no) + ": non-numeric cell");
    if (cells.size() < 2)
      throw ParseError(line_no, source + ":" + std::to_string(line_no) +
                                    ": need at least one feature and a label");
    if (width == 0) width = cells.size();
    if (cells.size() != width)
      throw ParseError(line_no, source + ":" + std::to_string(line_no) + ": expected " +
                                    std::to_string(width) + " columns, found " +
                                    std::to_string(cells.size()));
    const double label = values.back();
    if (label < 0 || label != std::floor(label) || label > 1e6)
      throw ParseError(line_no, source + ":" + std::to_string(line_no) +
                                    ": label must be a non-negative integer");
    values.pop_back();
    ds.inputs.push_back(std::move(values));
    ds.targets.push_back(static_cast<std::size_t>(label));
  }
  if (ds.inputs.empty()) throw ParseError(line_no, source + ": no data rows");
  ds.input_dim = width - 1;
  ds.num_classes = *std::max_element(ds.targets.begin(), ds.targets.end()) + 1;
  return ds;
}

inline Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file '" + path + "'");
  return parse_csv(in, path);
}

/// Writes a dataset in the format load_csv reads, with a header line.
inline void write_csv(std::ostream& out, const Dataset& ds) {
  for (std::size_t c = 0; c < ds.input_dim; ++c) out << 'x' << (c + 1) << ',';
  out << "label\n";
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (double v : ds.inputs[r]) out << format_short(v) << ',';
    out << ds.targets[r] << '\n';
  }
}

/// Resolves `xor`, `majority<k>` or `csv:<path>`.
inline Dataset resolve_dataset(std::string_view selector) {
  if (selector == "xor") return make_xor();
  constexpr std::string_view maj = "majority";
  constexpr std::string_view csv = "csv:";
  if (selector.starts_with(maj)) {
    const auto digits = selector.substr(maj.size());
    int k = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size())
      throw ConfigError("bad majority dataset selector '" + std::string(selector) + "'");
    return make_majority(k);
  }
  if (selector.starts_with(csv)) return load_csv(std::string(selector.substr(csv.size())));
  throw ConfigError("unknown dataset '" + std::string(selector) +
                    "' (expected xor, majority<k> or csv:<path>)");
}

}  // namespace ncn
