#pragma once

// Line-oriented text checkpoints:
//
//   NCN v1
//   semantics: algorithm1
//   topology: 2,4,2
//   W            (then out_dim rows of in_dim values)
//   N            (same shape as W)
//   b            (one row of out_dim values)
//   ...          (W/N/b repeated per layer)
//   end
//
// Values are written with 17 significant digits so loading is bit-exact.

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ncn/dataset.hpp"
#include "ncn/error.hpp"
#include "ncn/format.hpp"
#include "ncn/network.hpp"

namespace ncn {

inline constexpr int kCheckpointVersion = 1;

inline void write_checkpoint(std::ostream& out, const Network& net) {
  net.validate();
  out << "NCN v" << kCheckpointVersion << '\n';
  out << "semantics: " << to_string(net.semantics) << '\n';
  out << "topology: " << topology_to_string(net.topology()) << '\n';
  auto write_row = [&](std::span<const double> row) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << format_exact(row[i]);
    out << '\n';
  };
  for (const auto& layer : net.layers) {
    out << "W\n";
    for (std::size_t j = 0; j < layer.out_dim(); ++j) write_row(layer.widths.row(j));
    out << "N\n";
    for (std::size_t j = 0; j < layer.out_dim(); ++j) write_row(layer.neuro.row(j));
    out << "b\n";
    write_row(layer.bias);
  }
  out << "end\n";
}

inline void save_checkpoint(const Network& net, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_checkpoint(out, net);
  out.flush();
  if (!out) throw IoError("failed writing checkpoint '" + path + "'");
}

inline Network read_checkpoint(std::istream& in) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  while (!lines.empty() && detail::trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw MalformedCheckpoint("checkpoint is empty");

  constexpr std::string_view magic = "NCN v";
  if (!std::string_view(lines[0]).starts_with(magic))
    throw MalformedCheckpoint("missing 'NCN v<version>' header");
  {
    const std::string_view v = std::string_view(lines[0]).substr(magic.size());
    int version = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), version);
    if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size())
      throw MalformedCheckpoint("unreadable checkpoint version '" + lines[0] + "'");
    if (version != kCheckpointVersion)
      throw CheckpointVersionMismatch("checkpoint version " + std::to_string(version) +
                                      " is not supported (expected " +
                                      std::to_string(kCheckpointVersion) + ")");
  }
  if (lines.back() != "end") throw MalformedCheckpoint("checkpoint is truncated (no 'end' line)");

  std::size_t cursor = 1;
  auto next = [&]() -> const std::string& {
    if (cursor >= lines.size() - 1) throw MalformedCheckpoint("checkpoint ended early");
    return lines[cursor++];
  };
  auto field = [&](std::string_view key) {
    const std::string& line = next();
    const std::string prefix = std::string(key) + ":";
    if (!std::string_view(line).starts_with(prefix))
      throw MalformedCheckpoint("expected '" + prefix + "' at line " + std::to_string(cursor));
    return std::string(detail::trim(std::string_view(line).substr(prefix.size())));
  };

  Network net;
  try {
    net.semantics = parse_channel_semantics(field("semantics"));
  } catch (const ConfigError& e) {
    throw MalformedCheckpoint(e.what());
  }
  Topology topology;
  try {
    topology = parse_topology(field("topology"));
  } catch (const ConfigError& e) {
    throw MalformedCheckpoint(e.what());
  }
  net = make_network(topology, net.semantics);

  auto expect_tag = [&](std::string_view tag) {
    const std::string& line = next();
    if (detail::trim(line) == tag) return;
    double probe = 0.0;
    std::istringstream first(line);
    std::string tok;
    if (first >> tok && detail::parse_double(tok, probe))
      throw CheckpointShapeMismatch("more rows than the topology describes before line " +
                                    std::to_string(cursor));
    throw MalformedCheckpoint("expected '" + std::string(tag) + "' at line " +
                                std::to_string(cursor));
  };
  auto read_row = [&](std::span<double> dst) {
    const std::string& line = next();
    std::istringstream fields(line);
    std::vector<double> values;
    for (std::string tok; fields >> tok;) {
      double v = 0.0;
      if (!detail::parse_double(tok, v))
        throw MalformedCheckpoint("bad number '" + tok + "' at line " + std::to_string(cursor));
      values.push_back(v);
    }
    if (values.size() != dst.size())
      throw CheckpointShapeMismatch("line " + std::to_string(cursor) + " has " +
                                    std::to_string(values.size()) + " values, topology requires " +
                                    std::to_string(dst.size()));
    std::copy(values.begin(), values.end(), dst.begin());
  };

  for (auto& layer : net.layers) {
    expect_tag("W");
    for (std::size_t j = 0; j < layer.out_dim(); ++j) read_row(layer.widths.row(j));
    expect_tag("N");
    for (std::size_t j = 0; j < layer.out_dim(); ++j) read_row(layer.neuro.row(j));
    expect_tag("b");
    read_row(layer.bias);
  }
  if (cursor != lines.size() - 1)
    throw CheckpointShapeMismatch("checkpoint has more rows than its topology describes");
  return net;
}

inline Network load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint '" + path + "'");
  return read_checkpoint(in);
}

}  // namespace ncn
