#pragma once

// Flat `key = value` run configuration. Lines starting with '#' are comments.
//
//   topology          2,4,2
//   learning_rate     0.001
//   momentum          0.9
//   epochs            1000
//   seed              0
//   dataset           xor | majority<k> | csv:<path>
//   channel_semantics algorithm1 | equation1
//   out               ncn.ckpt
//   grid_min          -0.5
//   grid_max          1.5
//   resolution        200

#include <charconv>
#include <fstream>
#include <istream>
#include <set>
#include <string>
#include <string_view>

#include "ncn/boundary.hpp"
#include "ncn/dataset.hpp"
#include "ncn/error.hpp"
#include "ncn/kernel.hpp"
#include "ncn/network.hpp"

namespace ncn {

struct RunConfig {
  TrainConfig train;
  std::string out = "ncn.ckpt";
  BoundaryGrid grid;
};

namespace detail {

inline double parse_real(std::string_view key, std::string_view value) {
  double v = 0.0;
  if (!parse_double(value, v))
    throw ConfigError("'" + std::string(key) + "' expects a number, got '" + std::string(value) + "'");
  return v;
}

template <class Int>
Int parse_count(std::string_view key, std::string_view value) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (value.empty() || ec != std::errc{} || ptr != value.data() + value.size())
    throw ConfigError("'" + std::string(key) + "' expects a non-negative integer, got '" +
                      std::string(value) + "'");
  return v;
}

}  // namespace detail

/// Applies one key. Unknown keys are rejected by name.
inline void apply_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  if (key == "topology") {
    cfg.train.topology = parse_topology(value);
  } else if (key == "learning_rate") {
    cfg.train.learning_rate = detail::parse_real(key, value);
  } else if (key == "momentum") {
    cfg.train.momentum = detail::parse_real(key, value);
  } else if (key == "epochs") {
    cfg.train.epochs = detail::parse_count<std::size_t>(key, value);
  } else if (key == "seed") {
    cfg.train.seed = detail::parse_count<std::uint64_t>(key, value);
  } else if (key == "dataset") {
    if (value.empty()) throw ConfigError("'dataset' must not be empty");
    cfg.train.dataset = std::string(value);
  } else if (key == "channel_semantics") {
    cfg.train.channel_semantics = parse_channel_semantics(value);
  } else if (key == "out") {
    cfg.out = std::string(value);
  } else if (key == "grid_min") {
    cfg.grid.min = detail::parse_real(key, value);
  } else if (key == "grid_max") {
    cfg.grid.max = detail::parse_real(key, value);
  } else if (key == "resolution") {
    cfg.grid.resolution = detail::parse_count<std::size_t>(key, value);
  } else {
    throw ConfigError("unknown config key '" + std::string(key) + "'");
  }
}

inline RunConfig parse_config(std::istream& in, const std::string& source = "<config>") {
  RunConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = detail::trim(text.substr(0, eq));
    const auto value = detail::trim(text.substr(eq + 1));
    if (!seen.insert(std::string(key)).second)
      throw ConfigError(source + ":" + std::to_string(line_no) + ": duplicate key '" +
                        std::string(key) + "'");
    try {
      apply_config_value(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

}  // namespace ncn
