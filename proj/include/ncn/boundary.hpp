#pragma once

// Decision-boundary sampling over a square lattice, with CSV and SVG output.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "ncn/dataset.hpp"
#include "ncn/error.hpp"
#include "ncn/format.hpp"
#include "ncn/network.hpp"

namespace ncn {

/// resolution x resolution lattice over [min, max]^2. Point k sits at
/// x1 index k / resolution and x2 index k % resolution, so x2 varies fastest.
struct BoundaryGrid {
  double min = -0.5;
  double max = 1.5;
  std::size_t resolution = 200;

  void validate() const {
    if (resolution < 2) throw ConfigError("grid resolution must be at least 2");
    if (!std::isfinite(min) || !std::isfinite(max) || !(min < max))
      throw ConfigError("grid_min must be below grid_max");
  }

  [[nodiscard]] std::size_t size() const noexcept { return resolution * resolution; }

  /// Lattice coordinate for index 0..resolution-1; the last index is exactly max.
  [[nodiscard]] double coord(std::size_t index) const noexcept {
    if (index + 1 == resolution) return max;
    return min + (max - min) * static_cast<double>(index) / static_cast<double>(resolution - 1);
  }
};

struct BoundaryPoint {
  double x1 = 0.0;
  double x2 = 0.0;
  std::size_t predicted_class = 0;
  double p_class1 = 0.0;
};

/// Evaluates the network at every lattice point. Work is split across
/// threads; the output is always in lattice order.
inline std::vector<BoundaryPoint> boundary_scan(const Network& net, const BoundaryGrid& grid,
                                                unsigned threads = 0) {
  grid.validate();
  if (net.input_dim() != 2)
    throw ConfigError("boundary scan needs a 2-input network, got " +
                      std::to_string(net.input_dim()) + " inputs");
  if (net.output_dim() < 2) throw ConfigError("boundary scan needs at least 2 output classes");

  std::vector<BoundaryPoint> points(grid.size());
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const double x[2] = {grid.coord(k / grid.resolution), grid.coord(k % grid.resolution)};
      const auto logits = forward_logits(net, x);
      points[k] = {x[0], x[1], argmax(logits), softmax(logits)[1]};
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, grid.size()));
  if (threads <= 1) {
    work(0, points.size());
    return points;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (points.size() + threads - 1) / threads;
  for (std::size_t begin = 0; begin < points.size(); begin += chunk)
    pool.emplace_back(work, begin, std::min(points.size(), begin + chunk));
  return points;
}

inline void write_boundary_csv(std::ostream& out, const std::vector<BoundaryPoint>& points) {
  out << "x1,x2,class,p1\n";
  for (const auto& p : points)
    out << format_short(p.x1) << ',' << format_short(p.x2) << ',' << p.predicted_class << ','
        << format_exact(p.p_class1) << '\n';
}

/// Raster of predicted classes, x1 to the right and x2 upward, with the
/// dataset's points drawn on top.
inline void write_boundary_svg(std::ostream& out, const std::vector<BoundaryPoint>& points,
                               const BoundaryGrid& grid, const Dataset& overlay) {
  static constexpr const char* kClassFill[] = {"#9ecae1", "#fdae6b", "#a1d99b", "#bcbddc"};
  static constexpr const char* kPointFill[] = {"#08519c", "#a63603", "#006d2c", "#54278f"};
  const std::size_t res = grid.resolution;
  const std::size_t cell = std::max<std::size_t>(1, 400 / res);
  const std::size_t side = cell * res;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << side << "\" height=\"" << side
      << "\" viewBox=\"0 0 " << side << ' ' << side << "\" shape-rendering=\"crispEdges\">\n";
  // One rect per run of equal class along x1 within each x2 row.
  for (std::size_t r = 0; r < res; ++r) {
    const std::size_t y = (res - 1 - r) * cell;
    std::size_t c = 0;
    while (c < res) {
      const std::size_t cls = points[c * res + r].predicted_class;
      std::size_t e = c + 1;
      while (e < res && points[e * res + r].predicted_class == cls) ++e;
      out << "<rect x=\"" << c * cell << "\" y=\"" << y << "\" width=\"" << (e - c) * cell
          << "\" height=\"" << cell << "\" fill=\"" << kClassFill[cls % 4] << "\"/>\n";
      c = e;
    }
  }
  const double span = grid.max - grid.min;
  for (std::size_t k = 0; k < overlay.size(); ++k) {
    if (overlay.inputs[k].size() != 2) break;
    const double px = (overlay.inputs[k][0] - grid.min) / span * static_cast<double>(side);
    const double py = (grid.max - overlay.inputs[k][1]) / span * static_cast<double>(side);
    out << "<circle cx=\"" << format_short(px) << "\" cy=\"" << format_short(py)
        << "\" r=\"8\" stroke=\"black\" stroke-width=\"2\" fill=\""
        << kPointFill[overlay.targets[k] % 4] << "\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace ncn
