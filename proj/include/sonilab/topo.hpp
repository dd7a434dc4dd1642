#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sonilab/features.hpp"
#include "sonilab/layout.hpp"

namespace sonilab {

/// Azimuthal equidistant projection centred on the vertex (0, 0, 1):
/// (u, v) = rho * (cos phi, sin phi) with rho the great-circle distance from
/// the vertex. Inputs are normalized first; throws Error{Data, "zero_norm"}.
std::vector<Vec2> project_electrodes(std::span<const Vec3> coords3d);

struct Triangle {
  std::array<std::size_t, 3> v;  // counter-clockwise
};

/// Delaunay triangulation. Throws Error{Data, "degenerate_points"} for fewer
/// than three points, duplicates, or a collinear set.
std::vector<Triangle> delaunay(std::span<const Vec2> points);

/// Piecewise-cubic C1 interpolant over a triangulation. Each triangle is
/// split at its centroid; vertex gradients come from a least-squares plane
/// fit over the vertex's 1-ring, and the cross-edge derivative is linear
/// along every outer edge so neighbouring patches join with C1 continuity.
class CloughTocher {
public:
  CloughTocher(std::vector<Vec2> points, std::vector<Triangle> triangles, std::vector<double> values);
  CloughTocher(std::vector<Vec2> points, std::vector<double> values);

  /// Empty outside the convex hull.
  std::optional<double> operator()(Vec2 p) const;

  const std::vector<Vec2>& gradients() const { return gradients_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }

  struct Location {
    std::size_t triangle;
    std::array<double, 3> bary;
  };
  std::optional<Location> locate(Vec2 p) const;
  double evaluate(const Location& loc) const;

private:
  // Bezier net per triangle: f[3], E[3][3] (E[a][b] next to a toward b),
  // I[3] (next to a toward centroid), M[3] (edge a,a+1), Q[3], S.
  struct Net {
    std::array<double, 3> f{};
    std::array<std::array<double, 3>, 3> e{};
    std::array<double, 3> inner{};
    std::array<double, 3> mid{};
    std::array<double, 3> q{};
    double s = 0.0;
  };

  void estimate_gradients();
  void build_nets();

  std::vector<Vec2> points_;
  std::vector<Triangle> triangles_;
  std::vector<double> values_;
  std::vector<Vec2> gradients_;
  std::vector<Net> nets_;
};

inline constexpr std::size_t kTopoResolution = 32;

/// resolution x resolution x 5 bands (row-major, band fastest). Rows run
/// from anterior (top) to posterior, columns from left to right.
struct TopoImage {
  std::size_t resolution = kTopoResolution;
  std::vector<double> grid;
  std::vector<std::uint8_t> mask;  // 1 inside the head disk

  double at(std::size_t row, std::size_t col, std::size_t band) const {
    return grid[(row * resolution + col) * kBandCount + band];
  }
};

/// Radius of the head disk in the projected plane (farthest electrode).
double head_radius(const ChannelLayout& layout);

/// Centre of grid cell (row, col) in projected coordinates.
Vec2 grid_point(std::size_t row, std::size_t col, std::size_t resolution, double radius);

/// Band powers interpolated onto the grid. Cells outside the head disk or
/// the electrode hull are exactly 0.
TopoImage topo_image(std::span<const double> psd, const ChannelLayout& layout,
                     std::size_t resolution = kTopoResolution);

/// Channel-first copy (band x row x col) for the 2D CNNs.
std::vector<double> topo_channels_first(const TopoImage& image);

}  // namespace sonilab
