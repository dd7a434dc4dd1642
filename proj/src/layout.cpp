#include "sonilab/layout.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "sonilab/error.hpp"
#include "sonilab/topo.hpp"

namespace sonilab {

namespace {

struct SphericalPosition {
  const char* name;
  double theta_deg;  // signed polar angle from vertex (negative = left)
  double phi_deg;    // azimuth from the right-ear axis toward the nose
};

// Standard spherical 10-20 positions.
constexpr std::array<SphericalPosition, kChannelCount> kPositions = {{
    {"AF3", -74, -65},
    {"F7", -92, -36},
    {"F3", -60, -51},
    {"FC5", -72, -21},
    {"T7", -92, 0},
    {"P7", -92, 36},
    {"O1", -92, 72},
    {"O2", 92, -72},
    {"P8", 92, -36},
    {"T8", 92, 0},
    {"FC6", 72, 21},
    {"F4", 60, 51},
    {"F8", 92, 36},
    {"AF4", 74, 65},
}};

ChannelLayout build_layout() {
  ChannelLayout layout;
  constexpr double deg = std::numbers::pi / 180.0;
  std::vector<Vec3> points;
  for (std::size_t i = 0; i < kChannelCount; ++i) {
    const auto& p = kPositions[i];
    const double t = p.theta_deg * deg;
    const double f = p.phi_deg * deg;
    layout.names[i] = p.name;
    layout.coords3d[i] = {std::sin(t) * std::cos(f), std::sin(t) * std::sin(f), std::cos(t)};
    points.push_back(layout.coords3d[i]);
  }
  const auto projected = project_electrodes(points);
  for (std::size_t i = 0; i < kChannelCount; ++i) layout.coords2d[i] = projected[i];
  return layout;
}

}  // namespace

const ChannelLayout& default_layout() {
  static const ChannelLayout layout = build_layout();
  return layout;
}

std::size_t channel_index(std::string_view name) {
  const auto& names = default_layout().names;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return i;
  throw_data("unknown_channel", "unknown channel '" + std::string(name) + "'");
}

}  // namespace sonilab
