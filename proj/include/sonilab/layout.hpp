#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

#include "sonilab/types.hpp"

namespace sonilab {

struct Vec3 {
  double x = 0, y = 0, z = 0;
};
struct Vec2 {
  double u = 0, v = 0;
};

/// Electrode geometry. Head frame: +x right ear, +y nose, +z vertex.
struct ChannelLayout {
  std::array<std::string, kChannelCount> names;
  std::array<Vec3, kChannelCount> coords3d;
  std::array<Vec2, kChannelCount> coords2d;
};

/// Emotiv Epoc montage in the fixed channel order used by every matrix with
/// a channel axis: AF3 F7 F3 FC5 T7 P7 O1 O2 P8 T8 FC6 F4 F8 AF4.
const ChannelLayout& default_layout();

/// Throws Error{Data, "unknown_channel"}.
std::size_t channel_index(std::string_view name);

}  // namespace sonilab
