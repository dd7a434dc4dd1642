#pragma once

#include <string>
#include <vector>

#include "sonilab/container.hpp"
#include "sonilab/matrix.hpp"
#include "sonilab/nn/tensor.hpp"
#include "sonilab/types.hpp"

namespace sonilab::eval {

/// psd: 70 band powers; topo: 5x32x32 band maps; spect: 14x25x33 scaled
/// spectrograms; raw: the 14x256 stimulus segment.
enum class FeatureKind { Psd, Topo, Spect, Raw };

std::string to_string(FeatureKind kind);
FeatureKind parse_feature_kind(const std::string& text);

/// One row per epoch, flattened sample-major.
struct FeatureBank {
  FeatureKind kind = FeatureKind::Psd;
  nn::Shape sample_shape;
  Matrix rows;
  std::vector<EpochLabels> labels;

  std::size_t count() const { return rows.rows(); }
};

FeatureBank compute_features(const std::vector<Epoch>& epochs, FeatureKind kind);

FeatureTable to_table(const FeatureBank& bank);
FeatureBank from_table(const FeatureTable& table);

/// Rows at the given indices, in order.
Matrix take_rows(const Matrix& m, std::span<const std::size_t> indices);
std::vector<int> take(std::span<const int> values, std::span<const std::size_t> indices);

}  // namespace sonilab::eval
