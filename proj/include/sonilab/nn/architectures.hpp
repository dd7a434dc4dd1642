#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sonilab/nn/ops.hpp"

namespace sonilab::nn {

enum class Architecture {
  CNN1D,
  EEGNet,
  TopoA,
  TopoB,
  TopoC,
  TopoD,
  SpectA,
  SpectB,
  SpectC,
  SpectD,
  FusionMLP,
  Siamese,
};

std::string to_string(Architecture arch);
Architecture parse_architecture(const std::string& text);

enum class LayerKind { Conv1d, Conv2d, MaxPool1d, MaxPool2d, AvgPool2d, Dense, ReLU, BatchNorm, Dropout, Flatten, Reshape };

std::string to_string(LayerKind kind);

struct LayerSpec {
  LayerKind kind = LayerKind::ReLU;
  std::size_t in = 0;   // channels (conv) or features (dense, batchnorm)
  std::size_t out = 0;
  std::size_t kh = 1;   // kernel height; conv1d and pool1d use kw only
  std::size_t kw = 1;
  std::size_t groups = 1;
  bool bias = true;
  bool same = true;     // same padding, otherwise valid
  double p = 0.0;       // dropout probability
  Shape shape;          // per-sample reshape target
};

struct ModelSpec {
  Architecture arch = Architecture::CNN1D;
  Shape input_shape;               // per sample, channels first
  std::vector<LayerSpec> layers;
  std::size_t embedding_layers = 0;  // prefix whose output is the 256-d embedding
  std::uint64_t seed = 0;
};

inline constexpr std::size_t kEmbeddingSize = 256;

ModelSpec build_cnn1d(std::uint64_t seed = 0);
ModelSpec build_eegnet(std::uint64_t seed = 0);
/// variant in 'A'..'D' selects 1..4 conv blocks.
ModelSpec build_topo_cnn(char variant, std::uint64_t seed = 0, Shape input = {5, 32, 32});
ModelSpec build_spect_cnn(char variant, std::uint64_t seed = 0, Shape input = {14, 25, 33});
ModelSpec build_fusion_mlp(std::size_t temporal = kEmbeddingSize, std::size_t spatial = kEmbeddingSize,
                           std::uint64_t seed = 0);
/// Tower for the Siamese network: Topo-A up to its 256-unit embedding.
ModelSpec build_siamese(std::uint64_t seed = 0, Shape input = {5, 32, 32});
ModelSpec build_model(Architecture arch, std::uint64_t seed = 0);

/// Per-sample output shape after the first `upto` layers; throws on any
/// incompatibility (including a pooled dimension reaching zero).
Shape output_shape(const ModelSpec& spec, std::size_t upto);
Shape output_shape(const ModelSpec& spec);

std::size_t parameter_count(const LayerSpec& layer);
std::size_t parameter_count(const ModelSpec& spec);

/// Instantiated model. Parameters are Kaiming-uniform (conv/dense weights),
/// zero (biases, batchnorm shift) and one (batchnorm scale), drawn from the
/// spec seed.
class Network {
public:
  explicit Network(ModelSpec spec);

  const ModelSpec& spec() const { return spec_; }

  /// x is (N, input_shape...). Runs every layer.
  Tensor forward(const Tensor& x, bool training, Rng& rng);
  /// Runs the embedding prefix only.
  Tensor embed(const Tensor& x, bool training, Rng& rng);
  Tensor run(const Tensor& x, std::size_t from, std::size_t to, bool training, Rng& rng);

  std::vector<Tensor> parameters() const;
  std::size_t parameter_count() const;

  /// Frozen networks record no gradients and are skipped by optimizers.
  void set_frozen(bool frozen);
  bool frozen() const { return frozen_; }

  /// Flat copy of parameters followed by batchnorm running statistics.
  std::vector<double> state() const;
  void load_state(const std::vector<double>& state);

private:
  struct Slot {
    Tensor weight, bias;
    BatchNormState bn;
  };
  ModelSpec spec_;
  std::vector<Slot> slots_;
  bool frozen_ = false;
};

/// Siamese score for a pair of embeddings: 1 − σ(‖e1 − e2‖).
double similarity_score(std::span<const double> e1, std::span<const double> e2);

}  // namespace sonilab::nn
