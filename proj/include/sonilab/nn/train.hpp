#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sonilab/matrix.hpp"
#include "sonilab/nn/architectures.hpp"

namespace sonilab::nn {

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 100;
  std::size_t patience = 10;
  /// Share of the training data held out for early stopping (0 disables the
  /// split; the training loss is monitored instead).
  double validation_fraction = 0.1;
  double margin = 1.0;  // contrastive margin (Siamese only)
  std::uint64_t seed = 0;
};

void validate(const TrainConfig& config);

/// Samples stored back to back in row-major order.
struct Dataset {
  Shape sample_shape;
  std::vector<double> inputs;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::size_t sample_size() const { return numel(sample_shape); }
  Tensor batch(std::span<const std::size_t> indices) const;
  Dataset subset(std::span<const std::size_t> indices) const;
};

Dataset make_dataset(const Matrix& rows, Shape sample_shape, std::vector<int> labels);

struct TrainReport {
  std::size_t epochs_run = 0;
  std::size_t best_epoch = 0;
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  std::vector<double> first_batch_loss;  // loss on a fixed batch after each epoch
};

class Adam {
public:
  Adam(std::vector<Tensor> params, const TrainConfig& config);
  void step();
  void zero_grad();

private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_, v_;
  double lr_, b1_, b2_, eps_;
  std::size_t t_ = 0;
};

/// Softmax cross-entropy training with Adam and early stopping; restores the
/// best-validation parameters. Deterministic given config.seed.
TrainReport train_classifier(Network& net, const Dataset& data, const TrainConfig& config);

/// Contrastive training of a shared-weight tower. Each batch is embedded
/// once and every within-batch pair contributes; pairs are positive when
/// labels match. Non-empty `groups` (one id per sample) restricts pairs to
/// samples of the same group.
TrainReport train_siamese(Network& tower, const Dataset& data, const TrainConfig& config,
                          std::span<const int> groups = {});

/// Eval-mode forward in chunks.
Matrix predict_proba(Network& net, const Dataset& data);
std::vector<int> predict(Network& net, const Dataset& data);
/// Eval-mode embeddings (N × 256).
Matrix extract_embeddings(Network& net, const Dataset& data);
std::vector<double> extract_embedding(Network& net, std::span<const double> sample);

}  // namespace sonilab::nn
