#pragma once

#include <cstdint>
#include <vector>

#include "sonilab/nn/tensor.hpp"
#include "sonilab/rng.hpp"

namespace sonilab::nn {

struct Padding2d {
  std::size_t top = 0, bottom = 0, left = 0, right = 0;
};

/// "Same" padding for a stride-1 kernel; odd remainders go to the end.
Padding2d same_padding(std::size_t kh, std::size_t kw);

// x (N,C,H,W), weight (O, C/groups, kh, kw), bias (O) or undefined.
Tensor conv2d(const Tensor& x, const Tensor& weight, const Tensor& bias, Padding2d pad,
              std::size_t groups = 1);
// x (N,C,L), weight (O,C,k); same padding.
Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias);

// Non-overlapping pooling (stride == kernel, floor division).
Tensor maxpool2d(const Tensor& x, std::size_t kh, std::size_t kw);
Tensor maxpool1d(const Tensor& x, std::size_t k);
Tensor avgpool2d(const Tensor& x, std::size_t kh, std::size_t kw);

// x (N,in), weight (out,in), bias (out).
Tensor dense(const Tensor& x, const Tensor& weight, const Tensor& bias);

Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

/// Running statistics live outside the graph; they are updated in
/// training mode and used in eval mode.
struct BatchNormState {
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.1;
  double eps = 1e-5;
};

// Normalizes axis 1 of (N,F) or (N,C,...) inputs.
Tensor batchnorm(const Tensor& x, const Tensor& gamma, const Tensor& beta, BatchNormState& state,
                 bool training);

/// Inverted dropout; identity when !training or p == 0.
Tensor dropout(const Tensor& x, double p, bool training, Rng& rng);

Tensor reshape(const Tensor& x, const Shape& shape);
Tensor flatten(const Tensor& x);  // (N, ...) -> (N, rest)
Tensor concat(const Tensor& a, const Tensor& b);  // along axis 1 of 2-D tensors
Tensor gather_rows(const Tensor& x, const std::vector<std::size_t>& rows);

Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);

/// Row-wise softmax of (N,K) logits (values only).
std::vector<double> softmax(const Tensor& logits);
/// Mean negative log-likelihood over rows.
Tensor softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels);

/// Row-wise Euclidean distance of two (N,D) tensors, shape (N).
Tensor l2_distance(const Tensor& a, const Tensor& b);
/// Mean of y·d² + (1−y)·max(0, m−d)² over pairs; y = 1 for positive pairs.
Tensor contrastive_loss(const Tensor& d, const std::vector<int>& y, double margin);

/// Fingerprint of every piecewise-linear branch taken (relu signs, pool
/// argmaxes) while enabled. Finite-difference checks use it to discard
/// stencils that straddle a kink.
struct KinkMonitor {
  static void enable(bool on);
  static void reset();
  static std::uint64_t fingerprint();
  static void record(std::uint64_t value);
  static bool enabled();
};

}  // namespace sonilab::nn
