#pragma once

// Finite-difference gradient checks for every autodiff primitive and every
// architecture; shared by the unit tests and the acceptance runner.

#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sonilab/nn/architectures.hpp"

namespace gradsuite {

using sonilab::Rng;
using sonilab::nn::Shape;
using sonilab::nn::Tensor;
namespace nn = sonilab::nn;

struct Case {
  std::string name;
  std::function<oracle::GradCheck()> run;
};

inline Tensor random_leaf(const Shape& shape, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  std::vector<double> v(nn::numel(shape));
  for (auto& x : v) x = scale * rng.normal();
  return Tensor::from(shape, std::move(v), true);
}

/// sum(y * r) for a fixed random r, so every output element matters.
inline Tensor project(const Tensor& y, std::uint64_t seed = 99) {
  Rng rng(seed);
  std::vector<double> r(y.size());
  for (auto& x : r) x = rng.normal();
  return nn::sum(nn::mul(y, Tensor::from(y.shape(), std::move(r))));
}

inline std::vector<Case> primitive_cases() {
  std::vector<Case> cases;
  auto add_case = [&](std::string name, std::vector<Tensor> leaves, std::function<Tensor()> f) {
    cases.push_back({std::move(name), [leaves, f] { return oracle::check_gradients(f, leaves, 40); }});
  };
  {
    auto x = random_leaf({2, 4, 6, 7}, 1), w = random_leaf({6, 2, 3, 2}, 2), b = random_leaf({6}, 3);
    add_case("conv2d grouped same", {x, w, b},
             [=] { return project(nn::conv2d(x, w, b, nn::same_padding(3, 2), 2)); });
    auto w1 = random_leaf({3, 4, 2, 3}, 4);
    add_case("conv2d valid no-bias", {x, w1}, [=] { return project(nn::conv2d(x, w1, Tensor(), {}, 1)); });
    auto wd = random_leaf({4, 1, 1, 3}, 5);
    add_case("conv2d depthwise", {x, wd},
             [=] { return project(nn::conv2d(x, wd, Tensor(), nn::same_padding(1, 3), 4)); });
  }
  {
    auto x = random_leaf({2, 3, 11}, 6), w = random_leaf({5, 3, 4}, 7), b = random_leaf({5}, 8);
    add_case("conv1d", {x, w, b}, [=] { return project(nn::conv1d(x, w, b)); });
    add_case("maxpool1d", {x}, [=] { return project(nn::maxpool1d(x, 2)); });
  }
  {
    auto x = random_leaf({2, 3, 6, 5}, 9);
    add_case("maxpool2d", {x}, [=] { return project(nn::maxpool2d(x, 2, 2)); });
    add_case("avgpool2d", {x}, [=] { return project(nn::avgpool2d(x, 3, 2)); });
    add_case("relu", {x}, [=] { return project(nn::relu(x)); });
    add_case("sigmoid", {x}, [=] { return project(nn::sigmoid(x)); });
    add_case("reshape+flatten", {x}, [=] { return project(nn::flatten(nn::reshape(x, {2, 3, 30}))); });
    auto g = random_leaf({3}, 10), be = random_leaf({3}, 11);
    add_case("batchnorm train", {x, g, be}, [=] {
      nn::BatchNormState s;
      return project(nn::batchnorm(x, g, be, s, true));
    });
    add_case("batchnorm eval", {x, g, be}, [=] {
      nn::BatchNormState s{{0.1, -0.2, 0.3}, {1.5, 0.5, 2.0}};
      return project(nn::batchnorm(x, g, be, s, false));
    });
    add_case("dropout", {x}, [=] {
      Rng rng(5);
      return project(nn::dropout(x, 0.5, true, rng));
    });
  }
  {
    auto x = random_leaf({4, 6}, 12), w = random_leaf({3, 6}, 13), b = random_leaf({3}, 14);
    auto y = random_leaf({4, 6}, 15), z = random_leaf({4, 2}, 16);
    add_case("dense", {x, w, b}, [=] { return project(nn::dense(x, w, b)); });
    add_case("batchnorm 2d", {x}, [=] {
      nn::BatchNormState s;
      return project(nn::batchnorm(x, Tensor::from({6}, std::vector<double>(6, 1.3)), Tensor::zeros({6}), s, true));
    });
    add_case("add", {x, y}, [=] { return project(nn::add(x, y)); });
    add_case("mul", {x, y}, [=] { return project(nn::mul(x, y)); });
    add_case("mean", {x}, [=] { return nn::mean(nn::mul(x, x)); });
    add_case("concat", {x, z}, [=] { return project(nn::concat(x, z)); });
    add_case("gather_rows", {x}, [=] { return project(nn::gather_rows(x, {3, 0, 3, 1})); });
    add_case("softmax cross-entropy", {x}, [=] { return nn::softmax_cross_entropy(x, {0, 5, 2, 2}); });
    add_case("l2 distance", {x, y}, [=] { return project(nn::l2_distance(x, y)); });
    add_case("contrastive loss", {x, y}, [=] { return nn::contrastive_loss(nn::l2_distance(x, y), {1, 0, 0, 1}, 4.0); });
  }
  return cases;
}

/// Loss over a batch of 2 for the full network in training mode (batchnorm
/// on batch statistics, a fixed dropout mask).
inline oracle::GradCheck check_network(nn::Network& net, std::uint64_t seed, std::size_t per_leaf) {
  Shape shape = net.spec().input_shape;
  shape.insert(shape.begin(), 2);
  auto x = random_leaf(shape, seed);
  auto f = [&net, x, seed] {
    Rng rng(seed + 1);
    return project(net.forward(x, true, rng), seed + 2);
  };
  auto leaves = net.parameters();
  leaves.push_back(x);
  return oracle::check_gradients(f, leaves, per_leaf);
}

inline oracle::GradCheck check_siamese(std::size_t per_leaf) {
  nn::Network tower(nn::build_siamese(21));
  auto a = random_leaf({4, 5, 32, 32}, 22), b = random_leaf({4, 5, 32, 32}, 23);
  auto f = [&tower, a, b] {
    Rng rng(1);
    auto ea = tower.embed(a, true, rng);
    auto eb = tower.embed(b, true, rng);
    return nn::contrastive_loss(nn::l2_distance(ea, eb), {1, 0, 1, 0}, 5.0);
  };
  auto leaves = tower.parameters();
  leaves.push_back(a);
  return oracle::check_gradients(f, leaves, per_leaf);
}

inline std::vector<Case> architecture_cases(std::size_t per_leaf = 8) {
  using A = nn::Architecture;
  std::vector<Case> cases;
  for (A arch : {A::CNN1D, A::EEGNet, A::TopoA, A::TopoB, A::TopoC, A::TopoD, A::SpectA, A::SpectB, A::SpectC,
                 A::SpectD, A::FusionMLP}) {
    cases.push_back({nn::to_string(arch), [arch, per_leaf] {
                       nn::Network net(nn::build_model(arch, 7));
                       return check_network(net, 31, per_leaf);
                     }});
  }
  cases.push_back({"Siamese", [per_leaf] { return check_siamese(per_leaf); }});
  return cases;
}

}  // namespace gradsuite
