#include "sonilab/nn/architectures.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "sonilab/error.hpp"

namespace sonilab::nn {
namespace {

constexpr Architecture kArchitectures[] = {
    Architecture::CNN1D,  Architecture::EEGNet, Architecture::TopoA,  Architecture::TopoB,
    Architecture::TopoC,  Architecture::TopoD,  Architecture::SpectA, Architecture::SpectB,
    Architecture::SpectC, Architecture::SpectD, Architecture::FusionMLP, Architecture::Siamese,
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

LayerSpec conv2d_layer(std::size_t in, std::size_t out, std::size_t kh, std::size_t kw, std::size_t groups = 1,
                       bool bias = true) {
  LayerSpec l;
  l.kind = LayerKind::Conv2d;
  l.in = in, l.out = out, l.kh = kh, l.kw = kw, l.groups = groups, l.bias = bias;
  return l;
}

LayerSpec simple(LayerKind kind) {
  LayerSpec l;
  l.kind = kind;
  return l;
}

LayerSpec pool(LayerKind kind, std::size_t kh, std::size_t kw) {
  LayerSpec l;
  l.kind = kind;
  l.kh = kh, l.kw = kw;
  return l;
}

LayerSpec dropout_layer(double p) {
  LayerSpec l;
  l.kind = LayerKind::Dropout;
  l.p = p;
  return l;
}

// Appends a dense layer sized from the current output shape.
void push_dense(ModelSpec& spec, std::size_t out) {
  const auto in = numel(output_shape(spec));
  LayerSpec l;
  l.kind = LayerKind::Dense;
  l.in = in, l.out = out;
  spec.layers.push_back(l);
}

char check_variant(char variant) {
  const char v = static_cast<char>(std::toupper(static_cast<unsigned char>(variant)));
  if (v < 'A' || v > 'D') throw_usage("bad_variant", std::string("CNN variant must be A-D, got ") + variant);
  return v;
}

ModelSpec build_2d_cnn(Architecture arch, char variant, std::uint64_t seed, Shape input) {
  const int blocks = check_variant(variant) - 'A' + 1;
  if (input.size() != 3) throw_usage("shape_mismatch", "2-D CNN input must be (C,H,W), got " + shape_string(input));
  ModelSpec spec{arch, input, {}, 0, seed};
  std::size_t channels = input[0];
  for (int b = 0; b < blocks; ++b) {
    spec.layers.push_back(conv2d_layer(channels, 32, 3, 3));
    spec.layers.push_back(simple(LayerKind::ReLU));
    spec.layers.push_back(pool(LayerKind::MaxPool2d, 2, 2));
    channels = 32;
  }
  output_shape(spec);  // rejects inputs that pool away
  spec.layers.push_back(simple(LayerKind::Flatten));
  push_dense(spec, kEmbeddingSize);
  spec.layers.push_back(simple(LayerKind::ReLU));
  spec.embedding_layers = spec.layers.size();
  spec.layers.push_back(dropout_layer(0.5));
  push_dense(spec, 2);
  return spec;
}

}  // namespace

std::string to_string(Architecture arch) {
  switch (arch) {
    case Architecture::CNN1D: return "CNN1D";
    case Architecture::EEGNet: return "EEGNet";
    case Architecture::TopoA: return "Topo-A";
    case Architecture::TopoB: return "Topo-B";
    case Architecture::TopoC: return "Topo-C";
    case Architecture::TopoD: return "Topo-D";
    case Architecture::SpectA: return "Spect-A";
    case Architecture::SpectB: return "Spect-B";
    case Architecture::SpectC: return "Spect-C";
    case Architecture::SpectD: return "Spect-D";
    case Architecture::FusionMLP: return "FusionMLP";
    case Architecture::Siamese: return "Siamese";
  }
  return "?";
}

Architecture parse_architecture(const std::string& text) {
  const auto t = lower(text);
  for (auto a : kArchitectures)
    if (lower(to_string(a)) == t) return a;
  if (t == "fusion") return Architecture::FusionMLP;
  if (t == "cnn1d" || t == "1d-cnn") return Architecture::CNN1D;
  throw_usage("unknown_architecture", "unknown architecture '" + text + "'");
}

std::string to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv1d: return "conv1d";
    case LayerKind::Conv2d: return "conv2d";
    case LayerKind::MaxPool1d: return "maxpool1d";
    case LayerKind::MaxPool2d: return "maxpool2d";
    case LayerKind::AvgPool2d: return "avgpool2d";
    case LayerKind::Dense: return "dense";
    case LayerKind::ReLU: return "relu";
    case LayerKind::BatchNorm: return "batchnorm";
    case LayerKind::Dropout: return "dropout";
    case LayerKind::Flatten: return "flatten";
    case LayerKind::Reshape: return "reshape";
  }
  return "?";
}

ModelSpec build_cnn1d(std::uint64_t seed) {
  ModelSpec spec{Architecture::CNN1D, {14, 256}, {}, 0, seed};
  std::size_t channels = 14;
  for (std::size_t filters : {32u, 64u, 128u}) {
    LayerSpec conv;
    conv.kind = LayerKind::Conv1d;
    conv.in = channels, conv.out = filters, conv.kw = 7;
    spec.layers.push_back(conv);
    spec.layers.push_back(simple(LayerKind::ReLU));
    spec.layers.push_back(pool(LayerKind::MaxPool1d, 1, 2));
    channels = filters;
  }
  spec.layers.push_back(simple(LayerKind::Flatten));
  LayerSpec bn;
  bn.kind = LayerKind::BatchNorm;
  bn.in = numel(output_shape(spec));
  spec.layers.push_back(bn);
  spec.layers.push_back(dropout_layer(0.5));
  push_dense(spec, kEmbeddingSize);
  spec.layers.push_back(simple(LayerKind::ReLU));
  spec.embedding_layers = spec.layers.size();
  push_dense(spec, 2);
  return spec;
}

ModelSpec build_eegnet(std::uint64_t seed) {
  constexpr std::size_t F1 = 8, D = 2, F2 = 16;
  ModelSpec spec{Architecture::EEGNet, {14, 256}, {}, 0, seed};
  LayerSpec r;
  r.kind = LayerKind::Reshape;
  r.shape = {1, 14, 256};
  spec.layers.push_back(r);
  spec.layers.push_back(conv2d_layer(1, F1, 1, 64, 1, false));  // temporal
  LayerSpec bn;
  bn.kind = LayerKind::BatchNorm;
  bn.in = F1;
  spec.layers.push_back(bn);
  auto depthwise = conv2d_layer(F1, F1 * D, 14, 1, F1, false);  // depthwise spatial, collapses the channel axis
  depthwise.same = false;
  spec.layers.push_back(depthwise);
  spec.layers.push_back(simple(LayerKind::ReLU));
  spec.layers.push_back(pool(LayerKind::AvgPool2d, 1, 4));
  spec.layers.push_back(dropout_layer(0.5));
  spec.layers.push_back(conv2d_layer(F1 * D, F1 * D, 1, 16, F1 * D, false));  // separable: depthwise
  spec.layers.push_back(conv2d_layer(F1 * D, F2, 1, 1, 1, false));            // separable: pointwise
  spec.layers.push_back(simple(LayerKind::ReLU));
  spec.layers.push_back(pool(LayerKind::AvgPool2d, 1, 8));
  spec.layers.push_back(dropout_layer(0.5));
  spec.layers.push_back(simple(LayerKind::Flatten));
  push_dense(spec, kEmbeddingSize);
  spec.layers.push_back(simple(LayerKind::ReLU));
  spec.embedding_layers = spec.layers.size();
  push_dense(spec, 2);
  return spec;
}

ModelSpec build_topo_cnn(char variant, std::uint64_t seed, Shape input) {
  const auto v = check_variant(variant);
  return build_2d_cnn(static_cast<Architecture>(static_cast<int>(Architecture::TopoA) + (v - 'A')), v, seed,
                      std::move(input));
}

ModelSpec build_spect_cnn(char variant, std::uint64_t seed, Shape input) {
  const auto v = check_variant(variant);
  return build_2d_cnn(static_cast<Architecture>(static_cast<int>(Architecture::SpectA) + (v - 'A')), v, seed,
                      std::move(input));
}

ModelSpec build_fusion_mlp(std::size_t temporal, std::size_t spatial, std::uint64_t seed) {
  if (temporal != kEmbeddingSize || spatial != kEmbeddingSize)
    throw_usage("shape_mismatch", "fusion expects two " + std::to_string(kEmbeddingSize) + "-d embeddings, got " +
                                      std::to_string(temporal) + " and " + std::to_string(spatial));
  ModelSpec spec{Architecture::FusionMLP, {temporal + spatial}, {}, 0, seed};
  push_dense(spec, 128);
  spec.layers.push_back(simple(LayerKind::ReLU));
  spec.layers.push_back(dropout_layer(0.5));
  push_dense(spec, 128);
  spec.layers.push_back(simple(LayerKind::ReLU));
  spec.embedding_layers = spec.layers.size();
  push_dense(spec, 2);
  return spec;
}

ModelSpec build_siamese(std::uint64_t seed, Shape input) {
  auto spec = build_topo_cnn('A', seed, std::move(input));
  spec.arch = Architecture::Siamese;
  spec.layers.resize(spec.embedding_layers);
  return spec;
}

ModelSpec build_model(Architecture arch, std::uint64_t seed) {
  switch (arch) {
    case Architecture::CNN1D: return build_cnn1d(seed);
    case Architecture::EEGNet: return build_eegnet(seed);
    case Architecture::TopoA: return build_topo_cnn('A', seed);
    case Architecture::TopoB: return build_topo_cnn('B', seed);
    case Architecture::TopoC: return build_topo_cnn('C', seed);
    case Architecture::TopoD: return build_topo_cnn('D', seed);
    case Architecture::SpectA: return build_spect_cnn('A', seed);
    case Architecture::SpectB: return build_spect_cnn('B', seed);
    case Architecture::SpectC: return build_spect_cnn('C', seed);
    case Architecture::SpectD: return build_spect_cnn('D', seed);
    case Architecture::FusionMLP: return build_fusion_mlp(kEmbeddingSize, kEmbeddingSize, seed);
    case Architecture::Siamese: return build_siamese(seed);
  }
  throw_usage("unknown_architecture", "unknown architecture");
}

Shape output_shape(const ModelSpec& spec, std::size_t upto) {
  Shape s = spec.input_shape;
  const auto fail = [&](std::size_t i, const std::string& why) {
    throw_usage("shape_mismatch", to_string(spec.arch) + " layer " + std::to_string(i) + " (" +
                                      to_string(spec.layers[i].kind) + "): " + why + ", input " + shape_string(s));
  };
  for (std::size_t i = 0; i < std::min(upto, spec.layers.size()); ++i) {
    const auto& l = spec.layers[i];
    switch (l.kind) {
      case LayerKind::Conv1d:
        if (s.size() != 2 || s[0] != l.in) fail(i, "expected (" + std::to_string(l.in) + ",L)");
        s = {l.out, s[1]};
        break;
      case LayerKind::Conv2d:
        if (s.size() != 3 || s[0] != l.in) fail(i, "expected (" + std::to_string(l.in) + ",H,W)");
        if (l.groups == 0 || l.in % l.groups || l.out % l.groups) fail(i, "bad groups");
        if (!l.same && (s[1] < l.kh || s[2] < l.kw)) fail(i, "kernel larger than input");
        s = l.same ? Shape{l.out, s[1], s[2]} : Shape{l.out, s[1] - l.kh + 1, s[2] - l.kw + 1};
        break;
      case LayerKind::MaxPool1d:
        if (s.size() != 2) fail(i, "expected (C,L)");
        s[1] /= l.kw;
        if (s[1] == 0) fail(i, "pooled length reaches 0");
        break;
      case LayerKind::MaxPool2d:
      case LayerKind::AvgPool2d:
        if (s.size() != 3) fail(i, "expected (C,H,W)");
        s[1] /= l.kh, s[2] /= l.kw;
        if (s[1] == 0 || s[2] == 0) fail(i, "pooled dimension reaches 0");
        break;
      case LayerKind::Dense:
        if (s.size() != 1 || s[0] != l.in) fail(i, "expected (" + std::to_string(l.in) + ")");
        s = {l.out};
        break;
      case LayerKind::BatchNorm:
        if (s.empty() || s[0] != l.in) fail(i, "feature axis must be " + std::to_string(l.in));
        break;
      case LayerKind::Flatten: s = {numel(s)}; break;
      case LayerKind::Reshape:
        if (numel(l.shape) != numel(s)) fail(i, "reshape to " + shape_string(l.shape));
        s = l.shape;
        break;
      case LayerKind::ReLU:
      case LayerKind::Dropout: break;
    }
  }
  return s;
}

Shape output_shape(const ModelSpec& spec) { return output_shape(spec, spec.layers.size()); }

std::size_t parameter_count(const LayerSpec& l) {
  switch (l.kind) {
    case LayerKind::Conv1d: return l.out * l.in * l.kw + (l.bias ? l.out : 0);
    case LayerKind::Conv2d: return l.out * (l.in / l.groups) * l.kh * l.kw + (l.bias ? l.out : 0);
    case LayerKind::Dense: return l.out * l.in + (l.bias ? l.out : 0);
    case LayerKind::BatchNorm: return 2 * l.in;
    default: return 0;
  }
}

std::size_t parameter_count(const ModelSpec& spec) {
  std::size_t n = 0;
  for (const auto& l : spec.layers) n += parameter_count(l);
  return n;
}

Network::Network(ModelSpec spec) : spec_(std::move(spec)) {
  output_shape(spec_);
  slots_.resize(spec_.layers.size());
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    const auto& l = spec_.layers[i];
    auto& slot = slots_[i];
    Rng rng(mix_seed(spec_.seed, i));
    const auto kaiming = [&](const Shape& shape, std::size_t fan_in) {
      const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
      std::vector<double> w(numel(shape));
      for (auto& v : w) v = rng.uniform(-bound, bound);
      return Tensor::from(shape, std::move(w), true);
    };
    switch (l.kind) {
      case LayerKind::Conv1d:
        slot.weight = kaiming({l.out, l.in, l.kw}, l.in * l.kw);
        if (l.bias) slot.bias = Tensor::zeros({l.out}, true);
        break;
      case LayerKind::Conv2d:
        slot.weight = kaiming({l.out, l.in / l.groups, l.kh, l.kw}, (l.in / l.groups) * l.kh * l.kw);
        if (l.bias) slot.bias = Tensor::zeros({l.out}, true);
        break;
      case LayerKind::Dense:
        slot.weight = kaiming({l.out, l.in}, l.in);
        if (l.bias) slot.bias = Tensor::zeros({l.out}, true);
        break;
      case LayerKind::BatchNorm:
        slot.weight = Tensor::from({l.in}, std::vector<double>(l.in, 1.0), true);
        slot.bias = Tensor::zeros({l.in}, true);
        slot.bn.running_mean.assign(l.in, 0.0);
        slot.bn.running_var.assign(l.in, 1.0);
        break;
      default: break;
    }
  }
}

Tensor Network::forward(const Tensor& x, bool training, Rng& rng) {
  return run(x, 0, spec_.layers.size(), training, rng);
}

Tensor Network::embed(const Tensor& x, bool training, Rng& rng) {
  return run(x, 0, spec_.embedding_layers, training, rng);
}

Tensor Network::run(const Tensor& x, std::size_t from, std::size_t to, bool training, Rng& rng) {
  if (from == 0) {
    Shape expect{x.shape().empty() ? 0 : x.dim(0)};
    expect.insert(expect.end(), spec_.input_shape.begin(), spec_.input_shape.end());
    if (x.shape() != expect)
      throw_usage("shape_mismatch", to_string(spec_.arch) + " expects input " + shape_string(expect) + ", got " +
                                        shape_string(x.shape()));
  }
  Tensor h = x;
  for (std::size_t i = from; i < std::min(to, spec_.layers.size()); ++i) {
    const auto& l = spec_.layers[i];
    auto& slot = slots_[i];
    const auto n = h.dim(0);
    switch (l.kind) {
      case LayerKind::Conv1d: h = conv1d(h, slot.weight, slot.bias); break;
      case LayerKind::Conv2d: h = conv2d(h, slot.weight, slot.bias, l.same ? same_padding(l.kh, l.kw) : Padding2d{}, l.groups);
        break;
      case LayerKind::MaxPool1d: h = maxpool1d(h, l.kw); break;
      case LayerKind::MaxPool2d: h = maxpool2d(h, l.kh, l.kw); break;
      case LayerKind::AvgPool2d: h = avgpool2d(h, l.kh, l.kw); break;
      case LayerKind::Dense: h = dense(h, slot.weight, slot.bias); break;
      case LayerKind::ReLU: h = relu(h); break;
      case LayerKind::BatchNorm: h = batchnorm(h, slot.weight, slot.bias, slot.bn, training && !frozen_); break;
      case LayerKind::Dropout: h = dropout(h, l.p, training && !frozen_, rng); break;
      case LayerKind::Flatten: h = flatten(h); break;
      case LayerKind::Reshape: {
        Shape s{n};
        s.insert(s.end(), l.shape.begin(), l.shape.end());
        h = reshape(h, s);
        break;
      }
    }
  }
  return h;
}

std::vector<Tensor> Network::parameters() const {
  std::vector<Tensor> out;
  for (const auto& s : slots_) {
    if (s.weight.defined()) out.push_back(s.weight);
    if (s.bias.defined()) out.push_back(s.bias);
  }
  return out;
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.size();
  return n;
}

void Network::set_frozen(bool frozen) {
  frozen_ = frozen;
  for (auto& p : parameters()) p.set_requires_grad(!frozen);
}

std::vector<double> Network::state() const {
  std::vector<double> out;
  for (const auto& p : parameters()) out.insert(out.end(), p.data().begin(), p.data().end());
  for (const auto& s : slots_) {
    out.insert(out.end(), s.bn.running_mean.begin(), s.bn.running_mean.end());
    out.insert(out.end(), s.bn.running_var.begin(), s.bn.running_var.end());
  }
  return out;
}

void Network::load_state(const std::vector<double>& state) {
  std::size_t expected = parameter_count();
  for (const auto& s : slots_) expected += s.bn.running_mean.size() + s.bn.running_var.size();
  if (state.size() != expected)
    throw_data("state_size", "model state has " + std::to_string(state.size()) + " values, expected " +
                                 std::to_string(expected));
  std::size_t at = 0;
  for (auto& p : parameters()) {
    auto d = p.mutable_data();
    std::copy_n(state.begin() + static_cast<std::ptrdiff_t>(at), d.size(), d.begin());
    at += d.size();
  }
  for (auto& s : slots_) {
    for (auto* v : {&s.bn.running_mean, &s.bn.running_var}) {
      std::copy_n(state.begin() + static_cast<std::ptrdiff_t>(at), v->size(), v->begin());
      at += v->size();
    }
  }
}

double similarity_score(std::span<const double> e1, std::span<const double> e2) {
  if (e1.size() != e2.size())
    throw_usage("shape_mismatch", "embedding sizes differ: " + std::to_string(e1.size()) + " vs " +
                                      std::to_string(e2.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < e1.size(); ++i) s += (e1[i] - e2[i]) * (e1[i] - e2[i]);
  return 1.0 - 1.0 / (1.0 + std::exp(-std::sqrt(s)));
}

}  // namespace sonilab::nn
