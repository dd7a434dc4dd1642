#include "sonilab/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "sonilab/error.hpp"

namespace sonilab::nn {
namespace {

constexpr std::size_t kInferenceChunk = 64;

// Batches of the given order; a trailing singleton is folded into the
// previous batch so batchnorm always sees at least two samples.
std::vector<std::vector<std::size_t>> make_batches(const std::vector<std::size_t>& order, std::size_t size) {
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t i = 0; i < order.size(); i += size)
    out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                     order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), i + size)));
  if (out.size() > 1 && out.back().size() == 1) {
    out[out.size() - 2].push_back(out.back()[0]);
    out.pop_back();
  }
  return out;
}

void check_shapes(const Network& net, const Dataset& data) {
  if (data.sample_shape != net.spec().input_shape)
    throw_usage("shape_mismatch", to_string(net.spec().arch) + " expects samples " +
                                      shape_string(net.spec().input_shape) + ", dataset has " +
                                      shape_string(data.sample_shape));
  if (data.inputs.size() != data.size() * data.sample_size())
    throw_usage("shape_mismatch", "dataset value count does not match its labels");
}

void check_finite(double loss, std::size_t epoch, std::size_t batch, const Network& net) {
  if (std::isfinite(loss)) return;
  double max_abs = 0.0;
  for (const auto& p : net.parameters())
    for (double v : p.data()) max_abs = std::max(max_abs, std::abs(v));
  throw_numeric("nan_loss", "non-finite loss in " + to_string(net.spec().arch) + " at epoch " +
                                std::to_string(epoch) + ", batch " + std::to_string(batch) +
                                "; max |parameter| = " + std::to_string(max_abs));
}

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

// Within-batch pair list and pair labels.
void batch_pairs(const std::vector<int>& labels, const std::vector<int>& groups, std::vector<std::size_t>& left,
                 std::vector<std::size_t>& right, std::vector<int>& same) {
  left.clear(), right.clear(), same.clear();
  for (std::size_t i = 0; i < labels.size(); ++i)
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      if (!groups.empty() && groups[i] != groups[j]) continue;
      left.push_back(i);
      right.push_back(j);
      same.push_back(labels[i] == labels[j] ? 1 : 0);
    }
}

using LossFn = std::function<Tensor(Network&, const Dataset&, std::span<const std::size_t>, bool, Rng&)>;

Tensor classifier_loss(Network& net, const Dataset& data, std::span<const std::size_t> idx, bool training,
                       Rng& rng) {
  std::vector<int> y;
  for (auto i : idx) y.push_back(data.labels[i]);
  return softmax_cross_entropy(net.forward(data.batch(idx), training, rng), y);
}


TrainReport fit(Network& net, const Dataset& data, const TrainConfig& config, const LossFn& loss_fn) {
  validate(config);
  check_shapes(net, data);
  if (data.size() < 2) throw_usage("empty_training_set", "training needs at least two samples");

  Rng split_rng(mix_seed(config.seed, 1));
  Rng order_rng(mix_seed(config.seed, 2));
  Rng dropout_rng(mix_seed(config.seed, 3));

  auto all = iota(data.size());
  split_rng.shuffle(all);
  auto n_val = static_cast<std::size_t>(std::lround(config.validation_fraction * static_cast<double>(data.size())));
  if (data.size() - n_val < 2) n_val = 0;
  std::vector<std::size_t> val(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> train(all.begin() + static_cast<std::ptrdiff_t>(n_val), all.end());
  std::vector<std::size_t> probe(train.begin(), train.begin() + static_cast<std::ptrdiff_t>(std::min(train.size(), config.batch_size)));
  if (probe.size() < 2) probe = train;

  Adam opt(net.parameters(), config);
  TrainReport report;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_state = net.state();
  std::size_t since_best = 0;

  const auto evaluate = [&](const std::vector<std::size_t>& idx) {
    Rng unused(0);
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& b : make_batches(idx, std::max<std::size_t>(config.batch_size, kInferenceChunk))) {
      total += loss_fn(net, data, b, false, unused).item() * static_cast<double>(b.size());
      count += b.size();
    }
    return total / static_cast<double>(count);
  };

  for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
    auto order = train;
    order_rng.shuffle(order);
    double total = 0.0;
    std::size_t b_index = 0;
    for (const auto& b : make_batches(order, config.batch_size)) {
      opt.zero_grad();
      auto loss = loss_fn(net, data, b, true, dropout_rng);
      check_finite(loss.item(), epoch, b_index++, net);
      loss.backward();
      opt.step();
      total += loss.item() * static_cast<double>(b.size());
    }
    report.train_loss.push_back(total / static_cast<double>(train.size()));
    report.first_batch_loss.push_back(evaluate(probe));
    const double monitored = val.empty() ? report.train_loss.back() : evaluate(val);
    report.validation_loss.push_back(monitored);
    report.epochs_run = epoch + 1;
    if (!std::isfinite(monitored)) check_finite(monitored, epoch, 0, net);
    if (monitored < best) {
      best = monitored;
      best_state = net.state();
      report.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  net.load_state(best_state);
  return report;
}

}  // namespace

void validate(const TrainConfig& c) {
  if (!(c.learning_rate > 0) || !(c.beta1 > 0 && c.beta1 < 1) || !(c.beta2 > 0 && c.beta2 < 1) ||
      !(c.epsilon > 0) || c.batch_size == 0 || c.max_epochs == 0 || c.patience == 0 ||
      !(c.validation_fraction >= 0 && c.validation_fraction < 1) || !(c.margin > 0))
    throw_usage("bad_train_config", "training hyperparameters must be positive (validation fraction in [0,1))");
}

Tensor Dataset::batch(std::span<const std::size_t> indices) const {
  const auto d = sample_size();
  std::vector<double> values(indices.size() * d);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= size()) throw_usage("index_range", "sample index out of range");
    std::copy_n(inputs.begin() + static_cast<std::ptrdiff_t>(indices[r] * d), d,
                values.begin() + static_cast<std::ptrdiff_t>(r * d));
  }
  Shape shape{indices.size()};
  shape.insert(shape.end(), sample_shape.begin(), sample_shape.end());
  return Tensor::from(shape, std::move(values));
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out{sample_shape, {}, {}};
  const auto d = sample_size();
  out.inputs.reserve(indices.size() * d);
  for (auto i : indices) {
    out.inputs.insert(out.inputs.end(), inputs.begin() + static_cast<std::ptrdiff_t>(i * d),
                      inputs.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
    out.labels.push_back(labels.at(i));
  }
  return out;
}

Dataset make_dataset(const Matrix& rows, Shape sample_shape, std::vector<int> labels) {
  if (rows.rows() != labels.size() || rows.cols() != numel(sample_shape))
    throw_usage("shape_mismatch", "feature matrix " + std::to_string(rows.rows()) + "x" +
                                      std::to_string(rows.cols()) + " does not match samples " +
                                      shape_string(sample_shape) + " x " + std::to_string(labels.size()));
  return Dataset{std::move(sample_shape), rows.values(), std::move(labels)};
}

Adam::Adam(std::vector<Tensor> params, const TrainConfig& config)
    : lr_(config.learning_rate), b1_(config.beta1), b2_(config.beta2), eps_(config.epsilon) {
  for (auto& p : params)
    if (p.requires_grad()) params_.push_back(p);
  for (const auto& p : params_) {
    m_.emplace_back(p.size(), 0.0);
    v_.emplace_back(p.size(), 0.0);
  }
}

void Adam::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    auto& p = params_[k];
    if (!p.has_grad()) continue;
    auto w = p.mutable_data();
    const auto g = p.grad();
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = b1_ * m[i] + (1.0 - b1_) * g[i];
      v[i] = b2_ * v[i] + (1.0 - b2_) * g[i] * g[i];
      w[i] -= lr_ * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps_);
    }
  }
}

TrainReport train_classifier(Network& net, const Dataset& data, const TrainConfig& config) {
  return fit(net, data, config, classifier_loss);
}

TrainReport train_siamese(Network& tower, const Dataset& data, const TrainConfig& config,
                          std::span<const int> groups) {
  if (!groups.empty() && groups.size() != data.size())
    throw_usage("shape_mismatch", "pair groups must have one entry per sample");
  const double margin = config.margin;
  const std::vector<int> group_ids(groups.begin(), groups.end());
  return fit(tower, data, config,
             [margin, &group_ids](Network& net, const Dataset& d, std::span<const std::size_t> idx, bool training,
                                  Rng& rng) {
               std::vector<int> y, g;
               for (auto i : idx) {
                 y.push_back(d.labels[i]);
                 if (!group_ids.empty()) g.push_back(group_ids[i]);
               }
               std::vector<std::size_t> left, right;
               std::vector<int> same;
               batch_pairs(y, g, left, right, same);
               if (left.empty()) return Tensor::from({1}, {0.0});
               auto e = net.embed(d.batch(idx), training, rng);
               auto dist = l2_distance(gather_rows(e, left), gather_rows(e, right));
               return contrastive_loss(dist, same, margin);
             });
}

Matrix predict_proba(Network& net, const Dataset& data) {
  check_shapes(net, data);
  Matrix out(data.size(), 2);
  Rng unused(0);
  for (const auto& b : make_batches(iota(data.size()), kInferenceChunk)) {
    auto logits = net.forward(data.batch(b), false, unused);
    if (logits.shape() != Shape{b.size(), 2})
      throw_usage("shape_mismatch", "classifier head must emit (N,2), got " + shape_string(logits.shape()));
    const auto p = softmax(logits);
    for (std::size_t r = 0; r < b.size(); ++r) {
      out(b[r], 0) = p[2 * r];
      out(b[r], 1) = p[2 * r + 1];
    }
  }
  return out;
}

std::vector<int> predict(Network& net, const Dataset& data) {
  const auto p = predict_proba(net, data);
  std::vector<int> out(data.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = p(i, 1) > p(i, 0) ? 1 : 0;
  return out;
}

Matrix extract_embeddings(Network& net, const Dataset& data) {
  check_shapes(net, data);
  Matrix out(data.size(), kEmbeddingSize);
  Rng unused(0);
  for (const auto& b : make_batches(iota(data.size()), kInferenceChunk)) {
    auto e = net.embed(data.batch(b), false, unused);
    if (e.size() != b.size() * kEmbeddingSize)
      throw_usage("shape_mismatch", "embedding must be 256-d, got " + shape_string(e.shape()));
    for (std::size_t r = 0; r < b.size(); ++r)
      std::copy_n(e.data().begin() + static_cast<std::ptrdiff_t>(r * kEmbeddingSize), kEmbeddingSize,
                  out.row(b[r]).begin());
  }
  return out;
}

std::vector<double> extract_embedding(Network& net, std::span<const double> sample) {
  Dataset one{net.spec().input_shape, {sample.begin(), sample.end()}, {0}};
  const auto m = extract_embeddings(net, one);
  return {m.row(0).begin(), m.row(0).end()};
}

}  // namespace sonilab::nn
