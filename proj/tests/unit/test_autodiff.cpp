#include <gtest/gtest.h>

#include <cmath>

#include "../gradient_suite.hpp"
#include "sonilab/error.hpp"
#include "sonilab/nn/checkpoint.hpp"
#include "sonilab/nn/train.hpp"

using namespace sonilab;
using namespace sonilab::nn;

TEST(Gradients, EveryPrimitivePassesFiniteDifferences) {
  for (const auto& c : gradsuite::primitive_cases()) {
    const auto r = c.run();
    EXPECT_LE(r.max_rel_error, 1e-4) << c.name;
    EXPECT_GT(r.checked, 0u) << c.name;
  }
}

TEST(Gradients, ArchitecturesSpotCheck) {
  // The acceptance runner covers all of them at higher density.
  for (const auto& c : gradsuite::architecture_cases(3)) {
    if (c.name != "EEGNet" && c.name != "Topo-A" && c.name != "FusionMLP") continue;
    const auto r = c.run();
    EXPECT_LE(r.max_rel_error, 1e-4) << c.name;
    EXPECT_GT(r.checked, 10u) << c.name;
  }
}

TEST(Ops, ConvolutionMatchesDirectSum) {
  auto x = gradsuite::random_leaf({1, 2, 4, 5}, 1);
  auto w = gradsuite::random_leaf({3, 2, 3, 3}, 2);
  const auto y = conv2d(x, w, Tensor(), same_padding(3, 3));
  ASSERT_EQ(y.shape(), (Shape{1, 3, 4, 5}));
  auto xv = [&](int c, int i, int j) { return (i < 0 || j < 0 || i >= 4 || j >= 5) ? 0.0 : x.data()[c * 20 + i * 5 + j]; };
  for (int o = 0; o < 3; ++o)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 5; ++j) {
        double acc = 0.0;
        for (int c = 0; c < 2; ++c)
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) acc += w.data()[((o * 2 + c) * 3 + a) * 3 + b] * xv(c, i + a - 1, j + b - 1);
        EXPECT_NEAR(y.data()[o * 20 + i * 5 + j], acc, 1e-12);
      }
}

TEST(Ops, ShapeMismatchReportsBothShapes) {
  auto x = Tensor::zeros({2, 3});
  auto w = Tensor::zeros({4, 5});
  try {
    dense(x, w, Tensor::zeros({4}));
    FAIL();
  } catch (const Error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("(2,3)"), std::string::npos) << msg;
    EXPECT_NE(msg.find("(4,5)"), std::string::npos) << msg;
  }
}

TEST(Ops, PoolingTooSmallIsRejected) {
  EXPECT_THROW(avgpool2d(Tensor::zeros({1, 1, 2, 2}), 3, 3), Error);
}

TEST(Ops, DropoutScalesSurvivors) {
  auto x = Tensor::from({1, 1000}, std::vector<double>(1000, 1.0));
  Rng rng(3);
  const auto y = dropout(x, 0.5, true, rng);
  std::size_t kept = 0;
  for (double v : y.data()) {
    EXPECT_TRUE(v == 0.0 || v == 2.0);
    kept += v != 0.0;
  }
  EXPECT_NEAR(double(kept), 500.0, 60.0);
  EXPECT_EQ(dropout(x, 0.5, false, rng).data()[7], 1.0);
}

TEST(Ops, BatchnormRunningStatistics) {
  auto x = Tensor::from({4, 1}, {1.0, 2.0, 3.0, 4.0});
  BatchNormState s;
  const auto y = batchnorm(x, Tensor::from({1}, {1.0}), Tensor::from({1}, {0.0}), s, true);
  EXPECT_NEAR(y.data()[0], -1.5 / std::sqrt(1.25 + 1e-5), 1e-12);
  ASSERT_EQ(s.running_mean.size(), 1u);
  EXPECT_NEAR(s.running_mean[0], 0.1 * 2.5, 1e-12);
  EXPECT_NEAR(s.running_var[0], 0.9 + 0.1 * (5.0 / 3.0), 1e-12);  // unbiased batch variance
}

TEST(Ops, SoftmaxAndLosses) {
  auto logits = Tensor::from({1, 2}, {0.0, std::log(3.0)});
  const auto p = softmax(logits);
  EXPECT_NEAR(p[1], 0.75, 1e-12);
  EXPECT_NEAR(softmax_cross_entropy(logits, {1}).item(), -std::log(0.75), 1e-12);
  auto a = Tensor::from({2, 2}, {0, 0, 0, 0}), b = Tensor::from({2, 2}, {3, 4, 1, 0});
  const auto d = l2_distance(a, b);
  EXPECT_DOUBLE_EQ(d.data()[0], 5.0);
  EXPECT_NEAR(contrastive_loss(d, {1, 0}, 2.0).item(), (25.0 + 1.0) / 2.0, 1e-12);
}

TEST(Architectures, ParameterCountsMatchLayerFormulas) {
  EXPECT_EQ(parameter_count(build_eegnet()), 34802u);
  for (auto arch : {Architecture::CNN1D, Architecture::EEGNet, Architecture::TopoA, Architecture::TopoD,
                    Architecture::SpectB, Architecture::FusionMLP, Architecture::Siamese}) {
    Network net(build_model(arch, 1));
    EXPECT_EQ(net.parameter_count(), parameter_count(net.spec())) << to_string(arch);
  }
  EXPECT_EQ(parameter_count(build_fusion_mlp()), (512u * 128u + 128u) + (128u * 128u + 128u) + (128u * 2u + 2u));
}

TEST(Architectures, EmbeddingsAre256Wide) {
  for (auto arch : {Architecture::CNN1D, Architecture::EEGNet, Architecture::TopoB, Architecture::SpectC,
                    Architecture::Siamese}) {
    const auto spec = build_model(arch, 1);
    EXPECT_EQ(output_shape(spec, spec.embedding_layers), (Shape{kEmbeddingSize})) << to_string(arch);
    if (arch != Architecture::Siamese) {
      EXPECT_EQ(output_shape(spec), (Shape{2})) << to_string(arch);
    }
  }
  EXPECT_THROW(build_fusion_mlp(128, 256), Error);
}

TEST(Architectures, NamesParse) {
  EXPECT_EQ(parse_architecture("topo-c"), Architecture::TopoC);
  EXPECT_EQ(parse_architecture("fusion"), Architecture::FusionMLP);
  EXPECT_EQ(parse_architecture("1d-cnn"), Architecture::CNN1D);
  EXPECT_EQ(to_string(Architecture::SpectA), "Spect-A");
  EXPECT_THROW(parse_architecture("resnet"), Error);
}

TEST(Architectures, OversizedStackIsRejected) {
  EXPECT_THROW(output_shape(build_topo_cnn('D', 0, {5, 8, 8})), Error);
}

TEST(Network, InitializationIsSeeded) {
  Network a(build_topo_cnn('A', 5)), b(build_topo_cnn('A', 5)), c(build_topo_cnn('A', 6));
  EXPECT_EQ(a.state(), b.state());
  EXPECT_NE(a.state(), c.state());
  const auto w = a.parameters()[0];
  const double fan_in = 5.0 * 3.0 * 3.0, bound = std::sqrt(6.0 / fan_in);
  for (double v : w.data()) EXPECT_LE(std::abs(v), bound);
}

TEST(Network, FrozenRecordsNoGradients) {
  Network net(build_fusion_mlp(256, 256, 1));
  net.set_frozen(true);
  auto x = gradsuite::random_leaf({2, 512}, 3);
  Rng rng(1);
  auto loss = gradsuite::project(net.forward(x, true, rng));
  loss.backward();
  for (const auto& p : net.parameters()) EXPECT_FALSE(p.has_grad());
  EXPECT_TRUE(x.has_grad());
}

namespace {

Dataset separable(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix rows(n, 512);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    for (std::size_t j = 0; j < 512; ++j) rows(i, j) = rng.normal() + (y[i] && j < 16 ? 1.5 : 0.0);
  }
  return make_dataset(rows, {512}, y);
}

}  // namespace

TEST(Train, ClassifierLearnsSeparableData) {
  Network net(build_fusion_mlp(256, 256, 1));
  TrainConfig cfg;
  cfg.max_epochs = 20;
  cfg.seed = 4;
  const auto data = separable(200, 1);
  const auto report = train_classifier(net, data, cfg);
  EXPECT_GE(report.epochs_run, 1u);
  const auto test = separable(100, 2);
  const auto pred = predict(net, test);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == test.labels[i];
  EXPECT_GT(double(hit) / 100.0, 0.9);
  const auto proba = predict_proba(net, test);
  EXPECT_NEAR(proba(0, 0) + proba(0, 1), 1.0, 1e-12);
}

TEST(Train, SameSeedSameWeights) {
  TrainConfig cfg;
  cfg.max_epochs = 3;
  cfg.seed = 8;
  const auto data = separable(64, 3);
  Network a(build_fusion_mlp(256, 256, 1)), b(build_fusion_mlp(256, 256, 1));
  train_classifier(a, data, cfg);
  train_classifier(b, data, cfg);
  const auto sa = a.state(), sb = b.state();
  ASSERT_EQ(sa.size(), sb.size());
  std::size_t first = sa.size();
  for (std::size_t i = 0; i < sa.size(); ++i)
    if (sa[i] != sb[i]) {
      first = i;
      break;
    }
  EXPECT_EQ(first, sa.size()) << "first difference at " << first << ": " << sa[first] << " vs " << sb[first];
}

TEST(Train, RejectsBadConfig) {
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  EXPECT_THROW(validate(cfg), Error);
  cfg = {};
  cfg.batch_size = 0;
  EXPECT_THROW(validate(cfg), Error);
}

TEST(Train, SiamesePullsPositivesTogether) {
  Rng rng(5);
  Matrix rows(60, 5 * 32 * 32);
  std::vector<int> y(60);
  for (std::size_t i = 0; i < 60; ++i) {
    y[i] = static_cast<int>(i % 2);
    for (std::size_t j = 0; j < rows.cols(); ++j) rows(i, j) = 0.3 * rng.normal() + (y[i] ? 1.0 : -1.0) * (j % 7 == 0);
  }
  const auto data = make_dataset(rows, {5, 32, 32}, y);
  Network tower(build_siamese(3));
  TrainConfig cfg;
  cfg.max_epochs = 5;
  cfg.learning_rate = 1e-4;
  cfg.batch_size = 16;
  cfg.margin = 5.0;
  cfg.seed = 2;
  train_siamese(tower, data, cfg);
  const auto e = extract_embeddings(tower, data);
  EXPECT_EQ(e.cols(), kEmbeddingSize);
  EXPECT_GT(similarity_score(e.row(0), e.row(2)), similarity_score(e.row(0), e.row(1)));
  EXPECT_LE(similarity_score(e.row(0), e.row(0)), 0.5);
  EXPECT_DOUBLE_EQ(similarity_score(e.row(0), e.row(0)), 0.5);
}

TEST(Checkpoint, RoundTripPreservesPredictions) {
  Network net(build_eegnet(3));
  const auto path = std::filesystem::temp_directory_path() / "sonilab_eegnet.snlm";
  save_checkpoint(net, path, {{"note", "x"}});
  nlohmann::json meta;
  Network back = load_checkpoint(path, &meta);
  EXPECT_EQ(meta.at("note"), "x");
  EXPECT_EQ(back.state(), net.state());
  EXPECT_EQ(back.spec().layers.size(), net.spec().layers.size());
  auto x = gradsuite::random_leaf({2, 14, 256}, 4);
  Rng r1(1), r2(1);
  const auto ya = net.forward(x, false, r1), yb = back.forward(x, false, r2);
  EXPECT_TRUE(std::equal(ya.data().begin(), ya.data().end(), yb.data().begin(), yb.data().end()));
  std::filesystem::remove(path);
}

TEST(Checkpoint, EmbeddingCsvHasHeaderAndRows) {
  Matrix e(2, kEmbeddingSize, 0.5);
  std::vector<EpochLabels> labels(2);
  labels[0].cl_label = CognitiveLoad::High;
  const auto csv = format_embeddings_csv(e, labels);
  std::size_t lines = 0;
  for (char c : csv) lines += c == '\n';
  EXPECT_EQ(lines, 3u);
  EXPECT_EQ(csv.rfind("sample", 0), 0u);
}
