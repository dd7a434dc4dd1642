#include "sonilab/config.hpp"

#include <fstream>

#include "sonilab/error.hpp"

namespace sonilab {
namespace {

using nlohmann::json;

/// Reads members of one JSON object, then verifies nothing unread remains.
class Section {
public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      fail(key, e.what());
    }
  }

  void read_positive(const char* key, double& out) {
    read(key, out);
    if (!(out > 0.0)) fail(key, "must be > 0");
  }

  template <typename F>
  void section(const char* key, F&& f) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    Section s(j_.at(key), qualified(key));
    f(s);
    s.finish();
  }

  template <typename F>
  void parse_string(const char* key, F&& f) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if (!j_.at(key).is_string()) fail(key, "expected a string");
    try {
      f(j_.at(key).get<std::string>());
    } catch (const Error& e) {
      fail(key, e.what());
    }
  }

  void finish() const {
    for (const auto& [key, _] : j_.items())
      if (!seen_.count(key)) fail(key, "unknown key");
  }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    throw_usage("bad_config", qualified(key) + ": " + why);
  }

private:
  std::string qualified(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_train(Section& s, nn::TrainConfig& t) {
  s.read("learning_rate", t.learning_rate);
  s.read("beta1", t.beta1);
  s.read("beta2", t.beta2);
  s.read("epsilon", t.epsilon);
  s.read("batch_size", t.batch_size);
  s.read("max_epochs", t.max_epochs);
  s.read("patience", t.patience);
  s.read("validation_fraction", t.validation_fraction);
  s.read("margin", t.margin);
  try {
    nn::validate(t);
  } catch (const Error& e) {
    s.fail("", e.what());
  }
}

json train_json(const nn::TrainConfig& t) {
  return {{"learning_rate", t.learning_rate}, {"beta1", t.beta1},       {"beta2", t.beta2},
          {"epsilon", t.epsilon},             {"batch_size", t.batch_size}, {"max_epochs", t.max_epochs},
          {"patience", t.patience},           {"validation_fraction", t.validation_fraction},
          {"margin", t.margin}};
}

}  // namespace

nn::TrainConfig default_siamese_train() {
  nn::TrainConfig t;
  t.learning_rate = 3e-4;
  t.batch_size = 16;
  t.max_epochs = 10;
  t.patience = 3;
  t.margin = 5.0;
  return t;
}

AppConfig config_from_json(const json& j) {
  AppConfig c;
  Section root(j, "");
  root.read("seed", c.seed);
  root.section("preprocess", [&](Section& s) {
    s.read("filter_order", c.preprocess.filter.order);
    s.read("low_hz", c.preprocess.filter.low_hz);
    s.read("high_hz", c.preprocess.filter.high_hz);
    s.read_positive("rejection_uv", c.preprocess.rejection_threshold_uv);
    if (c.preprocess.filter.order < 2 || c.preprocess.filter.order % 2) s.fail("filter_order", "must be even and >= 2");
    if (!(c.preprocess.filter.low_hz > 0 && c.preprocess.filter.low_hz < c.preprocess.filter.high_hz &&
          c.preprocess.filter.high_hz < kEegSampleRate / 2))
      s.fail("high_hz", "need 0 < low_hz < high_hz < Nyquist");
  });
  root.parse_string("feature", [&](const std::string& v) { c.feature = eval::parse_feature_kind(v); });
  root.parse_string("arch", [&](const std::string& v) { c.arch = nn::parse_architecture(v); });
  root.section("cv", [&](Section& s) {
    s.read("folds", c.eval.k);
    s.read("repetitions", c.eval.repetitions);
    if (c.eval.k < 2) s.fail("folds", "must be >= 2");
    if (c.eval.repetitions < 1) s.fail("repetitions", "must be >= 1");
  });
  root.section("train", [&](Section& s) { read_train(s, c.eval.train); });
  root.section("svm", [&](Section& s) {
    s.read_positive("c", c.eval.svm.c);
    double gamma = 0.0;
    s.read("gamma", gamma);
    if (gamma < 0.0) s.fail("gamma", "must be >= 0 (0 selects the default)");
    if (gamma > 0.0) c.eval.svm.gamma = gamma;
    s.read_positive("tolerance", c.eval.svm.tolerance);
    s.read("max_iterations", c.eval.svm.max_iterations);
  });
  root.section("labels", [&](Section& s) {
    s.read("tlx_threshold", c.tlx_threshold);
    s.read("extremum_levels", c.extremum_levels);
    for (int l : c.extremum_levels)
      if (l < 1 || l > kLevelCount) s.fail("extremum_levels", "levels must be in 1..10");
  });
  root.section("similarity", [&](Section& s) {
    s.read("threshold", c.similarity_threshold);
    s.read("within_participant", c.within_participant);
    s.parse_string("aggregation", [&](const std::string& v) { c.similarity_aggregation = eval::parse_similarity_aggregation(v); });
    s.section("train", [&](Section& t) { read_train(t, c.siamese); });
  });
  root.section("synthetic", [&](Section& s) {
    auto& y = c.synthetic;
    s.read("n_epochs", y.n_epochs);
    s.read("balance", y.balance);
    s.read("effect", y.effect);
    s.read("noise_exponent", y.noise_exponent);
    s.read("noise_uv", y.noise_uv);
    s.read("alpha_uv", y.alpha_uv);
    s.read("theta_uv", y.theta_uv);
    s.read("jitter", y.jitter);
    s.read("six_parameters", y.six_parameters);
    s.read("participants", y.participants);
    try {
      eval::validate(y);
    } catch (const Error& e) {
      s.fail("", e.what());
    }
  });
  root.section("service", [&](Section& s) {
    s.read("host", c.service.host);
    s.read("port", c.service.port);
    s.read_positive("audio_rate", c.service.audio_rate);
    s.read("image_size", c.service.image_size);
    if (c.service.port < 0 || c.service.port > 65535) s.fail("port", "out of range");
  });
  root.finish();
  c.eval.seed = c.seed;
  c.synthetic.seed = c.seed;
  c.service.seed = c.seed;
  return c;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_usage("config_unreadable", "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw_usage("bad_config", path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

json config_to_json(const AppConfig& c) {
  return {{"seed", c.seed},
          {"preprocess",
           {{"filter_order", c.preprocess.filter.order},
            {"low_hz", c.preprocess.filter.low_hz},
            {"high_hz", c.preprocess.filter.high_hz},
            {"rejection_uv", c.preprocess.rejection_threshold_uv}}},
          {"feature", eval::to_string(c.feature)},
          {"arch", std::string(nn::to_string(c.arch))},
          {"cv", {{"folds", c.eval.k}, {"repetitions", c.eval.repetitions}}},
          {"train", train_json(c.eval.train)},
          {"svm",
           {{"c", c.eval.svm.c},
            {"gamma", c.eval.svm.gamma.value_or(0.0)},
            {"tolerance", c.eval.svm.tolerance},
            {"max_iterations", c.eval.svm.max_iterations}}},
          {"labels", {{"tlx_threshold", c.tlx_threshold}, {"extremum_levels", c.extremum_levels}}},
          {"similarity",
           {{"threshold", c.similarity_threshold},
            {"within_participant", c.within_participant},
            {"aggregation", eval::to_string(c.similarity_aggregation)},
            {"train", train_json(c.siamese)}}},
          {"synthetic",
           {{"n_epochs", c.synthetic.n_epochs},
            {"balance", c.synthetic.balance},
            {"effect", c.synthetic.effect},
            {"noise_exponent", c.synthetic.noise_exponent},
            {"noise_uv", c.synthetic.noise_uv},
            {"alpha_uv", c.synthetic.alpha_uv},
            {"theta_uv", c.synthetic.theta_uv},
            {"jitter", c.synthetic.jitter},
            {"six_parameters", c.synthetic.six_parameters},
            {"participants", c.synthetic.participants}}},
          {"service",
           {{"host", c.service.host},
            {"port", c.service.port},
            {"audio_rate", c.service.audio_rate},
            {"image_size", c.service.image_size}}}};
}

eval::SimilarityConfig similarity_config(const AppConfig& c) {
  eval::SimilarityConfig s;
  s.k = c.eval.k;
  s.repetitions = c.eval.repetitions;
  s.seed = c.seed;
  s.train = c.siamese;
  s.threshold = c.similarity_threshold;
  s.within_participant = c.within_participant;
  s.aggregation = c.similarity_aggregation;
  return s;
}

}  // namespace sonilab
