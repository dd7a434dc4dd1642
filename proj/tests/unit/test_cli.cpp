#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "sonilab/container.hpp"
#include "sonilab/recording_io.hpp"
#include "sonilab/rng.hpp"
#include "sonilab/service/session.hpp"

using namespace sonilab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliResult {
  int code = -1;
  std::string out, err;
};

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("sonilab_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  CliResult run(const std::string& args) const {
    const auto out = path("stdout.txt"), err = path("stderr.txt");
    const std::string cmd = std::string(SONILAB_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

json error_line(const CliResult& r) { return json::parse(r.err); }

}  // namespace

TEST_F(Cli, HelpAndUsageErrors) {
  EXPECT_EQ(run("--help").code, 0);
  auto r = run("");
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(error_line(r).at("exit_code"), 1);
  r = run("eval --classifier gnb --arch EEGNet");
  EXPECT_EQ(r.code, 1);
  r = run("eval --classifier nope --features " + path("missing.snlf").string());
  EXPECT_NE(r.code, 0);
  EXPECT_TRUE(error_line(r).contains("error"));
}

TEST_F(Cli, BadConfigKeyIsAUsageError) {
  std::ofstream(path("cfg.json")) << R"({"train": {"learning_rate": 0.01, "lr": 1}})";
  const auto r = run("--config " + path("cfg.json").string() + " simulate --out " + path("e.snld").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(error_line(r).at("error"), "bad_config");
}

TEST_F(Cli, MissingInputIsADataError) {
  const auto r = run("features --in " + path("none.snld").string() + " --out " + path("f.snlf").string());
  EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, SynthWritesCodedParameterFiles) {
  const auto r = run("synth --param type5 --out " + path("stim").string());
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t pgm = 0, wav = 0;
  for (const auto& e : fs::directory_iterator(path("stim"))) {
    pgm += e.path().extension() == ".pgm";
    wav += e.path().extension() == ".wav";
  }
  EXPECT_EQ(pgm, 10u);  // Visual: images only
  EXPECT_EQ(wav, 0u);
  EXPECT_TRUE(fs::exists(path("stim") / "visual_L10.pgm"));
}

TEST_F(Cli, SimulateFeaturesEvalIsReproducible) {
  ASSERT_EQ(run("simulate --out " + path("e.snld").string() + " --epochs-count 80 --seed 3").code, 0);
  EXPECT_EQ(read_epochs(path("e.snld")).size(), 80u);
  const auto f = run("features --in " + path("e.snld").string() + " --feature psd --out " + path("f.snlf").string());
  ASSERT_EQ(f.code, 0) << f.err;
  const std::string eval_args = "eval --features " + path("f.snlf").string() + " --classifier gnb --out ";
  ASSERT_EQ(run(eval_args + path("a.json").string()).code, 0);
  ASSERT_EQ(run(eval_args + path("b.json").string()).code, 0);
  const auto a = slurp(path("a.json"));
  EXPECT_EQ(a, slurp(path("b.json")));
  const auto j = json::parse(a);
  EXPECT_EQ(j.at("kind"), "metrics");
  EXPECT_GE(j.at("report").at("f1").at("mean").get<double>(), 0.8) << a;
}

TEST_F(Cli, TrainWritesCheckpointAndEmbeddings) {
  ASSERT_EQ(run("simulate --out " + path("e.snld").string() + " --epochs-count 40").code, 0);
  std::ofstream(path("cfg.json")) << R"({"train": {"max_epochs": 1, "batch_size": 8}})";
  const auto r = run("--config " + path("cfg.json").string() + " train --epochs " + path("e.snld").string() +
                     " --arch EEGNet --out " + path("m.snlm").string() + " --embeddings " + path("emb.csv").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(path("m.snlm")));
  std::ifstream in(path("emb.csv"));
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 41u);  // header + one row per epoch
}

TEST_F(Cli, PreprocessLabelsEpochsFromSessionBundle) {
  double now = 0.0;
  service::Session s("s1", {"P07", SessionKind::IR, 2, false}, [&] { return now; });
  int sub = 0;
  for (;;) {
    const auto d = s.next().body;
    if (d.at("kind") == "done") break;
    if (d.at("kind") == "tlx") {
      const int v = ++sub % 2 ? 4 : 1;  // alternate High / Low sub-sessions
      ASSERT_EQ(s.submit_tlx({{"effort", v}, {"mental_demand", v}, {"frustration", v}}).status, 200);
      continue;
    }
    now += 2600.0;
    ASSERT_EQ(s.respond({{"trial", d.at("trial")}, {"response", 5}}).status, 200);
    now += 400.0;
  }
  const auto bundle = s.export_bundle().body;
  std::ofstream(path("bundle.json")) << bundle.dump();

  RawRecording rec;
  const std::size_t samples = std::size_t(now * 128.0 / 1000.0) + 512;
  rec.data = Matrix(kChannelCount, samples);
  Rng rng(4);
  for (std::size_t c = 0; c < kChannelCount; ++c)
    for (std::size_t t = 0; t < samples; ++t)
      rec.data(c, t) = 5.0 * rng.normal() + 10.0 * std::sin(2.0 * std::numbers::pi * 10.0 * double(t) / 128.0);
  write_recording(rec, path("rec.csv"), path("unused.markers.csv"));

  const auto r = run("preprocess --recording " + path("rec.csv").string() + " --bundle " + path("bundle.json").string() +
                     " --out " + path("ep.snld").string() + " --report " + path("rej.json").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto epochs = read_epochs(path("ep.snld"));
  EXPECT_EQ(epochs.size() + json::parse(slurp(path("rej.json"))).at("rejected").size(), 180u);
  ASSERT_FALSE(epochs.empty());
  for (const auto& e : epochs) {
    ASSERT_TRUE(e.labels.cl_label.has_value());
    EXPECT_EQ(e.labels.participant, "P07");
  }
}
