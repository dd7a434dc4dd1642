#include "sonilab/nn/checkpoint.hpp"

#include "sonilab/container.hpp"
#include "sonilab/error.hpp"
#include "sonilab/recording_io.hpp"

namespace sonilab::nn {

nlohmann::json spec_to_json(const ModelSpec& spec) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : spec.layers)
    layers.push_back({{"kind", to_string(l.kind)},
                      {"in", l.in},
                      {"out", l.out},
                      {"kh", l.kh},
                      {"kw", l.kw},
                      {"groups", l.groups},
                      {"bias", l.bias},
                      {"same", l.same},
                      {"p", l.p},
                      {"shape", l.shape}});
  return {{"architecture", to_string(spec.arch)},
          {"input_shape", spec.input_shape},
          {"layers", layers},
          {"embedding_layers", spec.embedding_layers},
          {"seed", spec.seed}};
}

ModelSpec spec_from_json(const nlohmann::json& j) {
  try {
    ModelSpec spec;
    spec.arch = parse_architecture(j.at("architecture").get<std::string>());
    spec.input_shape = j.at("input_shape").get<Shape>();
    spec.embedding_layers = j.at("embedding_layers").get<std::size_t>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& lj : j.at("layers")) {
      LayerSpec l;
      const auto kind = lj.at("kind").get<std::string>();
      bool found = false;
      for (int k = 0; k <= static_cast<int>(LayerKind::Reshape); ++k)
        if (to_string(static_cast<LayerKind>(k)) == kind) {
          l.kind = static_cast<LayerKind>(k);
          found = true;
        }
      if (!found) throw_data("schema_mismatch", "unknown layer kind '" + kind + "'");
      l.in = lj.at("in").get<std::size_t>();
      l.out = lj.at("out").get<std::size_t>();
      l.kh = lj.at("kh").get<std::size_t>();
      l.kw = lj.at("kw").get<std::size_t>();
      l.groups = lj.at("groups").get<std::size_t>();
      l.bias = lj.at("bias").get<bool>();
      l.same = lj.at("same").get<bool>();
      l.p = lj.at("p").get<double>();
      l.shape = lj.at("shape").get<Shape>();
      spec.layers.push_back(l);
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw_data("schema_mismatch", std::string("bad model spec: ") + e.what());
  }
}

void save_checkpoint(const Network& net, const std::filesystem::path& path, const nlohmann::json& metadata) {
  RawContainer c;
  c.magic = kCheckpointMagic;
  nlohmann::json shapes = nlohmann::json::array();
  for (const auto& p : net.parameters()) shapes.push_back(p.shape());
  c.header = {{"format", "sonilab-model"},
              {"version", 1},
              {"spec", spec_to_json(net.spec())},
              {"parameter_shapes", shapes},
              {"metadata", metadata.is_null() ? nlohmann::json::object() : metadata}};
  c.payload = net.state();
  write_container(c, path);
}

Network load_checkpoint(const std::filesystem::path& path, nlohmann::json* metadata) {
  const auto c = read_container(path, kCheckpointMagic);
  if (c.header.value("format", "") != "sonilab-model")
    throw_data("schema_mismatch", "not a model checkpoint: " + path.string());
  Network net(spec_from_json(c.header.at("spec")));
  net.load_state(c.payload);
  if (metadata) *metadata = c.header.value("metadata", nlohmann::json::object());
  return net;
}

std::string format_embeddings_csv(const Matrix& embeddings, const std::vector<EpochLabels>& labels) {
  if (embeddings.rows() != labels.size())
    throw_usage("shape_mismatch", "embedding rows do not match label count");
  std::string out = "sample";
  for (std::size_t j = 0; j < embeddings.cols(); ++j) out += ",e" + std::to_string(j);
  out += ",cl_label,parameter,focus_level,participant\n";
  for (std::size_t i = 0; i < embeddings.rows(); ++i) {
    out += std::to_string(i);
    for (double v : embeddings.row(i)) out += "," + format_double(v);
    const auto& l = labels[i];
    out += "," + (l.cl_label ? std::string(to_string(*l.cl_label)) : std::string()) + "," +
           std::string(to_string(l.parameter)) + "," + std::to_string(l.focus_level) + "," + l.participant + "\n";
  }
  return out;
}

}  // namespace sonilab::nn
