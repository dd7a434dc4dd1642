#include "sonilab/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <functional>
#include <numeric>

#include "sonilab/error.hpp"
#include "sonilab/layout.hpp"

namespace sonilab {

namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian platforms are unsupported");

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
  }
  return v;
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  v = to_le(v);
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  out.insert(out.end(), p, p + 8);
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v;
  std::memcpy(&v, p, 8);
  return to_le(v);
}

}  // namespace

std::vector<std::uint8_t> encode_container(const RawContainer& c) {
  if (c.magic.size() != 5) throw_usage("bad_magic", "container magic must be 5 bytes");
  std::vector<std::uint8_t> out(c.magic.begin(), c.magic.end());
  const std::string header = c.header.dump();
  put_u64(out, header.size());
  out.insert(out.end(), header.begin(), header.end());
  out.reserve(out.size() + 8 * c.payload.size());
  for (double d : c.payload) put_u64(out, std::bit_cast<std::uint64_t>(d));
  return out;
}

RawContainer decode_container(const std::vector<std::uint8_t>& bytes, const std::string& magic) {
  if (bytes.size() < 13 || std::string(bytes.begin(), bytes.begin() + 5) != magic)
    throw_data("malformed_header", "missing '" + magic + "' magic bytes");
  const std::uint64_t header_len = get_u64(bytes.data() + 5);
  if (header_len > bytes.size() - 13)
    throw_data("malformed_header", "header length exceeds file size");
  RawContainer c;
  c.magic = magic;
  try {
    c.header = nlohmann::json::parse(bytes.begin() + 13, bytes.begin() + 13 + header_len);
  } catch (const nlohmann::json::exception& e) {
    throw_data("malformed_header", std::string("container header is not JSON: ") + e.what());
  }
  const std::size_t offset = 13 + header_len;
  const std::size_t remaining = bytes.size() - offset;
  if (remaining % 8 != 0) throw_data("malformed_payload", "payload is not a whole number of f64");
  c.payload.resize(remaining / 8);
  for (std::size_t i = 0; i < c.payload.size(); ++i)
    c.payload[i] = std::bit_cast<double>(get_u64(bytes.data() + offset + 8 * i));
  return c;
}

void write_container(const RawContainer& c, const std::filesystem::path& path) {
  const auto bytes = encode_container(c);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("unwritable_path", "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw_data("unwritable_path", "write failed for " + path.string());
}

RawContainer read_container(const std::filesystem::path& path, const std::string& magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("missing_input", "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_container(bytes, magic);
}

nlohmann::json labels_to_json(const EpochLabels& l) {
  nlohmann::json j;
  j["cl_label"] = l.cl_label ? nlohmann::json(std::string(to_string(*l.cl_label))) : nlohmann::json();
  j["parameter"] = std::string(to_string(l.parameter));
  j["focus_level"] = l.focus_level;
  j["session"] = std::string(to_string(l.session));
  j["participant"] = l.participant;
  return j;
}

EpochLabels labels_from_json(const nlohmann::json& j) {
  try {
    EpochLabels l;
    if (!j.at("cl_label").is_null()) l.cl_label = parse_cognitive_load(j.at("cl_label").get<std::string>());
    l.parameter = parse_parameter(j.at("parameter").get<std::string>());
    l.focus_level = j.at("focus_level").get<int>();
    l.session = parse_session_kind(j.at("session").get<std::string>());
    l.participant = j.at("participant").get<std::string>();
    return l;
  } catch (const nlohmann::json::exception& e) {
    throw_data("malformed_header", std::string("bad epoch labels: ") + e.what());
  }
}

std::vector<std::uint8_t> encode_epochs(const std::vector<Epoch>& epochs) {
  RawContainer c;
  c.magic = kEpochMagic;
  nlohmann::json labels = nlohmann::json::array();
  c.payload.reserve(epochs.size() * kChannelCount * kEpochSamples);
  for (const auto& e : epochs) {
    validate_epoch(e);
    labels.push_back(labels_to_json(e.labels));
    c.payload.insert(c.payload.end(), e.fixation.data().begin(), e.fixation.data().end());
    c.payload.insert(c.payload.end(), e.stimulus.data().begin(), e.stimulus.data().end());
  }
  const auto& layout = default_layout();
  c.header = {{"format", kEpochMagic},
              {"version", 1},
              {"count", epochs.size()},
              {"channels", std::vector<std::string>(layout.names.begin(), layout.names.end())},
              {"sample_rate", kEegSampleRate},
              {"fixation_samples", kFixationSamples},
              {"stimulus_samples", kStimulusSamples},
              {"labels", labels}};
  return encode_container(c);
}

std::vector<Epoch> decode_epochs(const std::vector<std::uint8_t>& bytes) {
  const RawContainer c = decode_container(bytes, kEpochMagic);
  std::size_t count = 0;
  try {
    count = c.header.at("count").get<std::size_t>();
    if (c.header.at("channels").size() != kChannelCount)
      throw_data("channel_count", "epoch container declares " +
                                      std::to_string(c.header.at("channels").size()) +
                                      " channels, expected 14");
    if (c.header.at("fixation_samples").get<std::size_t>() != kFixationSamples ||
        c.header.at("stimulus_samples").get<std::size_t>() != kStimulusSamples)
      throw_data("malformed_header", "epoch container has unexpected segment widths");
    if (c.header.at("labels").size() != count)
      throw_data("malformed_header", "label count does not match epoch count");
  } catch (const nlohmann::json::exception& e) {
    throw_data("malformed_header", std::string("bad epoch header: ") + e.what());
  }
  const std::size_t per_epoch = kChannelCount * kEpochSamples;
  if (c.payload.size() != count * per_epoch)
    throw_data("malformed_payload", "payload size does not match epoch count");
  std::vector<Epoch> epochs;
  epochs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double* base = c.payload.data() + i * per_epoch;
    Epoch e;
    e.fixation = Matrix(kChannelCount, kFixationSamples,
                        std::vector<double>(base, base + kChannelCount * kFixationSamples));
    base += kChannelCount * kFixationSamples;
    e.stimulus = Matrix(kChannelCount, kStimulusSamples,
                        std::vector<double>(base, base + kChannelCount * kStimulusSamples));
    e.labels = labels_from_json(c.header.at("labels")[i]);
    epochs.push_back(std::move(e));
  }
  return epochs;
}

void write_epochs(const std::vector<Epoch>& epochs, const std::filesystem::path& path) {
  const auto bytes = encode_epochs(epochs);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_data("unwritable_path", "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw_data("unwritable_path", "write failed for " + path.string());
}

std::vector<Epoch> read_epochs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_data("missing_input", "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_epochs(bytes);
}

std::size_t FeatureTable::sample_size() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void write_features(const FeatureTable& table, const std::filesystem::path& path) {
  if (table.values.size() != table.count() * table.sample_size())
    throw_usage("shape_mismatch", "feature table values do not match count x shape");
  RawContainer c;
  c.magic = kFeatureMagic;
  nlohmann::json labels = nlohmann::json::array();
  for (const auto& l : table.labels) labels.push_back(labels_to_json(l));
  c.header = {{"format", kFeatureMagic}, {"version", 1},         {"kind", table.kind},
              {"shape", table.shape},    {"count", table.count()}, {"labels", labels},
              {"metadata", table.metadata}};
  c.payload = table.values;
  write_container(c, path);
}

FeatureTable read_features(const std::filesystem::path& path) {
  const RawContainer c = read_container(path, kFeatureMagic);
  FeatureTable t;
  try {
    t.kind = c.header.at("kind").get<std::string>();
    t.shape = c.header.at("shape").get<std::vector<std::size_t>>();
    for (const auto& l : c.header.at("labels")) t.labels.push_back(labels_from_json(l));
    t.metadata = c.header.at("metadata");
    if (c.header.at("count").get<std::size_t>() != t.labels.size())
      throw_data("malformed_header", "label count does not match feature count");
  } catch (const nlohmann::json::exception& e) {
    throw_data("malformed_header", std::string("bad feature header: ") + e.what());
  }
  t.values = c.payload;
  if (t.values.size() != t.count() * t.sample_size())
    throw_data("malformed_payload", "payload size does not match feature shape");
  return t;
}

}  // namespace sonilab
