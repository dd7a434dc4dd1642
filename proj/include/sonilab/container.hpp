#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "sonilab/types.hpp"

namespace sonilab {

/// Binary layout shared by every container in the project:
///   5-byte magic | u64 LE header length | UTF-8 JSON header | f64 LE payload
/// The JSON header is serialized with sorted keys, so identical inputs
/// produce identical bytes.
struct RawContainer {
  std::string magic;
  nlohmann::json header;
  std::vector<double> payload;
};

std::vector<std::uint8_t> encode_container(const RawContainer& c);
RawContainer decode_container(const std::vector<std::uint8_t>& bytes, const std::string& magic);
void write_container(const RawContainer& c, const std::filesystem::path& path);
RawContainer read_container(const std::filesystem::path& path, const std::string& magic);

inline constexpr const char* kEpochMagic = "SNLD1";
inline constexpr const char* kFeatureMagic = "SNLF1";
inline constexpr const char* kCheckpointMagic = "SNLM1";

nlohmann::json labels_to_json(const EpochLabels& labels);
EpochLabels labels_from_json(const nlohmann::json& j);

std::vector<std::uint8_t> encode_epochs(const std::vector<Epoch>& epochs);
std::vector<Epoch> decode_epochs(const std::vector<std::uint8_t>& bytes);
void write_epochs(const std::vector<Epoch>& epochs, const std::filesystem::path& path);
std::vector<Epoch> read_epochs(const std::filesystem::path& path);

/// A batch of same-shaped feature tensors with the labels of their epochs.
struct FeatureTable {
  std::string kind;                 // "psd" | "topo" | "spect"
  std::vector<std::size_t> shape;   // per-sample shape
  std::vector<double> values;       // count * prod(shape), sample-major
  std::vector<EpochLabels> labels;
  nlohmann::json metadata;          // band edges, axis descriptions

  std::size_t count() const { return labels.size(); }
  std::size_t sample_size() const;
};

void write_features(const FeatureTable& table, const std::filesystem::path& path);
FeatureTable read_features(const std::filesystem::path& path);

}  // namespace sonilab
