#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>
#include <vector>

#include "sonilab/matrix.hpp"
#include "sonilab/nn/architectures.hpp"
#include "sonilab/types.hpp"

namespace sonilab::nn {

nlohmann::json spec_to_json(const ModelSpec& spec);
ModelSpec spec_from_json(const nlohmann::json& j);

/// JSON header (spec, parameter shapes, caller metadata) followed by the
/// little-endian parameter blob.
void save_checkpoint(const Network& net, const std::filesystem::path& path, const nlohmann::json& metadata = {});
Network load_checkpoint(const std::filesystem::path& path, nlohmann::json* metadata = nullptr);

/// CSV with columns sample,e0..e255,cl_label,parameter,focus_level,participant.
std::string format_embeddings_csv(const Matrix& embeddings, const std::vector<EpochLabels>& labels);

}  // namespace sonilab::nn
