#include "sonilab/eval/dataset.hpp"

#include <algorithm>
#include <cctype>

#include "sonilab/error.hpp"
#include "sonilab/features.hpp"
#include "sonilab/layout.hpp"
#include "sonilab/topo.hpp"

namespace sonilab::eval {

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::Psd: return "psd";
    case FeatureKind::Topo: return "topo";
    case FeatureKind::Spect: return "spect";
    case FeatureKind::Raw: return "raw";
  }
  return "?";
}

FeatureKind parse_feature_kind(const std::string& text) {
  std::string t = text;
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (auto k : {FeatureKind::Psd, FeatureKind::Topo, FeatureKind::Spect, FeatureKind::Raw})
    if (to_string(k) == t) return k;
  throw_usage("unknown_feature", "unknown feature kind '" + text + "' (psd|topo|spect|raw)");
}

FeatureBank compute_features(const std::vector<Epoch>& epochs, FeatureKind kind) {
  FeatureBank bank;
  bank.kind = kind;
  switch (kind) {
    case FeatureKind::Psd: bank.sample_shape = {kPsdLength}; break;
    case FeatureKind::Topo: bank.sample_shape = {kBandCount, 32, 32}; break;
    case FeatureKind::Spect: bank.sample_shape = {kChannelCount, 25, 33}; break;
    case FeatureKind::Raw: bank.sample_shape = {kChannelCount, kStimulusSamples}; break;
  }
  const auto width = nn::numel(bank.sample_shape);
  bank.rows = Matrix(epochs.size(), width);
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const auto& e = epochs[i];
    validate_epoch(e);
    std::vector<double> row;
    switch (kind) {
      case FeatureKind::Psd: row = welch_band_psd(e); break;
      case FeatureKind::Topo: row = topo_channels_first(topo_image(welch_band_psd(e), default_layout())); break;
      case FeatureKind::Spect: row = spectrogram_image(stft_spectrogram(e)); break;
      case FeatureKind::Raw: row = e.stimulus.values(); break;
    }
    if (row.size() != width) throw_numeric("feature_shape", "feature extractor produced an unexpected size");
    std::copy(row.begin(), row.end(), bank.rows.row(i).begin());
    bank.labels.push_back(e.labels);
  }
  return bank;
}

FeatureTable to_table(const FeatureBank& bank) {
  FeatureTable t;
  t.kind = to_string(bank.kind);
  t.shape = bank.sample_shape;
  t.values = bank.rows.values();
  t.labels = bank.labels;
  switch (bank.kind) {
    case FeatureKind::Psd: {
      nlohmann::json bands = nlohmann::json::array();
      for (const auto& b : kBands) bands.push_back({{"name", b.name}, {"low_hz", b.low_hz}, {"high_hz", b.high_hz}});
      t.metadata = {{"layout", "channel-major"}, {"bands", bands}};
      break;
    }
    case FeatureKind::Topo: t.metadata = {{"layout", "band x row x col"}, {"row0", "anterior"}}; break;
    case FeatureKind::Spect: t.metadata = {{"layout", "channel x frame x bin"}, {"window", 64}, {"hop", 8}}; break;
    case FeatureKind::Raw: t.metadata = {{"layout", "channel x sample"}, {"sample_rate", kEegSampleRate}}; break;
  }
  return t;
}

FeatureBank from_table(const FeatureTable& t) {
  FeatureBank bank;
  bank.kind = parse_feature_kind(t.kind);
  bank.sample_shape = t.shape;
  const auto width = nn::numel(t.shape);
  if (t.values.size() != width * t.count())
    throw_data("schema_mismatch", "feature table value count does not match shape x count");
  bank.rows = Matrix(t.count(), width, t.values);
  bank.labels = t.labels;
  return bank;
}

Matrix take_rows(const Matrix& m, std::span<const std::size_t> indices) {
  Matrix out(indices.size(), m.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const auto src = m.row(indices[r]);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

std::vector<int> take(std::span<const int> values, std::span<const std::size_t> indices) {
  std::vector<int> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(values[i]);
  return out;
}

}  // namespace sonilab::eval
