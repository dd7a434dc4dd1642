#include "sonilab/preprocess.hpp"

#include <algorithm>

#include "sonilab/error.hpp"
#include "sonilab/layout.hpp"

namespace sonilab {

std::vector<Epoch> segment_epochs(const RawRecording& rec) {
  validate_recording(rec);
  std::vector<Epoch> epochs;
  epochs.reserve(rec.markers.size());
  for (const auto& m : rec.markers) {
    Epoch e = make_epoch({std::nullopt, m.parameter, m.focus_level, m.session, m.participant});
    for (std::size_t c = 0; c < kChannelCount; ++c) {
      for (std::size_t t = 0; t < kFixationSamples; ++t) e.fixation(c, t) = rec.data(c, m.onset + t);
      for (std::size_t t = 0; t < kStimulusSamples; ++t)
        e.stimulus(c, t) = rec.data(c, m.onset + kFixationSamples + t);
    }
    epochs.push_back(std::move(e));
  }
  return epochs;
}

Epoch baseline_correct(const Epoch& epoch) {
  Epoch out = epoch;
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    double mean = 0.0;
    for (double v : epoch.fixation.row(c)) mean += v;
    mean /= static_cast<double>(kFixationSamples);
    for (double& v : out.fixation.row(c)) v -= mean;
    for (double& v : out.stimulus.row(c)) v -= mean;
  }
  return out;
}

Epoch bandpass(const Epoch& epoch, const SosFilter& filter) {
  Epoch out = epoch;
  std::vector<double> joined(kEpochSamples);
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    std::copy(epoch.fixation.row(c).begin(), epoch.fixation.row(c).end(), joined.begin());
    std::copy(epoch.stimulus.row(c).begin(), epoch.stimulus.row(c).end(),
              joined.begin() + kFixationSamples);
    const auto y = filtfilt(filter, joined, kFixationSamples);
    std::copy(y.begin(), y.begin() + kFixationSamples, out.fixation.row(c).begin());
    std::copy(y.begin() + kFixationSamples, y.end(), out.stimulus.row(c).begin());
  }
  return out;
}

Epoch bandpass(const Epoch& epoch, const FilterSpec& spec) {
  return bandpass(epoch, design_butterworth_bandpass(spec));
}

RejectionResult reject_artifacts(const std::vector<Epoch>& epochs, double p2p_threshold_uv) {
  if (!(p2p_threshold_uv > 0.0)) throw_usage("bad_threshold", "rejection threshold must be > 0");
  RejectionResult result;
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    std::optional<Rejection> hit;
    for (std::size_t c = 0; c < kChannelCount && !hit; ++c) {
      const auto row = epochs[i].stimulus.row(c);
      const auto [lo, hi] = std::minmax_element(row.begin(), row.end());
      const double p2p = *hi - *lo;
      if (p2p > p2p_threshold_uv) hit = Rejection{i, c, p2p};
    }
    if (hit) {
      result.rejected.push_back(i);
      result.details.push_back(*hit);
    } else {
      result.kept.push_back(epochs[i]);
    }
  }
  return result;
}

nlohmann::json rejection_report(const RejectionResult& result) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : result.details)
    rows.push_back({{"index", r.index},
                    {"channel", default_layout().names[r.channel]},
                    {"peak_to_peak_uv", r.peak_to_peak}});
  return {{"kept", result.kept.size()}, {"rejected", rows}};
}

RejectionResult preprocess_recording(const RawRecording& rec, const PreprocessOptions& options) {
  const SosFilter filter = design_butterworth_bandpass(options.filter);
  auto epochs = segment_epochs(rec);
  for (auto& e : epochs) e = bandpass(baseline_correct(e), filter);
  return reject_artifacts(epochs, options.rejection_threshold_uv);
}

}  // namespace sonilab
