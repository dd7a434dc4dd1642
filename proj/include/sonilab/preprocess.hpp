#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sonilab/filter.hpp"
#include "sonilab/types.hpp"

namespace sonilab {

inline constexpr double kDefaultRejectionUv = 200.0;

/// One epoch per marker: fixation = [onset, onset+64), stimulus =
/// [onset+64, onset+320). The CL label is left unset.
std::vector<Epoch> segment_epochs(const RawRecording& rec);

/// Subtracts each channel's fixation mean from both segments.
Epoch baseline_correct(const Epoch& epoch);

/// Zero-phase bandpass over the concatenated 320-sample epoch.
Epoch bandpass(const Epoch& epoch, const SosFilter& filter);
Epoch bandpass(const Epoch& epoch, const FilterSpec& spec = {});

struct Rejection {
  std::size_t index = 0;
  std::size_t channel = 0;  // first channel exceeding the threshold
  double peak_to_peak = 0.0;
};

struct RejectionResult {
  std::vector<Epoch> kept;
  std::vector<std::size_t> rejected;
  std::vector<Rejection> details;
};

/// Drops an epoch iff some channel's stimulus peak-to-peak exceeds the
/// threshold. Throws Error{Usage, "bad_threshold"} unless threshold > 0.
RejectionResult reject_artifacts(const std::vector<Epoch>& epochs,
                                 double p2p_threshold_uv = kDefaultRejectionUv);

nlohmann::json rejection_report(const RejectionResult& result);

struct PreprocessOptions {
  FilterSpec filter;
  double rejection_threshold_uv = kDefaultRejectionUv;
};

/// segment -> baseline -> bandpass -> reject.
RejectionResult preprocess_recording(const RawRecording& rec, const PreprocessOptions& options = {});

}  // namespace sonilab
