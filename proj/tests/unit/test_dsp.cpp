#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "../oracles.hpp"
#include "sonilab/error.hpp"
#include "sonilab/features.hpp"
#include "sonilab/fft.hpp"
#include "sonilab/filter.hpp"
#include "sonilab/preprocess.hpp"
#include "sonilab/rng.hpp"

using namespace sonilab;

namespace {

std::vector<double> tone(double hz, std::size_t n, double fs, double amp = 1.0, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t t = 0; t < n; ++t) x[t] = amp * std::sin(2.0 * std::numbers::pi * hz * double(t) / fs + phase);
  return x;
}

Epoch epoch_from(const std::function<double(std::size_t c, std::size_t t)>& f) {
  Epoch e = make_epoch({});
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    for (std::size_t t = 0; t < kFixationSamples; ++t) e.fixation(c, t) = f(c, t);
    for (std::size_t t = 0; t < kStimulusSamples; ++t) e.stimulus(c, t) = f(c, t + kFixationSamples);
  }
  return e;
}

}  // namespace

TEST(Fft, MatchesNaiveDftOnEvenAndOddLengths) {
  Rng rng(3);
  for (std::size_t n : {8u, 15u, 64u, 100u}) {
    std::vector<double> x(n);
    for (auto& v : x) v = rng.normal();
    const auto fast = rfft(x);
    const auto slow = oracle::naive_rdft(x);
    ASSERT_EQ(fast.size(), slow.size());
    for (std::size_t k = 0; k < fast.size(); ++k) EXPECT_NEAR(std::abs(fast[k] - slow[k]), 0.0, 1e-9) << n << " bin " << k;
  }
}

TEST(Fft, InverseRoundTrips) {
  Rng rng(4);
  std::vector<double> x(90);
  for (auto& v : x) v = rng.normal();
  const auto back = irfft(rfft(x), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(back[i], x[i], 1e-12);
}

TEST(Fft, InverseRejectsWrongBinCount) {
  std::vector<std::complex<double>> bins(5);
  EXPECT_THROW(irfft(bins, 16), std::invalid_argument);
}

TEST(Butterworth, RealizedResponseMatchesAnalyticGain) {
  const FilterSpec spec;
  const auto filter = design_butterworth_bandpass(spec);
  EXPECT_EQ(filter.sections.size(), 6u);
  EXPECT_TRUE(is_stable(filter));
  for (double hz : {0.05, 0.1, 1.0, 10.0, 40.0, 45.0, 55.0, 60.0}) {
    const double realized = oracle::db(std::abs(frequency_response(filter, hz)));
    const double analytic =
        oracle::db(oracle::butterworth_bandpass_gain(hz, spec.order, spec.low_hz, spec.high_hz, spec.sample_rate));
    EXPECT_NEAR(realized, analytic, 0.01) << hz << " Hz";
  }
}

TEST(Butterworth, EdgesSitAtMinusThreeDecibels) {
  const auto filter = design_butterworth_bandpass({});
  EXPECT_NEAR(oracle::db(std::abs(frequency_response(filter, 0.1))), -3.0103, 1e-3);
  EXPECT_NEAR(oracle::db(std::abs(frequency_response(filter, 45.0))), -3.0103, 1e-3);
}

TEST(Butterworth, RejectsBadCutoffs) {
  EXPECT_THROW(design_butterworth_bandpass({6, 0.0, 45.0, 128.0}), Error);
  EXPECT_THROW(design_butterworth_bandpass({6, 10.0, 5.0, 128.0}), Error);
  EXPECT_THROW(design_butterworth_bandpass({6, 1.0, 64.0, 128.0}), Error);
  try {
    design_butterworth_bandpass({6, 1.0, 70.0, 128.0});
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), "bad_cutoff");
    EXPECT_EQ(e.kind(), ErrorKind::Usage);
  }
}

TEST(Butterworth, CausalFilterSettlesToSteadyStateAmplitude) {
  const auto filter = design_butterworth_bandpass({});
  const auto x = tone(10.0, 4096, kEegSampleRate);
  const auto y = sos_filter(filter, x, 0.0);
  double peak = 0.0;
  for (std::size_t t = 3000; t < y.size(); ++t) peak = std::max(peak, std::abs(y[t]));
  EXPECT_NEAR(peak, std::abs(frequency_response(filter, 10.0)), 5e-3);
}

TEST(Filtfilt, ZeroPhaseOnPassbandTone) {
  const auto filter = design_butterworth_bandpass({});
  const auto x = tone(10.0, 1024, kEegSampleRate);
  const auto y = filtfilt(filter, x);
  // The 0.1 Hz edge leaves a slow start-up drift, so compare the 10 Hz bin
  // of a middle window: squared gain, no phase shift.
  const std::span<const double> xs(x.data() + 256, 512), ys(y.data() + 256, 512);
  const auto ratio = rfft(ys)[40] / rfft(xs)[40];
  EXPECT_NEAR(std::abs(ratio), std::norm(frequency_response(filter, 10.0)), 1e-3);
  EXPECT_NEAR(std::arg(ratio), 0.0, 1e-3);
}

TEST(Filtfilt, ShortSignalIsRejected) {
  const auto filter = design_butterworth_bandpass({});
  std::vector<double> x(10, 1.0);
  EXPECT_THROW(filtfilt(filter, x), Error);
}

TEST(Preprocess, SixtyHertzIsAttenuatedEndToEnd) {
  const Epoch e = epoch_from([](std::size_t, std::size_t t) {
    return 50.0 * std::sin(2.0 * std::numbers::pi * 60.0 * double(t) / kEegSampleRate);
  });
  const Epoch out = bandpass(baseline_correct(e), FilterSpec{});
  const auto in_bins = rfft(e.stimulus.row(0));
  const auto out_bins = rfft(out.stimulus.row(0));
  const std::size_t k = 120;  // 60 Hz at 0.5 Hz resolution
  EXPECT_LE(oracle::db(std::abs(out_bins[k]) / std::abs(in_bins[k])), -40.0);
}

TEST(Preprocess, BaselineRemovesFixationMean) {
  const Epoch e = epoch_from([](std::size_t c, std::size_t t) { return double(c) * 10.0 + (t < 64 ? 5.0 : 7.0); });
  const Epoch b = baseline_correct(e);
  for (std::size_t c = 0; c < kChannelCount; ++c) {
    EXPECT_NEAR(b.fixation(c, 10), 0.0, 1e-12);
    EXPECT_NEAR(b.stimulus(c, 10), 2.0, 1e-12);
  }
}

TEST(Preprocess, SegmentsOneEpochPerMarker) {
  RawRecording rec;
  rec.data = Matrix(kChannelCount, 1000);
  for (std::size_t t = 0; t < 1000; ++t) rec.data(3, t) = double(t);
  TrialMarker m;
  m.onset = 100;
  rec.markers.push_back(m);
  m.onset = 500;
  m.focus_level = 7;
  rec.markers.push_back(m);
  const auto epochs = segment_epochs(rec);
  ASSERT_EQ(epochs.size(), 2u);
  EXPECT_EQ(epochs[0].fixation(3, 0), 100.0);
  EXPECT_EQ(epochs[0].stimulus(3, 0), 164.0);
  EXPECT_EQ(epochs[1].stimulus(3, 255), 500.0 + 319.0);
  EXPECT_EQ(epochs[1].labels.focus_level, 7);
  EXPECT_FALSE(epochs[1].labels.cl_label.has_value());
}

TEST(Preprocess, MarkerPastTheEndIsADataError) {
  RawRecording rec;
  rec.data = Matrix(kChannelCount, 300);
  TrialMarker m;
  m.onset = 100;
  rec.markers.push_back(m);
  try {
    segment_epochs(rec);
    FAIL() << "expected a marker bounds error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Data);
  }
}

TEST(Preprocess, RejectsEpochsAbovePeakToPeak) {
  std::vector<Epoch> epochs(3, epoch_from([](std::size_t, std::size_t) { return 0.0; }));
  epochs[1].stimulus(5, 40) = 250.0;
  const auto r = reject_artifacts(epochs, 200.0);
  ASSERT_EQ(r.kept.size(), 2u);
  ASSERT_EQ(r.rejected, std::vector<std::size_t>{1});
  EXPECT_EQ(r.details[0].channel, 5u);
  EXPECT_DOUBLE_EQ(r.details[0].peak_to_peak, 250.0);
  const auto report = rejection_report(r);
  EXPECT_EQ(report.at("rejected").size(), 1u);
  EXPECT_THROW(reject_artifacts(epochs, 0.0), Error);
}

TEST(Welch, TenHertzToneLandsInAlpha) {
  const auto x = tone(10.0, kStimulusSamples, kEegSampleRate, 20.0, 0.3);
  const auto s = welch(x, kEegSampleRate);
  const double total = integrate_band(s, 0.0, kEegSampleRate / 2);
  const double alpha = integrate_band(s, 8.0, 12.0);
  EXPECT_GE(alpha / total, 0.9);
}

TEST(Welch, WhiteNoiseDensityMatchesVariance) {
  Rng rng(11);
  std::vector<double> x(128 * 64);
  for (auto& v : x) v = 3.0 * rng.normal();
  const auto s = welch(x, kEegSampleRate);
  // One-sided density of white noise: 2 sigma^2 / fs.
  double mean = 0.0;
  for (std::size_t k = 5; k < s.density.size() - 5; ++k) mean += s.density[k];
  mean /= double(s.density.size() - 10);
  EXPECT_NEAR(mean, 2.0 * 9.0 / kEegSampleRate, 0.1 * 2.0 * 9.0 / kEegSampleRate);
}

TEST(Welch, BandPsdLayoutIsChannelMajor) {
  const Epoch e = epoch_from([](std::size_t c, std::size_t t) {
    const double hz = c == 2 ? 20.0 : 6.0;
    return 10.0 * std::sin(2.0 * std::numbers::pi * hz * double(t) / kEegSampleRate);
  });
  const auto psd = welch_band_psd(e);
  ASSERT_EQ(psd.size(), kPsdLength);
  EXPECT_EQ(oracle::argmax(psd, 2 * kBandCount, 3 * kBandCount), 2 * kBandCount + 3);  // beta
  EXPECT_EQ(oracle::argmax(psd, 0, kBandCount), 1u);                                   // theta
}

TEST(Spectrogram, ShapeAndPeakBin) {
  const Epoch e = epoch_from([](std::size_t, std::size_t t) {
    return std::sin(2.0 * std::numbers::pi * 16.0 * double(t) / kEegSampleRate);
  });
  const auto s = stft_spectrogram(e);
  EXPECT_EQ(s.frames, 25u);
  EXPECT_EQ(s.bins, 33u);
  EXPECT_DOUBLE_EQ(s.bin_hz, 2.0);
  std::vector<double> frame(s.bins);
  for (std::size_t b = 0; b < s.bins; ++b) frame[b] = s.at(0, 12, b);
  EXPECT_EQ(oracle::argmax(frame), 8u);
  EXPECT_EQ(spectrogram_image(s).size(), kChannelCount * 25 * 33);
}

TEST(Zscore, FitsTrainRowsOnly) {
  Matrix train(4, 2, std::vector<double>{1, 10, 2, 10, 3, 10, 4, 10});
  const auto n = zscore_fit(train);
  EXPECT_DOUBLE_EQ(n.mean[0], 2.5);
  EXPECT_NEAR(n.scale[0], std::sqrt(1.25), 1e-12);
  EXPECT_DOUBLE_EQ(n.scale[1], kScaleFloor);
  const auto z = zscore_apply(n, Matrix(1, 2, std::vector<double>{2.5, 10}));
  EXPECT_DOUBLE_EQ(z(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(z(0, 1), 0.0);
  EXPECT_THROW(zscore_fit(Matrix()), Error);
}
