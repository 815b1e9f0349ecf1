#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pbrnn/loss.hpp"

namespace pbrnn {

// Minute-resolution log returns. Timestamps are epoch seconds, strictly
// increasing, one per return.
struct ReturnSeries {
  std::vector<std::int64_t> timestamps;
  std::vector<double> returns;
};

// Realized variance per aggregation bar. Bars with no returns are absent.
struct RvSeries {
  std::vector<std::int64_t> bar_timestamps;  // bar-start epoch seconds
  std::vector<double> rv;
};

// Target-space transform fitted on the training range. mean/stdev describe
// log rv; identity and plain-log transforms keep the no-op defaults.
struct TransformStats {
  TargetTransform kind = TargetTransform::StandardizedLog;
  double mean = 0.0;
  double stdev = 1.0;

  double apply(double rv) const;   // raw rv -> model space
  double invert(double z) const;   // model space -> raw rv
};

// Supervised one-step-ahead dataset. Row t holds the transformed rv at lags
// t-lags+1..t (oldest first) plus an optional intraday position feature;
// the target is the transformed rv one bar ahead. Split boundaries are
// chronological: rows [0, train_end) train, [train_end, val_end) validation,
// [val_end, rows()) test.
struct SequenceDataset {
  std::vector<double> features;  // row-major, rows() x feature_dim
  std::size_t feature_dim = 0;
  std::vector<double> targets;
  std::size_t train_end = 0;
  std::size_t val_end = 0;
  TransformStats transform;

  std::size_t rows() const { return targets.size(); }
};

struct DatasetOptions {
  int lags = 1;
  TargetTransform transform = TargetTransform::StandardizedLog;
  double train_fraction = 0.6;
  double val_fraction = 0.2;
  double test_fraction = 0.2;
  bool calendar_feature = true;  // intraday position in [0, 1)
};

// Synthetic log-variance generator: h_t = base + phi*h_{t-1} + gamma*h_{t-lag}
// + season_amp*sin(2*pi*(t mod period)/period) + noise_std*eps_t, rv = exp(h).
// Stationarity requires phi, gamma >= 0 and phi + gamma < 1.
struct SynthConfig {
  std::size_t length = 4000;
  int period = 13;  // seasonal period, bars per trading day
  int lag = 40;     // long-memory lag D
  double base = -0.05;
  double phi = 0.1;
  double gamma = 0.8;
  double season_amp = 0.25;
  double noise_std = 0.25;
  // Minimum population R^2 gain the lag term must contribute (checked when
  // gamma > 0; gamma = 0 is the deliberate no-long-memory control).
  double lag_gain_floor = 0.1;
  std::uint64_t seed = 1;
};

// Sum of squared returns per bar; bars keyed by timestamp floored to the bar
// length, empty bars omitted. Throws std::invalid_argument on empty input or
// non-increasing timestamps.
RvSeries compute_rv(const ReturnSeries& returns, int bar_minutes = 30);

// Assembles the supervised dataset. Transform statistics use exactly the raw
// values that appear in training features, so nothing later ever leaks into
// them. Throws std::invalid_argument when the series is too short
// (rows after lagging < 1) or the fractions are invalid.
SequenceDataset build_dataset(const RvSeries& rv, const DatasetOptions& opts = {});

// Simulates the seasonal long-memory process after a burn-in started from the
// stationary mean. Bar timestamps are laid out as `period` consecutive
// 30-minute bars per day. Throws std::invalid_argument on nonstationary
// parameters, insufficient length, or an immaterial lag term.
RvSeries generate_synthetic(const SynthConfig& cfg);

// Stationary mean of h: base / (1 - phi - gamma).
double synth_stationary_mean(const SynthConfig& cfg);

// Autocovariances g(0..lag) of the stochastic part of h (season removed),
// from the Yule-Walker equations of the two-lag recursion. Throws on
// nonstationary parameters.
std::vector<double> synth_autocovariances(const SynthConfig& cfg);

// Mean squared error, in h units, of the predictor that knows the mean,
// season, and phi*h_{t-1} term but omits the lag-D component entirely:
// gamma^2 * g(0) + noise_std^2.
double synth_missing_lag_mse(const SynthConfig& cfg);

// Irreducible one-step noise floor, in h units: noise_std^2.
double synth_noise_floor(const SynthConfig& cfg);

// Reads a returns CSV: header row naming `timestamp` plus either `price` or
// `return`. Timestamps are ISO-8601 (date or date+time, space or 'T'
// separator, optional trailing 'Z') or raw epoch seconds. Prices are turned
// into log returns stamped at the later minute. Output is sorted. Throws
// std::runtime_error with the offending line number on parse errors,
// non-positive prices, or an empty body.
ReturnSeries load_csv(const std::string& path);

// Deterministic serialization, 17 significant digits.
void save_returns_csv(const std::string& path, const ReturnSeries& series);
void save_rv_csv(const std::string& path, const RvSeries& series);
RvSeries load_rv_csv(const std::string& path);

}  // namespace pbrnn
