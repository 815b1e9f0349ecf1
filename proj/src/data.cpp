#include "pbrnn/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "pbrnn/linalg.hpp"
#include "pbrnn/rng.hpp"

namespace pbrnn {

namespace {

constexpr double kRvFloor = 1e-18;  // keeps log() finite on degenerate zero-rv bars

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) {
    --q;
  }
  return q;
}

// Days since the unix epoch for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
    ++b;
  }
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
    --e;
  }
  return s.substr(b, e - b);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

bool parse_timestamp(const std::string& token, std::int64_t& out) {
  if (token.empty()) {
    return false;
  }
  const char* c = token.c_str();
  if (token.find('-', 1) != std::string::npos) {  // ISO-8601 date or datetime
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0, pos = 0;
    if (std::sscanf(c, "%d-%d-%d%n", &y, &mo, &d, &pos) != 3) {
      return false;
    }
    const char* rest = c + pos;
    if (*rest == 'T' || *rest == ' ') {
      ++rest;
      int pos2 = 0;
      if (std::sscanf(rest, "%d:%d:%d%n", &h, &mi, &sec, &pos2) == 3) {
        rest += pos2;
      } else if (std::sscanf(rest, "%d:%d%n", &h, &mi, &pos2) == 2) {
        sec = 0;
        rest += pos2;
      } else {
        return false;
      }
    }
    if (*rest == 'Z') {
      ++rest;
    }
    if (*rest != '\0') {
      return false;
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 ||
        sec < 0 || sec > 60) {
      return false;
    }
    out = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 +
          h * 3600 + mi * 60 + sec;
    return true;
  }
  char* end = nullptr;
  const long long v = std::strtoll(c, &end, 10);
  if (end == c || *end != '\0') {
    return false;
  }
  out = v;
  return true;
}

bool parse_double(const std::string& token, double& out) {
  if (token.empty()) {
    return false;
  }
  char* end = nullptr;
  out = std::strtod(token.c_str(), &end);
  return end != token.c_str() && *end == '\0';
}

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double intraday_fraction(std::int64_t ts) {
  const std::int64_t day = floor_div(ts, 86400);
  return static_cast<double>(ts - day * 86400) / 86400.0;
}

}  // namespace

double TransformStats::apply(double rv) const {
  switch (kind) {
    case TargetTransform::Identity:
      return rv;
    case TargetTransform::Log:
      return std::log(std::max(rv, kRvFloor));
    case TargetTransform::StandardizedLog:
      return (std::log(std::max(rv, kRvFloor)) - mean) / stdev;
  }
  return rv;
}

double TransformStats::invert(double z) const {
  switch (kind) {
    case TargetTransform::Identity:
      return z;
    case TargetTransform::Log:
      return std::exp(z);
    case TargetTransform::StandardizedLog:
      return std::exp(z * stdev + mean);
  }
  return z;
}

RvSeries compute_rv(const ReturnSeries& returns, int bar_minutes) {
  if (returns.timestamps.empty() || returns.returns.size() != returns.timestamps.size()) {
    throw std::invalid_argument("empty or inconsistent return series");
  }
  if (bar_minutes < 1) {
    throw std::invalid_argument("bar_minutes must be >= 1");
  }
  const std::int64_t bar_seconds = static_cast<std::int64_t>(bar_minutes) * 60;
  RvSeries out;
  for (std::size_t i = 0; i < returns.timestamps.size(); ++i) {
    if (i > 0 && returns.timestamps[i] <= returns.timestamps[i - 1]) {
      throw std::invalid_argument("timestamps must be strictly increasing");
    }
    const std::int64_t bar = floor_div(returns.timestamps[i], bar_seconds) * bar_seconds;
    const double r2 = returns.returns[i] * returns.returns[i];
    if (!out.bar_timestamps.empty() && out.bar_timestamps.back() == bar) {
      out.rv.back() += r2;
    } else {
      out.bar_timestamps.push_back(bar);
      out.rv.push_back(r2);
    }
  }
  return out;
}

SequenceDataset build_dataset(const RvSeries& rv, const DatasetOptions& opts) {
  const std::size_t lags = opts.lags > 0 ? static_cast<std::size_t>(opts.lags) : 0;
  if (lags == 0) {
    throw std::invalid_argument("lags must be >= 1");
  }
  if (rv.rv.size() != rv.bar_timestamps.size()) {
    throw std::invalid_argument("inconsistent rv series");
  }
  if (rv.rv.size() < lags + 2) {
    throw std::invalid_argument("rv series too short for the requested lags");
  }
  const double frac_sum = opts.train_fraction + opts.val_fraction + opts.test_fraction;
  if (opts.train_fraction <= 0.0 || opts.val_fraction <= 0.0 || opts.test_fraction <= 0.0 ||
      std::abs(frac_sum - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must be positive and sum to 1");
  }

  const std::size_t rows = rv.rv.size() - lags;
  std::size_t n_train =
      static_cast<std::size_t>(std::llround(static_cast<double>(rows) * opts.train_fraction));
  n_train = std::clamp<std::size_t>(n_train, 1, rows);
  std::size_t n_val =
      static_cast<std::size_t>(std::llround(static_cast<double>(rows) * opts.val_fraction));
  n_val = std::min(n_val, rows - n_train);

  SequenceDataset ds;
  ds.train_end = n_train;
  ds.val_end = n_train + n_val;
  ds.transform.kind = opts.transform;
  if (opts.transform == TargetTransform::StandardizedLog) {
    // Fit on exactly the raw values that appear in training features:
    // indices [0, train_end + lags - 2]. Nothing later can move the stats.
    const std::size_t n_fit = ds.train_end + lags - 1;
    double mean = 0.0;
    for (std::size_t i = 0; i < n_fit; ++i) {
      mean += std::log(std::max(rv.rv[i], kRvFloor));
    }
    mean /= static_cast<double>(n_fit);
    double var = 0.0;
    for (std::size_t i = 0; i < n_fit; ++i) {
      const double d = std::log(std::max(rv.rv[i], kRvFloor)) - mean;
      var += d * d;
    }
    var /= static_cast<double>(n_fit);
    ds.transform.mean = mean;
    ds.transform.stdev = var > 1e-24 ? std::sqrt(var) : 1.0;
  }

  ds.feature_dim = lags + (opts.calendar_feature ? 1 : 0);
  ds.features.resize(rows * ds.feature_dim);
  ds.targets.resize(rows);
  for (std::size_t j = 0; j < rows; ++j) {
    double* row = ds.features.data() + j * ds.feature_dim;
    for (std::size_t i = 0; i < lags; ++i) {
      row[i] = ds.transform.apply(rv.rv[j + i]);
    }
    if (opts.calendar_feature) {
      row[lags] = intraday_fraction(rv.bar_timestamps[j + lags - 1]);
    }
    ds.targets[j] = ds.transform.apply(rv.rv[j + lags]);
  }
  return ds;
}

double synth_stationary_mean(const SynthConfig& cfg) {
  return cfg.base / (1.0 - cfg.phi - cfg.gamma);
}

namespace {

void validate_synth(const SynthConfig& cfg) {
  if (cfg.phi < 0.0 || cfg.gamma < 0.0 || cfg.phi + cfg.gamma >= 1.0) {
    throw std::invalid_argument("nonstationary generator: need phi, gamma >= 0 and phi + gamma < 1");
  }
  if (cfg.period < 1 || cfg.lag < 1) {
    throw std::invalid_argument("period and lag must be >= 1");
  }
  if (cfg.noise_std < 0.0) {
    throw std::invalid_argument("noise_std must be >= 0");
  }
}

}  // namespace

RvSeries generate_synthetic(const SynthConfig& cfg) {
  validate_synth(cfg);
  const std::size_t horizon = static_cast<std::size_t>(std::max(cfg.period, cfg.lag));
  if (cfg.length < 10 * horizon) {
    throw std::invalid_argument("length must be at least 10 * max(period, lag)");
  }
  // The lag term's population R^2 gain equals gamma^2 (it is orthogonal to the
  // one-step noise); require it to be material unless deliberately absent.
  if (cfg.gamma > 0.0 && cfg.gamma * cfg.gamma < cfg.lag_gain_floor) {
    throw std::invalid_argument("lag term is immaterial: gamma^2 below lag_gain_floor");
  }

  const std::size_t burn = 20 * horizon;
  const double mu = synth_stationary_mean(cfg);
  const std::size_t total = burn + cfg.length;
  std::vector<double> h(total, 0.0);
  RngStream rng(cfg.seed, RngPurpose::SynthNoise);
  const auto lag = static_cast<std::size_t>(cfg.lag);
  for (std::size_t i = 0; i < total; ++i) {
    const double h1 = i >= 1 ? h[i - 1] : mu;
    const double hd = i >= lag ? h[i - lag] : mu;
    // Season phase counts from the first emitted bar so the output is
    // day-aligned regardless of the burn-in length.
    const long t = static_cast<long>(i) - static_cast<long>(burn);
    const long phase = ((t % cfg.period) + cfg.period) % cfg.period;
    const double season =
        cfg.season_amp *
        std::sin(2.0 * M_PI * static_cast<double>(phase) / static_cast<double>(cfg.period));
    h[i] = cfg.base + cfg.phi * h1 + cfg.gamma * hd + season + cfg.noise_std * rng.gaussian();
  }

  RvSeries out;
  out.bar_timestamps.resize(cfg.length);
  out.rv.resize(cfg.length);
  for (std::size_t i = 0; i < cfg.length; ++i) {
    const std::int64_t day = static_cast<std::int64_t>(i) / cfg.period;
    const std::int64_t bar = static_cast<std::int64_t>(i) % cfg.period;
    out.bar_timestamps[i] = day * 86400 + bar * 1800;
    out.rv[i] = std::exp(h[burn + i]);
  }
  return out;
}

std::vector<double> synth_autocovariances(const SynthConfig& cfg) {
  validate_synth(cfg);
  const int d = cfg.lag;
  const int n = d + 1;
  // Yule-Walker for y_t = phi y_{t-1} + gamma y_{t-D} + sigma eps_t:
  //   g(0) - phi g(1) - gamma g(D)         = sigma^2
  //   g(k) - phi g(k-1) - gamma g(|D-k|)   = 0        for k = 1..D
  std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
  std::vector<double> b(n, 0.0);
  a[0] += 1.0;
  a[1] -= cfg.phi;
  a[d] -= cfg.gamma;
  b[0] = cfg.noise_std * cfg.noise_std;
  for (int k = 1; k <= d; ++k) {
    double* row = a.data() + static_cast<std::size_t>(k) * n;
    row[k] += 1.0;
    row[k - 1] -= cfg.phi;
    row[d - k] -= cfg.gamma;
  }
  std::vector<double> g(n, 0.0);
  if (!solve_dense(a, b, static_cast<std::size_t>(n), g)) {
    throw std::runtime_error("autocovariance system is singular");
  }
  return g;
}

double synth_missing_lag_mse(const SynthConfig& cfg) {
  const std::vector<double> g = synth_autocovariances(cfg);
  return cfg.gamma * cfg.gamma * g[0] + cfg.noise_std * cfg.noise_std;
}

double synth_noise_floor(const SynthConfig& cfg) { return cfg.noise_std * cfg.noise_std; }

ReturnSeries load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path + ": cannot open");
  }
  auto fail = [&path](std::size_t line_no, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
  };

  std::string line;
  if (!std::getline(in, line)) {
    fail(1, "empty file");
  }
  if (!line.empty() && line.back() == '\r') {
    line.pop_back();
  }
  auto header = split_csv_line(line);
  for (auto& h : header) {
    std::transform(h.begin(), h.end(), h.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  }
  std::size_t ts_col = header.size(), val_col = header.size();
  bool price_schema = false;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "timestamp") {
      ts_col = i;
    } else if (header[i] == "price") {
      val_col = i;
      price_schema = true;
    } else if (header[i] == "return") {
      val_col = i;
      price_schema = false;
    }
  }
  if (ts_col == header.size() || val_col == header.size()) {
    fail(1, "header must name columns 'timestamp' and 'price' or 'return'");
  }

  struct Row {
    std::int64_t ts;
    double value;
    std::size_t line_no;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (trim(line).empty()) {
      continue;
    }
    const auto fields = split_csv_line(line);
    if (fields.size() <= std::max(ts_col, val_col)) {
      fail(line_no, "expected at least " + std::to_string(std::max(ts_col, val_col) + 1) +
                        " columns");
    }
    Row r;
    r.line_no = line_no;
    if (!parse_timestamp(fields[ts_col], r.ts)) {
      fail(line_no, "cannot parse timestamp '" + fields[ts_col] + "'");
    }
    if (!parse_double(fields[val_col], r.value)) {
      fail(line_no, "cannot parse number '" + fields[val_col] + "'");
    }
    if (price_schema && r.value <= 0.0) {
      fail(line_no, "non-positive price");
    }
    rows.push_back(r);
  }
  if (rows.empty()) {
    fail(line_no, "no data rows");
  }

  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& x, const Row& y) { return x.ts < y.ts; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].ts == rows[i - 1].ts) {
      fail(rows[i].line_no, "duplicate timestamp");
    }
  }

  ReturnSeries out;
  if (price_schema) {
    if (rows.size() < 2) {
      fail(rows[0].line_no, "need at least two prices to form a return");
    }
    out.timestamps.reserve(rows.size() - 1);
    out.returns.reserve(rows.size() - 1);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      out.timestamps.push_back(rows[i].ts);
      out.returns.push_back(std::log(rows[i].value / rows[i - 1].value));
    }
  } else {
    out.timestamps.reserve(rows.size());
    out.returns.reserve(rows.size());
    for (const Row& r : rows) {
      out.timestamps.push_back(r.ts);
      out.returns.push_back(r.value);
    }
  }
  return out;
}

void save_returns_csv(const std::string& path, const ReturnSeries& series) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  out << "timestamp,return\n";
  for (std::size_t i = 0; i < series.timestamps.size(); ++i) {
    out << series.timestamps[i] << ',' << format_g17(series.returns[i]) << '\n';
  }
  if (!out) {
    throw std::runtime_error(path + ": write failed");
  }
}

void save_rv_csv(const std::string& path, const RvSeries& series) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  out << "bar_ts,rv\n";
  for (std::size_t i = 0; i < series.bar_timestamps.size(); ++i) {
    out << series.bar_timestamps[i] << ',' << format_g17(series.rv[i]) << '\n';
  }
  if (!out) {
    throw std::runtime_error(path + ": write failed");
  }
}

RvSeries load_rv_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(path + ": cannot open");
  }
  auto fail = [&path](std::size_t line_no, const std::string& what) {
    throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
  };
  std::string line;
  if (!std::getline(in, line)) {
    fail(1, "empty file");
  }
  RvSeries out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (trim(line).empty()) {
      continue;
    }
    const auto fields = split_csv_line(line);
    std::int64_t ts = 0;
    double rv = 0.0;
    if (fields.size() < 2 || !parse_timestamp(fields[0], ts) || !parse_double(fields[1], rv)) {
      fail(line_no, "expected 'bar_ts,rv' row");
    }
    if (!out.bar_timestamps.empty() && ts <= out.bar_timestamps.back()) {
      fail(line_no, "bar timestamps must be strictly increasing");
    }
    out.bar_timestamps.push_back(ts);
    out.rv.push_back(rv);
  }
  if (out.rv.empty()) {
    fail(line_no, "no data rows");
  }
  return out;
}

}  // namespace pbrnn
