#include "pbrnn/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pbrnn/benchmark.hpp"
#include "pbrnn/emit.hpp"
#include "pbrnn/evaluate.hpp"
#include "pbrnn/rng.hpp"

namespace pbrnn {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return "";
  }
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Pulls typed values out of the key/value config, tracking which keys were
// touched so leftovers (typos, wrong-command keys) become hard errors.
class KvReader {
 public:
  explicit KvReader(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  std::string str(const std::string& key, const std::string& fallback) {
    const auto it = kv_.find(key);
    if (it == kv_.end()) {
      return fallback;
    }
    used_.insert(key);
    return it->second;
  }

  double num(const std::string& key, double fallback) {
    const auto it = kv_.find(key);
    if (it == kv_.end()) {
      return fallback;
    }
    used_.insert(key);
    const char* begin = it->second.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
      throw std::invalid_argument("config key " + key + " is not a number: " + it->second);
    }
    return v;
  }

  long integer(const std::string& key, long fallback) {
    const double v = num(key, static_cast<double>(fallback));
    const long i = static_cast<long>(v);
    if (static_cast<double>(i) != v) {
      throw std::invalid_argument("config key " + key + " must be an integer");
    }
    return i;
  }

  std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
    const auto it = kv_.find(key);
    if (it == kv_.end()) {
      return fallback;
    }
    used_.insert(key);
    const char* begin = it->second.c_str();
    char* end = nullptr;
    const unsigned long long v = std::strtoull(begin, &end, 10);
    if (end == begin || *end != '\0') {
      throw std::invalid_argument("config key " + key + " is not a count: " + it->second);
    }
    return v;
  }

  bool flag(const std::string& key, bool fallback) {
    const std::string v = str(key, fallback ? "1" : "0");
    if (v == "1" || v == "true" || v == "yes") {
      return true;
    }
    if (v == "0" || v == "false" || v == "no") {
      return false;
    }
    throw std::invalid_argument("config key " + key + " is not a boolean: " + v);
  }

  std::vector<std::string> list(const std::string& key, const std::string& fallback) {
    std::vector<std::string> out;
    std::istringstream in(str(key, fallback));
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (!item.empty()) {
        out.push_back(item);
      }
    }
    return out;
  }

  // Every key must belong to the command that received it.
  void reject_unknown() const {
    for (const auto& [key, value] : kv_) {
      if (used_.count(key) == 0) {
        throw std::invalid_argument("unknown config key: " + key);
      }
    }
  }

 private:
  std::map<std::string, std::string> kv_;
  std::set<std::string> used_;
};

TargetTransform transform_from(const std::string& name) {
  if (name == "identity") {
    return TargetTransform::Identity;
  }
  if (name == "log") {
    return TargetTransform::Log;
  }
  if (name == "standardized_log") {
    return TargetTransform::StandardizedLog;
  }
  throw std::invalid_argument("unknown transform: " + name);
}

// Overrides the base generator config with any synth_* keys present.
SynthConfig synth_from(KvReader& cfg, SynthConfig sc) {
  sc.length = static_cast<std::size_t>(cfg.integer("synth_length", static_cast<long>(sc.length)));
  sc.period = static_cast<int>(cfg.integer("synth_period", sc.period));
  sc.lag = static_cast<int>(cfg.integer("synth_lag", sc.lag));
  sc.base = cfg.num("synth_base", sc.base);
  sc.phi = cfg.num("synth_phi", sc.phi);
  sc.gamma = cfg.num("synth_gamma", sc.gamma);
  sc.season_amp = cfg.num("synth_season_amp", sc.season_amp);
  sc.noise_std = cfg.num("synth_noise_std", sc.noise_std);
  sc.lag_gain_floor = cfg.num("synth_lag_gain_floor", sc.lag_gain_floor);
  sc.seed = cfg.u64("synth_seed", sc.seed);
  return sc;
}

SynthConfig seeded_synth(std::uint64_t seed) {
  SynthConfig sc;
  sc.seed = seed;
  return sc;
}

// Shared data plumbing: synthetic generator or CSV input, then the
// supervised dataset with chronological splits.
SequenceDataset dataset_from(KvReader& cfg, std::uint64_t seed) {
  const std::string source = cfg.str("source", "synth");
  RvSeries rv;
  if (source == "synth") {
    rv = generate_synthetic(synth_from(cfg, seeded_synth(seed)));
  } else if (source == "returns_csv") {
    const std::string path = cfg.str("csv_path", "");
    if (path.empty()) {
      throw std::invalid_argument("source=returns_csv needs csv_path");
    }
    rv = compute_rv(load_csv(path), static_cast<int>(cfg.integer("bar_minutes", 30)));
  } else if (source == "rv_csv") {
    const std::string path = cfg.str("csv_path", "");
    if (path.empty()) {
      throw std::invalid_argument("source=rv_csv needs csv_path");
    }
    rv = load_rv_csv(path);
  } else {
    throw std::invalid_argument("unknown data source: " + source);
  }

  DatasetOptions opts;
  opts.lags = static_cast<int>(cfg.integer("lags", opts.lags));
  opts.transform = transform_from(cfg.str("transform", "standardized_log"));
  opts.train_fraction = cfg.num("train_fraction", opts.train_fraction);
  opts.val_fraction = cfg.num("val_fraction", opts.val_fraction);
  opts.test_fraction = cfg.num("test_fraction", opts.test_fraction);
  opts.calendar_feature = cfg.flag("calendar_feature", opts.calendar_feature);
  return build_dataset(rv, opts);
}

CellSpec cell_from(KvReader& cfg, CellKind arch, std::size_t input_dim,
                   std::size_t train_rows) {
  CellSpec spec;
  spec.kind = arch;
  spec.input_dim = static_cast<int>(input_dim);
  spec.hidden_dim = static_cast<int>(cfg.integer("hidden", 8));
  spec.output_dim = 1;
  if (arch == CellKind::Fru) {
    spec.fru_frequencies.clear();
    for (const std::string& f : cfg.list("fru_frequencies", "0,1,2,4,8,16")) {
      spec.fru_frequencies.push_back(std::strtod(f.c_str(), nullptr));
    }
    const double scale = cfg.num("fru_time_scale", 0.0);
    spec.fru_time_scale =
        scale > 0 ? scale : static_cast<double>(std::max<std::size_t>(train_rows, 1));
  }
  spec.validate();
  return spec;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  out << text;
  if (!out.flush()) {
    throw std::runtime_error("write failed: " + path);
  }
}

ordered_json json_or_null(double v) {
  if (std::isfinite(v)) {
    return v;
  }
  return nullptr;
}

// --- subcommand bodies ------------------------------------------------------

int cmd_synth(KvReader cfg, std::uint64_t seed, const std::string& out) {
  if (out.empty()) {
    throw std::invalid_argument("synth needs --out");
  }
  const RvSeries rv = generate_synthetic(synth_from(cfg, seeded_synth(seed)));
  cfg.reject_unknown();
  save_rv_csv(out, rv);
  std::cout << "wrote " << rv.rv.size() << " bars to " << out << "\n";
  return 0;
}

int cmd_rv(KvReader cfg, const std::string& input, const std::string& out) {
  if (out.empty()) {
    throw std::invalid_argument("rv needs --out");
  }
  const int bar_minutes = static_cast<int>(cfg.integer("bar_minutes", 30));
  cfg.reject_unknown();
  const RvSeries rv = compute_rv(load_csv(input), bar_minutes);
  save_rv_csv(out, rv);
  std::cout << "wrote " << rv.rv.size() << " bars to " << out << "\n";
  return 0;
}

int cmd_train(KvReader cfg, std::uint64_t seed, int workers, const std::string& out) {
  const SequenceDataset data = dataset_from(cfg, seed);
  const CellKind arch = arch_from_name(cfg.str("arch", "lstm"));
  const TrainerKind trainer = trainer_from_name(cfg.str("trainer", "es"));
  const CellSpec spec = cell_from(cfg, arch, data.feature_dim, data.train_end);
  const WeightLayout layout = WeightLayout::for_cell(spec);

  const std::uint64_t budget = cfg.u64("budget", 0);  // 0 = uncapped
  BudgetMeter meter(budget == 0 ? UINT64_MAX : budget);

  const LossFn train_loss = [&](const ParameterVector& theta) {
    return sequence_mse(spec, layout, theta, data, train_range(data));
  };

  TrainResult result;
  switch (trainer) {
    case TrainerKind::Sgd: {
      if (arch != CellKind::Lstm) {
        throw std::invalid_argument("gradient training is implemented for lstm only");
      }
      SgdConfig sc;
      sc.learning_rate = cfg.num("learning_rate", sc.learning_rate);
      sc.minibatch = static_cast<int>(cfg.integer("minibatch", sc.minibatch));
      sc.truncation = static_cast<int>(cfg.integer("truncation", sc.truncation));
      sc.patience = static_cast<int>(cfg.integer("patience", sc.patience));
      sc.max_epochs = static_cast<int>(cfg.integer("max_epochs", sc.max_epochs));
      cfg.reject_unknown();
      result = train_sgd(sc, spec, layout, data, seed, &meter);
      break;
    }
    case TrainerKind::Es: {
      EsConfig ec;
      ec.step_size = cfg.num("alpha", ec.step_size);
      ec.noise_std = cfg.num("sigma", ec.noise_std);
      ec.population = static_cast<int>(cfg.integer("population", ec.population));
      ec.iterations = static_cast<int>(cfg.integer("iterations", ec.iterations));
      cfg.reject_unknown();
      result = train_es(ec, layout.size(), seed, train_loss, &meter, workers);
      break;
    }
    case TrainerKind::Npso: {
      NpsoConfig nc;
      nc.inertia = cfg.num("inertia", nc.inertia);
      nc.init_std = cfg.num("init_std", nc.init_std);
      nc.population = static_cast<int>(cfg.integer("population", nc.population));
      nc.iterations = static_cast<int>(cfg.integer("iterations", nc.iterations));
      cfg.reject_unknown();
      result = train_npso(nc, layout.size(), seed, train_loss, &meter, workers);
      break;
    }
  }

  ordered_json doc;
  doc["arch"] = arch_name(arch);
  doc["trainer"] = trainer_name(trainer);
  doc["diverged"] = result.diverged;
  doc["iterations_run"] = result.iterations_run;
  doc["passes_used"] = meter.used();
  doc["train_mse"] =
      json_or_null(result.diverged
                       ? std::numeric_limits<double>::infinity()
                       : sequence_mse(spec, layout, result.theta, data, train_range(data)));
  doc["val_mse"] =
      json_or_null(result.diverged
                       ? std::numeric_limits<double>::infinity()
                       : sequence_mse(spec, layout, result.theta, data, val_range(data)));
  doc["test_mse"] =
      json_or_null(result.diverged
                       ? std::numeric_limits<double>::infinity()
                       : sequence_mse(spec, layout, result.theta, data, test_range(data)));
  write_text(out, doc.dump(2) + "\n");
  return 0;
}

int cmd_search(KvReader cfg, std::uint64_t seed, int workers, const std::string& out) {
  const SequenceDataset data = dataset_from(cfg, seed);
  ExperimentConfig ec;
  ec.architectures = {arch_from_name(cfg.str("arch", "lstm"))};
  ec.trainers = {trainer_from_name(cfg.str("trainer", "es"))};
  ec.budget = cfg.u64("budget", ec.budget);
  ec.sgd_search = static_cast<int>(cfg.integer("sgd_search", ec.sgd_search));
  ec.pbo_search = static_cast<int>(cfg.integer("pbo_search", ec.pbo_search));
  ec.population = static_cast<int>(cfg.integer("population", ec.population));
  ec.truncation = static_cast<int>(cfg.integer("truncation", ec.truncation));
  ec.patience = static_cast<int>(cfg.integer("patience", ec.patience));
  ec.seed = seed;
  ec.workers = workers;
  ec.normalize = false;  // a single cell has no reference cell
  cfg.reject_unknown();

  const ResultTable table = run_benchmark(ec, data);
  write_text(out, render_results(table, OutputFormat::Json));
  return 0;
}

int cmd_benchmark(KvReader cfg, std::uint64_t seed, int workers, const std::string& out,
                  const std::string& format) {
  const SequenceDataset data = dataset_from(cfg, seed);
  ExperimentConfig ec;
  ec.architectures.clear();
  for (const std::string& name : cfg.list("architectures", "lstm,plstm,fru")) {
    ec.architectures.push_back(arch_from_name(name));
  }
  ec.trainers.clear();
  for (const std::string& name : cfg.list("trainers", "sgd,es,npso")) {
    ec.trainers.push_back(trainer_from_name(name));
  }
  ec.budget = cfg.u64("budget", ec.budget);
  ec.sgd_search = static_cast<int>(cfg.integer("sgd_search", ec.sgd_search));
  ec.pbo_search = static_cast<int>(cfg.integer("pbo_search", ec.pbo_search));
  ec.population = static_cast<int>(cfg.integer("population", ec.population));
  ec.truncation = static_cast<int>(cfg.integer("truncation", ec.truncation));
  ec.patience = static_cast<int>(cfg.integer("patience", ec.patience));
  ec.normalize = cfg.flag("normalize", ec.normalize);
  ec.include_timing = cfg.flag("include_timing", ec.include_timing);
  ec.fru_frequencies.clear();
  for (const std::string& f : cfg.list("fru_frequencies", "0,1,2,4,8,16")) {
    ec.fru_frequencies.push_back(std::strtod(f.c_str(), nullptr));
  }
  ec.fru_time_scale = cfg.num("fru_time_scale", ec.fru_time_scale);
  ec.seed = seed;
  ec.workers = workers;
  cfg.reject_unknown();

  const ResultTable table = run_benchmark(ec, data);
  write_text(out, render_results(table, parse_format(format)));
  return 0;
}

int cmd_accept(KvReader cfg, std::uint64_t seed, int workers, const std::string& out) {
  if (cfg.has("synth_seed")) {
    // The gate derives every stream, the generator's included, from --seed.
    throw std::invalid_argument("accept derives synth_seed from --seed; drop the key");
  }
  LongMemoryOptions opts;
  opts.seed = seed;
  opts.workers = workers;
  opts.synth = synth_from(cfg, opts.synth);
  opts.synth.lag = static_cast<int>(cfg.integer("lag", opts.synth.lag));
  opts.truncation = static_cast<int>(cfg.integer("truncation", opts.truncation));
  opts.budget = cfg.u64("budget", opts.budget);
  opts.hidden = static_cast<int>(cfg.integer("hidden", opts.hidden));
  opts.es_alpha = cfg.num("es_alpha", opts.es_alpha);
  opts.es_sigma = cfg.num("es_sigma", opts.es_sigma);
  opts.es_population = static_cast<int>(cfg.integer("es_population", opts.es_population));
  opts.sgd_learning_rate = cfg.num("sgd_learning_rate", opts.sgd_learning_rate);
  opts.sgd_minibatch = static_cast<int>(cfg.integer("sgd_minibatch", opts.sgd_minibatch));
  opts.sgd_patience = static_cast<int>(cfg.integer("sgd_patience", opts.sgd_patience));
  cfg.reject_unknown();

  const LongMemoryReport report = long_memory_acceptance(opts);

  ordered_json doc;
  doc["sgd_mse"] = json_or_null(report.sgd_mse);
  doc["es_mse"] = json_or_null(report.es_mse);
  doc["mean_baseline_mse"] = report.mean_baseline_mse;
  doc["noise_floor"] = report.noise_floor;
  doc["sgd_passes"] = report.sgd_passes;
  doc["es_passes"] = report.es_passes;
  doc["control"] = report.control;
  doc["pass"] = report.pass;
  write_text(out, doc.dump(2) + "\n");

  if (report.control) {
    return 0;  // no gate on the no-long-memory control
  }
  return report.pass ? 0 : 4;
}

}  // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  " is not key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + " has no key");
    }
    if (!kv.emplace(key, value).second) {
      throw std::invalid_argument("duplicate config key: " + key);
    }
  }
  return kv;
}

std::map<std::string, std::string> load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::invalid_argument("cannot read config file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"gradient-free RNN training benchmark"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 1;
  int workers = 1;
  std::string out;
  std::string format = "markdown";

  // Common flags live on every subcommand.
  const auto add_common = [&](CLI::App* cmd, bool with_format) {
    cmd->add_option("--config", config_path, "key = value config file");
    cmd->add_option("--seed", seed, "master seed");
    cmd->add_option("--workers", workers, "worker threads");
    cmd->add_option("--out", out, "output path (default: stdout)");
    if (with_format) {
      cmd->add_option("--format", format, "json|csv|markdown");
    }
  };

  CLI::App* synth = app.add_subcommand("synth", "write a synthetic realized-variance CSV");
  add_common(synth, false);

  CLI::App* rv = app.add_subcommand("rv", "aggregate a returns CSV into realized variance");
  std::string rv_input;
  rv->add_option("input", rv_input, "minute returns or price CSV")->required();
  add_common(rv, false);

  CLI::App* train = app.add_subcommand("train", "train one architecture x trainer cell");
  add_common(train, false);

  CLI::App* search = app.add_subcommand("search", "random hyperparameter search on one cell");
  add_common(search, false);

  CLI::App* benchmark = app.add_subcommand("benchmark", "full architecture x trainer table");
  add_common(benchmark, true);

  CLI::App* accept = app.add_subcommand("accept", "long-memory acceptance gate");
  add_common(accept, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    KvReader cfg(config_path.empty() ? std::map<std::string, std::string>{}
                                     : load_config_file(config_path));
    if (workers < 1) {
      throw std::invalid_argument("--workers must be positive");
    }
    if (synth->parsed()) {
      return cmd_synth(std::move(cfg), seed, out);
    }
    if (rv->parsed()) {
      return cmd_rv(std::move(cfg), rv_input, out);
    }
    if (train->parsed()) {
      return cmd_train(std::move(cfg), seed, workers, out);
    }
    if (search->parsed()) {
      return cmd_search(std::move(cfg), seed, workers, out);
    }
    if (benchmark->parsed()) {
      return cmd_benchmark(std::move(cfg), seed, workers, out, format);
    }
    if (accept->parsed()) {
      return cmd_accept(std::move(cfg), seed, workers, out);
    }
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const BudgetParityError& err) {
    std::cerr << "budget parity: " << err.what() << "\n";
    return 3;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
}

}  // namespace pbrnn
