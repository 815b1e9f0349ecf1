#include "pbrnn/emit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace pbrnn {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kInf = std::numeric_limits<double>::infinity();

// 17 significant digits round-trips any double exactly; glibc prints
// non-finite values as inf/-inf/nan, which strtod reads back.
std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const ordered_json& v) {
  if (v.is_null()) {
    return kInf;  // json has no inf literal; null marks a diverged value
  }
  return v.get<double>();
}

ordered_json from_double(double v) {
  if (!std::isfinite(v)) {
    return nullptr;
  }
  return v;
}

const char* kCsvHeader =
    "arch,trainer,implemented,failed,test_mse,normalized_mse,passes_used,wall_seconds,"
    "budget,seed,normalized,hyperparameters";

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw std::runtime_error("bad number in result file: " + text);
  }
  return v;
}

std::uint64_t parse_u64(const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const unsigned long long v = std::strtoull(begin, &end, 10);
  if (end == begin || *end != '\0') {
    throw std::runtime_error("bad count in result file: " + text);
  }
  return v;
}

std::string render_json(const ResultTable& table) {
  ordered_json doc;
  doc["budget"] = table.budget;
  doc["seed"] = table.seed;
  doc["normalized"] = table.normalized;
  doc["cells"] = ordered_json::array();
  for (const CellResult& cell : table.cells) {
    ordered_json c;
    c["arch"] = arch_name(cell.arch);
    c["trainer"] = trainer_name(cell.trainer);
    c["implemented"] = cell.implemented;
    c["failed"] = cell.failed;
    c["test_mse"] = from_double(cell.test_mse);
    c["normalized_mse"] = from_double(cell.normalized_mse);
    c["passes_used"] = cell.passes_used;
    c["wall_seconds"] = from_double(cell.wall_seconds);
    ordered_json params = ordered_json::object();
    for (const auto& [name, value] : cell.best_params) {
      params[name] = value;
    }
    c["hyperparameters"] = std::move(params);
    doc["cells"].push_back(std::move(c));
  }
  return doc.dump(2) + "\n";
}

std::string render_csv(const ResultTable& table) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const CellResult& cell : table.cells) {
    out += arch_name(cell.arch);
    out += ',';
    out += trainer_name(cell.trainer);
    out += ',';
    out += cell.implemented ? '1' : '0';
    out += ',';
    out += cell.failed ? '1' : '0';
    out += ',';
    out += fmt17(cell.test_mse);
    out += ',';
    out += fmt17(cell.normalized_mse);
    out += ',';
    out += std::to_string(cell.passes_used);
    out += ',';
    out += fmt17(cell.wall_seconds);
    out += ',';
    out += std::to_string(table.budget);
    out += ',';
    out += std::to_string(table.seed);
    out += ',';
    out += table.normalized ? '1' : '0';
    out += ',';
    bool first = true;
    for (const auto& [name, value] : cell.best_params) {
      if (!first) {
        out += ';';
      }
      first = false;
      out += name;
      out += '=';
      out += fmt17(value);
    }
    out += '\n';
  }
  return out;
}

std::string display_arch(CellKind kind) {
  switch (kind) {
    case CellKind::Lstm:
      return "LSTM";
    case CellKind::Plstm:
      return "P-LSTM";
    case CellKind::Fru:
      return "FRU";
  }
  return "?";
}

std::string display_trainer(TrainerKind kind) {
  switch (kind) {
    case TrainerKind::Sgd:
      return "SGD";
    case TrainerKind::Es:
      return "ES";
    case TrainerKind::Npso:
      return "NPSO";
  }
  return "?";
}

std::string fmt_cell_value(double v, bool normalized) {
  char buf[64];
  if (normalized) {
    std::snprintf(buf, sizeof buf, "%.3f", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.6g", v);
  }
  return buf;
}

std::string render_markdown(const ResultTable& table) {
  // Column and row sets in first-appearance order, which run_benchmark
  // emits architecture-major.
  std::vector<TrainerKind> cols;
  std::vector<CellKind> rows;
  for (const CellResult& cell : table.cells) {
    if (std::find(cols.begin(), cols.end(), cell.trainer) == cols.end()) {
      cols.push_back(cell.trainer);
    }
    if (std::find(rows.begin(), rows.end(), cell.arch) == rows.end()) {
      rows.push_back(cell.arch);
    }
  }

  std::string out = "| Architecture |";
  for (TrainerKind t : cols) {
    out += ' ';
    out += display_trainer(t);
    out += " |";
  }
  out += "\n| --- |";
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out += " --- |";
  }
  out += '\n';

  std::vector<std::string> footnotes;
  for (CellKind arch : rows) {
    out += "| ";
    out += display_arch(arch);
    out += " |";
    for (TrainerKind trainer : cols) {
      const CellResult* found = nullptr;
      for (const CellResult& cell : table.cells) {
        if (cell.arch == arch && cell.trainer == trainer) {
          found = &cell;
          break;
        }
      }
      out += ' ';
      if (found == nullptr) {
        out += "—";
      } else if (!found->implemented) {
        out += "not implemented";
      } else if (found->failed || !std::isfinite(found->test_mse)) {
        footnotes.push_back(display_arch(arch) + "+" + display_trainer(trainer) +
                            " raw test MSE: " + fmt17(found->test_mse));
        out += "div.[^" + std::to_string(footnotes.size()) + "]";
      } else {
        out += fmt_cell_value(table.normalized ? found->normalized_mse : found->test_mse,
                              table.normalized);
      }
      out += " |";
    }
    out += '\n';
  }

  for (std::size_t i = 0; i < footnotes.size(); ++i) {
    out += "\n[^" + std::to_string(i + 1) + "]: " + footnotes[i] + "\n";
  }
  return out;
}

}  // namespace

OutputFormat parse_format(const std::string& name) {
  if (name == "json") {
    return OutputFormat::Json;
  }
  if (name == "csv") {
    return OutputFormat::Csv;
  }
  if (name == "markdown") {
    return OutputFormat::Markdown;
  }
  throw std::invalid_argument("unknown output format: " + name);
}

std::string render_results(const ResultTable& table, OutputFormat format) {
  switch (format) {
    case OutputFormat::Json:
      return render_json(table);
    case OutputFormat::Csv:
      return render_csv(table);
    case OutputFormat::Markdown:
      return render_markdown(table);
  }
  throw std::invalid_argument("unknown output format");
}

void emit_results(const ResultTable& table, OutputFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: no newline translation
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  out << render_results(table, format);
  if (!out.flush()) {
    throw std::runtime_error("write failed: " + path);
  }
}

ResultTable parse_results_json(const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const std::exception& err) {
    throw std::runtime_error(std::string("bad json result file: ") + err.what());
  }
  ResultTable table;
  table.budget = doc.at("budget").get<std::uint64_t>();
  table.seed = doc.at("seed").get<std::uint64_t>();
  table.normalized = doc.at("normalized").get<bool>();
  for (const ordered_json& c : doc.at("cells")) {
    CellResult cell;
    cell.arch = arch_from_name(c.at("arch").get<std::string>());
    cell.trainer = trainer_from_name(c.at("trainer").get<std::string>());
    cell.implemented = c.at("implemented").get<bool>();
    cell.failed = c.at("failed").get<bool>();
    cell.test_mse = to_double(c.at("test_mse"));
    cell.normalized_mse = to_double(c.at("normalized_mse"));
    cell.passes_used = c.at("passes_used").get<std::uint64_t>();
    cell.wall_seconds = to_double(c.at("wall_seconds"));
    for (const auto& [name, value] : c.at("hyperparameters").items()) {
      cell.best_params.emplace_back(name, value.get<double>());
    }
    table.cells.push_back(std::move(cell));
  }
  return table;
}

ResultTable parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::runtime_error("bad csv result file: missing header");
  }
  ResultTable table;
  bool first_row = true;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() != 12) {
      throw std::runtime_error("bad csv result file: wrong field count");
    }
    CellResult cell;
    cell.arch = arch_from_name(fields[0]);
    cell.trainer = trainer_from_name(fields[1]);
    cell.implemented = fields[2] == "1";
    cell.failed = fields[3] == "1";
    cell.test_mse = parse_double(fields[4]);
    cell.normalized_mse = parse_double(fields[5]);
    cell.passes_used = parse_u64(fields[6]);
    cell.wall_seconds = parse_double(fields[7]);
    if (first_row) {
      table.budget = parse_u64(fields[8]);
      table.seed = parse_u64(fields[9]);
      table.normalized = fields[10] == "1";
      first_row = false;
    }
    if (!fields[11].empty()) {
      for (const std::string& item : split(fields[11], ';')) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos) {
          throw std::runtime_error("bad csv result file: malformed hyperparameter");
        }
        cell.best_params.emplace_back(item.substr(0, eq), parse_double(item.substr(eq + 1)));
      }
    }
    table.cells.push_back(std::move(cell));
  }
  return table;
}

}  // namespace pbrnn
