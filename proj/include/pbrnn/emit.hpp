#pragma once

#include <string>

#include "pbrnn/benchmark.hpp"

namespace pbrnn {

enum class OutputFormat { Json, Csv, Markdown };

// Accepts "json", "csv", "markdown"; throws std::invalid_argument otherwise.
OutputFormat parse_format(const std::string& name);

// Deterministic serialization of a result table: the same table always
// renders byte-identically. Numbers carry 17 significant digits (exact for
// doubles); non-finite values appear as null (json) or inf/nan literals
// (csv). Markdown renders the summary grid — architecture rows against
// trainer columns — showing normalised MSE when the table is normalised and
// raw test MSE otherwise; diverged cells render as "div." with the raw loss
// in a footnote. An empty table renders as just the header.
std::string render_results(const ResultTable& table, OutputFormat format);

// render_results written to a file. Throws std::runtime_error on IO failure.
void emit_results(const ResultTable& table, OutputFormat format, const std::string& path);

// Inverses for the machine-readable formats (markdown is display-only).
// Both throw std::runtime_error on malformed input.
ResultTable parse_results_json(const std::string& text);
ResultTable parse_results_csv(const std::string& text);

}  // namespace pbrnn
