#pragma once

#include <map>
#include <string>
#include <vector>

namespace pbrnn {

// Plain `key = value` config text: one pair per line, '#' starts a comment,
// blank lines ignored. Throws std::invalid_argument on a line without '='
// or a duplicated key.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> load_config_file(const std::string& path);

// Command-line entry point (arguments after the program name). Returns the
// process exit code: 0 success, 2 config error, 3 budget-parity violation,
// 4 acceptance-gate failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace pbrnn
