#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tdiff/io.hpp"

namespace tdiff::cli {

inline constexpr const char* kToolName = "tdiff";
inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kSchemaVersion = 1;

struct Options {
  std::optional<unsigned long long> seed;
  int jobs = 1;
  std::vector<std::string> tol;  // key=value, lists comma separated
  std::optional<double> truncation;
  bool timing = false;           // adds wall times, which breaks byte identity
};

// Exit codes: 0 all tasks verified, agreeing or matching their expectation; 2 an unexpected
// refutation, inconclusive verdict or disagreement; 1 an error.
struct RunResult {
  int exit_code = 0;
  io::json report;
};

// op_filter empty or "run" runs every task; otherwise only tasks whose op matches.
RunResult run_text(const std::string& text, const std::string& op_filter, const Options& opt);
RunResult run_file(const std::string& path, const std::string& op_filter, const Options& opt);
// Every *.json under dir in name order.
RunResult run_gallery(const std::string& dir, const Options& opt);

std::string render(const io::json& report);

int main(int argc, char** argv);

}  // namespace tdiff::cli
