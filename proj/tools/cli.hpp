#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace h2net::cli {

enum ExitCode {
  kOk = 0,
  kIoError = 1,
  kBadFlags = 2,
  kGenerationFailed = 3,
  kInfeasible = 4,
  kNumericalFailure = 5,
  kNoSolution = 6,
  kNotMMatrix = 7,
};

/// key = value lines, '#' starts a comment.
std::map<std::string, std::string> read_config(const std::string& path);

/// "1,4;3,4" -> {(0,3), (2,3)}. Throws InvalidArgument.
std::vector<std::pair<long, long>> parse_zero_targets(const std::string& text);

/// "start:stop:step", inclusive.
std::vector<long> parse_orders(const std::string& text);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace h2net::cli
