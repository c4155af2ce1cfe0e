#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

namespace gilbert::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,      // bad arguments or I/O
  kNumerical = 2,  // non-convergence, truncation, capped simulation
  kInternal = 3,
};

using Cell = std::variant<std::string, double, long long>;

/// Rectangular output; written as versioned CSV or the equivalent JSON.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

std::string to_csv(const Table& t);
std::string to_json(const Table& t);

std::string sha256_hex(const std::string& bytes);

/// "a:b:h" (inclusive range) or a comma list.
std::vector<double> parse_grid(const std::string& spec);

/// Runs one command line; output goes to files under --out or to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gilbert::cli
