#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>

#include "qosmc/solver.hpp"

namespace qosmc::cli {

enum class Format { text, json };

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNegative = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitSolver = 3;

struct CheckArgs {
  std::string system_file;
  std::string formula_file;  // empty when `formula_text` is used
  std::optional<std::string> formula_text;
  std::size_t k = 0;
  bool valid_mode = true;  // false: sat
  bool require_empty_buffers = false;
  bool per_prefix_aggregates = false;
  unsigned threads = 1;
  SolverConfig solver;
  Format format = Format::text;
};

struct RunsArgs {
  std::string system_file;
  std::size_t k = 0;
  bool require_empty_buffers = false;
  Format format = Format::text;
};

struct MemberArgs {
  std::string gchor_file;
  std::string trace;
  bool maximal = false;
  Format format = Format::text;
};

struct AggregateArgs {
  std::string system_file;
  std::string trace;
  Format format = Format::text;
};

// Each command writes its report to `out`, diagnostics to `err`, and
// returns the process exit code.
int cmd_check(const CheckArgs& args, std::ostream& out, std::ostream& err);
int cmd_runs(const RunsArgs& args, std::ostream& out, std::ostream& err);
int cmd_member(const MemberArgs& args, std::ostream& out, std::ostream& err);
int cmd_aggregate(const AggregateArgs& args, std::ostream& out, std::ostream& err);

}  // namespace qosmc::cli
