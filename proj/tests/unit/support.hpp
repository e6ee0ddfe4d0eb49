#pragma once

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>
#include <string>

#include "qosmc/solver.hpp"

namespace qosmc::test {

inline std::string model_path(const std::string& name) { return std::string(QOSMC_MODELS_DIR) + "/" + name; }

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool have_solver() { return std::string(QOSMC_TEST_SOLVER).size() > 0; }

inline SolverConfig solver_config() {
  SolverConfig c;
  c.path = QOSMC_TEST_SOLVER;
  return c;
}

}  // namespace qosmc::test

#define REQUIRE_SOLVER() \
  if (!::qosmc::test::have_solver()) GTEST_SKIP() << "no SMT solver configured"
