#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "qosmc/aggregation.hpp"
#include "qosmc/qos_spec.hpp"

namespace qosmc {

struct SolverConfig {
  std::string path = "z3";
  // Empty means "derive from the binary name" (z3: -in -smt2; cvc5: --lang=smt2).
  std::vector<std::string> args;
  std::chrono::milliseconds timeout{30000};

  // Honours QOSMC_SOLVER and QOSMC_SOLVER_TIMEOUT_MS.
  static SolverConfig from_environment();
  std::vector<std::string> effective_args() const;
};

enum class SatAnswer { sat, unsat };

// Long-lived solver child speaking SMT-LIB 2 over stdin/stdout. Queries are
// separated by (reset); the child is restarted after any failure. Not
// shareable between threads.
class SolverSession {
 public:
  explicit SolverSession(SolverConfig config) : config_(std::move(config)) {}
  ~SolverSession();
  SolverSession(const SolverSession&) = delete;
  SolverSession& operator=(const SolverSession&) = delete;

  // `script` must end with a single (check-sat). Throws SolverError
  // (launch, timeout, unknown, protocol).
  SatAnswer check(const std::string& script);

  const SolverConfig& config() const { return config_; }

 private:
  void start();
  void stop();

  SolverConfig config_;
  int pid_ = -1;
  int in_ = -1;
  int out_ = -1;
};

// Wire name of an instantiated symbol: <attr>__<participant>__<state>.
std::string smt_symbol(const InstantiatedSymbol& s);
std::string smt_symbol(const Attribute& a);

// Deterministic refutation script for ctx ⊢ psi: declarations, the local
// constraints, the aggregate equations (max/min by case split), and the
// negation of psi with plain attributes read as aggregate values.
std::string encode_query(const QosContext& ctx, const Formula& psi);

// True iff ctx ∧ ¬psi is unsatisfiable over the reals.
bool entails(const QosContext& ctx, const Formula& psi, SolverSession& session);

// Memoising entailment front end shared by the evaluators. Thread-safe; idle
// sessions are pooled so concurrent misses each get their own child.
class Entailer {
 public:
  struct Stats {
    std::size_t queries = 0;
    std::size_t solver_calls = 0;
    std::size_t cache_hits = 0;
  };

  explicit Entailer(SolverConfig config) : config_(std::move(config)) {}

  bool entails(const QosContext& ctx, const Formula& psi);

  Stats stats() const;
  const SolverConfig& config() const { return config_; }

 private:
  SolverConfig config_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, bool> cache_;
  std::vector<std::unique_ptr<SolverSession>> idle_;
  Stats stats_;
};

}  // namespace qosmc
