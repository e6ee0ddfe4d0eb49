#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "qosmc/choreography.hpp"
#include "qosmc/machines.hpp"
#include "qosmc/qos_spec.hpp"
#include "qosmc/solver.hpp"

namespace qosmc {

// QL formula: true, RCF atoms, negation, disjunction and choreography-indexed
// until. Conjunction, implication, diamond and box are derived.
class QlFormula {
 public:
  enum class Kind { top, atom, neg, disj, until };

  static QlFormula top();
  static QlFormula atom(Formula psi);
  static QlFormula neg(QlFormula operand);
  static QlFormula disj(QlFormula lhs, QlFormula rhs);
  static QlFormula until(QlFormula lhs, GChor g, QlFormula rhs);

  Kind kind() const;
  const Formula& psi() const;
  const QlFormula& operand() const { return lhs(); }
  const QlFormula& lhs() const;
  const QlFormula& rhs() const;
  const GChor& chor() const;

  // Identity of the shared node; stable for the lifetime of the formula.
  const void* id() const { return node_.get(); }

  friend bool operator==(const QlFormula& a, const QlFormula& b);

 private:
  struct Node;
  explicit QlFormula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

// <G>F = true U^G F
QlFormula diamond(GChor g, QlFormula phi);
// [G]F = !<G>!F
QlFormula box(GChor g, QlFormula phi);
QlFormula conjunction(QlFormula a, QlFormula b);
QlFormula implication(QlFormula a, QlFormula b);

std::string to_string(const QlFormula& phi);
std::ostream& operator<<(std::ostream& os, const QlFormula& phi);

std::size_t depth(const QlFormula& phi);

// Concrete syntax (loosest first): ->, ||, &&, U{G}, then prefix !, <G>, [G].
// Atoms are a comparison (chains allowed), a quantified RCF formula, or any
// RCF formula in braces. A file may open with "let name = G;" bindings.
QlFormula parse_ql(std::string_view text, const AttributeRegistry& registry,
                   const GChorBindings& bindings = {});

// Throws ValidationError if an atom uses an attribute unknown to the system
// or a choreography mentions a participant or message the system lacks.
void validate_formula(const QlFormula& phi, const QosSystem& s);

// <pi, prefix> |= phi, where prefix is a prefix of pi.
bool q_models(const QlFormula& phi, const QosSystem& s, const Run& pi, const Run& prefix,
              Entailer& entailer);

// phi1 U^g phi2 from `prefix`. `extended` is prefix followed by the
// extension under consideration; it must be a prefix of pi.
bool q_until(const QlFormula& phi1, const GChor& g, const QlFormula& phi2, const QosSystem& s,
             const Run& pi, const Run& prefix, const Run& extended, Entailer& entailer);

// Evaluation state for one run: aggregate contexts and language membership
// are memoised by prefix length.
class RunEvaluator {
 public:
  RunEvaluator(const QosSystem& s, const Run& pi, Entailer& entailer);

  bool models(const QlFormula& phi, std::size_t prefix);
  bool until(const QlFormula& phi1, const GChor& g, const QlFormula& phi2, std::size_t prefix,
             std::size_t ext);

 private:
  struct State;
  std::shared_ptr<State> state_;
};

enum class VerdictKind { sat, unsat_up_to_bound, valid_up_to_bound, counterexample };

std::string to_string(VerdictKind v);

struct Verdict {
  VerdictKind result = VerdictKind::unsat_up_to_bound;
  std::optional<Run> witness;
  std::size_t bound = 0;
};

struct CheckOptions {
  bool require_empty_buffers = false;
  // Candidate runs of one length are checked by this many workers; the
  // witness is still the first in canonical order.
  unsigned threads = 1;
};

// First run of length <= k (BFS, label order) ending in a
// final configuration and satisfying phi.
Verdict q_sat(const QlFormula& phi, const QosSystem& s, std::size_t k, Entailer& entailer,
              const CheckOptions& options = {});

// q_sat of the negation; a witness is reported as counterexample.
Verdict check_valid(const QlFormula& phi, const QosSystem& s, std::size_t k, Entailer& entailer,
                    const CheckOptions& options = {});

}  // namespace qosmc
