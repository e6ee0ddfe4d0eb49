#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "qosmc/machines.hpp"
#include "qosmc/qos_spec.hpp"

namespace qosmc {

// a = op(operands...), kept symbolic so that max/min need no encoding here.
// Operands appear in fold order: one per step (the acting participant's
// state before the step), then one per participant (name order) for the
// last configuration.
struct AggregateEquation {
  Attribute attribute;
  AggregatorKind kind = AggregatorKind::sum;
  std::vector<InstantiatedSymbol> operands;

  friend bool operator==(const AggregateEquation&, const AggregateEquation&) = default;
};

// Aggregated theory of a run prefix: instantiated local constraints plus one
// equation per registry attribute.
struct QosContext {
  // Ordered by (participant, state, position in the state's specification);
  // each (participant, state) pair contributes once.
  std::vector<Formula> local;
  std::map<Attribute, AggregateEquation> aggregates;
  std::set<InstantiatedSymbol> symbols;

  friend bool operator==(const QosContext&, const QosContext&) = default;
};

// Throws ValidationError if `r` is not a run of `s`.
QosContext aggregate(const QosSystem& s, const Run& r);

std::string to_string(const AggregateEquation& e);
// Human-readable rendering: one local formula per line, then one equation
// per attribute.
std::string to_string(const QosContext& ctx);

// True if `r` starts at the initial configuration and every step is a
// transition of `s`.
bool is_run_of(const QosSystem& s, const Run& r);

}  // namespace qosmc
