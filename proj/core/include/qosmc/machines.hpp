#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qosmc/choreography.hpp"
#include "qosmc/ids.hpp"
#include "qosmc/qos_spec.hpp"

namespace qosmc {

struct Transition {
  StateId from;
  Label label;
  StateId to;

  friend auto operator<=>(const Transition&, const Transition&) = default;
  friend bool operator==(const Transition&, const Transition&) = default;
};

// Communicating finite-state machine owned by one participant. Construction
// enforces: initial and endpoints are states, every label has the owner as
// subject, and at most one transition per (source, label).
class Cfsm {
 public:
  Cfsm(ParticipantId owner, std::set<StateId> states, StateId initial,
       std::vector<Transition> transitions);

  const ParticipantId& owner() const { return owner_; }
  const std::set<StateId>& states() const { return states_; }
  const StateId& initial() const { return initial_; }
  const std::vector<Transition>& transitions() const { return transitions_; }

  std::optional<StateId> successor(const StateId& from, const Label& label) const;
  // Outgoing transitions in label order.
  std::vector<Transition> outgoing(const StateId& from) const;

 private:
  ParticipantId owner_;
  std::set<StateId> states_;
  StateId initial_;
  std::vector<Transition> transitions_;
  std::map<std::pair<StateId, Label>, StateId> index_;
};

class QosCfsm {
 public:
  // States missing from `qos` get the empty specification.
  QosCfsm(Cfsm machine, std::set<StateId> finals, std::map<StateId, QosSpecification> qos);

  const Cfsm& machine() const { return machine_; }
  const std::set<StateId>& finals() const { return finals_; }
  const QosSpecification& qos(const StateId& state) const;
  bool is_final(const StateId& state) const { return finals_.count(state) != 0; }

 private:
  Cfsm machine_;
  std::set<StateId> finals_;
  std::map<StateId, QosSpecification> qos_;
};

class QosSystem {
 public:
  // Requires at least two participants, map keys equal to machine owners
  // and every qos formula over `registry`.
  QosSystem(std::map<ParticipantId, QosCfsm> machines, AttributeRegistry registry);

  const std::map<ParticipantId, QosCfsm>& machines() const { return machines_; }
  const QosCfsm& machine(const ParticipantId& p) const;
  const AttributeRegistry& registry() const { return registry_; }
  std::set<ParticipantId> participant_ids() const;

 private:
  std::map<ParticipantId, QosCfsm> machines_;
  AttributeRegistry registry_;
};

struct Channel {
  ParticipantId from;
  ParticipantId to;

  friend auto operator<=>(const Channel&, const Channel&) = default;
  friend bool operator==(const Channel&, const Channel&) = default;
};

// Global state: control state per participant and FIFO contents per channel.
// Empty buffers are not stored, so equal configurations compare equal.
struct Configuration {
  std::map<ParticipantId, StateId> control;
  std::map<Channel, std::deque<MessageType>> buffers;

  const StateId& state_of(const ParticipantId& p) const { return control.at(p); }
  std::deque<MessageType> buffer(const Channel& c) const;
  bool buffers_empty() const { return buffers.empty(); }

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

struct RunStep {
  Label label;
  Configuration target;

  friend bool operator==(const RunStep&, const RunStep&) = default;
};

// Finite run. Every step is checked against the transition relation when a
// run is built through `replay` or `extended`.
class Run {
 public:
  explicit Run(Configuration start) : start_(std::move(start)) {}

  static Run empty(const QosSystem& s);
  // Throws ValidationError if some label is not enabled when fired.
  static Run replay(const QosSystem& s, const Word& labels);

  // Throws ValidationError if `label` is not enabled at the last configuration.
  Run extended(const QosSystem& s, const Label& label) const;

  const Configuration& start() const { return start_; }
  const std::vector<RunStep>& steps() const { return steps_; }
  std::size_t length() const { return steps_.size(); }
  bool empty() const { return steps_.empty(); }

  // configuration(0) is the start; configuration(length()) the last one.
  const Configuration& configuration(std::size_t i) const;
  const Configuration& last() const { return configuration(length()); }
  const Label& label(std::size_t i) const { return steps_.at(i).label; }

  Run prefix(std::size_t n) const;
  bool has_prefix(const Run& other) const;

  friend bool operator==(const Run&, const Run&) = default;

 private:
  Configuration start_;
  std::vector<RunStep> steps_;
};

Configuration initial_configuration(const QosSystem& s);

// Fires `label` from `c` under asynchronous FIFO semantics.
std::optional<Configuration> step(const QosSystem& s, const Configuration& c, const Label& label);

// Labels with a defined successor, in canonical label order.
std::vector<Label> enabled(const QosSystem& s, const Configuration& c);

// Every participant's control state is final; buffers are checked only when
// `require_empty_buffers` is set.
bool is_final(const QosSystem& s, const Configuration& c, bool require_empty_buffers = false);

// Visits every run of length <= k from the initial configuration,
// breadth-first, each length in lexicographic label order. Returning false
// from the visitor stops the enumeration.
void enumerate_runs(const QosSystem& s, std::size_t k, const std::function<bool(const Run&)>& visit);
std::vector<Run> enumerate_runs(const QosSystem& s, std::size_t k);

Word trace(const Run& r);

std::string to_string(const Configuration& c);

struct SystemDiagnostics {
  std::vector<std::string> warnings;
};

// Machine file format; see README for the grammar.
QosSystem parse_system(std::string_view text, SystemDiagnostics* diagnostics = nullptr);

}  // namespace qosmc
