#include "qosmc/machines.hpp"

#include <algorithm>
#include <sstream>

#include "lexer.hpp"
#include "qosmc/error.hpp"
#include "rcf_parser.hpp"

namespace qosmc {

// ---------------------------------------------------------------------------
// Machines

Cfsm::Cfsm(ParticipantId owner, std::set<StateId> states, StateId initial,
           std::vector<Transition> transitions)
    : owner_(std::move(owner)),
      states_(std::move(states)),
      initial_(std::move(initial)),
      transitions_(std::move(transitions)) {
  if (!states_.count(initial_)) {
    throw ValidationError("machine " + owner_.str() + ": initial state '" + initial_.str() +
                          "' is not a state");
  }
  for (const auto& t : transitions_) {
    if (!states_.count(t.from) || !states_.count(t.to)) {
      throw ValidationError("machine " + owner_.str() + ": transition " + t.from.str() + " " +
                            to_string(t.label) + " " + t.to.str() + " uses an unknown state");
    }
    if (subject(t.label) != owner_) {
      throw ValidationError("machine " + owner_.str() + ": label " + to_string(t.label) +
                            " has subject " + subject(t.label).str() + ", violating locality");
    }
    if (t.label.sender == t.label.receiver) {
      throw ValidationError("machine " + owner_.str() + ": self-communication " +
                            to_string(t.label));
    }
    if (!index_.emplace(std::make_pair(t.from, t.label), t.to).second) {
      throw ValidationError("machine " + owner_.str() + ": state " + t.from.str() +
                            " has two transitions labelled " + to_string(t.label));
    }
  }
}

std::optional<StateId> Cfsm::successor(const StateId& from, const Label& label) const {
  auto it = index_.find({from, label});
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<Transition> Cfsm::outgoing(const StateId& from) const {
  std::vector<Transition> out;
  for (auto it = index_.lower_bound({from, Label{}}); it != index_.end() && it->first.first == from;
       ++it) {
    out.push_back({from, it->first.second, it->second});
  }
  return out;
}

QosCfsm::QosCfsm(Cfsm machine, std::set<StateId> finals, std::map<StateId, QosSpecification> qos)
    : machine_(std::move(machine)), finals_(std::move(finals)), qos_(std::move(qos)) {
  for (const auto& f : finals_) {
    if (!machine_.states().count(f)) {
      throw ValidationError("machine " + machine_.owner().str() + ": final state '" + f.str() +
                            "' is not a state");
    }
  }
  for (const auto& [state, spec] : qos_) {
    if (!machine_.states().count(state)) {
      throw ValidationError("machine " + machine_.owner().str() + ": qos for unknown state '" +
                            state.str() + "'");
    }
  }
  for (const auto& state : machine_.states()) qos_.try_emplace(state);
}

const QosSpecification& QosCfsm::qos(const StateId& state) const { return qos_.at(state); }

QosSystem::QosSystem(std::map<ParticipantId, QosCfsm> machines, AttributeRegistry registry)
    : machines_(std::move(machines)), registry_(std::move(registry)) {
  if (machines_.size() < 2) throw ValidationError("a system needs at least two participants");
  if (registry_.empty()) throw ValidationError("a system needs a non-empty attribute registry");
  for (const auto& [p, m] : machines_) {
    if (m.machine().owner() != p) {
      throw ValidationError("machine registered as " + p.str() + " is owned by " +
                            m.machine().owner().str());
    }
    if (!is_mangle_safe(p.str())) throw ValidationError("invalid participant name '" + p.str() + "'");
    for (const auto& state : m.machine().states()) {
      if (!is_mangle_safe(state.str())) {
        throw ValidationError("invalid state name '" + state.str() + "' in machine " + p.str());
      }
      for (const auto& f : m.qos(state).formulas) {
        for (const auto& a : free_attributes(f)) {
          if (!registry_.contains(a)) throw ValidationError("unknown attribute '" + a.str() + "'");
        }
        if (!instantiated_symbols(f).empty()) {
          throw ValidationError("qos formulas must not contain instantiated symbols");
        }
      }
    }
    for (const auto& t : m.machine().transitions()) {
      const ParticipantId& peer = t.label.is_output() ? t.label.receiver : t.label.sender;
      if (!machines_.count(peer)) {
        throw ValidationError("machine " + p.str() + " communicates with unknown participant " +
                              peer.str());
      }
    }
  }
}

const QosCfsm& QosSystem::machine(const ParticipantId& p) const {
  auto it = machines_.find(p);
  if (it == machines_.end()) throw ValidationError("unknown participant '" + p.str() + "'");
  return it->second;
}

std::set<ParticipantId> QosSystem::participant_ids() const {
  std::set<ParticipantId> out;
  for (const auto& [p, m] : machines_) out.insert(p);
  return out;
}

// ---------------------------------------------------------------------------
// Semantics

std::deque<MessageType> Configuration::buffer(const Channel& c) const {
  auto it = buffers.find(c);
  return it == buffers.end() ? std::deque<MessageType>{} : it->second;
}

Configuration initial_configuration(const QosSystem& s) {
  Configuration c;
  for (const auto& [p, m] : s.machines()) c.control.emplace(p, m.machine().initial());
  return c;
}

std::optional<Configuration> step(const QosSystem& s, const Configuration& c, const Label& label) {
  const ParticipantId& actor = subject(label);
  auto machine_it = s.machines().find(actor);
  if (machine_it == s.machines().end()) return std::nullopt;
  auto next = machine_it->second.machine().successor(c.state_of(actor), label);
  if (!next) return std::nullopt;

  const Channel channel{label.sender, label.receiver};
  Configuration out = c;
  if (label.is_output()) {
    out.buffers[channel].push_back(label.message);
  } else {
    auto it = out.buffers.find(channel);
    if (it == out.buffers.end() || it->second.front() != label.message) return std::nullopt;
    it->second.pop_front();
    if (it->second.empty()) out.buffers.erase(it);
  }
  out.control[actor] = *next;
  return out;
}

std::vector<Label> enabled(const QosSystem& s, const Configuration& c) {
  std::vector<Label> out;
  for (const auto& [p, m] : s.machines()) {
    for (const auto& t : m.machine().outgoing(c.state_of(p))) {
      if (step(s, c, t.label)) out.push_back(t.label);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_final(const QosSystem& s, const Configuration& c, bool require_empty_buffers) {
  for (const auto& [p, m] : s.machines()) {
    if (!m.is_final(c.state_of(p))) return false;
  }
  return !require_empty_buffers || c.buffers_empty();
}

Run Run::empty(const QosSystem& s) { return Run(initial_configuration(s)); }

Run Run::replay(const QosSystem& s, const Word& labels) {
  Run r = empty(s);
  for (const auto& l : labels) r = r.extended(s, l);
  return r;
}

Run Run::extended(const QosSystem& s, const Label& label) const {
  auto next = step(s, last(), label);
  if (!next) {
    throw ValidationError("label " + to_string(label) + " is not enabled after " +
                          std::to_string(length()) + " step(s)");
  }
  Run out = *this;
  out.steps_.push_back({label, std::move(*next)});
  return out;
}

const Configuration& Run::configuration(std::size_t i) const {
  if (i == 0) return start_;
  return steps_.at(i - 1).target;
}

Run Run::prefix(std::size_t n) const {
  Run out(start_);
  out.steps_.assign(steps_.begin(), steps_.begin() + static_cast<std::ptrdiff_t>(std::min(n, length())));
  return out;
}

bool Run::has_prefix(const Run& other) const {
  return other.length() <= length() && other.start_ == start_ &&
         std::equal(other.steps_.begin(), other.steps_.end(), steps_.begin());
}

void enumerate_runs(const QosSystem& s, std::size_t k, const std::function<bool(const Run&)>& visit) {
  std::vector<Run> frontier = {Run::empty(s)};
  for (std::size_t depth = 0;; ++depth) {
    for (const auto& r : frontier) {
      if (!visit(r)) return;
    }
    if (depth == k) return;
    std::vector<Run> next;
    for (const auto& r : frontier) {
      for (const auto& l : enabled(s, r.last())) next.push_back(r.extended(s, l));
    }
    if (next.empty()) return;
    frontier = std::move(next);
  }
}

std::vector<Run> enumerate_runs(const QosSystem& s, std::size_t k) {
  std::vector<Run> out;
  enumerate_runs(s, k, [&](const Run& r) {
    out.push_back(r);
    return true;
  });
  return out;
}

Word trace(const Run& r) {
  Word w;
  w.reserve(r.length());
  for (const auto& st : r.steps()) w.push_back(st.label);
  return w;
}

std::string to_string(const Configuration& c) {
  std::ostringstream os;
  os << '<';
  bool first = true;
  for (const auto& [p, q] : c.control) {
    os << (first ? "" : ", ") << p << "=" << q;
    first = false;
  }
  os << " ;";
  for (const auto& [ch, msgs] : c.buffers) {
    os << ' ' << ch.from << ch.to << "=[";
    for (std::size_t i = 0; i < msgs.size(); ++i) os << (i ? "," : "") << msgs[i];
    os << ']';
  }
  os << '>';
  return os.str();
}

// ---------------------------------------------------------------------------
// Machine file parser

namespace {

using detail::TokenKind;
using detail::TokenStream;

struct RawTransition {
  std::string from;
  std::string channel;
  bool output;
  std::string message;
  std::string to;
  SourcePosition pos;
};

struct RawQos {
  std::string state;
  QosSpecification spec;
  SourcePosition pos;
};

struct RawMachine {
  std::string name;
  SourcePosition pos;
  std::optional<std::string> initial;
  std::vector<std::string> declared_states;
  bool has_state_decl = false;
  std::vector<std::string> finals;
  std::vector<RawTransition> transitions;
  std::vector<RawQos> qos;
};

const std::set<std::string> kMachineKeywords = {"initial", "finals", "states", "qos"};

std::string state_name(TokenStream& tokens) {
  const auto& tok = tokens.peek();
  std::string name = tokens.expect_identifier("state name");
  if (!is_mangle_safe(name)) tokens.fail_at("invalid state name '" + name + "'", tok.pos);
  return name;
}

std::vector<std::string> state_list(TokenStream& tokens) {
  std::vector<std::string> out;
  if (tokens.is_punct(";")) return out;
  out.push_back(state_name(tokens));
  while (tokens.accept(",")) out.push_back(state_name(tokens));
  return out;
}

// Only the `{ ... }` delimiting is done here; the formulas are parsed by the
// RCF parser on the same token stream.
RawQos parse_qos_block(TokenStream& tokens, const AttributeRegistry& registry) {
  RawQos q;
  q.pos = tokens.peek().pos;
  tokens.next();  // qos
  q.state = state_name(tokens);
  tokens.expect("{");
  detail::RcfParser parser(tokens, registry);
  while (!tokens.is_punct("}")) {
    q.spec.formulas.push_back(parser.formula());
    if (!tokens.accept(";")) break;
  }
  tokens.expect("}");
  tokens.accept(";");
  return q;
}

RawMachine parse_machine(TokenStream& tokens, const AttributeRegistry& registry) {
  RawMachine m;
  m.pos = tokens.peek().pos;
  tokens.next();  // machine
  const auto& name_tok = tokens.peek();
  m.name = tokens.expect_identifier("participant name");
  if (!is_mangle_safe(m.name) || detail::RcfParser::is_reserved(m.name)) {
    tokens.fail_at("invalid participant name '" + m.name + "'", name_tok.pos);
  }
  tokens.expect("{");
  while (!tokens.accept("}")) {
    const auto& tok = tokens.peek();
    if (tokens.is_word("initial")) {
      tokens.next();
      if (m.initial) tokens.fail_at("duplicate initial declaration", tok.pos);
      m.initial = state_name(tokens);
      tokens.expect(";");
    } else if (tokens.is_word("finals")) {
      tokens.next();
      auto list = state_list(tokens);
      m.finals.insert(m.finals.end(), list.begin(), list.end());
      tokens.expect(";");
    } else if (tokens.is_word("states")) {
      tokens.next();
      m.has_state_decl = true;
      auto list = state_list(tokens);
      for (const auto& s : list) {
        if (std::find(m.declared_states.begin(), m.declared_states.end(), s) !=
            m.declared_states.end()) {
          tokens.fail_at("duplicate state '" + s + "'", tok.pos);
        }
        m.declared_states.push_back(s);
      }
      tokens.expect(";");
    } else if (tokens.is_word("qos")) {
      m.qos.push_back(parse_qos_block(tokens, registry));
    } else if (tok.kind == TokenKind::identifier) {
      RawTransition t;
      t.pos = tok.pos;
      t.from = state_name(tokens);
      t.channel = tokens.expect_identifier("channel (e.g. AB)");
      if (tokens.accept("!")) {
        t.output = true;
      } else if (tokens.accept("?")) {
        t.output = false;
      } else {
        tokens.fail("expected '!' or '?'");
      }
      t.message = tokens.expect_identifier("message type");
      t.to = state_name(tokens);
      tokens.expect(";");
      m.transitions.push_back(std::move(t));
    } else {
      tokens.fail("expected machine item (initial, finals, states, qos or a transition)");
    }
  }
  if (!m.initial) throw ParseError("machine " + m.name + " has no initial state", m.pos);
  return m;
}

AttributeRegistry parse_registry(TokenStream& tokens) {
  tokens.next();  // attributes
  tokens.expect("{");
  std::vector<std::pair<Attribute, AggregatorKind>> entries;
  std::set<std::string> seen;
  while (!tokens.accept("}")) {
    const auto& tok = tokens.peek();
    std::string name = tokens.expect_identifier("attribute name");
    if (!is_mangle_safe(name) || detail::RcfParser::is_reserved(name)) {
      tokens.fail_at("invalid attribute name '" + name + "'", tok.pos);
    }
    if (!seen.insert(name).second) tokens.fail_at("duplicate attribute '" + name + "'", tok.pos);
    tokens.expect(":");
    const auto& agg_tok = tokens.peek();
    std::string agg = tokens.expect_identifier("aggregator");
    try {
      entries.emplace_back(Attribute(name), parse_aggregator(agg));
    } catch (const ValidationError& e) {
      tokens.fail_at(e.what(), agg_tok.pos);
    }
    if (!tokens.accept(";") && !tokens.is_punct("}")) tokens.fail("expected ';'");
  }
  tokens.accept(";");
  if (entries.empty()) throw ParseError("attribute registry must not be empty", tokens.peek().pos);
  return AttributeRegistry(entries);
}

}  // namespace

QosSystem parse_system(std::string_view text, SystemDiagnostics* diagnostics) {
  TokenStream tokens(text);
  if (!tokens.is_word("system")) tokens.fail("expected 'system' header");
  tokens.next();
  if (tokens.peek().kind == TokenKind::identifier && !tokens.is_word("attributes") &&
      !tokens.is_word("machine")) {
    tokens.next();  // optional system name
  }
  tokens.accept(";");
  if (!tokens.is_word("attributes")) tokens.fail("expected 'attributes' block");
  AttributeRegistry registry = parse_registry(tokens);

  std::vector<RawMachine> raw;
  while (!tokens.at_end()) {
    if (!tokens.is_word("machine")) tokens.fail("expected 'machine'");
    raw.push_back(parse_machine(tokens, registry));
  }

  std::set<ParticipantId> names;
  for (const auto& m : raw) {
    if (!names.insert(ParticipantId(m.name)).second) {
      throw ParseError("duplicate machine '" + m.name + "'", m.pos);
    }
  }

  std::map<ParticipantId, QosCfsm> machines;
  for (const auto& m : raw) {
    std::set<StateId> states;
    for (const auto& s : m.declared_states) states.insert(StateId(s));
    auto use = [&](const std::string& s, const SourcePosition& pos) {
      if (m.has_state_decl && !states.count(StateId(s))) {
        throw ParseError("machine " + m.name + ": undeclared state '" + s + "'", pos);
      }
      states.insert(StateId(s));
    };
    use(*m.initial, m.pos);
    for (const auto& f : m.finals) use(f, m.pos);

    std::vector<Transition> transitions;
    for (const auto& t : m.transitions) {
      use(t.from, t.pos);
      use(t.to, t.pos);
      std::pair<ParticipantId, ParticipantId> ends;
      try {
        Label l = parse_label(t.channel + (t.output ? "!" : "?") + t.message, names);
        ends = {l.sender, l.receiver};
      } catch (const ParseError& e) {
        throw ParseError(e.bare_message(), t.pos);
      }
      MessageType msg(t.message);
      Label l = t.output ? Label::output(ends.first, ends.second, msg)
                         : Label::input(ends.first, ends.second, msg);
      transitions.push_back({StateId(t.from), l, StateId(t.to)});
    }

    std::map<StateId, QosSpecification> qos;
    for (const auto& q : m.qos) {
      use(q.state, q.pos);
      if (!qos.emplace(StateId(q.state), q.spec).second) {
        throw ParseError("machine " + m.name + ": duplicate qos block for state '" + q.state + "'",
                         q.pos);
      }
    }
    if (diagnostics) {
      for (const auto& s : states) {
        if (!qos.count(s)) {
          diagnostics->warnings.push_back("machine " + m.name + ": state " + s.str() +
                                          " has no qos block; using the empty specification");
        }
      }
    }

    std::set<StateId> finals;
    for (const auto& f : m.finals) finals.insert(StateId(f));
    Cfsm cfsm(ParticipantId(m.name), states, StateId(*m.initial), std::move(transitions));
    machines.emplace(ParticipantId(m.name), QosCfsm(std::move(cfsm), std::move(finals), std::move(qos)));
  }
  return QosSystem(std::move(machines), std::move(registry));
}

}  // namespace qosmc
