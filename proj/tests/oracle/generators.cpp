#include "generators.hpp"

#include <set>
#include <string>

namespace qosmc::gen {

namespace {

std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }
bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }
int small(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

Term num(int v) { return Term::constant(Rational(v)); }

Formula bound_constraint(Rng& rng, const Attribute& a) {
  Term t = Term::attribute(a);
  int lo = small(rng, 0, 4);
  switch (pick(rng, 4)) {
    case 0: return Formula::conj(Formula::compare(CompareOp::le, num(lo), t),
                                 Formula::compare(CompareOp::le, t, num(lo + small(rng, 0, 4))));
    case 1: return Formula::compare(CompareOp::le, t, num(lo + 2));
    case 2: return Formula::compare(CompareOp::eq, t, num(lo));
    default: return Formula::compare(CompareOp::ge, t, num(lo));
  }
}

}  // namespace

QosSystem random_system(Rng& rng, std::size_t max_participants, std::size_t max_states) {
  static const std::vector<std::string> names{"A", "B", "C"};
  static const std::vector<std::string> msgs{"m", "n"};

  std::size_t np = 2 + pick(rng, std::max<std::size_t>(1, max_participants - 1));
  std::vector<std::pair<Attribute, AggregatorKind>> attrs{{Attribute("c"), AggregatorKind::sum},
                                                          {Attribute("m"), AggregatorKind::max}};
  if (coin(rng, 0.3)) attrs.emplace_back(Attribute("w"), AggregatorKind::min);
  AttributeRegistry registry(attrs);

  std::map<ParticipantId, QosCfsm> machines;
  for (std::size_t i = 0; i < np; ++i) {
    ParticipantId p(names[i]);
    std::size_t ns = 1 + pick(rng, max_states);
    std::set<StateId> states;
    for (std::size_t q = 0; q < ns; ++q) states.insert(StateId("q" + std::to_string(q)));

    std::vector<Transition> transitions;
    std::set<std::pair<StateId, Label>> seen;
    for (std::size_t q = 0; q < ns; ++q) {
      StateId from("q" + std::to_string(q));
      std::size_t nt = pick(rng, 3);
      if (q == 0 && nt == 0) nt = 1;
      for (std::size_t t = 0; t < nt; ++t) {
        std::size_t other = pick(rng, np - 1);
        if (other >= i) ++other;
        ParticipantId peer(names[other]);
        MessageType msg(msgs[pick(rng, msgs.size())]);
        Label l = coin(rng) ? Label::output(p, peer, msg) : Label::input(peer, p, msg);
        if (!seen.insert({from, l}).second) continue;
        transitions.push_back({from, l, StateId("q" + std::to_string(pick(rng, ns)))});
      }
    }

    std::set<StateId> finals;
    for (const auto& q : states) {
      if (coin(rng, 0.4)) finals.insert(q);
    }

    std::map<StateId, QosSpecification> qos;
    for (const auto& q : states) {
      QosSpecification spec;
      for (const auto& [a, kind] : attrs) {
        if (coin(rng, 0.75)) spec.formulas.push_back(bound_constraint(rng, a));
      }
      qos.emplace(q, spec);
    }

    machines.emplace(p, QosCfsm(Cfsm(p, states, StateId("q0"), transitions), finals, qos));
  }
  return QosSystem(machines, registry);
}

GChor random_gchor(Rng& rng, const std::vector<ParticipantId>& participants,
                   const std::vector<MessageType>& messages, std::size_t max_interactions) {
  std::function<GChor(std::size_t)> go = [&](std::size_t n) -> GChor {
    if (n == 0) return GChor::empty();
    if (n == 1 && coin(rng, 0.85)) {
      std::size_t a = pick(rng, participants.size());
      std::size_t b = pick(rng, participants.size() - 1);
      if (b >= a) ++b;
      return GChor::interaction(participants[a], participants[b], messages[pick(rng, messages.size())]);
    }
    std::size_t left = n == 1 ? pick(rng, 2) : 1 + pick(rng, n - 1);
    GChor l = go(left);
    GChor r = go(n - left);
    switch (pick(rng, 4)) {
      case 0:
      case 1: return GChor::seq(l, r);
      case 2: return GChor::par(l, r);
      default: return GChor::choice(l, r);
    }
  };
  return go(pick(rng, max_interactions + 1));
}

QlFormula random_formula(Rng& rng, const QosSystem& s, std::size_t depth, std::size_t max_interactions) {
  std::vector<ParticipantId> parts;
  for (const auto& p : s.participant_ids()) parts.push_back(p);
  std::set<MessageType> used;
  for (const auto& [p, m] : s.machines()) {
    for (const auto& t : m.machine().transitions()) used.insert(t.label.message);
  }
  std::vector<MessageType> messages(used.begin(), used.end());
  if (messages.empty()) messages.push_back(MessageType("m"));
  std::vector<Attribute> attrs;
  for (const auto& [a, k] : s.registry().entries()) attrs.push_back(a);

  std::function<QlFormula(std::size_t)> go = [&](std::size_t d) -> QlFormula {
    if (d == 0 || coin(rng, 0.25)) {
      if (coin(rng, 0.15)) return QlFormula::top();
      static const CompareOp ops[] = {CompareOp::le, CompareOp::ge, CompareOp::lt, CompareOp::gt};
      return QlFormula::atom(Formula::compare(ops[pick(rng, 4)], Term::attribute(attrs[pick(rng, attrs.size())]),
                                              num(small(rng, 0, 12))));
    }
    switch (pick(rng, 5)) {
      case 0: return QlFormula::neg(go(d - 1));
      case 1: return QlFormula::disj(go(d - 1), go(d - 1));
      default:
        return QlFormula::until(go(d - 1), random_gchor(rng, parts, messages, max_interactions), go(d - 1));
    }
  };
  return go(depth);
}

Formula random_rcf(Rng& rng, const AttributeRegistry& registry, std::size_t depth) {
  std::vector<Attribute> attrs;
  for (const auto& [a, k] : registry.entries()) attrs.push_back(a);
  std::vector<std::string> bound;
  int fresh = 0;

  std::function<Term(std::size_t)> term = [&](std::size_t d) -> Term {
    if (d == 0 || coin(rng, 0.3)) {
      if (!bound.empty() && coin(rng, 0.3)) return Term::variable(bound[pick(rng, bound.size())]);
      if (coin(rng, 0.5)) return Term::attribute(attrs[pick(rng, attrs.size())]);
      Rational v(small(rng, 0, 400), coin(rng) ? 1 : 100);
      v.canonicalize();
      return Term::constant(v);
    }
    switch (pick(rng, 4)) {
      case 0: return Term::add(term(d - 1), term(d - 1));
      case 1: return Term::sub(term(d - 1), term(d - 1));
      case 2: return Term::mul(term(d - 1), term(d - 1));
      default: return Term::neg(term(d - 1));
    }
  };

  std::function<Formula(std::size_t)> go = [&](std::size_t d) -> Formula {
    if (d == 0 || coin(rng, 0.2)) {
      static const CompareOp ops[] = {CompareOp::lt, CompareOp::le, CompareOp::eq, CompareOp::ge, CompareOp::gt};
      return Formula::compare(ops[pick(rng, 5)], term(2), term(2));
    }
    switch (pick(rng, 6)) {
      case 0: return Formula::conj(go(d - 1), go(d - 1));
      case 1: return Formula::disj(go(d - 1), go(d - 1));
      case 2: return Formula::neg(go(d - 1));
      case 3: return Formula::implies(go(d - 1), go(d - 1));
      default: {
        std::string v = "x" + std::to_string(fresh++);
        bound.push_back(v);
        Formula body = go(d - 1);
        bound.pop_back();
        return coin(rng) ? Formula::exists(v, body) : Formula::forall(v, body);
      }
    }
  };
  return go(depth);
}

Word random_word(Rng& rng, const std::vector<Label>& alphabet, const std::vector<Word>& seeds,
                 std::size_t max_length) {
  Word w;
  if (!seeds.empty() && coin(rng, 0.6)) {
    const Word& seed = seeds[pick(rng, seeds.size())];
    w.assign(seed.begin(), seed.begin() + static_cast<std::ptrdiff_t>(pick(rng, seed.size() + 1)));
    if (w.size() >= 2 && coin(rng, 0.3)) std::swap(w[pick(rng, w.size())], w[pick(rng, w.size())]);
    if (!alphabet.empty() && coin(rng, 0.2)) w.push_back(alphabet[pick(rng, alphabet.size())]);
  } else if (!alphabet.empty()) {
    std::size_t n = pick(rng, max_length + 1);
    for (std::size_t i = 0; i < n; ++i) w.push_back(alphabet[pick(rng, alphabet.size())]);
  }
  if (w.size() > max_length) w.resize(max_length);
  return w;
}

}  // namespace qosmc::gen
