#include "oracle.hpp"

#include <algorithm>
#include <deque>
#include <optional>
#include <stdexcept>

namespace qosmc::oracle {

// ---------------------------------------------------------------------------
// Pomsets and linearisations

namespace {

const ParticipantId& sbj(const Label& l) { return l.is_output() ? l.sender : l.receiver; }

void close(OraclePomset& p) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto [a, b] : std::set(p.order)) {
      for (auto [c, d] : std::set(p.order)) {
        if (b == c && p.order.insert({a, d}).second) changed = true;
      }
    }
  }
}

OraclePomset disjoint(const OraclePomset& a, const OraclePomset& b) {
  OraclePomset out = a;
  std::size_t shift = a.labels.size();
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  for (auto [x, y] : b.order) out.order.insert({x + shift, y + shift});
  return out;
}

}  // namespace

std::vector<OraclePomset> oracle_pomsets(const GChor& g) {
  switch (g.kind()) {
    case GChor::Kind::empty: return {OraclePomset{}};
    case GChor::Kind::interaction: {
      OraclePomset p;
      p.labels = {Label::output(g.sender(), g.receiver(), g.message()),
                  Label::input(g.sender(), g.receiver(), g.message())};
      p.order = {{0, 1}};
      return {p};
    }
    case GChor::Kind::choice: {
      auto out = oracle_pomsets(g.lhs());
      auto rhs = oracle_pomsets(g.rhs());
      out.insert(out.end(), rhs.begin(), rhs.end());
      return out;
    }
    case GChor::Kind::par:
    case GChor::Kind::seq: {
      std::vector<OraclePomset> out;
      for (const auto& a : oracle_pomsets(g.lhs())) {
        for (const auto& b : oracle_pomsets(g.rhs())) {
          OraclePomset p = disjoint(a, b);
          if (g.kind() == GChor::Kind::seq) {
            for (std::size_t i = 0; i < a.labels.size(); ++i) {
              for (std::size_t j = 0; j < b.labels.size(); ++j) {
                if (sbj(a.labels[i]) == sbj(b.labels[j])) p.order.insert({i, a.labels.size() + j});
              }
            }
            close(p);
          }
          out.push_back(std::move(p));
        }
      }
      return out;
    }
    case GChor::Kind::loop: throw std::invalid_argument("oracle handles loop-free choreographies only");
  }
  return {};
}

std::set<Word> linearisations(const OraclePomset& p) {
  std::set<Word> out;
  const std::size_t n = p.labels.size();
  std::vector<bool> used(n, false);
  Word cur;
  std::function<void()> go = [&] {
    if (cur.size() == n) {
      out.insert(cur);
      return;
    }
    for (std::size_t e = 0; e < n; ++e) {
      if (used[e]) continue;
      bool ready = true;
      for (auto [a, b] : p.order) {
        if (b == e && !used[a]) ready = false;
      }
      if (!ready) continue;
      used[e] = true;
      cur.push_back(p.labels[e]);
      go();
      cur.pop_back();
      used[e] = false;
    }
  };
  go();
  return out;
}

bool prefix_linearisable(const OraclePomset& p, const Word& w) {
  const std::size_t n = p.labels.size();
  std::vector<bool> used(n, false);
  std::function<bool(std::size_t)> go = [&](std::size_t i) {
    if (i == w.size()) return true;
    for (std::size_t e = 0; e < n; ++e) {
      if (used[e] || !(p.labels[e] == w[i])) continue;
      bool ready = true;
      for (auto [a, b] : p.order) {
        if (b == e && !used[a]) ready = false;
      }
      if (!ready) continue;
      used[e] = true;
      if (go(i + 1)) return true;
      used[e] = false;
    }
    return false;
  };
  return go(0);
}

LanguageOracle::Entry& LanguageOracle::entry(const GChor& g) {
  std::string key = to_string(g);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  Entry e;
  for (const auto& p : oracle_pomsets(g)) {
    for (auto& w : linearisations(p)) e.complete.insert(w);
  }
  for (const auto& w : e.complete) {
    for (std::size_t i = 0; i <= w.size(); ++i) e.prefixes.insert(Word(w.begin(), w.begin() + i));
  }
  // Maximal: not a proper prefix of another word of the language.
  for (const auto& w : e.prefixes) {
    bool proper = false;
    for (const auto& v : e.prefixes) {
      if (v.size() > w.size() && std::equal(w.begin(), w.end(), v.begin())) {
        proper = true;
        break;
      }
    }
    if (!proper) e.maximal.insert(w);
  }
  return cache_.emplace(key, std::move(e)).first->second;
}

const std::set<Word>& LanguageOracle::complete_words(const GChor& g) { return entry(g).complete; }

bool LanguageOracle::in_prefix_language(const GChor& g, const Word& w) {
  return entry(g).prefixes.count(w) != 0;
}

bool LanguageOracle::in_maximal_language(const GChor& g, const Word& w) {
  return entry(g).maximal.count(w) != 0;
}

// ---------------------------------------------------------------------------
// Runs

namespace {

struct State {
  std::map<ParticipantId, StateId> control;
  std::map<std::pair<ParticipantId, ParticipantId>, std::deque<MessageType>> channels;
};

State initial(const QosSystem& s) {
  State st;
  for (const auto& [p, m] : s.machines()) st.control[p] = m.machine().initial();
  return st;
}

std::vector<std::pair<Label, State>> moves(const QosSystem& s, const State& st) {
  std::vector<std::pair<Label, State>> out;
  for (const auto& [p, m] : s.machines()) {
    for (const auto& t : m.machine().transitions()) {
      if (t.from != st.control.at(p)) continue;
      State next = st;
      next.control[p] = t.to;
      auto ch = std::make_pair(t.label.sender, t.label.receiver);
      if (t.label.is_output()) {
        next.channels[ch].push_back(t.label.message);
      } else {
        auto it = st.channels.find(ch);
        if (it == st.channels.end() || it->second.empty() || it->second.front() != t.label.message) continue;
        next.channels[ch].pop_front();
      }
      out.emplace_back(t.label, std::move(next));
    }
  }
  return out;
}

void collect(const QosSystem& s, const State& st, std::size_t left, Word& cur, std::vector<Word>& out) {
  if (left == 0) {
    out.push_back(cur);
    return;
  }
  for (auto& [l, next] : moves(s, st)) {
    cur.push_back(l);
    collect(s, next, left - 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::vector<Word> oracle_traces(const QosSystem& s, std::size_t n) {
  std::vector<Word> out;
  Word cur;
  collect(s, initial(s), n, cur, out);
  std::sort(out.begin(), out.end());
  return out;
}

bool oracle_final(const QosSystem& s, const Word& w) {
  State st = initial(s);
  for (const auto& l : w) {
    bool moved = false;
    for (auto& [label, next] : moves(s, st)) {
      if (label == l) {
        st = next;
        moved = true;
        break;
      }
    }
    if (!moved) throw std::invalid_argument("word is not a trace of the system");
  }
  for (const auto& [p, q] : st.control) {
    if (!s.machine(p).finals().count(q)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Satisfaction

bool oracle_models(const QlFormula& phi, const QosSystem& s, const Run& pi, std::size_t prefix,
                   const EntailFn& entails, LanguageOracle& lang) {
  switch (phi.kind()) {
    case QlFormula::Kind::top: return true;
    case QlFormula::Kind::atom: return entails(aggregate(s, pi.prefix(prefix)), phi.psi());
    case QlFormula::Kind::neg: return !oracle_models(phi.operand(), s, pi, prefix, entails, lang);
    case QlFormula::Kind::disj:
      return oracle_models(phi.lhs(), s, pi, prefix, entails, lang) ||
             oracle_models(phi.rhs(), s, pi, prefix, entails, lang);
    case QlFormula::Kind::until: {
      Word w = trace(pi);
      for (std::size_t end = prefix; end <= pi.length(); ++end) {
        Word ext(w.begin() + static_cast<std::ptrdiff_t>(prefix),
                 w.begin() + static_cast<std::ptrdiff_t>(end));
        if (!lang.in_maximal_language(phi.chor(), ext)) continue;
        if (!oracle_models(phi.rhs(), s, pi, end, entails, lang)) continue;
        bool before = true;
        for (std::size_t j = prefix; j < end && before; ++j) {
          before = oracle_models(phi.lhs(), s, pi, j, entails, lang);
        }
        if (before) return true;
      }
      return false;
    }
  }
  return false;
}

std::optional<Word> oracle_sat(const QlFormula& phi, const QosSystem& s, std::size_t k,
                               const EntailFn& entails, LanguageOracle& lang) {
  for (std::size_t i = 0; i <= k; ++i) {
    for (const auto& w : oracle_traces(s, i)) {
      if (!oracle_final(s, w)) continue;
      Run pi = Run::replay(s, w);
      if (oracle_models(phi, s, pi, 0, entails, lang)) return w;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Interval arithmetic

Interval interval_aggregate(AggregatorKind kind, const std::vector<Interval>& xs) {
  if (xs.empty()) throw std::invalid_argument("no operands");
  Interval acc = xs.front();
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const Interval& x = xs[i];
    switch (kind) {
      case AggregatorKind::sum: acc = {acc.lo + x.lo, acc.hi + x.hi}; break;
      case AggregatorKind::max: acc = {std::max(acc.lo, x.lo), std::max(acc.hi, x.hi)}; break;
      case AggregatorKind::min: acc = {std::min(acc.lo, x.lo), std::min(acc.hi, x.hi)}; break;
      case AggregatorKind::product: {
        std::vector<Rational> c{acc.lo * x.lo, acc.lo * x.hi, acc.hi * x.lo, acc.hi * x.hi};
        acc = {*std::min_element(c.begin(), c.end()), *std::max_element(c.begin(), c.end())};
        break;
      }
    }
  }
  return acc;
}

bool interval_entails(const Interval& a, CompareOp op, const Rational& v) {
  switch (op) {
    case CompareOp::lt: return a.hi < v;
    case CompareOp::le: return a.hi <= v;
    case CompareOp::eq: return a.lo == v && a.hi == v;
    case CompareOp::ge: return a.lo >= v;
    case CompareOp::gt: return a.lo > v;
  }
  return false;
}

namespace {

struct Bounds {
  std::optional<Rational> lo;
  std::optional<Rational> hi;
};

void tighten(Bounds& b, const Formula& f, const InstantiatedSymbol& x) {
  if (f.kind() == Formula::Kind::conj) {
    tighten(b, f.lhs(), x);
    tighten(b, f.rhs(), x);
    return;
  }
  if (f.kind() != Formula::Kind::compare) throw std::invalid_argument("unsupported local constraint");
  const Term& l = f.left_term();
  const Term& r = f.right_term();
  bool sym_left = l.kind() == Term::Kind::instance && r.kind() == Term::Kind::constant;
  bool sym_right = r.kind() == Term::Kind::instance && l.kind() == Term::Kind::constant;
  if (!sym_left && !sym_right) throw std::invalid_argument("unsupported local constraint");
  if ((sym_left ? l.instance() : r.instance()) != x) throw std::invalid_argument("mixed symbols");
  Rational v = sym_left ? r.value() : l.value();
  CompareOp op = f.op();
  if (!sym_left) {
    if (op == CompareOp::le) op = CompareOp::ge;
    else if (op == CompareOp::ge) op = CompareOp::le;
    else if (op != CompareOp::eq) throw std::invalid_argument("strict local constraint");
  }
  auto raise_lo = [&](const Rational& w) { if (!b.lo || *b.lo < w) b.lo = w; };
  auto lower_hi = [&](const Rational& w) { if (!b.hi || *b.hi > w) b.hi = w; };
  switch (op) {
    case CompareOp::le: lower_hi(v); break;
    case CompareOp::ge: raise_lo(v); break;
    case CompareOp::eq: raise_lo(v); lower_hi(v); break;
    default: throw std::invalid_argument("strict local constraint");
  }
}

}  // namespace

bool interval_context_entails(const QosContext& ctx, const Formula& psi) {
  std::map<InstantiatedSymbol, Bounds> box;
  for (const auto& s : ctx.symbols) box[s];
  for (const auto& f : ctx.local) {
    auto syms = instantiated_symbols(f);
    if (syms.size() != 1) throw std::invalid_argument("local constraint over several symbols");
    tighten(box[*syms.begin()], f, *syms.begin());
  }
  for (const auto& [s, b] : box) {
    if (b.lo && b.hi && *b.lo > *b.hi) return true;  // inconsistent context
  }

  if (psi.kind() != Formula::Kind::compare || psi.left_term().kind() != Term::Kind::attribute ||
      psi.right_term().kind() != Term::Kind::constant) {
    throw std::invalid_argument("goal must be `attribute op constant`");
  }
  const AggregateEquation& eq = ctx.aggregates.at(psi.left_term().attribute());
  Bounds agg = box.at(eq.operands.front());
  for (std::size_t i = 1; i < eq.operands.size(); ++i) {
    const Bounds& x = box.at(eq.operands[i]);
    switch (eq.kind) {
      case AggregatorKind::sum:
        agg.lo = agg.lo && x.lo ? std::optional<Rational>(*agg.lo + *x.lo) : std::nullopt;
        agg.hi = agg.hi && x.hi ? std::optional<Rational>(*agg.hi + *x.hi) : std::nullopt;
        break;
      case AggregatorKind::max:
        agg.lo = !agg.lo ? x.lo : !x.lo ? agg.lo : std::optional<Rational>(std::max(*agg.lo, *x.lo));
        agg.hi = agg.hi && x.hi ? std::optional<Rational>(std::max(*agg.hi, *x.hi)) : std::nullopt;
        break;
      case AggregatorKind::min:
        agg.lo = agg.lo && x.lo ? std::optional<Rational>(std::min(*agg.lo, *x.lo)) : std::nullopt;
        agg.hi = !agg.hi ? x.hi : !x.hi ? agg.hi : std::optional<Rational>(std::min(*agg.hi, *x.hi));
        break;
      case AggregatorKind::product: throw std::invalid_argument("product aggregates are not supported");
    }
  }
  const Rational v = psi.right_term().value();
  switch (psi.op()) {
    case CompareOp::lt: return agg.hi && *agg.hi < v;
    case CompareOp::le: return agg.hi && *agg.hi <= v;
    case CompareOp::gt: return agg.lo && *agg.lo > v;
    case CompareOp::ge: return agg.lo && *agg.lo >= v;
    case CompareOp::eq: return agg.lo && agg.hi && *agg.lo == v && *agg.hi == v;
  }
  return false;
}

}  // namespace qosmc::oracle
