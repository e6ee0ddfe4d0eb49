#include "qosmc/logic.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>
#include <vector>

#include "gchor_parser.hpp"
#include "lexer.hpp"
#include "qosmc/aggregation.hpp"
#include "qosmc/error.hpp"
#include "rcf_parser.hpp"

namespace qosmc {

struct QlFormula::Node {
  Kind kind;
  std::optional<Formula> psi;
  std::optional<QlFormula> lhs;
  std::optional<QlFormula> rhs;
  std::optional<GChor> chor;
};

QlFormula QlFormula::top() {
  static const QlFormula t(std::make_shared<const Node>(Node{Kind::top, {}, {}, {}, {}}));
  return t;
}

QlFormula QlFormula::atom(Formula psi) {
  return QlFormula(std::make_shared<const Node>(Node{Kind::atom, std::move(psi), {}, {}, {}}));
}

QlFormula QlFormula::neg(QlFormula operand) {
  return QlFormula(std::make_shared<const Node>(Node{Kind::neg, {}, std::move(operand), {}, {}}));
}

QlFormula QlFormula::disj(QlFormula lhs, QlFormula rhs) {
  return QlFormula(
      std::make_shared<const Node>(Node{Kind::disj, {}, std::move(lhs), std::move(rhs), {}}));
}

QlFormula QlFormula::until(QlFormula lhs, GChor g, QlFormula rhs) {
  return QlFormula(std::make_shared<const Node>(
      Node{Kind::until, {}, std::move(lhs), std::move(rhs), std::move(g)}));
}

QlFormula::Kind QlFormula::kind() const { return node_->kind; }

const Formula& QlFormula::psi() const {
  if (!node_->psi) throw Error("QL formula is not an atom");
  return *node_->psi;
}

const QlFormula& QlFormula::lhs() const {
  if (!node_->lhs) throw Error("QL formula has no operand");
  return *node_->lhs;
}

const QlFormula& QlFormula::rhs() const {
  if (!node_->rhs) throw Error("QL formula has no right operand");
  return *node_->rhs;
}

const GChor& QlFormula::chor() const {
  if (!node_->chor) throw Error("QL formula is not an until");
  return *node_->chor;
}

bool operator==(const QlFormula& a, const QlFormula& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case QlFormula::Kind::top: return true;
    case QlFormula::Kind::atom: return a.psi() == b.psi();
    case QlFormula::Kind::neg: return a.operand() == b.operand();
    case QlFormula::Kind::disj: return a.lhs() == b.lhs() && a.rhs() == b.rhs();
    case QlFormula::Kind::until:
      return a.chor() == b.chor() && a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }
  return false;
}

QlFormula diamond(GChor g, QlFormula phi) {
  return QlFormula::until(QlFormula::top(), std::move(g), std::move(phi));
}

QlFormula box(GChor g, QlFormula phi) {
  return QlFormula::neg(diamond(std::move(g), QlFormula::neg(std::move(phi))));
}

QlFormula conjunction(QlFormula a, QlFormula b) {
  return QlFormula::neg(QlFormula::disj(QlFormula::neg(std::move(a)), QlFormula::neg(std::move(b))));
}

QlFormula implication(QlFormula a, QlFormula b) {
  return QlFormula::disj(QlFormula::neg(std::move(a)), std::move(b));
}

// ---------------------------------------------------------------------------
// Printing

namespace {

int precedence(const QlFormula& phi) {
  switch (phi.kind()) {
    case QlFormula::Kind::disj: return 1;
    case QlFormula::Kind::until: return 3;
    case QlFormula::Kind::neg: return 4;
    default: return 5;
  }
}

void print(std::ostream& os, const QlFormula& phi, int min_prec) {
  const bool parens = precedence(phi) < min_prec;
  if (parens) os << '(';
  switch (phi.kind()) {
    case QlFormula::Kind::top: os << "true"; break;
    case QlFormula::Kind::atom:
      if (phi.psi().kind() == Formula::Kind::compare) {
        os << to_string(phi.psi());
      } else {
        os << '{' << to_string(phi.psi()) << '}';
      }
      break;
    case QlFormula::Kind::neg:
      os << '!';
      print(os, phi.operand(), 4);
      break;
    case QlFormula::Kind::disj:
      print(os, phi.lhs(), 1);
      os << " || ";
      print(os, phi.rhs(), 2);
      break;
    case QlFormula::Kind::until:
      print(os, phi.lhs(), 4);
      os << " U{" << to_string(phi.chor()) << "} ";
      print(os, phi.rhs(), 3);
      break;
  }
  if (parens) os << ')';
}

}  // namespace

std::string to_string(const QlFormula& phi) {
  std::ostringstream os;
  print(os, phi, 0);
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const QlFormula& phi) { return os << to_string(phi); }

std::size_t depth(const QlFormula& phi) {
  switch (phi.kind()) {
    case QlFormula::Kind::top:
    case QlFormula::Kind::atom: return 0;
    case QlFormula::Kind::neg: return 1 + depth(phi.operand());
    case QlFormula::Kind::disj:
    case QlFormula::Kind::until: return 1 + std::max(depth(phi.lhs()), depth(phi.rhs()));
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class QlParser {
 public:
  QlParser(detail::TokenStream& tokens, const AttributeRegistry& registry, GChorBindings bindings)
      : tokens_(tokens), registry_(registry), bindings_(std::move(bindings)) {}

  QlFormula file() {
    while (tokens_.is_word("let")) {
      tokens_.next();
      const detail::Token& name_tok = tokens_.peek();
      std::string name = tokens_.expect_identifier("binding name");
      if (detail::RcfParser::is_reserved(name) || registry_.contains(Attribute(name))) {
        tokens_.fail_at("binding name '" + name + "' is reserved", name_tok.pos);
      }
      tokens_.expect("=");
      GChor g = detail::parse_gchor_expr(tokens_, bindings_);
      tokens_.expect(";");
      bindings_.insert_or_assign(name, g);
    }
    QlFormula phi = implication_level();
    tokens_.accept(";");
    tokens_.expect_end();
    return phi;
  }

 private:
  QlFormula implication_level() {
    QlFormula lhs = or_level();
    if (tokens_.accept("->")) return implication(lhs, implication_level());
    return lhs;
  }

  QlFormula or_level() {
    QlFormula lhs = and_level();
    while (tokens_.accept("||")) lhs = QlFormula::disj(lhs, and_level());
    return lhs;
  }

  QlFormula and_level() {
    QlFormula lhs = until_level();
    while (tokens_.accept("&&")) lhs = conjunction(lhs, until_level());
    return lhs;
  }

  QlFormula until_level() {
    QlFormula lhs = unary();
    if (tokens_.is_word("U") && tokens_.is_punct("{", 1)) {
      tokens_.next();
      tokens_.next();
      GChor g = detail::parse_gchor_expr(tokens_, bindings_);
      tokens_.expect("}");
      return QlFormula::until(lhs, g, until_level());
    }
    return lhs;
  }

  QlFormula unary() {
    if (tokens_.accept("!")) return QlFormula::neg(unary());
    if (tokens_.accept("<")) {
      GChor g = detail::parse_gchor_expr(tokens_, bindings_);
      tokens_.expect(">");
      return diamond(g, unary());
    }
    if (tokens_.accept("[")) {
      GChor g = detail::parse_gchor_expr(tokens_, bindings_);
      tokens_.expect("]");
      return box(g, unary());
    }
    return primary();
  }

  QlFormula primary() {
    if (tokens_.is_word("true")) {
      tokens_.next();
      return QlFormula::top();
    }
    if (tokens_.accept("{")) {
      detail::RcfParser rcf(tokens_, registry_);
      Formula psi = rcf.formula();
      tokens_.expect("}");
      return QlFormula::atom(psi);
    }
    if (tokens_.is_punct("(")) {
      // Either a parenthesised QL formula or a comparison whose left term
      // starts with '(' such as "(c + 1) <= 3".
      std::size_t mark = tokens_.mark();
      try {
        tokens_.next();
        QlFormula inner = implication_level();
        tokens_.expect(")");
        return inner;
      } catch (const ParseError& first) {
        tokens_.reset(mark);
        try {
          detail::RcfParser rcf(tokens_, registry_);
          return QlFormula::atom(rcf.atom());
        } catch (const ParseError& second) {
          throw first.position().offset >= second.position().offset ? first : second;
        }
      }
    }
    detail::RcfParser rcf(tokens_, registry_);
    return QlFormula::atom(rcf.atom());
  }

  detail::TokenStream& tokens_;
  const AttributeRegistry& registry_;
  GChorBindings bindings_;
};

}  // namespace

QlFormula parse_ql(std::string_view text, const AttributeRegistry& registry,
                   const GChorBindings& bindings) {
  detail::TokenStream tokens(text);
  QlParser parser(tokens, registry, bindings);
  return parser.file();
}

// ---------------------------------------------------------------------------
// Validation

void validate_formula(const QlFormula& phi, const QosSystem& s) {
  std::set<ParticipantId> parts = s.participant_ids();
  std::set<MessageType> messages;
  for (const auto& [p, m] : s.machines()) {
    for (const auto& t : m.machine().transitions()) messages.insert(t.label.message);
  }

  std::vector<const QlFormula*> todo{&phi};
  while (!todo.empty()) {
    const QlFormula& f = *todo.back();
    todo.pop_back();
    switch (f.kind()) {
      case QlFormula::Kind::top: break;
      case QlFormula::Kind::atom:
        for (const auto& a : free_attributes(f.psi())) {
          if (!s.registry().contains(a)) {
            throw ValidationError("attribute '" + a.str() + "' is not declared by the system");
          }
        }
        if (!instantiated_symbols(f.psi()).empty()) {
          throw ValidationError("QL atoms may not mention instantiated symbols");
        }
        break;
      case QlFormula::Kind::neg: todo.push_back(&f.operand()); break;
      case QlFormula::Kind::until:
        for (const auto& l : alphabet(f.chor())) {
          for (const auto& p : {l.sender, l.receiver}) {
            if (!parts.count(p)) {
              throw ValidationError("choreography participant '" + p.str() +
                                    "' is not in the system");
            }
          }
          if (!messages.count(l.message)) {
            throw ValidationError("choreography message '" + l.message.str() +
                                  "' is not used by the system");
          }
        }
        [[fallthrough]];
      case QlFormula::Kind::disj:
        todo.push_back(&f.lhs());
        todo.push_back(&f.rhs());
        break;
    }
  }
}

// ---------------------------------------------------------------------------
// Evaluation

struct RunEvaluator::State {
  const QosSystem& system;
  const Run& pi;
  Entailer& entailer;
  Word word;
  std::map<std::size_t, QosContext> contexts;
  std::map<std::pair<const void*, std::size_t>, bool> models;
  std::map<std::tuple<std::string, std::size_t, std::size_t, bool>, bool> language;

  const QosContext& context(std::size_t n) {
    auto it = contexts.find(n);
    if (it == contexts.end()) it = contexts.emplace(n, aggregate(system, pi.prefix(n))).first;
    return it->second;
  }

  bool member(const GChor& g, const std::string& key, std::size_t from, std::size_t to,
              bool maximal) {
    auto k = std::make_tuple(key, from, to, maximal);
    auto it = language.find(k);
    if (it != language.end()) return it->second;
    Word w(word.begin() + static_cast<std::ptrdiff_t>(from),
           word.begin() + static_cast<std::ptrdiff_t>(to));
    bool r = maximal ? is_maximal_word(g, w) : is_prefix_word(g, w);
    language.emplace(std::move(k), r);
    return r;
  }
};

RunEvaluator::RunEvaluator(const QosSystem& s, const Run& pi, Entailer& entailer)
    : state_(std::make_shared<State>(State{s, pi, entailer, trace(pi), {}, {}, {}})) {}

bool RunEvaluator::models(const QlFormula& phi, std::size_t prefix) {
  auto key = std::make_pair(phi.id(), prefix);
  if (auto it = state_->models.find(key); it != state_->models.end()) return it->second;

  bool result = false;
  switch (phi.kind()) {
    case QlFormula::Kind::top: result = true; break;
    case QlFormula::Kind::atom:
      result = state_->entailer.entails(state_->context(prefix), phi.psi());
      break;
    case QlFormula::Kind::neg: result = !models(phi.operand(), prefix); break;
    case QlFormula::Kind::disj: result = models(phi.lhs(), prefix) || models(phi.rhs(), prefix); break;
    case QlFormula::Kind::until: result = until(phi.lhs(), phi.chor(), phi.rhs(), prefix, 0); break;
  }
  state_->models.emplace(key, result);
  return result;
}

bool RunEvaluator::until(const QlFormula& phi1, const GChor& g, const QlFormula& phi2,
                         std::size_t prefix, std::size_t ext) {
  const std::size_t n = state_->pi.length();
  if (prefix + ext > n) throw ValidationError("extension runs past the end of the run");
  const std::string key = to_string(g);
  while (true) {
    const std::size_t here = prefix + ext;
    if (state_->member(g, key, prefix, here, true) && models(phi2, here)) return true;
    if (!models(phi1, here)) return false;
    if (here == n) return false;
    if (!state_->member(g, key, prefix, here + 1, false)) return false;
    ++ext;
  }
}

namespace {

std::size_t checked_prefix(const Run& pi, const Run& prefix) {
  if (!pi.has_prefix(prefix)) throw ValidationError("run is not a prefix of the evaluated run");
  return prefix.length();
}

}  // namespace

bool q_models(const QlFormula& phi, const QosSystem& s, const Run& pi, const Run& prefix,
              Entailer& entailer) {
  std::size_t n = checked_prefix(pi, prefix);
  RunEvaluator ev(s, pi, entailer);
  return ev.models(phi, n);
}

bool q_until(const QlFormula& phi1, const GChor& g, const QlFormula& phi2, const QosSystem& s,
             const Run& pi, const Run& prefix, const Run& ext, Entailer& entailer) {
  std::size_t n = checked_prefix(pi, prefix);
  if (!pi.has_prefix(ext) || ext.length() < n || !ext.has_prefix(prefix)) {
    throw ValidationError("prefix and extension do not compose to a prefix of the run");
  }
  // `ext` is passed as the run prefix·ext; its extra steps form the extension.
  RunEvaluator ev(s, pi, entailer);
  return ev.until(phi1, g, phi2, n, ext.length() - n);
}

std::string to_string(VerdictKind v) {
  switch (v) {
    case VerdictKind::sat: return "sat";
    case VerdictKind::unsat_up_to_bound: return "unsat-up-to-bound";
    case VerdictKind::valid_up_to_bound: return "valid-up-to-bound";
    case VerdictKind::counterexample: return "counterexample";
  }
  return "?";
}

namespace {

std::optional<std::size_t> first_satisfying(const QlFormula& phi, const QosSystem& s,
                                            const std::vector<Run>& runs, Entailer& entailer,
                                            unsigned threads) {
  const std::size_t n = runs.size();
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> best{n};
  std::vector<std::exception_ptr> errors(n);

  auto work = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= n || i >= best.load()) return;
      try {
        RunEvaluator ev(s, runs[i], entailer);
        if (ev.models(phi, 0)) {
          std::size_t cur = best.load();
          while (i < cur && !best.compare_exchange_weak(cur, i)) {
          }
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  std::vector<std::thread> pool;
  unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();

  const std::size_t found = best.load();
  for (std::size_t i = 0; i < std::min(found, n); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
  }
  if (found < n) return found;
  return std::nullopt;
}

}  // namespace

Verdict q_sat(const QlFormula& phi, const QosSystem& s, std::size_t k, Entailer& entailer,
              const CheckOptions& options) {
  validate_formula(phi, s);
  Verdict verdict;
  verdict.bound = k;

  std::optional<Run> found;
  std::vector<Run> batch;
  std::size_t batch_length = 0;

  auto flush = [&] {
    if (batch.empty()) return;
    if (auto i = first_satisfying(phi, s, batch, entailer, options.threads)) found = batch[*i];
    batch.clear();
  };

  enumerate_runs(s, k, [&](const Run& r) {
    if (r.length() != batch_length) {
      flush();
      if (found) return false;
      batch_length = r.length();
    }
    if (!is_final(s, r.last(), options.require_empty_buffers)) return true;
    if (options.threads <= 1) {
      RunEvaluator ev(s, r, entailer);
      if (ev.models(phi, 0)) {
        found = r;
        return false;
      }
      return true;
    }
    batch.push_back(r);
    return true;
  });
  if (!found) flush();

  if (found) {
    verdict.result = VerdictKind::sat;
    verdict.witness = std::move(found);
  }
  return verdict;
}

Verdict check_valid(const QlFormula& phi, const QosSystem& s, std::size_t k, Entailer& entailer,
                    const CheckOptions& options) {
  Verdict v = q_sat(QlFormula::neg(phi), s, k, entailer, options);
  v.result = v.result == VerdictKind::sat ? VerdictKind::counterexample
                                          : VerdictKind::valid_up_to_bound;
  return v;
}

}  // namespace qosmc
