#include "qosmc/choreography.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <sstream>

#include "gchor_parser.hpp"
#include "qosmc/error.hpp"

namespace qosmc {

const ParticipantId& subject(const Label& l) { return l.is_output() ? l.sender : l.receiver; }

std::string to_string(const Label& l) {
  return l.sender.str() + l.receiver.str() + (l.is_output() ? "!" : "?") + l.message.str();
}

std::ostream& operator<<(std::ostream& os, const Label& l) { return os << to_string(l); }

std::string to_string(const Word& w) {
  std::string out;
  for (const auto& l : w) {
    if (!out.empty()) out.push_back(' ');
    out += to_string(l);
  }
  return out;
}

namespace {

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

std::pair<ParticipantId, ParticipantId> split_channel(const std::string& channel,
                                                      const std::set<ParticipantId>& participants,
                                                      const SourcePosition& pos) {
  std::vector<std::pair<ParticipantId, ParticipantId>> exact;
  std::vector<std::pair<ParticipantId, ParticipantId>> folded;
  for (std::size_t i = 1; i < channel.size(); ++i) {
    std::string a = channel.substr(0, i);
    std::string b = channel.substr(i);
    for (const auto& p : participants) {
      for (const auto& q : participants) {
        if (p == q) continue;
        if (p.str() == a && q.str() == b) exact.emplace_back(p, q);
        if (lower(p.str()) == lower(a) && lower(q.str()) == lower(b)) folded.emplace_back(p, q);
      }
    }
  }
  if (exact.size() == 1) return exact.front();
  if (exact.empty() && folded.size() == 1) return folded.front();
  if (exact.empty() && folded.empty()) {
    throw ParseError("channel '" + channel + "' does not name two known participants", pos);
  }
  throw ParseError("channel '" + channel + "' is ambiguous", pos);
}

Label parse_label_tokens(detail::TokenStream& tokens, const std::set<ParticipantId>& participants) {
  const detail::Token& chan = tokens.peek();
  std::string channel = tokens.expect_identifier("channel (e.g. AB)");
  bool output;
  if (tokens.accept("!")) {
    output = true;
  } else if (tokens.accept("?")) {
    output = false;
  } else {
    tokens.fail("expected '!' or '?'");
  }
  std::string msg = tokens.expect_identifier("message type");
  auto [from, to] = split_channel(channel, participants, chan.pos);
  return output ? Label::output(from, to, MessageType(msg)) : Label::input(from, to, MessageType(msg));
}

}  // namespace

Label parse_label(std::string_view text, const std::set<ParticipantId>& participants) {
  detail::TokenStream tokens(text);
  Label l = parse_label_tokens(tokens, participants);
  tokens.expect_end();
  return l;
}

Word parse_word(std::string_view text, const std::set<ParticipantId>& participants) {
  detail::TokenStream tokens(text);
  Word w;
  while (!tokens.at_end()) {
    w.push_back(parse_label_tokens(tokens, participants));
    tokens.accept(",");
  }
  return w;
}

// ---------------------------------------------------------------------------
// GChor

struct GChor::Node {
  Kind kind;
  ParticipantId sender;
  ParticipantId receiver;
  MessageType message;
  std::vector<GChor> children;
};

GChor GChor::empty() { return GChor(std::make_shared<const Node>(Node{Kind::empty, {}, {}, {}, {}})); }

GChor GChor::interaction(ParticipantId sender, ParticipantId receiver, MessageType message) {
  if (sender == receiver) {
    throw ValidationError("self-interaction " + sender.str() + "->" + receiver.str() + ":" +
                          message.str());
  }
  return GChor(std::make_shared<const Node>(
      Node{Kind::interaction, std::move(sender), std::move(receiver), std::move(message), {}}));
}

GChor GChor::seq(GChor lhs, GChor rhs) {
  return GChor(std::make_shared<const Node>(Node{Kind::seq, {}, {}, {}, {std::move(lhs), std::move(rhs)}}));
}
GChor GChor::par(GChor lhs, GChor rhs) {
  return GChor(std::make_shared<const Node>(Node{Kind::par, {}, {}, {}, {std::move(lhs), std::move(rhs)}}));
}
GChor GChor::choice(GChor lhs, GChor rhs) {
  return GChor(std::make_shared<const Node>(Node{Kind::choice, {}, {}, {}, {std::move(lhs), std::move(rhs)}}));
}
GChor GChor::loop(GChor body) {
  return GChor(std::make_shared<const Node>(Node{Kind::loop, {}, {}, {}, {std::move(body)}}));
}

GChor::Kind GChor::kind() const { return node_->kind; }
const ParticipantId& GChor::sender() const { return node_->sender; }
const ParticipantId& GChor::receiver() const { return node_->receiver; }
const MessageType& GChor::message() const { return node_->message; }
const GChor& GChor::lhs() const { return node_->children.at(0); }
const GChor& GChor::rhs() const { return node_->children.at(1); }

bool operator==(const GChor& a, const GChor& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case GChor::Kind::empty: return true;
    case GChor::Kind::interaction:
      return a.sender() == b.sender() && a.receiver() == b.receiver() && a.message() == b.message();
    case GChor::Kind::loop: return a.body() == b.body();
    default: return a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }
}

namespace {

// 1 choice, 2 par, 3 seq, 4 loop, 5 atom
int precedence(const GChor& g) {
  switch (g.kind()) {
    case GChor::Kind::choice: return 1;
    case GChor::Kind::par: return 2;
    case GChor::Kind::seq: return 3;
    case GChor::Kind::loop: return 4;
    default: return 5;
  }
}

void print(std::ostream& os, const GChor& g) {
  auto wrapped = [&os](const GChor& child, bool wrap) {
    if (wrap) os << '(';
    print(os, child);
    if (wrap) os << ')';
  };
  switch (g.kind()) {
    case GChor::Kind::empty: os << '0'; return;
    case GChor::Kind::interaction:
      os << g.sender() << "->" << g.receiver() << ':' << g.message();
      return;
    case GChor::Kind::loop:
      wrapped(g.body(), precedence(g.body()) < 4);
      os << '*';
      return;
    default: {
      int p = precedence(g);
      const char* op = g.kind() == GChor::Kind::seq ? " ; " : g.kind() == GChor::Kind::par ? " | " : " + ";
      wrapped(g.lhs(), precedence(g.lhs()) <= p);
      os << op;
      wrapped(g.rhs(), precedence(g.rhs()) < p);
      return;
    }
  }
}

void collect_alphabet(const GChor& g, std::set<Label>& out) {
  switch (g.kind()) {
    case GChor::Kind::empty: return;
    case GChor::Kind::interaction:
      out.insert(Label::output(g.sender(), g.receiver(), g.message()));
      out.insert(Label::input(g.sender(), g.receiver(), g.message()));
      return;
    case GChor::Kind::loop: collect_alphabet(g.body(), out); return;
    default:
      collect_alphabet(g.lhs(), out);
      collect_alphabet(g.rhs(), out);
  }
}

}  // namespace

std::string to_string(const GChor& g) {
  std::ostringstream os;
  print(os, g);
  return os.str();
}

std::ostream& operator<<(std::ostream& os, const GChor& g) { return os << to_string(g); }

std::set<Label> alphabet(const GChor& g) {
  std::set<Label> out;
  collect_alphabet(g, out);
  return out;
}

std::set<ParticipantId> participants(const GChor& g) {
  std::set<ParticipantId> out;
  for (const auto& l : alphabet(g)) {
    out.insert(l.sender);
    out.insert(l.receiver);
  }
  return out;
}

bool is_loop_free(const GChor& g) {
  switch (g.kind()) {
    case GChor::Kind::empty:
    case GChor::Kind::interaction: return true;
    case GChor::Kind::loop: return false;
    default: return is_loop_free(g.lhs()) && is_loop_free(g.rhs());
  }
}

// ---------------------------------------------------------------------------
// Parser

namespace detail {

namespace {

GChor parse_choice(TokenStream& tokens, const GChorBindings& bindings);

GChor parse_primary(TokenStream& tokens, const GChorBindings& bindings) {
  const Token& tok = tokens.peek();
  if (tok.kind == TokenKind::number && tok.text == "0") {
    tokens.next();
    return GChor::empty();
  }
  if (tokens.accept("(")) {
    GChor inner = parse_choice(tokens, bindings);
    tokens.expect(")");
    return inner;
  }
  if (tok.kind == TokenKind::identifier) {
    if (!tokens.is_punct("->", 1)) {
      auto it = bindings.find(tok.text);
      if (it == bindings.end()) tokens.fail_at("unknown choreography '" + tok.text + "'", tok.pos);
      tokens.next();
      return it->second;
    }
    std::string sender = tokens.next().text;
    tokens.expect("->");
    std::string receiver = tokens.expect_identifier("receiver");
    tokens.expect(":");
    std::string message = tokens.expect_identifier("message type");
    if (sender == receiver) {
      tokens.fail_at("self-interaction " + sender + "->" + receiver + ":" + message, tok.pos);
    }
    return GChor::interaction(ParticipantId(sender), ParticipantId(receiver), MessageType(message));
  }
  tokens.fail("expected choreography");
}

GChor parse_postfix(TokenStream& tokens, const GChorBindings& bindings) {
  GChor g = parse_primary(tokens, bindings);
  while (tokens.accept("*")) g = GChor::loop(g);
  return g;
}

// Whether the tokens from `ahead` on can open a choreography term. A ';'
// not followed by one ends the expression, so "let G = A->B:m;" works.
bool starts_term(const TokenStream& tokens, const GChorBindings& bindings, std::size_t ahead) {
  const Token& tok = tokens.peek(ahead);
  if (tok.kind == TokenKind::number) return tok.text == "0";
  if (tok.kind == TokenKind::identifier) {
    return tokens.is_punct("->", ahead + 1) || bindings.count(tok.text) != 0;
  }
  if (tokens.is_punct("(", ahead)) return starts_term(tokens, bindings, ahead + 1);
  return false;
}

GChor parse_seq(TokenStream& tokens, const GChorBindings& bindings) {
  GChor lhs = parse_postfix(tokens, bindings);
  if (tokens.is_punct(";") && starts_term(tokens, bindings, 1)) {
    tokens.next();
    return GChor::seq(lhs, parse_seq(tokens, bindings));
  }
  return lhs;
}

GChor parse_par(TokenStream& tokens, const GChorBindings& bindings) {
  GChor lhs = parse_seq(tokens, bindings);
  if (tokens.accept("|")) return GChor::par(lhs, parse_par(tokens, bindings));
  return lhs;
}

GChor parse_choice(TokenStream& tokens, const GChorBindings& bindings) {
  GChor lhs = parse_par(tokens, bindings);
  if (tokens.accept("+")) return GChor::choice(lhs, parse_choice(tokens, bindings));
  return lhs;
}

}  // namespace

GChor parse_gchor_expr(TokenStream& tokens, const GChorBindings& bindings) {
  return parse_choice(tokens, bindings);
}

}  // namespace detail

GChor parse_gchor(std::string_view text, const GChorBindings& bindings) {
  detail::TokenStream tokens(text);
  GChor g = detail::parse_gchor_expr(tokens, bindings);
  tokens.accept(";");
  tokens.expect_end();
  return g;
}

// ---------------------------------------------------------------------------
// Pomset semantics

namespace {

void close_transitively(Pomset& p) {
  const std::size_t n = p.size();
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!p.before[i][k]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (p.before[k][j]) p.before[i][j] = true;
      }
    }
  }
}

Pomset disjoint_union(const Pomset& a, const Pomset& b) {
  Pomset out;
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  const std::size_t n = out.labels.size();
  out.before.assign(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) out.before[i][j] = a.before[i][j];
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out.before[a.size() + i][a.size() + j] = b.before[i][j];
  return out;
}

void add_unique(std::vector<Pomset>& out, Pomset p) {
  if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
}

}  // namespace

Pomset empty_pomset() { return {}; }

Pomset interaction_pomset(const Label& output) {
  Pomset p;
  p.labels = {Label::output(output.sender, output.receiver, output.message),
              Label::input(output.sender, output.receiver, output.message)};
  p.before = {{false, true}, {false, false}};
  return p;
}

Pomset parallel_compose(const Pomset& a, const Pomset& b) { return disjoint_union(a, b); }

Pomset weak_sequential_compose(const Pomset& a, const Pomset& b) {
  Pomset out = disjoint_union(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      if (subject(a.labels[i]) == subject(b.labels[j])) out.before[i][a.size() + j] = true;
    }
  }
  close_transitively(out);
  return out;
}

std::vector<Pomset> pomsets(const GChor& g, std::size_t unfold_bound) {
  switch (g.kind()) {
    case GChor::Kind::empty: return {empty_pomset()};
    case GChor::Kind::interaction:
      return {interaction_pomset(Label::output(g.sender(), g.receiver(), g.message()))};
    case GChor::Kind::choice: {
      std::vector<Pomset> out = pomsets(g.lhs(), unfold_bound);
      for (auto& p : pomsets(g.rhs(), unfold_bound)) add_unique(out, std::move(p));
      return out;
    }
    case GChor::Kind::par:
    case GChor::Kind::seq: {
      const bool seq = g.kind() == GChor::Kind::seq;
      auto left = pomsets(g.lhs(), unfold_bound);
      auto right = pomsets(g.rhs(), unfold_bound);
      std::vector<Pomset> out;
      for (const auto& a : left) {
        for (const auto& b : right) {
          add_unique(out, seq ? weak_sequential_compose(a, b) : parallel_compose(a, b));
        }
      }
      return out;
    }
    case GChor::Kind::loop: {
      auto body = pomsets(g.body(), unfold_bound);
      std::vector<Pomset> layer = {empty_pomset()};
      std::vector<Pomset> out = layer;
      for (std::size_t n = 1; n <= unfold_bound; ++n) {
        std::vector<Pomset> next;
        for (const auto& a : layer) {
          for (const auto& b : body) add_unique(next, weak_sequential_compose(a, b));
        }
        for (const auto& p : next) add_unique(out, p);
        layer = std::move(next);
      }
      return out;
    }
  }
  return {};
}

std::size_t unfold_bound_for(const Word& w) { return w.size() + 1; }

// ---------------------------------------------------------------------------
// Recognizer
//
// Rather than materialising pomsets(g, bound) and then enumerating their
// downward-closed subsets, the recognizer builds the downward-closed subsets
// ("prefix pomsets") compositionally. A prefix pomset records, besides its
// events, which participants have had every event of the underlying full
// pomset included ("done"). In a weak sequential composition an event of the
// right operand may be present only if its subject is done on the left.
// Candidates whose label multiset exceeds that of the word are pruned.

namespace {

using Mask = std::uint64_t;

struct Prefix {
  std::vector<int> labels;               // indices into the alphabet
  std::vector<std::vector<int>> preds;   // direct predecessors
  std::vector<int> counts;               // label multiset
  Mask done = 0;

  std::string key() const {
    std::string k;
    for (int l : labels) k += std::to_string(l) + ",";
    k += "|";
    for (const auto& ps : preds) {
      for (int p : ps) k += std::to_string(p) + ",";
      k += ";";
    }
    k += "|" + std::to_string(done);
    return k;
  }
};

class PrefixBuilder {
 public:
  PrefixBuilder(const GChor& g, const Word& w) {
    for (const auto& l : alphabet(g)) {
      label_index_.emplace(l, static_cast<int>(labels_.size()));
      labels_.push_back(l);
    }
    int next = 0;
    for (const auto& p : participants(g)) participant_index_.emplace(p, next++);
    if (participant_index_.size() > 64) {
      throw ValidationError("choreographies with more than 64 participants are not supported");
    }
    all_ = participant_index_.size() == 64 ? ~Mask{0} : ((Mask{1} << participant_index_.size()) - 1);

    budget_.assign(labels_.size(), 0);
    feasible_ = true;
    for (const auto& l : w) {
      auto it = label_index_.find(l);
      if (it == label_index_.end()) {
        feasible_ = false;
        continue;
      }
      ++budget_[it->second];
      word_.push_back(it->second);
    }
    length_ = w.size();
  }

  bool feasible() const { return feasible_; }
  const std::vector<int>& word() const { return word_; }
  int subject_of(int label) const { return participant_index_.at(subject(labels_[label])); }

  std::vector<Prefix> build(const GChor& g) const {
    switch (g.kind()) {
      case GChor::Kind::empty: return {empty()};
      case GChor::Kind::interaction: return interaction(g);
      case GChor::Kind::choice: {
        auto out = build(g.lhs());
        auto rhs = build(g.rhs());
        out.insert(out.end(), rhs.begin(), rhs.end());
        return dedupe(std::move(out));
      }
      case GChor::Kind::par:
      case GChor::Kind::seq: {
        const bool seq = g.kind() == GChor::Kind::seq;
        auto left = build(g.lhs());
        auto right = build(g.rhs());
        std::vector<Prefix> out;
        for (const auto& a : left) {
          for (const auto& b : right) {
            if (auto c = compose(a, b, seq)) out.push_back(std::move(*c));
          }
        }
        return dedupe(std::move(out));
      }
      case GChor::Kind::loop: {
        // Copies contributing no event can only shrink the done set, so
        // it suffices to chain non-empty copies; there are at most |w|.
        std::vector<Prefix> body;
        for (auto& p : build(g.body())) {
          if (!p.labels.empty()) body.push_back(std::move(p));
        }
        std::vector<Prefix> layer = {empty()};
        std::vector<Prefix> out = layer;
        for (std::size_t n = 1; n <= length_ && !layer.empty(); ++n) {
          std::vector<Prefix> next;
          for (const auto& a : layer) {
            for (const auto& b : body) {
              if (auto c = compose(a, b, true)) next.push_back(std::move(*c));
            }
          }
          next = dedupe(std::move(next));
          out.insert(out.end(), next.begin(), next.end());
          layer = std::move(next);
        }
        return dedupe(std::move(out));
      }
    }
    return {};
  }

 private:
  Prefix empty() const {
    Prefix p;
    p.counts.assign(labels_.size(), 0);
    p.done = all_;
    return p;
  }

  std::vector<Prefix> interaction(const GChor& g) const {
    const int out_label = label_index_.at(Label::output(g.sender(), g.receiver(), g.message()));
    const int in_label = label_index_.at(Label::input(g.sender(), g.receiver(), g.message()));
    const Mask sender = Mask{1} << participant_index_.at(g.sender());
    const Mask receiver = Mask{1} << participant_index_.at(g.receiver());

    std::vector<Prefix> out;
    Prefix none = empty();
    none.done = all_ & ~sender & ~receiver;
    out.push_back(none);

    Prefix sent = empty();
    sent.labels = {out_label};
    sent.preds = {{}};
    sent.counts[out_label] = 1;
    sent.done = all_ & ~receiver;
    if (within_budget(sent.counts)) out.push_back(sent);

    Prefix both = sent;
    both.labels.push_back(in_label);
    both.preds.push_back({0});
    both.counts[in_label] = 1;
    both.done = all_;
    if (within_budget(both.counts)) out.push_back(both);
    return out;
  }

  bool within_budget(const std::vector<int>& counts) const {
    for (std::size_t i = 0; i < counts.size(); ++i) {
      if (counts[i] > budget_[i]) return false;
    }
    return true;
  }

  std::optional<Prefix> compose(const Prefix& a, const Prefix& b, bool seq) const {
    Prefix out;
    out.counts.resize(labels_.size());
    for (std::size_t i = 0; i < labels_.size(); ++i) out.counts[i] = a.counts[i] + b.counts[i];
    if (!within_budget(out.counts)) return std::nullopt;

    if (seq) {
      for (int l : b.labels) {
        if ((a.done & (Mask{1} << subject_of(l))) == 0) return std::nullopt;
      }
    }
    const int shift = static_cast<int>(a.labels.size());
    out.labels = a.labels;
    out.preds = a.preds;
    for (std::size_t j = 0; j < b.labels.size(); ++j) {
      out.labels.push_back(b.labels[j]);
      std::vector<int> preds;
      for (int p : b.preds[j]) preds.push_back(p + shift);
      if (seq) {
        const int s = subject_of(b.labels[j]);
        for (std::size_t i = 0; i < a.labels.size(); ++i) {
          if (subject_of(a.labels[i]) == s) preds.push_back(static_cast<int>(i));
        }
      }
      out.preds.push_back(std::move(preds));
    }
    out.done = a.done & b.done;
    return out;
  }

  static std::vector<Prefix> dedupe(std::vector<Prefix> in) {
    std::set<std::string> seen;
    std::vector<Prefix> out;
    for (auto& p : in) {
      if (seen.insert(p.key()).second) out.push_back(std::move(p));
    }
    return out;
  }

  std::vector<Label> labels_;
  std::map<Label, int> label_index_;
  std::map<ParticipantId, int> participant_index_;
  Mask all_ = 0;
  std::vector<int> budget_;
  std::vector<int> word_;
  std::size_t length_ = 0;
  bool feasible_ = true;
};

// Backtracking search for an order-respecting matching of `word` onto all
// events of `p`; failed consumption states are memoised.
bool linearizes(const Prefix& p, const std::vector<int>& word) {
  const std::size_t n = p.labels.size();
  if (n != word.size()) return false;
  std::vector<bool> consumed(n, false);
  std::set<std::vector<bool>> failed;

  auto search = [&](auto&& self, std::size_t pos) -> bool {
    if (pos == n) return true;
    if (failed.count(consumed)) return false;
    for (std::size_t e = 0; e < n; ++e) {
      if (consumed[e] || p.labels[e] != word[pos]) continue;
      bool ready = std::all_of(p.preds[e].begin(), p.preds[e].end(),
                               [&](int q) { return consumed[q]; });
      if (!ready) continue;
      consumed[e] = true;
      if (self(self, pos + 1)) return true;
      consumed[e] = false;
    }
    failed.insert(consumed);
    return false;
  };
  return search(search, 0);
}

}  // namespace

bool is_prefix_word(const GChor& g, const Word& w) {
  if (w.empty()) return true;
  PrefixBuilder builder(g, w);
  if (!builder.feasible()) return false;
  for (const auto& p : builder.build(g)) {
    if (p.labels.size() == w.size() && linearizes(p, builder.word())) return true;
  }
  return false;
}

bool is_maximal_word(const GChor& g, const Word& w) {
  if (!is_prefix_word(g, w)) return false;
  Word extended = w;
  extended.emplace_back();
  for (const auto& l : alphabet(g)) {
    extended.back() = l;
    if (is_prefix_word(g, extended)) return false;
  }
  return true;
}

}  // namespace qosmc
