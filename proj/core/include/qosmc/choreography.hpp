#pragma once

#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "qosmc/ids.hpp"

namespace qosmc {

enum class Polarity { output, input };

// Communication action: AB!m (A sends m to B) or AB?m (B consumes m from
// channel AB).
struct Label {
  ParticipantId sender;
  ParticipantId receiver;
  MessageType message;
  Polarity polarity = Polarity::output;

  static Label output(ParticipantId from, ParticipantId to, MessageType msg) {
    return {std::move(from), std::move(to), std::move(msg), Polarity::output};
  }
  static Label input(ParticipantId from, ParticipantId to, MessageType msg) {
    return {std::move(from), std::move(to), std::move(msg), Polarity::input};
  }

  bool is_output() const { return polarity == Polarity::output; }

  // Canonical order: sender, receiver, message, then output before input.
  friend auto operator<=>(const Label&, const Label&) = default;
  friend bool operator==(const Label&, const Label&) = default;
};

// The participant performing the action.
const ParticipantId& subject(const Label& l);

std::string to_string(const Label& l);
std::ostream& operator<<(std::ostream& os, const Label& l);

using Word = std::vector<Label>;

std::string to_string(const Word& w);

// Parses a whitespace-separated list of labels such as "cs!quit cs?quit".
// The channel prefix is split into two names from `participants`; an exact
// split is preferred, a unique case-insensitive split is accepted.
Word parse_word(std::string_view text, const std::set<ParticipantId>& participants);
Label parse_label(std::string_view text, const std::set<ParticipantId>& participants);

// Global choreography term.
class GChor {
 public:
  enum class Kind { empty, interaction, seq, par, choice, loop };

  static GChor empty();
  // Throws ValidationError when sender == receiver.
  static GChor interaction(ParticipantId sender, ParticipantId receiver, MessageType message);
  static GChor seq(GChor lhs, GChor rhs);
  static GChor par(GChor lhs, GChor rhs);
  static GChor choice(GChor lhs, GChor rhs);
  static GChor loop(GChor body);

  Kind kind() const;
  const ParticipantId& sender() const;
  const ParticipantId& receiver() const;
  const MessageType& message() const;
  const GChor& lhs() const;
  const GChor& rhs() const;
  const GChor& body() const { return lhs(); }

  friend bool operator==(const GChor& a, const GChor& b);

 private:
  struct Node;
  explicit GChor(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

std::string to_string(const GChor& g);
std::ostream& operator<<(std::ostream& os, const GChor& g);

using GChorBindings = std::map<std::string, GChor>;

// Concrete syntax: 0, A->B:m, G;G, G|G, G+G, G* and parentheses. Precedence
// from tightest: postfix *, then ;, then |, then +. Binary operators
// associate to the right. A bare identifier refers to `bindings`.
GChor parse_gchor(std::string_view text, const GChorBindings& bindings = {});

std::set<Label> alphabet(const GChor& g);
std::set<ParticipantId> participants(const GChor& g);
bool is_loop_free(const GChor& g);

// Labelled strict partial order. Events are indices into `labels`;
// `before[i][j]` holds when event i precedes event j (transitively closed).
struct Pomset {
  std::vector<Label> labels;
  std::vector<std::vector<bool>> before;

  std::size_t size() const { return labels.size(); }
  bool precedes(std::size_t i, std::size_t j) const { return before[i][j]; }

  friend bool operator==(const Pomset&, const Pomset&) = default;
};

Pomset empty_pomset();
Pomset interaction_pomset(const Label& output);
Pomset parallel_compose(const Pomset& a, const Pomset& b);
// Disjoint union plus e < e' whenever e in `a`, e' in `b` and the two share
// their subject; transitively closed.
Pomset weak_sequential_compose(const Pomset& a, const Pomset& b);

// Finite pomset semantics with every loop unfolded 0..unfold_bound times.
// Structurally identical pomsets are reported once; order is deterministic.
std::vector<Pomset> pomsets(const GChor& g, std::size_t unfold_bound);

// Loop unfoldings sufficient to decide membership of a word of this length.
std::size_t unfold_bound_for(const Word& w);

// w ∈ L(G): w linearises a downward-closed subset of some pomset of g.
bool is_prefix_word(const GChor& g, const Word& w);

// w ∈ L̂(G): w ∈ L(G) and no single-label extension stays in L(G).
bool is_maximal_word(const GChor& g, const Word& w);

}  // namespace qosmc
