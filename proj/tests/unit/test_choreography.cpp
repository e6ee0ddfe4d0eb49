#include <gtest/gtest.h>

#include "../oracle/generators.hpp"
#include "../oracle/oracle.hpp"
#include "qosmc/choreography.hpp"
#include "qosmc/error.hpp"

using namespace qosmc;

namespace {

const std::set<ParticipantId> kABC{ParticipantId("A"), ParticipantId("B"), ParticipantId("C")};
const std::set<ParticipantId> kCS{ParticipantId("c"), ParticipantId("s")};

GChor ia(const char* a, const char* b, const char* m) {
  return GChor::interaction(ParticipantId(a), ParticipantId(b), MessageType(m));
}

Word w(const char* text, const std::set<ParticipantId>& ps = kABC) { return parse_word(text, ps); }

GChor g_quit() { return parse_gchor("c->s:quit ; s->c:bye"); }

}  // namespace

TEST(Labels, Subject) {
  EXPECT_EQ(subject(parse_label("AB!m", kABC)), ParticipantId("A"));
  EXPECT_EQ(subject(parse_label("AB?m", kABC)), ParticipantId("B"));
  EXPECT_EQ(subject(parse_label("CB!n", kABC)), ParticipantId("C"));
  EXPECT_EQ(to_string(parse_label("ab?m", kABC)), "AB?m");
  EXPECT_THROW(parse_label("AD!m", kABC), ParseError);
}

TEST(ParseGChor, Examples) {
  EXPECT_EQ(g_quit(), GChor::seq(ia("c", "s", "quit"), ia("s", "c", "bye")));
  EXPECT_EQ(parse_gchor("0"), GChor::empty());
  EXPECT_EQ(parse_gchor("A->B:m ; C->B:n + A->B:m"),
            GChor::choice(GChor::seq(ia("A", "B", "m"), ia("C", "B", "n")), ia("A", "B", "m")));
  EXPECT_EQ(parse_gchor("A->B:m | B->C:n ; C->A:m*"),
            GChor::par(ia("A", "B", "m"), GChor::seq(ia("B", "C", "n"), GChor::loop(ia("C", "A", "m")))));
  EXPECT_EQ(parse_gchor("A->B:m ; B->A:m ; A->C:n"),
            GChor::seq(ia("A", "B", "m"), GChor::seq(ia("B", "A", "m"), ia("A", "C", "n"))));
  EXPECT_THROW(parse_gchor("A->A:m"), ParseError);
  EXPECT_THROW(GChor::interaction(ParticipantId("A"), ParticipantId("A"), MessageType("m")), ValidationError);
  EXPECT_EQ(parse_gchor("A->B:m ;"), ia("A", "B", "m"));
  EXPECT_THROW(parse_gchor("A->B:m ; ;"), ParseError);
  EXPECT_THROW(parse_gchor("A->B:m ; +"), ParseError);
  EXPECT_THROW(parse_gchor("G ; A->B:m"), ParseError);
}

TEST(ParseGChor, RoundTrip) {
  gen::Rng rng(5);
  std::vector<ParticipantId> ps{ParticipantId("A"), ParticipantId("B"), ParticipantId("C")};
  std::vector<MessageType> ms{MessageType("m"), MessageType("n")};
  for (int i = 0; i < 500; ++i) {
    GChor g = gen::random_gchor(rng, ps, ms, 5);
    if (i % 3 == 0) g = GChor::seq(GChor::loop(g), gen::random_gchor(rng, ps, ms, 2));
    EXPECT_EQ(parse_gchor(to_string(g)), g) << to_string(g);
  }
}

TEST(Pomsets, Interaction) {
  auto ps = pomsets(ia("A", "B", "m"), 3);
  ASSERT_EQ(ps.size(), 1u);
  ASSERT_EQ(ps[0].size(), 2u);
  EXPECT_EQ(to_string(ps[0].labels[0]), "AB!m");
  EXPECT_TRUE(ps[0].precedes(0, 1));
  EXPECT_FALSE(ps[0].precedes(1, 0));
}

TEST(Pomsets, WeakSequencing) {
  auto ps = pomsets(GChor::seq(ia("A", "B", "m"), ia("C", "B", "n")), 0);
  ASSERT_EQ(ps.size(), 1u);
  const Pomset& p = ps[0];
  ASSERT_EQ(p.size(), 4u);
  auto idx = [&](const char* l) {
    Label lab = parse_label(l, kABC);
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p.labels[i] == lab) return i;
    }
    ADD_FAILURE() << l;
    return std::size_t{0};
  };
  EXPECT_TRUE(p.precedes(idx("AB!m"), idx("AB?m")));
  EXPECT_TRUE(p.precedes(idx("CB!n"), idx("CB?n")));
  EXPECT_TRUE(p.precedes(idx("AB?m"), idx("CB?n")));
  EXPECT_FALSE(p.precedes(idx("AB!m"), idx("CB!n")));
  EXPECT_FALSE(p.precedes(idx("CB!n"), idx("AB!m")));
}

TEST(Pomsets, LoopUnfoldings) {
  auto ps = pomsets(GChor::loop(ia("A", "B", "m")), 2);
  std::vector<std::size_t> sizes;
  for (const auto& p : ps) sizes.push_back(p.size());
  std::sort(sizes.begin(), sizes.end());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{0, 2, 4}));
  for (const auto& p : ps) {
    if (p.size() != 4) continue;
    std::vector<std::size_t> outs, ins;
    for (std::size_t i = 0; i < 4; ++i) (p.labels[i].is_output() ? outs : ins).push_back(i);
    EXPECT_TRUE(p.precedes(outs[0], outs[1]) || p.precedes(outs[1], outs[0]));
    EXPECT_TRUE(p.precedes(ins[0], ins[1]) || p.precedes(ins[1], ins[0]));
  }
}

TEST(Pomsets, TransitivelyClosedAndIrreflexive) {
  gen::Rng rng(9);
  std::vector<ParticipantId> ps{ParticipantId("A"), ParticipantId("B"), ParticipantId("C")};
  std::vector<MessageType> ms{MessageType("m"), MessageType("n")};
  for (int i = 0; i < 100; ++i) {
    GChor g = gen::random_gchor(rng, ps, ms, 4);
    for (const auto& p : pomsets(g, 1)) {
      for (std::size_t a = 0; a < p.size(); ++a) {
        EXPECT_FALSE(p.precedes(a, a));
        for (std::size_t b = 0; b < p.size(); ++b) {
          for (std::size_t c = 0; c < p.size(); ++c) {
            if (p.precedes(a, b) && p.precedes(b, c)) {
              EXPECT_TRUE(p.precedes(a, c));
            }
          }
        }
      }
    }
  }
}

TEST(PrefixWord, Examples) {
  EXPECT_TRUE(is_prefix_word(g_quit(), w("cs!quit", kCS)));
  GChor g = GChor::seq(ia("A", "B", "m"), ia("C", "B", "n"));
  EXPECT_TRUE(is_prefix_word(g, w("CB!n AB!m AB?m CB?n")));
  EXPECT_FALSE(is_prefix_word(g, w("CB!n AB!m CB?n AB?m")));
  EXPECT_FALSE(is_prefix_word(ia("A", "B", "m"), w("AB?m")));
  EXPECT_TRUE(is_prefix_word(GChor::empty(), Word{}));
}

TEST(MaximalWord, Examples) {
  EXPECT_TRUE(is_maximal_word(g_quit(), w("cs!quit cs?quit sc!bye sc?bye", kCS)));
  EXPECT_FALSE(is_maximal_word(g_quit(), w("cs!quit", kCS)));
  EXPECT_TRUE(is_maximal_word(GChor::empty(), Word{}));
  EXPECT_FALSE(is_maximal_word(GChor::loop(ia("A", "B", "m")), w("AB!m AB?m")));
  EXPECT_TRUE(is_prefix_word(GChor::loop(ia("A", "B", "m")), w("AB!m AB!m AB?m AB!m AB?m")));
}

TEST(Alphabet, Examples) {
  EXPECT_EQ(alphabet(ia("A", "B", "m")), (std::set<Label>{parse_label("AB!m", kABC), parse_label("AB?m", kABC)}));
  EXPECT_EQ(alphabet(g_quit()).size(), 4u);
  EXPECT_EQ(alphabet(g_quit()), (std::set<Label>{parse_label("cs!quit", kCS), parse_label("cs?quit", kCS),
                                                 parse_label("sc!bye", kCS), parse_label("sc?bye", kCS)}));
  EXPECT_TRUE(alphabet(GChor::empty()).empty());
}

TEST(Language, EmptyIsNeutral) {
  gen::Rng rng(13);
  std::vector<ParticipantId> ps{ParticipantId("A"), ParticipantId("B"), ParticipantId("C")};
  std::vector<MessageType> ms{MessageType("m"), MessageType("n")};
  oracle::LanguageOracle lang;
  for (int i = 0; i < 60; ++i) {
    GChor g = gen::random_gchor(rng, ps, ms, 3);
    std::vector<Word> seeds(lang.complete_words(g).begin(), lang.complete_words(g).end());
    auto alpha_set = alphabet(g);
    std::vector<Label> alpha(alpha_set.begin(), alpha_set.end());
    for (const GChor& h : {GChor::seq(GChor::empty(), g), GChor::seq(g, GChor::empty()),
                           GChor::par(g, GChor::empty()), GChor::choice(g, GChor::empty())}) {
      for (int j = 0; j < 10; ++j) {
        Word x = gen::random_word(rng, alpha, seeds, 8);
        EXPECT_EQ(is_prefix_word(h, x), is_prefix_word(g, x)) << to_string(h) << " / " << to_string(x);
      }
    }
  }
}

TEST(Language, PrefixClosedAndContainsEmpty) {
  gen::Rng rng(17);
  std::vector<ParticipantId> ps{ParticipantId("A"), ParticipantId("B"), ParticipantId("C")};
  std::vector<MessageType> ms{MessageType("m"), MessageType("n")};
  oracle::LanguageOracle lang;
  for (int i = 0; i < 80; ++i) {
    GChor g = gen::random_gchor(rng, ps, ms, 3);
    if (i % 2) g = GChor::seq(GChor::loop(g), gen::random_gchor(rng, ps, ms, 2));
    EXPECT_TRUE(is_prefix_word(g, Word{}));
    auto alpha_set = alphabet(g);
    std::vector<Label> alpha(alpha_set.begin(), alpha_set.end());
    for (int j = 0; j < 10; ++j) {
      Word x = gen::random_word(rng, alpha, {}, 7);
      if (!is_prefix_word(g, x)) continue;
      for (std::size_t n = 0; n < x.size(); ++n) EXPECT_TRUE(is_prefix_word(g, Word(x.begin(), x.begin() + n)));
      if (is_maximal_word(g, x)) {
        for (const auto& l : alpha) {
          Word y = x;
          y.push_back(l);
          EXPECT_FALSE(is_prefix_word(g, y));
        }
      }
    }
  }
}

TEST(Language, AgreesWithLinearisationOracle) {
  gen::Rng rng(19);
  std::vector<ParticipantId> ps{ParticipantId("A"), ParticipantId("B"), ParticipantId("C")};
  std::vector<MessageType> ms{MessageType("m"), MessageType("n")};
  oracle::LanguageOracle lang;
  for (int i = 0; i < 60; ++i) {
    GChor g = gen::random_gchor(rng, ps, ms, 4);
    std::vector<Word> seeds(lang.complete_words(g).begin(), lang.complete_words(g).end());
    auto alpha_set = alphabet(g);
    std::vector<Label> alpha(alpha_set.begin(), alpha_set.end());
    for (int j = 0; j < 20; ++j) {
      Word x = gen::random_word(rng, alpha, seeds, 10);
      EXPECT_EQ(is_prefix_word(g, x), lang.in_prefix_language(g, x)) << to_string(g) << " / " << to_string(x);
      EXPECT_EQ(is_maximal_word(g, x), lang.in_maximal_language(g, x)) << to_string(g) << " / " << to_string(x);
    }
  }
}

TEST(Language, UnfoldSufficiency) {
  gen::Rng rng(23);
  std::vector<ParticipantId> ps{ParticipantId("A"), ParticipantId("B")};
  std::vector<MessageType> ms{MessageType("m"), MessageType("n")};
  for (int i = 0; i < 30; ++i) {
    GChor g = GChor::loop(gen::random_gchor(rng, ps, ms, 2));
    auto alpha_set = alphabet(g);
    std::vector<Label> alpha(alpha_set.begin(), alpha_set.end());
    for (int j = 0; j < 10; ++j) {
      Word x = gen::random_word(rng, alpha, {}, 5);
      bool deep = false;
      for (const auto& p : pomsets(g, x.size() + 3)) {
        oracle::OraclePomset op{p.labels, {}};
        for (std::size_t a = 0; a < p.size(); ++a)
          for (std::size_t b = 0; b < p.size(); ++b)
            if (p.precedes(a, b)) op.order.insert({a, b});
        if ((deep = oracle::prefix_linearisable(op, x))) break;
      }
      EXPECT_EQ(is_prefix_word(g, x), deep) << to_string(g) << " / " << to_string(x);
    }
  }
}
