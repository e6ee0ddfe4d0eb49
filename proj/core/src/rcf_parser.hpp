#pragma once

#include <string>
#include <vector>

#include "lexer.hpp"
#include "qosmc/qos_spec.hpp"

namespace qosmc::detail {

// Recursive-descent parser for RCF terms and formulas over a shared token
// stream, so the QL parser can embed atoms.
class RcfParser {
 public:
  RcfParser(TokenStream& tokens, const AttributeRegistry& registry)
      : tokens_(tokens), registry_(registry) {}

  Formula formula();
  // A single comparison (possibly chained, e.g. "1 <= t <= 6") or a
  // quantified formula; used by the QL parser for atoms.
  Formula atom();
  Term term();

  static bool is_reserved(const std::string& word);

 private:
  Formula implication();
  Formula disjunction();
  Formula conjunction();
  Formula unary();
  Formula quantified();
  Formula primary();
  Formula comparison_chain();
  Term product();
  Term unary_term();
  Term term_atom();
  bool at_comparison_op() const;
  CompareOp comparison_op();

  TokenStream& tokens_;
  const AttributeRegistry& registry_;
  std::vector<std::string> bound_;
};

}  // namespace qosmc::detail
