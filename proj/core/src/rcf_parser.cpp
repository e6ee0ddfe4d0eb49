#include "rcf_parser.hpp"

#include <algorithm>
#include <array>

#include "qosmc/error.hpp"

namespace qosmc::detail {

namespace {
constexpr std::array<std::string_view, 5> kReserved = {"exists", "forall", "true", "U", "let"};
}

bool RcfParser::is_reserved(const std::string& word) {
  return std::find(kReserved.begin(), kReserved.end(), word) != kReserved.end();
}

Formula RcfParser::formula() { return implication(); }

Formula RcfParser::implication() {
  Formula lhs = disjunction();
  if (tokens_.accept("->")) return Formula::implies(lhs, implication());
  return lhs;
}

Formula RcfParser::disjunction() {
  Formula lhs = conjunction();
  while (tokens_.accept("||")) lhs = Formula::disj(lhs, conjunction());
  return lhs;
}

Formula RcfParser::conjunction() {
  Formula lhs = unary();
  while (tokens_.accept("&&")) lhs = Formula::conj(lhs, unary());
  return lhs;
}

Formula RcfParser::unary() {
  if (tokens_.accept("!")) return Formula::neg(unary());
  if (tokens_.is_word("exists") || tokens_.is_word("forall")) return quantified();
  return primary();
}

Formula RcfParser::quantified() {
  bool existential = tokens_.next().text == "exists";
  const Token& var_tok = tokens_.peek();
  std::string var = tokens_.expect_identifier("bound variable");
  if (is_reserved(var)) tokens_.fail_at("reserved word '" + var + "' used as variable", var_tok.pos);
  if (registry_.contains(Attribute(var))) {
    tokens_.fail_at("bound variable '" + var + "' shadows an attribute", var_tok.pos);
  }
  if (std::find(bound_.begin(), bound_.end(), var) != bound_.end()) {
    tokens_.fail_at("variable '" + var + "' is already bound", var_tok.pos);
  }
  if (!is_mangle_safe(var)) tokens_.fail_at("invalid variable name '" + var + "'", var_tok.pos);
  tokens_.expect(".");
  bound_.push_back(var);
  Formula body = formula();
  bound_.pop_back();
  return existential ? Formula::exists(var, body) : Formula::forall(var, body);
}

Formula RcfParser::atom() {
  if (tokens_.is_word("exists") || tokens_.is_word("forall")) return quantified();
  if (tokens_.is_word("true")) {
    tokens_.next();
    return Formula::truth();
  }
  return comparison_chain();
}

Formula RcfParser::primary() {
  if (tokens_.is_word("true")) {
    tokens_.next();
    return Formula::truth();
  }
  if (tokens_.is_punct("(")) {
    // "(" opens either a term ("(a + b) <= 3") or a nested formula; try the
    // comparison reading first and fall back.
    std::size_t mark = tokens_.mark();
    try {
      return comparison_chain();
    } catch (const ParseError& first) {
      tokens_.reset(mark);
      try {
        tokens_.expect("(");
        Formula inner = formula();
        tokens_.expect(")");
        return inner;
      } catch (const ParseError& second) {
        throw first.position().offset > second.position().offset ? first : second;
      }
    }
  }
  return comparison_chain();
}

bool RcfParser::at_comparison_op() const {
  return tokens_.is_punct("<") || tokens_.is_punct("<=") || tokens_.is_punct("=") ||
         tokens_.is_punct(">=") || tokens_.is_punct(">");
}

CompareOp RcfParser::comparison_op() {
  const std::string op = tokens_.next().text;
  if (op == "<") return CompareOp::lt;
  if (op == "<=") return CompareOp::le;
  if (op == "=") return CompareOp::eq;
  if (op == ">=") return CompareOp::ge;
  return CompareOp::gt;
}

Formula RcfParser::comparison_chain() {
  Term lhs = term();
  if (!at_comparison_op()) tokens_.fail("expected comparison operator");
  CompareOp op = comparison_op();
  Term rhs = term();
  Formula result = Formula::compare(op, lhs, rhs);
  while (at_comparison_op()) {
    CompareOp next_op = comparison_op();
    Term next = term();
    result = Formula::conj(result, Formula::compare(next_op, rhs, next));
    rhs = next;
  }
  return result;
}

Term RcfParser::term() {
  Term lhs = product();
  while (tokens_.is_punct("+") || tokens_.is_punct("-")) {
    bool plus = tokens_.next().text == "+";
    Term rhs = product();
    lhs = plus ? Term::add(lhs, rhs) : Term::sub(lhs, rhs);
  }
  return lhs;
}

Term RcfParser::product() {
  Term lhs = unary_term();
  while (tokens_.accept("*")) lhs = Term::mul(lhs, unary_term());
  return lhs;
}

Term RcfParser::unary_term() {
  if (tokens_.accept("-")) return Term::neg(unary_term());
  return term_atom();
}

Term RcfParser::term_atom() {
  const Token& tok = tokens_.peek();
  if (tok.kind == TokenKind::number) {
    tokens_.next();
    return Term::constant(parse_decimal(tok.text));
  }
  if (tok.kind == TokenKind::identifier) {
    if (is_reserved(tok.text)) tokens_.fail("expected term");
    tokens_.next();
    if (std::find(bound_.begin(), bound_.end(), tok.text) != bound_.end()) {
      return Term::variable(tok.text);
    }
    if (registry_.contains(Attribute(tok.text))) return Term::attribute(Attribute(tok.text));
    tokens_.fail_at("unknown attribute '" + tok.text + "'", tok.pos);
  }
  if (tokens_.accept("(")) {
    Term inner = term();
    tokens_.expect(")");
    return inner;
  }
  tokens_.fail("expected term");
}

}  // namespace qosmc::detail
