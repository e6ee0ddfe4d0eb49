#pragma once

#include "lexer.hpp"
#include "qosmc/choreography.hpp"

namespace qosmc::detail {

// Parses a choreography expression from the current position and stops at
// the first token that cannot continue it (e.g. '>' or ']' inside QL).
GChor parse_gchor_expr(TokenStream& tokens, const GChorBindings& bindings);

}  // namespace qosmc::detail
