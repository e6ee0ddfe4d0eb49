#include "qosmc/aggregation.hpp"

#include <sstream>
#include <tuple>

#include "qosmc/error.hpp"

namespace qosmc {

bool is_run_of(const QosSystem& s, const Run& r) {
  if (!(r.start() == initial_configuration(s))) return false;
  for (std::size_t i = 0; i < r.length(); ++i) {
    auto next = step(s, r.configuration(i), r.label(i));
    if (!next || !(*next == r.configuration(i + 1))) return false;
  }
  return true;
}

QosContext aggregate(const QosSystem& s, const Run& r) {
  if (!is_run_of(s, r)) throw ValidationError("run is not generated by the system");

  std::set<std::pair<ParticipantId, StateId>> visited;
  for (std::size_t i = 0; i <= r.length(); ++i) {
    for (const auto& [p, q] : r.configuration(i).control) visited.emplace(p, q);
  }

  QosContext ctx;
  for (const auto& [p, q] : visited) {
    for (const auto& f : s.machine(p).qos(q).formulas) ctx.local.push_back(instantiate(f, p, q));
  }

  const Configuration& last = r.last();
  for (const auto& [attr, kind] : s.registry().entries()) {
    AggregateEquation eq{attr, kind, {}};
    for (std::size_t i = 0; i < r.length(); ++i) {
      const ParticipantId& actor = subject(r.label(i));
      eq.operands.push_back({attr, actor, r.configuration(i).state_of(actor)});
    }
    for (const auto& [p, q] : last.control) eq.operands.push_back({attr, p, q});
    ctx.aggregates.emplace(attr, std::move(eq));
  }

  for (const auto& f : ctx.local) {
    auto syms = instantiated_symbols(f);
    ctx.symbols.insert(syms.begin(), syms.end());
  }
  for (const auto& [attr, eq] : ctx.aggregates) {
    ctx.symbols.insert(eq.operands.begin(), eq.operands.end());
  }
  return ctx;
}

std::string to_string(const AggregateEquation& e) {
  std::ostringstream os;
  os << e.attribute << " = ";
  switch (e.kind) {
    case AggregatorKind::sum:
    case AggregatorKind::product: {
      const char* op = e.kind == AggregatorKind::sum ? " + " : " * ";
      for (std::size_t i = 0; i < e.operands.size(); ++i) {
        os << (i ? op : "") << to_string(e.operands[i]);
      }
      break;
    }
    case AggregatorKind::max:
    case AggregatorKind::min:
      os << to_string(e.kind) << '{';
      for (std::size_t i = 0; i < e.operands.size(); ++i) {
        os << (i ? ", " : "") << to_string(e.operands[i]);
      }
      os << '}';
      break;
  }
  return os.str();
}

std::string to_string(const QosContext& ctx) {
  std::ostringstream os;
  os << "local:\n";
  for (const auto& f : ctx.local) os << "  " << f << '\n';
  os << "aggregates:\n";
  for (const auto& [attr, eq] : ctx.aggregates) os << "  " << to_string(eq) << '\n';
  return os.str();
}

}  // namespace qosmc
