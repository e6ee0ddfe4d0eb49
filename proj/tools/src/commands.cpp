#include "commands.hpp"

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "qosmc/aggregation.hpp"
#include "qosmc/choreography.hpp"
#include "qosmc/error.hpp"
#include "qosmc/logic.hpp"
#include "qosmc/machines.hpp"

namespace qosmc::cli {

using json = nlohmann::ordered_json;

namespace {

class InputError : public Error {
 public:
  using Error::Error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Parse errors are reported against the file they came from.
template <typename F>
auto parsing(const std::string& origin, F&& f) {
  try {
    return f();
  } catch (const ParseError& e) {
    throw InputError(origin + ":" + e.what());
  }
}

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

QosSystem load_system(const std::string& path, std::ostream& err) {
  std::string text = read_file(path);
  SystemDiagnostics diagnostics;
  QosSystem s = parsing(path, [&] { return parse_system(text, &diagnostics); });
  for (const auto& w : diagnostics.warnings) err << path << ": warning: " << w << "\n";
  return s;
}

json labels_json(const Word& w) {
  json out = json::array();
  for (const auto& l : w) out.push_back(to_string(l));
  return out;
}

json configuration_json(const Configuration& c) {
  json control = json::object();
  for (const auto& [p, q] : c.control) control[p.str()] = q.str();
  json buffers = json::object();
  for (const auto& [ch, msgs] : c.buffers) {
    json queue = json::array();
    for (const auto& m : msgs) queue.push_back(m.str());
    buffers[ch.from.str() + ch.to.str()] = queue;
  }
  return json{{"control", control}, {"buffers", buffers}};
}

json context_json(const QosContext& ctx) {
  json local = json::array();
  for (const auto& f : ctx.local) local.push_back(to_string(f));
  json aggregates = json::object();
  for (const auto& [a, eq] : ctx.aggregates) {
    json operands = json::array();
    for (const auto& s : eq.operands) operands.push_back(to_string(s));
    aggregates[a.str()] = json{{"aggregator", to_string(eq.kind)},
                               {"operands", operands},
                               {"equation", to_string(eq)}};
  }
  return json{{"local", local}, {"aggregates", aggregates}};
}

std::string word_text(const Word& w) { return w.empty() ? "ε" : to_string(w); }

}  // namespace

int cmd_check(const CheckArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    QosSystem s = load_system(args.system_file, err);
    QlFormula phi = args.formula_text
                        ? parsing("<expr>", [&] { return parse_ql(*args.formula_text, s.registry()); })
                        : parsing(args.formula_file, [&] {
                            return parse_ql(read_file(args.formula_file), s.registry());
                          });

    Entailer entailer(args.solver);
    CheckOptions options;
    options.require_empty_buffers = args.require_empty_buffers;
    options.threads = args.threads;

    auto t0 = std::chrono::steady_clock::now();
    Verdict v = args.valid_mode ? check_valid(phi, s, args.k, entailer, options)
                                : q_sat(phi, s, args.k, entailer, options);
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - t0);
    Entailer::Stats stats = entailer.stats();

    const bool positive = v.result == VerdictKind::sat || v.result == VerdictKind::valid_up_to_bound;

    if (args.format == Format::json) {
      json report;
      report["verdict"] = to_string(v.result);
      report["mode"] = args.valid_mode ? "valid" : "sat";
      report["bound"] = v.bound;
      report["formula"] = to_string(phi);
      if (v.witness) {
        const Run& r = *v.witness;
        json steps = json::array();
        for (std::size_t i = 0; i < r.length(); ++i) {
          steps.push_back(json{{"label", to_string(r.label(i))},
                               {"configuration", configuration_json(r.configuration(i + 1))}});
        }
        report["trace"] = json{{"labels", labels_json(trace(r))},
                               {"initial", configuration_json(r.start())},
                               {"steps", steps}};
        if (args.per_prefix_aggregates) {
          json prefixes = json::array();
          for (std::size_t n = 0; n <= r.length(); ++n) {
            json eqs = json::object();
            for (const auto& [a, eq] : aggregate(s, r.prefix(n)).aggregates) {
              eqs[a.str()] = to_string(eq);
            }
            prefixes.push_back(json{{"length", n}, {"aggregates", eqs}});
          }
          report["aggregates"] = prefixes;
        }
      } else {
        report["trace"] = nullptr;
      }
      report["statistics"] = json{{"atom_queries", stats.queries},
                                  {"solver_calls", stats.solver_calls},
                                  {"cache_hits", stats.cache_hits},
                                  {"wall_clock_ms", elapsed.count()}};
      out << report.dump(2) << "\n";
    } else {
      out << "verdict: " << to_string(v.result) << "\n";
      out << "bound: " << v.bound << "\n";
      if (v.witness) {
        const Run& r = *v.witness;
        out << (v.result == VerdictKind::counterexample ? "counterexample" : "witness") << ": "
            << word_text(trace(r)) << "\n";
        out << "  0  " << to_string(r.start()) << "\n";
        for (std::size_t i = 0; i < r.length(); ++i) {
          out << "  " << i + 1 << "  " << to_string(r.label(i)) << "  "
              << to_string(r.configuration(i + 1)) << "\n";
        }
        if (args.per_prefix_aggregates) {
          for (std::size_t n = 0; n <= r.length(); ++n) {
            out << "aggregates at " << n << ":\n";
            for (const auto& [a, eq] : aggregate(s, r.prefix(n)).aggregates) {
              out << "  " << to_string(eq) << "\n";
            }
          }
        }
      }
      out << "statistics: " << stats.queries << " atom queries, " << stats.solver_calls
          << " solver calls, " << stats.cache_hits << " cache hits, " << elapsed.count()
          << " ms\n";
    }
    return positive ? kExitOk : kExitNegative;
  });
}

int cmd_runs(const RunsArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    QosSystem s = load_system(args.system_file, err);
    json runs = json::array();
    std::size_t count = 0;
    enumerate_runs(s, args.k, [&](const Run& r) {
      ++count;
      bool fin = is_final(s, r.last(), args.require_empty_buffers);
      if (args.format == Format::json) {
        runs.push_back(json{{"trace", labels_json(trace(r))}, {"final", fin}});
      } else {
        out << r.length() << "\t" << word_text(trace(r)) << (fin ? "\tfinal" : "") << "\n";
      }
      return true;
    });
    if (args.format == Format::json) {
      out << json{{"bound", args.k}, {"count", count}, {"runs", runs}}.dump(2) << "\n";
    } else {
      out << count << " runs\n";
    }
    return kExitOk;
  });
}

int cmd_member(const MemberArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    GChor g = parsing(args.gchor_file, [&] { return parse_gchor(read_file(args.gchor_file)); });
    Word w = parsing("<trace>", [&] { return parse_word(args.trace, participants(g)); });

    bool prefix = is_prefix_word(g, w);
    bool result = args.maximal ? prefix && is_maximal_word(g, w) : prefix;

    std::string explanation;
    json detail;
    if (!prefix) {
      std::size_t n = 0;
      while (n < w.size() && is_prefix_word(g, Word(w.begin(), w.begin() + n + 1))) ++n;
      explanation = "label " + std::to_string(n + 1) + " (" + to_string(w[n]) +
                    ") cannot follow the first " + std::to_string(n) + " labels";
      detail = json{{"accepted_prefix", n}, {"rejected_label", to_string(w[n])}};
    } else if (args.maximal && !result) {
      Word ext;
      for (const auto& l : alphabet(g)) {
        Word longer = w;
        longer.push_back(l);
        if (is_prefix_word(g, longer)) ext.push_back(l);
      }
      explanation = "extendable by " + to_string(ext);
      detail = json{{"extensions", labels_json(ext)}};
    } else {
      explanation = args.maximal ? "maximal word of the choreography"
                                 : "prefix of some linearisation";
    }

    if (args.format == Format::json) {
      json report{{"mode", args.maximal ? "maximal" : "prefix"},
                  {"trace", labels_json(w)},
                  {"member", result},
                  {"explanation", explanation}};
      if (!detail.is_null()) report["detail"] = detail;
      out << report.dump(2) << "\n";
    } else {
      out << (result ? "member" : "not a member") << ": " << explanation << "\n";
    }
    return result ? kExitOk : kExitNegative;
  });
}

int cmd_aggregate(const AggregateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    QosSystem s = load_system(args.system_file, err);
    Word w = parsing("<trace>", [&] { return parse_word(args.trace, s.participant_ids()); });
    Run r = Run::replay(s, w);
    QosContext ctx = aggregate(s, r);
    if (args.format == Format::json) {
      json report = context_json(ctx);
      report["trace"] = labels_json(w);
      out << report.dump(2) << "\n";
    } else {
      out << to_string(ctx);
    }
    return kExitOk;
  });
}

}  // namespace qosmc::cli
