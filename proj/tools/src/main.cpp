#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"

using namespace qosmc::cli;

int main(int argc, char** argv) {
  CLI::App app{"qosmc: bounded QoS model checking of communicating machines"};
  app.require_subcommand(1);

  const std::map<std::string, Format> formats{{"text", Format::text}, {"json", Format::json}};

  CheckArgs check;
  check.solver = qosmc::SolverConfig::from_environment();
  std::string mode = "valid";
  long timeout_ms = check.solver.timeout.count();
  auto* c = app.add_subcommand("check", "Bounded satisfiability or validity of a QL formula");
  c->add_option("system", check.system_file, "System file (.cfsm)")->required()->check(CLI::ExistingFile);
  c->add_option("formula", check.formula_file, "Formula file (.ql)")->check(CLI::ExistingFile);
  auto* expr = c->add_option("-e,--expr", "Formula given inline instead of a file")->type_name("TEXT");
  c->add_option("-k", check.k, "Run length bound")->required();
  c->add_option("--mode", mode, "sat or valid")->check(CLI::IsMember({"sat", "valid"}))->capture_default_str();
  c->add_option("--solver", check.solver.path, "Solver binary (env QOSMC_SOLVER)")->capture_default_str();
  c->add_option("--timeout-ms", timeout_ms, "Per-query solver timeout")->capture_default_str();
  c->add_option("-j,--threads", check.threads, "Workers checking runs of one length")->capture_default_str();
  c->add_flag("--require-empty-buffers", check.require_empty_buffers,
              "Final configurations must also have empty channels");
  c->add_flag("--aggregates", check.per_prefix_aggregates, "Print aggregates for every witness prefix");
  c->add_option("--format", check.format, "text or json")->transform(CLI::CheckedTransformer(formats))->option_text("{text,json} [text]");

  RunsArgs runs;
  auto* r = app.add_subcommand("runs", "List runs up to a length bound");
  r->add_option("system", runs.system_file, "System file (.cfsm)")->required()->check(CLI::ExistingFile);
  r->add_option("-k", runs.k, "Run length bound")->required();
  r->add_flag("--require-empty-buffers", runs.require_empty_buffers,
              "Final configurations must also have empty channels");
  r->add_option("--format", runs.format, "text or json")->transform(CLI::CheckedTransformer(formats))->option_text("{text,json} [text]");

  MemberArgs member;
  std::string member_mode = "prefix";
  auto* m = app.add_subcommand("member", "Language membership of a trace");
  m->add_option("choreography", member.gchor_file, "Choreography file (.gc)")->required()->check(CLI::ExistingFile);
  m->add_option("trace", member.trace, "Space-separated labels, e.g. \"cs!quit cs?quit\"")->required();
  m->add_option("--mode", member_mode, "prefix or maximal")->check(CLI::IsMember({"prefix", "maximal"}))->capture_default_str();
  m->add_option("--format", member.format, "text or json")->transform(CLI::CheckedTransformer(formats))->option_text("{text,json} [text]");

  AggregateArgs agg;
  auto* a = app.add_subcommand("aggregate", "Print the QoS context of a run");
  a->add_option("system", agg.system_file, "System file (.cfsm)")->required()->check(CLI::ExistingFile);
  a->add_option("trace", agg.trace, "Space-separated labels (may be empty)")->required();
  a->add_option("--format", agg.format, "text or json")->transform(CLI::CheckedTransformer(formats))->option_text("{text,json} [text]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  if (*c) {
    check.valid_mode = mode == "valid";
    check.solver.timeout = std::chrono::milliseconds(timeout_ms);
    if (*expr) check.formula_text = expr->as<std::string>();
    if (check.formula_file.empty() == !check.formula_text) {
      std::cerr << "error: give exactly one of a formula file or --expr\n";
      return kExitInput;
    }
    return cmd_check(check, std::cout, std::cerr);
  }
  if (*r) return cmd_runs(runs, std::cout, std::cerr);
  if (*m) {
    member.maximal = member_mode == "maximal";
    return cmd_member(member, std::cout, std::cerr);
  }
  return cmd_aggregate(agg, std::cout, std::cerr);
}
