#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "qosmc/aggregation.hpp"
#include "qosmc/choreography.hpp"
#include "qosmc/logic.hpp"
#include "qosmc/machines.hpp"
#include "qosmc/solver.hpp"

using namespace qosmc;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(QOSMC_MODELS_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const QosSystem& pop() {
  static const QosSystem s = parse_system(slurp("pop.cfsm"));
  return s;
}

}  // namespace

static void BM_EnumerateRuns(benchmark::State& state) {
  const QosSystem& s = pop();
  for (auto _ : state) {
    std::size_t n = 0;
    enumerate_runs(s, static_cast<std::size_t>(state.range(0)), [&](const qosmc::Run&) {
      ++n;
      return true;
    });
    benchmark::DoNotOptimize(n);
  }
}
BENCHMARK(BM_EnumerateRuns)->Arg(10)->Arg(20)->Arg(30);

// Prefix membership of a POP session against the looping choreography.
static void BM_PrefixWord(benchmark::State& state) {
  GChor g = parse_gchor(slurp("pop.gc"));
  std::string text = "cs!helo cs?helo sc!int sc?int";
  for (int i = 0; i < state.range(0); ++i) text += " cs!read cs?read sc!size sc?size";
  Word w = parse_word(text, pop().participant_ids());
  for (auto _ : state) benchmark::DoNotOptimize(is_prefix_word(g, w));
}
BENCHMARK(BM_PrefixWord)->Arg(1)->Arg(3)->Arg(6);

static void BM_Aggregate(benchmark::State& state) {
  const QosSystem& s = pop();
  std::string text = "cs!helo cs?helo sc!int sc?int";
  for (int i = 0; i < 3; ++i) {
    text += " cs!read cs?read sc!size sc?size cs!retr cs?retr sc!msg sc?msg cs!ack cs?ack";
  }
  qosmc::Run r = qosmc::Run::replay(s, parse_word(text, s.participant_ids()));
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(s, r));
}
BENCHMARK(BM_Aggregate);

static void BM_EncodeQuery(benchmark::State& state) {
  const QosSystem& s = pop();
  qosmc::Run r = qosmc::Run::replay(s, parse_word("cs!helo cs?helo sc!int sc?int cs!read", s.participant_ids()));
  QosContext ctx = aggregate(s, r);
  Formula psi = parse_rcf_formula("c <= t * 10 && m <= 5", s.registry());
  for (auto _ : state) benchmark::DoNotOptimize(encode_query(ctx, psi));
}
BENCHMARK(BM_EncodeQuery);

// End to end, including solver start-up; no atom is queried at this bound.
static void BM_CheckPop(benchmark::State& state) {
  const QosSystem& s = pop();
  QlFormula phi = parse_ql(slurp("pop_phi.ql"), s.registry());
  for (auto _ : state) {
    Entailer e(SolverConfig::from_environment());
    benchmark::DoNotOptimize(check_valid(phi, s, static_cast<std::size_t>(state.range(0)), e));
  }
}
BENCHMARK(BM_CheckPop)->Arg(20)->Arg(30)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
