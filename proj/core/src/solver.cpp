#include "qosmc/solver.hpp"

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <csignal>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <mutex>
#include <set>
#include <sstream>
#include <utility>

#include "qosmc/error.hpp"

extern char** environ;

namespace qosmc {

// ---------------------------------------------------------------------------
// Configuration

SolverConfig SolverConfig::from_environment() {
  SolverConfig config;
  if (const char* path = std::getenv("QOSMC_SOLVER"); path && *path) config.path = path;
  if (const char* ms = std::getenv("QOSMC_SOLVER_TIMEOUT_MS"); ms && *ms) {
    config.timeout = std::chrono::milliseconds(std::stol(ms));
  }
  return config;
}

std::vector<std::string> SolverConfig::effective_args() const {
  if (!args.empty()) return args;
  const std::string name = std::filesystem::path(path).filename().string();
  if (name.rfind("z3", 0) == 0) return {"-in", "-smt2"};
  if (name.rfind("cvc5", 0) == 0 || name.rfind("cvc4", 0) == 0) return {"--lang=smt2"};
  return {};
}

// ---------------------------------------------------------------------------
// Encoding

namespace {

const std::set<std::string> kSmtReserved = {
    "and", "or",  "not", "xor",    "ite",    "distinct", "true", "false", "let",    "exists",
    "forall", "match", "par", "as", "abs", "div", "mod", "to_real", "to_int", "is_int",
    "Real",   "Int",   "Bool", "select", "store", "assert", "push", "pop"};

std::string quote_if_reserved(const std::string& name) {
  return kSmtReserved.count(name) ? "|" + name + "|" : name;
}

std::string smt_constant(const Rational& value) {
  if (value < 0) return "(- " + smt_constant(-value) + ")";
  if (is_terminating_decimal(value)) {
    std::string d = to_decimal(value);
    if (d.find('.') == std::string::npos) d += ".0";
    return d;
  }
  return "(/ " + value.get_num().get_str() + ".0 " + value.get_den().get_str() + ".0)";
}

void encode(std::ostream& os, const Term& t) {
  switch (t.kind()) {
    case Term::Kind::constant: os << smt_constant(t.value()); return;
    case Term::Kind::attribute: os << smt_symbol(t.attribute()); return;
    case Term::Kind::instance: os << smt_symbol(t.instance()); return;
    case Term::Kind::variable: os << quote_if_reserved(t.variable()); return;
    case Term::Kind::neg:
      os << "(- ";
      encode(os, t.operand());
      os << ')';
      return;
    case Term::Kind::add:
    case Term::Kind::sub:
    case Term::Kind::mul:
      os << '(' << (t.kind() == Term::Kind::add ? "+" : t.kind() == Term::Kind::sub ? "-" : "*")
         << ' ';
      encode(os, t.lhs());
      os << ' ';
      encode(os, t.rhs());
      os << ')';
      return;
  }
}

void encode(std::ostream& os, const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::compare:
      os << '(' << to_string(f.op()) << ' ';
      encode(os, f.left_term());
      os << ' ';
      encode(os, f.right_term());
      os << ')';
      return;
    case Formula::Kind::neg:
      os << "(not ";
      encode(os, f.operand());
      os << ')';
      return;
    case Formula::Kind::conj:
    case Formula::Kind::disj:
    case Formula::Kind::implies:
      os << '('
         << (f.kind() == Formula::Kind::conj ? "and" : f.kind() == Formula::Kind::disj ? "or" : "=>")
         << ' ';
      encode(os, f.lhs());
      os << ' ';
      encode(os, f.rhs());
      os << ')';
      return;
    case Formula::Kind::exists:
    case Formula::Kind::forall:
      os << '(' << (f.kind() == Formula::Kind::exists ? "exists" : "forall") << " (("
         << quote_if_reserved(f.variable()) << " Real)) ";
      encode(os, f.body());
      os << ')';
      return;
  }
}

bool is_constant(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::constant: return true;
    case Term::Kind::neg: return is_constant(t.operand());
    case Term::Kind::add:
    case Term::Kind::sub:
    case Term::Kind::mul: return is_constant(t.lhs()) && is_constant(t.rhs());
    default: return false;
  }
}

bool is_linear(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::neg: return is_linear(t.operand());
    case Term::Kind::add:
    case Term::Kind::sub: return is_linear(t.lhs()) && is_linear(t.rhs());
    case Term::Kind::mul:
      return is_linear(t.lhs()) && is_linear(t.rhs()) && (is_constant(t.lhs()) || is_constant(t.rhs()));
    default: return true;
  }
}

bool is_linear(const Formula& f) {
  switch (f.kind()) {
    case Formula::Kind::compare: return is_linear(f.left_term()) && is_linear(f.right_term());
    case Formula::Kind::neg: return is_linear(f.operand());
    case Formula::Kind::exists:
    case Formula::Kind::forall: return is_linear(f.body());
    default: return is_linear(f.lhs()) && is_linear(f.rhs());
  }
}

std::string nary(const std::string& op, const std::vector<std::string>& args) {
  if (args.size() == 1) return args.front();
  std::string out = "(" + op;
  for (const auto& a : args) out += " " + a;
  return out + ")";
}

std::string encode_equation(const AggregateEquation& eq) {
  const std::string lhs = smt_symbol(eq.attribute);
  std::vector<std::string> operands;
  for (const auto& s : eq.operands) operands.push_back(smt_symbol(s));
  if (operands.empty()) throw Error("aggregate for " + eq.attribute.str() + " has no operands");

  switch (eq.kind) {
    case AggregatorKind::sum: return "(= " + lhs + " " + nary("+", operands) + ")";
    case AggregatorKind::product: return "(= " + lhs + " " + nary("*", operands) + ")";
    case AggregatorKind::max:
    case AggregatorKind::min: {
      const std::string bound = eq.kind == AggregatorKind::max ? ">=" : "<=";
      std::vector<std::string> bounds;
      std::vector<std::string> choices;
      for (const auto& o : operands) {
        bounds.push_back("(" + bound + " " + lhs + " " + o + ")");
        choices.push_back("(= " + lhs + " " + o + ")");
      }
      bounds.push_back(nary("or", choices));
      return nary("and", bounds);
    }
  }
  return {};
}

}  // namespace

std::string smt_symbol(const InstantiatedSymbol& s) {
  return s.attribute.str() + "__" + s.participant.str() + "__" + s.state.str();
}

std::string smt_symbol(const Attribute& a) { return quote_if_reserved(a.str()); }

std::string encode_query(const QosContext& ctx, const Formula& psi) {
  for (const auto& a : free_attributes(psi)) {
    if (!ctx.aggregates.count(a)) {
      throw ValidationError("attribute '" + a.str() + "' has no aggregate in the context");
    }
  }
  for (const auto& s : instantiated_symbols(psi)) {
    if (!ctx.symbols.count(s)) {
      throw ValidationError("symbol " + to_string(s) + " is not declared in the context");
    }
  }

  bool quantified = has_quantifier(psi);
  bool linear = is_linear(psi);
  for (const auto& f : ctx.local) {
    quantified = quantified || has_quantifier(f);
    linear = linear && is_linear(f);
  }
  for (const auto& [attr, eq] : ctx.aggregates) {
    linear = linear && (eq.kind != AggregatorKind::product || eq.operands.size() < 2);
  }

  std::ostringstream os;
  os << "(set-logic " << (quantified ? "" : "QF_") << (linear ? "LRA" : "NRA") << ")\n";
  for (const auto& [attr, eq] : ctx.aggregates) {
    os << "(declare-const " << smt_symbol(attr) << " Real)\n";
  }
  for (const auto& s : ctx.symbols) os << "(declare-const " << smt_symbol(s) << " Real)\n";
  for (const auto& f : ctx.local) {
    os << "(assert ";
    encode(os, f);
    os << ")\n";
  }
  for (const auto& [attr, eq] : ctx.aggregates) {
    os << "(assert " << encode_equation(eq) << ")\n";
  }
  os << "(assert (not ";
  encode(os, psi);
  os << "))\n";
  os << "(check-sat)\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Process plumbing

namespace {

void ignore_sigpipe_once() {
  static std::once_flag flag;
  std::call_once(flag, [] { std::signal(SIGPIPE, SIG_IGN); });
}

struct Fd {
  int fd = -1;
  Fd() = default;
  explicit Fd(int f) : fd(f) {}
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }
  void reset() {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

namespace {

constexpr const char* kSentinel = "qosmc-end";

SolverError closed_early(const std::string& output) {
  return SolverError(SolverError::Kind::protocol,
                     "solver exited before answering: '" + trim(output) + "'");
}

}  // namespace

SolverSession::~SolverSession() { stop(); }

void SolverSession::start() {
  ignore_sigpipe_once();

  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) {
    throw SolverError(SolverError::Kind::launch, std::string("pipe: ") + std::strerror(errno));
  }
  Fd child_in_read(in_pipe[0]), child_in_write(in_pipe[1]);
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    throw SolverError(SolverError::Kind::launch, std::string("pipe: ") + std::strerror(errno));
  }
  Fd child_out_read(out_pipe[0]), child_out_write(out_pipe[1]);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, child_in_read.fd, STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, child_out_write.fd, STDOUT_FILENO);
  posix_spawn_file_actions_adddup2(&actions, child_out_write.fd, STDERR_FILENO);

  std::vector<std::string> args = config_.effective_args();
  std::vector<char*> argv;
  argv.push_back(const_cast<char*>(config_.path.c_str()));
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);

  pid_t pid = 0;
  int rc = ::posix_spawnp(&pid, config_.path.c_str(), &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) {
    throw SolverError(SolverError::Kind::launch,
                      "cannot start solver '" + config_.path + "': " + std::strerror(rc));
  }
  ::fcntl(child_in_write.fd, F_SETFL, O_NONBLOCK);
  pid_ = pid;
  in_ = std::exchange(child_in_write.fd, -1);
  out_ = std::exchange(child_out_read.fd, -1);
}

void SolverSession::stop() {
  if (pid_ < 0) return;
  ::close(in_);
  ::close(out_);
  ::kill(pid_, SIGKILL);
  int status = 0;
  while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
  }
  pid_ = in_ = out_ = -1;
}

SatAnswer SolverSession::check(const std::string& script) {
  if (pid_ < 0) start();

  const std::string request = "(reset)\n" + script + "(echo \"" + kSentinel + "\")\n";
  auto deadline = std::chrono::steady_clock::now() + config_.timeout;
  std::string output;
  std::size_t written = 0;
  bool timed_out = false;
  bool eof = false;

  auto complete = [&] {
    auto pos = output.find(kSentinel);
    return pos != std::string::npos && output.find('\n', pos) != std::string::npos;
  };

  while (!complete()) {
    pollfd fds[2] = {{out_, POLLIN, 0}, {in_, POLLOUT, 0}};
    nfds_t count = written < request.size() ? 2 : 1;
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      timed_out = true;
      break;
    }
    int n = ::poll(fds, count, static_cast<int>(remaining.count()));
    if (n < 0) {
      if (errno == EINTR) continue;
      eof = true;
      break;
    }
    if (n == 0) {
      timed_out = true;
      break;
    }
    if (count > 1 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      ssize_t w = ::write(in_, request.data() + written, request.size() - written);
      if (w > 0) written += static_cast<std::size_t>(w);
      if (w < 0 && errno != EAGAIN && errno != EINTR) written = request.size();
    }
    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      char buf[4096];
      ssize_t r = ::read(out_, buf, sizeof buf);
      if (r > 0) {
        output.append(buf, static_cast<std::size_t>(r));
      } else if (r == 0 || errno != EINTR) {
        eof = true;
        break;
      }
    }
  }

  if (timed_out) {
    stop();
    throw SolverError(SolverError::Kind::timeout,
                      "solver timed out after " + std::to_string(config_.timeout.count()) + " ms");
  }
  if (eof) {
    stop();
    throw closed_early(output);
  }

  std::istringstream lines(output.substr(0, output.find(kSentinel)));
  std::string line;
  std::string answer;
  std::string failure;
  while (std::getline(lines, line)) {
    line = trim(line);
    if (line.empty() || line == "\"") continue;
    if (line.rfind("(error", 0) == 0) {
      failure = "solver reported " + line;
      break;
    }
    if (!answer.empty()) {
      failure = "unexpected solver output: " + line;
      break;
    }
    answer = line;
  }
  if (!failure.empty()) {
    stop();
    throw SolverError(SolverError::Kind::protocol, failure);
  }
  if (answer == "sat") return SatAnswer::sat;
  if (answer == "unsat") return SatAnswer::unsat;
  if (answer == "unknown") {
    throw SolverError(SolverError::Kind::unknown, "solver answered unknown");
  }
  if (answer == "timeout") {
    stop();
    throw SolverError(SolverError::Kind::timeout, "solver reported timeout");
  }
  stop();
  throw SolverError(SolverError::Kind::protocol, "unexpected solver output: '" + trim(output) + "'");
}

bool entails(const QosContext& ctx, const Formula& psi, SolverSession& session) {
  return session.check(encode_query(ctx, psi)) == SatAnswer::unsat;
}

bool Entailer::entails(const QosContext& ctx, const Formula& psi) {
  std::string script = encode_query(ctx, psi);
  {
    std::lock_guard lock(mutex_);
    ++stats_.queries;
    if (auto it = cache_.find(script); it != cache_.end()) {
      ++stats_.cache_hits;
      return it->second;
    }
  }
  std::unique_ptr<SolverSession> session;
  {
    std::lock_guard lock(mutex_);
    if (!idle_.empty()) {
      session = std::move(idle_.back());
      idle_.pop_back();
    }
  }
  if (!session) session = std::make_unique<SolverSession>(config_);
  bool result = session->check(script) == SatAnswer::unsat;
  std::lock_guard lock(mutex_);
  idle_.push_back(std::move(session));
  ++stats_.solver_calls;
  cache_.emplace(std::move(script), result);
  return result;
}

Entailer::Stats Entailer::stats() const {
  std::lock_guard lock(mutex_);
  return stats_;
}

}  // namespace qosmc
