#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dra/certgen.hpp"
#include "dra/model.hpp"

namespace dra {

struct QueryStats {
  std::size_t variables = 0;
  std::size_t constraints = 0;
  long long operations = 0;  // AST nodes over all asserted terms
};

struct Emission {
  std::string text;
  QueryStats stats;
};

namespace smt_detail {

/// Writes a rational literal; returns its node count (atoms and lists each
/// count one, operator heads are part of their list node).
inline long long write_rational(std::ostream& os, const Rational& r) {
  bool neg = r.sign() < 0;
  Rational a = r.abs();
  long long nodes = 0;
  if (neg) os << "(- ";
  if (a.is_integer()) {
    os << a.num().get_str();
    nodes = 1;
  } else {
    os << "(/ " << a.num().get_str() << ' ' << a.den().get_str() << ')';
    nodes = 3;
  }
  if (neg) {
    os << ')';
    nodes += 1;
  }
  return nodes;
}

inline long long write_poly(std::ostream& os, const UnknownPoly& p) {
  if (p.is_zero()) {
    os << '0';
    return 1;
  }
  long long nodes = 0;
  const auto& terms = p.terms();
  bool wrap_sum = terms.size() > 1;
  if (wrap_sum) {
    os << "(+";
    nodes += 1;
  }
  for (const auto& [mono, coef] : terms) {
    if (wrap_sum) os << ' ';
    bool unit = coef == Rational(1);
    if (mono.empty()) {
      nodes += write_rational(os, coef);
    } else if (unit && mono.size() == 1) {
      os << mono[0];
      nodes += 1;
    } else {
      os << "(*";
      nodes += 1;
      if (!unit) {
        os << ' ';
        nodes += write_rational(os, coef);
      }
      for (const auto& v : mono) {
        os << ' ' << v;
        nodes += 1;
      }
      os << ')';
    }
  }
  if (wrap_sum) os << ')';
  return nodes;
}

}  // namespace smt_detail

/// Renders a fully translated system as SMT-LIB2 text. Deterministic for a
/// given system; rationals appear as exact (/ p q) or integer literals.
inline Emission emit(const ConstraintSystem& sys) {
  if (!sys.horn.empty())
    throw Error("emit: system still contains universally quantified clauses");
  Emission out;
  std::size_t max_degree = 0;
  for (const auto& g : sys.ground) max_degree = std::max(max_degree, g.poly.degree());
  std::ostringstream os;
  os << "(set-logic " << (max_degree > 1 ? "QF_NRA" : "QF_LRA") << ")\n";
  for (const auto& u : sys.unknowns.all())
    os << "(declare-const " << u.name << " Real)\n";
  for (const auto& g : sys.ground) {
    const char* op = g.rel == Rel::Eq ? "=" : g.rel == Rel::Ge ? ">=" : ">";
    os << "(assert (" << op << ' ';
    long long nodes = 1 + smt_detail::write_poly(os, g.poly) + 1;
    os << " 0))\n";
    out.stats.operations += nodes;
  }
  os << "(check-sat)\n(get-model)\n";
  out.stats.variables = sys.unknowns.size();
  out.stats.constraints = sys.ground.size();
  out.text = os.str();
  return out;
}

/// Counts AST nodes of every asserted term in SMT-LIB2 text; used as an
/// independent recount against QueryStats.operations.
inline long long count_assert_nodes(const std::string& text) {
  long long total = 0;
  std::size_t pos = 0;
  const std::string key = "(assert ";
  while ((pos = text.find(key, pos)) != std::string::npos) {
    std::size_t i = pos + key.size();
    int depth = 0;
    bool in_atom = false;
    for (; i < text.size(); ++i) {
      char ch = text[i];
      if (ch == '(') {
        ++depth;
        ++total;
        in_atom = false;
      } else if (ch == ')') {
        if (depth == 0) break;
        --depth;
        in_atom = false;
      } else if (ch == ' ' || ch == '\n' || ch == '\t') {
        in_atom = false;
      } else {
        if (!in_atom) {
          // operator heads directly after '(' belong to their list node
          bool head = i > 0 && text[i - 1] == '(';
          if (!head) ++total;
        }
        in_atom = true;
      }
    }
    pos = i;
  }
  return total;
}

enum class VerdictKind { Sat, Unsat, Timeout, SolverError };

struct SolverVerdict {
  VerdictKind kind = VerdictKind::SolverError;
  std::map<std::string, Rational> model;
  std::string message;
  double solve_ms = 0;
};

struct SolverConfig {
  std::string solver_path;
  double timeout_sec = 600;
  long seed = -1;
  std::vector<std::string> extra_args;
  std::string dump_path;  // persist the query here when non-empty
};

namespace smt_detail {

struct Sexpr {
  std::string atom;
  std::vector<Sexpr> kids;
  bool is_atom = false;
};

inline void skip_ws(const std::string& s, std::size_t& i) {
  while (i < s.size()) {
    if (s[i] == ';') {
      while (i < s.size() && s[i] != '\n') ++i;
    } else if (s[i] == ' ' || s[i] == '\n' || s[i] == '\t' || s[i] == '\r') {
      ++i;
    } else {
      break;
    }
  }
}

inline Sexpr parse_sexpr(const std::string& s, std::size_t& i) {
  skip_ws(s, i);
  if (i >= s.size()) throw Error("unexpected end of solver output");
  Sexpr e;
  if (s[i] == '(') {
    ++i;
    while (true) {
      skip_ws(s, i);
      if (i >= s.size()) throw Error("unbalanced parenthesis in solver output");
      if (s[i] == ')') {
        ++i;
        break;
      }
      e.kids.push_back(parse_sexpr(s, i));
    }
    return e;
  }
  e.is_atom = true;
  while (i < s.size() && s[i] != '(' && s[i] != ')' && s[i] != ' ' && s[i] != '\n' &&
         s[i] != '\t' && s[i] != '\r')
    e.atom += s[i++];
  return e;
}

inline Rational decimal_to_rational(const std::string& s) {
  auto dot = s.find('.');
  std::string ip = s.substr(0, dot), fp = s.substr(dot + 1);
  while (!fp.empty() && fp.back() == '0') fp.pop_back();
  Rational base = Rational::parse(ip.empty() ? "0" : ip);
  if (fp.empty()) return base;
  Rational frac = Rational::parse(fp);
  Rational scale(1);
  for (std::size_t i = 0; i < fp.size(); ++i) scale *= Rational(10);
  return base + frac / scale;
}

inline Rational value_to_rational(const Sexpr& e) {
  if (e.is_atom) {
    if (e.atom.find('.') != std::string::npos) return decimal_to_rational(e.atom);
    return Rational::parse(e.atom);
  }
  if (e.kids.empty()) throw Error("empty value in solver model");
  const Sexpr& head = e.kids.front();
  if (head.is_atom && head.atom == "-" && e.kids.size() == 2)
    return -value_to_rational(e.kids[1]);
  if (head.is_atom && head.atom == "/" && e.kids.size() == 3)
    return value_to_rational(e.kids[1]) / value_to_rational(e.kids[2]);
  if (head.is_atom && head.atom == "root-obj")
    throw Error("unsupported model value (algebraic real); retry with a different "
                "seed or an exact-rational solver");
  throw Error("unparseable model value");
}

inline void collect_model(const Sexpr& e, std::map<std::string, Rational>& model) {
  if (e.is_atom) return;
  if (e.kids.size() >= 5 && e.kids[0].is_atom && e.kids[0].atom == "define-fun" &&
      e.kids[1].is_atom) {
    model[e.kids[1].atom] = value_to_rational(e.kids.back());
    return;
  }
  for (const auto& k : e.kids) collect_model(k, model);
}

/// Parses one solver answer: verdict line plus optional model s-expression.
inline SolverVerdict parse_answer(const std::string& text) {
  SolverVerdict v;
  std::istringstream is(text);
  std::string line;
  std::size_t model_from = std::string::npos;
  std::size_t consumed = 0;
  while (std::getline(is, line)) {
    consumed += line.size() + 1;
    std::string t = line;
    while (!t.empty() && (t.back() == '\r' || t.back() == ' ')) t.pop_back();
    if (t == "sat") {
      v.kind = VerdictKind::Sat;
      model_from = consumed;
      break;
    }
    if (t == "unsat") {
      v.kind = VerdictKind::Unsat;
      return v;
    }
    if (t == "unknown" || t == "timeout") {
      // resource-limited answer from the solver itself
      v.kind = VerdictKind::Timeout;
      v.message = t;
      return v;
    }
  }
  if (v.kind == VerdictKind::Sat) {
    std::string rest = text.substr(model_from);
    std::size_t i = 0;
    skip_ws(rest, i);
    if (i < rest.size()) {
      Sexpr m = parse_sexpr(rest, i);
      collect_model(m, v.model);
    }
    return v;
  }
  v.kind = VerdictKind::SolverError;
  v.message = text.substr(0, 4000);
  return v;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    auto base = std::filesystem::temp_directory_path();
    for (int attempt = 0; attempt < 100; ++attempt) {
      auto candidate = base / ("dra-" + std::to_string(::getpid()) + "-" +
                               std::to_string(counter()++));
      std::error_code ec;
      if (std::filesystem::create_directory(candidate, ec)) {
        path = candidate;
        return;
      }
    }
    throw Error("cannot create temporary directory");
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

/// Spawns the solver over the given files, captures stdout+stderr, and kills
/// the process tree at the deadline.
inline std::pair<bool, std::string> run_process(const std::vector<std::string>& argv,
                                                double timeout_sec, std::string* error) {
  int fds[2];
  if (pipe(fds) != 0) throw Error("pipe failed");
  pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    throw Error("fork failed");
  }
  if (pid == 0) {
    dup2(fds[1], STDOUT_FILENO);
    dup2(fds[1], STDERR_FILENO);
    close(fds[0]);
    close(fds[1]);
    std::vector<char*> cargv;
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);
    execvp(cargv[0], cargv.data());
    std::perror("exec solver");
    _exit(127);
  }
  close(fds[1]);
  std::string output;
  auto deadline = std::chrono::steady_clock::now() +
                  std::chrono::duration<double>(timeout_sec);
  bool timed_out = false;
  char buf[65536];
  while (true) {
    auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
                         deadline - std::chrono::steady_clock::now())
                         .count();
    if (remaining <= 0) {
      timed_out = true;
      break;
    }
    struct pollfd pf = {fds[0], POLLIN, 0};
    int pr = poll(&pf, 1, static_cast<int>(std::min<long long>(remaining, 1000)));
    if (pr < 0) break;
    if (pr == 0) continue;
    ssize_t got = read(fds[0], buf, sizeof buf);
    if (got < 0) break;
    if (got == 0) break;  // solver closed its end
    output.append(buf, static_cast<std::size_t>(got));
  }
  if (timed_out) {
    kill(pid, SIGKILL);
  }
  close(fds[0]);
  int status = 0;
  waitpid(pid, &status, 0);
  if (!timed_out && WIFEXITED(status) && WEXITSTATUS(status) == 127 && error)
    *error = "cannot launch solver '" + argv[0] + "'";
  return {timed_out, output};
}

inline std::vector<std::string> solver_argv(const SolverConfig& config,
                                            const std::vector<std::string>& files) {
  std::vector<std::string> argv;
  argv.push_back(config.solver_path);
  for (const auto& a : config.extra_args) argv.push_back(a);
  if (config.seed >= 0) {
    // z3-style global parameters; other solvers take seeds via extra_args
    argv.push_back("smt.random_seed=" + std::to_string(config.seed));
    argv.push_back("nlsat.seed=" + std::to_string(config.seed));
    argv.push_back("sat.random_seed=" + std::to_string(config.seed));
  }
  for (const auto& f : files) argv.push_back(f);
  return argv;
}

}  // namespace smt_detail

/// Runs a batch of queries through one solver process. The shipped z3 shim
/// prints a "=== dra:query <i> ===" separator per file; plain solvers fall
/// back to one process per query.
inline std::vector<SolverVerdict> run_solver_many(const std::vector<std::string>& queries,
                                                  const SolverConfig& config);

inline SolverVerdict run_solver(const std::string& query, const SolverConfig& config) {
  using namespace smt_detail;
  if (config.solver_path.empty())
    throw Error("no SMT solver configured (use --solver or SOLVER_PATH)");
  if (config.timeout_sec <= 0) throw Error("solver timeout must be positive");
  SolverVerdict v;
  auto t0 = std::chrono::steady_clock::now();
  TempDir dir;
  std::filesystem::path file = dir.path / "query.smt2";
  if (!config.dump_path.empty()) file = config.dump_path;
  {
    std::ofstream os(file);
    os << query;
    if (!os) throw Error("cannot write query file " + file.string());
  }
  std::string spawn_error;
  auto [timed_out, output] =
      run_process(solver_argv(config, {file.string()}), config.timeout_sec, &spawn_error);
  v.solve_ms = std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - t0)
                   .count();
  if (!spawn_error.empty()) {
    v.kind = VerdictKind::SolverError;
    v.message = spawn_error;
    return v;
  }
  if (timed_out) {
    v.kind = VerdictKind::Timeout;
    return v;
  }
  SolverVerdict parsed = parse_answer(output);
  parsed.solve_ms = v.solve_ms;
  return parsed;
}

inline std::vector<SolverVerdict> run_solver_many(const std::vector<std::string>& queries,
                                                  const SolverConfig& config) {
  using namespace smt_detail;
  std::vector<SolverVerdict> out;
  if (queries.empty()) return out;
  if (queries.size() == 1) {
    out.push_back(run_solver(queries[0], config));
    return out;
  }
  if (config.solver_path.empty())
    throw Error("no SMT solver configured (use --solver or SOLVER_PATH)");
  TempDir dir;
  std::vector<std::string> files;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    std::filesystem::path f = dir.path / ("q" + std::to_string(i) + ".smt2");
    std::ofstream os(f);
    os << queries[i];
    files.push_back(f.string());
  }
  auto t0 = std::chrono::steady_clock::now();
  std::string spawn_error;
  auto [timed_out, output] =
      run_process(solver_argv(config, files), config.timeout_sec, &spawn_error);
  double ms = std::chrono::duration<double, std::milli>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
  const std::string sep = "=== dra:query ";
  if (output.find(sep) == std::string::npos) {
    // not our shim; run queries individually
    for (const auto& q : queries) out.push_back(run_solver(q, config));
    return out;
  }
  std::size_t pos = 0;
  std::vector<std::string> chunks;
  while (true) {
    std::size_t at = output.find(sep, pos);
    if (at == std::string::npos) break;
    std::size_t nl = output.find('\n', at);
    if (nl == std::string::npos) break;
    std::size_t next = output.find(sep, nl);
    chunks.push_back(output.substr(nl + 1, next == std::string::npos
                                               ? std::string::npos
                                               : next - nl - 1));
    pos = nl;
    if (next == std::string::npos) break;
    pos = next;
  }
  for (std::size_t i = 0; i < queries.size(); ++i) {
    SolverVerdict v;
    if (timed_out && i >= chunks.size()) {
      v.kind = VerdictKind::Timeout;
    } else if (i < chunks.size()) {
      v = parse_answer(chunks[i]);
    } else {
      v.kind = VerdictKind::SolverError;
      v.message = "missing batch answer";
    }
    v.solve_ms = ms / static_cast<double>(queries.size());
    out.push_back(std::move(v));
  }
  return out;
}

struct Extraction {
  std::optional<Distribution> init;
  ConcretePolicy policy;
  Certificate cert;
};

/// Reads the synthesized artifacts out of a sat model. Exact throughout:
/// memoryless policy rows must sum to one without renormalization.
inline Extraction extract(const std::map<std::string, Rational>& model,
                          const Templates& t, const ProblemSpec& problem) {
  auto value_of = [&](const UnknownPoly& p) -> Rational {
    try {
      return p.eval(model);
    } catch (const Error& e) {
      throw Error(std::string("model missing a template unknown: ") + e.what());
    }
  };

  Extraction out;
  const Mdp& mdp = problem.mdp;

  if (problem.task == TaskKind::Verify) {
    out.policy = *problem.given_policy;
  } else if (!t.distributional) {
    out.policy.kind = PolicyClass::Memoryless;
    out.policy.rows.resize(t.n);
    for (std::size_t s = 0; s < t.n; ++s) {
      Rational sum(0);
      for (std::size_t a = 0; a < mdp.actions[s].size(); ++a) {
        Rational v = value_of(t.policy[s][a]);
        if (v.sign() < 0)
          throw Error("extracted negative policy probability at " + mdp.states[s]);
        out.policy.rows[s].push_back(v);
        sum += v;
      }
      if (sum != Rational(1))
        throw Error("extracted policy row for " + mdp.states[s] + " sums to " +
                    sum.str());
    }
  } else {
    out.policy.kind = PolicyClass::Distributional;
    out.policy.nums.resize(t.n);
    out.policy.dens.resize(t.n);
    auto lower = [&](const SymbolicAffine& e) {
      AffineForm f(t.n);
      f.constant = value_of(e.constant);
      for (std::size_t i = 0; i < t.n; ++i) f.coeffs[i] = value_of(e.coeffs[i]);
      return f;
    };
    for (std::size_t s = 0; s < t.n; ++s) {
      for (std::size_t a = 0; a < mdp.actions[s].size(); ++a)
        out.policy.nums[s].push_back(lower(t.nums[s][a]));
      out.policy.dens[s] = lower(t.dens[s]);
    }
  }

  out.cert.template_size = t.template_size;
  out.cert.rank = AffineForm(t.n);
  out.cert.rank.constant = value_of(t.rank[0]);
  for (std::size_t i = 0; i < t.n; ++i) out.cert.rank.coeffs[i] = value_of(t.rank[i + 1]);
  for (const auto& row_tpl : t.invariant) {
    AffineRow row;
    row.strict = false;
    row.form = AffineForm(t.n);
    row.form.constant = value_of(row_tpl[0]);
    for (std::size_t i = 0; i < t.n; ++i) row.form.coeffs[i] = value_of(row_tpl[i + 1]);
    out.cert.invariant.rows.push_back(std::move(row));
  }

  if (problem.quantifier == Quantifier::Existential) {
    Distribution d;
    for (const auto& name : t.init_vars) {
      auto it = model.find(name);
      if (it == model.end()) throw Error("model missing initial unknown " + name);
      d.p.push_back(it->second);
    }
    d.validate();
    out.init = std::move(d);
  } else if (problem.quantifier == Quantifier::Unit) {
    out.init = problem.init_dist;
  }
  return out;
}

}  // namespace dra
