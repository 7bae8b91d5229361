#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dra/builtins.hpp"
#include "dra/checker.hpp"
#include "dra/model_io.hpp"
#include "dra/qelim.hpp"
#include "dra/simulate.hpp"
#include "dra/smt.hpp"

namespace dra {

// Exit-code contract: 0 certified, 1 checker rejected a solver model,
// 2 unsat through the largest template, 3 timeout, 4 usage/IO/solver error.
enum ExitCode : int {
  kExitCertified = 0,
  kExitCheckerRejected = 1,
  kExitUnsat = 2,
  kExitTimeout = 3,
  kExitError = 4,
};

struct PipelineOptions {
  int ninv = 1;
  int ninv_max = 1;
  int handelman_k = 2;
  SolverConfig solver;
  int retries = 0;
  bool no_check = false;
  std::string out_dir;
  std::string dump_smt;
  std::string dump_constraints;
};

struct RunReport {
  std::string command;
  std::string model_id;
  double construct_ms = 0;
  double solve_ms = 0;
  double check_ms = 0;
  QueryStats stats;
  std::string verdict = "error";
  int exit_code = kExitError;
  int n_inv_used = 0;
  std::vector<std::string> artifacts;
  std::string message;

  std::string summary() const {
    std::ostringstream os;
    os << command << ' ' << model_id << ": " << verdict;
    if (!message.empty()) os << " (" << message << ')';
    os << "  [construct " << std::fixed << std::setprecision(0) << construct_ms
       << " ms, solve " << solve_ms << " ms; vars " << stats.variables << ", cons "
       << stats.constraints << ", ops " << stats.operations << "]";
    return os.str();
  }
};

struct TaskArtifacts {
  Extraction extraction;
  CheckReport check;
  bool checked = false;
};

/// Synthesize or verify (per problem.task) with a template-size sweep and
/// timeout retries; writes artifacts and re-checks them unless disabled.
inline RunReport run_task(const ProblemSpec& problem, const PipelineOptions& opts,
                          TaskArtifacts* out_artifacts = nullptr) {
  RunReport report;
  report.command = problem.task == TaskKind::Verify ? "verify" : "synthesize";
  report.model_id = problem.name;
  try {
    problem.validate();
    bool timed_out = false;
    for (int n_inv = opts.ninv; n_inv <= std::max(opts.ninv, opts.ninv_max); ++n_inv) {
      auto t0 = std::chrono::steady_clock::now();
      Templates templates = instantiate_templates(problem, n_inv);
      ConstraintSystem quantified = collect_constraints(problem, templates);
      ConstraintSystem existential =
          translate_system(quantified, {opts.handelman_k});
      if (!opts.dump_constraints.empty()) {
        std::ofstream os(opts.dump_constraints);
        os << dump(existential);
      }
      Emission emission = emit(existential);
      report.construct_ms += std::chrono::duration<double, std::milli>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();
      report.stats = emission.stats;
      report.n_inv_used = n_inv;

      SolverConfig solver = opts.solver;
      if (!opts.dump_smt.empty()) solver.dump_path = opts.dump_smt;
      SolverVerdict verdict;
      int error_retries = 1;
      for (int attempt = 0;; ++attempt) {
        verdict = run_solver(emission.text, solver);
        report.solve_ms += verdict.solve_ms;
        if (verdict.kind == VerdictKind::SolverError && error_retries-- > 0) {
          --attempt;
          continue;
        }
        if (verdict.kind != VerdictKind::Timeout || attempt >= opts.retries) break;
        if (solver.seed >= 0) ++solver.seed;  // shake the randomized search
      }

      if (verdict.kind == VerdictKind::SolverError) {
        report.verdict = "error";
        report.message = verdict.message;
        report.exit_code = kExitError;
        return report;
      }
      if (verdict.kind == VerdictKind::Timeout) {
        timed_out = true;
        break;
      }
      if (verdict.kind == VerdictKind::Unsat) continue;

      // sat: every ground constraint must hold at the model, exactly.
      for (const auto& g : existential.ground) {
        Rational v = g.poly.eval(verdict.model);
        bool holds = g.rel == Rel::Eq ? v.is_zero()
                     : g.rel == Rel::Ge ? v.sign() >= 0
                                        : v.sign() > 0;
        if (!holds)
          throw Error("solver model fails exact re-evaluation of '" + g.note + "'");
      }
      Extraction extraction = extract(verdict.model, templates, problem);
      if (!opts.out_dir.empty()) {
        std::filesystem::create_directories(opts.out_dir);
        auto write_file = [&](const std::string& name, const std::string& body) {
          std::filesystem::path p = std::filesystem::path(opts.out_dir) / name;
          std::ofstream os(p);
          os << body;
          if (!os) throw Error("cannot write artifact " + p.string());
          report.artifacts.push_back(p.string());
        };
        write_file(problem.name + ".policy", write_policy(extraction.policy, problem.mdp));
        write_file(problem.name + ".cert", write_certificate(extraction.cert));
        if (problem.quantifier == Quantifier::Existential && extraction.init)
          write_file(problem.name + ".init", write_init_dist(*extraction.init));
      }

      if (opts.no_check) {
        report.verdict = "sat (unchecked)";
        report.exit_code = kExitCertified;
        if (out_artifacts) out_artifacts->extraction = std::move(extraction);
        return report;
      }
      auto c0 = std::chrono::steady_clock::now();
      CheckReport check =
          check_certificate(problem, extraction.policy, extraction.cert, opts.solver,
                            extraction.init);
      report.check_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - c0)
                            .count();
      if (check.pass()) {
        report.verdict = "certified";
        report.exit_code = kExitCertified;
      } else {
        // A solver model the checker rejects is always a bug; say so loudly.
        report.verdict = "checker-rejected";
        report.message = "independent checker rejected the solver model";
        report.exit_code = kExitCheckerRejected;
      }
      if (out_artifacts) {
        out_artifacts->extraction = std::move(extraction);
        out_artifacts->check = std::move(check);
        out_artifacts->checked = true;
      }
      return report;
    }
    if (timed_out) {
      report.verdict = "timeout";
      report.exit_code = kExitTimeout;
    } else {
      report.verdict = "unsat";
      report.message = "no affine certificate up to template size " +
                       std::to_string(std::max(opts.ninv, opts.ninv_max));
      report.exit_code = kExitUnsat;
    }
  } catch (const Error& e) {
    report.verdict = "error";
    report.message = e.what();
    report.exit_code = kExitError;
  }
  return report;
}

struct BenchRow {
  std::string model;
  std::string task;
  RunReport report;
  std::size_t states = 0;
  std::size_t actions = 0;
};

struct BenchOptions {
  PipelineOptions pipeline;
  std::string only;           // run a single benchmark when non-empty
  bool verify = true;
  bool synthesize = true;
  int jobs = 1;
};

/// Runs the benchmark suite: verification and synthesis on the seven
/// gridworlds plus the two chains (where the tasks coincide). Failures are
/// recorded per row and never abort the suite.
inline std::vector<BenchRow> bench(const BenchOptions& opts) {
  struct Job {
    std::string name;
    TaskKind task;
  };
  std::vector<Job> jobs;
  for (const auto& name : builtin_names()) {
    bool chain = name == "insulin" || name == "pagerank";
    if (!opts.only.empty() && name != opts.only) continue;
    if (opts.verify) jobs.push_back({name, TaskKind::Verify});
    if (opts.synthesize && !chain) jobs.push_back({name, TaskKind::Synthesize});
  }
  std::vector<BenchRow> rows(jobs.size());
  std::mutex mu;
  std::size_t next = 0;
  auto worker = [&]() {
    while (true) {
      std::size_t mine;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next >= jobs.size()) return;
        mine = next++;
      }
      const Job& job = jobs[mine];
      BenchRow row;
      row.model = job.name;
      row.task = job.task == TaskKind::Verify ? "verify" : "synth";
      try {
        ProblemSpec problem = builtin(job.name);
        problem.task = job.task;
        if (job.task == TaskKind::Verify)
          problem.given_policy = builtin_policy(job.name, problem);
        row.states = problem.mdp.n();
        row.actions = problem.mdp.total_actions();
        PipelineOptions popts = opts.pipeline;
        if (!popts.out_dir.empty())
          popts.out_dir += "/" + job.name + "-" + row.task;
        row.report = run_task(problem, popts);
      } catch (const Error& e) {
        row.report.verdict = "error";
        row.report.message = e.what();
        row.report.exit_code = kExitError;
      }
      rows[mine] = std::move(row);
    }
  };
  int nthreads = std::max(1, opts.jobs);
  std::vector<std::thread> pool;
  for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return rows;
}

inline std::string bench_table(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(11) << "Model" << std::right << std::setw(5) << "|S|"
     << std::setw(6) << "Act" << std::setw(7) << "Task" << std::setw(10) << "Inv(ms)"
     << std::setw(10) << "SMT(ms)" << std::setw(7) << "Var" << std::setw(7) << "Con"
     << std::setw(8) << "Ops" << "  Result\n";
  for (const auto& r : rows) {
    std::string result = r.report.verdict;
    if (result == "timeout") result = "T/O";
    os << std::left << std::setw(11) << r.model << std::right << std::setw(5) << r.states
       << std::setw(6) << r.actions << std::setw(7) << r.task << std::setw(10)
       << static_cast<long long>(r.report.construct_ms) << std::setw(10)
       << static_cast<long long>(r.report.solve_ms) << std::setw(7)
       << r.report.stats.variables << std::setw(7) << r.report.stats.constraints
       << std::setw(8) << r.report.stats.operations << "  " << result << '\n';
  }
  return os.str();
}

}  // namespace dra
