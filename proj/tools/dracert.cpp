// dracert: certified policy synthesis and verification for MDPs under
// distributional reach-avoid specifications.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dra/builtins.hpp"
#include "dra/grid.hpp"
#include "dra/model_io.hpp"
#include "dra/pipeline.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw dra::Error("cannot open " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

/// Locates an SMT solver: --solver flag, SOLVER_PATH, the z3smt.js shim next
/// to the executable, then plain z3 on PATH.
std::string default_solver(const std::string& argv0) {
  if (const char* env = std::getenv("SOLVER_PATH"); env && *env) return env;
  std::error_code ec;
  auto self = std::filesystem::canonical(argv0, ec);
  if (!ec) {
    for (auto dir : {self.parent_path(), self.parent_path().parent_path()}) {
      auto probe = dir / "z3smt.js";
      if (std::filesystem::exists(probe, ec)) return probe.string();
      probe = dir / "tools" / "z3smt.js";
      if (std::filesystem::exists(probe, ec)) return probe.string();
    }
  }
  return "z3";
}

struct CommonArgs {
  std::string model_path;
  std::string builtin_name;
  bool as_grid = false;
  std::string quant = "unit";
  std::string policy_class = "memoryless";
  int ninv = 1;
  int ninv_max = 0;
  int handelman_k = 2;
  std::string solver;
  std::vector<std::string> solver_args;
  double timeout = 600;
  long seed = 0;
  int retries = 0;
  std::string dump_smt;
  std::string dump_constraints;
  bool no_check = false;
  std::string out_dir = "runs";
};

void add_model_options(CLI::App* cmd, CommonArgs& args, bool positional_model) {
  if (positional_model)
    cmd->add_option("model", args.model_path, "model file (.grid files use the grid DSL)");
  cmd->add_option("--builtin", args.builtin_name, "built-in benchmark name");
  cmd->add_flag("--grid", args.as_grid, "force grid DSL parsing");
}

void add_solver_options(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--solver", args.solver, "SMT solver executable (or SOLVER_PATH)");
  cmd->add_option("--solver-arg", args.solver_args, "extra argument passed to the solver");
  cmd->add_option("--timeout", args.timeout, "per-query timeout in seconds");
  cmd->add_option("--seed", args.seed, "solver random seed (-1 to leave unset)");
  cmd->add_option("--retries", args.retries, "re-runs with fresh seeds after a timeout");
  cmd->add_option("--dump-smt", args.dump_smt, "persist the SMT-LIB2 query at this path");
  cmd->add_option("--dump-constraints", args.dump_constraints,
                  "write the translated constraint system, one per line");
}

dra::Quantifier parse_quant(const std::string& q) {
  if (q == "unit") return dra::Quantifier::Unit;
  if (q == "existential") return dra::Quantifier::Existential;
  if (q == "universal") return dra::Quantifier::Universal;
  throw dra::Error("unknown quantifier '" + q + "'");
}

dra::ProblemSpec load_problem(const CommonArgs& args) {
  using namespace dra;
  if (!args.builtin_name.empty()) {
    ProblemSpec p = builtin(args.builtin_name, parse_quant(args.quant));
    return p;
  }
  if (args.model_path.empty()) throw Error("no model given (path or --builtin)");
  std::string text = read_file(args.model_path);
  bool grid = args.as_grid || args.model_path.ends_with(".grid");
  ProblemSpec p;
  if (grid) {
    p = grid_to_problem(parse_grid(text), Rational(9, 10), Rational(1, 10),
                        parse_quant(args.quant),
                        std::filesystem::path(args.model_path).stem().string());
  } else {
    p = parse_model(text);
    p.name = std::filesystem::path(args.model_path).stem().string();
    if (p.quantifier == Quantifier::Unit && args.quant != "unit")
      p.quantifier = parse_quant(args.quant);
  }
  return p;
}

dra::PipelineOptions pipeline_options(const CommonArgs& args, const std::string& argv0) {
  dra::PipelineOptions opts;
  opts.ninv = args.ninv;
  opts.ninv_max = args.ninv_max > 0 ? args.ninv_max : args.ninv;
  opts.handelman_k = args.handelman_k;
  opts.retries = args.retries;
  opts.no_check = args.no_check;
  opts.out_dir = args.out_dir;
  opts.dump_smt = args.dump_smt;
  opts.dump_constraints = args.dump_constraints;
  opts.solver.solver_path = args.solver.empty() ? default_solver(argv0) : args.solver;
  opts.solver.timeout_sec = args.timeout;
  opts.solver.seed = args.seed;
  opts.solver.extra_args = args.solver_args;
  return opts;
}

int run_pipeline_command(const CommonArgs& args, dra::TaskKind task,
                         const std::string& policy_path, const std::string& argv0) {
  using namespace dra;
  ProblemSpec problem = load_problem(args);
  problem.task = task;
  problem.policy_class =
      args.policy_class == "distributional" ? PolicyClass::Distributional
                                            : PolicyClass::Memoryless;
  if (task == TaskKind::Verify) {
    if (!policy_path.empty())
      problem.given_policy = parse_policy(read_file(policy_path), problem.mdp);
    else if (!args.builtin_name.empty())
      problem.given_policy = builtin_policy(args.builtin_name, problem);
    else
      throw Error("verification needs --policy");
    problem.policy_class = problem.given_policy->kind;  // files self-describe
  }
  TaskArtifacts artifacts;
  RunReport report = run_task(problem, pipeline_options(args, argv0), &artifacts);
  std::cout << report.summary() << '\n';
  if (artifacts.checked) std::cout << artifacts.check.str();
  for (const auto& a : report.artifacts) std::cout << "wrote " << a << '\n';
  if (report.exit_code == kExitError && !report.message.empty())
    std::cerr << "error: " << report.message << '\n';
  return report.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certified policy synthesis for distributional reach-avoid MDPs"};
  app.require_subcommand(1);

  CommonArgs synth_args, verify_args, check_args, sim_args, bench_args;
  std::string verify_policy, check_policy, check_cert, check_init;
  std::string sim_policy, sim_cert;
  long sim_bound = -1;
  std::string bench_only, bench_task = "both";
  int bench_jobs = 1;

  auto* synth = app.add_subcommand("synthesize", "synthesize a policy and certificate");
  add_model_options(synth, synth_args, true);
  add_solver_options(synth, synth_args);
  synth->add_option("--quant", synth_args.quant, "unit|existential|universal");
  synth->add_option("--policy-class", synth_args.policy_class,
                    "memoryless|distributional");
  synth->add_option("--ninv", synth_args.ninv, "invariant template size");
  synth->add_option("--ninv-max", synth_args.ninv_max,
                    "sweep template sizes 1..N until sat");
  synth->add_option("--handelman-k", synth_args.handelman_k,
                    "product degree bound for distributional policies");
  synth->add_flag("--no-check", synth_args.no_check, "skip the independent checker");
  synth->add_option("--out", synth_args.out_dir, "artifact directory");

  auto* verify = app.add_subcommand("verify", "synthesize a certificate for a given policy");
  add_model_options(verify, verify_args, true);
  add_solver_options(verify, verify_args);
  verify->add_option("--policy", verify_policy,
                     "policy file (defaults to the built-in reference policy)");
  verify->add_option("--quant", verify_args.quant, "unit|existential|universal");
  verify->add_option("--policy-class", verify_args.policy_class,
                     "memoryless|distributional");
  verify->add_option("--ninv", verify_args.ninv, "invariant template size");
  verify->add_option("--ninv-max", verify_args.ninv_max, "sweep template sizes");
  verify->add_option("--handelman-k", verify_args.handelman_k, "product degree bound");
  verify->add_flag("--no-check", verify_args.no_check, "skip the independent checker");
  verify->add_option("--out", verify_args.out_dir, "artifact directory");

  auto* check = app.add_subcommand("check", "run the independent certificate checker");
  add_model_options(check, check_args, true);
  add_solver_options(check, check_args);
  check->add_option("--quant", check_args.quant, "unit|existential|universal");
  check->add_option("--policy", check_policy, "policy file")->required();
  check->add_option("--cert", check_cert, "certificate file")->required();
  check->add_option("--init", check_init, "initial distribution file (existential)");

  auto* sim = app.add_subcommand("simulate", "exact distribution-stream simulation");
  add_model_options(sim, sim_args, true);
  sim->add_option("--quant", sim_args.quant, "unit|existential|universal");
  sim->add_option("--policy", sim_policy, "policy file");
  sim->add_option("--cert", sim_cert, "certificate file (sets the step bound)");
  sim->add_option("--bound", sim_bound, "step bound (default from the certificate)");

  auto* bench_cmd = app.add_subcommand("bench", "run the benchmark suite");
  add_solver_options(bench_cmd, bench_args);
  bench_cmd->add_option("--only", bench_only, "run a single benchmark");
  bench_cmd->add_option("--task", bench_task, "verify|synthesize|both");
  bench_cmd->add_option("--jobs", bench_jobs, "worker pool size");
  bench_cmd->add_option("--ninv", bench_args.ninv, "invariant template size");
  bench_cmd->add_option("--ninv-max", bench_args.ninv_max, "sweep template sizes");
  bench_cmd->add_option("--out", bench_args.out_dir, "artifact directory");
  bench_cmd->add_flag("--no-check", bench_args.no_check, "skip the independent checker");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : dra::kExitError;
  }

  try {
    if (synth->parsed())
      return run_pipeline_command(synth_args, dra::TaskKind::Synthesize, "", argv[0]);
    if (verify->parsed())
      return run_pipeline_command(verify_args, dra::TaskKind::Verify, verify_policy,
                                  argv[0]);

    if (check->parsed()) {
      using namespace dra;
      ProblemSpec problem = load_problem(check_args);
      ConcretePolicy policy = parse_policy(read_file(check_policy), problem.mdp);
      Certificate cert = parse_certificate(read_file(check_cert), problem.mdp.n());
      std::optional<Distribution> mu0;
      if (!check_init.empty())
        mu0 = parse_init_dist(read_file(check_init), problem.mdp.n());
      PipelineOptions opts = pipeline_options(check_args, argv[0]);
      CheckReport report = check_certificate(problem, policy, cert, opts.solver, mu0);
      std::cout << report.str();
      return report.pass() ? 0 : 1;
    }

    if (sim->parsed()) {
      using namespace dra;
      ProblemSpec problem = load_problem(sim_args);
      ConcretePolicy policy;
      if (!sim_policy.empty())
        policy = parse_policy(read_file(sim_policy), problem.mdp);
      else if (!sim_args.builtin_name.empty())
        policy = builtin_policy(sim_args.builtin_name, problem);
      else
        throw Error("simulation needs --policy");
      if (!problem.init_dist) throw Error("simulation needs a unit initial distribution");
      long bound = sim_bound;
      std::optional<Certificate> cert;
      if (!sim_cert.empty())
        cert = parse_certificate(read_file(sim_cert), problem.mdp.n());
      if (bound < 0)
        bound = cert ? default_sim_bound(*cert, *problem.init_dist) : 1000;
      SimVerdict v = simulate(problem, policy, *problem.init_dist, bound);
      std::cout << v.str() << '\n';
      if (cert) {
        auto ranks = rank_trace(*cert, v.trace);
        std::cout << "rank trace:";
        for (std::size_t i = 0; i < ranks.size() && i < 25; ++i)
          std::cout << ' ' << ranks[i].str();
        if (ranks.size() > 25) std::cout << " ...";
        std::cout << '\n';
      }
      return v.outcome == SimOutcome::Reached ? 0 : 1;
    }

    if (bench_cmd->parsed()) {
      using namespace dra;
      BenchOptions opts;
      opts.pipeline = pipeline_options(bench_args, argv[0]);
      opts.only = bench_only;
      opts.verify = bench_task != "synthesize";
      opts.synthesize = bench_task != "verify";
      opts.jobs = bench_jobs;
      auto rows = bench(opts);
      std::cout << bench_table(rows);
      for (const auto& r : rows)
        if (r.report.exit_code == kExitError)
          std::cerr << r.model << ' ' << r.task << " error: " << r.report.message << '\n';
      return 0;
    }
  } catch (const dra::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return dra::kExitError;
  }
  return dra::kExitError;
}
