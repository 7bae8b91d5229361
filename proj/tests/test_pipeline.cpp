#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dra/pipeline.hpp"
#include "support/helpers.hpp"

using namespace dra;

namespace {

PipelineOptions solver_opts(double timeout = 180) {
  PipelineOptions opts;
  opts.solver = testutil::solver_config(timeout);
  return opts;
}

}  // namespace

TEST_CASE("template sweep stops at the first satisfiable size", "[solver]") {
  ProblemSpec p = testutil::two_chain();
  p.task = TaskKind::Synthesize;
  p.given_policy.reset();
  PipelineOptions opts = solver_opts();
  opts.ninv = 1;
  opts.ninv_max = 3;
  TaskArtifacts arts;
  RunReport r = run_task(p, opts, &arts);
  CHECK(r.exit_code == kExitCertified);
  CHECK(r.n_inv_used == 1);
}

TEST_CASE("unreachable targets are unsat through the sweep", "[solver]") {
  ProblemSpec p = parse_model(
      "states: s1 s2\n"
      "actions s1: a\nactions s2: a\n"
      "trans s1 a -> s1:1\ntrans s2 a -> s2:1\n"
      "target:\n-9/10 + 1*x2 >= 0\n"
      "quantifier: unit\ninit-dist: 1 0\n");
  p.task = TaskKind::Synthesize;
  PipelineOptions opts = solver_opts();
  opts.ninv_max = 2;
  RunReport r = run_task(p, opts);
  CHECK(r.exit_code == kExitUnsat);
  CHECK(r.verdict == "unsat");
}

TEST_CASE("existential synthesis returns an initial distribution in Init", "[solver]") {
  ProblemSpec p = testutil::two_chain();
  p.task = TaskKind::Synthesize;
  p.given_policy.reset();
  p.quantifier = Quantifier::Existential;
  p.init_dist.reset();
  // Init: at least 9/10 of the mass starts on s1
  AffineRow row;
  row.form = AffineForm(2);
  row.form.constant = Rational(-9, 10);
  row.form.coeffs[0] = Rational(1);
  p.init_set.rows.push_back(row);

  TaskArtifacts arts;
  RunReport r = run_task(p, solver_opts(), &arts);
  REQUIRE(r.exit_code == kExitCertified);
  REQUIRE(arts.extraction.init.has_value());
  CHECK(p.init_set.contains(arts.extraction.init->p));
  // and the stream from the synthesized initial distribution reach-avoids
  SimVerdict sim = simulate(p, arts.extraction.policy, *arts.extraction.init,
                            default_sim_bound(arts.extraction.cert, *arts.extraction.init));
  CHECK(sim.outcome == SimOutcome::Reached);
}

TEST_CASE("universal verification covers every initial distribution", "[solver]") {
  ProblemSpec p = testutil::two_chain();
  p.quantifier = Quantifier::Universal;
  p.init_dist.reset();
  // Init: everything with at least half the mass on s1
  AffineRow row;
  row.form = AffineForm(2);
  row.form.constant = Rational(-1, 2);
  row.form.coeffs[0] = Rational(1);
  p.init_set.rows.push_back(row);

  TaskArtifacts arts;
  RunReport r = run_task(p, solver_opts(), &arts);
  REQUIRE(r.exit_code == kExitCertified);
  CHECK(arts.check.pass());

  // checker/simulator agreement: no trace from Init contradicts reach-avoidance
  std::mt19937_64 rng(77);
  int tested = 0;
  while (tested < 100) {
    Distribution mu0(testutil::random_simplex_point(rng, 2));
    if (!p.init_set.contains(mu0.p)) continue;
    ++tested;
    SimVerdict sim = simulate(p, *p.given_policy, mu0,
                              default_sim_bound(arts.extraction.cert, mu0));
    CHECK(sim.outcome == SimOutcome::Reached);
  }
}

TEST_CASE("distributional verification goes through handelman", "[solver]") {
  // Policy with a genuinely distribution-dependent quotient: in s1, the
  // stay-weight is x1 and the move-weight 1, normalized by 1 + x1. The
  // induced stream x1' = x1^2/(1+x1) is nonlinear, yet R = 22*x1 certifies
  // reach-avoidance, so the K=2 Handelman query is satisfiable.
  ProblemSpec p = testutil::two_chain();
  p.mdp.actions[0] = {"go", "stay"};
  Distribution to2({Rational(0), Rational(1)});
  Distribution self({Rational(1), Rational(0)});
  p.mdp.trans[0] = {to2, self};
  p.policy_class = PolicyClass::Distributional;
  ConcretePolicy pol;
  pol.kind = PolicyClass::Distributional;
  AffineForm one(2), x1(2), den(2);
  one.constant = Rational(1);
  x1.coeffs[0] = Rational(1);
  den.constant = Rational(1);
  den.coeffs[0] = Rational(1);
  pol.nums = {{one, x1}, {one}};
  pol.dens = {den, one};
  p.given_policy = pol;

  PipelineOptions opts = solver_opts(300);
  opts.handelman_k = 2;
  TaskArtifacts arts;
  RunReport r = run_task(p, opts, &arts);
  INFO(r.summary());
  REQUIRE(r.exit_code == kExitCertified);
  CHECK(arts.check.pass());
  SimVerdict sim = simulate(p, pol, *p.init_dist, 200);
  CHECK(sim.outcome == SimOutcome::Reached);
}

TEST_CASE("distributional synthesis emits a well-formed handelman query") {
  // Synthesis with rational-function policy templates produces degree-3
  // constraints that the shipped wasm solver cannot settle in reasonable
  // time, so only the query construction is pinned here.
  ProblemSpec p = testutil::two_chain();
  p.task = TaskKind::Synthesize;
  p.given_policy.reset();
  p.policy_class = PolicyClass::Distributional;
  Templates t = instantiate_templates(p, 1);
  ConstraintSystem ex = translate_system(collect_constraints(p, t), {2});
  Emission em = emit(ex);
  CHECK(em.text.rfind("(set-logic QF_NRA)", 0) == 0);
  std::size_t deg = 0;
  for (const auto& g : ex.ground) deg = std::max(deg, g.poly.degree());
  CHECK(deg == 3);  // y * num * inv products
}

TEST_CASE("run reports carry phase timings and stats") {
  ProblemSpec p = testutil::two_chain();
  PipelineOptions opts;
  opts.solver.solver_path = std::string(DRA_SOURCE_DIR) + "/tests/support/sleep_solver.sh";
  opts.solver.timeout_sec = 1;
  RunReport r = run_task(p, opts);
  CHECK(r.exit_code == kExitTimeout);
  CHECK(r.verdict == "timeout");
  CHECK(r.stats.variables > 0);
  CHECK(r.construct_ms >= 0);
  CHECK(r.solve_ms >= 1000);
}

TEST_CASE("timeout retries re-run with fresh seeds") {
  ProblemSpec p = testutil::two_chain();
  PipelineOptions opts;
  opts.solver.solver_path = std::string(DRA_SOURCE_DIR) + "/tests/support/sleep_solver.sh";
  opts.solver.timeout_sec = 1;
  opts.solver.seed = 0;
  opts.retries = 2;
  auto t0 = std::chrono::steady_clock::now();
  RunReport r = run_task(p, opts);
  double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(r.exit_code == kExitTimeout);
  CHECK(sec >= 3.0);  // three attempts of one second each
}
