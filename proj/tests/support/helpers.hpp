#pragma once

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "dra/model.hpp"
#include "dra/smt.hpp"

namespace testutil {

inline std::string solver_path() {
  if (const char* env = std::getenv("SOLVER_PATH"); env && *env) return env;
  return std::string(DRA_SOURCE_DIR) + "/tools/z3smt.js";
}

inline dra::SolverConfig solver_config(double timeout_sec = 120) {
  dra::SolverConfig cfg;
  cfg.solver_path = solver_path();
  cfg.timeout_sec = timeout_sec;
  cfg.seed = 0;
  return cfg;
}

inline dra::Rational random_rational(std::mt19937_64& rng, long lo_num, long hi_num,
                                     long max_den = 4) {
  std::uniform_int_distribution<long> num(lo_num, hi_num);
  std::uniform_int_distribution<long> den(1, max_den);
  return dra::Rational(num(rng), den(rng));
}

/// Random exact point on the probability simplex.
inline std::vector<dra::Rational> random_simplex_point(std::mt19937_64& rng,
                                                       std::size_t n) {
  std::uniform_int_distribution<long> w(0, 12);
  std::vector<dra::Rational> x(n, dra::Rational(0));
  dra::Rational sum(0);
  while (sum.is_zero()) {
    for (auto& v : x) {
      v = dra::Rational(w(rng));
      sum += v;
    }
  }
  for (auto& v : x) v /= sum;
  return x;
}

/// Two-state chain: s1 deterministically moves to s2, s2 absorbs.
inline dra::ProblemSpec two_chain() {
  using namespace dra;
  ProblemSpec p;
  p.name = "twochain";
  p.mdp.states = {"s1", "s2"};
  p.mdp.actions = {{"a"}, {"a"}};
  Distribution to2;
  to2.p = {Rational(0), Rational(1)};
  p.mdp.trans = {{to2}, {to2}};
  AffineRow t;
  t.form = AffineForm(2);
  t.form.constant = Rational(-9, 10);
  t.form.coeffs[1] = Rational(1);
  p.target.rows.push_back(t);
  p.init_dist = Distribution::point(2, 0);
  ConcretePolicy pol;
  pol.kind = PolicyClass::Memoryless;
  pol.rows = {{Rational(1)}, {Rational(1)}};
  p.given_policy = pol;
  p.task = TaskKind::Verify;
  return p;
}

/// Hand certificate for two_chain: R = 10 - 10*x2, I = whole simplex.
inline dra::Certificate two_chain_cert() {
  using namespace dra;
  Certificate cert;
  cert.rank = AffineForm(2);
  cert.rank.constant = Rational(10);
  cert.rank.coeffs[1] = Rational(-10);
  AffineRow trivial;
  trivial.form = AffineForm(2);
  trivial.form.constant = Rational(1);
  cert.invariant.rows.push_back(trivial);
  cert.template_size = 1;
  return cert;
}

}  // namespace testutil
