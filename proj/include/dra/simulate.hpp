#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dra/model.hpp"

namespace dra {

enum class SimOutcome { Reached, SafetyViolated, BoundExhausted };

struct SimVerdict {
  SimOutcome outcome = SimOutcome::BoundExhausted;
  long step_index = -1;       // reach step, or step of the safety violation
  int violated_row = -1;      // index into safe.rows on violation
  std::vector<Distribution> trace;

  std::string str() const {
    std::ostringstream os;
    switch (outcome) {
      case SimOutcome::Reached: os << "reached target at step " << step_index; break;
      case SimOutcome::SafetyViolated:
        os << "safety violated at step " << step_index << " (safe row "
           << violated_row + 1 << ")";
        break;
      case SimOutcome::BoundExhausted:
        os << "bound exhausted after " << trace.size() - 1 << " steps";
        break;
    }
    return os.str();
  }
};

/// Step bound derived from the ranking function: the target must be hit
/// within ceil(R(mu0)) steps, so simulate one step longer. Clamped into a
/// practical range since solver-found ranks can be astronomically large.
inline long default_sim_bound(const Certificate& cert, const Distribution& mu0,
                              long cap = 100000) {
  Rational r = cert.rank_at(mu0);
  long b = r.ceil_clamped(1, cap);
  return b >= cap ? cap : b + 1;
}

/// Exact unrolling of the distribution stream. The first index inside T is
/// reported; every earlier distribution must lie in H.
inline SimVerdict simulate(const ProblemSpec& problem, const ConcretePolicy& policy,
                           const Distribution& mu0, long bound) {
  if (bound < 0) throw Error("simulation bound must be nonnegative");
  SimVerdict v;
  Distribution mu = mu0;
  mu.validate();
  for (long i = 0;; ++i) {
    v.trace.push_back(mu);
    if (problem.target.contains(mu.p)) {
      v.outcome = SimOutcome::Reached;
      v.step_index = i;
      return v;
    }
    int bad = problem.safe.first_violated(mu.p);
    if (bad >= 0) {
      v.outcome = SimOutcome::SafetyViolated;
      v.step_index = i;
      v.violated_row = bad;
      return v;
    }
    if (i >= bound) {
      v.outcome = SimOutcome::BoundExhausted;
      return v;
    }
    mu = step(mu, policy, problem.mdp);
  }
}

/// Exact rank values along a trace.
inline std::vector<Rational> rank_trace(const Certificate& cert,
                                        const std::vector<Distribution>& trace) {
  std::vector<Rational> out;
  out.reserve(trace.size());
  for (const auto& mu : trace) out.push_back(cert.rank_at(mu));
  return out;
}

}  // namespace dra
