#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dra/rational.hpp"

namespace dra {

/// Concrete affine form c0 + sum c_i * x_i.
struct AffineForm {
  Rational constant;
  std::vector<Rational> coeffs;

  AffineForm() = default;
  explicit AffineForm(std::size_t n) : coeffs(n) {}

  Rational eval(const std::vector<Rational>& x) const {
    if (x.size() != coeffs.size()) throw Error("affine form: wrong point dimension");
    Rational v = constant;
    for (std::size_t i = 0; i < x.size(); ++i) v += coeffs[i] * x[i];
    return v;
  }
  bool is_zero() const {
    if (!constant.is_zero()) return false;
    for (const auto& c : coeffs)
      if (!c.is_zero()) return false;
    return true;
  }
  AffineForm operator-() const {
    AffineForm r(coeffs.size());
    r.constant = -constant;
    for (std::size_t i = 0; i < coeffs.size(); ++i) r.coeffs[i] = -coeffs[i];
    return r;
  }
  friend bool operator==(const AffineForm& a, const AffineForm& b) {
    return a.constant == b.constant && a.coeffs == b.coeffs;
  }
};

/// One inequality "form >= 0" (strict = false) or "form > 0" (strict = true).
struct AffineRow {
  AffineForm form;
  bool strict = false;

  bool holds(const std::vector<Rational>& x) const {
    Rational v = form.eval(x);
    return strict ? v.sign() > 0 : v.sign() >= 0;
  }
  friend bool operator==(const AffineRow& a, const AffineRow& b) {
    return a.strict == b.strict && a.form == b.form;
  }
};

/// Conjunction of affine inequalities, interpreted within the simplex.
struct AffineSetSpec {
  std::vector<AffineRow> rows;

  bool contains(const std::vector<Rational>& x) const {
    for (const auto& r : rows)
      if (!r.holds(x)) return false;
    return true;
  }
  /// Index of the first violated row, or -1.
  int first_violated(const std::vector<Rational>& x) const {
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (!rows[i].holds(x)) return static_cast<int>(i);
    return -1;
  }
};

struct Distribution {
  std::vector<Rational> p;

  Distribution() = default;
  explicit Distribution(std::vector<Rational> probs) : p(std::move(probs)) {}

  std::size_t size() const { return p.size(); }

  void validate() const {
    Rational sum(0);
    for (const auto& v : p) {
      if (v.sign() < 0) throw Error("distribution with negative entry " + v.str());
      sum += v;
    }
    if (sum != Rational(1))
      throw Error("distribution sums to " + sum.str() + ", expected 1");
  }

  static Distribution point(std::size_t n, std::size_t i) {
    Distribution d;
    d.p.assign(n, Rational(0));
    d.p[i] = Rational(1);
    return d;
  }

  std::string str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (i) os << ' ';
      os << p[i].str();
    }
    return os.str();
  }
  friend bool operator==(const Distribution& a, const Distribution& b) { return a.p == b.p; }
};

/// Finite MDP. Transition distributions are stored densely, aligned with the
/// per-state action lists.
struct Mdp {
  std::vector<std::string> states;
  std::vector<std::vector<std::string>> actions;   // Act(s), ordered
  std::vector<std::vector<Distribution>> trans;    // trans[s][a] over states

  std::size_t n() const { return states.size(); }

  std::size_t state_index(const std::string& name) const {
    for (std::size_t i = 0; i < states.size(); ++i)
      if (states[i] == name) return i;
    throw Error("unknown state '" + name + "'");
  }
  int action_index(std::size_t s, const std::string& name) const {
    for (std::size_t a = 0; a < actions[s].size(); ++a)
      if (actions[s][a] == name) return static_cast<int>(a);
    return -1;
  }

  std::size_t total_actions() const {
    std::size_t k = 0;
    for (const auto& a : actions) k += a.size();
    return k;
  }
  /// Number of (s, a, s') triples with positive probability.
  std::size_t total_transitions() const {
    std::size_t k = 0;
    for (const auto& per_state : trans)
      for (const auto& d : per_state)
        for (const auto& v : d.p)
          if (!v.is_zero()) ++k;
    return k;
  }

  void validate() const {
    if (states.empty()) throw Error("model has no states");
    if (actions.size() != states.size() || trans.size() != states.size())
      throw Error("model tables disagree with state count");
    for (std::size_t s = 0; s < states.size(); ++s) {
      if (actions[s].empty())
        throw Error("state " + states[s] + " has no available action");
      if (trans[s].size() != actions[s].size())
        throw Error("state " + states[s] + " is missing transition rows");
      for (std::size_t a = 0; a < actions[s].size(); ++a) {
        const Distribution& d = trans[s][a];
        if (d.size() != states.size())
          throw Error("transition for (" + states[s] + "," + actions[s][a] +
                      ") has wrong dimension");
        Rational sum(0);
        for (const auto& v : d.p) {
          if (v.sign() < 0)
            throw Error("negative probability in transition for (" + states[s] +
                        "," + actions[s][a] + ")");
          sum += v;
        }
        if (sum != Rational(1))
          throw Error("transition for (" + states[s] + "," + actions[s][a] +
                      ") sums to " + sum.str());
      }
    }
  }
};

enum class Quantifier { Unit, Existential, Universal };
enum class TaskKind { Verify, Synthesize };
enum class PolicyClass { Memoryless, Distributional };

inline std::string to_string(Quantifier q) {
  switch (q) {
    case Quantifier::Unit: return "unit";
    case Quantifier::Existential: return "existential";
    case Quantifier::Universal: return "universal";
  }
  return "?";
}

/// Concrete policy: memoryless rows, or per-(state,action) quotients of affine
/// expressions sharing a per-state denominator.
struct ConcretePolicy {
  PolicyClass kind = PolicyClass::Memoryless;
  std::vector<std::vector<Rational>> rows;       // memoryless, aligned to Act(s)
  std::vector<std::vector<AffineForm>> nums;     // distributional numerators
  std::vector<AffineForm> dens;                  // distributional denominators

  void validate(const Mdp& mdp) const {
    if (kind == PolicyClass::Memoryless) {
      if (rows.size() != mdp.n()) throw Error("policy does not cover every state");
      for (std::size_t s = 0; s < rows.size(); ++s) {
        if (rows[s].size() != mdp.actions[s].size())
          throw Error("policy row for " + mdp.states[s] + " does not match Act(s)");
        Rational sum(0);
        for (const auto& v : rows[s]) {
          if (v.sign() < 0)
            throw Error("negative policy probability at state " + mdp.states[s]);
          sum += v;
        }
        if (sum != Rational(1))
          throw Error("policy row for " + mdp.states[s] + " sums to " + sum.str());
      }
    } else {
      if (nums.size() != mdp.n() || dens.size() != mdp.n())
        throw Error("distributional policy does not cover every state");
      for (std::size_t s = 0; s < mdp.n(); ++s) {
        if (nums[s].size() != mdp.actions[s].size())
          throw Error("policy numerators for " + mdp.states[s] + " do not match Act(s)");
        // The numerators must sum to the denominator identically; positivity
        // on the invariant region is the checker's job.
        AffineForm sum(mdp.n());
        for (const auto& f : nums[s]) {
          sum.constant += f.constant;
          for (std::size_t i = 0; i < mdp.n(); ++i) sum.coeffs[i] += f.coeffs[i];
        }
        if (!(sum == dens[s]))
          throw Error("numerators for " + mdp.states[s] +
                      " do not sum to the denominator");
      }
    }
  }
};

struct ProblemSpec {
  std::string name;
  Mdp mdp;
  Quantifier quantifier = Quantifier::Unit;
  TaskKind task = TaskKind::Synthesize;
  PolicyClass policy_class = PolicyClass::Memoryless;
  std::optional<Distribution> init_dist;  // unit tasks
  AffineSetSpec init_set;                 // existential/universal tasks
  AffineSetSpec target;
  AffineSetSpec safe;
  std::optional<ConcretePolicy> given_policy;

  void validate() const {
    mdp.validate();
    if (task == TaskKind::Verify && !given_policy)
      throw Error("verification task requires a concrete policy");
    if (quantifier == Quantifier::Unit) {
      if (!init_dist) throw Error("unit task requires a concrete initial distribution");
      if (init_dist->size() != mdp.n())
        throw Error("initial distribution has wrong dimension");
      init_dist->validate();
    }
    auto check_rows = [&](const AffineSetSpec& set, const char* which) {
      for (const auto& r : set.rows)
        if (r.form.coeffs.size() != mdp.n())
          throw Error(std::string(which) + " row has wrong dimension");
    };
    check_rows(init_set, "init");
    check_rows(target, "target");
    check_rows(safe, "safe");
    if (given_policy) given_policy->validate(mdp);
  }
};

/// Affine ranking function plus affine invariant; the certificate's invariant
/// rows are always non-strict.
struct Certificate {
  AffineForm rank;
  AffineSetSpec invariant;
  int template_size = 1;

  Rational rank_at(const Distribution& mu) const { return rank.eval(mu.p); }
};

/// One-step distribution transformer matrix of a memoryless policy:
/// out[i] = sum_k M[i][k] * mu[k].
inline std::vector<std::vector<Rational>> transformer_matrix(const ConcretePolicy& policy,
                                                             const Mdp& mdp) {
  if (policy.kind != PolicyClass::Memoryless)
    throw Error("transformer matrix requires a memoryless policy");
  std::size_t n = mdp.n();
  std::vector<std::vector<Rational>> m(n, std::vector<Rational>(n, Rational(0)));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t a = 0; a < mdp.actions[k].size(); ++a) {
      const Rational& pa = policy.rows[k][a];
      if (pa.is_zero()) continue;
      const Distribution& d = mdp.trans[k][a];
      for (std::size_t i = 0; i < n; ++i)
        if (!d.p[i].is_zero()) m[i][k] += pa * d.p[i];
    }
  return m;
}

/// One step of the policy-induced distribution transformer, exactly.
inline Distribution step(const Distribution& mu, const ConcretePolicy& policy,
                         const Mdp& mdp) {
  std::size_t n = mdp.n();
  if (mu.size() != n) throw Error("step: distribution has wrong dimension");
  Distribution out;
  out.p.assign(n, Rational(0));
  for (std::size_t k = 0; k < n; ++k) {
    if (mu.p[k].is_zero() && policy.kind == PolicyClass::Memoryless) continue;
    for (std::size_t a = 0; a < mdp.actions[k].size(); ++a) {
      Rational pa;
      if (policy.kind == PolicyClass::Memoryless) {
        pa = policy.rows[k][a];
      } else {
        Rational den = policy.dens[k].eval(mu.p);
        if (den < Rational(1))
          throw Error("policy denominator below one at state " + mdp.states[k] +
                      " (value " + den.str() + ")");
        pa = policy.nums[k][a].eval(mu.p) / den;
        if (pa.sign() < 0)
          throw Error("negative policy probability at state " + mdp.states[k]);
      }
      if (pa.is_zero() || mu.p[k].is_zero()) continue;
      Rational w = pa * mu.p[k];
      const Distribution& d = mdp.trans[k][a];
      for (std::size_t i = 0; i < n; ++i)
        if (!d.p[i].is_zero()) out.p[i] += w * d.p[i];
    }
  }
  out.validate();
  return out;
}

}  // namespace dra
