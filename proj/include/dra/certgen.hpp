#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dra/affine.hpp"
#include "dra/model.hpp"
#include "dra/polynomial.hpp"

namespace dra {

/// Symbolic templates for the initial distribution, the policy, the ranking
/// function and the invariant. Concrete values (verification tasks,
/// single-probability entries) live in the same slots as constant polynomials.
struct Templates {
  UnknownRegistry registry;
  std::size_t n = 0;
  int template_size = 1;
  bool symbolic_policy = false;
  bool distributional = false;

  std::vector<std::string> init_vars;              // existential: m_1..m_n
  std::vector<std::vector<UnknownPoly>> policy;    // memoryless probabilities
  std::vector<std::vector<SymbolicAffine>> nums;   // distributional numerators
  std::vector<SymbolicAffine> dens;                // distributional denominators
  std::vector<UnknownPoly> rank;                   // n+1, [0] = constant term
  std::vector<std::vector<UnknownPoly>> invariant; // N_I rows of n+1 entries

  SymbolicAffine rank_expr() const {
    SymbolicAffine e(n);
    e.constant = rank[0];
    for (std::size_t i = 0; i < n; ++i) e.coeffs[i] = rank[i + 1];
    return e;
  }
  SymbolicAffine invariant_expr(std::size_t j) const {
    SymbolicAffine e(n);
    e.constant = invariant[j][0];
    for (std::size_t i = 0; i < n; ++i) e.coeffs[i] = invariant[j][i + 1];
    return e;
  }
};

inline Templates instantiate_templates(const ProblemSpec& problem, int n_inv) {
  if (n_inv < 1) throw Error("template size must be at least 1");
  const Mdp& mdp = problem.mdp;
  Templates t;
  t.n = mdp.n();
  t.template_size = n_inv;

  if (problem.quantifier == Quantifier::Existential) {
    for (std::size_t i = 0; i < t.n; ++i)
      t.init_vars.push_back(
          t.registry.add("m_" + std::to_string(i + 1), UnknownKind::Init));
  }

  if (problem.task == TaskKind::Verify) {
    const ConcretePolicy& given = *problem.given_policy;  // validated upstream
    if (given.kind == PolicyClass::Memoryless) {
      t.policy.resize(t.n);
      for (std::size_t s = 0; s < t.n; ++s)
        for (std::size_t a = 0; a < mdp.actions[s].size(); ++a)
          t.policy[s].push_back(UnknownPoly::constant(given.rows[s][a]));
    } else {
      t.distributional = true;
      auto lift = [&](const AffineForm& f) {
        SymbolicAffine e(t.n);
        e.constant = UnknownPoly::constant(f.constant);
        for (std::size_t i = 0; i < t.n; ++i)
          e.coeffs[i] = UnknownPoly::constant(f.coeffs[i]);
        return e;
      };
      t.nums.resize(t.n);
      for (std::size_t s = 0; s < t.n; ++s) {
        for (std::size_t a = 0; a < mdp.actions[s].size(); ++a)
          t.nums[s].push_back(lift(given.nums[s][a]));
        t.dens.push_back(lift(given.dens[s]));
      }
    }
  } else if (problem.policy_class == PolicyClass::Memoryless) {
    t.symbolic_policy = true;
    t.policy.resize(t.n);
    for (std::size_t s = 0; s < t.n; ++s)
      for (std::size_t a = 0; a < mdp.actions[s].size(); ++a)
        t.policy[s].push_back(UnknownPoly::var(t.registry.add(
            "p_" + mdp.states[s] + "_" + mdp.actions[s][a], UnknownKind::Policy)));
  } else {
    t.symbolic_policy = true;
    t.distributional = true;
    t.nums.resize(t.n);
    for (std::size_t s = 0; s < t.n; ++s) {
      for (std::size_t a = 0; a < mdp.actions[s].size(); ++a) {
        SymbolicAffine e(t.n);
        std::string base = "na_" + mdp.states[s] + "_" + mdp.actions[s][a] + "_";
        e.constant = UnknownPoly::var(t.registry.add(base + "0", UnknownKind::Policy));
        for (std::size_t i = 0; i < t.n; ++i)
          e.coeffs[i] = UnknownPoly::var(
              t.registry.add(base + std::to_string(i + 1), UnknownKind::Policy));
        t.nums[s].push_back(std::move(e));
      }
      SymbolicAffine d(t.n);
      std::string base = "dn_" + mdp.states[s] + "_";
      d.constant = UnknownPoly::var(t.registry.add(base + "0", UnknownKind::Policy));
      for (std::size_t i = 0; i < t.n; ++i)
        d.coeffs[i] = UnknownPoly::var(
            t.registry.add(base + std::to_string(i + 1), UnknownKind::Policy));
      t.dens.push_back(std::move(d));
    }
  }

  for (std::size_t i = 0; i <= t.n; ++i)
    t.rank.push_back(
        UnknownPoly::var(t.registry.add("rank_" + std::to_string(i + 1), UnknownKind::Rank)));
  t.invariant.resize(static_cast<std::size_t>(n_inv));
  for (int j = 1; j <= n_inv; ++j)
    for (std::size_t i = 0; i <= t.n; ++i)
      t.invariant[static_cast<std::size_t>(j - 1)].push_back(UnknownPoly::var(
          t.registry.add("inv_" + std::to_string(j) + "_" + std::to_string(i + 1),
                         UnknownKind::Invariant)));
  return t;
}

/// Universally quantified implication over the simplex. The right-hand side
/// is affine for memoryless policies and polynomial once distributional
/// denominators are cleared.
struct HornRow {
  SymbolicAffine expr;
  bool strict = false;
};

struct HornClause {
  std::vector<HornRow> lhs;
  StatePoly rhs;
  bool rhs_strict = false;
  std::string note;
};

enum class Rel { Eq, Ge, Gt };

struct GroundConstraint {
  UnknownPoly poly;  // poly =/>=/> 0
  Rel rel = Rel::Ge;
  std::string note;
};

struct ConstraintSystem {
  std::size_t n = 0;
  UnknownRegistry unknowns;
  std::vector<GroundConstraint> ground;
  std::vector<HornClause> horn;
  std::vector<std::string> diagnostics;
};

inline AffineRow negate_target_row(const AffineRow& row) {
  AffineRow out;
  out.form = -row.form;
  out.strict = !row.strict;
  return out;
}

namespace detail {

inline SymbolicAffine lift_row(const AffineForm& f, std::size_t n) {
  SymbolicAffine e(n);
  e.constant = UnknownPoly::constant(f.constant);
  for (std::size_t i = 0; i < n; ++i) e.coeffs[i] = UnknownPoly::constant(f.coeffs[i]);
  return e;
}

/// x_i >= 0 for all i, sum-to-one from both sides.
inline std::vector<HornRow> simplex_rows(std::size_t n) {
  std::vector<HornRow> rows;
  for (std::size_t i = 0; i < n; ++i) {
    SymbolicAffine e(n);
    e.coeffs[i] = UnknownPoly::constant(Rational(1));
    rows.push_back({std::move(e), false});
  }
  SymbolicAffine lo(n), hi(n);
  lo.constant = UnknownPoly::constant(Rational(-1));
  hi.constant = UnknownPoly::constant(Rational(1));
  for (std::size_t i = 0; i < n; ++i) {
    lo.coeffs[i] = UnknownPoly::constant(Rational(1));
    hi.coeffs[i] = UnknownPoly::constant(Rational(-1));
  }
  rows.push_back({std::move(lo), false});
  rows.push_back({std::move(hi), false});
  return rows;
}

/// e applied to the one-step image under a memoryless policy template:
/// coeff'[k] = sum_a p_{k,a} * sum_i delta(k,a,i) * e.coeff[i].
inline SymbolicAffine apply_step_memoryless(const SymbolicAffine& e, const Templates& t,
                                            const Mdp& mdp) {
  SymbolicAffine out(t.n);
  out.constant = e.constant;
  for (std::size_t k = 0; k < t.n; ++k) {
    UnknownPoly acc;
    for (std::size_t a = 0; a < mdp.actions[k].size(); ++a) {
      UnknownPoly inner;
      const Distribution& d = mdp.trans[k][a];
      for (std::size_t i = 0; i < t.n; ++i)
        if (!d.p[i].is_zero()) inner += e.coeffs[i].scaled(d.p[i]);
      if (!inner.is_zero()) acc += t.policy[k][a] * inner;
    }
    out.coeffs[k] = std::move(acc);
  }
  return out;
}

/// Denominator-cleared image for distributional policies:
/// prod_k den_k * e(step(x)), a polynomial in x. Sound on the invariant
/// region because Phi_pi forces every den_k >= 1 there.
inline StatePoly apply_step_cleared(const SymbolicAffine& e, const Templates& t,
                                    const Mdp& mdp) {
  const std::size_t n = t.n;
  std::vector<StatePoly> den(n);
  for (std::size_t k = 0; k < n; ++k) den[k] = StatePoly::from_affine(t.dens[k]);
  // prefix[k] = den_0 * .. * den_{k-1}; suffix[k] = den_{k+1} * .. * den_{n-1}
  std::vector<StatePoly> prefix(n + 1), suffix(n + 1);
  prefix[0] = StatePoly::one();
  for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = prefix[k] * den[k];
  suffix[n] = StatePoly::one();
  for (std::size_t k = n; k-- > 0;) suffix[k] = suffix[k + 1] * den[k];

  StatePoly out;
  {
    // constant term of e survives times the full product
    SymbolicAffine c(n);
    c.constant = e.constant;
    out += prefix[n] * StatePoly::from_affine(c);
  }
  for (std::size_t k = 0; k < n; ++k) {
    SymbolicAffine combined(n);
    bool any = false;
    for (std::size_t a = 0; a < mdp.actions[k].size(); ++a) {
      UnknownPoly inner;
      const Distribution& d = mdp.trans[k][a];
      for (std::size_t i = 0; i < n; ++i)
        if (!d.p[i].is_zero()) inner += e.coeffs[i].scaled(d.p[i]);
      if (inner.is_zero()) continue;
      any = true;
      combined += t.nums[k][a].scaled_by(inner);
    }
    if (!any) continue;
    StatePoly xk;
    xk.add({static_cast<int>(k)}, UnknownPoly::constant(Rational(1)));
    out += prefix[k] * suffix[k + 1] * StatePoly::from_affine(combined) * xk;
  }
  return out;
}

}  // namespace detail

/// Step 2: the full constraint system for the problem and templates.
inline ConstraintSystem collect_constraints(const ProblemSpec& problem,
                                            const Templates& t) {
  if (problem.target.rows.empty()) throw Error("empty target set");
  const Mdp& mdp = problem.mdp;
  const std::size_t n = t.n;
  ConstraintSystem sys;
  sys.n = n;
  sys.unknowns = t.registry;

  auto ground = [&](UnknownPoly p, Rel rel, std::string note) {
    sys.ground.push_back({std::move(p), rel, std::move(note)});
  };

  // Ground policy rows (memoryless synthesis).
  if (t.symbolic_policy && !t.distributional) {
    for (std::size_t s = 0; s < n; ++s) {
      UnknownPoly sum;
      for (std::size_t a = 0; a < mdp.actions[s].size(); ++a) sum += t.policy[s][a];
      sum -= UnknownPoly::constant(Rational(1));
      ground(std::move(sum), Rel::Eq, "policy row " + mdp.states[s]);
      for (std::size_t a = 0; a < mdp.actions[s].size(); ++a)
        ground(t.policy[s][a], Rel::Ge,
               "policy nonneg " + mdp.states[s] + ":" + mdp.actions[s][a]);
    }
  }

  // Initial-distribution constraints.
  std::optional<std::vector<UnknownPoly>> init_point;  // mu_0 as polynomials
  if (problem.quantifier == Quantifier::Unit) {
    init_point.emplace();
    for (const auto& v : problem.init_dist->p)
      init_point->push_back(UnknownPoly::constant(v));
  } else if (problem.quantifier == Quantifier::Existential) {
    init_point.emplace();
    for (std::size_t i = 0; i < n; ++i)
      init_point->push_back(UnknownPoly::var(t.init_vars[i]));
    UnknownPoly sum;
    for (std::size_t i = 0; i < n; ++i) {
      ground((*init_point)[i], Rel::Ge, "init simplex m_" + std::to_string(i + 1));
      sum += (*init_point)[i];
    }
    sum -= UnknownPoly::constant(Rational(1));
    ground(std::move(sum), Rel::Eq, "init simplex sum");
    for (std::size_t r = 0; r < problem.init_set.rows.size(); ++r) {
      const AffineRow& row = problem.init_set.rows[r];
      UnknownPoly p = UnknownPoly::constant(row.form.constant);
      for (std::size_t i = 0; i < n; ++i)
        p += (*init_point)[i].scaled(row.form.coeffs[i]);
      ground(std::move(p), row.strict ? Rel::Gt : Rel::Ge,
             "init-set row " + std::to_string(r + 1));
    }
  }

  // Phi_1: membership of the initial point in I (ground), or Init => I.
  if (init_point) {
    for (int j = 0; j < t.template_size; ++j) {
      UnknownPoly p = t.invariant[static_cast<std::size_t>(j)][0];
      for (std::size_t i = 0; i < n; ++i)
        p += t.invariant[static_cast<std::size_t>(j)][i + 1] * (*init_point)[i];
      ground(std::move(p), Rel::Ge, "init membership, inv row " + std::to_string(j + 1));
    }
  } else {
    for (int j = 0; j < t.template_size; ++j) {
      HornClause c;
      c.lhs = detail::simplex_rows(n);
      for (const auto& row : problem.init_set.rows)
        c.lhs.push_back({detail::lift_row(row.form, n), row.strict});
      c.rhs = StatePoly::from_affine(t.invariant_expr(static_cast<std::size_t>(j)));
      c.note = "init inclusion, inv row " + std::to_string(j + 1);
      sys.horn.push_back(std::move(c));
    }
  }

  auto base_lhs = [&](bool with_target_negation, std::size_t l) {
    std::vector<HornRow> rows = detail::simplex_rows(n);
    for (int j = 0; j < t.template_size; ++j)
      rows.push_back({t.invariant_expr(static_cast<std::size_t>(j)), false});
    if (with_target_negation) {
      AffineRow neg = negate_target_row(problem.target.rows[l]);
      rows.push_back({detail::lift_row(neg.form, n), neg.strict});
    }
    return rows;
  };

  // Phi_2: inductiveness of each invariant row on I \ T.
  for (std::size_t l = 0; l < problem.target.rows.size(); ++l)
    for (int j = 0; j < t.template_size; ++j) {
      HornClause c;
      c.lhs = base_lhs(true, l);
      SymbolicAffine row = t.invariant_expr(static_cast<std::size_t>(j));
      c.rhs = t.distributional
                  ? detail::apply_step_cleared(row, t, mdp)
                  : StatePoly::from_affine(detail::apply_step_memoryless(row, t, mdp));
      c.note = "inductiveness, target row " + std::to_string(l + 1) + " inv row " +
               std::to_string(j + 1);
      sys.horn.push_back(std::move(c));
    }

  // Phi_3: I inside the safe set.
  for (std::size_t h = 0; h < problem.safe.rows.size(); ++h) {
    HornClause c;
    c.lhs = base_lhs(false, 0);
    c.rhs = StatePoly::from_affine(detail::lift_row(problem.safe.rows[h].form, n));
    c.rhs_strict = problem.safe.rows[h].strict;
    c.note = "safety, safe row " + std::to_string(h + 1);
    sys.horn.push_back(std::move(c));
  }

  // Phi_4: rank nonnegative on I.
  {
    HornClause c;
    c.lhs = base_lhs(false, 0);
    c.rhs = StatePoly::from_affine(t.rank_expr());
    c.note = "rank nonnegativity";
    sys.horn.push_back(std::move(c));
  }

  // Phi_5: strict decrease by one on I \ T.
  for (std::size_t l = 0; l < problem.target.rows.size(); ++l) {
    HornClause c;
    c.lhs = base_lhs(true, l);
    SymbolicAffine rank = t.rank_expr();
    if (t.distributional) {
      StatePoly den_prod = StatePoly::one();
      for (std::size_t k = 0; k < n; ++k)
        den_prod = den_prod * StatePoly::from_affine(t.dens[k]);
      SymbolicAffine rank_minus_one = rank;
      rank_minus_one.constant -= UnknownPoly::constant(Rational(1));
      c.rhs = den_prod * StatePoly::from_affine(rank_minus_one) -
              detail::apply_step_cleared(rank, t, mdp);
    } else {
      SymbolicAffine decrease = rank - detail::apply_step_memoryless(rank, t, mdp);
      decrease.constant -= UnknownPoly::constant(Rational(1));
      c.rhs = StatePoly::from_affine(decrease);
    }
    c.note = "rank decrease, target row " + std::to_string(l + 1);
    sys.horn.push_back(std::move(c));
  }

  // Phi_pi for distributional synthesis: quantified well-formedness on I.
  if (t.symbolic_policy && t.distributional) {
    for (std::size_t s = 0; s < n; ++s) {
      {
        HornClause c;
        c.lhs = base_lhs(false, 0);
        SymbolicAffine d = t.dens[s];
        d.constant -= UnknownPoly::constant(Rational(1));
        c.rhs = StatePoly::from_affine(d);
        c.note = "policy denominator " + mdp.states[s];
        sys.horn.push_back(std::move(c));
      }
      for (std::size_t a = 0; a < mdp.actions[s].size(); ++a) {
        HornClause c;
        c.lhs = base_lhs(false, 0);
        c.rhs = StatePoly::from_affine(t.nums[s][a]);
        c.note = "policy numerator " + mdp.states[s] + ":" + mdp.actions[s][a];
        sys.horn.push_back(std::move(c));
      }
      SymbolicAffine sum(n);
      for (std::size_t a = 0; a < mdp.actions[s].size(); ++a) sum += t.nums[s][a];
      for (int dir = 0; dir < 2; ++dir) {
        HornClause c;
        c.lhs = base_lhs(false, 0);
        SymbolicAffine diff = dir == 0 ? sum - t.dens[s] : t.dens[s] - sum;
        c.rhs = StatePoly::from_affine(diff);
        c.note = std::string("policy row sum ") + (dir == 0 ? "le " : "ge ") + mdp.states[s];
        sys.horn.push_back(std::move(c));
      }
    }
  }

  return sys;
}

inline std::string rel_str(Rel r) {
  switch (r) {
    case Rel::Eq: return "= 0";
    case Rel::Ge: return ">= 0";
    case Rel::Gt: return "> 0";
  }
  return "?";
}

/// Debug dump, one constraint per line.
inline std::string dump(const ConstraintSystem& sys) {
  std::ostringstream os;
  for (const auto& g : sys.ground) os << g.poly.str() << ' ' << rel_str(g.rel) << '\n';
  for (const auto& c : sys.horn) {
    os << "forall x: ";
    for (std::size_t i = 0; i < c.lhs.size(); ++i) {
      if (i) os << " /\\ ";
      os << c.lhs[i].expr.str() << (c.lhs[i].strict ? " > 0" : " >= 0");
    }
    os << " => poly" << (c.rhs_strict ? " > 0" : " >= 0") << "   [" << c.note << "]\n";
  }
  return os.str();
}

}  // namespace dra
