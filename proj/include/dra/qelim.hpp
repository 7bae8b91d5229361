#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dra/certgen.hpp"

namespace dra {

/// Replaces a strict conclusion "e > 0" by "e - eps >= 0" with a fresh
/// eps > 0. Valid because every clause premise is conjoined with the closed,
/// bounded simplex.
inline std::pair<HornClause, GroundConstraint> epsilon_shift(const HornClause& clause,
                                                             UnknownRegistry& registry) {
  if (!clause.rhs_strict) throw Error("epsilon_shift on a non-strict conclusion");
  std::string eps = registry.fresh_epsilon();
  HornClause shifted = clause;
  shifted.rhs.add({}, -UnknownPoly::var(eps));
  shifted.rhs_strict = false;
  GroundConstraint positivity{UnknownPoly::var(eps), Rel::Gt, "epsilon " + eps};
  return {std::move(shifted), std::move(positivity)};
}

struct FarkasOutput {
  std::vector<std::string> multipliers;        // y_0 first, then one per row
  std::vector<GroundConstraint> constraints;   // nonnegativity, then equations
};

/// Strict-Farkas translation: the conclusion is a nonnegative combination of
/// "1 >= 0" and the premise rows. Strict and non-strict premises are treated
/// alike; the conclusion must be affine and non-strict.
inline FarkasOutput farkas_translate(const HornClause& clause, std::size_t n,
                                     UnknownRegistry& registry) {
  if (clause.rhs_strict)
    throw Error("farkas_translate requires a non-strict conclusion (epsilon-shift first)");
  if (clause.rhs.x_degree() > 1)
    throw Error("farkas_translate requires an affine conclusion");

  FarkasOutput out;
  std::string y0 = registry.fresh_multiplier();
  out.multipliers.push_back(y0);
  for (std::size_t j = 0; j < clause.lhs.size(); ++j)
    out.multipliers.push_back(registry.fresh_multiplier());
  for (const auto& y : out.multipliers)
    out.constraints.push_back({UnknownPoly::var(y), Rel::Ge, "multiplier " + y});

  const std::size_t dim = clause.lhs.empty() ? n : clause.lhs.front().expr.n();
  SymbolicAffine combo(dim);
  combo.constant = UnknownPoly::var(y0);
  for (std::size_t j = 0; j < clause.lhs.size(); ++j) {
    UnknownPoly yj = UnknownPoly::var(out.multipliers[j + 1]);
    combo += clause.lhs[j].expr.scaled_by(yj);
  }
  SymbolicAffine rhs = clause.rhs.to_affine(dim);
  auto equations = match_coefficients(rhs, combo);
  int idx = 0;
  for (auto& eq : equations)
    out.constraints.push_back(
        {std::move(eq), Rel::Eq, clause.note + " eq " + std::to_string(idx++)});
  return out;
}

struct HandelmanOutput {
  std::vector<std::string> multipliers;      // aligned with basis; [0] is strict
  std::vector<StatePoly> basis;              // Prod_K, empty product first
  std::vector<GroundConstraint> constraints;
};

namespace detail {

inline void enumerate_multisets(std::size_t rows, int k, std::vector<std::size_t>& cur,
                                std::size_t from,
                                std::vector<std::vector<std::size_t>>& out) {
  if (static_cast<int>(cur.size()) == k) {
    out.push_back(cur);
    return;
  }
  for (std::size_t i = from; i < rows; ++i) {
    cur.push_back(i);
    enumerate_multisets(rows, k, cur, i, out);
    cur.pop_back();
  }
}

}  // namespace detail

/// Number of products of at most k rows chosen from n with repetition.
inline std::size_t handelman_basis_size(std::size_t n_rows, int k) {
  // sum over t of multiset coefficient C(n_rows + t - 1, t)
  std::size_t total = 0;
  for (int t = 0; t <= k; ++t) {
    std::size_t c = 1;
    for (int i = 1; i <= t; ++i)
      c = c * (n_rows + static_cast<std::size_t>(i) - 1) / static_cast<std::size_t>(i);
    total += c;
  }
  return total;
}

/// Handelman translation with product degree bound K: the conclusion equals a
/// combination y_0 + sum y_b * prod_b with y_0 > 0, matching coefficients of
/// every monomial in the state variables.
inline HandelmanOutput handelman_translate(const HornClause& clause, int degree_k,
                                           UnknownRegistry& registry) {
  if (degree_k < 1) throw Error("handelman degree bound must be at least 1");
  if (clause.rhs_strict)
    throw Error("handelman_translate requires a non-strict conclusion (epsilon-shift first)");
  HandelmanOutput out;

  std::vector<std::vector<std::size_t>> index_sets;
  std::vector<std::size_t> cur;
  for (int t = 0; t <= degree_k; ++t)
    detail::enumerate_multisets(clause.lhs.size(), t, cur, 0, index_sets);

  for (const auto& set : index_sets) {
    StatePoly prod = StatePoly::one();
    for (std::size_t j : set) prod = prod * StatePoly::from_affine(clause.lhs[j].expr);
    out.basis.push_back(std::move(prod));
    out.multipliers.push_back(registry.fresh_multiplier());
  }
  for (std::size_t b = 0; b < out.multipliers.size(); ++b)
    out.constraints.push_back({UnknownPoly::var(out.multipliers[b]),
                               b == 0 ? Rel::Gt : Rel::Ge,
                               "multiplier " + out.multipliers[b]});

  StatePoly diff = clause.rhs;
  for (std::size_t b = 0; b < out.basis.size(); ++b) {
    UnknownPoly yb = UnknownPoly::var(out.multipliers[b]);
    StatePoly scaled;
    for (const auto& [m, c] : out.basis[b].terms) scaled.add(m, c * yb);
    diff -= scaled;
  }
  int idx = 0;
  for (const auto& [mono, poly] : diff.terms)
    out.constraints.push_back(
        {poly, Rel::Eq, clause.note + " monomial " + std::to_string(idx++)});
  return out;
}

struct TranslateOptions {
  int handelman_k = 2;
};

/// Eliminates every universally quantified clause, producing an
/// equisatisfiable purely existential system.
inline ConstraintSystem translate_system(const ConstraintSystem& sys,
                                         const TranslateOptions& opts = {}) {
  ConstraintSystem out;
  out.n = sys.n;
  out.unknowns = sys.unknowns;
  out.ground = sys.ground;
  out.diagnostics = sys.diagnostics;

  for (const auto& clause_in : sys.horn) {
    HornClause clause = clause_in;
    // Premise sanity: a constant row that cannot hold makes the clause
    // vacuously true, yet its translation may be unsatisfiable. Lemma-level
    // completeness assumes satisfiable premises, so surface it.
    for (const auto& row : clause.lhs) {
      bool all_zero = true;
      for (const auto& c : row.expr.coeffs)
        if (!c.is_zero()) { all_zero = false; break; }
      if (all_zero && row.expr.constant.is_constant()) {
        Rational v = row.expr.constant.constant_value();
        if (row.strict ? v.sign() <= 0 : v.sign() < 0)
          out.diagnostics.push_back("clause '" + clause.note +
                                    "' has an unsatisfiable premise row; it holds "
                                    "vacuously but the translated system may not");
      }
    }
    if (clause.rhs_strict) {
      auto [shifted, positivity] = epsilon_shift(clause, out.unknowns);
      out.ground.push_back(std::move(positivity));
      clause = std::move(shifted);
    }
    if (clause.rhs.x_degree() <= 1) {
      FarkasOutput tr = farkas_translate(clause, out.n, out.unknowns);
      for (auto& g : tr.constraints) out.ground.push_back(std::move(g));
    } else {
      HandelmanOutput tr = handelman_translate(clause, opts.handelman_k, out.unknowns);
      for (auto& g : tr.constraints) out.ground.push_back(std::move(g));
    }
  }
  return out;
}

}  // namespace dra
