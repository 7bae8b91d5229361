#pragma once

// Exact feasibility of conjunctions of linear constraints over the rationals:
// Gaussian elimination on the equalities, then Fourier-Motzkin with strictness
// tracking. Test-support oracle only; independent of the Farkas/Handelman
// translation it is used to judge.

#include <cstddef>
#include <vector>

#include "dra/rational.hpp"

namespace fmcheck {

enum class Rel { Eq, Ge, Gt };  // coeffs . x + constant (=|>=|>) 0

struct Row {
  std::vector<dra::Rational> coeffs;
  dra::Rational constant;
  Rel rel = Rel::Ge;
};

inline bool satisfiable(std::vector<Row> rows, std::size_t nvars) {
  using dra::Rational;

  // Equalities first: substitute pivots out.
  for (bool progress = true; progress;) {
    progress = false;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].rel != Rel::Eq) continue;
      std::size_t pivot = nvars;
      for (std::size_t j = 0; j < nvars; ++j)
        if (!rows[r].coeffs[j].is_zero()) {
          pivot = j;
          break;
        }
      if (pivot == nvars) continue;
      Row eq = rows[r];
      rows.erase(rows.begin() + static_cast<long>(r));
      for (auto& other : rows) {
        if (other.coeffs[pivot].is_zero()) continue;
        Rational f = other.coeffs[pivot] / eq.coeffs[pivot];
        for (std::size_t j = 0; j < nvars; ++j)
          other.coeffs[j] -= f * eq.coeffs[j];
        other.constant -= f * eq.constant;
      }
      progress = true;
      break;
    }
  }
  for (const auto& row : rows) {
    if (row.rel != Rel::Eq) continue;
    bool all_zero = true;
    for (const auto& c : row.coeffs)
      if (!c.is_zero()) all_zero = false;
    if (!all_zero) return false;  // unreachable after elimination
    if (!row.constant.is_zero()) return false;
  }
  rows.erase(std::remove_if(rows.begin(), rows.end(),
                            [](const Row& r) { return r.rel == Rel::Eq; }),
             rows.end());

  // Fourier-Motzkin elimination of each variable in turn.
  for (std::size_t j = 0; j < nvars; ++j) {
    std::vector<Row> lower, upper, rest;
    for (auto& row : rows) {
      if (row.coeffs[j].is_zero())
        rest.push_back(row);
      else if (row.coeffs[j].sign() > 0)
        lower.push_back(row);  // x_j >= -(rest)/c
      else
        upper.push_back(row);
    }
    std::vector<Row> next = rest;
    for (const auto& lo : lower)
      for (const auto& up : upper) {
        // scale to cancel x_j; combined strict iff either side strict
        Rational a = lo.coeffs[j], b = -up.coeffs[j];
        Row combined;
        combined.coeffs.assign(nvars, Rational(0));
        for (std::size_t k = 0; k < nvars; ++k)
          combined.coeffs[k] = lo.coeffs[k] * b + up.coeffs[k] * a;
        combined.constant = lo.constant * b + up.constant * a;
        combined.rel = (lo.rel == Rel::Gt || up.rel == Rel::Gt) ? Rel::Gt : Rel::Ge;
        next.push_back(std::move(combined));
      }
    rows = std::move(next);
  }

  for (const auto& row : rows) {
    int s = row.constant.sign();
    if (row.rel == Rel::Ge ? s < 0 : s <= 0) return false;
  }
  return true;
}

}  // namespace fmcheck
