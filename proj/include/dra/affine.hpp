#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dra/polynomial.hpp"

namespace dra {

/// Affine expression over state-probability variables x_1..x_n whose
/// coefficients are polynomials in unknowns.
struct SymbolicAffine {
  UnknownPoly constant;
  std::vector<UnknownPoly> coeffs;

  SymbolicAffine() = default;
  explicit SymbolicAffine(std::size_t n) : coeffs(n) {}

  std::size_t n() const { return coeffs.size(); }

  static SymbolicAffine constant_expr(std::size_t n, const Rational& c) {
    SymbolicAffine e(n);
    e.constant = UnknownPoly::constant(c);
    return e;
  }

  SymbolicAffine& operator+=(const SymbolicAffine& o) {
    check_same_n(o);
    constant += o.constant;
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += o.coeffs[i];
    return *this;
  }
  SymbolicAffine& operator-=(const SymbolicAffine& o) {
    check_same_n(o);
    constant -= o.constant;
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] -= o.coeffs[i];
    return *this;
  }
  friend SymbolicAffine operator+(SymbolicAffine a, const SymbolicAffine& b) { return a += b; }
  friend SymbolicAffine operator-(SymbolicAffine a, const SymbolicAffine& b) { return a -= b; }
  SymbolicAffine operator-() const {
    SymbolicAffine r(coeffs.size());
    r.constant = -constant;
    for (std::size_t i = 0; i < coeffs.size(); ++i) r.coeffs[i] = -coeffs[i];
    return r;
  }

  SymbolicAffine scaled_by(const UnknownPoly& p) const {
    SymbolicAffine r(coeffs.size());
    r.constant = constant * p;
    for (std::size_t i = 0; i < coeffs.size(); ++i) r.coeffs[i] = coeffs[i] * p;
    return r;
  }

  bool is_zero() const {
    if (!constant.is_zero()) return false;
    for (const auto& c : coeffs)
      if (!c.is_zero()) return false;
    return true;
  }

  /// Exact value at a concrete point x under a concrete unknown assignment.
  Rational eval(const std::vector<Rational>& x,
                const std::map<std::string, Rational>& assignment) const {
    if (x.size() != coeffs.size())
      throw Error("affine_eval: point has wrong dimension");
    Rational total = constant.eval(assignment);
    for (std::size_t i = 0; i < coeffs.size(); ++i)
      total += coeffs[i].eval(assignment) * x[i];
    return total;
  }

  std::string str() const {
    std::ostringstream os;
    os << '(' << constant.str() << ')';
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      if (coeffs[i].is_zero()) continue;
      os << " + (" << coeffs[i].str() << ")*x" << i + 1;
    }
    return os.str();
  }

 private:
  void check_same_n(const SymbolicAffine& o) const {
    if (o.coeffs.size() != coeffs.size())
      throw Error("affine expressions over different state sets");
  }
};

/// Coefficient-matching: lhs == rhs as affine forms in x, rewritten as a list
/// of "difference = 0" polynomial equations (constant term first, then one per
/// state variable). All-zero equations are dropped.
inline std::vector<UnknownPoly> match_coefficients(const SymbolicAffine& lhs,
                                                   const SymbolicAffine& rhs) {
  if (lhs.n() != rhs.n())
    throw Error("match_coefficients: mismatched state-variable index sets");
  std::vector<UnknownPoly> eqs;
  UnknownPoly c = lhs.constant - rhs.constant;
  if (!c.is_zero()) eqs.push_back(std::move(c));
  for (std::size_t i = 0; i < lhs.n(); ++i) {
    UnknownPoly d = lhs.coeffs[i] - rhs.coeffs[i];
    if (!d.is_zero()) eqs.push_back(std::move(d));
  }
  return eqs;
}

/// Multiset of state-variable indices, kept sorted. Empty = constant monomial.
using StateMonomial = std::vector<int>;

/// Polynomial in the state variables whose coefficients are UnknownPolys.
/// Arises from clearing the denominators of rational-function policies.
struct StatePoly {
  std::map<StateMonomial, UnknownPoly> terms;

  static StatePoly from_affine(const SymbolicAffine& e) {
    StatePoly p;
    p.add({}, e.constant);
    for (std::size_t i = 0; i < e.n(); ++i) p.add({static_cast<int>(i)}, e.coeffs[i]);
    return p;
  }
  static StatePoly one() {
    StatePoly p;
    p.add({}, UnknownPoly::constant(Rational(1)));
    return p;
  }

  void add(const StateMonomial& m, const UnknownPoly& c) {
    if (c.is_zero()) return;
    auto it = terms.find(m);
    if (it == terms.end()) {
      terms[m] = c;
    } else {
      it->second += c;
      if (it->second.is_zero()) terms.erase(it);
    }
  }

  StatePoly& operator+=(const StatePoly& o) {
    for (const auto& [m, c] : o.terms) add(m, c);
    return *this;
  }
  StatePoly& operator-=(const StatePoly& o) {
    for (const auto& [m, c] : o.terms) add(m, -c);
    return *this;
  }
  friend StatePoly operator+(StatePoly a, const StatePoly& b) { return a += b; }
  friend StatePoly operator-(StatePoly a, const StatePoly& b) { return a -= b; }

  friend StatePoly operator*(const StatePoly& a, const StatePoly& b) {
    StatePoly r;
    for (const auto& [ma, ca] : a.terms) {
      for (const auto& [mb, cb] : b.terms) {
        StateMonomial m;
        m.reserve(ma.size() + mb.size());
        std::merge(ma.begin(), ma.end(), mb.begin(), mb.end(), std::back_inserter(m));
        r.add(m, ca * cb);
      }
    }
    return r;
  }

  bool is_zero() const { return terms.empty(); }
  std::size_t x_degree() const {
    std::size_t d = 0;
    for (const auto& [m, c] : terms) d = std::max(d, m.size());
    return d;
  }

  /// Degree <= 1 in x; convert back to an affine expression.
  SymbolicAffine to_affine(std::size_t n) const {
    SymbolicAffine e(n);
    for (const auto& [m, c] : terms) {
      if (m.empty())
        e.constant = c;
      else if (m.size() == 1)
        e.coeffs[static_cast<std::size_t>(m[0])] = c;
      else
        throw Error("polynomial of x-degree > 1 is not affine");
    }
    return e;
  }

  Rational eval(const std::vector<Rational>& x,
                const std::map<std::string, Rational>& assignment) const {
    Rational total(0);
    for (const auto& [m, c] : terms) {
      Rational t = c.eval(assignment);
      for (int i : m) t *= x[static_cast<std::size_t>(i)];
      total += t;
    }
    return total;
  }
};

}  // namespace dra
