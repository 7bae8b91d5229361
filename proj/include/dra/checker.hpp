#pragma once

#include <array>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dra/model.hpp"
#include "dra/smt.hpp"

// Independent certificate checker. Deliberately shares only the model types,
// step(), and the solver process plumbing with the synthesizer; it builds its
// own negation queries from concrete coefficients and never touches the
// Farkas/Handelman machinery.

namespace dra {

struct ConditionResult {
  bool pass = false;
  bool sampled_incomplete = false;  // distributional fallback was used
  std::optional<Distribution> witness;
  std::string detail;
};

struct CheckReport {
  std::array<ConditionResult, 5> conditions;

  bool pass() const {
    for (const auto& c : conditions)
      if (!c.pass) return false;
    return true;
  }
  std::string str() const {
    static const char* kNames[5] = {
        "initial distribution in I", "inductiveness of I until T", "safety (I within H)",
        "nonnegativity of R on I", "strict decrease of R until T"};
    std::ostringstream os;
    for (std::size_t i = 0; i < 5; ++i) {
      const auto& c = conditions[i];
      os << "condition " << i + 1 << " (" << kNames[i] << "): "
         << (c.pass ? (c.sampled_incomplete ? "pass [sampled (incomplete)]" : "pass")
                    : "FAIL");
      if (!c.detail.empty()) os << " — " << c.detail;
      if (c.witness) os << " witness: " << c.witness->str();
      os << '\n';
    }
    return os.str();
  }
};

namespace check_detail {

/// Concrete polynomial over the state variables (monomial = sorted indices).
using XPoly = std::map<std::vector<int>, Rational>;

inline void xp_add(XPoly& p, const std::vector<int>& m, const Rational& c) {
  if (c.is_zero()) return;
  auto it = p.find(m);
  if (it == p.end())
    p[m] = c;
  else {
    it->second += c;
    if (it->second.is_zero()) p.erase(it);
  }
}

inline XPoly xp_from_affine(const AffineForm& f) {
  XPoly p;
  xp_add(p, {}, f.constant);
  for (std::size_t i = 0; i < f.coeffs.size(); ++i)
    xp_add(p, {static_cast<int>(i)}, f.coeffs[i]);
  return p;
}

inline XPoly xp_mul(const XPoly& a, const XPoly& b) {
  XPoly r;
  for (const auto& [ma, ca] : a)
    for (const auto& [mb, cb] : b) {
      std::vector<int> m;
      m.reserve(ma.size() + mb.size());
      std::merge(ma.begin(), ma.end(), mb.begin(), mb.end(), std::back_inserter(m));
      xp_add(r, m, ca * cb);
    }
  return r;
}

inline XPoly xp_sub(XPoly a, const XPoly& b) {
  for (const auto& [m, c] : b) xp_add(a, m, -c);
  return a;
}

inline Rational xp_eval(const XPoly& p, const std::vector<Rational>& x) {
  Rational total(0);
  for (const auto& [m, c] : p) {
    Rational t = c;
    for (int i : m) t *= x[static_cast<std::size_t>(i)];
    total += t;
  }
  return total;
}

inline std::size_t xp_degree(const XPoly& p) {
  std::size_t d = 0;
  for (const auto& [m, c] : p) d = std::max(d, m.size());
  return d;
}

struct XConstraint {
  XPoly poly;
  bool strict = false;  // poly > 0 vs poly >= 0
};

inline bool xc_holds(const XConstraint& c, const std::vector<Rational>& x) {
  Rational v = xp_eval(c.poly, x);
  return c.strict ? v.sign() > 0 : v.sign() >= 0;
}

inline void write_xpoly(std::ostream& os, const XPoly& p) {
  if (p.empty()) {
    os << '0';
    return;
  }
  bool wrap = p.size() > 1;
  if (wrap) os << "(+";
  for (const auto& [m, c] : p) {
    if (wrap) os << ' ';
    auto rat = [&](const Rational& r) {
      if (r.sign() < 0) {
        os << "(- ";
        if (r.abs().is_integer())
          os << r.abs().num().get_str();
        else
          os << "(/ " << r.abs().num().get_str() << ' ' << r.abs().den().get_str() << ')';
        os << ')';
      } else if (r.is_integer()) {
        os << r.num().get_str();
      } else {
        os << "(/ " << r.num().get_str() << ' ' << r.den().get_str() << ')';
      }
    };
    if (m.empty()) {
      rat(c);
    } else if (c == Rational(1) && m.size() == 1) {
      os << 'x' << m[0];
    } else {
      os << "(*";
      if (c != Rational(1)) {
        os << ' ';
        rat(c);
      }
      for (int i : m) os << " x" << i;
      os << ')';
    }
  }
  if (wrap) os << ')';
}

inline std::string emit_query(std::size_t n, const std::vector<XConstraint>& cs) {
  std::size_t deg = 0;
  for (const auto& c : cs) deg = std::max(deg, xp_degree(c.poly));
  std::ostringstream os;
  os << "(set-logic " << (deg > 1 ? "QF_NRA" : "QF_LRA") << ")\n";
  for (std::size_t i = 0; i < n; ++i) os << "(declare-const x" << i << " Real)\n";
  for (const auto& c : cs) {
    os << "(assert (" << (c.strict ? ">" : ">=") << ' ';
    write_xpoly(os, c.poly);
    os << " 0))\n";
  }
  os << "(check-sat)\n(get-model)\n";
  return os.str();
}

inline std::vector<XConstraint> simplex_constraints(std::size_t n) {
  std::vector<XConstraint> cs;
  for (std::size_t i = 0; i < n; ++i) {
    XPoly p;
    xp_add(p, {static_cast<int>(i)}, Rational(1));
    cs.push_back({std::move(p), false});
  }
  XPoly lo, hi;
  xp_add(lo, {}, Rational(-1));
  xp_add(hi, {}, Rational(1));
  for (std::size_t i = 0; i < n; ++i) {
    xp_add(lo, {static_cast<int>(i)}, Rational(1));
    xp_add(hi, {static_cast<int>(i)}, Rational(-1));
  }
  cs.push_back({std::move(lo), false});
  cs.push_back({std::move(hi), false});
  return cs;
}

/// Negation of "form >= 0" is "-form > 0"; of "form > 0" is "-form >= 0".
inline XConstraint negate_row(const AffineRow& row) {
  return {xp_from_affine(-row.form), !row.strict};
}

inline Distribution witness_from_model(const std::map<std::string, Rational>& model,
                                       std::size_t n) {
  Distribution d;
  d.p.assign(n, Rational(0));
  for (std::size_t i = 0; i < n; ++i) {
    auto it = model.find("x" + std::to_string(i));
    if (it != model.end()) d.p[i] = it->second;
  }
  d.validate();
  return d;
}

}  // namespace check_detail

/// Checks the five certificate conditions by negation queries with concrete
/// coefficients. Memoryless policies yield linear-arithmetic queries and the
/// answers are exact; distributional policies yield nonlinear queries with a
/// 10000-point exact-sampling fallback marked "sampled (incomplete)".
inline CheckReport check_certificate(const ProblemSpec& problem, const ConcretePolicy& policy,
                                     const Certificate& cert, const SolverConfig& config,
                                     std::optional<Distribution> mu0_override = std::nullopt) {
  using namespace check_detail;
  const Mdp& mdp = problem.mdp;
  const std::size_t n = mdp.n();
  policy.validate(mdp);
  for (const auto& row : cert.invariant.rows)
    if (row.strict) throw Error("certificate invariant rows must be non-strict");

  CheckReport report;

  // Condition 1. Unit/existential: exact membership arithmetic. Universal:
  // inclusion queries Init /\ simplex /\ not(inv row).
  std::optional<Distribution> mu0 = mu0_override;
  if (!mu0 && problem.quantifier != Quantifier::Universal) mu0 = problem.init_dist;
  if (problem.quantifier != Quantifier::Universal) {
    if (!mu0) throw Error("condition 1 needs the initial distribution");
    auto& c1 = report.conditions[0];
    c1.pass = true;
    if (problem.quantifier == Quantifier::Existential &&
        !problem.init_set.contains(mu0->p)) {
      c1.pass = false;
      c1.witness = *mu0;
      c1.detail = "initial distribution lies outside Init";
    }
    int bad = cert.invariant.first_violated(mu0->p);
    if (c1.pass && bad >= 0) {
      c1.pass = false;
      c1.witness = *mu0;
      c1.detail = "initial distribution violates invariant row " + std::to_string(bad + 1);
    }
  }

  // Assemble negation queries; run them through one solver batch.
  struct Pending {
    int condition;           // 0-based index into report.conditions
    std::string detail;      // set on sat
    std::vector<XConstraint> region;  // for exact witness re-verification
    XConstraint violation;
  };
  std::vector<Pending> pending;

  auto region_I = [&]() {
    std::vector<XConstraint> cs = simplex_constraints(n);
    for (const auto& row : cert.invariant.rows)
      cs.push_back({xp_from_affine(row.form), false});
    return cs;
  };

  if (problem.quantifier == Quantifier::Universal) {
    for (std::size_t j = 0; j < cert.invariant.rows.size(); ++j) {
      Pending q;
      q.condition = 0;
      q.detail = "Init point outside invariant row " + std::to_string(j + 1);
      q.region = simplex_constraints(n);
      for (const auto& row : problem.init_set.rows)
        q.region.push_back({xp_from_affine(row.form), row.strict});
      q.violation = negate_row(cert.invariant.rows[j]);
      pending.push_back(std::move(q));
    }
  }

  const bool memoryless = policy.kind == PolicyClass::Memoryless;
  std::vector<std::vector<Rational>> M;
  if (memoryless) M = transformer_matrix(policy, mdp);

  // Row applied to the one-step image; exact affine composition.
  auto compose_affine = [&](const AffineForm& g) {
    AffineForm out(n);
    out.constant = g.constant;
    for (std::size_t k = 0; k < n; ++k) {
      Rational acc(0);
      for (std::size_t i = 0; i < n; ++i)
        if (!g.coeffs[i].is_zero() && !M[i][k].is_zero()) acc += g.coeffs[i] * M[i][k];
      out.coeffs[k] = acc;
    }
    return out;
  };

  // Distributional clearing: prod_k den_k * g(step(x)), a concrete polynomial.
  auto cleared_image = [&](const AffineForm& g) {
    std::vector<XPoly> den(n);
    for (std::size_t k = 0; k < n; ++k) den[k] = xp_from_affine(policy.dens[k]);
    std::vector<XPoly> prefix(n + 1), suffix(n + 1);
    XPoly one;
    xp_add(one, {}, Rational(1));
    prefix[0] = one;
    for (std::size_t k = 0; k < n; ++k) prefix[k + 1] = xp_mul(prefix[k], den[k]);
    suffix[n] = one;
    for (std::size_t k = n; k-- > 0;) suffix[k] = xp_mul(suffix[k + 1], den[k]);
    XPoly out;
    XPoly c0;
    xp_add(c0, {}, g.constant);
    out = xp_mul(prefix[n], c0);
    for (std::size_t k = 0; k < n; ++k) {
      AffineForm combined(n);
      bool any = false;
      for (std::size_t a = 0; a < mdp.actions[k].size(); ++a) {
        Rational inner(0);
        const Distribution& d = mdp.trans[k][a];
        for (std::size_t i = 0; i < n; ++i)
          if (!d.p[i].is_zero()) inner += g.coeffs[i] * d.p[i];
        if (inner.is_zero()) continue;
        any = true;
        combined.constant += policy.nums[k][a].constant * inner;
        for (std::size_t i = 0; i < n; ++i)
          combined.coeffs[i] += policy.nums[k][a].coeffs[i] * inner;
      }
      if (!any) continue;
      XPoly xk;
      xp_add(xk, {static_cast<int>(k)}, Rational(1));
      XPoly piece = xp_mul(xp_mul(prefix[k], suffix[k + 1]),
                           xp_mul(xp_from_affine(combined), xk));
      for (const auto& [m, coef] : piece) xp_add(out, m, coef);
    }
    return out;
  };

  auto full_den_product = [&]() {
    XPoly one;
    xp_add(one, {}, Rational(1));
    XPoly prod = one;
    for (std::size_t k = 0; k < n; ++k)
      prod = xp_mul(prod, xp_from_affine(policy.dens[k]));
    return prod;
  };

  auto region_with_dens = [&](std::vector<XConstraint> cs) {
    if (!memoryless)
      for (std::size_t k = 0; k < n; ++k) {
        AffineForm d = policy.dens[k];
        d.constant -= Rational(1);
        cs.push_back({xp_from_affine(d), false});  // den_k >= 1
      }
    return cs;
  };

  // Distributional well-formedness: denominators at least one on I.
  if (!memoryless) {
    for (std::size_t k = 0; k < n; ++k) {
      Pending q;
      q.condition = 1;
      q.detail = "policy denominator for " + mdp.states[k] + " drops below 1 on I";
      q.region = region_I();
      AffineForm d = policy.dens[k];
      d.constant -= Rational(1);
      q.violation = {xp_from_affine(-d), true};  // 1 - den > 0
      pending.push_back(std::move(q));
    }
    for (std::size_t s = 0; s < n; ++s)
      for (std::size_t a = 0; a < mdp.actions[s].size(); ++a) {
        Pending q;
        q.condition = 1;
        q.detail = "policy numerator for (" + mdp.states[s] + "," + mdp.actions[s][a] +
                   ") negative on I";
        q.region = region_I();
        q.violation = {xp_from_affine(-policy.nums[s][a]), true};
        pending.push_back(std::move(q));
      }
  }

  // Condition 2: for x in I \ T, every invariant row holds at step(x).
  for (std::size_t l = 0; l < problem.target.rows.size(); ++l)
    for (std::size_t j = 0; j < cert.invariant.rows.size(); ++j) {
      Pending q;
      q.condition = 1;
      q.detail = "step image leaves invariant row " + std::to_string(j + 1);
      q.region = region_with_dens(region_I());
      q.region.push_back(negate_row(problem.target.rows[l]));
      if (memoryless) {
        AffineForm img = compose_affine(cert.invariant.rows[j].form);
        q.violation = {xp_from_affine(-img), true};
      } else {
        XPoly img = cleared_image(cert.invariant.rows[j].form);
        XPoly neg;
        for (const auto& [m, c] : img) xp_add(neg, m, -c);
        q.violation = {std::move(neg), true};
      }
      pending.push_back(std::move(q));
    }

  // Condition 3: I inside every safe row.
  for (std::size_t h = 0; h < problem.safe.rows.size(); ++h) {
    Pending q;
    q.condition = 2;
    q.detail = "invariant escapes safe row " + std::to_string(h + 1);
    q.region = region_I();
    q.violation = negate_row(problem.safe.rows[h]);
    pending.push_back(std::move(q));
  }

  // Condition 4: rank nonnegative on I.
  {
    Pending q;
    q.condition = 3;
    q.detail = "rank negative on I";
    q.region = region_I();
    q.violation = {xp_from_affine(-cert.rank), true};
    pending.push_back(std::move(q));
  }

  // Condition 5: rank decreases by at least 1 on I \ T.
  for (std::size_t l = 0; l < problem.target.rows.size(); ++l) {
    Pending q;
    q.condition = 4;
    q.detail = "rank fails to decrease by 1";
    q.region = region_with_dens(region_I());
    q.region.push_back(negate_row(problem.target.rows[l]));
    if (memoryless) {
      AffineForm dec = cert.rank;
      AffineForm img = compose_affine(cert.rank);
      dec.constant -= img.constant + Rational(1);
      for (std::size_t i = 0; i < n; ++i) dec.coeffs[i] -= img.coeffs[i];
      q.violation = {xp_from_affine(-dec), true};
    } else {
      AffineForm rank_minus_one = cert.rank;
      rank_minus_one.constant -= Rational(1);
      XPoly lhs = xp_mul(full_den_product(), xp_from_affine(rank_minus_one));
      XPoly dec = xp_sub(lhs, cleared_image(cert.rank));
      XPoly neg;
      for (const auto& [m, c] : dec) xp_add(neg, m, -c);
      q.violation = {std::move(neg), true};
    }
    pending.push_back(std::move(q));
  }

  // Mark untouched conditions as passing; queries may flip them below.
  for (int k = 1; k < 5; ++k) report.conditions[static_cast<std::size_t>(k)].pass = true;
  if (problem.quantifier == Quantifier::Universal) report.conditions[0].pass = true;

  std::vector<std::string> texts;
  for (const auto& q : pending) {
    std::vector<XConstraint> cs = q.region;
    cs.push_back(q.violation);
    texts.push_back(emit_query(n, cs));
  }
  std::vector<SolverVerdict> verdicts = run_solver_many(texts, config);

  std::mt19937_64 rng(0x5eed);
  auto sampled_check = [&](const Pending& q, ConditionResult& res) {
    // Exact-rational sampling fallback for nonlinear queries.
    for (int trial = 0; trial < 10000; ++trial) {
      std::vector<Rational> x(n, Rational(0));
      Rational sum(0);
      for (std::size_t i = 0; i < n; ++i) {
        long w = static_cast<long>(rng() % 100);
        x[i] = Rational(w);
        sum += x[i];
      }
      if (sum.is_zero()) continue;
      for (auto& v : x) v /= sum;
      bool inside = true;
      for (const auto& c : q.region)
        if (!xc_holds(c, x)) {
          inside = false;
          break;
        }
      if (!inside) continue;
      if (xc_holds(q.violation, x)) {
        res.pass = false;
        res.witness = Distribution(x);
        res.detail = q.detail;
        return;
      }
    }
    res.sampled_incomplete = true;
  };

  for (std::size_t i = 0; i < pending.size(); ++i) {
    const Pending& q = pending[i];
    ConditionResult& res = report.conditions[static_cast<std::size_t>(q.condition)];
    if (!res.pass) continue;  // keep the first witness
    const SolverVerdict& v = verdicts[i];
    switch (v.kind) {
      case VerdictKind::Unsat:
        break;
      case VerdictKind::Sat: {
        Distribution w = witness_from_model(v.model, n);
        // Bit-trustworthy: re-verify the witness exactly before reporting.
        for (const auto& c : q.region)
          if (!xc_holds(c, w.p))
            throw Error("solver witness fails exact re-evaluation (region)");
        if (!xc_holds(q.violation, w.p))
          throw Error("solver witness fails exact re-evaluation (violation)");
        res.pass = false;
        res.witness = std::move(w);
        res.detail = q.detail;
        break;
      }
      case VerdictKind::Timeout:
      case VerdictKind::SolverError: {
        // One individual retry: batches occasionally hiccup.
        SolverVerdict again = run_solver(texts[i], config);
        if (again.kind == VerdictKind::Unsat) break;
        if (again.kind == VerdictKind::Sat) {
          Distribution w = witness_from_model(again.model, n);
          for (const auto& c : q.region)
            if (!xc_holds(c, w.p))
              throw Error("solver witness fails exact re-evaluation (region)");
          if (!xc_holds(q.violation, w.p))
            throw Error("solver witness fails exact re-evaluation (violation)");
          res.pass = false;
          res.witness = std::move(w);
          res.detail = q.detail;
          break;
        }
        if (memoryless)
          throw Error("condition " + std::to_string(q.condition + 1) +
                      ": solver failure (" + (v.message.empty() ? "timeout" : v.message) +
                      ")");
        sampled_check(q, res);
        break;
      }
    }
  }
  return report;
}

}  // namespace dra
