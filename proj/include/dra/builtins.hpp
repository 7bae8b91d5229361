#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "dra/grid.hpp"
#include "dra/model.hpp"
#include "dra/model_io.hpp"

namespace dra {
namespace builtin_data {

inline const char* kRunning =
    "IX.G\n"
    "SLS.\n";

inline const char* kTwoInit =
    "IXG\n"
    "LsL\n"
    "IXL\n";

inline const char* kDouble =
    "I.L.G\n"
    "XsLXX\n"
    "I.RGX\n";

inline const char* kSlippery =
    "IXs.L\n"
    ".XssL\n"
    "..LXG\n";

inline const char* kGrid5x4 =
    "IXLSG\n"
    "LsSXL\n"
    "DXXXU\n"
    "RRrRU\n";

inline const char* kGrid8x8 =
    "ISSS....\n"
    "XXXXXX..\n"
    ".SS.....\n"
    ".XXLXXXX\n"
    ".S.....X\n"
    "XXXXXX.X\n"
    "XXXXLL.X\n"
    "XXXXXXGX\n";

inline const char* kGrid20x10 =
    "II..XXXXXXX.XXX.XXXX\n"
    "......SSS...........\n"
    ".XXXXXXXXXXXXXXXXXX.\n"
    ".XXXXXXXXXXXXXXXXXX.\n"
    ".XXXX...............\n"
    ".XLLLXXXXXXXXXXXXXXD\n"
    ".XLLLXXXFFXXXXXXXXXD\n"
    ".XLLLXXXFFXX..XXXXXD\n"
    "X....SSS............\n"
    "XG.XXXXXXXXXXXXXXXXX\n";

// Pharmacokinetics chain. The published matrix is scaled by 1e-6, but its
// first four rows total 1e5 under that scale while the last totals 1e6; each
// row is renormalized to its own sum so the chain is stochastic.
inline const std::array<std::array<long, 5>, 5> kInsulinRaw = {{
    {93980, 2634, 2564, 798, 24},
    {0, 20724, 48298, 29624, 1354},
    {0, 15531, 42539, 39530, 2400},
    {0, 2598, 10778, 77854, 8770},
    {0, 0, 0, 0, 1000000},
}};

inline const std::array<std::array<Rational, 5>, 5> pagerank_matrix() {
  using R = Rational;
  return {{
      {R(1, 80), R(19, 60), R(3, 40), R(19, 60), R(67, 240)},
      {R(1, 80), R(1, 20), R(41, 120), R(19, 60), R(67, 240)},
      {R(1, 16), R(1, 4), R(3, 8), R(1, 4), R(1, 16)},
      {R(1, 80), R(1, 20), R(7, 8), R(1, 20), R(1, 80)},
      {R(33, 80), R(9, 20), R(3, 40), R(1, 20), R(1, 80)},
  }};
}

}  // namespace builtin_data

inline const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names = {
      "running", "twoinit", "double", "slippery", "grid5x4",
      "grid8x8", "grid20x10", "insulin", "pagerank"};
  return names;
}

inline const char* builtin_grid_text(const std::string& name) {
  using namespace builtin_data;
  if (name == "running") return kRunning;
  if (name == "twoinit") return kTwoInit;
  if (name == "double") return kDouble;
  if (name == "slippery") return kSlippery;
  if (name == "grid5x4") return kGrid5x4;
  if (name == "grid8x8") return kGrid8x8;
  if (name == "grid20x10") return kGrid20x10;
  return nullptr;
}

namespace builtin_data {

/// Markov chain over s1..s5 with one action per state; target/safe rows are
/// given as (constant, coefficient index, coefficient) triples.
inline ProblemSpec make_chain(const std::string& name,
                              const std::array<std::array<Rational, 5>, 5>& matrix,
                              AffineRow target_row, AffineRow safe_row) {
  ProblemSpec spec;
  spec.name = name;
  Mdp& mdp = spec.mdp;
  for (int i = 1; i <= 5; ++i) mdp.states.push_back("s" + std::to_string(i));
  mdp.actions.assign(5, {"a"});
  mdp.trans.assign(5, {});
  for (std::size_t s = 0; s < 5; ++s) {
    Distribution d;
    d.p.assign(5, Rational(0));
    for (std::size_t t = 0; t < 5; ++t) d.p[t] = matrix[s][t];
    mdp.trans[s].push_back(std::move(d));
  }
  spec.target.rows.push_back(std::move(target_row));
  spec.safe.rows.push_back(std::move(safe_row));
  spec.init_dist = Distribution::point(5, 0);
  spec.quantifier = Quantifier::Unit;
  spec.validate();
  return spec;
}

}  // namespace builtin_data

/// The named benchmark model. Gridworlds use the standard 90%/10% masses;
/// the two Markov chains get a single dummy action.
inline ProblemSpec builtin(const std::string& name,
                           Quantifier quantifier = Quantifier::Unit) {
  if (const char* grid_text = builtin_grid_text(name))
    return grid_to_problem(parse_grid(grid_text), Rational(9, 10), Rational(1, 10),
                           quantifier, name);
  if (name == "insulin") {
    std::array<std::array<Rational, 5>, 5> m;
    for (std::size_t i = 0; i < 5; ++i) {
      long sum = 0;
      for (long v : builtin_data::kInsulinRaw[i]) sum += v;
      for (std::size_t j = 0; j < 5; ++j)
        m[i][j] = Rational(builtin_data::kInsulinRaw[i][j], sum);
    }
    // Reach: at least 90% absorbed (state s5); safe: s4 stays below 90%.
    AffineRow target, safe;
    target.form = AffineForm(5);
    target.form.constant = Rational(-9, 10);
    target.form.coeffs[4] = Rational(1);
    safe.form = AffineForm(5);
    safe.form.constant = Rational(9, 10);
    safe.form.coeffs[3] = Rational(-1);
    return builtin_data::make_chain("insulin", m, target, safe);
  }
  if (name == "pagerank") {
    // Reach: the start page's share drops to at most 1/2; safe: the last page
    // never exceeds 3/4.
    AffineRow target, safe;
    target.form = AffineForm(5);
    target.form.constant = Rational(1, 2);
    target.form.coeffs[0] = Rational(-1);
    safe.form = AffineForm(5);
    safe.form.constant = Rational(3, 4);
    safe.form.coeffs[4] = Rational(-1);
    return builtin_data::make_chain("pagerank", builtin_data::pagerank_matrix(),
                                    target, safe);
  }
  throw Error("unknown benchmark '" + name + "'");
}

/// States whose mass the safe set penalizes (negative coefficient in some row).
inline std::vector<bool> penalized_states(const ProblemSpec& problem) {
  std::vector<bool> bad(problem.mdp.n(), false);
  for (const auto& row : problem.safe.rows)
    for (std::size_t i = 0; i < row.form.coeffs.size(); ++i)
      if (row.form.coeffs[i].sign() < 0) bad[i] = true;
  return bad;
}

inline std::vector<std::size_t> target_support(const ProblemSpec& problem) {
  std::vector<std::size_t> goals;
  if (problem.target.rows.empty()) return goals;
  const auto& row = problem.target.rows.front();
  for (std::size_t i = 0; i < row.form.coeffs.size(); ++i)
    if (row.form.coeffs[i].sign() > 0) goals.push_back(i);
  return goals;
}

/// Deterministic reference policy: walk shortest paths to the target support
/// while keeping all probability mass outside the safe-set-penalized states.
/// Only usable when the penalized region is avoidable, which holds for the
/// larger shipped gridworlds and trivially for the chains.
inline ConcretePolicy avoiding_reference_policy(const ProblemSpec& problem) {
  const Mdp& mdp = problem.mdp;
  const std::size_t n = mdp.n();
  std::vector<bool> bad = penalized_states(problem);
  auto goals = target_support(problem);

  // Action usable iff its support avoids penalized states entirely.
  auto usable = [&](std::size_t s, std::size_t a) {
    const Distribution& d = mdp.trans[s][a];
    for (std::size_t t = 0; t < n; ++t)
      if (!d.p[t].is_zero() && bad[t]) return false;
    return true;
  };

  constexpr std::size_t kInf = static_cast<std::size_t>(-1);
  std::vector<std::size_t> dist(n, kInf);
  for (std::size_t g : goals) dist[g] = 0;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t s = 0; s < n; ++s) {
      if (bad[s] || dist[s] == 0) continue;
      for (std::size_t a = 0; a < mdp.actions[s].size(); ++a) {
        if (!usable(s, a)) continue;
        std::size_t worst = 0;
        bool self_only = true;
        const Distribution& d = mdp.trans[s][a];
        for (std::size_t t = 0; t < n; ++t) {
          if (d.p[t].is_zero() || t == s) continue;
          self_only = false;
          worst = std::max(worst, dist[t] == kInf ? kInf : dist[t]);
        }
        if (self_only || worst == kInf) continue;
        if (worst + 1 < dist[s]) {
          dist[s] = worst + 1;
          changed = true;
        }
      }
    }
  }

  ConcretePolicy policy;
  policy.kind = PolicyClass::Memoryless;
  policy.rows.assign(n, {});
  for (std::size_t s = 0; s < n; ++s) {
    policy.rows[s].assign(mdp.actions[s].size(), Rational(0));
    if (mdp.actions[s].size() == 1) {
      policy.rows[s][0] = Rational(1);
      continue;
    }
    if (bad[s] || dist[s] == 0 || dist[s] == kInf) {
      // Mass never sits here under the induced invariant; stay put if we can.
      int stay = mdp.action_index(s, "s");
      policy.rows[s][stay >= 0 ? static_cast<std::size_t>(stay) : 0] = Rational(1);
      if (!bad[s] && dist[s] == kInf)
        throw Error("state " + mdp.states[s] +
                    " cannot reach the target while avoiding penalized states");
      continue;
    }
    bool placed = false;
    for (std::size_t a = 0; a < mdp.actions[s].size() && !placed; ++a) {
      if (!usable(s, a)) continue;
      std::size_t worst = 0;
      bool self_only = true;
      const Distribution& d = mdp.trans[s][a];
      for (std::size_t t = 0; t < n; ++t) {
        if (d.p[t].is_zero() || t == s) continue;
        self_only = false;
        worst = std::max(worst, dist[t]);
      }
      if (!self_only && worst != kInf && worst + 1 == dist[s]) {
        policy.rows[s][a] = Rational(1);
        placed = true;
      }
    }
    if (!placed) throw Error("no usable step from state " + mdp.states[s]);
  }
  policy.validate(mdp);
  return policy;
}

namespace builtin_data {

// Reference policies for the small gridworlds, where mass has to trickle
// through the limited cells. Produced once by the synthesizer and frozen.
inline const std::map<std::string, std::string>& trickle_policies() {
  static const std::map<std::string, std::string> policies = {
      {"running",
       "p_0_0: d:1 s:0\n"
       "p_2_0: d:1 r:0 s:0\n"
       "p_3_0: s:1\n"
       "p_0_1: r:455/8192 s:241/256 u:25/8192\n"
       "p_1_1: l:1/512 r:31/32 s:15/512\n"
       "p_2_1: l:0 r:1 s:0 u:0\n"
       "p_3_1: l:1/2 s:0 u:1/2\n"},
      {"twoinit",
       "p_0_0: d:1/16 s:15/16\n"
       "p_2_0: s:1\n"
       "p_0_1: d:0 r:1 s:0 u:0\n"
       "p_1_1: l:1/256 r:1/32 s:247/256\n"
       "p_2_1: d:1/16 l:0 s:0 u:15/16\n"
       "p_0_2: s:15/16 u:1/16\n"
       "p_2_2: s:1/32 u:31/32\n"},
      {"double",
       "p_0_0: r:1 s:0\n"
       "p_1_0: d:1 l:0 r:0 s:0\n"
       "p_2_0: d:1 l:0 r:0 s:0\n"
       "p_3_0: l:0 r:1 s:0\n"
       "p_4_0: s:1\n"
       "p_1_1: d:1 r:0 s:0 u:0\n"
       "p_2_1: d:1 l:0 s:0 u:0\n"
       "p_0_2: r:1 s:0\n"
       "p_1_2: l:1/2 r:0 s:0 u:1/2\n"
       "p_2_2: r:1\n"
       "p_3_2: s:1\n"},
      {"slippery",
       "p_0_0: d:1 s:0\n"
       "p_2_0: d:1 r:0 s:0\n"
       "p_3_0: d:1 l:0 r:0 s:0\n"
       "p_4_0: d:1/32 l:31/32 s:0\n"
       "p_0_1: d:1 s:0 u:0\n"
       "p_2_1: d:1/1024 r:15/16 s:63/1024 u:0\n"
       "p_3_1: l:7/32 r:1/32 s:3/4 u:0\n"
       "p_4_1: d:1 l:0 s:0 u:0\n"
       "p_0_2: r:1 s:0 u:0\n"
       "p_1_2: l:0 r:819/16384 s:15565/16384\n"
       "p_2_2: l:1/1024 s:0 u:1023/1024\n"
       "p_4_2: s:1\n"},
      {"grid5x4",
       "p_0_0: d:1/32 s:31/32\n"
       "p_2_0: d:0 r:1 s:0\n"
       "p_3_0: l:0 r:1 s:0\n"
       "p_4_0: s:1\n"
       "p_0_1: d:1/256 r:0 s:0 u:255/256\n"
       "p_1_1: l:1/256 r:0 s:255/256\n"
       "p_2_1: l:1 s:0 u:0\n"
       "p_4_1: d:1/8 s:0 u:7/8\n"
       "p_0_2: d:1\n"
       "p_4_2: u:1\n"
       "p_0_3: r:1\n"
       "p_1_3: r:1\n"
       "p_2_3: r:1\n"
       "p_3_3: r:1\n"
       "p_4_3: u:1\n"},
  };
  return policies;
}

}  // namespace builtin_data

/// A policy to feed the verification benchmarks.
inline ConcretePolicy builtin_policy(const std::string& name, const ProblemSpec& problem) {
  const auto& frozen = builtin_data::trickle_policies();
  auto it = frozen.find(name);
  if (it != frozen.end()) {
    if (it->second.empty())
      throw Error("no frozen reference policy for '" + name + "'");
    return parse_policy(it->second, problem.mdp);
  }
  return avoiding_reference_policy(problem);
}

}  // namespace dra
