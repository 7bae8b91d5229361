#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dra/model.hpp"

namespace dra {
namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

inline std::string strip_comment(const std::string& line) {
  auto pos = line.find('#');
  std::string s = pos == std::string::npos ? line : line.substr(0, pos);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

struct LineError : Error {
  LineError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what) {}
};

/// Parses "<rational> [+|-] <rational>*x<idx> ... (>=|>) 0", 1-based indices.
inline AffineRow parse_row(const std::string& line, std::size_t n, int lineno) {
  auto toks = split_ws(line);
  if (toks.size() < 3) throw LineError(lineno, "malformed inequality row");
  if (toks.back() != "0") throw LineError(lineno, "inequality must compare against 0");
  const std::string& rel = toks[toks.size() - 2];
  AffineRow row;
  row.form = AffineForm(n);
  if (rel == ">")
    row.strict = true;
  else if (rel == ">=")
    row.strict = false;
  else
    throw LineError(lineno, "expected '>=' or '>' before 0, got '" + rel + "'");
  row.form.constant = Rational::parse(toks[0]);
  std::size_t i = 1;
  const std::size_t end = toks.size() - 2;
  while (i < end) {
    int sign = 0;
    if (toks[i] == "+")
      sign = 1;
    else if (toks[i] == "-")
      sign = -1;
    else
      throw LineError(lineno, "expected '+' or '-', got '" + toks[i] + "'");
    if (++i >= end) throw LineError(lineno, "dangling sign in row");
    const std::string& term = toks[i++];
    auto star = term.find('*');
    if (star == std::string::npos || star + 1 >= term.size() || term[star + 1] != 'x')
      throw LineError(lineno, "expected '<rational>*x<idx>', got '" + term + "'");
    Rational coef = Rational::parse(term.substr(0, star));
    std::size_t idx = 0;
    try {
      idx = std::stoul(term.substr(star + 2));
    } catch (...) {
      throw LineError(lineno, "bad state index in '" + term + "'");
    }
    if (idx < 1 || idx > n)
      throw LineError(lineno, "state index x" + std::to_string(idx) + " out of range");
    Rational& slot = row.form.coeffs[idx - 1];
    slot += sign > 0 ? coef : -coef;
  }
  return row;
}

inline std::string write_row(const AffineRow& row) {
  std::ostringstream os;
  os << row.form.constant.str();
  for (std::size_t i = 0; i < row.form.coeffs.size(); ++i) {
    const Rational& c = row.form.coeffs[i];
    if (c.is_zero()) continue;
    os << (c.sign() < 0 ? " - " : " + ") << c.abs().str() << "*x" << i + 1;
  }
  os << (row.strict ? " > 0" : " >= 0");
  return os.str();
}

}  // namespace detail

/// Parses the line-oriented model format; '#' starts a comment.
inline ProblemSpec parse_model(const std::string& text) {
  using detail::LineError;
  ProblemSpec spec;
  Mdp& mdp = spec.mdp;
  enum class Section { None, Target, Safe, Init } section = Section::None;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  bool saw_states = false;
  std::vector<std::tuple<int, std::string>> pending_trans;  // parsed after states

  auto require_states = [&](int ln) {
    if (!saw_states) throw LineError(ln, "'states:' must come first");
  };

  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = detail::strip_comment(raw);
    if (line.empty()) continue;
    auto toks = detail::split_ws(line);
    const std::string& head = toks[0];

    if (head == "states:") {
      if (saw_states) throw LineError(lineno, "duplicate 'states:' line");
      if (toks.size() < 2) throw LineError(lineno, "empty state list");
      mdp.states.assign(toks.begin() + 1, toks.end());
      mdp.actions.resize(mdp.states.size());
      mdp.trans.resize(mdp.states.size());
      saw_states = true;
      section = Section::None;
    } else if (head == "actions") {
      require_states(lineno);
      if (toks.size() < 3 || toks[1].back() != ':')
        throw LineError(lineno, "expected 'actions <state>: a b ...'");
      std::string state = toks[1].substr(0, toks[1].size() - 1);
      std::size_t s;
      try {
        s = mdp.state_index(state);
      } catch (const Error& e) {
        throw LineError(lineno, e.what());
      }
      if (!mdp.actions[s].empty()) throw LineError(lineno, "duplicate actions for " + state);
      mdp.actions[s].assign(toks.begin() + 2, toks.end());
      mdp.trans[s].resize(mdp.actions[s].size());
      section = Section::None;
    } else if (head == "trans") {
      require_states(lineno);
      // trans <state> <action> -> <state>:<rational> ...
      if (toks.size() < 5 || toks[3] != "->")
        throw LineError(lineno, "expected 'trans <state> <action> -> <state>:<p> ...'");
      std::size_t s;
      try {
        s = mdp.state_index(toks[1]);
      } catch (const Error& e) {
        throw LineError(lineno, e.what());
      }
      int a = mdp.action_index(s, toks[2]);
      if (a < 0)
        throw LineError(lineno, "action '" + toks[2] + "' not available in " + toks[1]);
      Distribution d;
      d.p.assign(mdp.n(), Rational(0));
      for (std::size_t i = 4; i < toks.size(); ++i) {
        auto colon = toks[i].rfind(':');
        if (colon == std::string::npos)
          throw LineError(lineno, "expected '<state>:<rational>', got '" + toks[i] + "'");
        std::size_t t;
        try {
          t = mdp.state_index(toks[i].substr(0, colon));
        } catch (const Error& e) {
          throw LineError(lineno, e.what());
        }
        d.p[t] += Rational::parse(toks[i].substr(colon + 1));
      }
      Rational sum(0);
      for (const auto& v : d.p) sum += v;
      if (sum != Rational(1))
        throw LineError(lineno, "transition for (" + toks[1] + "," + toks[2] +
                                    ") sums to " + sum.str());
      mdp.trans[s][static_cast<std::size_t>(a)] = std::move(d);
      section = Section::None;
    } else if (head == "target:") {
      require_states(lineno);
      section = Section::Target;
    } else if (head == "safe:") {
      require_states(lineno);
      section = Section::Safe;
    } else if (head == "init:") {
      require_states(lineno);
      section = Section::Init;
    } else if (head == "quantifier:") {
      if (toks.size() != 2) throw LineError(lineno, "expected one quantifier");
      if (toks[1] == "unit")
        spec.quantifier = Quantifier::Unit;
      else if (toks[1] == "existential")
        spec.quantifier = Quantifier::Existential;
      else if (toks[1] == "universal")
        spec.quantifier = Quantifier::Universal;
      else
        throw LineError(lineno, "unknown quantifier '" + toks[1] + "'");
      section = Section::None;
    } else if (head == "init-dist:") {
      require_states(lineno);
      if (toks.size() != mdp.n() + 1)
        throw LineError(lineno, "init-dist needs exactly " + std::to_string(mdp.n()) +
                                    " entries");
      Distribution d;
      for (std::size_t i = 1; i < toks.size(); ++i) d.p.push_back(Rational::parse(toks[i]));
      try {
        d.validate();
      } catch (const Error& e) {
        throw LineError(lineno, e.what());
      }
      spec.init_dist = std::move(d);
      section = Section::None;
    } else if (section != Section::None) {
      AffineRow row = detail::parse_row(line, mdp.n(), lineno);
      if (section == Section::Target)
        spec.target.rows.push_back(std::move(row));
      else if (section == Section::Safe)
        spec.safe.rows.push_back(std::move(row));
      else
        spec.init_set.rows.push_back(std::move(row));
    } else {
      throw LineError(lineno, "unrecognized directive '" + head + "'");
    }
  }
  if (!saw_states) throw Error("model has no 'states:' line");
  for (std::size_t s = 0; s < mdp.n(); ++s) {
    if (mdp.actions[s].empty())
      throw Error("state " + mdp.states[s] + " has no 'actions' line");
    for (std::size_t a = 0; a < mdp.actions[s].size(); ++a)
      if (mdp.trans[s][a].p.empty())
        throw Error("missing transition for (" + mdp.states[s] + "," +
                    mdp.actions[s][a] + ")");
  }
  spec.mdp.validate();
  return spec;
}

/// Canonical writer; parse_model(write_model(p)) reproduces p byte-for-byte.
inline std::string write_model(const ProblemSpec& spec) {
  std::ostringstream os;
  const Mdp& mdp = spec.mdp;
  os << "states:";
  for (const auto& s : mdp.states) os << ' ' << s;
  os << '\n';
  for (std::size_t s = 0; s < mdp.n(); ++s) {
    os << "actions " << mdp.states[s] << ':';
    for (const auto& a : mdp.actions[s]) os << ' ' << a;
    os << '\n';
  }
  for (std::size_t s = 0; s < mdp.n(); ++s)
    for (std::size_t a = 0; a < mdp.actions[s].size(); ++a) {
      os << "trans " << mdp.states[s] << ' ' << mdp.actions[s][a] << " ->";
      const Distribution& d = mdp.trans[s][a];
      for (std::size_t t = 0; t < d.size(); ++t)
        if (!d.p[t].is_zero()) os << ' ' << mdp.states[t] << ':' << d.p[t].str();
      os << '\n';
    }
  auto block = [&](const char* name, const AffineSetSpec& set) {
    if (set.rows.empty()) return;
    os << name << '\n';
    for (const auto& r : set.rows) os << detail::write_row(r) << '\n';
  };
  block("target:", spec.target);
  block("safe:", spec.safe);
  block("init:", spec.init_set);
  os << "quantifier: " << to_string(spec.quantifier) << '\n';
  if (spec.init_dist) {
    os << "init-dist:";
    for (const auto& v : spec.init_dist->p) os << ' ' << v.str();
    os << '\n';
  }
  return os.str();
}

/// Policy files: one line per multi-action state, "p_<state>: <action>:<rational> ...".
/// Distributional policies start with a "distributional" line followed by
/// "den <state>: c0 .. cn" and "num <state> <action>: c0 .. cn" rows.
inline std::string write_policy(const ConcretePolicy& policy, const Mdp& mdp) {
  std::ostringstream os;
  if (policy.kind == PolicyClass::Memoryless) {
    for (std::size_t s = 0; s < mdp.n(); ++s) {
      os << "p_" << mdp.states[s] << ':';
      for (std::size_t a = 0; a < mdp.actions[s].size(); ++a)
        os << ' ' << mdp.actions[s][a] << ':' << policy.rows[s][a].str();
      os << '\n';
    }
    return os.str();
  }
  os << "distributional\n";
  auto coeffs = [&](const AffineForm& f) {
    std::ostringstream line;
    line << f.constant.str();
    for (const auto& c : f.coeffs) line << ' ' << c.str();
    return line.str();
  };
  for (std::size_t s = 0; s < mdp.n(); ++s) {
    os << "den " << mdp.states[s] << ": " << coeffs(policy.dens[s]) << '\n';
    for (std::size_t a = 0; a < mdp.actions[s].size(); ++a)
      os << "num " << mdp.states[s] << ' ' << mdp.actions[s][a] << ": "
         << coeffs(policy.nums[s][a]) << '\n';
  }
  return os.str();
}

inline ConcretePolicy parse_policy(const std::string& text, const Mdp& mdp) {
  using detail::LineError;
  ConcretePolicy policy;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  bool distributional = false;
  bool first_content = true;

  policy.rows.assign(mdp.n(), {});
  std::vector<bool> seen(mdp.n(), false);

  auto parse_form = [&](const std::vector<std::string>& toks, std::size_t from,
                        int ln) -> AffineForm {
    if (toks.size() - from != mdp.n() + 1)
      throw LineError(ln, "expected " + std::to_string(mdp.n() + 1) + " coefficients");
    AffineForm f(mdp.n());
    f.constant = Rational::parse(toks[from]);
    for (std::size_t i = 0; i < mdp.n(); ++i)
      f.coeffs[i] = Rational::parse(toks[from + 1 + i]);
    return f;
  };

  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = detail::strip_comment(raw);
    if (line.empty()) continue;
    auto toks = detail::split_ws(line);
    if (first_content && toks[0] == "distributional") {
      distributional = true;
      policy.kind = PolicyClass::Distributional;
      policy.nums.assign(mdp.n(), {});
      policy.dens.assign(mdp.n(), AffineForm(mdp.n()));
      for (std::size_t s = 0; s < mdp.n(); ++s)
        policy.nums[s].assign(mdp.actions[s].size(), AffineForm(mdp.n()));
      first_content = false;
      continue;
    }
    first_content = false;
    if (distributional) {
      if (toks[0] == "den") {
        if (toks.size() < 3 || toks[1].back() != ':')
          throw LineError(lineno, "expected 'den <state>: c0 .. cn'");
        std::size_t s = mdp.state_index(toks[1].substr(0, toks[1].size() - 1));
        policy.dens[s] = parse_form(toks, 2, lineno);
      } else if (toks[0] == "num") {
        if (toks.size() < 4 || toks[2].back() != ':')
          throw LineError(lineno, "expected 'num <state> <action>: c0 .. cn'");
        std::size_t s = mdp.state_index(toks[1]);
        int a = mdp.action_index(s, toks[2].substr(0, toks[2].size() - 1));
        if (a < 0) throw LineError(lineno, "action '" + toks[2] + "' not available");
        policy.nums[s][static_cast<std::size_t>(a)] = parse_form(toks, 3, lineno);
      } else {
        throw LineError(lineno, "unrecognized policy line '" + toks[0] + "'");
      }
      continue;
    }
    // p_<state>: a:<r> b:<r> ...
    if (toks[0].rfind("p_", 0) != 0 || toks[0].back() != ':')
      throw LineError(lineno, "expected 'p_<state>: <action>:<rational> ...'");
    std::string state = toks[0].substr(2, toks[0].size() - 3);
    std::size_t s;
    try {
      s = mdp.state_index(state);
    } catch (const Error& e) {
      throw LineError(lineno, e.what());
    }
    if (seen[s]) throw LineError(lineno, "duplicate policy row for " + state);
    seen[s] = true;
    policy.rows[s].assign(mdp.actions[s].size(), Rational(0));
    for (std::size_t i = 1; i < toks.size(); ++i) {
      auto colon = toks[i].rfind(':');
      if (colon == std::string::npos)
        throw LineError(lineno, "expected '<action>:<rational>', got '" + toks[i] + "'");
      std::string act = toks[i].substr(0, colon);
      int a = mdp.action_index(s, act);
      if (a < 0)
        throw LineError(lineno, "action '" + act + "' not available in " + state);
      policy.rows[s][static_cast<std::size_t>(a)] = Rational::parse(toks[i].substr(colon + 1));
    }
  }
  if (!distributional) {
    // Single-action states may be omitted; fill the forced choice.
    for (std::size_t s = 0; s < mdp.n(); ++s)
      if (!seen[s]) {
        if (mdp.actions[s].size() != 1)
          throw Error("policy file is missing a row for state " + mdp.states[s]);
        policy.rows[s] = {Rational(1)};
      }
  }
  policy.validate(mdp);
  return policy;
}

/// Certificate files: "rank: r0 r1 ... rn" and one "inv: b0 b1 ... bn >= 0" per row.
inline std::string write_certificate(const Certificate& cert) {
  std::ostringstream os;
  os << "rank: " << cert.rank.constant.str();
  for (const auto& c : cert.rank.coeffs) os << ' ' << c.str();
  os << '\n';
  for (const auto& row : cert.invariant.rows) {
    os << "inv: " << row.form.constant.str();
    for (const auto& c : row.form.coeffs) os << ' ' << c.str();
    os << " >= 0\n";
  }
  return os.str();
}

inline Certificate parse_certificate(const std::string& text, std::size_t n) {
  using detail::LineError;
  Certificate cert;
  cert.rank = AffineForm(n);
  bool saw_rank = false;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = detail::strip_comment(raw);
    if (line.empty()) continue;
    auto toks = detail::split_ws(line);
    if (toks[0] == "rank:") {
      if (toks.size() != n + 2) throw LineError(lineno, "rank needs n+1 coefficients");
      cert.rank.constant = Rational::parse(toks[1]);
      for (std::size_t i = 0; i < n; ++i) cert.rank.coeffs[i] = Rational::parse(toks[2 + i]);
      saw_rank = true;
    } else if (toks[0] == "inv:") {
      if (toks.size() != n + 4 || toks[toks.size() - 2] != ">=" || toks.back() != "0")
        throw LineError(lineno, "expected 'inv: b0 .. bn >= 0'");
      AffineRow row;
      row.form = AffineForm(n);
      row.strict = false;
      row.form.constant = Rational::parse(toks[1]);
      for (std::size_t i = 0; i < n; ++i) row.form.coeffs[i] = Rational::parse(toks[2 + i]);
      cert.invariant.rows.push_back(std::move(row));
    } else {
      throw LineError(lineno, "unrecognized certificate line '" + toks[0] + "'");
    }
  }
  if (!saw_rank) throw Error("certificate has no rank line");
  cert.template_size = static_cast<int>(cert.invariant.rows.size());
  return cert;
}

inline std::string write_init_dist(const Distribution& d) {
  std::ostringstream os;
  os << "init-dist:";
  for (const auto& v : d.p) os << ' ' << v.str();
  os << '\n';
  return os.str();
}

inline Distribution parse_init_dist(const std::string& text, std::size_t n) {
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = detail::strip_comment(raw);
    if (line.empty()) continue;
    auto toks = detail::split_ws(line);
    if (toks[0] != "init-dist:" || toks.size() != n + 1)
      throw detail::LineError(lineno, "expected 'init-dist: v1 .. vn'");
    Distribution d;
    for (std::size_t i = 1; i < toks.size(); ++i) d.p.push_back(Rational::parse(toks[i]));
    d.validate();
    return d;
  }
  throw Error("no init-dist line found");
}

}  // namespace dra
