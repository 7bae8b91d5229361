#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dra/rational.hpp"

namespace dra {

enum class UnknownKind { Policy, Invariant, Rank, Init, Farkas, Epsilon };

struct UnknownInfo {
  std::string name;
  UnknownKind kind;
};

/// Declaration-ordered set of unknowns; names are unique per system.
class UnknownRegistry {
 public:
  const std::string& add(const std::string& name, UnknownKind kind) {
    if (index_.count(name)) throw Error("duplicate unknown '" + name + "'");
    index_[name] = order_.size();
    order_.push_back({name, kind});
    return order_.back().name;
  }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }
  std::size_t size() const { return order_.size(); }
  const std::vector<UnknownInfo>& all() const { return order_; }

  /// Fresh Farkas/Handelman multiplier, zero-padded like f_001.
  std::string fresh_multiplier() {
    std::ostringstream os;
    os << "f_";
    std::string n = std::to_string(++multiplier_count_);
    for (std::size_t i = n.size(); i < 3; ++i) os << '0';
    os << n;
    return add(os.str(), UnknownKind::Farkas);
  }
  std::string fresh_epsilon() {
    return add("eps_" + std::to_string(++epsilon_count_), UnknownKind::Epsilon);
  }

 private:
  std::vector<UnknownInfo> order_;
  std::map<std::string, std::size_t> index_;
  int multiplier_count_ = 0;
  int epsilon_count_ = 0;
};

/// Multiset of unknown identifiers, kept sorted. Empty = the constant monomial.
using Monomial = std::vector<std::string>;

/// Graded lexicographic order: total degree first, then name-wise lex.
struct GradedLex {
  bool operator()(const Monomial& a, const Monomial& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

/// Sparse polynomial over unknowns with exact rational coefficients.
/// Zero-coefficient entries are never stored.
class UnknownPoly {
 public:
  using TermMap = std::map<Monomial, Rational, GradedLex>;

  UnknownPoly() = default;

  static UnknownPoly constant(const Rational& c) {
    UnknownPoly p;
    if (!c.is_zero()) p.t_[{}] = c;
    return p;
  }
  static UnknownPoly var(const std::string& name) {
    UnknownPoly p;
    p.t_[{name}] = Rational(1);
    return p;
  }

  bool is_zero() const { return t_.empty(); }
  bool is_constant() const {
    return t_.empty() || (t_.size() == 1 && t_.begin()->first.empty());
  }
  Rational constant_value() const {
    auto it = t_.find({});
    return it == t_.end() ? Rational(0) : it->second;
  }
  std::size_t degree() const { return t_.empty() ? 0 : t_.rbegin()->first.size(); }
  const TermMap& terms() const { return t_; }

  UnknownPoly& operator+=(const UnknownPoly& o) {
    for (const auto& [m, c] : o.t_) add_term(m, c);
    return *this;
  }
  UnknownPoly& operator-=(const UnknownPoly& o) {
    for (const auto& [m, c] : o.t_) add_term(m, -c);
    return *this;
  }
  friend UnknownPoly operator+(UnknownPoly a, const UnknownPoly& b) { return a += b; }
  friend UnknownPoly operator-(UnknownPoly a, const UnknownPoly& b) { return a -= b; }
  UnknownPoly operator-() const {
    UnknownPoly r;
    for (const auto& [m, c] : t_) r.t_[m] = -c;
    return r;
  }

  friend UnknownPoly operator*(const UnknownPoly& a, const UnknownPoly& b) {
    UnknownPoly r;
    for (const auto& [ma, ca] : a.t_) {
      for (const auto& [mb, cb] : b.t_) {
        Monomial m;
        m.reserve(ma.size() + mb.size());
        std::merge(ma.begin(), ma.end(), mb.begin(), mb.end(), std::back_inserter(m));
        r.add_term(m, ca * cb);
      }
    }
    return r;
  }

  UnknownPoly scaled(const Rational& c) const {
    UnknownPoly r;
    if (c.is_zero()) return r;
    for (const auto& [m, k] : t_) r.t_[m] = k * c;
    return r;
  }

  friend bool operator==(const UnknownPoly& a, const UnknownPoly& b) { return a.t_ == b.t_; }
  friend bool operator!=(const UnknownPoly& a, const UnknownPoly& b) { return a.t_ != b.t_; }

  /// Exact evaluation; every unknown that occurs must be assigned.
  Rational eval(const std::map<std::string, Rational>& assignment) const {
    Rational total(0);
    for (const auto& [m, c] : t_) {
      Rational term = c;
      for (const auto& name : m) {
        auto it = assignment.find(name);
        if (it == assignment.end()) throw Error("unresolved unknown '" + name + "'");
        term *= it->second;
      }
      total += term;
    }
    return total;
  }

  void for_each_unknown(const std::function<void(const std::string&)>& fn) const {
    for (const auto& [m, c] : t_)
      for (const auto& name : m) fn(name);
  }

  /// Human-readable dump, e.g. "-9*f_027/10 - f_029 + inv_1_1".
  std::string str() const {
    if (t_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [m, c] : t_) {
      bool neg = c.sign() < 0;
      Rational a = c.abs();
      if (first) {
        if (neg) os << '-';
        first = false;
      } else {
        os << (neg ? " - " : " + ");
      }
      const mpz_class& p = a.num();
      const mpz_class& q = a.den();
      if (m.empty()) {
        os << a.str();
        continue;
      }
      if (p != 1) os << p.get_str() << '*';
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (i) os << '*';
        os << m[i];
      }
      if (q != 1) os << '/' << q.get_str();
    }
    return os.str();
  }

 private:
  void add_term(const Monomial& m, const Rational& c) {
    if (c.is_zero()) return;
    auto it = t_.find(m);
    if (it == t_.end()) {
      t_[m] = c;
    } else {
      it->second += c;
      if (it->second.is_zero()) t_.erase(it);
    }
  }

  TermMap t_;
};

}  // namespace dra
