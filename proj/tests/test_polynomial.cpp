#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dra/affine.hpp"
#include "dra/polynomial.hpp"

using namespace dra;

namespace {

UnknownPoly random_poly(std::mt19937_64& rng) {
  static const std::vector<std::string> names = {"b1", "b2", "r0", "y3"};
  std::uniform_int_distribution<int> terms(0, 4), pick(0, 3), coef(-5, 5), deg(0, 2);
  UnknownPoly p;
  for (int t = terms(rng); t-- > 0;) {
    UnknownPoly mono = UnknownPoly::constant(Rational(coef(rng)));
    for (int d = deg(rng); d-- > 0;) mono = mono * UnknownPoly::var(names[static_cast<std::size_t>(pick(rng))]);
    p += mono;
  }
  return p;
}

}  // namespace

TEST_CASE("polynomial addition: cancellation, identity, like terms") {
  UnknownPoly b1 = UnknownPoly::var("b1");
  CHECK((b1 + UnknownPoly::constant(1)) + (-b1) == UnknownPoly::constant(1));
  std::mt19937_64 rng(1);
  UnknownPoly p = random_poly(rng);
  CHECK(UnknownPoly() + p == p);
  UnknownPoly r0 = UnknownPoly::var("r0");
  CHECK(r0.scaled(2) + r0.scaled(3) == r0.scaled(5));
}

TEST_CASE("polynomial multiplication: monomials and distribution") {
  UnknownPoly b1 = UnknownPoly::var("b1"), b2 = UnknownPoly::var("b2");
  UnknownPoly prod = b1 * b2;
  REQUIRE(prod.terms().size() == 1);
  CHECK(prod.terms().begin()->first == Monomial{"b1", "b2"});
  CHECK(prod.terms().begin()->second == Rational(1));

  UnknownPoly b = UnknownPoly::var("b");
  CHECK((UnknownPoly::constant(1) + b) * UnknownPoly::constant(2) ==
        UnknownPoly::constant(2) + b.scaled(2));
  // difference of squares
  CHECK((b1 + b2) * (b1 - b2) == b1 * b1 - b2 * b2);
}

TEST_CASE("ring properties on randomized instances") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    UnknownPoly p = random_poly(rng), q = random_poly(rng);
    CHECK(p + q == q + p);
    CHECK(p * q == q * p);
    std::map<std::string, Rational> point = {
        {"b1", Rational(trial % 7 - 3, 2)},
        {"b2", Rational(trial % 5 - 2)},
        {"r0", Rational(trial % 3, 3)},
        {"y3", Rational(-trial % 4, 5 % 4 + 1)},
    };
    CHECK((p + q).eval(point) == p.eval(point) + q.eval(point));
    CHECK((p * q).eval(point) == p.eval(point) * q.eval(point));
  }
}

TEST_CASE("canonical form: no zero coefficients, graded-lex order, idempotence") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    UnknownPoly p = random_poly(rng);
    Monomial prev;
    bool first = true;
    for (const auto& [m, c] : p.terms()) {
      CHECK(!c.is_zero());
      CHECK(std::is_sorted(m.begin(), m.end()));
      if (!first) CHECK(GradedLex{}(prev, m));
      prev = m;
      first = false;
    }
    // rebuilding from the stored terms changes nothing
    UnknownPoly rebuilt;
    for (const auto& [m, c] : p.terms()) {
      UnknownPoly mono = UnknownPoly::constant(c);
      for (const auto& v : m) mono = mono * UnknownPoly::var(v);
      rebuilt += mono;
    }
    CHECK(rebuilt == p);
  }
}

TEST_CASE("evaluation reports unresolved unknowns by name") {
  UnknownPoly p = UnknownPoly::var("inv_1_4") * UnknownPoly::var("f_033");
  CHECK_THROWS_WITH(p.eval({{"inv_1_4", Rational(1)}}),
                    Catch::Matchers::ContainsSubstring("f_033"));
}

TEST_CASE("affine evaluation") {
  SymbolicAffine e(1);
  e.constant = UnknownPoly::constant(1);
  e.coeffs[0] = UnknownPoly::constant(2);
  CHECK(e.eval({Rational(1, 2)}, {}) == Rational(2));

  SymbolicAffine f(1);
  f.coeffs[0] = UnknownPoly::var("b");
  CHECK(f.eval({Rational(1, 3)}, {{"b", Rational(3)}}) == Rational(1));

  SymbolicAffine zero(3);
  CHECK(zero.eval({Rational(1), Rational(0), Rational(0)}, {}) == Rational(0));
}

TEST_CASE("coefficient matching") {
  // c + d*x1 vs 2 + 3*x1  ->  {c - 2 = 0, d - 3 = 0}
  SymbolicAffine lhs(1), rhs(1);
  lhs.constant = UnknownPoly::var("c");
  lhs.coeffs[0] = UnknownPoly::var("d");
  rhs.constant = UnknownPoly::constant(2);
  rhs.coeffs[0] = UnknownPoly::constant(3);
  auto eqs = match_coefficients(lhs, rhs);
  REQUIRE(eqs.size() == 2);
  CHECK(eqs[0] == UnknownPoly::var("c") - UnknownPoly::constant(2));
  CHECK(eqs[1] == UnknownPoly::var("d") - UnknownPoly::constant(3));

  // identical sides collapse to nothing
  CHECK(match_coefficients(rhs, rhs).empty());

  // y0 + y1*x1 vs 2 - x1: cross-check the solution by substitution at x in {0,1}
  SymbolicAffine ys(1), target(1);
  ys.constant = UnknownPoly::var("y0");
  ys.coeffs[0] = UnknownPoly::var("y1");
  target.constant = UnknownPoly::constant(2);
  target.coeffs[0] = UnknownPoly::constant(-1);
  auto eqs2 = match_coefficients(ys, target);
  REQUIRE(eqs2.size() == 2);
  CHECK(eqs2[0] == UnknownPoly::var("y0") - UnknownPoly::constant(2));
  CHECK(eqs2[1] == UnknownPoly::var("y1") + UnknownPoly::constant(1));
  std::map<std::string, Rational> sol = {{"y0", Rational(2)}, {"y1", Rational(-1)}};
  for (Rational x : {Rational(0), Rational(1)})
    CHECK(ys.eval({x}, sol) == target.eval({x}, {}));
}

TEST_CASE("dump formatting matches the query style") {
  UnknownPoly p = UnknownPoly::var("f_027").scaled(Rational(-9, 10)) -
                  UnknownPoly::var("f_029") +
                  UnknownPoly::var("f_033") * UnknownPoly::var("inv_1_1") +
                  UnknownPoly::constant(Rational(1, 10));
  CHECK(p.str() == "1/10 - 9*f_027/10 - f_029 + f_033*inv_1_1");
  CHECK(UnknownPoly().str() == "0");
}
