#include <catch2/catch_amalgamated.hpp>

#include "dra/builtins.hpp"
#include "dra/grid.hpp"
#include "dra/model_io.hpp"

using namespace dra;

TEST_CASE("parse_grid: minimal layout") {
  Grid g = parse_grid("IG");
  CHECK(g.w == 2);
  CHECK(g.h == 1);
  CHECK(g.count(Cell::Init) == 1);
  CHECK(g.count(Cell::Goal) == 1);
}

TEST_CASE("parse_grid: the running layout") {
  Grid g = parse_grid(builtin_grid_text("running"));
  CHECK(g.w * g.h == 8);
  CHECK(g.count(Cell::Obstacle) == 1);
  ProblemSpec p = grid_to_problem(g);
  CHECK(p.mdp.n() == 7);
}

TEST_CASE("parse_grid: rejects bad input") {
  CHECK_THROWS_WITH(parse_grid("XX"), Catch::Matchers::ContainsSubstring("no initial"));
  CHECK_THROWS_WITH(parse_grid("IG\nI"), Catch::Matchers::ContainsSubstring("rectangular"));
  CHECK_THROWS_WITH(parse_grid("I?G"), Catch::Matchers::ContainsSubstring("unknown cell"));
  CHECK_THROWS_WITH(parse_grid("IX"), Catch::Matchers::ContainsSubstring("no goal"));
}

TEST_CASE("grid_to_problem: 1x2 target row is goal mass at least 9/10") {
  ProblemSpec p = grid_to_problem(parse_grid("IG"));
  REQUIRE(p.target.rows.size() == 1);
  const AffineRow& row = p.target.rows[0];
  CHECK_FALSE(row.strict);
  CHECK(row.form.constant == Rational(-9, 10));
  CHECK(row.form.coeffs[p.mdp.state_index("1_0")] == Rational(1));
  CHECK(row.form.coeffs[p.mdp.state_index("0_0")] == Rational(0));
}

TEST_CASE("grid benchmarks reproduce the published model properties") {
  struct Expect {
    const char* name;
    std::size_t states, actions, transitions, inits, goals, limited, forbidden;
  };
  const Expect table[] = {
      {"running", 7, 19, 24, 1, 1, 1, 0},
      {"twoinit", 7, 18, 22, 2, 1, 3, 0},
      {"double", 11, 30, 36, 2, 2, 2, 0},
      {"slippery", 12, 37, 48, 1, 1, 3, 0},
      {"grid5x4", 15, 29, 36, 1, 1, 3, 0},
      {"grid8x8", 32, 99, 111, 1, 1, 3, 0},
      {"grid20x10", 88, 280, 292, 2, 1, 9, 4},
  };
  for (const auto& e : table) {
    INFO(e.name);
    Grid g = parse_grid(builtin_grid_text(e.name));
    ProblemSpec p = builtin(e.name);
    CHECK(p.mdp.n() == e.states);
    CHECK(p.mdp.total_actions() == e.actions);
    CHECK(p.mdp.total_transitions() == e.transitions);
    CHECK(g.count(Cell::Init) == e.inits);
    CHECK(g.count(Cell::Goal) == e.goals);
    CHECK(g.count(Cell::Limited) == e.limited);
    CHECK(g.count(Cell::Forbidden) == e.forbidden);
    // the reachability filter kept every init/goal/limited/forbidden cell
    std::size_t init_states = 0;
    for (const auto& v : p.init_dist->p)
      if (!v.is_zero()) ++init_states;
    CHECK(init_states == e.inits);
  }
}

TEST_CASE("grid problems are deterministic") {
  for (const char* name : {"running", "grid5x4", "grid20x10"}) {
    std::string a = write_model(builtin(name));
    std::string b = write_model(builtin(name));
    CHECK(a == b);
  }
}

TEST_CASE("safe set encodes limited mass and forbidden cells") {
  ProblemSpec p = builtin("grid20x10");
  REQUIRE(p.safe.rows.size() == 5);  // one limited row + four forbidden rows
  const AffineRow& lim = p.safe.rows[0];
  CHECK(lim.form.constant == Rational(1, 10));
  Rational sum(0);
  for (const auto& c : lim.form.coeffs) sum += c;
  CHECK(sum == Rational(-9));  // nine limited cells, coefficient -1 each
  for (std::size_t h = 1; h < 5; ++h) {
    CHECK_FALSE(p.safe.rows[h].strict);
    CHECK(p.safe.rows[h].form.constant == Rational(0));
    Rational csum(0);
    int nonzero = 0;
    for (const auto& c : p.safe.rows[h].form.coeffs)
      if (!c.is_zero()) {
        ++nonzero;
        csum += c;
      }
    CHECK(nonzero == 1);
    CHECK(csum == Rational(-1));
  }
}

TEST_CASE("insulin rows renormalize to exactly one; absorbing last row") {
  ProblemSpec p = builtin("insulin");
  for (std::size_t s = 0; s < 5; ++s) {
    Rational sum(0);
    for (const auto& v : p.mdp.trans[s][0].p) sum += v;
    CHECK(sum == Rational(1));
  }
  const Distribution& last = p.mdp.trans[4][0];
  for (std::size_t i = 0; i < 4; ++i) CHECK(last.p[i] == Rational(0));
  CHECK(last.p[4] == Rational(1));
  // spot-check the renormalized first row against the published integers
  CHECK(p.mdp.trans[0][0].p[0] == Rational(93980, 100000));
  CHECK(p.mdp.trans[0][0].p[4] == Rational(24, 100000));
}

TEST_CASE("pagerank first row matches the published matrix") {
  ProblemSpec p = builtin("pagerank");
  const Distribution& row = p.mdp.trans[0][0];
  CHECK(row.p[0] == Rational(1, 80));
  CHECK(row.p[1] == Rational(19, 60));
  CHECK(row.p[2] == Rational(3, 40));
  CHECK(row.p[3] == Rational(19, 60));
  CHECK(row.p[4] == Rational(67, 240));
}

TEST_CASE("unknown benchmark names are rejected") {
  CHECK_THROWS_WITH(builtin("nosuch"), Catch::Matchers::ContainsSubstring("unknown benchmark"));
}

TEST_CASE("universal quantifier pins the uniform initial set") {
  ProblemSpec p = builtin("twoinit", Quantifier::Universal);
  CHECK_FALSE(p.init_dist.has_value());
  // two initial cells: two inequality pairs plus one zero row per other state
  CHECK(p.init_set.rows.size() == 2 * 2 + (7 - 2));
  // the pinned distribution satisfies every row
  ProblemSpec unit = builtin("twoinit");
  CHECK(p.init_set.contains(unit.init_dist->p));
}
