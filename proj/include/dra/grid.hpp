#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "dra/model.hpp"

namespace dra {

/// Cell legend: I initial, X obstacle, G goal, S sticky-stochastic,
/// s slip-stochastic, L limited (orange), F forbidden, U/D/R forced currents,
/// r slip current, '.' plain. ('L' is taken by limited cells, so there is no
/// left current; none of the shipped layouts needs one.)
enum class Cell { Init, Obstacle, Goal, Sticky, Slip, Limited, Forbidden,
                  CurrentU, CurrentD, CurrentR, SlipCurrentR, Plain };

struct Grid {
  int w = 0;
  int h = 0;
  std::vector<Cell> cells;  // row-major

  Cell at(int c, int r) const { return cells[static_cast<std::size_t>(r * w + c)]; }
  bool inside(int c, int r) const { return c >= 0 && c < w && r >= 0 && r < h; }
  bool open(int c, int r) const { return inside(c, r) && at(c, r) != Cell::Obstacle; }

  std::size_t count(Cell k) const {
    return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), k));
  }
};

inline Grid parse_grid(const std::string& text) {
  Grid g;
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      if (!cur.empty() && cur.back() == '\r') cur.pop_back();
      if (!cur.empty()) lines.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  if (lines.empty()) throw Error("empty grid");
  g.h = static_cast<int>(lines.size());
  g.w = static_cast<int>(lines[0].size());
  for (const auto& line : lines)
    if (static_cast<int>(line.size()) != g.w) throw Error("non-rectangular grid");
  for (const auto& line : lines)
    for (char ch : line) {
      Cell k;
      switch (ch) {
        case 'I': k = Cell::Init; break;
        case 'X': k = Cell::Obstacle; break;
        case 'G': k = Cell::Goal; break;
        case 'S': k = Cell::Sticky; break;
        case 's': k = Cell::Slip; break;
        case 'L': k = Cell::Limited; break;
        case 'F': k = Cell::Forbidden; break;
        case 'U': k = Cell::CurrentU; break;
        case 'D': k = Cell::CurrentD; break;
        case 'R': k = Cell::CurrentR; break;
        case 'r': k = Cell::SlipCurrentR; break;
        case '.': k = Cell::Plain; break;
        default: throw Error(std::string("unknown cell character '") + ch + "'");
      }
      g.cells.push_back(k);
    }
  if (g.count(Cell::Init) == 0) throw Error("grid has no initial cell");
  if (g.count(Cell::Goal) == 0) throw Error("grid has no goal cell");
  return g;
}

namespace detail {

struct Dir {
  char name;
  int dc, dr;
};
inline const Dir kDirs[4] = {{'d', 0, 1}, {'l', -1, 0}, {'r', 1, 0}, {'u', 0, -1}};

/// Slip move: 9/10 to the destination, 1/20 to each cell orthogonally adjacent
/// to the destination; blocked slip targets fold back into the destination.
inline std::map<std::pair<int, int>, Rational> slip_dist(const Grid& g, int c, int r,
                                                         int dc, int dr) {
  std::map<std::pair<int, int>, Rational> d;
  std::pair<int, int> dest{c + dc, r + dr};
  d[dest] = Rational(9, 10);
  const int oc = dr, orr = dc;  // perpendicular offsets
  for (int sgn : {1, -1}) {
    std::pair<int, int> t{dest.first + sgn * oc, dest.second + sgn * orr};
    if (g.open(t.first, t.second))
      d[t] += Rational(1, 20);
    else
      d[dest] += Rational(1, 20);
  }
  return d;
}

struct CellActions {
  std::vector<std::string> names;
  std::vector<std::map<std::pair<int, int>, Rational>> dists;
};

inline CellActions cell_actions(const Grid& g, int c, int r) {
  CellActions out;
  Cell k = g.at(c, r);
  auto add = [&](const std::string& name, std::map<std::pair<int, int>, Rational> d) {
    out.names.push_back(name);
    out.dists.push_back(std::move(d));
  };
  if (k == Cell::Goal) {
    add("s", {{{c, r}, Rational(1)}});
    return out;
  }
  auto forced = [&](char dirname) {
    for (const auto& dir : kDirs)
      if (dir.name == dirname) {
        if (!g.open(c + dir.dc, r + dir.dr))
          throw Error("current cell points into a blocked cell");
        add(std::string(1, dirname), {{{c + dir.dc, r + dir.dr}, Rational(1)}});
      }
  };
  if (k == Cell::CurrentU) { forced('u'); return out; }
  if (k == Cell::CurrentD) { forced('d'); return out; }
  if (k == Cell::CurrentR) { forced('r'); return out; }
  if (k == Cell::SlipCurrentR) {
    if (!g.open(c + 1, r)) throw Error("current cell points into a blocked cell");
    add("r", slip_dist(g, c, r, 1, 0));
    return out;
  }
  // Free cells: actions in alphabetical order d, l, r, s, u with "s" = stay.
  for (const auto& dir : kDirs) {
    if (dir.name == 'u') add("s", {{{c, r}, Rational(1)}});
    if (!g.open(c + dir.dc, r + dir.dr)) continue;
    std::pair<int, int> dest{c + dir.dc, r + dir.dr};
    if (k == Cell::Sticky) {
      std::map<std::pair<int, int>, Rational> d;
      d[{c, r}] = Rational(1, 10);
      d[dest] += Rational(9, 10);
      add(std::string(1, dir.name), std::move(d));
    } else if (k == Cell::Slip) {
      add(std::string(1, dir.name), slip_dist(g, c, r, dir.dc, dir.dr));
    } else {
      add(std::string(1, dir.name), {{dest, Rational(1)}});
    }
  }
  return out;
}

}  // namespace detail

/// Builds the reach-avoid problem of a grid: target = goal mass >= goal_mass,
/// safe = limited mass <= limit_mass plus one non-strict row per forbidden
/// cell, initial mass uniform over the I cells.
inline ProblemSpec grid_to_problem(const Grid& grid, const Rational& goal_mass = Rational(9, 10),
                                   const Rational& limit_mass = Rational(1, 10),
                                   Quantifier quantifier = Quantifier::Unit,
                                   const std::string& name = "grid") {
  // Reachable, non-obstacle cells (breadth-first over action supports).
  std::vector<std::pair<int, int>> order;
  std::map<std::pair<int, int>, int> idx;
  for (int r = 0; r < grid.h; ++r)
    for (int c = 0; c < grid.w; ++c)
      if (grid.at(c, r) == Cell::Init) {
        idx[{c, r}] = -1;
        order.push_back({c, r});
      }
  for (std::size_t head = 0; head < order.size(); ++head) {
    auto [c, r] = order[head];
    auto acts = detail::cell_actions(grid, c, r);
    for (const auto& dist : acts.dists)
      for (const auto& [t, p] : dist)
        if (!idx.count(t)) {
          idx[t] = -1;
          order.push_back(t);
        }
  }
  std::sort(order.begin(), order.end(),
            [](const auto& a, const auto& b) { return std::tie(a.second, a.first) <
                                                      std::tie(b.second, b.first); });
  for (std::size_t i = 0; i < order.size(); ++i) idx[order[i]] = static_cast<int>(i);

  ProblemSpec spec;
  spec.name = name;
  Mdp& mdp = spec.mdp;
  for (auto [c, r] : order)
    mdp.states.push_back(std::to_string(c) + "_" + std::to_string(r));
  mdp.actions.resize(order.size());
  mdp.trans.resize(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto [c, r] = order[i];
    auto acts = detail::cell_actions(grid, c, r);
    for (std::size_t a = 0; a < acts.names.size(); ++a) {
      mdp.actions[i].push_back(acts.names[a]);
      Distribution d;
      d.p.assign(order.size(), Rational(0));
      for (const auto& [t, p] : acts.dists[a]) d.p[static_cast<std::size_t>(idx.at(t))] += p;
      mdp.trans[i].push_back(std::move(d));
    }
  }

  const std::size_t n = order.size();
  auto cells_of = [&](Cell kind) {
    std::vector<std::size_t> v;
    for (std::size_t i = 0; i < n; ++i)
      if (grid.at(order[i].first, order[i].second) == kind) v.push_back(i);
    return v;
  };

  // Target: goal mass at least goal_mass.
  {
    AffineRow row;
    row.form = AffineForm(n);
    row.form.constant = -goal_mass;
    for (std::size_t i : cells_of(Cell::Goal)) row.form.coeffs[i] = Rational(1);
    spec.target.rows.push_back(std::move(row));
  }
  // Safe: limited mass at most limit_mass; forbidden cells carry no mass.
  auto limited = cells_of(Cell::Limited);
  if (!limited.empty()) {
    AffineRow row;
    row.form = AffineForm(n);
    row.form.constant = limit_mass;
    for (std::size_t i : limited) row.form.coeffs[i] = Rational(-1);
    spec.safe.rows.push_back(std::move(row));
  }
  for (std::size_t i : cells_of(Cell::Forbidden)) {
    AffineRow row;
    row.form = AffineForm(n);
    row.form.coeffs[i] = Rational(-1);
    spec.safe.rows.push_back(std::move(row));
  }

  // Initial mass: uniform over the I cells.
  auto inits = cells_of(Cell::Init);
  Rational share(1, static_cast<long>(inits.size()));
  spec.quantifier = quantifier;
  if (quantifier == Quantifier::Unit) {
    Distribution d;
    d.p.assign(n, Rational(0));
    for (std::size_t i : inits) d.p[i] = share;
    spec.init_dist = std::move(d);
  } else {
    // The same uniform distribution as an affine set: paired inequalities pin
    // each initial cell to its share, the remaining cells to zero.
    for (std::size_t i : inits) {
      AffineRow lo, hi;
      lo.form = AffineForm(n);
      lo.form.constant = -share;
      lo.form.coeffs[i] = Rational(1);
      hi.form = AffineForm(n);
      hi.form.constant = share;
      hi.form.coeffs[i] = Rational(-1);
      spec.init_set.rows.push_back(std::move(lo));
      spec.init_set.rows.push_back(std::move(hi));
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (std::find(inits.begin(), inits.end(), i) != inits.end()) continue;
      AffineRow zero;
      zero.form = AffineForm(n);
      zero.form.coeffs[i] = Rational(-1);
      spec.init_set.rows.push_back(std::move(zero));
    }
  }
  spec.validate();
  return spec;
}

}  // namespace dra
