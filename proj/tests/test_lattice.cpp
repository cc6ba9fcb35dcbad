#include "conical/error.hpp"
#include "conical/lattice.hpp"
#include "conical/synth.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace conical;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

DiscreteMeasure cantor(int gen) {
  synth::GeneratorSpec s;
  s.kind = synth::Kind::four_corner_cantor;
  s.generation = gen;
  return synth::generate(s);
}

DiscreteMeasure cloud(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat pts(2, static_cast<Eigen::Index>(count));
  for (Eigen::Index i = 0; i < pts.cols(); ++i) pts.col(i) = v2(u(rng), u(rng));
  return DiscreteMeasure(pts, std::vector<double>(count, 1.0 / static_cast<double>(count)), 1);
}

// Maximal doubling strict descendants by walking every cube and checking its ancestors.
std::vector<std::size_t> brute_md(const Lattice& lat, std::size_t q) {
  std::vector<std::size_t> out;
  for (const auto& c : lat.cubes()) {
    if (c.id == q || !c.doubling || !lat.is_subcube(c.id, q)) continue;
    bool maximal = true;
    for (auto p = c.parent; p && *p != q; p = lat.cube(*p).parent)
      if (lat.cube(*p).doubling) maximal = false;
    if (maximal) out.push_back(c.id);
  }
  return out;
}

}  // namespace

TEST_CASE("single atom gives a chain of doubling singletons") {
  const DiscreteMeasure one(v2(0.3, 0.7), {2.0}, 1);
  LatticeParams p;
  p.max_depth = 3;
  const Lattice lat = build_lattice(one, p);
  CHECK(lat.cubes().size() == 4);
  for (const auto& c : lat.cubes()) {
    CHECK(c.members.size() == 1);
    CHECK(c.doubling);
  }
  CHECK(check_lattice(lat).ok());
}

TEST_CASE("two atoms separate once 10 A0^-k drops below their distance") {
  Mat pts(2, 2);
  pts.col(0) = v2(0, 0);
  pts.col(1) = v2(3, 0);
  const DiscreteMeasure two(pts, {0.5, 0.5}, 1);
  const Lattice lat = build_lattice(two, LatticeParams{});
  // normalized distance 1: 10/8 > 1 merges, 10/64 < 1 splits
  CHECK(lat.depth() == 2);
  CHECK(lat.levels()[1].size() == 1);
  CHECK(lat.levels()[2].size() == 2);
  CHECK(lat.scale() == doctest::Approx(1.0 / 3.0));
  CHECK(lat.cube(lat.levels()[1][0]).members == std::vector<std::size_t>{0, 1});
}

TEST_CASE("lattice invariants on Cantor and random clouds") {
  for (int gen : {3, 5}) {
    LatticeParams p;
    if (gen == 3) p.a0 = 5.0;
    const Lattice lat = build_lattice(cantor(gen), p);
    const auto rep = check_lattice(lat);
    CHECK(rep.partition);
    CHECK(rep.nesting);
    CHECK(rep.disjoint_5b);
    CHECK(rep.radius_bounds);

    // exhaustive 5B(Q) pair scan, independent of check_lattice
    for (const auto& level : lat.levels())
      for (std::size_t a = 0; a < level.size(); ++a)
        for (std::size_t b = a + 1; b < level.size(); ++b) {
          const auto& qa = lat.cube(level[a]);
          const auto& qb = lat.cube(level[b]);
          CHECK((lat.center(qa.id) - lat.center(qb.id)).norm() >= 5.0 * (qa.radius + qb.radius));
        }
  }
  const Lattice lat = build_lattice(cloud(800, 3), LatticeParams{});
  CHECK(check_lattice(lat).ok());
  // normalized diameter is 1
  CHECK(lat.measure().diameter() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lattice is deterministic and validates parameters") {
  const auto m = cloud(300, 5);
  const Lattice a = build_lattice(m, LatticeParams{});
  const Lattice b = build_lattice(m, LatticeParams{});
  CHECK(lattice_to_json(a, true) == lattice_to_json(b, true));
  CHECK_THROWS_AS(build_lattice(m, LatticeParams{2.0, 3.0, 0}), Error);
  CHECK_THROWS_AS(build_lattice(m, LatticeParams{1.0, 8.0, 0}), Error);
  CHECK_THROWS_AS(a.cube(a.cubes().size()), Error);
}

TEST_CASE("doubling flags follow the inequality") {
  const Lattice lat = build_lattice(cantor(4), LatticeParams{});
  CHECK(lat.cube(lat.root()).doubling);
  for (const auto& c : lat.cubes()) {
    const double big = ball_mass(lat.measure(), lat.center(c.id), 100.0 * c.radius);
    const double small = ball_mass(lat.measure(), lat.center(c.id), c.radius);
    CHECK(c.doubling == (big <= lat.params().c0 * small));
  }

  // pair of close atoms plus an isolated one, level 2 (r = 1/64):
  // the pair sees mass 3 <= 2 * 2 in its 100B, the loner sees 3 > 2 * 1
  Mat pts(2, 3);
  pts.col(0) = v2(0, 0);
  pts.col(1) = v2(0.001, 0);
  pts.col(2) = v2(1, 0);
  LatticeParams p;
  p.max_depth = 2;
  const Lattice l2 = build_lattice(DiscreteMeasure(pts, {1.0, 1.0, 1.0}, 1), p);
  const std::size_t pair = l2.cube_of(0, 2);
  const std::size_t far = l2.cube_of(2, 2);
  CHECK(l2.cube(pair).members == std::vector<std::size_t>{0, 1});
  CHECK(l2.cube(far).members == std::vector<std::size_t>{2});
  CHECK(l2.cube(pair).doubling);
  CHECK_FALSE(l2.cube(far).doubling);
}

TEST_CASE("maximal doubling descendants") {
  for (int gen : {3, 4}) {
    LatticeParams p;
    p.c0 = 150.0;  // generous enough that some strict descendants are doubling
    p.a0 = 400.0;
    const Lattice lat = build_lattice(cantor(gen), p);
    for (const auto& c : lat.cubes()) {
      const auto md = maximal_doubling(lat, c.id);
      CHECK(md.cubes == brute_md(lat, c.id));
      // cover: members of MD plus the uncovered atoms are exactly the cube
      std::set<std::size_t> covered(md.uncovered_atoms.begin(), md.uncovered_atoms.end());
      for (std::size_t q : md.cubes)
        for (std::size_t a : lat.cube(q).members) CHECK(covered.insert(a).second);
      if (!c.children.empty()) CHECK(covered == std::set<std::size_t>(c.members.begin(), c.members.end()));
    }
  }
  const Lattice lat = build_lattice(cantor(3), LatticeParams{});
  CHECK_THROWS_AS(maximal_doubling(lat, 100000), Error);
}

TEST_CASE("delta_mu") {
  const Lattice lat = build_lattice(cantor(4), LatticeParams{});
  CHECK(delta_mu(lat, 0, 0) == 0.0);
  const auto& mu = lat.measure();
  for (const auto& c : lat.cubes()) {
    if (c.id % 7) continue;
    for (auto s = c.parent; s; s = lat.cube(*s).parent) {
      double brute = 0.0;
      for (std::size_t a = 0; a < mu.size(); ++a) {
        const double to_s = (mu.point_vec(a) - lat.center(*s)).norm();
        const double to_q = (mu.point_vec(a) - lat.center(c.id)).norm();
        if (to_s < 2.0 * lat.cube(*s).big_radius() && to_q >= 2.0 * c.big_radius()) brute += mu.weight(a) / to_q;
      }
      CHECK(delta_mu(lat, c.id, *s) == doctest::Approx(brute).epsilon(1e-13));
    }
  }
  const std::size_t a = lat.levels()[1].front(), b = lat.levels()[1].back();
  if (a != b) CHECK_THROWS_AS(delta_mu(lat, a, b), Error);

  // one annulus atom of weight w at distance rho: w / rho
  Mat pts(2, 2);
  pts.col(0) = v2(0, 0);
  pts.col(1) = v2(1, 0);
  LatticeParams p;
  p.max_depth = 2;
  const Lattice two = build_lattice(DiscreteMeasure(pts, {1.0, 0.25}, 1), p);
  const std::size_t q = two.cube_of(0, 2);
  // 2B_Q has radius 56/64 < 1, 2B_root has radius 112
  CHECK(delta_mu(two, q, 0) == doctest::Approx(0.25));
}

TEST_CASE("density drop report") {
  const Lattice lat = build_lattice(cantor(4), LatticeParams{});
  const std::size_t child = lat.levels()[1].front();
  const auto r = density_drop_check(lat, child, 0);
  CHECK(r.steps == 0);
  const double c0a0 = lat.params().c0 * lat.params().a0;
  const auto theta100 = [&](std::size_t id) {
    const double rad = 100.0 * lat.cube(id).radius;
    return ball_mass(lat.measure(), lat.center(id), rad) / rad;
  };
  CHECK(r.lhs == doctest::Approx(theta100(child)));
  CHECK(r.rhs == doctest::Approx(c0a0 * c0a0 * theta100(0)));
  CHECK(r.holds == (r.lhs <= r.rhs));
  CHECK_THROWS_AS(density_drop_check(lat, 0, child), Error);


  // every (Q, ancestor R) pair of a random cloud: throws iff an intermediate
  // cube is doubling, otherwise matches the formula with d = 2
  const Lattice rc = build_lattice(cloud(400, 21), LatticeParams{});
  const double c0 = rc.params().c0, a0 = rc.params().a0;
  const auto th = [&](std::size_t id) {
    const double rad = 100.0 * rc.cube(id).radius;
    return ball_mass(rc.measure(), rc.center(id), rad) / rad;
  };
  int evaluated = 0, rejected = 0;
  for (const auto& q : rc.cubes()) {
    if (q.level < 2) continue;
    bool blocked = false;
    for (auto s = q.parent; s; s = rc.cube(*s).parent) {
      if (blocked) {
        CHECK_THROWS_AS(density_drop_check(rc, q.id, *s), Error);
        ++rejected;
      } else {
        const auto rep = density_drop_check(rc, q.id, *s);
        const int steps = q.level - rc.cube(*s).level - 1;
        CHECK(rep.steps == steps);
        const double rhs = std::pow(c0 * a0, 2) * std::pow(a0, -18.0 * steps) * th(*s);
        CHECK(rep.lhs == doctest::Approx(th(q.id)).epsilon(1e-13));
        CHECK(rep.rhs == doctest::Approx(rhs).epsilon(1e-13));
        CHECK(rep.holds == (rep.lhs <= rep.rhs));
        ++evaluated;
      }
      if (rc.cube(*s).doubling) blocked = true;
    }
  }
  CHECK(evaluated > 0);
  CHECK(rejected > 0);
}

TEST_CASE("lattice JSON dump") {
  const Lattice lat = build_lattice(cantor(2), LatticeParams{});
  const auto j = lattice_to_json(lat, false);
  CHECK(j.contains("cubes"));
  CHECK(j["cubes"].size() == lat.cubes().size());
  const auto& c0 = j["cubes"][0];
  for (const char* key : {"id", "level", "center", "r", "parent", "children", "members_count", "doubling"})
    CHECK(c0.contains(key));
  CHECK_FALSE(c0.contains("members"));
  CHECK(lattice_to_json(lat, true)["cubes"][0].contains("members"));
}
