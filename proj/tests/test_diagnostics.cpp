#include "conical/diagnostics.hpp"
#include "conical/error.hpp"
#include "conical/synth.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace conical;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

DiscreteMeasure cloud(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat pts(2, static_cast<Eigen::Index>(count));
  std::vector<double> w(count);
  for (std::size_t i = 0; i < count; ++i) {
    pts.col(static_cast<Eigen::Index>(i)) = v2(u(rng), u(rng));
    w[i] = 0.1 + u(rng);
  }
  return DiscreteMeasure(pts, w, 1);
}

DiscreteMeasure segment(std::size_t count) {
  synth::GeneratorSpec s;
  s.kind = synth::Kind::segment;
  s.count = count;
  return synth::generate(s);
}

// Graph of F(z) = a sin(2 pi z) over the x-axis with `k` anchors on [0, 1].
LipschitzGraph sine_graph(double a, int k) {
  Mat z(1, k), f(1, k);
  for (int j = 0; j < k; ++j) {
    z(0, j) = static_cast<double>(j) / (k - 1);
    f(0, j) = a * std::sin(2 * M_PI * z(0, j));
  }
  return LipschitzGraph(axis_plane(2, {0}), axis_plane(2, {1}), z, f, 2 * M_PI * a);
}

int shell_index(double len) { return static_cast<int>(std::ceil(-std::log2(len))); }

}  // namespace

TEST_CASE("beta2 on collinear points and the square corners") {
  Mat pts(2, 5);
  for (int i = 0; i < 5; ++i) pts.col(i) = v2(0.1 * i, 1.0 + 0.2 * i);
  const DiscreteMeasure line(pts, std::vector<double>(5, 1.0), 1);
  const auto b = beta2(line, v2(0.2, 1.4), 1.0);
  CHECK(b.beta < 1e-7);
  CHECK_FALSE(b.degenerate_spectrum);
  // the fitted line is the line itself
  CHECK(plane_metric(b.plane.plane, make_plane({v2(1, 2)})) < 1e-12);

  Mat sq(2, 4);
  sq.col(0) = v2(0, 0);
  sq.col(1) = v2(1, 0);
  sq.col(2) = v2(0, 1);
  sq.col(3) = v2(1, 1);
  const DiscreteMeasure corners(sq, std::vector<double>(4, 0.25), 1);
  const auto c = beta2(corners, v2(0.5, 0.5), 1.0);
  CHECK(std::abs(c.beta - 0.5) <= 1e-12);
  CHECK(c.degenerate_spectrum);

  try {
    beta2(corners, v2(5, 5), 1.0);
    FAIL("expected EmptyBall");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_ball);
  }
}

TEST_CASE("beta2 never loses to an angle grid and matches its own objective") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = cloud(60, 100 + seed);
    const Vec x = v2(0.5, 0.5);
    for (double r : {0.3, 0.6}) {
      const auto b = beta2(m, x, r);
      CHECK(b.beta <= oracle::beta_line_grid(m, x, r, 720) + 1e-10);
      CHECK(beta_objective(m, x, r, b.plane) == doctest::Approx(b.beta).epsilon(1e-12));
    }
  }
}

TEST_CASE("beta2 scaling") {
  // positions times s and weights times s^n leave beta unchanged
  const auto m = cloud(80, 4);
  const double s = 3.5;
  std::vector<double> w(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) w[i] = s * m.weight(i);
  const DiscreteMeasure scaled(m.points() * s, w, 1);
  const Vec x = v2(0.4, 0.5);
  CHECK(beta2(scaled, s * x, s * 0.35).beta == doctest::Approx(beta2(m, x, 0.35).beta).epsilon(1e-10));

  const auto prof = beta_square_function(m, x, {0.5, 0.25, 0.125});
  CHECK(prof.betas.size() == 3);
  const double dl = std::log(2.0);
  double expect = 0.0;
  for (double b : prof.betas) expect += b * b * dl;
  CHECK(prof.square_sum == doctest::Approx(expect));
}

TEST_CASE("plane_ball_hausdorff") {
  const AffinePlane xaxis{v2(0, 0), axis_plane(2, {0})};
  for (double phi : {0.1, 0.5, 1.2}) {
    const AffinePlane tilted{v2(0, 0), make_plane({v2(std::cos(phi), std::sin(phi))})};
    CHECK(plane_ball_hausdorff(xaxis, tilted, v2(0, 0), 2.0) == doctest::Approx(2.0 * std::sin(phi)).epsilon(1e-12));
  }
  // parallel chord at height delta: far endpoint dominates
  const double delta = 0.3, s = std::sqrt(1 - delta * delta);
  const AffinePlane chord{v2(0, delta), axis_plane(2, {0})};
  CHECK(plane_ball_hausdorff(xaxis, chord, v2(0, 0), 1.0) ==
        doctest::Approx(std::hypot(1 - s, delta)).epsilon(1e-12));
  CHECK(std::isinf(plane_ball_hausdorff(xaxis, AffinePlane{v2(0, 3), axis_plane(2, {0})}, v2(0, 0), 1.0)));

  // two 2-planes in R^3 through the center at angle phi: r sin(phi)
  const AffinePlane xy{v3(0, 0, 0), axis_plane(3, {0, 1})};
  const double phi = 0.4;
  const AffinePlane rot{v3(0, 0, 0), make_plane({v3(1, 0, 0), v3(0, std::cos(phi), std::sin(phi))})};
  CHECK(plane_ball_hausdorff(xy, rot, v3(0, 0, 0), 1.0) == doctest::Approx(std::sin(phi)).epsilon(1e-5));
  CHECK(plane_ball_hausdorff(xy, xy, v3(0, 0, 0), 1.0) < 1e-12);
}

TEST_CASE("tangent convergence and conical density profiles") {
  const auto line = segment(2000);
  const auto t = tangent_convergence(line, v2(0.5, 0), {0.4, 0.2, 0.1, 0.05});
  CHECK(t.reference_scale == 0.05);
  CHECK(t.values.size() == 3);
  for (double v : t.values) CHECK(v < 1e-6);

  synth::GeneratorSpec cs;
  cs.kind = synth::Kind::circle;
  cs.count = 4000;
  const auto circle = synth::generate(cs);
  const Vec top = circle.point_vec(0);
  const auto tc = tangent_convergence(circle, top, {0.4, 0.2, 0.1, 0.05, 0.025});
  CHECK(tc.values.front() > tc.values.back());
  CHECK(tc.trend < 1.0);
  CHECK_THROWS_AS(tangent_convergence(line, v2(0.5, 0), {0.1, 0.2, 0.05}), Error);

  const auto flat = conical_density_profile(line, v2(0.5, 0), axis_plane(2, {0}), 0.5, {0.4, 0.2, 0.1}, 0.1);
  for (double v : flat.values) CHECK(v == 0.0);
  CHECK(flat.nonincreasing);
  REQUIRE(flat.threshold.has_value());
  CHECK(flat.below_threshold == std::vector<bool>{true, true, true});

  // W orthogonal to the line puts the whole line in the complementary cone
  const auto cross = conical_density_profile(line, v2(0.5, 0), axis_plane(2, {1}), 0.5, {0.4, 0.2, 0.1});
  for (std::size_t k = 0; k < cross.values.size(); ++k)
    CHECK(cross.values[k] == doctest::Approx(ball_mass(line, v2(0.5, 0), cross.scales[k]) / cross.scales[k]));
  CHECK_FALSE(cross.threshold.has_value());
}

TEST_CASE("cone outside tube") {
  const Plane w = axis_plane(2, {0});
  const auto ok = cone_outside_tube_check(v2(0, 0), 1.0, w, AffinePlane{v2(0, 0.02), w}, 0.5, 0.05, 2000, 1);
  CHECK(ok.hypothesis);
  CHECK(ok.passed);
  CHECK(ok.samples == 2000);
  CHECK(ok.eta == doctest::Approx(0.35));

  const auto far = cone_outside_tube_check(v2(0, 0), 1.0, w, AffinePlane{v2(0, 0.2), w}, 0.5, 0.05, 100, 1);
  CHECK_FALSE(far.hypothesis);
  CHECK(far.samples == 0);

  try {
    cone_outside_tube_check(v2(0, 0), 1.0, w, AffinePlane{v2(0, 0), w}, 0.8, 0.1, 10, 1);
    FAIL("expected InvalidEta");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_eta);
  }
}

TEST_CASE("theta shells against brute force") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto m = cloud(70, 40 + seed);
    const Plane v = sample_grassmannian(2, 1, 1, seed)[0];
    for (double th : {0.2, 0.5}) {
      const auto res = theta_M_property(m.points(), v, th, true);
      std::size_t worst = 0;
      for (std::size_t i = 0; i < m.size(); ++i) {
        std::set<int> expect;
        for (std::size_t j = 0; j < m.size(); ++j)
          if (j != i && oracle::in_cone(m.point_vec(i), m.point_vec(j), v, th))
            expect.insert(shell_index((m.point_vec(j) - m.point_vec(i)).norm()));
        CHECK(theta_shells(m.points(), i, v, th) == expect);
        CHECK(res.counts[i] == expect.size());
        worst = std::max(worst, expect.size());
      }
      CHECK(res.max_count == worst);
    }
  }
  // exact powers of two land in the shell they open
  Mat pts(2, 2);
  pts.col(0) = v2(0, 0);
  pts.col(1) = v2(0, 0.25);
  CHECK(theta_shells(pts, 0, axis_plane(2, {1}), 0.5) == std::set<int>{2});

  const auto line = segment(300);
  CHECK(theta_M_property(line.points(), axis_plane(2, {1}), 0.9, false).max_count == 0);
  CHECK_THROWS_AS(theta_M_property(line.points(), axis_plane(2, {1}), 1.0, false), Error);
}

TEST_CASE("F_eps is exact and monotone") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto m = cloud(90, 70 + seed);
    for (double eps : {0.05, 0.5, 2.0}) {
      const auto got = f_epsilon_set(m, eps);
      std::vector<std::size_t> expect;
      for (std::size_t i = 0; i < m.size(); ++i) {
        std::vector<double> radii{1.0};
        for (std::size_t j = 0; j < m.size(); ++j) {
          const double r = (m.point_vec(j) - m.point_vec(i)).norm();
          if (r > 0.0 && r <= 1.0) radii.push_back(r);
        }
        bool hit = false;
        for (double r : radii) {
          double mass = 0.0;
          for (std::size_t j = 0; j < m.size(); ++j)
            if ((m.point_vec(j) - m.point_vec(i)).norm() < r) mass += m.weight(j);
          hit |= mass <= eps * r;
        }
        if (hit) expect.push_back(i);
      }
      CHECK(got == expect);
    }
    const auto small = f_epsilon_set(m, 0.5), big = f_epsilon_set(m, 5.0);
    CHECK(std::includes(big.begin(), big.end(), small.begin(), small.end()));
  }
  // unit-mass segment: mu(B(x, r)) >= min(r, 1) everywhere
  CHECK(f_epsilon_set(segment(500), 0.5).empty());
  CHECK(f_epsilon_set(segment(500), 0.5, {0.001, 0.1, 1.0}).empty());
  const DiscreteMeasure lone(v2(0, 0), {0.1}, 1);
  CHECK(f_epsilon_set(lone, 0.2) == std::vector<std::size_t>{0});
  CHECK_THROWS_AS(f_epsilon_set(lone, 0.2, {2.0}), Error);
}

TEST_CASE("necessary BPLG cover") {
  const auto g = sine_graph(0.05, 200);
  // atoms on the anchors plus a handful above the graph
  Mat pts(2, 210);
  std::vector<double> w(210, 1.0);
  for (int j = 0; j < 200; ++j) pts.col(j) = g.anchor_point(static_cast<std::size_t>(j));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int j = 200; j < 210; ++j) pts.col(j) = v2(u(rng), 0.2 + 0.3 * u(rng));
  const DiscreteMeasure m(pts, w, 1);
  const auto rep = necessary_bplg_cover(m, g, true);
  CHECK(rep.ok());
  CHECK(rep.off_graph.size() == 10);
  CHECK(rep.alpha == doctest::Approx(std::min({0.5 / std::sqrt(1 + std::pow(0.1 * M_PI, 2)), 0.1, 1 / (0.4 * M_PI)})));
  CHECK(rep.graph_samples > 0);
  // every off-graph atom is within 5 r_j of a selected center, and the selected balls are disjoint
  for (std::size_t i : rep.off_graph) {
    bool hit = false;
    for (std::size_t t = 0; t < rep.selected.size(); ++t)
      hit |= (m.point_vec(i) - m.point_vec(rep.selected[t])).norm() < 5 * rep.radii[t];
    CHECK(hit);
  }
  for (std::size_t t = 0; t < rep.selected.size(); ++t)
    CHECK(rep.radii[t] == doctest::Approx(0.01 * g.distance(m.point_vec(rep.selected[t]))));

  const DiscreteMeasure m3(Mat::Zero(3, 2), {1.0, 1.0}, 1);
  try {
    necessary_bplg_cover(m3, g, true);
    FAIL("expected GraphAmbientMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::graph_ambient_mismatch);
  }
}
