#include "conical/error.hpp"
#include "conical/io.hpp"
#include "conical/measure.hpp"
#include "conical/synth.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace conical;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

DiscreteMeasure atom(double w, const Vec& at, int n = 1) { return DiscreteMeasure(at, {w}, n); }

DiscreteMeasure random_cloud(std::size_t count, int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat pts(d, static_cast<Eigen::Index>(count));
  std::vector<double> w(count);
  for (std::size_t i = 0; i < count; ++i) {
    for (int k = 0; k < d; ++k) pts(k, static_cast<Eigen::Index>(i)) = u(rng);
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

double brute_ball(const DiscreteMeasure& m, const Vec& x, double r) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i)
    if ((m.point_vec(i) - x).norm() < r) s += m.weight(i);
  return s;
}

}  // namespace

TEST_CASE("ball_mass uses open balls") {
  const auto m = atom(1.0, v2(0, 0));
  CHECK(ball_mass(m, v2(0, 0), 0.1) == 1.0);
  CHECK(ball_mass(m, v2(1, 0), 1.0) == 0.0);
  CHECK_THROWS_AS(ball_mass(m, Vec::Zero(3), 1.0), Error);

  synth::GeneratorSpec s;
  s.kind = synth::Kind::four_corner_cantor;
  s.generation = 1;
  const auto c1 = synth::generate(s);
  CHECK(ball_mass(c1, v2(0.125, 0.125), 0.5) == doctest::Approx(brute_ball(c1, v2(0.125, 0.125), 0.5)));
  CHECK(ball_mass(c1, v2(0.125, 0.125), 0.5) == 0.25);
}

TEST_CASE("spatial index agrees with brute force bit for bit") {
  for (int d : {2, 3}) {
    const auto m = random_cloud(3000, d, 40 + static_cast<std::uint64_t>(d));
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-0.2, 1.2);
    std::uniform_real_distribution<double> ru(0.0, 0.4);
    for (int q = 0; q < 300; ++q) {
      Vec x(d);
      for (int k = 0; k < d; ++k) x(k) = u(rng);
      const double r = q % 10 == 0 ? m.point_vec(static_cast<std::size_t>(q)).norm() : ru(rng) + 1e-6;
      std::vector<std::size_t> expect;
      for (std::size_t i = 0; i < m.size(); ++i)
        if ((m.point_vec(i) - x).norm() < r) expect.push_back(i);
      auto got = m.ball_indices(x, r);
      std::sort(got.begin(), got.end());
      CHECK(got == expect);
      CHECK(ball_mass(m, x, r) == brute_ball(m, x, r));
    }
  }
}

TEST_CASE("cone_mass") {
  const auto line = segment(100);
  for (double a : {0.1, 0.5, 0.99})
    CHECK(cone_mass(line, make_cone(line.point_vec(37), axis_plane(2, {1}), a)) == 0.0);

  const auto m = atom(0.3, v2(0, 2));
  CHECK(cone_mass(m, make_cone(v2(0, 0), axis_plane(2, {1}), 0.5, 0.0, 3.0)) == 0.3);
  CHECK(cone_mass(m, make_cone(v2(0, 0), axis_plane(2, {1}), 0.5, 0.0, 2.0)) == 0.0);

  // monotone in alpha and R, antitone in r, against a brute-force oracle
  const auto cloud = random_cloud(400, 2, 5);
  const Plane v = sample_grassmannian(2, 1, 1, 1)[0];
  const Vec x = cloud.point_vec(3);
  double prev = 0.0;
  for (double a : {0.1, 0.3, 0.6, 0.9}) {
    const Cone k = make_cone(x, v, a, 0.05, 0.5);
    double brute = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i)
      if (cone_contains(k, cloud.point_vec(i))) brute += cloud.weight(i);
    CHECK(cone_mass(cloud, k) == doctest::Approx(brute).epsilon(1e-14));
    CHECK(cone_mass(cloud, k) >= prev);
    prev = cone_mass(cloud, k);
  }
  CHECK(cone_mass(cloud, make_cone(x, v, 0.5, 0.1, 0.5)) <= cone_mass(cloud, make_cone(x, v, 0.5, 0.05, 0.5)));
  CHECK(cone_mass(cloud, make_cone(x, v, 0.5, 0.05, 0.4)) <= cone_mass(cloud, make_cone(x, v, 0.5, 0.05, 0.5)));
}

TEST_CASE("theta and maximal function") {
  const auto line = segment(4000);
  // unit mass on [0, 1]: half of it within 1/4 of the midpoint
  CHECK(theta(line, v2(0.5, 0.0), 0.25) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(theta(line, v2(5.0, 5.0), 0.25) == 0.0);
  CHECK(theta(atom(1.0, v2(0, 0)), v2(0, 0), 0.5) == 2.0);

  // dilation: theta(sx, sr) = theta(x, r) / s^n
  const auto cloud = random_cloud(300, 2, 8);
  const auto scaled = cloud.transformed(Vec::Zero(2), 3.0);
  const Vec x = cloud.point_vec(10);
  CHECK(theta(scaled, 3.0 * x, 0.6) == doctest::Approx(theta(cloud, x, 0.2) / 3.0).epsilon(1e-14));
  CHECK(ball_mass(cloud, x, 100.0) == doctest::Approx(cloud.total_mass()).epsilon(1e-14));

  CHECK(maximal_function(atom(1.0, v2(0, 0)), v2(0, 0), 0.1, 1.0) == doctest::Approx(10.0));
  CHECK_THROWS_AS(maximal_function(line, v2(0, 0), 1.0, 1.0), Error);
  // the midpoint sits between two atoms at distance 1/(2N): the sup is
  // taken just above that distance, 2/N over 1/(2N)
  for (std::size_t n : {200u, 2000u}) {
    const auto l = segment(n);
    CHECK(maximal_function(l, v2(0.5, 0.0), 0.5 / static_cast<double>(n), 1.0) == doctest::Approx(4.0).epsilon(1e-9));
    // from r = 1/N on the value is 2k / (k - 1/2) at k = 2, below 3
    CHECK(maximal_function(l, v2(0.5, 0.0), 1.0 / static_cast<double>(n), 1.0) <= 8.0 / 3.0 + 1e-9);
  }

  // brute-force sup over a dense radius grid never exceeds the exact value
  const double exact = maximal_function(cloud, x, 0.01, 0.5);
  double brute = 0.0;
  for (int k = 0; k <= 20000; ++k) {
    const double r = 0.01 + (0.5 - 0.01) * k / 20000.0;
    brute = std::max(brute, theta(cloud, x, r));
  }
  CHECK(brute <= exact * (1 + 1e-12));
  CHECK(brute >= exact * 0.98);

  const auto d = density_profile(cloud, x, {0.4, 0.2, 0.1});
  CHECK(d.values.size() == 3);
  CHECK(d.values[1] == theta(cloud, x, 0.2));
}

TEST_CASE("growth_constant") {
  const auto g = growth_constant(segment(1000), 1.0, 1000, 1);
  // atom-centered: three atoms just beyond radius 1/N
  CHECK(g.c1 == doctest::Approx(3.0).epsilon(1e-9));
  CHECK_FALSE(g.degenerate);

  const auto single = growth_constant(atom(1.0, v2(0, 0)), 1.0, 10, 1);
  CHECK(single.degenerate);
  CHECK(single.c1 == doctest::Approx(1.0 / single.r_min));

  for (int gen = 4; gen <= 6; ++gen) {
    synth::GeneratorSpec s;
    s.kind = synth::Kind::four_corner_cantor;
    s.generation = gen;
    CHECK(growth_constant(synth::generate(s), 1.0, 4096, 3).c1 < 6.0);
  }
}

TEST_CASE("measure validation") {
  CHECK_THROWS_AS(DiscreteMeasure(Mat::Zero(2, 2), {1.0, 0.0}, 1), Error);
  CHECK_THROWS_AS(DiscreteMeasure(Mat::Zero(2, 2), {1.0, 1.0}, 2), Error);
  CHECK_THROWS_AS(DiscreteMeasure(Mat::Zero(2, 0), {}, 1), Error);
}

TEST_CASE("points CSV round trip is bit exact") {
  const auto cloud = random_cloud(500, 3, 77);
  std::istringstream in(io::format_points_csv(cloud));
  const auto back = io::parse_points_csv(in, 1, "mem");
  CHECK(back.points() == cloud.points());
  CHECK(back.weights() == cloud.weights());

  std::istringstream bad_w("x0,x1,w\n0,0,-1\n");
  CHECK_THROWS_AS(io::parse_points_csv(bad_w, 1, "mem"), Error);
  std::istringstream bad_row("x0,x1,w\n0,0\n");
  CHECK_THROWS_AS(io::parse_points_csv(bad_row, 1, "mem"), Error);
  std::istringstream bad_header("a,b,w\n0,0,1\n");
  CHECK_THROWS_AS(io::parse_points_csv(bad_header, 1, "mem"), Error);

  CHECK(io::content_hash("abc") == io::content_hash("abc"));
  CHECK(io::content_hash("abc") != io::content_hash("abd"));
  CHECK(io::content_hash("").size() == 16);
}
