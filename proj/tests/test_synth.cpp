#include "conical/error.hpp"
#include "conical/synth.hpp"

#include <doctest.h>

using namespace conical;
using namespace conical::synth;

namespace {

GeneratorSpec of(Kind k) {
  GeneratorSpec s;
  s.kind = k;
  return s;
}

}  // namespace

TEST_CASE("atom counts and total mass") {
  for (int g = 0; g <= 5; ++g) {
    auto s = of(Kind::four_corner_cantor);
    s.generation = g;
    const auto m = generate(s);
    CHECK(m.size() == static_cast<std::size_t>(1) << (2 * g));
    CHECK(m.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
  }
  auto seg = of(Kind::segment);
  seg.count = 100;
  seg.ambient = 3;
  seg.mass = 2.0;
  const auto line = generate(seg);
  CHECK(line.size() == 100);
  CHECK(line.ambient_dim() == 3);
  CHECK(line.total_mass() == doctest::Approx(2.0));
  CHECK(line.point_vec(0)(0) == doctest::Approx(0.005));
  CHECK(line.point_vec(0)(2) == 0.0);

  auto circ = of(Kind::circle);
  circ.count = 64;
  const auto c = generate(circ);
  for (std::size_t i = 0; i < c.size(); ++i) CHECK((c.point_vec(i) - Vec::Constant(2, 0.5)).norm() == doctest::Approx(0.5));
}

TEST_CASE("Cantor symmetry and self-similarity") {
  auto s = of(Kind::four_corner_cantor);
  s.generation = 3;
  const auto m = generate(s);
  // invariant under x -> 1 - x and the diagonal swap
  for (std::size_t i = 0; i < m.size(); ++i) {
    const Vec p = m.point_vec(i);
    bool mirror = false, swap = false;
    for (std::size_t j = 0; j < m.size(); ++j) {
      mirror |= (m.point_vec(j) - Vec((Vec(2) << 1 - p(0), p(1)).finished())).norm() < 1e-12;
      swap |= (m.point_vec(j) - Vec((Vec(2) << p(1), p(0)).finished())).norm() < 1e-12;
    }
    CHECK(mirror);
    CHECK(swap);
  }
  // generation 1: centers of the corner squares of side 1/4
  s.generation = 1;
  const auto g1 = generate(s);
  CHECK(g1.point_vec(0)(0) == doctest::Approx(0.125));
  CHECK(g1.point_vec(3)(0) == doctest::Approx(0.875));
  CHECK(g1.min_interpoint_distance() == doctest::Approx(0.75));

  auto var = of(Kind::variable_cantor);
  var.generation = 2;
  var.ratios = {0.25, 0.25};
  auto fc = of(Kind::four_corner_cantor);
  fc.generation = 2;
  CHECK(generate(var).points() == generate(fc).points());
  var.ratios = {0.25, 0.6};
  CHECK_THROWS_AS(generate(var), Error);
  var.ratios = {0.25};
  CHECK_THROWS_AS(generate(var), Error);
}

TEST_CASE("graphs") {
  auto s = of(Kind::lipschitz_graph);
  s.count = 500;
  s.lipschitz = 0.8;
  s.shape = Shape::sine;
  s.frequency = 3.0;
  const auto m = generate(s);
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < m.size(); ++i) {
    const Vec a = m.point_vec(i), b = m.point_vec(i + 1);
    worst = std::max(worst, std::abs(b(1) - a(1)) / (b(0) - a(0)));
    CHECK(a(1) == doctest::Approx(graph_value(s, a(0))));
  }
  CHECK(worst <= 0.8 + 1e-12);
  CHECK(worst > 0.79);

  s.shape = Shape::ramp;
  s.gap = 0.2;
  s.lipschitz = 2.0;
  const auto r = generate(s);
  CHECK(r.size() == 500);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double z = r.point_vec(i)(0);
    CHECK_FALSE((z > 0.4 && z < 0.6));
    CHECK(r.point_vec(i)(1) == doctest::Approx(z <= 0.4 ? 0.0 : 0.4));
  }
}

TEST_CASE("seeded jitter is deterministic") {
  auto s = of(Kind::segment);
  s.count = 50;
  s.jitter = 0.5;
  s.seed = 9;
  CHECK(generate(s).points() == generate(s).points());
  auto t = s;
  t.seed = 10;
  CHECK(generate(s).points() != generate(t).points());
  s.jitter = 1.0;
  CHECK_THROWS_AS(generate(s), Error);
}

TEST_CASE("mixtures and JSON specs") {
  GeneratorSpec g = of(Kind::lipschitz_graph);
  g.count = 100;
  GeneratorSpec c = of(Kind::four_corner_cantor);
  c.generation = 2;
  GeneratorSpec mix = of(Kind::mixture);
  mix.components = {Component{3.0, {g}}, Component{1.0, {c}}};
  const auto m = generate(mix);
  CHECK(m.size() == 116);
  CHECK(m.total_mass() == doctest::Approx(1.0));
  CHECK(m.weight(0) == doctest::Approx(0.75 / 100));
  CHECK(m.weight(100) == doctest::Approx(0.25 / 16));

  const auto back = spec_from_json(to_json(mix));
  CHECK(generate(back).points() == m.points());
  CHECK(to_json(back) == to_json(mix));

  const auto meta = metadata(mix, m);
  CHECK(meta.contains("spec"));
  CHECK(meta.contains("ground_truth"));

  CHECK_THROWS_AS(spec_from_json(nlohmann::json{{"kind", "torus"}}), Error);
  CHECK_THROWS_AS(parse_shape("cosine"), Error);
  for (Kind k : {Kind::segment, Kind::circle, Kind::lipschitz_graph, Kind::four_corner_cantor, Kind::variable_cantor,
                 Kind::mixture})
    CHECK(parse_kind(kind_name(k)) == k);
  GeneratorSpec empty = of(Kind::mixture);
  CHECK_THROWS_AS(generate(empty), Error);
}

TEST_CASE("variable Cantor profile") {
  const double p = 4.0, q = 3.0;
  const auto ratios = variable_cantor_profile(p, 30);
  REQUIRE(ratios.size() == 30);
  for (double s : ratios) {
    CHECK(s > 0.0);
    CHECK(s <= 0.5);
  }
  const auto th = cantor_densities(ratios);
  for (std::size_t k = 0; k < th.size(); ++k)
    CHECK(th[k] == doctest::Approx(std::pow(static_cast<double>(k + 1), -1.0 / q)).epsilon(1e-12));
  try {
    variable_cantor_profile(2.0);
    FAIL("expected InvalidExponent");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::invalid_exponent);
  }
  auto s = of(Kind::variable_cantor);
  s.generation = 4;
  s.ratios = variable_cantor_profile(3.0, 4);
  CHECK(generate(s).size() == 256);
}
