#include "conical/synth.hpp"

#include "conical/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace conical::synth {
namespace {

constexpr int kMaxGeneration = 10;

void check(bool cond, const std::string& what) { require(cond, Errc::invalid_spec, what); }

// Lower-left corners of the four-corner construction; every square at
// generation k has side prod(ratios[0..k)).
Mat cantor_centers(const std::vector<double>& ratios, int generation) {
  std::vector<double> xs{0.0}, ys{0.0};
  double side = 1.0;
  for (int k = 0; k < generation; ++k) {
    const double child = side * ratios[static_cast<std::size_t>(k)];
    const double off = side - child;
    std::vector<double> nx, ny;
    nx.reserve(xs.size() * 4);
    ny.reserve(xs.size() * 4);
    for (std::size_t i = 0; i < xs.size(); ++i)
      for (int c = 0; c < 4; ++c) {
        nx.push_back(xs[i] + (c & 1 ? off : 0.0));
        ny.push_back(ys[i] + (c & 2 ? off : 0.0));
      }
    xs.swap(nx);
    ys.swap(ny);
    side = child;
  }
  Mat pts(2, static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    pts(0, static_cast<Eigen::Index>(i)) = xs[i] + side / 2.0;
    pts(1, static_cast<Eigen::Index>(i)) = ys[i] + side / 2.0;
  }
  return pts;
}

// Parameter values (i + 0.5) / N with optional seeded jitter.
std::vector<double> grid(std::size_t count, double jitter, std::uint64_t seed) {
  std::vector<double> t(count);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (std::size_t i = 0; i < count; ++i) {
    t[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(count);
    if (jitter > 0.0) t[i] += jitter * u(rng) / static_cast<double>(count);
  }
  return t;
}

DiscreteMeasure uniform(Mat pts, double mass, int n) {
  const auto count = static_cast<std::size_t>(pts.cols());
  return DiscreteMeasure(std::move(pts), std::vector<double>(count, mass / static_cast<double>(count)), n);
}

}  // namespace

Kind parse_kind(const std::string& s) {
  if (s == "segment") return Kind::segment;
  if (s == "circle") return Kind::circle;
  if (s == "lipschitz_graph") return Kind::lipschitz_graph;
  if (s == "four_corner_cantor") return Kind::four_corner_cantor;
  if (s == "variable_cantor") return Kind::variable_cantor;
  if (s == "mixture") return Kind::mixture;
  throw Error(Errc::invalid_spec, "unknown generator kind '" + s + "'");
}

std::string kind_name(Kind k) {
  switch (k) {
    case Kind::segment: return "segment";
    case Kind::circle: return "circle";
    case Kind::lipschitz_graph: return "lipschitz_graph";
    case Kind::four_corner_cantor: return "four_corner_cantor";
    case Kind::variable_cantor: return "variable_cantor";
    case Kind::mixture: return "mixture";
  }
  return "?";
}

Shape parse_shape(const std::string& s) {
  if (s == "zero") return Shape::zero;
  if (s == "sine") return Shape::sine;
  if (s == "ramp") return Shape::ramp;
  throw Error(Errc::invalid_spec, "unknown graph shape '" + s + "'");
}

std::string shape_name(Shape s) {
  switch (s) {
    case Shape::zero: return "zero";
    case Shape::sine: return "sine";
    case Shape::ramp: return "ramp";
  }
  return "?";
}

void validate(const GeneratorSpec& spec) {
  check(spec.mass > 0.0 && std::isfinite(spec.mass), "mass must be positive");
  check(spec.jitter >= 0.0 && spec.jitter < 1.0, "jitter must lie in [0, 1)");
  switch (spec.kind) {
    case Kind::segment:
      check(spec.count >= 1, "count must be positive");
      check(spec.ambient >= 1, "ambient dimension must be positive");
      break;
    case Kind::circle:
      check(spec.count >= 3, "a circle needs at least 3 samples");
      break;
    case Kind::lipschitz_graph:
      check(spec.count >= 1, "count must be positive");
      check(spec.lipschitz >= 0.0 && std::isfinite(spec.lipschitz), "L must be finite and >= 0");
      check(spec.frequency > 0.0, "frequency must be positive");
      if (spec.shape == Shape::ramp) check(spec.gap > 0.0 && spec.gap < 1.0, "gap must lie in (0, 1)");
      break;
    case Kind::four_corner_cantor:
      check(spec.generation >= 0 && spec.generation <= kMaxGeneration, "generation must lie in [0, 10]");
      break;
    case Kind::variable_cantor:
      check(spec.generation >= 0 && spec.generation <= kMaxGeneration, "generation must lie in [0, 10]");
      check(spec.ratios.size() >= static_cast<std::size_t>(spec.generation), "need one ratio per generation");
      for (int k = 0; k < spec.generation; ++k) {
        const double s = spec.ratios[static_cast<std::size_t>(k)];
        check(s > 0.0 && s <= 0.5, "ratios must lie in (0, 1/2]");
      }
      break;
    case Kind::mixture:
      check(!spec.components.empty(), "a mixture needs components");
      for (const auto& c : spec.components) {
        check(c.spec.size() == 1, "malformed mixture component");
        check(c.weight > 0.0 && std::isfinite(c.weight), "component weights must be positive");
        check(c.spec[0].kind != Kind::segment || c.spec[0].ambient == 2, "mixtures live in the plane");
        validate(c.spec[0]);
      }
      break;
  }
}

double graph_value(const GeneratorSpec& spec, double z) {
  const double l = spec.lipschitz;
  switch (spec.shape) {
    case Shape::zero: return 0.0;
    case Shape::sine: {
      const double w = 2.0 * M_PI * spec.frequency;
      return l / w * std::sin(w * z);
    }
    case Shape::ramp: {
      const double a = 0.5 - spec.gap / 2.0;
      return l * std::clamp(z - a, 0.0, spec.gap);
    }
  }
  return 0.0;
}

DiscreteMeasure generate(const GeneratorSpec& spec) {
  validate(spec);
  switch (spec.kind) {
    case Kind::segment: {
      const auto t = grid(spec.count, spec.jitter, spec.seed);
      Mat pts = Mat::Zero(spec.ambient, static_cast<Eigen::Index>(spec.count));
      for (std::size_t i = 0; i < spec.count; ++i) pts(0, static_cast<Eigen::Index>(i)) = t[i];
      return uniform(std::move(pts), spec.mass, 1);
    }
    case Kind::circle: {
      const auto t = grid(spec.count, spec.jitter, spec.seed);
      Mat pts(2, static_cast<Eigen::Index>(spec.count));
      for (std::size_t i = 0; i < spec.count; ++i) {
        const double a = 2.0 * M_PI * t[i];
        pts(0, static_cast<Eigen::Index>(i)) = 0.5 + 0.5 * std::cos(a);
        pts(1, static_cast<Eigen::Index>(i)) = 0.5 + 0.5 * std::sin(a);
      }
      return uniform(std::move(pts), spec.mass, 1);
    }
    case Kind::lipschitz_graph: {
      auto t = grid(spec.count, spec.jitter, spec.seed);
      if (spec.shape == Shape::ramp) {
        // spread the samples over [0, 1] minus the gap
        const double a = 0.5 - spec.gap / 2.0;
        for (double& s : t) {
          s *= 1.0 - spec.gap;
          if (s >= a) s += spec.gap;
        }
      }
      Mat pts(2, static_cast<Eigen::Index>(spec.count));
      for (std::size_t i = 0; i < spec.count; ++i) {
        pts(0, static_cast<Eigen::Index>(i)) = t[i];
        pts(1, static_cast<Eigen::Index>(i)) = graph_value(spec, t[i]);
      }
      return uniform(std::move(pts), spec.mass, 1);
    }
    case Kind::four_corner_cantor:
      return uniform(cantor_centers(std::vector<double>(static_cast<std::size_t>(spec.generation), 0.25),
                                    spec.generation),
                     spec.mass, 1);
    case Kind::variable_cantor:
      return uniform(cantor_centers(spec.ratios, spec.generation), spec.mass, 1);
    case Kind::mixture: {
      double total = 0.0;
      for (const auto& c : spec.components) total += c.weight;
      std::vector<DiscreteMeasure> parts;
      std::size_t atoms = 0;
      for (const auto& c : spec.components) {
        GeneratorSpec sub = c.spec[0];
        sub.mass = spec.mass * c.weight / total;
        parts.push_back(generate(sub));
        atoms += parts.back().size();
      }
      Mat pts(2, static_cast<Eigen::Index>(atoms));
      std::vector<double> w;
      w.reserve(atoms);
      Eigen::Index col = 0;
      for (const auto& p : parts) {
        pts.middleCols(col, static_cast<Eigen::Index>(p.size())) = p.points();
        col += static_cast<Eigen::Index>(p.size());
        w.insert(w.end(), p.weights().begin(), p.weights().end());
      }
      return DiscreteMeasure(std::move(pts), std::move(w), 1);
    }
  }
  throw Error(Errc::invalid_spec, "unhandled kind");
}

std::vector<double> cantor_densities(const std::vector<double>& ratios) {
  std::vector<double> out;
  double side = 1.0, mass = 1.0;
  for (double s : ratios) {
    side *= s;
    mass /= 4.0;
    out.push_back(mass / side);
  }
  return out;
}

std::vector<double> variable_cantor_profile(double p, int generations) {
  if (!(p > 2.0) || !std::isfinite(p))
    throw Error(Errc::invalid_exponent, "the construction needs p > 2");
  require(generations >= 1, Errc::invalid_spec, "generations must be positive");
  const double q = (2.0 + p) / 2.0;
  std::vector<double> ratios;
  double prev = 1.0;  // theta_0
  for (int k = 1; k <= generations; ++k) {
    const double th = std::pow(static_cast<double>(k), -1.0 / q);
    ratios.push_back(prev / (4.0 * th));
    prev = th;
  }
  return ratios;
}

nlohmann::json to_json(const GeneratorSpec& spec) {
  nlohmann::json j{{"kind", kind_name(spec.kind)}, {"mass", spec.mass}, {"seed", spec.seed}};
  switch (spec.kind) {
    case Kind::segment:
      j["count"] = spec.count;
      j["ambient"] = spec.ambient;
      j["jitter"] = spec.jitter;
      break;
    case Kind::circle:
      j["count"] = spec.count;
      j["jitter"] = spec.jitter;
      break;
    case Kind::lipschitz_graph:
      j["count"] = spec.count;
      j["L"] = spec.lipschitz;
      j["shape"] = shape_name(spec.shape);
      j["frequency"] = spec.frequency;
      j["gap"] = spec.gap;
      j["jitter"] = spec.jitter;
      break;
    case Kind::four_corner_cantor:
      j["generation"] = spec.generation;
      break;
    case Kind::variable_cantor:
      j["generation"] = spec.generation;
      j["ratios"] = spec.ratios;
      break;
    case Kind::mixture: {
      auto arr = nlohmann::json::array();
      for (const auto& c : spec.components) arr.push_back({{"weight", c.weight}, {"spec", to_json(c.spec[0])}});
      j["components"] = arr;
      break;
    }
  }
  return j;
}

GeneratorSpec spec_from_json(const nlohmann::json& j) {
  check(j.is_object(), "generator spec must be a JSON object");
  GeneratorSpec s;
  try {
    s.kind = parse_kind(j.at("kind").get<std::string>());
    s.count = j.value("count", s.count);
    s.ambient = j.value("ambient", s.ambient);
    s.lipschitz = j.value("L", s.lipschitz);
    if (j.contains("shape")) s.shape = parse_shape(j.at("shape").get<std::string>());
    s.frequency = j.value("frequency", s.frequency);
    s.gap = j.value("gap", s.gap);
    s.jitter = j.value("jitter", s.jitter);
    s.generation = j.value("generation", s.generation);
    s.mass = j.value("mass", s.mass);
    s.seed = j.value("seed", s.seed);
    if (j.contains("ratios")) s.ratios = j.at("ratios").get<std::vector<double>>();
    if (j.contains("p") && s.kind == Kind::variable_cantor && s.ratios.empty())
      s.ratios = variable_cantor_profile(j.at("p").get<double>(), std::max(s.generation, 1));
    if (j.contains("components"))
      for (const auto& c : j.at("components"))
        s.components.push_back(Component{c.value("weight", 1.0), {spec_from_json(c.at("spec"))}});
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_spec, e.what());
  }
  validate(s);
  return s;
}

nlohmann::json metadata(const GeneratorSpec& spec, const DiscreteMeasure& m) {
  nlohmann::json truth{{"atoms", m.size()},
                       {"ambient_dim", m.ambient_dim()},
                       {"n", m.dim_param()},
                       {"total_mass", m.total_mass()}};
  switch (spec.kind) {
    case Kind::segment:
    case Kind::circle:
      truth["dimension"] = 1.0;
      break;
    case Kind::lipschitz_graph:
      truth["dimension"] = 1.0;
      truth["graph"] = {{"base", "x0"}, {"shape", shape_name(spec.shape)}, {"L", spec.lipschitz}};
      break;
    case Kind::four_corner_cantor:
      truth["generation"] = spec.generation;
      truth["dimension"] = 1.0;  // log 4 / log 4
      truth["placement"] = "cell centers, uniform weights";
      break;
    case Kind::variable_cantor:
      truth["generation"] = spec.generation;
      truth["densities"] = cantor_densities(
          std::vector<double>(spec.ratios.begin(), spec.ratios.begin() + spec.generation));
      truth["placement"] = "cell centers, uniform weights";
      break;
    case Kind::mixture:
      truth["components"] = spec.components.size();
      break;
  }
  return {{"spec", to_json(spec)}, {"ground_truth", truth}};
}

}  // namespace conical::synth
