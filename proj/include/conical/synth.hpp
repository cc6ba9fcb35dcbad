#pragma once

#include "conical/measure.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace conical::synth {

enum class Kind { segment, circle, lipschitz_graph, four_corner_cantor, variable_cantor, mixture };

// Graph profiles over [0, 1]:
//   zero  F = 0
//   sine  F(z) = L / (2 pi f) sin(2 pi f z)
//   ramp  flat, slope L on the gap (0.5 - g/2, 0.5 + g/2), flat again; no samples in the gap
enum class Shape { zero, sine, ramp };

struct GeneratorSpec;

struct Component {
  double weight = 1.0;
  std::vector<GeneratorSpec> spec;  // exactly one; vector to allow the recursive type
};

struct GeneratorSpec {
  Kind kind = Kind::segment;
  std::size_t count = 256;  // samples for segment / circle / graph
  int ambient = 2;          // segment only; the other kinds live in the plane
  double lipschitz = 0.0;
  Shape shape = Shape::zero;
  double frequency = 1.0;
  double gap = 0.1;
  double jitter = 0.0;  // fraction of the sample spacing, seeded
  int generation = 1;
  std::vector<double> ratios;  // variable_cantor side ratios, one per generation
  std::vector<Component> components;
  double mass = 1.0;
  std::uint64_t seed = 0;
};

/// Throws invalid_spec when a parameter does not fit its kind.
void validate(const GeneratorSpec& spec);

DiscreteMeasure generate(const GeneratorSpec& spec);

/// Graph function of a lipschitz_graph spec.
double graph_value(const GeneratorSpec& spec, double z);

/// The spec plus ground truth (atoms, n, graph constant, generation, similarity dimension).
nlohmann::json metadata(const GeneratorSpec& spec, const DiscreteMeasure& m);

nlohmann::json to_json(const GeneratorSpec& spec);
GeneratorSpec spec_from_json(const nlohmann::json& j);

Kind parse_kind(const std::string& s);
std::string kind_name(Kind k);
Shape parse_shape(const std::string& s);
std::string shape_name(Shape s);

/// Side ratios sigma_1..sigma_K for a four-corner construction whose per-scale
/// density is theta_k = k^{-1/q}, q = (2 + p) / 2. Throws invalid_exponent for p <= 2.
std::vector<double> variable_cantor_profile(double p, int generations = 20);

/// theta_k = 4^{-k} / (sigma_1 ... sigma_k).
std::vector<double> cantor_densities(const std::vector<double>& ratios);

}  // namespace conical::synth
