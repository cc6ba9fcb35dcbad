#pragma once

#include "conical/measure.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace conical {

class Lattice;

struct EnergySpec {
  Plane direction;  // V, dimension d - n
  double aperture = 0.5;
  double p = 1.0;
  double outer = kInf;  // R
  double eta = 0.1;     // window for cube energies
};

/// Throws invalid_params / dimension_mismatch when the spec does not fit `m`.
void validate(const EnergySpec& spec, const DiscreteMeasure& m);

/// The integrand of the pointwise energy is a step function in r; this holds
/// its jumps and the integral of each constancy interval.
struct EnergyBreakdown {
  std::vector<double> radii;          // distinct in-cone distances, ascending
  std::vector<double> masses;         // cumulative in-cone mass through radii[i]
  std::vector<double> contributions;  // integral over [radii[i], min(radii[i+1], R))
  double total = 0.0;
  std::size_t in_cone = 0;
};

/// Integral over [lo, hi) of (mass(r) / r^n)^p dr / r, where mass(r) is the
/// total weight at distance < r. `dists` ascending, `cum[i]` = weight of
/// dists[0..i]. hi may be infinite.
double step_energy(const double* dists, const double* cum, std::size_t count, int n, double p,
                   double lo, double hi);

EnergyBreakdown pointwise_energy(const DiscreteMeasure& m, const Vec& x, const EnergySpec& spec);
/// Total only, for the vertex at atom i (avoids the breakdown allocation).
double pointwise_energy_at(const DiscreteMeasure& m, std::size_t i, const EnergySpec& spec);
/// Energy at every atom; computed in parallel.
std::vector<double> pointwise_energies(const DiscreteMeasure& m, const EnergySpec& spec);

/// n^{-1} sum over in-cone atoms of w / |x - y|^n.
double riesz_cone_sum(const DiscreteMeasure& m, const Vec& x, const Plane& v, double aperture);

/// Sum over atoms in B(center, radius) of w * E(x, V, alpha, radius).
double ball_energy(const DiscreteMeasure& m, const Vec& center, double radius, const EnergySpec& spec);

/// sum_i w_i E(x_i, V, alpha, spec.outer) over all atoms, pairwise-summed.
double total_energy(const DiscreteMeasure& m, const EnergySpec& spec);

/// Sorted in-cone distances and prefix masses from every atom, so that window
/// integrals over many cubes reduce to binary searches.
class ConeProfiles {
 public:
  ConeProfiles(const DiscreteMeasure& m, const Plane& v, double aperture);

  double window_energy(std::size_t atom, int n, double p, double lo, double hi) const;
  std::size_t pair_count() const { return dists_.size(); }

 private:
  std::vector<std::size_t> offsets_;
  std::vector<double> dists_;
  std::vector<double> cum_;
};

/// E(Q) for a cube of `lattice`; energies are taken in the lattice's
/// normalized coordinates.
double cube_energy(const Lattice& lattice, std::size_t q, const EnergySpec& spec,
                   const ConeProfiles* profiles = nullptr);

struct Ball {
  Vec center;
  double radius = 0.0;
};

struct BpbeBallReport {
  Ball ball;
  std::size_t best_direction = 0;  // index into candidate list
  double fraction = 0.0;
  double mean_energy = 0.0;
  bool passed = false;
};

struct BpbeReport {
  std::vector<Plane> candidates;  // pinned first, then sampled
  std::vector<BpbeBallReport> balls;
  bool all_passed = true;
};

BpbeReport bpbe_scan(const DiscreteMeasure& m, const std::vector<Ball>& balls, double aperture,
                     double p, double m0, double kappa, int direction_samples, std::uint64_t seed,
                     const std::vector<Plane>& pinned = {});

struct BmeBallReport {
  Ball ball;
  double ratio = 0.0;
  bool passed = false;
};

/// `directions[i]` is the fixed direction V_x of atom i.
std::vector<BmeBallReport> bme_check(const DiscreteMeasure& m, const std::vector<Ball>& balls,
                                     double aperture, double p, double m0,
                                     const std::vector<Plane>& directions);

struct ProjectionEnergyReport {
  double lhs = 0.0;  // E_{mu,1}(R^d, V0^perp, alpha)
  double rhs = 0.0;  // gamma-integral of binned ||pi_V mu||^2 over B(V0, lambda alpha)
  double ratio = 0.0;
  std::size_t accepted = 0;
  std::size_t attempts = 0;
};

/// Histogram-smoothed comparison; exploratory only.
ProjectionEnergyReport projection_energy_check(const DiscreteMeasure& m, const Plane& v0,
                                               double aperture, double lambda,
                                               int direction_samples, double bin_width,
                                               std::uint64_t seed);

nlohmann::json to_json(const EnergyBreakdown& b);
nlohmann::json to_json(const BpbeReport& r);

}  // namespace conical
