#pragma once

#include "conical/lipschitz_graph.hpp"
#include "conical/measure.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <vector>

namespace conical {

/// Affine plane through `point` with directions `plane`.
struct AffinePlane {
  Vec point;
  Plane plane;
};

struct BetaResult {
  Vec center;
  double radius = 0.0;
  double beta = 0.0;
  AffinePlane plane;
  bool degenerate_spectrum = false;  // minimizer not unique
};

/// beta_{mu,2}(x, r) with the total-least-squares minimizer: the plane
/// through the in-ball centroid spanned by the top-n eigenvectors of the
/// weighted second-moment matrix. Throws empty_ball.
BetaResult beta2(const DiscreteMeasure& m, const Vec& x, double r);

/// (r^{-n} int_{B(x,r)} (dist(y,L)/r)^2 dmu)^{1/2} for a given plane L.
double beta_objective(const DiscreteMeasure& m, const Vec& x, double r, const AffinePlane& l);

struct BetaProfile {
  std::vector<double> scales;
  std::vector<double> betas;
  double square_sum = 0.0;  // sum beta^2 dlog r
};

/// Scales strictly decreasing; the last step reuses the previous log ratio.
BetaProfile beta_square_function(const DiscreteMeasure& m, const Vec& x, const std::vector<double>& scales);

/// Hausdorff distance between L cap B(x,r) and W cap B(x,r) (closed ball).
/// Exact for lines, boundary-sampled for 2-planes.
double plane_ball_hausdorff(const AffinePlane& l, const AffinePlane& w, const Vec& x, double r);

struct TangentProfile {
  double reference_scale = 0.0;  // W_x = minimizing plane at this (finest) scale
  std::vector<double> scales;    // the remaining scales
  std::vector<double> values;    // dist_H / r
  double trend = 0.0;            // last / first
};

TangentProfile tangent_convergence(const DiscreteMeasure& m, const Vec& x, const std::vector<double>& scales);

struct ConicalDensityProfile {
  std::vector<double> scales;
  std::vector<double> values;  // mu(K(x, W^perp, alpha, r)) / r^n
  bool nonincreasing = true;
  double trend = 0.0;  // last / first, 0 when first is 0
  // with a user epsilon(n): alpha^n eps(n) max_r Theta(x, r)
  std::optional<double> threshold;
  std::vector<bool> below_threshold;
};

ConicalDensityProfile conical_density_profile(const DiscreteMeasure& m, const Vec& x, const Plane& w,
                                              double alpha, const std::vector<double>& scales,
                                              std::optional<double> eps_n = std::nullopt);

struct ConeTubeResult {
  bool hypothesis = false;  // dist_H(L cap B, W cap B) <= eps r
  double hausdorff = 0.0;
  double eta = 0.0;
  bool passed = false;  // every sample outside the eta r tube of L
  std::size_t samples = 0;
  std::optional<Vec> witness;
};

/// Monte-Carlo test of K(x, W^perp, alpha, r, 2r) subset B(x,2r) \ B_{eta r}(L),
/// eta = 1 - alpha - 3 eps; W passes through x. Throws invalid_eta.
ConeTubeResult cone_outside_tube_check(const Vec& x, double r, const Plane& w, const AffinePlane& l,
                                       double alpha, double eps, std::size_t samples, std::uint64_t seed);

/// Dyadic shells j (2^-j <= |y - x| < 2^{1-j}) whose cone K(x, V, theta) meets
/// the other points.
std::set<int> theta_shells(const Mat& points, std::size_t i, const Plane& v, double theta);

struct ThetaMResult {
  std::size_t max_count = 0;
  std::vector<std::size_t> counts;  // filled when per_point
};

ThetaMResult theta_M_property(const Mat& points, const Plane& v, double theta, bool per_point);

/// Atoms with mu(B(x, r)) <= eps r^n for some 0 < r <= 1, decided exactly
/// over the breakpoint radii.
std::vector<std::size_t> f_epsilon_set(const DiscreteMeasure& m, double eps);
/// Same test restricted to the given radii in (0, 1].
std::vector<std::size_t> f_epsilon_set(const DiscreteMeasure& m, double eps, const std::vector<double>& radii);

struct CoverReport {
  double lipschitz = 0.0;
  double theta = 0.0;
  double alpha = 0.0;
  std::vector<std::size_t> off_graph;  // atoms not on the graph
  std::vector<std::size_t> selected;   // centers of the disjoint family
  std::vector<double> radii;           // r_j = 0.01 dist(x_j, graph)
  double sum_rn = 0.0;
  double sum_mass = 0.0;
  double ratio = 0.0;  // sum_rn / sum_mass
  bool disjoint = true;
  bool covered = true;   // every off-graph atom in some 5B_j
  bool kj_clear = true;  // no graph sample in K_j(r), r < r_j
  std::size_t kj_failures = 0;
  std::size_t graph_samples = 0;
  bool ok() const { return disjoint && covered && kj_clear; }
};

/// Greedy 5r-cover of the off-graph atoms by B(x, 0.01 dist(x, graph)).
/// With alpha_auto the aperture is min(theta/2, 0.1, 1/(4L)), theta = 1/sqrt(1+L^2).
CoverReport necessary_bplg_cover(const DiscreteMeasure& m, const LipschitzGraph& graph, bool alpha_auto,
                                 double alpha = 0.1, std::size_t graph_sample_count = 2000);

nlohmann::json to_json(const BetaResult& b);
nlohmann::json to_json(const CoverReport& c);

}  // namespace conical
