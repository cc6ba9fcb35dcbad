#pragma once

#include "conical/geometry.hpp"

#include <json.hpp>

#include <cstddef>
#include <utility>
#include <vector>

namespace conical {

/// Graph of F : B -> V over an n-plane B, held through anchor samples and
/// extended by the componentwise McShane rule
///   F_c(z) = min_j (F_c(z_j) + L |z - z_j|).
/// Coordinates: z in the basis of B, values in the basis of V.
class LipschitzGraph {
 public:
  LipschitzGraph(Plane base, Plane values, Mat anchor_z, Mat anchor_values, double lipschitz);

  int ambient_dim() const { return base_.ambient_dim(); }
  int dim() const { return base_.dim(); }
  const Plane& base_plane() const { return base_; }
  const Plane& value_plane() const { return values_; }
  const Mat& anchor_z() const { return z_; }
  const Mat& anchor_values() const { return v_; }
  std::size_t anchor_count() const { return static_cast<std::size_t>(z_.cols()); }
  /// Constant of the extension (per component).
  double lipschitz() const { return lip_; }
  /// max |F(z_i) - F(z_j)| / |z_i - z_j| over anchor pairs.
  double anchor_lipschitz() const;

  Vec eval(const Vec& z) const;
  Vec point(const Vec& z) const;
  Vec anchor_point(std::size_t j) const;

  /// dist(x, graph). Exact for n = 1, where the extension is a polyline;
  /// for n >= 2 an upper bound from the vertical projection and the anchors.
  double distance(const Vec& x) const;
  bool exact_distance() const { return dim() == 1; }

  /// Points of the graph over the anchor range widened by `margin`: uniform
  /// in z for n = 1, a square grid with `count` points per axis for n = 2.
  Mat sample(std::size_t count, double margin) const;

 private:
  void build_polyline();

  Plane base_;
  Plane values_;
  Mat z_;
  Mat v_;
  double lip_;
  // n == 1: polyline vertices sorted by z, plus the two end rays
  std::vector<double> knots_;
  Mat vertices_;
  Vec left_dir_, right_dir_;
};

/// Anchor pairs (i, j), i < j, with one inside the other's half-aperture
/// cone K(., V, alpha / 2).
std::vector<std::pair<std::size_t, std::size_t>> half_cone_violations(const Mat& anchors,
                                                                      const Plane& v, double alpha);

/// Graph over V^perp through the given anchors (d x k, one column each) with
/// extension constant 2 / alpha. Throws cone_violation naming the first bad
/// pair; exact duplicate anchors are merged.
LipschitzGraph fit_lipschitz_graph(const Mat& anchors, const Plane& v, double alpha);

nlohmann::json to_json(const LipschitzGraph& g);
LipschitzGraph graph_from_json(const nlohmann::json& j);

}  // namespace conical
