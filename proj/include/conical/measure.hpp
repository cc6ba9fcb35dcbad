#pragma once

#include "conical/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace conical {

/// Uniform grid over a point set. Cells are sorted lexicographically so a
/// lookup is a binary search; queries that would touch more cells than are
/// occupied fall back to scanning the occupied list.
class GridIndex {
 public:
  GridIndex() = default;
  GridIndex(const Mat& points, double cell_size);

  double cell_size() const { return cell_; }

  /// Indices i with |p_i - x| < r, sorted ascending.
  std::vector<std::size_t> ball(const Mat& points, const double* x, double r) const;

 private:
  using Key = std::vector<std::int64_t>;
  Key key_of(const double* p) const;
  long find_cell(const Key& key) const;

  int dim_ = 0;
  double cell_ = 1.0;
  Vec origin_;
  std::vector<Key> keys_;                // sorted occupied cells
  std::vector<std::size_t> offsets_;     // keys_.size() + 1
  std::vector<std::size_t> members_;     // point indices grouped by cell
};

/// Finite weighted point cloud standing in for a Radon measure mu, with the
/// dimension parameter n used in every density.
class DiscreteMeasure {
 public:
  /// `points` is d x N (one column per atom).
  DiscreteMeasure(Mat points, std::vector<double> weights, int dim_param);

  std::size_t size() const { return weights_.size(); }
  int ambient_dim() const { return static_cast<int>(points_.rows()); }
  int dim_param() const { return n_; }
  double total_mass() const { return total_; }

  const Mat& points() const { return points_; }
  const double* point(std::size_t i) const { return points_.col(static_cast<Eigen::Index>(i)).data(); }
  Vec point_vec(std::size_t i) const { return points_.col(static_cast<Eigen::Index>(i)); }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }

  /// Indices of atoms in the open ball B(x, r), ascending.
  std::vector<std::size_t> ball_indices(const Vec& x, double r) const;
  std::vector<std::size_t> ball_indices(const double* x, double r) const;

  /// Same measure with coordinates mapped to (p - shift) * scale.
  DiscreteMeasure transformed(const Vec& shift, double scale) const;
  DiscreteMeasure with_dim_param(int n) const;
  DiscreteMeasure with_weights(std::vector<double> weights) const;

  double min_interpoint_distance() const;
  double diameter() const;

  const GridIndex& index() const { return index_; }

 private:
  Mat points_;
  std::vector<double> weights_;
  int n_;
  double total_;
  GridIndex index_;
};

struct DensityProfile {
  Vec center;
  std::vector<double> scales;  // strictly decreasing
  std::vector<double> values;
};

double ball_mass(const DiscreteMeasure& m, const Vec& x, double r);
double ball_mass(const DiscreteMeasure& m, const double* x, double r);
double cone_mass(const DiscreteMeasure& m, const Cone& cone);
/// mu(B(x,r)) / r^n.
double theta(const DiscreteMeasure& m, const Vec& x, double r);

DensityProfile density_profile(const DiscreteMeasure& m, const Vec& x,
                               const std::vector<double>& scales);

/// sup over r in [r_min, r_max] of mu(B(x,r)) / r^n, evaluated exactly over
/// the finitely many candidate radii.
double maximal_function(const DiscreteMeasure& m, const Vec& x, double r_min, double r_max);

struct GrowthEstimate {
  double c1 = 0.0;
  double r_min = 0.0;
  std::size_t argmax = 0;
  std::size_t sampled = 0;
  bool degenerate = false;  // single atom: r_min is a convention, not data
};

/// Estimate of C1 in mu(B(x,r)) <= C1 r^n over sampled support points and
/// r in [r_min(m), r0], r_min(m) = half the smallest interpoint distance.
/// All atoms are used when sample_count >= N; otherwise a seeded subset.
GrowthEstimate growth_constant(const DiscreteMeasure& m, double r0, std::size_t sample_count,
                               std::uint64_t seed);

}  // namespace conical
