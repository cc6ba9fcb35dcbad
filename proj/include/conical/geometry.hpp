#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace conical {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Linear subspace V in G(d, m), held as an orthonormal basis (columns).
class Plane {
 public:
  /// Takes ownership of an orthonormal d x m basis. Orthonormality is checked
  /// to 1e-12; use make_plane for arbitrary spanning sets.
  explicit Plane(Mat basis);

  int ambient_dim() const { return static_cast<int>(basis_.rows()); }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const Mat& basis() const { return basis_; }

  Vec project(const Vec& y) const;
  Vec project_perp(const Vec& y) const;
  Mat projector() const { return basis_ * basis_.transpose(); }

  /// |delta - pi_V(delta)| for a raw d-vector. Hot path for cone tests.
  double residual_norm(const double* delta) const;
  /// |pi_V(delta)|.
  double component_norm(const double* delta) const;

  /// Orthonormal basis of the orthogonal complement, computed
  /// deterministically from this basis.
  Plane complement() const;

 private:
  Mat basis_;
  std::vector<double> rows_;  // m x d row-major copy for the raw paths
};

/// Gram-Schmidt of the given spanning vectors. Throws rank_deficient when a
/// vector is dependent on the previous ones within `tol`.
Plane make_plane(const std::vector<Vec>& vectors, double tol = 1e-10);

/// Coordinate plane spanned by the listed axes of R^d.
Plane axis_plane(int ambient_dim, const std::vector<int>& axes);

double dist_to_affine_plane(const Vec& y, const Plane& plane, const Vec& through);

/// K(x, V, alpha, r, R): points y with r <= |y - x| < R and
/// dist(y, V + x) < alpha |y - x|. Untruncated cones use r = 0, R = inf.
struct Cone {
  Vec vertex;
  Plane direction;
  double aperture;
  double inner_radius = 0.0;
  double outer_radius = kInf;
};

Cone make_cone(Vec vertex, Plane direction, double aperture, double inner_radius = 0.0,
               double outer_radius = kInf);

bool cone_contains(const Cone& cone, const Vec& y);

/// Raw cone test used by the measure queries. `dist` receives |y - x|.
inline bool in_cone(const double* x, const double* y, int d, const Plane& dir, double aperture,
                    double* delta_scratch, double* dist) {
  double n2 = 0.0;
  for (int k = 0; k < d; ++k) {
    delta_scratch[k] = y[k] - x[k];
    n2 += delta_scratch[k] * delta_scratch[k];
  }
  double len = std::sqrt(n2);
  *dist = len;
  if (len == 0.0) return false;
  return dir.residual_norm(delta_scratch) < aperture * len;
}

/// ||pi_V - pi_W||_op, in [0, 1].
double plane_metric(const Plane& v, const Plane& w);

/// Samples from gamma_{d,m} by orthonormalizing standard Gaussian frames.
std::vector<Plane> sample_grassmannian(int ambient_dim, int dim, int count, std::uint64_t seed);

/// (pi_V y, pi_V^perp y).
std::pair<Vec, Vec> project(const Vec& y, const Plane& plane);

/// "1,0,0;0,1,0" -> plane spanned by the listed vectors.
Plane parse_plane(std::string_view text);
std::string format_plane(const Plane& plane);

Vec parse_vector(std::string_view text);

}  // namespace conical
