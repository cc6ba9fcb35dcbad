#include "conical/geometry.hpp"

#include "conical/error.hpp"

#include <charconv>
#include <random>
#include <sstream>

namespace conical {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::rank_deficient: return "RankDeficient";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::invalid_range: return "InvalidRange";
    case Errc::invalid_params: return "InvalidParams";
    case Errc::cube_not_found: return "CubeNotFound";
    case Errc::not_nested: return "NotNested";
    case Errc::intermediate_doubling: return "IntermediateDoubling";
    case Errc::empty_cube: return "EmptyCube";
    case Errc::not_doubling_root: return "NotDoublingRoot";
    case Errc::cone_violation: return "ConeViolation";
    case Errc::empty_ball: return "EmptyBall";
    case Errc::too_large: return "TooLarge";
    case Errc::unsupported_dimension: return "UnsupportedDimension";
    case Errc::invalid_eta: return "InvalidEta";
    case Errc::graph_ambient_mismatch: return "GraphAmbientMismatch";
    case Errc::invalid_spec: return "InvalidSpec";
    case Errc::invalid_exponent: return "InvalidExponent";
    case Errc::missing_direction: return "MissingDirection";
    case Errc::schema_mismatch: return "SchemaMismatch";
    case Errc::io: return "IoError";
    case Errc::numerical: return "NumericalFailure";
  }
  return "Error";
}

Plane::Plane(Mat basis) : basis_(std::move(basis)) {
  const auto d = basis_.rows();
  const auto m = basis_.cols();
  require(m > 0 && m < d, Errc::invalid_params, "plane dimension must satisfy 0 < m < d");
  Mat gram = basis_.transpose() * basis_;
  require((gram - Mat::Identity(m, m)).cwiseAbs().maxCoeff() <= 1e-12, Errc::invalid_params,
          "plane basis is not orthonormal");
  rows_.resize(static_cast<std::size_t>(m * d));
  for (Eigen::Index k = 0; k < m; ++k)
    for (Eigen::Index j = 0; j < d; ++j) rows_[static_cast<std::size_t>(k * d + j)] = basis_(j, k);
}

Vec Plane::project(const Vec& y) const {
  require(y.size() == basis_.rows(), Errc::dimension_mismatch, "point/plane dimension");
  return basis_ * (basis_.transpose() * y);
}

Vec Plane::project_perp(const Vec& y) const { return y - project(y); }

double Plane::residual_norm(const double* delta) const {
  const int d = ambient_dim();
  const int m = dim();
  if (d == 2) {
    // m == 1
    const double c = rows_[0] * delta[0] + rows_[1] * delta[1];
    const double r0 = delta[0] - c * rows_[0];
    const double r1 = delta[1] - c * rows_[1];
    return std::sqrt(r0 * r0 + r1 * r1);
  }
  double coeff[16];
  std::vector<double> heap;
  double* c = coeff;
  if (m > 16) {
    heap.resize(static_cast<std::size_t>(m));
    c = heap.data();
  }
  for (int k = 0; k < m; ++k) {
    const double* b = &rows_[static_cast<std::size_t>(k * d)];
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += b[j] * delta[j];
    c[k] = s;
  }
  double n2 = 0.0;
  for (int j = 0; j < d; ++j) {
    double r = delta[j];
    for (int k = 0; k < m; ++k) r -= c[k] * rows_[static_cast<std::size_t>(k * d + j)];
    n2 += r * r;
  }
  return std::sqrt(n2);
}

double Plane::component_norm(const double* delta) const {
  const int d = ambient_dim();
  double n2 = 0.0;
  for (int k = 0; k < dim(); ++k) {
    const double* b = &rows_[static_cast<std::size_t>(k * d)];
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += b[j] * delta[j];
    n2 += s * s;
  }
  return std::sqrt(n2);
}

Plane Plane::complement() const {
  const auto d = basis_.rows();
  const auto m = basis_.cols();
  // Gram-Schmidt the standard basis against this plane, in axis order.
  std::vector<Vec> kept;
  Mat current = basis_;
  for (Eigen::Index axis = 0; axis < d && static_cast<Eigen::Index>(kept.size()) < d - m; ++axis) {
    Vec e = Vec::Zero(d);
    e(axis) = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      e -= current * (current.transpose() * e);
    }
    double nrm = e.norm();
    if (nrm < 1e-6) continue;
    e /= nrm;
    kept.push_back(e);
    current.conservativeResize(Eigen::NoChange, current.cols() + 1);
    current.col(current.cols() - 1) = e;
  }
  Mat out(d, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = kept[k];
  return Plane(std::move(out));
}

Plane make_plane(const std::vector<Vec>& vectors, double tol) {
  require(!vectors.empty(), Errc::invalid_params, "no vectors given");
  const auto d = vectors.front().size();
  for (const auto& v : vectors)
    require(v.size() == d, Errc::dimension_mismatch, "vectors of different lengths");
  require(static_cast<Eigen::Index>(vectors.size()) < d, Errc::invalid_params,
          "need fewer than d vectors for a proper subspace");
  Mat basis(d, static_cast<Eigen::Index>(vectors.size()));
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    Vec v = vectors[k];
    const double scale = std::max(1.0, v.norm());
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t j = 0; j < k; ++j) {
        auto bj = basis.col(static_cast<Eigen::Index>(j));
        v -= bj.dot(v) * bj;
      }
    }
    const double nrm = v.norm();
    if (nrm <= tol * scale)
      throw Error(Errc::rank_deficient, "vector " + std::to_string(k) + " is linearly dependent");
    basis.col(static_cast<Eigen::Index>(k)) = v / nrm;
  }
  return Plane(std::move(basis));
}

Plane axis_plane(int ambient_dim, const std::vector<int>& axes) {
  std::vector<Vec> vs;
  for (int a : axes) {
    require(a >= 0 && a < ambient_dim, Errc::invalid_params, "axis out of range");
    Vec e = Vec::Zero(ambient_dim);
    e(a) = 1.0;
    vs.push_back(e);
  }
  return make_plane(vs);
}

double dist_to_affine_plane(const Vec& y, const Plane& plane, const Vec& through) {
  require(y.size() == plane.ambient_dim() && through.size() == plane.ambient_dim(),
          Errc::dimension_mismatch, "point/plane dimension");
  Vec delta = y - through;
  return plane.residual_norm(delta.data());
}

Cone make_cone(Vec vertex, Plane direction, double aperture, double inner_radius,
               double outer_radius) {
  require(vertex.size() == direction.ambient_dim(), Errc::dimension_mismatch,
          "cone vertex/direction dimension");
  require(aperture > 0.0 && aperture < 1.0, Errc::invalid_params, "aperture must be in (0,1)");
  require(inner_radius >= 0.0 && outer_radius > inner_radius, Errc::invalid_params,
          "cone radii must satisfy 0 <= r < R");
  return Cone{std::move(vertex), std::move(direction), aperture, inner_radius, outer_radius};
}

bool cone_contains(const Cone& cone, const Vec& y) {
  const int d = cone.direction.ambient_dim();
  require(y.size() == d && cone.vertex.size() == d, Errc::dimension_mismatch,
          "point/cone dimension");
  Vec delta(d);
  double dist = 0.0;
  bool inside = in_cone(cone.vertex.data(), y.data(), d, cone.direction, cone.aperture,
                        delta.data(), &dist);
  return inside && dist >= cone.inner_radius && dist < cone.outer_radius;
}

double plane_metric(const Plane& v, const Plane& w) {
  require(v.ambient_dim() == w.ambient_dim() && v.dim() == w.dim(), Errc::dimension_mismatch,
          "plane_metric needs planes of equal dimensions");
  Mat diff = v.projector() - w.projector();
  Eigen::JacobiSVD<Mat> svd(diff);
  double s = svd.singularValues()(0);
  if (s < 1e-10) return 0.0;
  return std::min(1.0, s);
}

std::vector<Plane> sample_grassmannian(int ambient_dim, int dim, int count, std::uint64_t seed) {
  require(dim > 0 && dim < ambient_dim, Errc::invalid_params, "need 0 < m < d");
  require(count >= 1, Errc::invalid_params, "count must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Plane> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    std::vector<Vec> frame;
    for (int k = 0; k < dim; ++k) {
      Vec g(ambient_dim);
      for (int j = 0; j < ambient_dim; ++j) g(j) = gauss(rng);
      frame.push_back(g);
    }
    try {
      out.push_back(make_plane(frame));
    } catch (const Error&) {
      // probability-zero degenerate frame; draw again
    }
  }
  return out;
}

std::pair<Vec, Vec> project(const Vec& y, const Plane& plane) {
  Vec in = plane.project(y);
  return {in, y - in};
}

Vec parse_vector(std::string_view text) {
  std::vector<double> vals;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string_view tok = text.substr(pos, comma == std::string_view::npos ? text.size() - pos
                                                                              : comma - pos);
    while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.front()))) tok.remove_prefix(1);
    while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.back()))) tok.remove_suffix(1);
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    require(!tok.empty() && res.ec == std::errc() && res.ptr == tok.data() + tok.size(),
            Errc::invalid_params, "cannot parse number '" + std::string(tok) + "'");
    vals.push_back(v);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  Vec out(static_cast<Eigen::Index>(vals.size()));
  for (std::size_t i = 0; i < vals.size(); ++i) out(static_cast<Eigen::Index>(i)) = vals[i];
  return out;
}

Plane parse_plane(std::string_view text) {
  std::vector<Vec> vs;
  std::size_t pos = 0;
  while (true) {
    std::size_t semi = text.find(';', pos);
    vs.push_back(parse_vector(text.substr(pos, semi == std::string_view::npos ? std::string_view::npos
                                                                              : semi - pos)));
    if (semi == std::string_view::npos) break;
    pos = semi + 1;
  }
  return make_plane(vs);
}

std::string format_plane(const Plane& plane) {
  std::ostringstream os;
  os.precision(17);
  for (int k = 0; k < plane.dim(); ++k) {
    if (k) os << ';';
    for (int j = 0; j < plane.ambient_dim(); ++j) {
      if (j) os << ',';
      os << plane.basis()(j, k);
    }
  }
  return os.str();
}

}  // namespace conical
