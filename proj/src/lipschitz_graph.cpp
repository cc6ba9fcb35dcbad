#include "conical/lipschitz_graph.hpp"

#include "conical/error.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace conical {
namespace {

double segment_distance(const Vec& x, const Vec& a, const Vec& b) {
  Vec ab = b - a;
  const double len2 = ab.squaredNorm();
  double t = len2 > 0.0 ? (x - a).dot(ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (x - a - t * ab).norm();
}

double ray_distance(const Vec& x, const Vec& a, const Vec& dir) {
  const double t = std::max(0.0, (x - a).dot(dir) / dir.squaredNorm());
  return (x - a - t * dir).norm();
}

Mat to_mat(const std::vector<std::vector<double>>& rows, std::size_t len) {
  Mat out(static_cast<Eigen::Index>(len), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    require(rows[j].size() == len, Errc::dimension_mismatch, "anchor coordinate length");
    for (std::size_t k = 0; k < len; ++k) out(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = rows[j][k];
  }
  return out;
}

Plane plane_from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse_plane(j.get<std::string>());
  std::vector<Vec> vs;
  for (const auto& row : j) {
    auto vals = row.get<std::vector<double>>();
    vs.push_back(Eigen::Map<Vec>(vals.data(), static_cast<Eigen::Index>(vals.size())));
  }
  return make_plane(vs);
}

nlohmann::json plane_to_json(const Plane& p) {
  nlohmann::json rows = nlohmann::json::array();
  for (int k = 0; k < p.dim(); ++k) {
    Vec c = p.basis().col(k);
    rows.push_back(std::vector<double>(c.data(), c.data() + c.size()));
  }
  return rows;
}

}  // namespace

LipschitzGraph::LipschitzGraph(Plane base, Plane values, Mat anchor_z, Mat anchor_values, double lipschitz)
    : base_(std::move(base)), values_(std::move(values)), z_(std::move(anchor_z)),
      v_(std::move(anchor_values)), lip_(lipschitz) {
  require(base_.ambient_dim() == values_.ambient_dim() &&
              base_.dim() + values_.dim() == base_.ambient_dim(),
          Errc::dimension_mismatch, "base and value planes must be complementary");
  require((base_.basis().transpose() * values_.basis()).cwiseAbs().maxCoeff() < 1e-10,
          Errc::invalid_params, "base and value planes must be orthogonal");
  require(z_.rows() == base_.dim() && v_.rows() == values_.dim() && z_.cols() == v_.cols(),
          Errc::dimension_mismatch, "anchor array shapes");
  require(z_.cols() >= 1, Errc::invalid_params, "graph needs at least one anchor");
  require(lip_ >= 0.0 && std::isfinite(lip_), Errc::invalid_params, "Lipschitz constant must be finite");
  if (dim() == 1) build_polyline();
}

double LipschitzGraph::anchor_lipschitz() const {
  double best = 0.0;
  for (Eigen::Index i = 0; i < z_.cols(); ++i)
    for (Eigen::Index j = i + 1; j < z_.cols(); ++j) {
      const double dz = (z_.col(i) - z_.col(j)).norm();
      if (dz > 0.0) best = std::max(best, (v_.col(i) - v_.col(j)).norm() / dz);
    }
  return best;
}

Vec LipschitzGraph::eval(const Vec& z) const {
  require(z.size() == dim(), Errc::dimension_mismatch, "graph parameter dimension");
  Vec out = Vec::Constant(values_.dim(), kInf);
  for (Eigen::Index j = 0; j < z_.cols(); ++j) {
    const double reach = lip_ * (z - z_.col(j)).norm();
    for (Eigen::Index c = 0; c < out.size(); ++c) out(c) = std::min(out(c), v_(c, j) + reach);
  }
  return out;
}

Vec LipschitzGraph::point(const Vec& z) const {
  return base_.basis() * z + values_.basis() * eval(z);
}

Vec LipschitzGraph::anchor_point(std::size_t j) const {
  const auto k = static_cast<Eigen::Index>(j);
  return base_.basis() * z_.col(k) + values_.basis() * v_.col(k);
}

void LipschitzGraph::build_polyline() {
  const auto k = static_cast<std::size_t>(z_.cols());
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return z_(0, static_cast<Eigen::Index>(a)) < z_(0, static_cast<Eigen::Index>(b));
  });
  std::set<double> knots;
  for (std::size_t t = 0; t < k; ++t) knots.insert(z_(0, static_cast<Eigen::Index>(order[t])));
  if (lip_ > 0.0) {
    // Between consecutive anchors each component is the lower envelope of
    // two slopes +-L, with a single kink.
    for (std::size_t t = 0; t + 1 < k; ++t) {
      const auto a = static_cast<Eigen::Index>(order[t]);
      const auto b = static_cast<Eigen::Index>(order[t + 1]);
      const double za = z_(0, a), zb = z_(0, b);
      for (Eigen::Index c = 0; c < v_.rows(); ++c) {
        const double kink = (v_(c, b) - v_(c, a) + lip_ * (za + zb)) / (2.0 * lip_);
        if (kink > za && kink < zb) knots.insert(kink);
      }
    }
  }
  knots_.assign(knots.begin(), knots.end());
  vertices_.resize(ambient_dim(), static_cast<Eigen::Index>(knots_.size()));
  for (std::size_t t = 0; t < knots_.size(); ++t) {
    Vec z(1);
    z(0) = knots_[t];
    vertices_.col(static_cast<Eigen::Index>(t)) = point(z);
  }
  // Left of the first anchor every component grows like L (z0 - z); right of
  // the last like L (z - zk).
  Vec up = values_.basis() * Vec::Constant(values_.dim(), lip_);
  left_dir_ = -base_.basis().col(0) + up;
  right_dir_ = base_.basis().col(0) + up;
}

double LipschitzGraph::distance(const Vec& x) const {
  require(x.size() == ambient_dim(), Errc::graph_ambient_mismatch, "point and graph ambient dimensions differ");
  if (dim() == 1) {
    const auto count = vertices_.cols();
    double best = ray_distance(x, vertices_.col(0), left_dir_);
    best = std::min(best, ray_distance(x, vertices_.col(count - 1), right_dir_));
    for (Eigen::Index t = 0; t + 1 < count; ++t)
      best = std::min(best, segment_distance(x, vertices_.col(t), vertices_.col(t + 1)));
    return best;
  }
  Vec z = base_.basis().transpose() * x;
  double best = (x - point(z)).norm();
  for (std::size_t j = 0; j < anchor_count(); ++j) best = std::min(best, (x - anchor_point(j)).norm());
  return best;
}

Mat LipschitzGraph::sample(std::size_t count, double margin) const {
  require(count >= 2, Errc::invalid_params, "need at least two samples");
  Vec lo = z_.rowwise().minCoeff().array() - margin;
  Vec hi = z_.rowwise().maxCoeff().array() + margin;
  if (dim() == 1) {
    Mat out(ambient_dim(), static_cast<Eigen::Index>(count));
    for (std::size_t i = 0; i < count; ++i) {
      Vec z(1);
      z(0) = lo(0) + (hi(0) - lo(0)) * static_cast<double>(i) / static_cast<double>(count - 1);
      out.col(static_cast<Eigen::Index>(i)) = point(z);
    }
    return out;
  }
  if (dim() != 2) throw Error(Errc::unsupported_dimension, "graph sampling supports n <= 2");
  Mat out(ambient_dim(), static_cast<Eigen::Index>(count * count));
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t j = 0; j < count; ++j) {
      Vec z(2);
      z(0) = lo(0) + (hi(0) - lo(0)) * static_cast<double>(i) / static_cast<double>(count - 1);
      z(1) = lo(1) + (hi(1) - lo(1)) * static_cast<double>(j) / static_cast<double>(count - 1);
      out.col(static_cast<Eigen::Index>(i * count + j)) = point(z);
    }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> half_cone_violations(const Mat& anchors,
                                                                      const Plane& v, double alpha) {
  require(anchors.rows() == v.ambient_dim(), Errc::dimension_mismatch, "anchor/plane dimension");
  const int d = v.ambient_dim();
  const double half = alpha / 2.0;
  std::vector<double> scratch(static_cast<std::size_t>(d));
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (Eigen::Index i = 0; i < anchors.cols(); ++i)
    for (Eigen::Index j = i + 1; j < anchors.cols(); ++j) {
      double dist = 0.0;
      if (in_cone(anchors.col(i).data(), anchors.col(j).data(), d, v, half, scratch.data(), &dist))
        out.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  return out;
}

LipschitzGraph fit_lipschitz_graph(const Mat& anchors, const Plane& v, double alpha) {
  require(alpha > 0.0 && alpha < 1.0, Errc::invalid_params, "aperture must be in (0,1)");
  require(anchors.cols() >= 1, Errc::invalid_params, "no anchors");
  const auto bad = half_cone_violations(anchors, v, alpha);
  if (!bad.empty())
    throw Error(Errc::cone_violation, "anchors " + std::to_string(bad.front().first) + " and " +
                                          std::to_string(bad.front().second) +
                                          " lie in each other's half-aperture cone");
  // exact duplicates would make the projection non-injective
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < anchors.cols(); ++i) {
    bool dup = false;
    for (Eigen::Index k : keep)
      if (anchors.col(k) == anchors.col(i)) {
        dup = true;
        break;
      }
    if (!dup) keep.push_back(i);
  }
  Plane base = v.complement();
  Mat z(base.dim(), static_cast<Eigen::Index>(keep.size()));
  Mat vals(v.dim(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t t = 0; t < keep.size(); ++t) {
    z.col(static_cast<Eigen::Index>(t)) = base.basis().transpose() * anchors.col(keep[t]);
    vals.col(static_cast<Eigen::Index>(t)) = v.basis().transpose() * anchors.col(keep[t]);
  }
  return LipschitzGraph(std::move(base), v, std::move(z), std::move(vals), 2.0 / alpha);
}

nlohmann::json to_json(const LipschitzGraph& g) {
  nlohmann::json anchors = nlohmann::json::array();
  for (std::size_t j = 0; j < g.anchor_count(); ++j) {
    Vec z = g.anchor_z().col(static_cast<Eigen::Index>(j));
    Vec f = g.anchor_values().col(static_cast<Eigen::Index>(j));
    anchors.push_back({std::vector<double>(z.data(), z.data() + z.size()),
                       std::vector<double>(f.data(), f.data() + f.size())});
  }
  return {{"base_plane", plane_to_json(g.base_plane())},
          {"value_plane", plane_to_json(g.value_plane())},
          {"anchors", anchors},
          {"L", g.lipschitz()}};
}

LipschitzGraph graph_from_json(const nlohmann::json& j) {
  try {
    Plane base = plane_from_json(j.at("base_plane"));
    Plane values = j.contains("value_plane") ? plane_from_json(j.at("value_plane")) : base.complement();
    std::vector<std::vector<double>> zs, fs;
    for (const auto& a : j.at("anchors")) {
      if (a.is_array() && a.size() == 2 && a[0].is_array()) {
        zs.push_back(a[0].get<std::vector<double>>());
        fs.push_back(a[1].get<std::vector<double>>());
      } else {
        // scalar form [z, F(z)] for curves in the plane
        auto flat = a.get<std::vector<double>>();
        require(flat.size() == 2, Errc::invalid_params, "anchor must be [z, F(z)]");
        zs.push_back({flat[0]});
        fs.push_back({flat[1]});
      }
    }
    return LipschitzGraph(base, values, to_mat(zs, static_cast<std::size_t>(base.dim())),
                          to_mat(fs, static_cast<std::size_t>(values.dim())), j.at("L").get<double>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_params, std::string("graph file: ") + e.what());
  }
}

}  // namespace conical
