#include "conical/measure.hpp"

#include "conical/error.hpp"
#include "conical/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace conical {
namespace {

double sq_dist(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int k = 0; k < d; ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return s;
}

// Median nearest-neighbour distance from a strided sample of at most 256 atoms.
double median_nn_distance(const Mat& pts) {
  const auto n = static_cast<std::size_t>(pts.cols());
  const int d = static_cast<int>(pts.rows());
  if (n < 2) return 1.0;
  const std::size_t stride = std::max<std::size_t>(1, n / 256);
  std::vector<double> nn;
  for (std::size_t i = 0; i < n; i += stride) {
    double best = kInf;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double s = sq_dist(pts.col(static_cast<Eigen::Index>(i)).data(),
                               pts.col(static_cast<Eigen::Index>(j)).data(), d);
      if (s > 0.0) best = std::min(best, s);
    }
    if (std::isfinite(best)) nn.push_back(std::sqrt(best));
  }
  if (nn.empty()) return 1.0;
  std::nth_element(nn.begin(), nn.begin() + static_cast<long>(nn.size() / 2), nn.end());
  return nn[nn.size() / 2];
}

}  // namespace

GridIndex::GridIndex(const Mat& points, double cell_size)
    : dim_(static_cast<int>(points.rows())), cell_(cell_size) {
  require(cell_ > 0.0 && std::isfinite(cell_), Errc::invalid_params, "grid cell size");
  const auto n = static_cast<std::size_t>(points.cols());
  origin_ = points.rowwise().minCoeff();
  std::vector<std::pair<Key, std::size_t>> tagged;
  tagged.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
    tagged.emplace_back(key_of(points.col(static_cast<Eigen::Index>(i)).data()), i);
  std::sort(tagged.begin(), tagged.end());
  offsets_.push_back(0);
  for (std::size_t i = 0; i < n; ++i) {
    if (keys_.empty() || keys_.back() != tagged[i].first) {
      if (!keys_.empty()) offsets_.push_back(members_.size());
      keys_.push_back(tagged[i].first);
    }
    members_.push_back(tagged[i].second);
  }
  offsets_.push_back(members_.size());
}

GridIndex::Key GridIndex::key_of(const double* p) const {
  Key k(static_cast<std::size_t>(dim_));
  for (int j = 0; j < dim_; ++j)
    k[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(std::floor((p[j] - origin_(j)) / cell_));
  return k;
}

long GridIndex::find_cell(const Key& key) const {
  auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
  if (it == keys_.end() || *it != key) return -1;
  return static_cast<long>(it - keys_.begin());
}

std::vector<std::size_t> GridIndex::ball(const Mat& points, const double* x, double r) const {
  std::vector<std::size_t> out;
  if (!(r > 0.0)) return out;
  const double r2 = r * r;
  auto scan_cell = [&](std::size_t c) {
    for (std::size_t t = offsets_[c]; t < offsets_[c + 1]; ++t) {
      const std::size_t i = members_[t];
      if (sq_dist(points.col(static_cast<Eigen::Index>(i)).data(), x, dim_) < r2) out.push_back(i);
    }
  };
  Key lo(static_cast<std::size_t>(dim_)), hi(static_cast<std::size_t>(dim_));
  double box_cells = 1.0;
  constexpr double kClamp = 1e15;
  for (int j = 0; j < dim_; ++j) {
    const double l = std::clamp(std::floor((x[j] - r - origin_(j)) / cell_), -kClamp, kClamp);
    const double h = std::clamp(std::floor((x[j] + r - origin_(j)) / cell_), -kClamp, kClamp);
    lo[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(l);
    hi[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(h);
    box_cells *= (h - l + 1.0);
  }
  if (!std::isfinite(r) || box_cells > static_cast<double>(keys_.size())) {
    for (std::size_t c = 0; c < keys_.size(); ++c) {
      bool overlaps = true;
      for (int j = 0; j < dim_ && overlaps; ++j)
        overlaps = keys_[c][static_cast<std::size_t>(j)] >= lo[static_cast<std::size_t>(j)] &&
                   keys_[c][static_cast<std::size_t>(j)] <= hi[static_cast<std::size_t>(j)];
      if (overlaps || !std::isfinite(r)) scan_cell(c);
    }
  } else {
    Key cur = lo;
    while (true) {
      long c = find_cell(cur);
      if (c >= 0) scan_cell(static_cast<std::size_t>(c));
      int j = dim_ - 1;
      while (j >= 0) {
        auto& v = cur[static_cast<std::size_t>(j)];
        if (v < hi[static_cast<std::size_t>(j)]) {
          ++v;
          break;
        }
        v = lo[static_cast<std::size_t>(j)];
        --j;
      }
      if (j < 0) break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

DiscreteMeasure::DiscreteMeasure(Mat points, std::vector<double> weights, int dim_param)
    : points_(std::move(points)), weights_(std::move(weights)), n_(dim_param) {
  require(!weights_.empty(), Errc::invalid_params, "measure needs at least one atom");
  require(static_cast<std::size_t>(points_.cols()) == weights_.size(), Errc::dimension_mismatch,
          "points/weights count mismatch");
  require(n_ > 0 && n_ < ambient_dim(), Errc::invalid_params, "dimension parameter needs 0 < n < d");
  for (double w : weights_)
    require(w > 0.0 && std::isfinite(w), Errc::invalid_params, "weights must be positive and finite");
  require(points_.allFinite(), Errc::invalid_params, "non-finite coordinate");
  total_ = pairwise_sum(weights_.data(), weights_.size());
  double h = median_nn_distance(points_);
  if (!(h > 0.0)) h = 1.0;
  index_ = GridIndex(points_, h);
}

std::vector<std::size_t> DiscreteMeasure::ball_indices(const Vec& x, double r) const {
  require(x.size() == ambient_dim(), Errc::dimension_mismatch, "query point dimension");
  return index_.ball(points_, x.data(), r);
}

std::vector<std::size_t> DiscreteMeasure::ball_indices(const double* x, double r) const {
  return index_.ball(points_, x, r);
}

DiscreteMeasure DiscreteMeasure::transformed(const Vec& shift, double scale) const {
  Mat p = (points_.colwise() - shift) * scale;
  return DiscreteMeasure(std::move(p), weights_, n_);
}

DiscreteMeasure DiscreteMeasure::with_dim_param(int n) const {
  return DiscreteMeasure(points_, weights_, n);
}

DiscreteMeasure DiscreteMeasure::with_weights(std::vector<double> weights) const {
  return DiscreteMeasure(points_, std::move(weights), n_);
}

double DiscreteMeasure::min_interpoint_distance() const {
  double best = kInf;
  const int d = ambient_dim();
  for (std::size_t i = 0; i < size(); ++i) {
    // candidates from a small ball first, widening until something is found
    double r = index_.cell_size();
    while (true) {
      auto idx = index_.ball(points_, point(i), r);
      double local = kInf;
      for (std::size_t j : idx) {
        if (j == i) continue;
        const double s = sq_dist(point(i), point(j), d);
        if (s > 0.0) local = std::min(local, s);
      }
      if (std::isfinite(local)) {
        best = std::min(best, std::sqrt(local));
        break;
      }
      if (idx.size() == size()) break;
      r *= 2.0;
    }
  }
  return best;
}

double DiscreteMeasure::diameter() const {
  double best = 0.0;
  const int d = ambient_dim();
  for (std::size_t i = 0; i < size(); ++i)
    for (std::size_t j = i + 1; j < size(); ++j) best = std::max(best, sq_dist(point(i), point(j), d));
  return std::sqrt(best);
}

double ball_mass(const DiscreteMeasure& m, const double* x, double r) {
  require(r > 0.0, Errc::invalid_range, "ball radius must be positive");
  double s = 0.0;
  for (std::size_t i : m.ball_indices(x, r)) s += m.weight(i);
  return s;
}

double ball_mass(const DiscreteMeasure& m, const Vec& x, double r) {
  require(x.size() == m.ambient_dim(), Errc::dimension_mismatch, "query point dimension");
  return ball_mass(m, x.data(), r);
}

double cone_mass(const DiscreteMeasure& m, const Cone& cone) {
  const int d = m.ambient_dim();
  require(cone.vertex.size() == d && cone.direction.ambient_dim() == d, Errc::dimension_mismatch,
          "cone/measure dimension");
  std::vector<std::size_t> cand;
  if (std::isfinite(cone.outer_radius)) {
    cand = m.ball_indices(cone.vertex, cone.outer_radius);
  } else {
    cand.resize(m.size());
    std::iota(cand.begin(), cand.end(), std::size_t{0});
  }
  std::vector<double> delta(static_cast<std::size_t>(d));
  double s = 0.0;
  for (std::size_t i : cand) {
    double dist = 0.0;
    if (in_cone(cone.vertex.data(), m.point(i), d, cone.direction, cone.aperture, delta.data(), &dist) &&
        dist >= cone.inner_radius && dist < cone.outer_radius)
      s += m.weight(i);
  }
  return s;
}

double theta(const DiscreteMeasure& m, const Vec& x, double r) {
  return ball_mass(m, x, r) / std::pow(r, m.dim_param());
}

DensityProfile density_profile(const DiscreteMeasure& m, const Vec& x,
                               const std::vector<double>& scales) {
  for (std::size_t k = 1; k < scales.size(); ++k)
    require(scales[k] < scales[k - 1], Errc::invalid_range, "scales must be strictly decreasing");
  DensityProfile out{x, scales, {}};
  for (double r : scales) out.values.push_back(theta(m, x, r));
  return out;
}

double maximal_function(const DiscreteMeasure& m, const Vec& x, double r_min, double r_max) {
  require(r_min > 0.0 && r_min < r_max, Errc::invalid_range, "need 0 < r_min < r_max");
  require(x.size() == m.ambient_dim(), Errc::dimension_mismatch, "query point dimension");
  const int d = m.ambient_dim();
  const int n = m.dim_param();
  // Candidate radii: the limit from above at r_min and at every distance in
  // (r_min, r_max). mu(B(x, r)) over r in (d_i, d_{i+1}] is the closed mass
  // up to d_i, so the sup on that piece is approached as r -> d_i+.
  std::vector<std::pair<double, double>> dw;
  auto idx = m.ball_indices(x, r_max);
  dw.reserve(idx.size());
  for (std::size_t i : idx) dw.emplace_back(std::sqrt(sq_dist(m.point(i), x.data(), d)), m.weight(i));
  std::sort(dw.begin(), dw.end());
  double best = 0.0;
  double closed = 0.0;
  std::size_t k = 0;
  while (k < dw.size() && dw[k].first <= r_min) closed += dw[k++].second;
  best = closed / std::pow(r_min, n);
  while (k < dw.size()) {
    const double rad = dw[k].first;
    while (k < dw.size() && dw[k].first == rad) closed += dw[k++].second;
    best = std::max(best, closed / std::pow(rad, n));
  }
  return best;
}

GrowthEstimate growth_constant(const DiscreteMeasure& m, double r0, std::size_t sample_count,
                               std::uint64_t seed) {
  require(r0 > 0.0, Errc::invalid_range, "r0 must be positive");
  require(sample_count >= 1, Errc::invalid_params, "sample_count must be positive");
  GrowthEstimate est;
  if (m.size() == 1) {
    est.degenerate = true;
    est.r_min = r0 / 2.0;
  } else {
    est.r_min = m.min_interpoint_distance() / 2.0;
  }
  if (!(est.r_min < r0)) est.r_min = r0 / 2.0;
  std::vector<std::size_t> picks(m.size());
  std::iota(picks.begin(), picks.end(), std::size_t{0});
  if (sample_count < m.size()) {
    std::mt19937_64 rng(seed);
    std::shuffle(picks.begin(), picks.end(), rng);
    picks.resize(sample_count);
    std::sort(picks.begin(), picks.end());
  }
  est.sampled = picks.size();
  for (std::size_t i : picks) {
    const double v = maximal_function(m, m.point_vec(i), est.r_min, r0);
    if (v > est.c1) {
      est.c1 = v;
      est.argmax = i;
    }
  }
  return est;
}

}  // namespace conical
