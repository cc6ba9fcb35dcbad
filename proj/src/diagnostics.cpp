#include "conical/diagnostics.hpp"

#include "conical/error.hpp"
#include "conical/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace conical {
namespace {

struct Segment {
  Vec a, b;
};

// L cap closed B(x, r) for a line; empty optional when they miss.
std::optional<Segment> line_in_ball(const AffinePlane& l, const Vec& x, double r) {
  const Vec u = l.plane.basis().col(0);
  const Vec p = l.point - x;
  const double b = u.dot(p);
  const double disc = b * b - (p.squaredNorm() - r * r);
  if (disc < 0.0) return std::nullopt;
  const double s = std::sqrt(disc);
  return Segment{l.point + (-b - s) * u, l.point + (-b + s) * u};
}

double point_segment(const Vec& y, const Segment& s) {
  const Vec ab = s.b - s.a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((y - s.a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (y - s.a - t * ab).norm();
}

struct Disc {
  Vec center;
  double radius;
  const Plane* plane;
};

std::optional<Disc> plane_in_ball(const AffinePlane& l, const Vec& x, double r) {
  const Vec c = l.point + l.plane.project(Vec(x - l.point));
  const double h2 = (x - c).squaredNorm();
  if (h2 > r * r) return std::nullopt;
  return Disc{c, std::sqrt(r * r - h2), &l.plane};
}

double point_disc(const Vec& y, const Disc& d) {
  const Vec in = d.plane->project(Vec(y - d.center));
  const Vec off = (y - d.center) - in;
  const double rad = in.norm();
  if (rad <= d.radius) return off.norm();
  return (y - (d.center + in * (d.radius / rad))).norm();
}

double sup_disc_to_disc(const Disc& from, const Disc& to) {
  // dist(., to) is convex, so the sup over a disc sits on its boundary circle.
  constexpr int kSamples = 4096;
  const Vec e1 = from.plane->basis().col(0);
  const Vec e2 = from.plane->basis().col(1);
  double best = from.radius == 0.0 ? point_disc(from.center, to) : 0.0;
  for (int k = 0; k < kSamples && from.radius > 0.0; ++k) {
    const double t = 2.0 * M_PI * k / kSamples;
    const Vec y = from.center + from.radius * (std::cos(t) * e1 + std::sin(t) * e2);
    best = std::max(best, point_disc(y, to));
  }
  return best;
}

std::vector<std::pair<double, double>> sorted_neighbours(const DiscreteMeasure& m, std::size_t i, double reach) {
  std::vector<std::pair<double, double>> out;
  const Vec x = m.point_vec(i);
  for (std::size_t j : m.ball_indices(x, reach)) out.emplace_back((m.point_vec(j) - x).norm(), m.weight(j));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

BetaResult beta2(const DiscreteMeasure& m, const Vec& x, double r) {
  require(r > 0.0, Errc::invalid_range, "radius must be positive");
  require(x.size() == m.ambient_dim(), Errc::dimension_mismatch, "center dimension");
  const auto idx = m.ball_indices(x, r);
  if (idx.empty()) throw Error(Errc::empty_ball, "no atoms in the ball");
  const int d = m.ambient_dim();
  const int n = m.dim_param();
  double mass = 0.0;
  Vec c = Vec::Zero(d);
  for (std::size_t i : idx) {
    mass += m.weight(i);
    c += m.weight(i) * m.point_vec(i);
  }
  c /= mass;
  Mat s = Mat::Zero(d, d);
  for (std::size_t i : idx) {
    const Vec y = m.point_vec(i) - c;
    s += m.weight(i) * y * y.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(s);
  const Vec& ev = es.eigenvalues();  // ascending
  double resid = 0.0;
  for (int k = 0; k < d - n; ++k) resid += std::max(ev(k), 0.0);
  BetaResult out{x, r, 0.0, AffinePlane{c, Plane(es.eigenvectors().rightCols(n))}, false};
  // Gram-Schmidt cleanup keeps the basis orthonormal to 1e-12 for the Plane check
  std::vector<Vec> dirs;
  for (int k = 0; k < n; ++k) dirs.push_back(es.eigenvectors().col(d - n + k));
  out.plane.plane = make_plane(dirs);
  out.beta = std::sqrt(resid / std::pow(r, n + 2));
  const double top = std::max(std::abs(ev(d - 1)), std::numeric_limits<double>::min());
  out.degenerate_spectrum = std::abs(ev(d - n) - ev(d - n - 1)) <= 1e-12 * top;
  return out;
}

double beta_objective(const DiscreteMeasure& m, const Vec& x, double r, const AffinePlane& l) {
  const int n = m.dim_param();
  double s = 0.0;
  for (std::size_t i : m.ball_indices(x, r)) {
    const Vec y = m.point_vec(i) - l.point;
    s += m.weight(i) * (y - l.plane.project(y)).squaredNorm();
  }
  return std::sqrt(s / std::pow(r, n + 2));
}

BetaProfile beta_square_function(const DiscreteMeasure& m, const Vec& x, const std::vector<double>& scales) {
  require(!scales.empty(), Errc::invalid_range, "empty scale grid");
  for (std::size_t k = 1; k < scales.size(); ++k)
    require(scales[k] < scales[k - 1], Errc::invalid_range, "scales must be strictly decreasing");
  BetaProfile out;
  out.scales = scales;
  for (std::size_t k = 0; k < scales.size(); ++k) {
    const double b = beta2(m, x, scales[k]).beta;
    out.betas.push_back(b);
    double dlog = std::log(2.0);
    if (k + 1 < scales.size()) {
      dlog = std::log(scales[k] / scales[k + 1]);
    } else if (k > 0) {
      dlog = std::log(scales[k - 1] / scales[k]);
    }
    out.square_sum += b * b * dlog;
  }
  return out;
}

double plane_ball_hausdorff(const AffinePlane& l, const AffinePlane& w, const Vec& x, double r) {
  require(l.plane.dim() == w.plane.dim(), Errc::dimension_mismatch, "planes of different dimensions");
  const int n = l.plane.dim();
  if (n == 1) {
    auto a = line_in_ball(l, x, r);
    auto b = line_in_ball(w, x, r);
    if (!a || !b) return kInf;
    return std::max({point_segment(a->a, *b), point_segment(a->b, *b), point_segment(b->a, *a),
                     point_segment(b->b, *a)});
  }
  if (n == 2) {
    auto a = plane_in_ball(l, x, r);
    auto b = plane_in_ball(w, x, r);
    if (!a || !b) return kInf;
    return std::max(sup_disc_to_disc(*a, *b), sup_disc_to_disc(*b, *a));
  }
  throw Error(Errc::unsupported_dimension, "Hausdorff profiles are computed for n <= 2 only");
}

TangentProfile tangent_convergence(const DiscreteMeasure& m, const Vec& x, const std::vector<double>& scales) {
  require(scales.size() >= 3, Errc::invalid_range, "need at least three scales");
  for (std::size_t k = 1; k < scales.size(); ++k)
    require(scales[k] < scales[k - 1], Errc::invalid_range, "scales must be strictly decreasing");
  if (m.dim_param() > 2) throw Error(Errc::unsupported_dimension, "tangent profiles need n <= 2");
  TangentProfile out;
  out.reference_scale = scales.back();
  const AffinePlane w = beta2(m, x, scales.back()).plane;
  for (std::size_t k = 0; k + 1 < scales.size(); ++k) {
    const AffinePlane l = beta2(m, x, scales[k]).plane;
    out.scales.push_back(scales[k]);
    out.values.push_back(plane_ball_hausdorff(l, w, x, scales[k]) / scales[k]);
  }
  out.trend = out.values.front() > 0.0 ? out.values.back() / out.values.front() : 0.0;
  return out;
}

ConicalDensityProfile conical_density_profile(const DiscreteMeasure& m, const Vec& x, const Plane& w,
                                              double alpha, const std::vector<double>& scales,
                                              std::optional<double> eps_n) {
  require(w.ambient_dim() == m.ambient_dim() && w.dim() == m.dim_param(), Errc::dimension_mismatch,
          "W must be an n-plane in R^d");
  for (std::size_t k = 1; k < scales.size(); ++k)
    require(scales[k] < scales[k - 1], Errc::invalid_range, "scales must be strictly decreasing");
  const Plane dir = w.complement();
  const int n = m.dim_param();
  ConicalDensityProfile out;
  out.scales = scales;
  double upper = 0.0;
  for (double r : scales) {
    const Cone k = make_cone(x, dir, alpha, 0.0, r);
    out.values.push_back(cone_mass(m, k) / std::pow(r, n));
    upper = std::max(upper, theta(m, x, r));
  }
  for (std::size_t k = 1; k < out.values.size(); ++k)
    if (out.values[k] > out.values[k - 1]) out.nonincreasing = false;
  if (!out.values.empty() && out.values.front() > 0.0) out.trend = out.values.back() / out.values.front();
  if (eps_n) {
    out.threshold = std::pow(alpha, n) * *eps_n * upper;
    for (double v : out.values) out.below_threshold.push_back(v <= *out.threshold);
  }
  return out;
}

ConeTubeResult cone_outside_tube_check(const Vec& x, double r, const Plane& w, const AffinePlane& l,
                                       double alpha, double eps, std::size_t samples, std::uint64_t seed) {
  ConeTubeResult out;
  out.eta = 1.0 - alpha - 3.0 * eps;
  if (!(out.eta > 0.0)) throw Error(Errc::invalid_eta, "1 - alpha - 3 eps must be positive");
  require(r > 0.0 && alpha > 0.0 && alpha < 1.0 && eps >= 0.0, Errc::invalid_params, "cone/tube parameters");
  require(w.dim() == l.plane.dim() && w.ambient_dim() == x.size(), Errc::dimension_mismatch, "plane dimensions");
  out.hausdorff = plane_ball_hausdorff(l, AffinePlane{x, w}, x, r);
  out.hypothesis = out.hausdorff <= eps * r;
  if (!out.hypothesis) return out;

  const int d = w.ambient_dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(1.0, 2.0);
  out.passed = true;
  Vec u(d);
  while (out.samples < samples) {
    for (int j = 0; j < d; ++j) u(j) = gauss(rng);
    const double len = u.norm();
    if (len == 0.0) continue;
    u /= len;
    // y - x in K(0, W^perp, alpha) iff |pi_W (y - x)| < alpha |y - x|
    if (!(w.project(u).norm() < alpha)) continue;
    const Vec y = x + r * unif(rng) * u;
    ++out.samples;
    const Vec rel = y - l.point;
    if ((rel - l.plane.project(rel)).norm() < out.eta * r) {
      out.passed = false;
      out.witness = y;
      break;
    }
  }
  return out;
}

std::set<int> theta_shells(const Mat& points, std::size_t i, const Plane& v, double theta) {
  const int d = static_cast<int>(points.rows());
  std::vector<double> scratch(static_cast<std::size_t>(d));
  std::set<int> shells;
  const double* x = points.col(static_cast<Eigen::Index>(i)).data();
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    if (static_cast<std::size_t>(j) == i) continue;
    double len = 0.0;
    if (!in_cone(x, points.col(j).data(), d, v, theta, scratch.data(), &len)) continue;
    int e = 0;
    std::frexp(len, &e);  // len in [2^{e-1}, 2^e)
    shells.insert(1 - e);
  }
  return shells;
}

ThetaMResult theta_M_property(const Mat& points, const Plane& v, double theta, bool per_point) {
  require(theta > 0.0 && theta < 1.0, Errc::invalid_params, "theta must be in (0,1)");
  require(points.rows() == v.ambient_dim(), Errc::dimension_mismatch, "point/plane dimension");
  const auto n = static_cast<std::size_t>(points.cols());
  std::vector<std::size_t> counts(n);
  parallel_for(n, [&](std::size_t i) { counts[i] = theta_shells(points, i, v, theta).size(); });
  ThetaMResult out;
  for (auto c : counts) out.max_count = std::max(out.max_count, c);
  if (per_point) out.counts = std::move(counts);
  return out;
}

std::vector<std::size_t> f_epsilon_set(const DiscreteMeasure& m, double eps) {
  require(eps > 0.0, Errc::invalid_params, "eps must be positive");
  const int n = m.dim_param();
  std::vector<char> in(m.size(), 0);
  parallel_for(m.size(), [&](std::size_t i) {
    // mu(B(x, r)) is constant on (d_k, d_{k+1}]; the right end is the best radius.
    const auto nb = sorted_neighbours(m, i, 1.0);
    double closed = 0.0;
    std::size_t k = 0;
    while (k < nb.size() && nb[k].first == 0.0) closed += nb[k++].second;
    while (true) {
      const double r = k < nb.size() ? nb[k].first : 1.0;
      if (closed <= eps * std::pow(r, n)) {
        in[i] = 1;
        return;
      }
      if (k >= nb.size()) return;
      while (k < nb.size() && nb[k].first == r) closed += nb[k++].second;
    }
  });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < m.size(); ++i)
    if (in[i]) out.push_back(i);
  return out;
}

std::vector<std::size_t> f_epsilon_set(const DiscreteMeasure& m, double eps, const std::vector<double>& radii) {
  require(eps > 0.0, Errc::invalid_params, "eps must be positive");
  for (double r : radii) require(r > 0.0 && r <= 1.0, Errc::invalid_range, "radii must lie in (0,1]");
  const int n = m.dim_param();
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < m.size(); ++i)
    for (double r : radii)
      if (ball_mass(m, m.point(i), r) <= eps * std::pow(r, n)) {
        out.push_back(i);
        break;
      }
  return out;
}

CoverReport necessary_bplg_cover(const DiscreteMeasure& m, const LipschitzGraph& graph, bool alpha_auto,
                                 double alpha, std::size_t graph_sample_count) {
  if (graph.ambient_dim() != m.ambient_dim())
    throw Error(Errc::graph_ambient_mismatch, "graph lives in R^" + std::to_string(graph.ambient_dim()) +
                                                  ", points in R^" + std::to_string(m.ambient_dim()));
  CoverReport rep;
  rep.lipschitz = graph.lipschitz();
  rep.theta = 1.0 / std::sqrt(1.0 + rep.lipschitz * rep.lipschitz);
  rep.alpha = alpha_auto ? std::min({rep.theta / 2.0, 0.1, rep.lipschitz > 0.0 ? 1.0 / (4.0 * rep.lipschitz) : kInf})
                         : alpha;
  const int n = m.dim_param();

  std::vector<double> gdist(m.size());
  parallel_for(m.size(), [&](std::size_t i) { gdist[i] = graph.distance(m.point_vec(i)); });
  const double scale = std::max(1.0, m.points().cwiseAbs().maxCoeff());
  for (std::size_t i = 0; i < m.size(); ++i)
    if (gdist[i] > 1e-12 * scale) rep.off_graph.push_back(i);

  std::vector<std::size_t> order = rep.off_graph;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return gdist[a] > gdist[b]; });
  for (std::size_t i : order) {
    const double ri = 0.01 * gdist[i];
    bool free = true;
    for (std::size_t t = 0; t < rep.selected.size(); ++t)
      if ((m.point_vec(i) - m.point_vec(rep.selected[t])).norm() < ri + rep.radii[t]) {
        free = false;
        break;
      }
    if (free) {
      rep.selected.push_back(i);
      rep.radii.push_back(ri);
    }
  }

  for (std::size_t a = 0; a < rep.selected.size(); ++a)
    for (std::size_t b = a + 1; b < rep.selected.size(); ++b)
      if ((m.point_vec(rep.selected[a]) - m.point_vec(rep.selected[b])).norm() < rep.radii[a] + rep.radii[b])
        rep.disjoint = false;
  for (std::size_t i : rep.off_graph) {
    bool hit = false;
    for (std::size_t t = 0; t < rep.selected.size() && !hit; ++t)
      hit = (m.point_vec(i) - m.point_vec(rep.selected[t])).norm() < 5.0 * rep.radii[t];
    if (!hit) rep.covered = false;
  }

  std::vector<double> rn, masses;
  for (std::size_t t = 0; t < rep.selected.size(); ++t) {
    rn.push_back(std::pow(rep.radii[t], n));
    masses.push_back(ball_mass(m, m.point(rep.selected[t]), rep.radii[t]));
  }
  rep.sum_rn = pairwise_sum(rn.data(), rn.size());
  rep.sum_mass = pairwise_sum(masses.data(), masses.size());
  rep.ratio = rep.sum_mass > 0.0 ? rep.sum_rn / rep.sum_mass : 0.0;

  // For r < r_j, K_j(r) lies in 6B_j: a graph point at distance >= 6 r_j
  // from x_j is outside it. Anything closer is counted as a failure.
  if (!rep.selected.empty()) {
    const Vec lo = graph.anchor_z().rowwise().minCoeff();
    const Vec hi = graph.anchor_z().rowwise().maxCoeff();
    const double margin = 0.1 * std::max(1e-9, (hi - lo).maxCoeff());
    const std::size_t per_axis = graph.dim() == 1 ? graph_sample_count
                                                  : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(graph_sample_count))));
    Mat samples = graph.sample(std::max<std::size_t>(per_axis, 2), margin);
    rep.graph_samples = static_cast<std::size_t>(samples.cols()) + graph.anchor_count();
    for (std::size_t t = 0; t < rep.selected.size(); ++t) {
      const Vec c = m.point_vec(rep.selected[t]);
      bool clear = true;
      for (Eigen::Index s = 0; s < samples.cols() && clear; ++s)
        if ((samples.col(s) - c).norm() < 6.0 * rep.radii[t]) clear = false;
      for (std::size_t a = 0; a < graph.anchor_count() && clear; ++a)
        if ((graph.anchor_point(a) - c).norm() < 6.0 * rep.radii[t]) clear = false;
      if (!clear) ++rep.kj_failures;
    }
    rep.kj_clear = rep.kj_failures == 0;
  }
  return rep;
}

nlohmann::json to_json(const BetaResult& b) {
  return {{"center", std::vector<double>(b.center.data(), b.center.data() + b.center.size())},
          {"radius", b.radius},
          {"beta", b.beta},
          {"plane_point", std::vector<double>(b.plane.point.data(), b.plane.point.data() + b.plane.point.size())},
          {"plane", format_plane(b.plane.plane)},
          {"degenerate_spectrum", b.degenerate_spectrum}};
}

nlohmann::json to_json(const CoverReport& c) {
  return {{"L", c.lipschitz},
          {"theta", c.theta},
          {"alpha", c.alpha},
          {"off_graph", c.off_graph.size()},
          {"selected", c.selected.size()},
          {"sum_rn", c.sum_rn},
          {"sum_mass", c.sum_mass},
          {"ratio", c.ratio},
          {"disjoint", c.disjoint},
          {"covered", c.covered},
          {"kj_clear", c.kj_clear},
          {"kj_failures", c.kj_failures},
          {"graph_samples", c.graph_samples},
          {"ok", c.ok()}};
}

}  // namespace conical
