#include "conical/sio.hpp"

#include "conical/error.hpp"
#include "conical/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace conical {
namespace {

constexpr std::size_t kMaxAtoms = 20000;

// Applies K_c (unweighted kernel matrices restricted to |x_i - x_j| > eps) to
// one input vector per component. Each unordered pair is visited once and
// the oddness k(-x) = -k(x) supplies the transposed entry.
class Interaction {
 public:
  Interaction(const DiscreteMeasure& m, const Kernel& k, double eps)
      : k_(k), n_(m.size()), d_(m.ambient_dim()), c_(k.components()), eps2_(eps * eps) {
    coords_.resize(static_cast<std::size_t>(d_) * n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (int j = 0; j < d_; ++j) coords_[static_cast<std::size_t>(j) * n_ + i] = m.point(i)[j];
    sqrt_w_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) sqrt_w_[i] = std::sqrt(m.weight(i));
    // row blocks of roughly equal pair counts, one per thread
    const std::size_t blocks = std::max<std::size_t>(1, std::min(thread_count(), n_));
    const double total = 0.5 * static_cast<double>(n_) * static_cast<double>(n_ - 1);
    bounds_.push_back(0);
    double acc = 0.0;
    for (std::size_t i = 0; i < n_ && bounds_.size() < blocks; ++i) {
      acc += static_cast<double>(n_ - 1 - i);
      if (acc >= total * static_cast<double>(bounds_.size()) / static_cast<double>(blocks)) bounds_.push_back(i + 1);
    }
    if (bounds_.back() != n_) bounds_.push_back(n_);
  }

  std::size_t size() const { return n_; }

  // y = B v with B = sum_c A_c^T A_c, A_c = W^{1/2} K_c W^{1/2}.
  void apply_normal(const std::vector<double>& v, std::vector<double>& y) const {
    std::vector<std::vector<double>> in(static_cast<std::size_t>(c_)), out;
    for (int c = 0; c < c_; ++c) {
      auto& t = in[static_cast<std::size_t>(c)];
      t.resize(n_);
      for (std::size_t i = 0; i < n_; ++i) t[i] = sqrt_w_[i] * v[i];
    }
    sweep(in, out);
    for (int c = 0; c < c_; ++c) {
      auto& t = in[static_cast<std::size_t>(c)];
      const auto& o = out[static_cast<std::size_t>(c)];
      for (std::size_t i = 0; i < n_; ++i) t[i] = sqrt_w_[i] * sqrt_w_[i] * o[i];
    }
    sweep(in, out);
    y.assign(n_, 0.0);
    for (int c = 0; c < c_; ++c) {
      const auto& o = out[static_cast<std::size_t>(c)];
      for (std::size_t i = 0; i < n_; ++i) y[i] -= sqrt_w_[i] * o[i];
    }
  }

 private:
  void sweep(const std::vector<std::vector<double>>& in, std::vector<std::vector<double>>& out) const {
    const std::size_t blocks = bounds_.size() - 1;
    const auto cs = static_cast<std::size_t>(c_);
    std::vector<std::vector<std::vector<double>>> partial(blocks);
    parallel_for(blocks, [&](std::size_t b) {
      auto& acc = partial[b];
      acc.assign(cs, std::vector<double>(n_, 0.0));
      if (k_.kind == Kernel::Kind::cauchy && d_ == 2) {
        sweep_cauchy(bounds_[b], bounds_[b + 1], in, acc);
      } else {
        sweep_generic(bounds_[b], bounds_[b + 1], in, acc);
      }
    });
    out = std::move(partial[0]);
    for (std::size_t b = 1; b < blocks; ++b)
      for (std::size_t c = 0; c < cs; ++c)
        for (std::size_t i = 0; i < n_; ++i) out[c][i] += partial[b][c][i];
  }

  void sweep_cauchy(std::size_t lo, std::size_t hi, const std::vector<std::vector<double>>& in,
                    std::vector<std::vector<double>>& acc) const {
    const double* xs = coords_.data();
    const double* ys = coords_.data() + n_;
    const double* in0 = in[0].data();
    const double* in1 = in[1].data();
    double* o0 = acc[0].data();
    double* o1 = acc[1].data();
    for (std::size_t i = lo; i < hi; ++i) {
      const double xi = xs[i], yi = ys[i], a = in0[i], b = in1[i];
      double s0 = 0.0, s1 = 0.0;
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double dx = xs[j] - xi;
        const double dy = ys[j] - yi;
        const double r2 = dx * dx + dy * dy;
        const double inv = r2 > eps2_ ? 1.0 / r2 : 0.0;
        const double k0 = dx * inv;
        const double k1 = -dy * inv;
        s0 += k0 * in0[j];
        s1 += k1 * in1[j];
        o0[j] -= k0 * a;
        o1[j] -= k1 * b;
      }
      o0[i] += s0;
      o1[i] += s1;
    }
  }

  void sweep_generic(std::size_t lo, std::size_t hi, const std::vector<std::vector<double>>& in,
                     std::vector<std::vector<double>>& acc) const {
    std::vector<double> delta(static_cast<std::size_t>(d_)), kv(static_cast<std::size_t>(c_));
    for (std::size_t i = lo; i < hi; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) {
        double r2 = 0.0;
        for (int t = 0; t < d_; ++t) {
          const double dt = coords_[static_cast<std::size_t>(t) * n_ + j] - coords_[static_cast<std::size_t>(t) * n_ + i];
          delta[static_cast<std::size_t>(t)] = dt;
          r2 += dt * dt;
        }
        if (!(r2 > eps2_)) continue;
        k_.eval(delta.data(), kv.data());
        for (int c = 0; c < c_; ++c) {
          const auto cc = static_cast<std::size_t>(c);
          acc[cc][i] += kv[cc] * in[cc][j];
          acc[cc][j] -= kv[cc] * in[cc][i];
        }
      }
    }
  }

  const Kernel& k_;
  std::size_t n_;
  int d_;
  int c_;
  double eps2_;
  std::vector<double> coords_;  // d rows of n values
  std::vector<double> sqrt_w_;
  std::vector<std::size_t> bounds_;
};

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void normalize(std::vector<double>& v) {
  const double n = std::sqrt(dot(v, v));
  if (n > 0.0)
    for (double& x : v) x /= n;
}

// All-ones plus a small deterministic wobble; the wobble keeps the start
// from being orthogonal to the top eigenspace on symmetric configurations.
std::vector<double> base_start(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1.0 + 1e-2 * std::sin(1.0 + 0.7 * static_cast<double>(i));
  normalize(v);
  return v;
}

struct Solve {
  double theta = 0.0;  // top eigenvalue of the normal operator
  std::vector<double> vec;
  int iterations = 0;
  bool converged = false;
};

Solve lanczos(const Interaction& op, std::vector<double> start, double tol, int max_iter) {
  const std::size_t n = op.size();
  const int limit = static_cast<int>(std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, max_iter))));
  std::vector<std::vector<double>> q;
  std::vector<double> alpha, beta;
  normalize(start);
  q.push_back(std::move(start));
  Solve out;
  std::vector<double> w;
  Eigen::VectorXd ritz_coeffs;
  for (int k = 0; k < limit; ++k) {
    op.apply_normal(q.back(), w);
    if (k > 0)
      for (std::size_t i = 0; i < n; ++i) w[i] -= beta.back() * q[q.size() - 2][i];
    const double a = dot(q.back(), w);
    alpha.push_back(a);
    for (std::size_t i = 0; i < n; ++i) w[i] -= a * q.back()[i];
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& qq : q) {
        const double c = dot(qq, w);
        for (std::size_t i = 0; i < n; ++i) w[i] -= c * qq[i];
      }
    const double b = std::sqrt(dot(w, w));
    out.iterations = k + 1;

    const auto m = static_cast<Eigen::Index>(alpha.size());
    Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), m);
    Eigen::VectorXd sub(std::max<Eigen::Index>(m - 1, 0));
    for (Eigen::Index t = 0; t + 1 < m; ++t) sub(t) = beta[static_cast<std::size_t>(t)];
    Eigen::SelfAdjointEigenSolver<Mat> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const double theta = es.eigenvalues()(m - 1);
    ritz_coeffs = es.eigenvectors().col(m - 1);
    out.theta = std::max(theta, 0.0);
    const double resid = b * std::abs(ritz_coeffs(m - 1));
    const bool exhausted = b <= 1e-14 * std::max(std::abs(theta), 1e-300) || k + 1 == static_cast<int>(n);
    if (resid <= tol * out.theta || exhausted || out.theta == 0.0) {
      out.converged = true;
      break;
    }
    if (k + 1 == limit) break;
    beta.push_back(b);
    for (double& x : w) x /= b;
    q.push_back(w);
  }
  out.vec.assign(n, 0.0);
  for (Eigen::Index t = 0; t < ritz_coeffs.size(); ++t)
    for (std::size_t i = 0; i < n; ++i) out.vec[i] += ritz_coeffs(t) * q[static_cast<std::size_t>(t)][i];
  return out;
}

Solve power(const Interaction& op, std::vector<double> v, double tol, int max_iter) {
  normalize(v);
  Solve out;
  std::vector<double> w;
  double prev = -1.0;
  for (int it = 0; it < max_iter; ++it) {
    op.apply_normal(v, w);
    out.iterations = it + 1;
    const double theta = dot(v, w);
    const double nrm = std::sqrt(dot(w, w));
    out.theta = std::max(theta, 0.0);
    if (nrm == 0.0) {
      out.converged = true;
      break;
    }
    for (std::size_t i = 0; i < w.size(); ++i) v[i] = w[i] / nrm;
    if (prev >= 0.0 && std::abs(theta - prev) <= tol * theta) {
      out.converged = true;
      break;
    }
    prev = theta;
  }
  out.vec = std::move(v);
  return out;
}

NormEstimate solve_norm(const DiscreteMeasure& m, const Kernel& k, double eps, const NormOptions& opts,
                        std::vector<double>* warm) {
  require(eps > 0.0, Errc::invalid_range, "eps must be positive");
  require(m.ambient_dim() == k.d, Errc::dimension_mismatch, "kernel and measure dimensions differ");
  if (m.size() > kMaxAtoms)
    throw Error(Errc::too_large, std::to_string(m.size()) + " atoms exceeds the limit of " + std::to_string(kMaxAtoms));
  NormEstimate est;
  est.eps = eps;
  if (m.size() < 2) return est;
  Interaction op(m, k, eps);
  std::vector<double> start = base_start(m.size());
  if (warm && warm->size() == m.size()) {
    for (std::size_t i = 0; i < start.size(); ++i) start[i] = (*warm)[i] + 1e-2 * start[i];
  }
  // Power iteration's stopping rule compares successive estimates, so its
  // tolerance is tightened to keep the reported value within `tol`.
  Solve s = opts.method == NormMethod::lanczos ? lanczos(op, start, opts.tol, opts.max_iterations)
                                               : power(op, start, opts.tol * 1e-2, opts.max_iterations);
  est.norm = std::sqrt(s.theta);
  est.iterations = s.iterations;
  est.converged = s.converged;
  if (warm) *warm = std::move(s.vec);
  return est;
}

std::vector<double> pairwise_distances(const DiscreteMeasure& m) {
  const int d = m.ambient_dim();
  std::vector<double> out;
  out.reserve(m.size() * (m.size() - 1) / 2);
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      double s = 0.0;
      for (int t = 0; t < d; ++t) {
        const double dt = m.point(i)[t] - m.point(j)[t];
        s += dt * dt;
      }
      out.push_back(std::sqrt(s));
    }
  return out;
}

}  // namespace

void Kernel::eval(const double* x, double* out) const {
  if (kind == Kind::cauchy) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    out[0] = x[0] / r2;
    out[1] = -x[1] / r2;
    return;
  }
  double r2 = 0.0;
  for (int j = 0; j < d; ++j) r2 += x[j] * x[j];
  const double s = std::pow(r2, -0.5 * (n + 1));
  for (int j = 0; j < d; ++j) out[j] = x[j] * s;
}

Vec Kernel::operator()(const Vec& x) const {
  require(x.size() == d, Errc::dimension_mismatch, "kernel argument dimension");
  Vec out(components());
  eval(x.data(), out.data());
  return out;
}

Kernel cauchy_kernel() {
  // |k''(z)| = 2 / |z|^3 sets the constant; the lower orders are 1.
  return Kernel{Kernel::Kind::cauchy, "cauchy", 1, 2, 2.0};
}

Kernel riesz_kernel(int n, int d) {
  require(n > 0 && n < d, Errc::invalid_params, "riesz kernel needs 0 < n < d");
  Kernel k{Kernel::Kind::riesz, "riesz", n, d, 1.0};
  const auto v = validate_kernel(k, 0x5eed);
  const double worst = std::max({v.measured[0], v.measured[1], v.measured[2]});
  k.ck = std::ceil(worst * 1e6) / 1e6;
  return k;
}

std::vector<Kernel> builtin_kernels(int riesz_n, int riesz_d) {
  return {cauchy_kernel(), riesz_kernel(riesz_n, riesz_d)};
}

KernelValidation validate_kernel(const Kernel& k, std::uint64_t seed, int samples) {
  KernelValidation out;
  const int d = k.d;
  const int c = k.components();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> logr(-3.0, 3.0);
  auto unit = [&] {
    Vec u(d);
    do {
      for (int j = 0; j < d; ++j) u(j) = gauss(rng);
    } while (u.norm() == 0.0);
    return Vec(u / u.norm());
  };

  for (int s = 0; s < samples; ++s) {
    Vec x = unit() * std::pow(10.0, logr(rng));
    Vec a = k(x), b = k(Vec(-x));
    const double err = (a + b).norm() / std::max(1.0, a.norm());
    out.max_odd_error = std::max(out.max_odd_error, err);
  }
  out.odd = out.max_odd_error <= 1e-12;

  std::vector<Vec> dirs;
  for (int j = 0; j < d; ++j) dirs.push_back(Vec::Unit(d, j));
  for (int j = 0; j < 12; ++j) dirs.push_back(unit());
  std::vector<Vec> probes;  // unit vectors for the multilinear norms
  if (d == 2) {
    for (int a = 0; a < 24; ++a) {
      Vec u(2);
      u << std::cos(M_PI * a / 24.0), std::sin(M_PI * a / 24.0);
      probes.push_back(u);
    }
  } else {
    probes = dirs;
  }
  for (int ri = 0; ri <= 24; ++ri) {
    const double r = std::pow(10.0, -3.0 + 0.25 * ri);
    for (const Vec& u : dirs) {
      const Vec x = r * u;
      out.measured[0] = std::max(out.measured[0], k(x).norm() * std::pow(r, k.n));
      const double h1 = 1e-5 * r;
      Mat jac(c, d);
      for (int j = 0; j < d; ++j) {
        const Vec e = Vec::Unit(d, j) * h1;
        jac.col(j) = (k(Vec(x + e)) - k(Vec(x - e))) / (2.0 * h1);
      }
      Eigen::JacobiSVD<Mat> svd(jac);
      out.measured[1] = std::max(out.measured[1], svd.singularValues()(0) * std::pow(r, k.n + 1));
      const double h2 = 1e-3 * r;
      double second = 0.0;
      for (const Vec& p : probes)
        for (const Vec& q : probes) {
          const Vec hp = p * h2, hq = q * h2;
          const Vec dd = (k(Vec(x + hp + hq)) - k(Vec(x + hp - hq)) - k(Vec(x - hp + hq)) + k(Vec(x - hp - hq))) /
                         (4.0 * h2 * h2);
          second = std::max(second, dd.norm());
        }
      out.measured[2] = std::max(out.measured[2], second * std::pow(r, k.n + 2));
    }
  }
  for (double v : out.measured)
    if (v > 1.05 * k.ck) out.decay = false;
  return out;
}

Vec truncated_transform(const DiscreteMeasure& m, const Kernel& k, double eps, const Vec& x) {
  require(eps > 0.0, Errc::invalid_range, "eps must be positive");
  require(x.size() == m.ambient_dim() && k.d == m.ambient_dim(), Errc::dimension_mismatch,
          "point/kernel/measure dimensions");
  Vec out = Vec::Zero(k.components());
  Vec kv(k.components());
  for (std::size_t i = 0; i < m.size(); ++i) {
    Vec delta = m.point_vec(i) - x;
    if (!(delta.norm() > eps)) continue;
    k.eval(delta.data(), kv.data());
    out += m.weight(i) * kv;
  }
  return out;
}

double maximal_transform(const DiscreteMeasure& m, const Kernel& k, const std::vector<double>& grid,
                         const Vec& x) {
  require(x.size() == m.ambient_dim() && k.d == m.ambient_dim(), Errc::dimension_mismatch,
          "point/kernel/measure dimensions");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    require(grid[i] > 0.0, Errc::invalid_range, "grid values must be positive");
    require(i == 0 || grid[i] > grid[i - 1], Errc::invalid_range, "grid must be strictly increasing");
  }
  // Contributions ordered by distance; T_eps is a suffix sum.
  std::vector<std::pair<double, Vec>> terms;
  Vec kv(k.components());
  for (std::size_t i = 0; i < m.size(); ++i) {
    Vec delta = m.point_vec(i) - x;
    const double r = delta.norm();
    if (r == 0.0) continue;
    k.eval(delta.data(), kv.data());
    terms.emplace_back(r, m.weight(i) * kv);
  }
  std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Vec> suffix(terms.size() + 1, Vec::Zero(k.components()));
  for (std::size_t i = terms.size(); i-- > 0;) suffix[i] = suffix[i + 1] + terms[i].second;
  double best = 0.0;
  for (double eps : grid) {
    auto it = std::upper_bound(terms.begin(), terms.end(), eps,
                               [](double e, const auto& t) { return e < t.first; });
    best = std::max(best, suffix[static_cast<std::size_t>(it - terms.begin())].norm());
  }
  return best;
}

std::vector<double> breakpoint_grid(const DiscreteMeasure& m, std::size_t max_values) {
  std::vector<double> grid;
  if (m.size() < 2) return {1.0};
  auto dists = pairwise_distances(m);
  std::sort(dists.begin(), dists.end());
  dists.erase(std::unique(dists.begin(), dists.end()), dists.end());
  if (!dists.empty() && dists.front() == 0.0) dists.erase(dists.begin());
  require(!dists.empty(), Errc::numerical, "all atoms coincide");
  grid.push_back(dists.front() / 2.0);
  grid.insert(grid.end(), dists.begin(), dists.end());
  if (max_values > 1 && grid.size() > max_values) {
    std::vector<double> sub;
    for (std::size_t k = 0; k < max_values; ++k) {
      const auto idx = static_cast<std::size_t>(
          std::llround(static_cast<double>(k) * static_cast<double>(grid.size() - 1) / static_cast<double>(max_values - 1)));
      if (sub.empty() || grid[idx] > sub.back()) sub.push_back(grid[idx]);
    }
    grid = std::move(sub);
  }
  return grid;
}

std::vector<double> log_grid(const DiscreteMeasure& m, std::size_t count) {
  require(count >= 2, Errc::invalid_params, "grid needs at least two values");
  const double lo = m.min_interpoint_distance();
  const double hi = m.diameter();
  require(std::isfinite(lo) && lo > 0.0 && hi > lo, Errc::numerical, "degenerate cloud for a log grid");
  std::vector<double> g(count);
  for (std::size_t k = 0; k < count; ++k)
    g[k] = lo * std::pow(hi / lo, static_cast<double>(k) / static_cast<double>(count - 1));
  return g;
}

std::vector<double> default_grid(const DiscreteMeasure& m, std::size_t max_values) {
  if (m.size() <= 10000) return breakpoint_grid(m, max_values);
  return log_grid(m, max_values == 0 ? 64 : max_values);
}

NormEstimate operator_norm(const DiscreteMeasure& m, const Kernel& k, double eps, const NormOptions& opts) {
  return solve_norm(m, k, eps, opts, nullptr);
}

std::vector<NormEstimate> operator_norms(const DiscreteMeasure& m, const Kernel& k,
                                         const std::vector<double>& grid, const NormOptions& opts) {
  std::vector<NormEstimate> out;
  std::vector<double> warm;
  for (double eps : grid) out.push_back(solve_norm(m, k, eps, opts, &warm));
  return out;
}

GenerationTable norm_vs_generation(const std::vector<DiscreteMeasure>& measures,
                                   const std::vector<std::string>& labels, const Kernel& k,
                                   std::size_t grid_size, const NormOptions& opts) {
  require(labels.size() == measures.size(), Errc::invalid_params, "one label per measure");
  GenerationTable t;
  for (std::size_t g = 0; g < measures.size(); ++g) {
    const auto grid = default_grid(measures[g], grid_size);
    const auto norms = operator_norms(measures[g], k, grid, opts);
    GenerationRow row;
    row.label = labels[g];
    row.atoms = measures[g].size();
    for (const auto& e : norms) {
      row.converged = row.converged && e.converged;
      if (e.norm > row.sup_norm) {
        row.sup_norm = e.norm;
        row.eps_at_sup = e.eps;
      }
    }
    t.rows.push_back(row);
  }
  t.strictly_increasing = !t.rows.empty();
  double lo = kInf, hi = 0.0;
  for (std::size_t g = 0; g < t.rows.size(); ++g) {
    lo = std::min(lo, t.rows[g].sup_norm);
    hi = std::max(hi, t.rows[g].sup_norm);
    if (g > 0) {
      if (t.rows[g].sup_norm > t.rows[g - 1].sup_norm) {
        ++t.increases;
      } else {
        t.strictly_increasing = false;
      }
    }
  }
  t.max_over_min = lo > 0.0 ? hi / lo : kInf;
  return t;
}

nlohmann::json to_json(const GenerationTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"label", r.label},
                    {"atoms", r.atoms},
                    {"sup_norm", r.sup_norm},
                    {"eps_at_sup", r.eps_at_sup},
                    {"converged", r.converged}});
  return {{"rows", rows},
          {"strictly_increasing", t.strictly_increasing},
          {"max_over_min", t.max_over_min},
          {"increases", t.increases}};
}

}  // namespace conical
