#include "conical/energy.hpp"

#include "conical/error.hpp"
#include "conical/lattice.hpp"
#include "conical/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>

namespace conical {
namespace {

// (distance, weight) pairs of atoms in K(x, V, alpha) with |y - x| < outer.
std::vector<std::pair<double, double>> in_cone_atoms(const DiscreteMeasure& m, const double* x,
                                                     const Plane& v, double aperture, double outer) {
  const int d = m.ambient_dim();
  std::vector<double> scratch(static_cast<std::size_t>(d));
  std::vector<std::pair<double, double>> out;
  auto visit = [&](std::size_t j) {
    double dist = 0.0;
    if (in_cone(x, m.point(j), d, v, aperture, scratch.data(), &dist) && dist < outer)
      out.emplace_back(dist, m.weight(j));
  };
  if (std::isfinite(outer)) {
    for (std::size_t j : m.ball_indices(x, outer)) visit(j);
  } else {
    for (std::size_t j = 0; j < m.size(); ++j) visit(j);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double piece(double mass, double np, double p, double a, double b) {
  if (!(b > a) || mass <= 0.0) return 0.0;
  const double tail = std::isfinite(b) ? std::pow(b, -np) : 0.0;
  return std::pow(mass, p) * (std::pow(a, -np) - tail) / np;
}

}  // namespace

void validate(const EnergySpec& spec, const DiscreteMeasure& m) {
  require(spec.aperture > 0.0 && spec.aperture < 1.0, Errc::invalid_params, "aperture must be in (0,1)");
  require(spec.eta > 0.0 && spec.eta < 1.0, Errc::invalid_params, "eta must be in (0,1)");
  require(spec.p >= 1.0, Errc::invalid_params, "exponent p must be >= 1");
  require(spec.outer > 0.0, Errc::invalid_params, "outer scale R must be positive");
  require(spec.direction.ambient_dim() == m.ambient_dim(), Errc::dimension_mismatch,
          "direction plane lives in a different ambient space");
  require(spec.direction.dim() == m.ambient_dim() - m.dim_param(), Errc::dimension_mismatch,
          "direction plane must have dimension d - n");
}

double step_energy(const double* dists, const double* cum, std::size_t count, int n, double p,
                   double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  const double np = n * p;
  // atoms at distance <= lo are inside B(x, r) for every r in (lo, hi)
  std::size_t i = static_cast<std::size_t>(std::upper_bound(dists, dists + count, lo) - dists);
  double mass = i > 0 ? cum[i - 1] : 0.0;
  double a = lo;
  double s = 0.0;
  while (i < count && dists[i] < hi) {
    s += piece(mass, np, p, a, dists[i]);
    a = dists[i];
    while (i < count && dists[i] == a) mass = cum[i++];
  }
  s += piece(mass, np, p, a, hi);
  return s;
}

EnergyBreakdown pointwise_energy(const DiscreteMeasure& m, const Vec& x, const EnergySpec& spec) {
  validate(spec, m);
  require(x.size() == m.ambient_dim(), Errc::dimension_mismatch, "vertex dimension");
  const auto atoms = in_cone_atoms(m, x.data(), spec.direction, spec.aperture, spec.outer);
  EnergyBreakdown out;
  out.in_cone = atoms.size();
  const double np = m.dim_param() * spec.p;
  double mass = 0.0;
  for (std::size_t k = 0; k < atoms.size();) {
    const double r = atoms[k].first;
    while (k < atoms.size() && atoms[k].first == r) mass += atoms[k++].second;
    out.radii.push_back(r);
    out.masses.push_back(mass);
  }
  for (std::size_t k = 0; k < out.radii.size(); ++k) {
    const double b = k + 1 < out.radii.size() ? out.radii[k + 1] : spec.outer;
    out.contributions.push_back(piece(out.masses[k], np, spec.p, out.radii[k], b));
  }
  out.total = pairwise_sum(out.contributions.data(), out.contributions.size());
  return out;
}

double pointwise_energy_at(const DiscreteMeasure& m, std::size_t i, const EnergySpec& spec) {
  const auto atoms = in_cone_atoms(m, m.point(i), spec.direction, spec.aperture, spec.outer);
  std::vector<double> dists(atoms.size()), cum(atoms.size());
  double mass = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    dists[k] = atoms[k].first;
    mass += atoms[k].second;
    cum[k] = mass;
  }
  if (atoms.empty()) return 0.0;
  return step_energy(dists.data(), cum.data(), atoms.size(), m.dim_param(), spec.p, 0.0, spec.outer);
}

std::vector<double> pointwise_energies(const DiscreteMeasure& m, const EnergySpec& spec) {
  validate(spec, m);
  std::vector<double> out(m.size());
  parallel_for(m.size(), [&](std::size_t i) { out[i] = pointwise_energy_at(m, i, spec); });
  return out;
}

double riesz_cone_sum(const DiscreteMeasure& m, const Vec& x, const Plane& v, double aperture) {
  const int d = m.ambient_dim();
  require(x.size() == d && v.ambient_dim() == d, Errc::dimension_mismatch, "vertex/plane dimension");
  require(aperture > 0.0 && aperture < 1.0, Errc::invalid_params, "aperture must be in (0,1)");
  const int n = m.dim_param();
  std::vector<double> terms;
  for (std::size_t j = 0; j < m.size(); ++j) {
    Vec delta = m.point_vec(j) - x;
    const double len = delta.norm();
    if (len == 0.0) continue;
    if ((delta - v.project(delta)).norm() < aperture * len) terms.push_back(m.weight(j) / std::pow(len, n));
  }
  return pairwise_sum(terms.data(), terms.size()) / n;
}

double ball_energy(const DiscreteMeasure& m, const Vec& center, double radius, const EnergySpec& spec) {
  require(radius > 0.0, Errc::invalid_range, "ball radius must be positive");
  require(center.size() == m.ambient_dim(), Errc::dimension_mismatch, "ball center dimension");
  EnergySpec local = spec;
  local.outer = radius;
  validate(local, m);
  const auto idx = m.ball_indices(center, radius);
  std::vector<double> terms(idx.size());
  parallel_for(idx.size(), [&](std::size_t k) {
    terms[k] = m.weight(idx[k]) * pointwise_energy_at(m, idx[k], local);
  });
  return pairwise_sum(terms.data(), terms.size());
}

double total_energy(const DiscreteMeasure& m, const EnergySpec& spec) {
  auto e = pointwise_energies(m, spec);
  for (std::size_t i = 0; i < e.size(); ++i) e[i] *= m.weight(i);
  return pairwise_sum(e.data(), e.size());
}

ConeProfiles::ConeProfiles(const DiscreteMeasure& m, const Plane& v, double aperture) {
  std::vector<std::vector<std::pair<double, double>>> per(m.size());
  parallel_for(m.size(), [&](std::size_t i) { per[i] = in_cone_atoms(m, m.point(i), v, aperture, kInf); });
  offsets_.reserve(m.size() + 1);
  offsets_.push_back(0);
  for (const auto& row : per) {
    double mass = 0.0;
    for (const auto& [dist, w] : row) {
      mass += w;
      dists_.push_back(dist);
      cum_.push_back(mass);
    }
    offsets_.push_back(dists_.size());
  }
}

double ConeProfiles::window_energy(std::size_t atom, int n, double p, double lo, double hi) const {
  const std::size_t b = offsets_[atom];
  const std::size_t e = offsets_[atom + 1];
  if (b == e) return 0.0;
  return step_energy(dists_.data() + b, cum_.data() + b, e - b, n, p, lo, hi);
}

double cube_energy(const Lattice& lattice, std::size_t q, const EnergySpec& spec,
                   const ConeProfiles* profiles) {
  const Cube& c = lattice.cube(q);
  const auto& m = lattice.measure();
  validate(spec, m);
  if (c.members.empty() || !(c.mass > 0.0)) throw Error(Errc::empty_cube, "cube " + std::to_string(q));
  const double lo = spec.eta * c.radius;
  const double hi = c.radius / spec.eta;
  const int n = m.dim_param();
  const auto idx = m.ball_indices(lattice.center_ptr(q), 2.0 * c.big_radius());
  std::vector<double> terms(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const std::size_t i = idx[k];
    double e = 0.0;
    if (profiles) {
      e = profiles->window_energy(i, n, spec.p, lo, hi);
    } else {
      const auto atoms = in_cone_atoms(m, m.point(i), spec.direction, spec.aperture, hi);
      std::vector<double> dists(atoms.size()), cum(atoms.size());
      double mass = 0.0;
      for (std::size_t t = 0; t < atoms.size(); ++t) {
        dists[t] = atoms[t].first;
        mass += atoms[t].second;
        cum[t] = mass;
      }
      e = step_energy(dists.data(), cum.data(), atoms.size(), n, spec.p, lo, hi);
    }
    terms[k] = m.weight(i) * e;
  }
  return pairwise_sum(terms.data(), terms.size()) / c.mass;
}

BpbeReport bpbe_scan(const DiscreteMeasure& m, const std::vector<Ball>& balls, double aperture,
                     double p, double m0, double kappa, int direction_samples, std::uint64_t seed,
                     const std::vector<Plane>& pinned) {
  require(kappa > 0.0 && kappa <= 1.0, Errc::invalid_params, "kappa must be in (0,1]");
  require(m0 > 0.0, Errc::invalid_params, "M0 must be positive");
  require(direction_samples >= 1, Errc::invalid_params, "direction_samples must be >= 1");
  const int d = m.ambient_dim();
  const int n = m.dim_param();
  BpbeReport rep;
  rep.candidates = pinned;
  for (auto& v : sample_grassmannian(d, d - n, direction_samples, seed)) rep.candidates.push_back(std::move(v));

  for (const auto& ball : balls) {
    require(ball.radius > 0.0, Errc::invalid_range, "ball radius must be positive");
    const auto idx = m.ball_indices(ball.center, ball.radius);
    double mass = 0.0;
    for (std::size_t i : idx) mass += m.weight(i);
    BpbeBallReport br;
    br.ball = ball;
    bool have = false;
    for (std::size_t c = 0; c < rep.candidates.size(); ++c) {
      EnergySpec spec{rep.candidates[c], aperture, p, ball.radius, 0.5};
      validate(spec, m);
      std::vector<double> e(idx.size());
      parallel_for(idx.size(), [&](std::size_t k) { e[k] = pointwise_energy_at(m, idx[k], spec); });
      double good = 0.0, weighted = 0.0;
      for (std::size_t k = 0; k < idx.size(); ++k) {
        if (e[k] <= m0) good += m.weight(idx[k]);
        weighted += m.weight(idx[k]) * e[k];
      }
      const double frac = mass > 0.0 ? good / mass : 0.0;
      const double mean = mass > 0.0 ? weighted / mass : 0.0;
      if (!have || frac > br.fraction || (frac == br.fraction && mean < br.mean_energy)) {
        br.best_direction = c;
        br.fraction = frac;
        br.mean_energy = mean;
        have = true;
      }
    }
    br.passed = br.fraction >= kappa;
    rep.all_passed = rep.all_passed && br.passed;
    rep.balls.push_back(std::move(br));
  }
  return rep;
}

std::vector<BmeBallReport> bme_check(const DiscreteMeasure& m, const std::vector<Ball>& balls,
                                     double aperture, double p, double m0,
                                     const std::vector<Plane>& directions) {
  if (directions.size() != m.size())
    throw Error(Errc::missing_direction, "need one direction per atom, got " +
                                             std::to_string(directions.size()) + " for " +
                                             std::to_string(m.size()) + " atoms");
  require(m0 > 0.0, Errc::invalid_params, "M0 must be positive");
  std::vector<BmeBallReport> out;
  for (const auto& ball : balls) {
    require(ball.radius > 0.0, Errc::invalid_range, "ball radius must be positive");
    const auto idx = m.ball_indices(ball.center, ball.radius);
    std::vector<double> terms(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k) {
      EnergySpec spec{directions[idx[k]], aperture, p, ball.radius, 0.5};
      validate(spec, m);
      terms[k] = m.weight(idx[k]) * pointwise_energy_at(m, idx[k], spec);
    }
    double mass = 0.0;
    for (std::size_t i : idx) mass += m.weight(i);
    BmeBallReport r;
    r.ball = ball;
    r.ratio = mass > 0.0 ? pairwise_sum(terms.data(), terms.size()) / mass : 0.0;
    r.passed = r.ratio <= m0;
    out.push_back(std::move(r));
  }
  return out;
}

ProjectionEnergyReport projection_energy_check(const DiscreteMeasure& m, const Plane& v0,
                                               double aperture, double lambda,
                                               int direction_samples, double bin_width,
                                               std::uint64_t seed) {
  const int d = m.ambient_dim();
  const int n = m.dim_param();
  require(bin_width > 0.0, Errc::invalid_params, "bin_width must be positive");
  require(lambda > 0.0, Errc::invalid_params, "lambda must be positive");
  require(direction_samples >= 1, Errc::invalid_params, "direction_samples must be >= 1");
  require(v0.ambient_dim() == d && v0.dim() == n, Errc::dimension_mismatch, "V0 must be an n-plane in R^d");

  ProjectionEnergyReport rep;
  const Plane cone_dir = v0.complement();
  std::vector<double> terms(m.size());
  parallel_for(m.size(), [&](std::size_t i) {
    terms[i] = m.weight(i) * riesz_cone_sum(m, m.point_vec(i), cone_dir, aperture);
  });
  rep.lhs = pairwise_sum(terms.data(), terms.size());

  std::mt19937_64 rng(seed);
  const std::size_t max_attempts = static_cast<std::size_t>(direction_samples) * 1000;
  std::vector<double> norms;
  while (rep.accepted < static_cast<std::size_t>(direction_samples) && rep.attempts < max_attempts) {
    Plane v = sample_grassmannian(d, n, 1, rng())[0];
    ++rep.attempts;
    if (plane_metric(v, v0) > lambda * aperture) continue;
    ++rep.accepted;
    std::map<std::vector<std::int64_t>, double> bins;
    std::vector<std::int64_t> key(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (int k = 0; k < n; ++k) {
        double c = 0.0;
        for (int j = 0; j < d; ++j) c += v.basis()(j, k) * m.point(i)[j];
        key[static_cast<std::size_t>(k)] = static_cast<std::int64_t>(std::floor(c / bin_width));
      }
      bins[key] += m.weight(i);
    }
    double s = 0.0;
    for (const auto& [k, mass] : bins) s += mass * mass;
    norms.push_back(s / std::pow(bin_width, n));
  }
  if (rep.accepted > 0) {
    const double mean = pairwise_sum(norms.data(), norms.size()) / static_cast<double>(norms.size());
    rep.rhs = mean * static_cast<double>(rep.accepted) / static_cast<double>(rep.attempts);
  }
  rep.ratio = rep.rhs > 0.0 ? rep.lhs / rep.rhs : (rep.lhs > 0.0 ? kInf : 0.0);
  return rep;
}

nlohmann::json to_json(const EnergyBreakdown& b) {
  return {{"radii", b.radii},
          {"masses", b.masses},
          {"contributions", b.contributions},
          {"total", b.total},
          {"in_cone", b.in_cone}};
}

nlohmann::json to_json(const BpbeReport& r) {
  nlohmann::json balls = nlohmann::json::array();
  for (const auto& b : r.balls) {
    balls.push_back({{"center", std::vector<double>(b.ball.center.data(), b.ball.center.data() + b.ball.center.size())},
                     {"radius", b.ball.radius},
                     {"best_direction", format_plane(r.candidates[b.best_direction])},
                     {"best_direction_index", b.best_direction},
                     {"fraction", b.fraction},
                     {"mean_energy", b.mean_energy},
                     {"passed", b.passed}});
  }
  return {{"balls", balls},
          {"candidates", r.candidates.size()},
          {"all_passed", r.all_passed},
          {"ball_family", "finite family of balls; the definition quantifies over all balls centered on the support"}};
}

}  // namespace conical
