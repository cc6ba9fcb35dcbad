#include "conical/lattice.hpp"

#include "conical/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace conical {
namespace {

double dist(const double* a, const double* b, int d) {
  double s = 0.0;
  for (int k = 0; k < d; ++k) {
    const double t = a[k] - b[k];
    s += t * t;
  }
  return std::sqrt(s);
}

struct KeyHash {
  std::size_t operator()(const std::vector<std::int64_t>& k) const noexcept {
    std::size_t h = 1469598103934665603ull;
    for (auto v : k) {
      h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
    }
    return h;
  }
};

// Hash grid over chosen centers, cell = separation distance, so any center
// closer than `sep` lives in one of the 3^d neighbouring cells.
class CenterGrid {
 public:
  CenterGrid(const DiscreteMeasure& m, double sep) : m_(m), sep_(sep), d_(m.ambient_dim()) {}

  bool has_center_closer_than(const double* p) const {
    auto base = key(p);
    std::vector<std::int64_t> cur(base.size());
    std::vector<int> off(static_cast<std::size_t>(d_), -1);
    while (true) {
      for (int j = 0; j < d_; ++j) cur[static_cast<std::size_t>(j)] = base[static_cast<std::size_t>(j)] + off[static_cast<std::size_t>(j)];
      auto it = cells_.find(cur);
      if (it != cells_.end()) {
        for (std::size_t c : it->second)
          if (dist(m_.point(c), p, d_) < sep_) return true;
      }
      int j = 0;
      while (j < d_ && off[static_cast<std::size_t>(j)] == 1) off[static_cast<std::size_t>(j++)] = -1;
      if (j == d_) break;
      ++off[static_cast<std::size_t>(j)];
    }
    return false;
  }

  void add(std::size_t atom) { cells_[key(m_.point(atom))].push_back(atom); }

 private:
  std::vector<std::int64_t> key(const double* p) const {
    std::vector<std::int64_t> k(static_cast<std::size_t>(d_));
    for (int j = 0; j < d_; ++j) k[static_cast<std::size_t>(j)] = static_cast<std::int64_t>(std::floor(p[j] / sep_));
    return k;
  }

  const DiscreteMeasure& m_;
  double sep_;
  int d_;
  std::unordered_map<std::vector<std::int64_t>, std::vector<std::size_t>, KeyHash> cells_;
};

}  // namespace

const Cube& Lattice::cube(std::size_t id) const {
  if (id >= cubes_.size()) throw Error(Errc::cube_not_found, "cube id " + std::to_string(id));
  return cubes_[id];
}

double Lattice::side_length(std::size_t id) const {
  return 56.0 * params_.c0 * std::pow(params_.a0, -cube(id).level);
}

std::size_t Lattice::cube_of(std::size_t atom, int level) const {
  require(level >= 0 && level <= depth(), Errc::invalid_range, "level out of range");
  require(atom < measure_.size(), Errc::invalid_range, "atom index out of range");
  return atom_cube_[static_cast<std::size_t>(level)][atom];
}

bool Lattice::is_subcube(std::size_t q, std::size_t p) const {
  const Cube& cq = cube(q);
  const Cube& cp = cube(p);
  if (cq.level < cp.level) return false;
  return atom_cube_[static_cast<std::size_t>(cp.level)][cq.center_atom] == p;
}

int auto_depth(const DiscreteMeasure& normalized, double a0) {
  if (normalized.size() < 2) return 1;
  const double delta = normalized.min_interpoint_distance();
  if (!(delta > 0.0) || !std::isfinite(delta)) return 1;
  int k = static_cast<int>(std::ceil(std::log(10.0 / delta) / std::log(a0)));
  // guard against rounding at the boundary
  while (10.0 * std::pow(a0, -k) > delta) ++k;
  return std::clamp(k, 1, 40);
}

Lattice build_lattice(const DiscreteMeasure& m, LatticeParams params) {
  require(params.c0 > 1.0, Errc::invalid_params, "C0 must exceed 1");
  require(params.a0 > 2.0 * params.c0, Errc::invalid_params, "A0 must exceed 2 C0");
  require(params.max_depth >= 0, Errc::invalid_params, "max_depth must be >= 1 (0 = auto)");

  // Normalize to diameter <= 1. Exact diameter for moderate clouds, bounding
  // box diagonal (an upper bound) beyond that.
  Vec lo = m.points().rowwise().minCoeff();
  Vec hi = m.points().rowwise().maxCoeff();
  double diam = m.size() <= 4096 ? m.diameter() : (hi - lo).norm();
  double scale = diam > 0.0 ? 1.0 / diam : 1.0;
  Lattice lat(m.transformed(lo, scale));
  lat.shift_ = lo;
  lat.scale_ = scale;
  if (params.max_depth == 0) params.max_depth = auto_depth(lat.measure_, params.a0);
  lat.params_ = params;

  const DiscreteMeasure& mu = lat.measure_;
  const std::size_t n_atoms = mu.size();
  const int d = mu.ambient_dim();

  Cube root;
  root.id = 0;
  root.level = 0;
  root.center_atom = 0;
  root.radius = params.c0;
  root.members.resize(n_atoms);
  for (std::size_t i = 0; i < n_atoms; ++i) root.members[i] = i;
  lat.cubes_.push_back(std::move(root));
  lat.levels_.push_back({0});
  lat.atom_cube_.push_back(std::vector<std::size_t>(n_atoms, 0));

  for (int k = 1; k <= params.max_depth; ++k) {
    const double r = std::pow(params.a0, -k);
    const double sep = 10.0 * r;
    CenterGrid grid(mu, sep);
    const auto& parents = lat.levels_.back();
    std::vector<std::vector<std::size_t>> centers(parents.size());
    std::vector<char> is_center(n_atoms, 0);
    for (std::size_t pi = 0; pi < parents.size(); ++pi) {
      const std::size_t c = lat.cubes_[parents[pi]].center_atom;
      centers[pi].push_back(c);
      is_center[c] = 1;
      grid.add(c);
    }
    for (std::size_t pi = 0; pi < parents.size(); ++pi) {
      for (std::size_t a : lat.cubes_[parents[pi]].members) {
        if (is_center[a]) continue;
        if (grid.has_center_closer_than(mu.point(a))) continue;
        centers[pi].push_back(a);
        is_center[a] = 1;
        grid.add(a);
      }
    }

    std::vector<std::size_t> level_ids;
    std::vector<std::size_t> owner(n_atoms, 0);
    for (std::size_t pi = 0; pi < parents.size(); ++pi) {
      const std::size_t pid = parents[pi];
      const std::size_t first = lat.cubes_.size();
      for (std::size_t c : centers[pi]) {
        Cube q;
        q.id = lat.cubes_.size();
        q.level = k;
        q.center_atom = c;
        q.radius = r;
        q.parent = pid;
        lat.cubes_[pid].children.push_back(q.id);
        level_ids.push_back(q.id);
        lat.cubes_.push_back(std::move(q));
      }
      for (std::size_t a : lat.cubes_[pid].members) {
        std::size_t best = first;
        double best_d = std::numeric_limits<double>::infinity();
        std::size_t best_atom = std::numeric_limits<std::size_t>::max();
        for (std::size_t t = 0; t < centers[pi].size(); ++t) {
          const std::size_t c = centers[pi][t];
          const double dd = dist(mu.point(c), mu.point(a), d);
          if (dd < best_d || (dd == best_d && c < best_atom)) {
            best_d = dd;
            best_atom = c;
            best = first + t;
          }
        }
        lat.cubes_[best].members.push_back(a);
        owner[a] = best;
      }
    }
    lat.levels_.push_back(std::move(level_ids));
    lat.atom_cube_.push_back(std::move(owner));
  }

  for (auto& q : lat.cubes_) {
    double s = 0.0;
    double ext = 0.0;
    for (std::size_t a : q.members) {
      s += mu.weight(a);
      ext = std::max(ext, dist(mu.point(a), mu.point(q.center_atom), d));
    }
    q.mass = s;
    q.extent = ext;
  }
  doubling_flags(lat);
  return lat;
}

void doubling_flags(Lattice& lattice) {
  const auto& mu = lattice.measure_;
  const double c0 = lattice.params_.c0;
  for (auto& q : lattice.cubes_) {
    const double* x = mu.point(q.center_atom);
    const double inner = ball_mass(mu, x, q.radius);
    const double outer = ball_mass(mu, x, 100.0 * q.radius);
    q.doubling = outer <= c0 * inner;
  }
}

MaximalDoubling maximal_doubling(const Lattice& lattice, std::size_t q) {
  const Cube& top = lattice.cube(q);
  MaximalDoubling out;
  std::vector<std::size_t> stack(top.children.rbegin(), top.children.rend());
  while (!stack.empty()) {
    const std::size_t id = stack.back();
    stack.pop_back();
    const Cube& c = lattice.cubes()[id];
    if (c.doubling) {
      out.cubes.push_back(id);
    } else if (c.children.empty()) {
      for (std::size_t a : c.members) {
        out.uncovered_atoms.push_back(a);
        out.uncovered_mass += lattice.measure().weight(a);
      }
    } else {
      for (auto it = c.children.rbegin(); it != c.children.rend(); ++it) stack.push_back(*it);
    }
  }
  std::sort(out.cubes.begin(), out.cubes.end());
  std::sort(out.uncovered_atoms.begin(), out.uncovered_atoms.end());
  return out;
}

double delta_mu(const Lattice& lattice, std::size_t q, std::size_t s) {
  if (!lattice.is_subcube(q, s)) throw Error(Errc::not_nested, "delta_mu needs Q inside S");
  const auto& mu = lattice.measure();
  const int d = mu.ambient_dim();
  const double* xq = lattice.center_ptr(q);
  const double rq = 2.0 * lattice.cube(q).big_radius();
  const double rs = 2.0 * lattice.cube(s).big_radius();
  double sum = 0.0;
  for (std::size_t a : mu.ball_indices(lattice.center_ptr(s), rs)) {
    const double t = dist(mu.point(a), xq, d);
    if (t < rq) continue;
    sum += mu.weight(a) / std::pow(t, mu.dim_param());
  }
  return sum;
}

DensityDropReport density_drop_check(const Lattice& lattice, std::size_t q, std::size_t r) {
  const Cube& cq = lattice.cube(q);
  const Cube& cr = lattice.cube(r);
  if (q == r || !lattice.is_subcube(q, r))
    throw Error(Errc::not_nested, "density_drop_check needs Q strictly inside R");
  for (auto p = cq.parent; p && *p != r; p = lattice.cube(*p).parent) {
    if (lattice.cube(*p).doubling)
      throw Error(Errc::intermediate_doubling, "cube " + std::to_string(*p) + " between Q and R is doubling");
  }
  const auto& mu = lattice.measure();
  const int n = mu.dim_param();
  const int d = mu.ambient_dim();
  const double c0 = lattice.params().c0;
  const double a0 = lattice.params().a0;
  auto theta100 = [&](const Cube& c) {
    const double rad = 100.0 * c.radius;
    return ball_mass(mu, mu.point(c.center_atom), rad) / std::pow(rad, n);
  };
  DensityDropReport rep;
  rep.steps = cq.level - cr.level - 1;
  rep.lhs = theta100(cq);
  const double base = std::pow(c0 * a0, d) * theta100(cr);
  rep.rhs = base * std::pow(a0, -9.0 * d * rep.steps);
  rep.holds = rep.lhs <= rep.rhs;
  rep.achieved_exponent = rep.steps > 0
                              ? -std::log(rep.lhs / base) / (std::log(a0) * d * rep.steps)
                              : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

LatticeReport check_lattice(const Lattice& lattice) {
  LatticeReport rep;
  const auto& mu = lattice.measure();
  const int d = mu.ambient_dim();
  const double c0 = lattice.params().c0;
  const double a0 = lattice.params().a0;
  for (std::size_t lvl = 0; lvl < lattice.levels().size(); ++lvl) {
    const auto& ids = lattice.levels()[lvl];
    std::vector<int> seen(mu.size(), 0);
    for (std::size_t id : ids) {
      const Cube& q = lattice.cubes()[id];
      for (std::size_t a : q.members) ++seen[a];
      const double lo = std::pow(a0, -static_cast<double>(lvl));
      if (q.radius < lo || q.radius > c0 * lo) rep.radius_bounds = false;
      if (q.parent) {
        const Cube& p = lattice.cubes()[*q.parent];
        if (!std::includes(p.members.begin(), p.members.end(), q.members.begin(), q.members.end()))
          rep.nesting = false;
        const double gap = dist(mu.point(q.center_atom), mu.point(p.center_atom), d);
        if (gap + q.big_radius() > p.big_radius()) ++rep.ball_nesting_failures;
      }
      if (std::find(q.members.begin(), q.members.end(), q.center_atom) == q.members.end())
        rep.nesting = false;
      for (std::size_t a : mu.ball_indices(mu.point(q.center_atom), q.radius))
        if (!std::binary_search(q.members.begin(), q.members.end(), a)) {
          ++rep.inner_containment_failures;
          break;
        }
      for (std::size_t a : q.members)
        if (dist(mu.point(a), mu.point(q.center_atom), d) >= q.big_radius()) {
          ++rep.outer_containment_failures;
          break;
        }
    }
    for (int s : seen)
      if (s != 1) rep.partition = false;
    for (std::size_t i = 0; i < ids.size(); ++i)
      for (std::size_t j = i + 1; j < ids.size(); ++j) {
        const Cube& a = lattice.cubes()[ids[i]];
        const Cube& b = lattice.cubes()[ids[j]];
        if (dist(mu.point(a.center_atom), mu.point(b.center_atom), d) < 5.0 * (a.radius + b.radius))
          rep.disjoint_5b = false;
      }
  }
  return rep;
}

nlohmann::json lattice_to_json(const Lattice& lattice, bool with_members) {
  nlohmann::json cubes = nlohmann::json::array();
  for (const auto& q : lattice.cubes()) {
    nlohmann::json c;
    c["id"] = q.id;
    c["level"] = q.level;
    Vec ctr = lattice.center(q.id);
    c["center"] = std::vector<double>(ctr.data(), ctr.data() + ctr.size());
    c["r"] = q.radius;
    c["parent"] = q.parent ? nlohmann::json(*q.parent) : nlohmann::json(nullptr);
    c["children"] = q.children;
    c["members_count"] = q.members.size();
    c["doubling"] = q.doubling;
    if (with_members) c["members"] = q.members;
    cubes.push_back(std::move(c));
  }
  nlohmann::json out;
  out["C0"] = lattice.params().c0;
  out["A0"] = lattice.params().a0;
  out["depth"] = lattice.depth();
  out["scale"] = lattice.scale();
  out["shift"] = std::vector<double>(lattice.shift().data(), lattice.shift().data() + lattice.shift().size());
  out["cubes"] = std::move(cubes);
  return out;
}

nlohmann::json to_json(const LatticeReport& r) {
  return {{"partition", r.partition},
          {"nesting", r.nesting},
          {"disjoint_5B", r.disjoint_5b},
          {"radius_bounds", r.radius_bounds},
          {"inner_containment_failures", r.inner_containment_failures},
          {"outer_containment_failures", r.outer_containment_failures},
          {"ball_nesting_failures", r.ball_nesting_failures}};
}

}  // namespace conical
