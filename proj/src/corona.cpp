#include "conical/corona.hpp"

#include "conical/error.hpp"
#include "conical/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>

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

// dist(Q, P) <= thr on member atoms, with center/extent bounds first.
bool cubes_within(const Lattice& lat, std::size_t q, std::size_t p, double thr) {
  const auto& m = lat.measure();
  const int d = m.ambient_dim();
  const Cube& a = lat.cube(q);
  const Cube& b = lat.cube(p);
  const double cc = dist(m.point(a.center_atom), m.point(b.center_atom), d);
  if (cc <= thr) return true;
  if (cc - a.extent - b.extent > thr) return false;
  return cube_distance(lat, q, p) <= thr;
}

bool contains_sorted(const std::vector<std::size_t>& v, std::size_t x) {
  return std::binary_search(v.begin(), v.end(), x);
}

}  // namespace

CoronaParams resolve(CoronaParams p, int ambient_dim, int dim_param) {
  require(p.alpha > 0.0 && p.alpha < 1.0, Errc::invalid_params, "alpha must be in (0,1)");
  require(p.p >= 1.0, Errc::invalid_params, "p must be >= 1");
  if (p.M == 0.0) p.M = 4.0 / p.alpha;
  if (p.t == 0.0) p.t = 10.0 * p.M;
  if (p.Lambda == 0.0) p.Lambda = 4.0 * p.M;
  require(p.tau > 0.0 && p.tau < 1.0 && p.A > 1.0, Errc::invalid_params, "need 0 < tau < 1 < A");
  require(p.eps >= 0.0 && p.eps < 1.0, Errc::invalid_params, "eps must be in [0,1)");
  require(p.eta > 0.0 && p.eta < 1.0, Errc::invalid_params, "eta must be in (0,1)");
  require(p.M > 1.0, Errc::invalid_params, "M must exceed 1");
  require(p.t > p.M, Errc::invalid_params, "t must exceed M");
  require(p.Lambda > 2.0 * p.M, Errc::invalid_params, "Lambda must exceed 2M");
  require(p.growth_samples >= 1, Errc::invalid_params, "growth_samples must be positive");
  if (!p.direction) {
    std::vector<int> axes;
    for (int k = dim_param; k < ambient_dim; ++k) axes.push_back(k);
    p.direction = axis_plane(ambient_dim, axes);
  }
  require(p.direction->ambient_dim() == ambient_dim && p.direction->dim() == ambient_dim - dim_param,
          Errc::dimension_mismatch, "direction plane must have dimension d - n");
  return p;
}

std::vector<std::size_t> TreeResult::stops() const {
  std::vector<std::size_t> s;
  s.insert(s.end(), bce.begin(), bce.end());
  s.insert(s.end(), hd.begin(), hd.end());
  s.insert(s.end(), ld.begin(), ld.end());
  std::sort(s.begin(), s.end());
  return s;
}

bool TreeVerification::ok() const {
  return anchors_on_graph && good_on_graph && lower_density && energy_controlled && hd_doubling &&
         stop_disjoint && stop_maximal && relabel_stable && anchors_separated;
}

bool CoronaVerification::ok() const {
  if (!partition) return false;
  for (const auto& t : trees)
    if (!t.ok()) return false;
  return true;
}

double theta_2b(const Lattice& lattice, std::size_t q) {
  const Cube& c = lattice.cube(q);
  const double rad = 2.0 * c.big_radius();
  return ball_mass(lattice.measure(), lattice.center_ptr(q), rad) /
         std::pow(rad, lattice.measure().dim_param());
}

double cube_distance(const Lattice& lattice, std::size_t q, std::size_t p) {
  const auto& m = lattice.measure();
  const int d = m.ambient_dim();
  double best = kInf;
  for (std::size_t a : lattice.cube(q).members)
    for (std::size_t b : lattice.cube(p).members) best = std::min(best, dist(m.point(a), m.point(b), d));
  return best;
}

bool t_neighbours(const Lattice& lattice, std::size_t q, std::size_t p, double t) {
  const double rq = lattice.cube(q).radius;
  const double rp = lattice.cube(p).radius;
  if (rp < rq / t || rp > t * rq) return false;
  return cubes_within(lattice, q, p, t * (rq + rp));
}

bool key_cone_exclusion(const Lattice& lattice, std::size_t q, std::size_t p, const Plane& v,
                        double alpha, double m) {
  const Cube& cq = lattice.cube(q);
  const Cube& cp = lattice.cube(p);
  const auto& mu = lattice.measure();
  const int d = mu.ambient_dim();
  if (cube_distance(lattice, q, p) < m * cp.radius) return false;
  const double far = m * cq.big_radius();
  std::vector<double> scratch(static_cast<std::size_t>(d));
  for (std::size_t y : cp.members) {
    if (dist(mu.point(y), mu.point(cq.center_atom), d) < far) continue;
    for (std::size_t x : cq.members) {
      double len = 0.0;
      if (in_cone(mu.point(x), mu.point(y), d, v, alpha / 2.0, scratch.data(), &len)) return true;
    }
  }
  return false;
}

SeparatedFamilies separated_families(const Lattice& lattice, std::vector<std::size_t> stop_cubes,
                                     double t, double m, const std::vector<std::size_t>& good) {
  std::sort(stop_cubes.begin(), stop_cubes.end(), [&](std::size_t a, std::size_t b) {
    const int la = lattice.cube(a).level, lb = lattice.cube(b).level;
    return la != lb ? la < lb : a < b;
  });
  SeparatedFamilies out;
  for (std::size_t q : stop_cubes) {
    bool clash = false;
    for (std::size_t p : out.sep)
      if (t_neighbours(lattice, q, p, t)) {
        clash = true;
        break;
      }
    if (!clash) out.sep.push_back(q);
  }

  const auto& mu = lattice.measure();
  const int d = mu.ambient_dim();
  std::vector<char> is_good(mu.size(), 0);
  for (std::size_t g : good) is_good[g] = 1;
  auto rho = [&](std::size_t q) { return 2.0 * m * lattice.cube(q).big_radius(); };
  for (std::size_t q : out.sep) {
    bool hits_good = false;
    for (std::size_t a : mu.ball_indices(lattice.center_ptr(q), rho(q)))
      if (is_good[a]) {
        hits_good = true;
        break;
      }
    if (hits_good) continue;
    bool swallows = false;
    for (std::size_t p : out.sep) {
      if (p == q) continue;
      if (dist(lattice.center_ptr(p), lattice.center_ptr(q), d) + rho(p) <= rho(q)) {
        swallows = true;
        break;
      }
    }
    if (!swallows) out.sep_star.push_back(q);
  }
  std::sort(out.sep.begin(), out.sep.end());
  std::sort(out.sep_star.begin(), out.sep_star.end());
  return out;
}

Corona::Corona(const Lattice& lattice, CoronaParams params)
    : lattice_(lattice),
      params_(resolve(std::move(params), lattice.measure().ambient_dim(), lattice.measure().dim_param())),
      spec_{*params_.direction, params_.alpha, params_.p, kInf, params_.eta} {
  validate(spec_, lattice_.measure());
  const ConeProfiles profiles(lattice_.measure(), spec_.direction, spec_.aperture);
  const std::size_t count = lattice_.cubes().size();
  energy_.assign(count, 0.0);
  theta_.assign(count, 0.0);
  parallel_for(count, [&](std::size_t q) {
    energy_[q] = cube_energy(lattice_, q, spec_, &profiles);
    theta_[q] = theta_2b(lattice_, q);
  });
}

TreeResult Corona::stopping_decomposition(std::size_t r) const {
  const Cube& root = lattice_.cube(r);
  if (!root.doubling) throw Error(Errc::not_doubling_root, "cube " + std::to_string(r) + " is not doubling");
  TreeResult out;
  out.root = r;
  out.theta_root = theta_[r];
  const double threshold = params_.eps * std::pow(out.theta_root, params_.p);

  std::vector<std::pair<std::size_t, double>> stack{{r, 0.0}};
  while (!stack.empty()) {
    auto [q, above] = stack.back();
    stack.pop_back();
    const Cube& c = lattice_.cubes()[q];
    const double acc = above + energy_[q];
    out.tree.push_back(q);
    if (acc > threshold) {
      out.bce.push_back(q);
    } else if (c.doubling && theta_[q] > params_.A * out.theta_root) {
      out.hd.push_back(q);
    } else if (theta_[q] < params_.tau * out.theta_root) {
      out.ld.push_back(q);
    } else {
      for (auto it = c.children.rbegin(); it != c.children.rend(); ++it) stack.emplace_back(*it, acc);
    }
  }
  std::sort(out.tree.begin(), out.tree.end());
  std::sort(out.bce.begin(), out.bce.end());
  std::sort(out.hd.begin(), out.hd.end());
  std::sort(out.ld.begin(), out.ld.end());

  const auto& mu = lattice_.measure();
  std::vector<char> stopped(mu.size(), 0);
  double hd_mass = 0.0, ld_mass = 0.0;
  for (std::size_t q : out.hd) hd_mass += lattice_.cube(q).mass;
  for (std::size_t q : out.ld) ld_mass += lattice_.cube(q).mass;
  for (std::size_t q : out.stops())
    for (std::size_t a : lattice_.cube(q).members) stopped[a] = 1;
  for (std::size_t a : root.members)
    if (!stopped[a]) out.good.push_back(a);
  out.ld_mass_fraction = ld_mass / root.mass;
  out.id_cube = hd_mass >= root.mass / 2.0;
  return out;
}

void Corona::close_tree(TreeResult& tree) const {
  std::set<std::size_t> next;
  for (std::size_t q : tree.stops())
    for (std::size_t c : maximal_doubling(lattice_, q).cubes) next.insert(c);
  tree.next.assign(next.begin(), next.end());
  tree.tr.clear();
  std::vector<std::size_t> stack{tree.root};
  while (!stack.empty()) {
    const std::size_t q = stack.back();
    stack.pop_back();
    if (next.count(q)) continue;
    tree.tr.push_back(q);
    for (std::size_t c : lattice_.cube(q).children) stack.push_back(c);
  }
  std::sort(tree.tr.begin(), tree.tr.end());
}

void Corona::fit_graph(TreeResult& tree) const {
  auto fam = separated_families(lattice_, tree.stops(), params_.t, params_.M, tree.good);
  tree.sep = std::move(fam.sep);
  tree.sep_star = std::move(fam.sep_star);

  // Priority: the good set first, then Sep* centers. A candidate inside the
  // half-aperture cone of an accepted anchor is dropped and recorded.
  std::vector<std::size_t> candidates = tree.good;
  for (std::size_t q : tree.sep_star) candidates.push_back(lattice_.cube(q).center_atom);
  const auto& mu = lattice_.measure();
  const int d = mu.ambient_dim();
  std::vector<double> scratch(static_cast<std::size_t>(d));
  tree.anchors.clear();
  tree.dropped_anchors.clear();
  tree.violations.clear();
  for (std::size_t a : candidates) {
    bool ok = true;
    for (std::size_t b : tree.anchors) {
      double len = 0.0;
      if (in_cone(mu.point(b), mu.point(a), d, spec_.direction, params_.alpha / 2.0, scratch.data(), &len)) {
        tree.violations.emplace_back(b, a);
        ok = false;
        break;
      }
    }
    if (ok) {
      tree.anchors.push_back(a);
    } else {
      tree.dropped_anchors.push_back(a);
    }
  }
  tree.graph.reset();
  if (tree.anchors.empty()) return;
  Mat pts(d, static_cast<Eigen::Index>(tree.anchors.size()));
  for (std::size_t k = 0; k < tree.anchors.size(); ++k)
    pts.col(static_cast<Eigen::Index>(k)) = mu.point_vec(tree.anchors[k]);
  tree.graph = fit_lipschitz_graph(pts, spec_.direction, params_.alpha);
}

CoronaResult Corona::build_top() const {
  CoronaResult res;
  res.params = params_;
  std::deque<std::size_t> queue{lattice_.root()};
  while (!queue.empty()) {
    const std::size_t r = queue.front();
    queue.pop_front();
    TreeResult tree = stopping_decomposition(r);
    close_tree(tree);
    fit_graph(tree);
    for (std::size_t q : tree.next) queue.push_back(q);
    res.trees.push_back(std::move(tree));
  }
  std::sort(res.trees.begin(), res.trees.end(),
            [](const TreeResult& a, const TreeResult& b) { return a.root < b.root; });

  const auto& mu = lattice_.measure();
  PackingLedger& led = res.ledger;
  std::vector<double> terms;
  for (const auto& t : res.trees)
    terms.push_back(std::pow(t.theta_root, params_.p) * lattice_.cube(t.root).mass);
  led.top_sum = pairwise_sum(terms.data(), terms.size());
  led.top_count = res.trees.size();
  led.mass = mu.total_mass();
  led.c1 = growth_constant(mu, 1.0, params_.growth_samples, params_.seed).c1;
  led.energy_total = total_energy(mu, spec_);
  led.ratio = led.top_sum / (std::pow(led.c1, params_.p) * led.mass + led.energy_total);
  return res;
}

CoronaVerification Corona::verify(const CoronaResult& result) const {
  CoronaVerification out;
  const auto& mu = lattice_.measure();
  constexpr double kGraphTol = 1e-9;

  std::vector<int> owners(lattice_.cubes().size(), 0);
  for (const auto& t : result.trees)
    for (std::size_t q : t.tr) ++owners[q];
  for (int c : owners)
    if (c != 1) out.partition = false;

  for (const auto& t : result.trees) {
    TreeVerification v;
    v.root = t.root;
    const auto stops = t.stops();
    const double theta_r = t.theta_root;
    const double threshold = params_.eps * std::pow(theta_r, params_.p);

    TreeResult again = stopping_decomposition(t.root);
    v.relabel_stable = again.tree == t.tree && again.bce == t.bce && again.hd == t.hd && again.ld == t.ld;

    for (std::size_t q : t.hd)
      if (!lattice_.cube(q).doubling) v.hd_doubling = false;

    for (std::size_t q : t.tree) {
      v.max_density_ratio_tree = std::max(v.max_density_ratio_tree, theta_[q] / theta_r);
      if (contains_sorted(stops, q)) continue;
      if (params_.tau * theta_r > theta_[q]) v.lower_density = false;
      if (lattice_.cube(q).doubling && theta_[q] > params_.A * theta_r) v.lower_density = false;
      double acc = 0.0;
      for (std::optional<std::size_t> p = q;; p = lattice_.cube(*p).parent) {
        acc += energy_[*p];
        if (*p == t.root) break;
      }
      if (acc > threshold) v.energy_controlled = false;
    }
    for (std::size_t q : t.tr) v.max_density_ratio_tr = std::max(v.max_density_ratio_tr, theta_[q] / theta_r);

    for (std::size_t i = 0; i < stops.size(); ++i) {
      for (std::size_t j = i + 1; j < stops.size(); ++j)
        if (lattice_.is_subcube(stops[i], stops[j]) || lattice_.is_subcube(stops[j], stops[i]))
          v.stop_disjoint = false;
      for (auto p = lattice_.cube(stops[i]).parent; stops[i] != t.root && p; p = lattice_.cube(*p).parent) {
        if (!contains_sorted(t.tree, *p) || contains_sorted(stops, *p)) v.stop_maximal = false;
        if (*p == t.root) break;
      }
    }

    if (t.graph) {
      for (std::size_t a : t.anchors)
        if (t.graph->distance(mu.point_vec(a)) > kGraphTol) v.anchors_on_graph = false;
      for (std::size_t a : t.good) {
        const double gd = t.graph->distance(mu.point_vec(a));
        v.max_good_distance = std::max(v.max_good_distance, gd);
        if (gd > kGraphTol) v.good_on_graph = false;
      }
      Mat pts(mu.ambient_dim(), static_cast<Eigen::Index>(t.anchors.size()));
      for (std::size_t k = 0; k < t.anchors.size(); ++k)
        pts.col(static_cast<Eigen::Index>(k)) = mu.point_vec(t.anchors[k]);
      v.anchors_separated = half_cone_violations(pts, spec_.direction, params_.alpha).empty();
      std::size_t near = 0;
      for (std::size_t q : t.tree)
        if (t.graph->distance(lattice_.center(q)) < params_.Lambda * lattice_.cube(q).big_radius()) ++near;
      v.proximity_fraction = t.tree.empty() ? 0.0 : static_cast<double>(near) / static_cast<double>(t.tree.size());
    } else {
      v.good_on_graph = t.good.empty();
    }
    out.trees.push_back(v);
  }
  return out;
}

nlohmann::json to_json(const CoronaParams& p) {
  nlohmann::json j = {{"A", p.A},           {"tau", p.tau},   {"eps", p.eps},
                      {"eta", p.eta},       {"M", p.M},       {"t", p.t},
                      {"Lambda", p.Lambda}, {"alpha", p.alpha}, {"p", p.p},
                      {"C0", p.lattice.c0}, {"A0", p.lattice.a0}, {"max_depth", p.lattice.max_depth},
                      {"seed", p.seed},     {"growth_samples", p.growth_samples}};
  if (p.direction) j["plane"] = format_plane(*p.direction);
  return j;
}

nlohmann::json to_json(const CoronaResult& r, bool full) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : r.trees) {
    nlohmann::json j = {{"root", t.root},
                        {"theta_root", t.theta_root},
                        {"tree_size", t.tree.size()},
                        {"tr_size", t.tr.size()},
                        {"bce", t.bce.size()},
                        {"hd", t.hd.size()},
                        {"ld", t.ld.size()},
                        {"next", t.next.size()},
                        {"good_atoms", t.good.size()},
                        {"sep", t.sep.size()},
                        {"sep_star", t.sep_star.size()},
                        {"anchors", t.anchors.size()},
                        {"dropped_anchors", t.dropped_anchors.size()},
                        {"ld_mass_fraction", t.ld_mass_fraction},
                        {"id_cube", t.id_cube}};
    if (t.graph) {
      j["graph_L"] = t.graph->lipschitz();
      j["graph_anchor_L"] = t.graph->anchor_lipschitz();
    }
    if (full) {
      j["tree"] = t.tree;
      j["tr"] = t.tr;
      j["bce_cubes"] = t.bce;
      j["hd_cubes"] = t.hd;
      j["ld_cubes"] = t.ld;
      j["next_cubes"] = t.next;
      j["good"] = t.good;
      j["sep_cubes"] = t.sep;
      j["sep_star_cubes"] = t.sep_star;
      j["anchor_atoms"] = t.anchors;
      j["dropped_anchor_atoms"] = t.dropped_anchors;
      j["violations"] = t.violations;
      if (t.graph) j["graph"] = to_json(*t.graph);
    }
    trees.push_back(std::move(j));
  }
  const auto& l = r.ledger;
  return {{"params", to_json(r.params)},
          {"params_note", "default constants are engineering choices, not values fixed by the theory"},
          {"ledger",
           {{"top_sum", l.top_sum},
            {"C1", l.c1},
            {"mass", l.mass},
            {"energy_total", l.energy_total},
            {"ratio", l.ratio},
            {"top_count", l.top_count},
            {"tau_sqrt", std::sqrt(r.params.tau)}}},
          {"trees", trees},
          {"units", "normalized (cloud diameter 1)"},
          {"graph_note", "componentwise extension; the Euclidean constant may exceed L by sqrt(d-n)"}};
}

nlohmann::json to_json(const CoronaVerification& v) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : v.trees)
    trees.push_back({{"root", t.root},
                     {"ok", t.ok()},
                     {"anchors_on_graph", t.anchors_on_graph},
                     {"good_on_graph", t.good_on_graph},
                     {"max_good_distance", t.max_good_distance},
                     {"lower_density", t.lower_density},
                     {"energy_controlled", t.energy_controlled},
                     {"hd_doubling", t.hd_doubling},
                     {"stop_disjoint", t.stop_disjoint},
                     {"stop_maximal", t.stop_maximal},
                     {"relabel_stable", t.relabel_stable},
                     {"anchors_separated", t.anchors_separated},
                     {"max_density_ratio_tree", t.max_density_ratio_tree},
                     {"max_density_ratio_tr", t.max_density_ratio_tr},
                     {"proximity_fraction", t.proximity_fraction}});
  return {{"ok", v.ok()}, {"partition", v.partition}, {"trees", trees}};
}

CoronaParams corona_params_from_json(const nlohmann::json& j) {
  require(j.is_object(), Errc::invalid_params, "corona config must be a JSON object");
  require(j.contains("seed"), Errc::invalid_params, "corona config needs an explicit \"seed\"");
  CoronaParams p;
  try {
    p.seed = j.at("seed").get<std::uint64_t>();
    auto num = [&](const char* key, double& out) {
      if (j.contains(key)) out = j.at(key).get<double>();
    };
    num("A", p.A);
    num("tau", p.tau);
    num("eps", p.eps);
    num("epsilon", p.eps);
    num("eta", p.eta);
    num("M", p.M);
    num("t", p.t);
    num("Lambda", p.Lambda);
    num("alpha", p.alpha);
    num("p", p.p);
    num("C0", p.lattice.c0);
    num("A0", p.lattice.a0);
    if (j.contains("max_depth")) p.lattice.max_depth = j.at("max_depth").get<int>();
    if (j.contains("growth_samples")) p.growth_samples = j.at("growth_samples").get<std::size_t>();
    if (j.contains("plane")) p.direction = parse_plane(j.at("plane").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_params, std::string("corona config: ") + e.what());
  }
  return p;
}

}  // namespace conical
