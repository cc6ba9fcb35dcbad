#pragma once

#include "conical/energy.hpp"
#include "conical/lattice.hpp"
#include "conical/lipschitz_graph.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace conical {

struct CoronaParams {
  double A = 10.0;
  double tau = 0.01;
  double eps = 0.1;
  double eta = 0.1;
  // 0 selects the default: M = 4 / alpha, t = 10 M, Lambda = 4 M
  double M = 0.0;
  double t = 0.0;
  double Lambda = 0.0;
  double alpha = 0.5;
  double p = 1.0;
  std::optional<Plane> direction;  // default: span of the last d - n axes
  LatticeParams lattice;
  std::uint64_t seed = 0;
  std::size_t growth_samples = 4096;
};

/// Fills defaults for (M, t, Lambda, direction) and validates the orderings
/// tau < 1 < A, t > M, Lambda > 2M.
CoronaParams resolve(CoronaParams params, int ambient_dim, int dim_param);

struct TreeResult {
  std::size_t root = 0;
  double theta_root = 0.0;           // Theta(2B_R)
  std::vector<std::size_t> tree;     // Tree(R): not strictly inside a stop cube
  std::vector<std::size_t> bce, hd, ld;
  std::vector<std::size_t> next;     // Next(R)
  std::vector<std::size_t> tr;       // Tr(R): inside R, outside every Next(R) cube
  std::vector<std::size_t> good;     // G_R atoms
  std::vector<std::size_t> sep, sep_star;
  std::vector<std::size_t> anchors;          // atom indices on the graph
  std::vector<std::size_t> dropped_anchors;  // removed to restore cone separation
  std::vector<std::pair<std::size_t, std::size_t>> violations;  // (kept, dropped) atoms
  std::optional<LipschitzGraph> graph;
  double ld_mass_fraction = 0.0;
  bool id_cube = false;  // mu(union HD) >= mu(R) / 2

  std::vector<std::size_t> stops() const;
};

struct PackingLedger {
  double top_sum = 0.0;  // sum over Top of Theta(2B_R)^p mu(R)
  double c1 = 0.0;
  double mass = 0.0;
  double energy_total = 0.0;
  double ratio = 0.0;
  std::size_t top_count = 0;
};

struct CoronaResult {
  CoronaParams params;
  std::vector<TreeResult> trees;  // ascending root id
  PackingLedger ledger;
};

struct TreeVerification {
  std::size_t root = 0;
  bool anchors_on_graph = true;
  bool good_on_graph = true;
  double max_good_distance = 0.0;
  bool lower_density = true;     // tau Theta(2B_R) <= Theta(2B_Q) on Tree \ Stop
  bool energy_controlled = true;
  bool hd_doubling = true;
  bool stop_disjoint = true;
  bool stop_maximal = true;
  bool relabel_stable = true;
  bool anchors_separated = true;
  double max_density_ratio_tree = 0.0;
  double max_density_ratio_tr = 0.0;
  double proximity_fraction = 0.0;  // Tree cubes with Lambda B_Q meeting the graph
  bool ok() const;
};

struct CoronaVerification {
  bool partition = true;  // every cube in exactly one Tr(R)
  std::vector<TreeVerification> trees;
  bool ok() const;
};

/// Stopping-time machinery over one lattice. Cube energies E(Q) and the
/// densities Theta(2B_Q) are computed once for every cube.
class Corona {
 public:
  Corona(const Lattice& lattice, CoronaParams params);

  const Lattice& lattice() const { return lattice_; }
  const CoronaParams& params() const { return params_; }
  const EnergySpec& spec() const { return spec_; }

  double energy(std::size_t q) const { return energy_[q]; }
  double theta2(std::size_t q) const { return theta_[q]; }

  /// Stop families, Tree(R), G_R. Throws not_doubling_root.
  TreeResult stopping_decomposition(std::size_t r) const;
  /// Sep, Sep*, anchors and graph for a decomposed tree.
  void fit_graph(TreeResult& tree) const;
  /// Next(R) and Tr(R) for a decomposed tree.
  void close_tree(TreeResult& tree) const;

  CoronaResult build_top() const;
  CoronaVerification verify(const CoronaResult& result) const;

 private:
  const Lattice& lattice_;
  CoronaParams params_;
  EnergySpec spec_;
  std::vector<double> energy_;
  std::vector<double> theta_;
};

/// Theta(2B_Q) = mu(B(x_Q, 56 r(Q))) / (56 r(Q))^n.
double theta_2b(const Lattice& lattice, std::size_t q);

/// Set distance between the member atoms of two cubes.
double cube_distance(const Lattice& lattice, std::size_t q, std::size_t p);

bool t_neighbours(const Lattice& lattice, std::size_t q, std::size_t p, double t);

/// True iff some y in P lies in K(q, V, alpha/2) for some q in Q with
/// |y - x_Q| >= M r(B_Q), and dist(Q, P) >= M r(P).
bool key_cone_exclusion(const Lattice& lattice, std::size_t q, std::size_t p, const Plane& v,
                        double alpha, double m);

struct SeparatedFamilies {
  std::vector<std::size_t> sep;
  std::vector<std::size_t> sep_star;
};

/// Greedy maximal t-separated subfamily in (level, id) order, then the two
/// Sep* conditions with the 2MB_Q balls; `good` is the discrete good set.
SeparatedFamilies separated_families(const Lattice& lattice, std::vector<std::size_t> stop_cubes,
                                     double t, double m, const std::vector<std::size_t>& good);

nlohmann::json to_json(const CoronaParams& p);
nlohmann::json to_json(const CoronaResult& r, bool full);
nlohmann::json to_json(const CoronaVerification& v);
CoronaParams corona_params_from_json(const nlohmann::json& j);

}  // namespace conical
