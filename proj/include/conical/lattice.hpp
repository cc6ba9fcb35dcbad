#pragma once

#include "conical/measure.hpp"

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <vector>

namespace conical {

struct LatticeParams {
  double c0 = 2.0;
  double a0 = 8.0;
  int max_depth = 0;  // 0: first level at which every atom is its own cube
};

/// Node of the lattice. Geometry is in normalized units (cloud diameter <= 1).
struct Cube {
  std::size_t id = 0;
  int level = 0;
  std::size_t center_atom = 0;
  double radius = 0.0;  // r(Q)
  std::vector<std::size_t> members;  // ascending atom indices
  std::optional<std::size_t> parent;
  std::vector<std::size_t> children;
  bool doubling = false;
  double mass = 0.0;
  double extent = 0.0;  // max distance from the center to a member

  /// Radius of B_Q = 28 B(Q).
  double big_radius() const { return 28.0 * radius; }
};

class Lattice {
 public:
  const DiscreteMeasure& measure() const { return measure_; }
  const LatticeParams& params() const { return params_; }
  /// normalized = (original - shift) * scale
  const Vec& shift() const { return shift_; }
  double scale() const { return scale_; }

  const std::vector<Cube>& cubes() const { return cubes_; }
  const Cube& cube(std::size_t id) const;
  const std::vector<std::vector<std::size_t>>& levels() const { return levels_; }
  int depth() const { return static_cast<int>(levels_.size()) - 1; }
  std::size_t root() const { return 0; }

  Vec center(std::size_t id) const { return measure_.point_vec(cube(id).center_atom); }
  const double* center_ptr(std::size_t id) const { return measure_.point(cube(id).center_atom); }
  /// 56 C0 A0^{-k}
  double side_length(std::size_t id) const;

  /// Cube at `level` containing `atom`.
  std::size_t cube_of(std::size_t atom, int level) const;
  /// Q subset of P (Q == P allowed).
  bool is_subcube(std::size_t q, std::size_t p) const;

 private:
  friend Lattice build_lattice(const DiscreteMeasure&, LatticeParams);
  friend void doubling_flags(Lattice&);

  explicit Lattice(DiscreteMeasure normalized) : measure_(std::move(normalized)) {}

  DiscreteMeasure measure_;
  LatticeParams params_;
  Vec shift_;
  double scale_ = 1.0;
  std::vector<Cube> cubes_;
  std::vector<std::vector<std::size_t>> levels_;
  std::vector<std::vector<std::size_t>> atom_cube_;  // [level][atom]
};

/// Greedy net construction: per level, parent centers are kept and further
/// centers are added in atom-index order while their 5B(Q) balls stay
/// disjoint; atoms go to the nearest center inside their parent.
Lattice build_lattice(const DiscreteMeasure& m, LatticeParams params);

/// Recomputes the doubling flag mu(100 B(Q)) <= C0 mu(B(Q)) of every cube.
void doubling_flags(Lattice& lattice);

/// Smallest depth at which 5B-separation forces every atom into its own cube.
int auto_depth(const DiscreteMeasure& normalized, double a0);

struct MaximalDoubling {
  std::vector<std::size_t> cubes;
  std::vector<std::size_t> uncovered_atoms;  // in no doubling strict descendant
  double uncovered_mass = 0.0;
};

/// MD(Q): maximal doubling strict descendants of Q.
MaximalDoubling maximal_doubling(const Lattice& lattice, std::size_t q);

/// delta_mu(Q, S) = sum over atoms y in 2B_S \ 2B_Q of w_y |y - x_Q|^{-n}.
double delta_mu(const Lattice& lattice, std::size_t q, std::size_t s);

struct DensityDropReport {
  double lhs = 0.0;  // Theta(100 B(Q))
  double rhs = 0.0;  // (C0 A0)^d A0^{-9d(J(Q)-J(R)-1)} Theta(100 B(R))
  bool holds = false;
  int steps = 0;  // J(Q) - J(R) - 1
  /// e with Theta(100B(Q)) = (C0 A0)^d A0^{-e d steps} Theta(100B(R)); NaN when steps == 0.
  double achieved_exponent = 0.0;
};

DensityDropReport density_drop_check(const Lattice& lattice, std::size_t q, std::size_t r);

struct LatticeReport {
  bool partition = true;
  bool nesting = true;
  bool disjoint_5b = true;
  bool radius_bounds = true;
  std::size_t inner_containment_failures = 0;  // E cap B(Q) not inside Q
  std::size_t outer_containment_failures = 0;  // Q not inside 28 B(Q)
  std::size_t ball_nesting_failures = 0;       // B_Q not inside B_P for parent P
  bool ok() const { return partition && nesting && disjoint_5b && radius_bounds; }
};

/// Exhaustive check of the lattice invariants.
LatticeReport check_lattice(const Lattice& lattice);

nlohmann::json lattice_to_json(const Lattice& lattice, bool with_members);
nlohmann::json to_json(const LatticeReport& report);

}  // namespace conical
