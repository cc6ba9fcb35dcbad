#pragma once

#include "conical/measure.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace conical {

/// Odd Calderon-Zygmund kernel R^d \ {0} -> R^components.
struct Kernel {
  enum class Kind { cauchy, riesz };
  Kind kind = Kind::cauchy;
  std::string name;
  int n = 1;
  int d = 2;
  double ck = 1.0;  // declared constant in |grad^j k(x)| <= C_k / |x|^{n+j}

  int components() const { return kind == Kind::cauchy ? 2 : d; }
  void eval(const double* x, double* out) const;
  Vec operator()(const Vec& x) const;
};

/// (x1, -x2) / |x|^2 in the plane, n = 1.
Kernel cauchy_kernel();
/// x / |x|^{n+1}; C_k measured on the validation grid.
Kernel riesz_kernel(int n, int d);
std::vector<Kernel> builtin_kernels(int riesz_n, int riesz_d);

struct KernelValidation {
  bool odd = true;
  double max_odd_error = 0.0;
  // max over the radial grid of |grad^j k(x)| |x|^{n+j}, j = 0, 1, 2
  double measured[3] = {0.0, 0.0, 0.0};
  bool decay = true;  // measured[j] <= 1.05 C_k for every j
};

/// Oddness on random samples and finite-difference decay bounds on a
/// log-spaced radial grid; derivative norms are multilinear operator norms.
KernelValidation validate_kernel(const Kernel& k, std::uint64_t seed, int samples = 100);

/// sum over atoms with |x - y| > eps of w k(y - x).
Vec truncated_transform(const DiscreteMeasure& m, const Kernel& k, double eps, const Vec& x);

/// max over the grid of |T_eps mu(x)|.
double maximal_transform(const DiscreteMeasure& m, const Kernel& k, const std::vector<double>& grid,
                         const Vec& x);

/// Every value at which eps -> T_eps changes (distinct interatomic distances)
/// plus half the smallest one; evenly subsampled to `max_values` when nonzero.
std::vector<double> breakpoint_grid(const DiscreteMeasure& m, std::size_t max_values = 0);
/// `count` log-spaced values over [min distance, diameter].
std::vector<double> log_grid(const DiscreteMeasure& m, std::size_t count);
/// Breakpoints for N <= 1e4, log grid otherwise.
std::vector<double> default_grid(const DiscreteMeasure& m, std::size_t max_values = 64);

enum class NormMethod { lanczos, power };

struct NormEstimate {
  double eps = 0.0;
  double norm = 0.0;
  int iterations = 0;
  bool converged = true;  // false: PowerIterationStalled, best estimate returned
};

struct NormOptions {
  double tol = 1e-6;
  int max_iterations = 2000;
  NormMethod method = NormMethod::lanczos;
};

/// ||T_{mu,eps}|| on L^2(mu), i.e. the top singular value of the stacked
/// matrices sqrt(w_i w_j) k_c(x_j - x_i) over pairs with |x_i - x_j| > eps.
NormEstimate operator_norm(const DiscreteMeasure& m, const Kernel& k, double eps,
                           const NormOptions& opts = {});

/// Norms over a grid, each solve warm-started from the previous one.
std::vector<NormEstimate> operator_norms(const DiscreteMeasure& m, const Kernel& k,
                                         const std::vector<double>& grid, const NormOptions& opts = {});

struct GenerationRow {
  std::string label;
  std::size_t atoms = 0;
  double sup_norm = 0.0;
  double eps_at_sup = 0.0;
  bool converged = true;
};

struct GenerationTable {
  std::vector<GenerationRow> rows;
  bool strictly_increasing = false;
  double max_over_min = 0.0;
  std::size_t increases = 0;  // consecutive steps with a larger norm
};

GenerationTable norm_vs_generation(const std::vector<DiscreteMeasure>& measures,
                                   const std::vector<std::string>& labels, const Kernel& k,
                                   std::size_t grid_size = 64, const NormOptions& opts = {});

nlohmann::json to_json(const GenerationTable& t);

}  // namespace conical
