#pragma once

// Optimal-transport kernels: exact 1D and discrete 1-Wasserstein distances,
// a sliced surrogate, and entropic Gromov-Wasserstein between metric spaces.
//
// All functions are pure given their arguments and seed.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace otfs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace ot {

/// Empirical measure: one point per row, one nonnegative weight per point.
struct WeightedPointCloud {
  Matrix points;
  Vector weights;

  /// Cloud with weights 1/n.
  static WeightedPointCloud uniform(Matrix points);

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points.cols()); }

  /// Throws InvalidArgument unless n >= 1, weights >= 0 and sum to 1 within 1e-12.
  void validate() const;
};

/// Coupling between two discrete measures. Rows index the source support,
/// columns the target support.
struct TransportPlan {
  Matrix coupling;
  Vector row_marginal;
  Vector col_marginal;

  /// Largest absolute deviation of the coupling's row/column sums from the
  /// stored marginals.
  double marginal_error() const;
};

/// Settings for entropic_gw. p and q are the exponents of the (p,q)
/// Gromov-Wasserstein objective; the rest controls the solver.
struct GwConfig {
  double p = 1.0;
  double q = 1.0;
  double epsilon = 0.05;
  int max_outer_iter = 200;  // per epsilon stage
  int max_sinkhorn_iter = 10000;
  double tol = 1e-6;  // relative objective change; also the L1 marginal error of each scaling solve
  bool normalize_metrics = true;
  std::uint64_t seed = 0;
  // Conditional-gradient steps with exact linear subproblems run after each
  // entropic stage. 0 disables them.
  int polish_iter = 50;

  void validate() const;
};

// ---------------------------------------------------------------------------
// 1D

/// Exact W1 between two uniform empirical measures on the real line.
/// Integrates |F_a^-1 - F_b^-1| over the merged breakpoint grid
/// {i/n_a} U {j/n_b}; the grid is walked in integer units of 1/(n_a n_b),
/// so unequal sample counts are handled exactly.
double wasserstein1_1d(std::span<const double> a, std::span<const double> b);

/// Weighted variant. Weights must be nonnegative and sum to 1 within 1e-9.
double wasserstein1_1d_weighted(std::span<const double> a, std::span<const double> wa,
                                std::span<const double> b, std::span<const double> wb);

// ---------------------------------------------------------------------------
// Exact discrete transport

struct EmdResult {
  double value = 0.0;
  TransportPlan plan;
  // Optimal dual variables: cost(i,j) - row_potential(i) - col_potential(j) >= 0
  // everywhere, with equality on the support of the plan.
  Vector row_potential;
  Vector col_potential;
  std::size_t pivots = 0;
};

/// Minimum of <cost, coupling> over couplings with marginals (mu, nu).
///
/// Transportation simplex on the bipartite spanning-tree basis: northwest
/// corner start, block pricing over cells in row-major order with ties to the
/// lowest (row, col), leaving arc ties to the lowest (row, col). Falls back to
/// Bland's rule during long degenerate runs.
EmdResult emd_exact(const Matrix& cost, const Vector& mu, const Vector& nu);

/// Pairwise Euclidean distances between the rows of `a` and the rows of `b`.
Matrix euclidean_cost(const Matrix& a, const Matrix& b);

/// Exact W1 between point clouds under the Euclidean ground metric. Clouds
/// with more than `cap` points are subsampled without replacement to `cap`
/// points (weights renormalized); the subsample depends only on (seed, n).
double wasserstein1_nd(const WeightedPointCloud& a, const WeightedPointCloud& b, std::size_t cap,
                       std::uint64_t seed);

/// Average of 1D W1 over `n_projections` seeded uniform directions on the
/// unit sphere.
double sliced_wasserstein1(const WeightedPointCloud& a, const WeightedPointCloud& b,
                           std::size_t n_projections, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Gromov-Wasserstein

/// Euclidean distance matrix between the rows of X. Symmetric, zero diagonal.
Matrix pairwise_distances(const Matrix& x);

/// Divides a metric matrix by its mean off-diagonal entry. Matrices whose
/// off-diagonal mean is zero (or of size < 2) are returned unchanged.
Matrix normalize_by_mean_offdiagonal(const Matrix& d);

struct GwResult {
  double value = 0.0;  // unregularized objective at `plan`
  TransportPlan plan;
  bool converged = true;  // false if any scaling subproblem hit its cap
  int outer_iterations = 0;
  int polish_iterations = 0;
};

/// Approximate (p,q)-GW between (Dx, mu) and (Dy, nu).
///
/// Alternates between linearizing the objective at the current plan and
/// solving the entropic transport problem for that linear cost by
/// log-stabilized matrix scaling, warm-started from the previous dual
/// potentials. The exact transport plan for the distance-profile lower bound
/// is refined once by a conditional-gradient phase with exact linear
/// subproblems. The entropic path starts from the independent coupling and
/// anneals epsilon over the stages 1, 0.1, 0.01, ... above cfg.epsilon and
/// then cfg.epsilon itself; each stage's plan gets the same
/// conditional-gradient phase to remove the entropic blur. The returned plan
/// is the best feasible plan seen, so it is never worse than the independent
/// coupling or the refined profile plan.
GwResult entropic_gw(const Matrix& dx, const Matrix& dy, const Vector& mu, const Vector& nu,
                     const GwConfig& cfg);

/// Direct evaluation of
///   ( sum_{i,j,k,l} |Dx(i,k)^q - Dy(j,l)^q|^p plan(i,j) plan(k,l) )^(1/p).
/// Quartic cost; intended for small instances and as a reference.
double gw_objective(const Matrix& dx, const Matrix& dy, const Matrix& plan, double p, double q);

/// Throws InvalidArgument unless `d` is square, symmetric within 1e-9
/// (relative to its largest entry), has a zero diagonal and no negative or
/// non-finite entries.
void check_metric_matrix(const Matrix& d, const char* what);

}  // namespace ot
}  // namespace otfs
