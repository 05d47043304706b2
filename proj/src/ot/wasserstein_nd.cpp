#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "otfs/error.hpp"
#include "otfs/ot_core.hpp"
#include "otfs/random.hpp"

namespace otfs::ot {
namespace {

void check_pair(const WeightedPointCloud& a, const WeightedPointCloud& b, const char* op) {
  a.validate();
  b.validate();
  if (a.dim() != b.dim()) {
    throw InvalidArgument(std::string(op) + ": dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                          std::to_string(b.dim()) + ")");
  }
}

// Total order on clouds so that f(a, b) and f(b, a) can run the same computation.
bool cloud_less(const WeightedPointCloud& a, const WeightedPointCloud& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  for (Eigen::Index i = 0; i < a.points.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.points.cols(); ++j) {
      if (a.points(i, j) != b.points(i, j)) return a.points(i, j) < b.points(i, j);
    }
  }
  for (Eigen::Index i = 0; i < a.weights.size(); ++i) {
    if (a.weights(i) != b.weights(i)) return a.weights(i) < b.weights(i);
  }
  return false;
}

WeightedPointCloud subsample(const WeightedPointCloud& c, std::size_t cap, std::uint64_t seed,
                             std::uint64_t stream) {
  if (c.size() <= cap) return c;
  Rng rng(derive_seed(seed, stream, c.size()));
  std::vector<std::size_t> idx = rng.sample_without_replacement(c.size(), cap);
  std::sort(idx.begin(), idx.end());
  WeightedPointCloud out;
  out.points.resize(static_cast<Eigen::Index>(cap), c.points.cols());
  out.weights.resize(static_cast<Eigen::Index>(cap));
  for (std::size_t k = 0; k < cap; ++k) {
    out.points.row(static_cast<Eigen::Index>(k)) = c.points.row(static_cast<Eigen::Index>(idx[k]));
    out.weights(static_cast<Eigen::Index>(k)) = c.weights(static_cast<Eigen::Index>(idx[k]));
  }
  const double total = out.weights.sum();
  if (total > 0.0) {
    out.weights /= total;
  } else {
    out.weights.setConstant(1.0 / static_cast<double>(cap));
  }
  return out;
}

}  // namespace

WeightedPointCloud WeightedPointCloud::uniform(Matrix points) {
  WeightedPointCloud c;
  const Eigen::Index n = points.rows();
  c.points = std::move(points);
  c.weights = Vector::Constant(n, n > 0 ? 1.0 / static_cast<double>(n) : 0.0);
  return c;
}

void WeightedPointCloud::validate() const {
  if (points.rows() < 1 || points.cols() < 1) throw InvalidArgument("point cloud must be non-empty");
  if (weights.size() != points.rows()) throw InvalidArgument("point cloud weight count does not match point count");
  if (!points.allFinite()) throw InvalidArgument("point cloud has non-finite coordinates");
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!(weights(i) >= 0.0) || !std::isfinite(weights(i))) {
      throw InvalidArgument("point cloud weights must be finite and nonnegative");
    }
  }
  if (std::abs(weights.sum() - 1.0) > 1e-12) throw InvalidArgument("point cloud weights must sum to 1");
}

Matrix euclidean_cost(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw InvalidArgument("euclidean_cost: dimension mismatch");
  Matrix c(a.rows(), b.rows());
  for (Eigen::Index j = 0; j < b.rows(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      double s = 0.0;
      for (Eigen::Index k = 0; k < a.cols(); ++k) {
        const double diff = a(i, k) - b(j, k);
        s += diff * diff;
      }
      c(i, j) = std::sqrt(s);
    }
  }
  return c;
}

double wasserstein1_nd(const WeightedPointCloud& a, const WeightedPointCloud& b, std::size_t cap,
                       std::uint64_t seed) {
  if (cap < 1) throw InvalidArgument("wasserstein1_nd: cap must be >= 1");
  check_pair(a, b, "wasserstein1_nd");
  WeightedPointCloud sa = subsample(a, cap, seed, 0);
  WeightedPointCloud sb = subsample(b, cap, seed, 1);
  const WeightedPointCloud* first = &sa;
  const WeightedPointCloud* second = &sb;
  if (cloud_less(sb, sa)) std::swap(first, second);
  const Matrix cost = euclidean_cost(first->points, second->points);
  return emd_exact(cost, first->weights, second->weights).value;
}

double sliced_wasserstein1(const WeightedPointCloud& a, const WeightedPointCloud& b,
                           std::size_t n_projections, std::uint64_t seed) {
  if (n_projections < 1) throw InvalidArgument("sliced_wasserstein1: n_projections must be >= 1");
  check_pair(a, b, "sliced_wasserstein1");
  const Eigen::Index d = a.points.cols();
  Rng rng(seed);
  Vector dir(d);
  std::vector<double> pa(a.size());
  std::vector<double> pb(b.size());
  std::vector<double> wa(a.weights.data(), a.weights.data() + a.weights.size());
  std::vector<double> wb(b.weights.data(), b.weights.data() + b.weights.size());
  double total = 0.0;
  for (std::size_t k = 0; k < n_projections; ++k) {
    double norm = 0.0;
    do {
      for (Eigen::Index t = 0; t < d; ++t) dir(t) = rng.normal();
      norm = dir.norm();
    } while (norm == 0.0);
    dir /= norm;
    Eigen::Map<Vector>(pa.data(), static_cast<Eigen::Index>(pa.size())) = a.points * dir;
    Eigen::Map<Vector>(pb.data(), static_cast<Eigen::Index>(pb.size())) = b.points * dir;
    total += wasserstein1_1d_weighted(pa, wa, pb, wb);
  }
  return total / static_cast<double>(n_projections);
}

}  // namespace otfs::ot
