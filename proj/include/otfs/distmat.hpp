#pragma once

// Supervised criterion built on class-conditional distance matrices.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "otfs/dataset.hpp"
#include "otfs/ot_core.hpp"

namespace otfs {

enum class W1Mode { exact, sliced };

/// Solver settings for class distance matrices.
struct OtOptions {
  W1Mode mode = W1Mode::exact;
  std::size_t cap = 256;            // exact mode: max points per class cloud
  std::size_t n_projections = 100;  // sliced mode
  std::uint64_t seed = 0;
  // Z-score the columns (over all rows) before measuring multi-column sets.
  // Single-column sets are always measured in raw units.
  bool standardize = true;

  void validate() const;
};

const char* to_string(W1Mode mode);
W1Mode parse_w1_mode(const std::string& s);

/// K x K matrix of W1 distances between class-conditional empirical
/// distributions of the columns in `feature_set`.
struct ClassDistanceMatrix {
  Matrix d;
  std::vector<std::string> class_names;
  FeatureSet feature_set;
  OtOptions ot_config;

  std::size_t n_classes() const { return static_cast<std::size_t>(d.rows()); }
};

/// D(i,j) = W1 between class i and class j restricted to columns T.
/// One column: exact 1D W1. Several: wasserstein1_nd (exact) or
/// sliced_wasserstein1 (sliced). Class pairs run in parallel; pair (i,j)
/// draws from seed stream (i,j), so the result does not depend on scheduling.
ClassDistanceMatrix class_distance_matrix(const Dataset& ds, const FeatureSet& t, const OtOptions& opt = {});

/// Same as class_distance_matrix for every single column, in column order.
std::vector<ClassDistanceMatrix> single_feature_matrices(const Dataset& ds, const OtOptions& opt = {});

/// Squared Frobenius norm: sum_ij D(i,j)^2.
double frobenius_utility(const ClassDistanceMatrix& m);

/// Divides every entry by the mean off-diagonal entry. Throws DataError when
/// that mean is not positive.
ClassDistanceMatrix mean_scale(const ClassDistanceMatrix& m);

/// Cosine similarity of the strict upper triangles, after mean_scale when
/// `scaled`. With K = 2 the triangle has a single entry, so any two nonzero
/// matrices have similarity 1.
double matrix_similarity(const ClassDistanceMatrix& a, const ClassDistanceMatrix& b, bool scaled);

/// (after - before) / before off the diagonal, 0 on it.
Matrix relative_change_matrix(const ClassDistanceMatrix& before, const ClassDistanceMatrix& after);

enum class RedundancyAggregation { max, mean };

/// How much f duplicates the class-separation pattern of members of T:
/// aggregate over g in T of matrix_similarity(M_f, M_g, scaled).
double redundancy_to_set(const Dataset& ds, std::size_t f, const FeatureSet& t, bool scaled,
                         const OtOptions& opt = {}, RedundancyAggregation agg = RedundancyAggregation::max);

/// Variant over precomputed single-column matrices (index = column).
double redundancy_to_set(const std::vector<ClassDistanceMatrix>& singles, std::size_t f, const FeatureSet& t,
                         bool scaled, RedundancyAggregation agg = RedundancyAggregation::max);

/// K x K matrix with class names as header row and first column.
void write_matrix_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& class_names);

}  // namespace otfs
