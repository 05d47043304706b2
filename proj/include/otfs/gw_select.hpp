#pragma once

// Unsupervised criterion: Gromov-Wasserstein distance between the metric
// space of a column subset and that of the full data matrix.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "otfs/dataset.hpp"
#include "otfs/ot_core.hpp"

namespace otfs {

struct GwCriterionResult {
  double gwd = 0.0;
  FeatureSet feature_set;
  std::size_t n_used = 0;
  ot::GwConfig config;
  bool converged = true;
};

/// Rows shared by every GW comparison of one call: rows are put in
/// lexicographic order of their values (ties by index), then `cap` of them are
/// drawn with a stream seeded from `seed`. The result is therefore invariant to
/// permuting the rows of the dataset.
std::vector<std::size_t> gw_row_subsample(const Dataset& ds, std::size_t cap, std::uint64_t seed);

/// GW distance between the rows restricted to T and the full rows, uniform
/// weights, Euclidean metrics.
GwCriterionResult gw_to_full(const Dataset& ds, const FeatureSet& t, const ot::GwConfig& cfg, std::size_t cap = 300);

/// Same, on a caller-provided row subsample.
GwCriterionResult gw_to_full_on_rows(const Dataset& ds, const FeatureSet& t, const ot::GwConfig& cfg,
                                     std::span<const std::size_t> rows);

struct GwRedundancy {
  double redundancy = 0.0;  // 1 / max(distance, floor)
  double distance = 0.0;
  std::size_t n_used = 0;
  bool converged = true;
};

/// 1 / max(GW(X_{T \ f}, X_T), floor). Larger means f adds less structure.
GwRedundancy feature_redundancy_gw(const Dataset& ds, const FeatureSet& t, std::size_t f, const ot::GwConfig& cfg,
                                   std::size_t cap = 300, double floor = 1e-9);

struct GwRankEntry {
  FeatureSet feature_set;
  double gwd = 0.0;
  std::size_t candidate_index = 0;
  bool converged = true;
};

/// Ascending gwd over candidates evaluated on one shared row subsample; equal
/// distances keep input order.
std::vector<GwRankEntry> gw_ranking(const Dataset& ds, const std::vector<FeatureSet>& candidates,
                                    const ot::GwConfig& cfg, std::size_t cap = 300);

}  // namespace otfs
