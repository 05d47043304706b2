#pragma once

// Selection strategies over the supervised (class distance matrix) and
// unsupervised (GW to the full matrix) criteria.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "otfs/dataset.hpp"
#include "otfs/distmat.hpp"
#include "otfs/gw_select.hpp"
#include "otfs/ot_core.hpp"

namespace otfs {

enum class Criterion { frobenius_supervised, gw_unsupervised, two_stage };
enum class Strategy { rank, greedy, random_search };

const char* to_string(Criterion c);
const char* to_string(Strategy s);
/// Accepts the enum spelling plus the short forms "frobenius", "gw" and "random".
Criterion parse_criterion(const std::string& s);
Strategy parse_strategy(const std::string& s);

struct SelectionConfig {
  Criterion criterion = Criterion::frobenius_supervised;
  Strategy strategy = Strategy::greedy;
  std::size_t m = 10;
  std::size_t n_trials = 1000;
  double lambda = 1.0;  // two-stage redundancy weight
  std::uint64_t seed = 0;
  OtOptions ot;
  ot::GwConfig gw;
  std::size_t gw_cap = 300;
  RedundancyAggregation redundancy = RedundancyAggregation::max;

  void validate() const;
};

/// One entry of a selection trace. For incremental strategies `features`
/// holds the single feature added at that step; for random search it holds
/// the sampled subset of that trial.
struct TraceStep {
  FeatureSet features;
  double score = 0.0;
  // Two-stage only.
  double relevance = std::numeric_limits<double>::quiet_NaN();
  double redundancy = std::numeric_limits<double>::quiet_NaN();
};

struct SelectionResult {
  FeatureSet chosen;
  std::vector<TraceStep> trace;
  std::string criterion_details;
  double wall_seconds = 0.0;
  bool converged = true;  // false if any GW evaluation hit a solver cap
};

struct RankedFeature {
  std::size_t feature = 0;
  double score = 0.0;
};

/// Every column by descending frobenius_utility of its single-column class
/// distance matrix; equal utilities in ascending index order.
std::vector<RankedFeature> rank_by_disparity(const Dataset& ds, const SelectionConfig& cfg);

/// Incremental search from the empty set. Supervised: add the feature
/// maximizing U(T + f). Unsupervised: add the feature minimizing
/// gw_to_full(T + f) on one shared row subsample. Ties go to the lowest index.
SelectionResult greedy_forward(const Dataset& ds, const SelectionConfig& cfg);

/// Best of cfg.n_trials uniformly drawn size-m subsets. Repeated draws are
/// scored once; the earliest draw wins ties.
SelectionResult random_search(const Dataset& ds, const SelectionConfig& cfg);

/// Incremental relevance-minus-redundancy:
///   score(f | T) = U({f}) - lambda * redundancy_to_set(f, T, scaled = true)
/// with zero redundancy against the empty set.
SelectionResult two_stage_select(const Dataset& ds, const SelectionConfig& cfg);

/// Dispatches on cfg.criterion and cfg.strategy. The two-stage criterion is
/// always incremental.
SelectionResult select_features(const Dataset& ds, const SelectionConfig& cfg);

}  // namespace otfs
