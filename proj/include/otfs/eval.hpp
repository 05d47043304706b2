#pragma once

// Downstream evaluation: k-NN accuracy, accuracy-vs-size curves, a
// variance-ratio baseline and the GWD/accuracy consistency table.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "otfs/dataset.hpp"
#include "otfs/ot_core.hpp"
#include "otfs/select.hpp"

namespace otfs {

/// Fraction of test rows whose k-NN majority label (Euclidean on columns T)
/// matches the true label. Equal distances prefer the lower train row; a tied
/// vote goes to the earlier class. Classes are matched by name, so train and
/// test may carry different class_names orders.
double knn_accuracy(const Dataset& train, const Dataset& test, const FeatureSet& t, std::size_t k = 5);

/// A named selector: (train set, subset size, seed) -> chosen columns.
struct EvalMethod {
  std::string name;
  std::function<FeatureSet(const Dataset&, std::size_t, std::uint64_t)> select;
};

/// Runs select_features with cfg.m = size and a seed derived from cfg.seed
/// and the repeat seed.
EvalMethod method_from_config(std::string name, SelectionConfig cfg);
/// Top-m of variance_ratio_baseline on the train set.
EvalMethod variance_ratio_method(std::string name = "variance_ratio");
/// First m entries of a fixed column order, independent of the data.
EvalMethod fixed_order_method(std::string name, std::vector<std::size_t> order);

struct AccuracyRecord {
  std::string method;
  std::size_t size = 0;
  std::size_t repeat = 0;
  double accuracy = 0.0;
};

struct AccuracySummary {
  std::string method;
  std::size_t size = 0;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over repeats
  double min = 0.0;
  double max = 0.0;
};

struct AccuracyCurve {
  std::vector<std::size_t> sizes;
  std::vector<std::string> methods;
  std::size_t n_repeats = 0;
  std::vector<std::uint64_t> seeds;  // one per repeat
  std::vector<AccuracyRecord> records;  // method-major, then size, then repeat

  double accuracy(std::size_t method, std::size_t size_index, std::size_t repeat) const;
  std::vector<AccuracySummary> summary() const;
};

struct CurveOptions {
  std::size_t n_repeats = 10;
  std::size_t k = 5;
  std::uint64_t seed = 0;
  double train_fraction = 0.7;
};

/// Every repeat draws one stratified split from derive_seed(seed, repeat);
/// all methods select on that train set at every size and are scored on its
/// test set.
AccuracyCurve accuracy_curve(const Dataset& ds, const std::vector<EvalMethod>& methods,
                             const std::vector<std::size_t>& sizes, const CurveOptions& opt = {});

/// Per column: variance of the class means / (mean within-class variance +
/// 1e-12), population variances, unweighted over classes. Descending; equal
/// scores in ascending index order.
std::vector<RankedFeature> variance_ratio_baseline(const Dataset& ds);

struct GwdAccuracyRow {
  FeatureSet subset;
  double gwd = 0.0;
  double inverse_gwd = 0.0;  // 1 / max(gwd, floor)
  double accuracy = 0.0;
  bool converged = true;
};

struct GwdAccuracyTable {
  std::vector<GwdAccuracyRow> rows;
  std::optional<double> spearman;  // empty when undefined
  std::vector<std::size_t> gw_rows;  // rows of the train set used for GW
};

struct GwdTableOptions {
  std::size_t k = 5;
  std::uint64_t seed = 0;
  double train_fraction = 0.7;
  std::size_t cap = 300;
  double floor = 1e-9;
};

/// One stratified split; gwd is measured on a shared subsample of the train
/// rows and accuracy on the test rows.
GwdAccuracyTable gwd_accuracy_table(const Dataset& ds, const std::vector<FeatureSet>& subsets, const ot::GwConfig& cfg,
                                    const GwdTableOptions& opt = {});

/// Spearman correlation with average ranks for ties. Empty when there are
/// fewer than two pairs or either side is constant.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

}  // namespace otfs
