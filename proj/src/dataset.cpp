#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "otfs/dataset.hpp"
#include "otfs/error.hpp"
#include "otfs/random.hpp"

namespace otfs {

// --- FeatureSet --------------------------------------------------------------

FeatureSet::FeatureSet(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
  std::vector<std::size_t> sorted = indices_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidArgument("feature set has repeated index " +
                          std::to_string(*std::adjacent_find(sorted.begin(), sorted.end())));
  }
}

FeatureSet FeatureSet::range(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> v;
  for (std::size_t k = begin; k < end; ++k) v.push_back(k);
  return FeatureSet(std::move(v));
}

bool FeatureSet::contains(std::size_t f) const {
  return std::find(indices_.begin(), indices_.end(), f) != indices_.end();
}

FeatureSet FeatureSet::with(std::size_t f) const {
  std::vector<std::size_t> v = indices_;
  v.push_back(f);
  return FeatureSet(std::move(v));
}

FeatureSet FeatureSet::without(std::size_t f) const {
  std::vector<std::size_t> v;
  for (std::size_t g : indices_) {
    if (g != f) v.push_back(g);
  }
  return FeatureSet(std::move(v));
}

FeatureSet FeatureSet::sorted() const {
  FeatureSet out = *this;
  std::sort(out.indices_.begin(), out.indices_.end());
  return out;
}

void FeatureSet::validate(std::size_t d) const {
  if (indices_.empty()) throw InvalidArgument("feature set is empty");
  for (std::size_t f : indices_) {
    if (f >= d) {
      throw InvalidArgument("feature index " + std::to_string(f) + " out of range (d = " + std::to_string(d) + ")");
    }
  }
}

std::string FeatureSet::to_string() const {
  std::string s = "{";
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (k > 0) s += ",";
    s += std::to_string(indices_[k]);
  }
  return s + "}";
}

// --- Dataset -----------------------------------------------------------------

void Dataset::validate() const {
  if (x.rows() < 1 || x.cols() < 1) throw DataError("dataset must have at least one row and one column");
  if (!x.allFinite()) throw DataError("dataset contains non-finite values");
  if (feature_names.size() != n_features()) throw DataError("feature name count does not match column count");
  if (!labels.empty()) {
    if (labels.size() != n_samples()) throw DataError("label count does not match row count");
    for (int c : labels) {
      if (c < 0 || static_cast<std::size_t>(c) >= class_names.size()) throw DataError("label code out of range");
    }
  }
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  Dataset out;
  out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.x.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rows[r]));
    if (has_labels()) out.labels.push_back(labels[rows[r]]);
  }
  out.feature_names = feature_names;
  out.class_names = class_names;
  out.label_name = label_name;
  return out;
}

Dataset Dataset::select_columns(const FeatureSet& cols) const {
  cols.validate(n_features());
  Dataset out = *this;
  out.x = columns(cols);
  out.feature_names.clear();
  for (std::size_t f : cols) out.feature_names.push_back(feature_names[f]);
  return out;
}

Matrix Dataset::columns(const FeatureSet& cols) const {
  Matrix out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(cols[k]));
  return out;
}

Matrix Dataset::submatrix(std::span<const std::size_t> rows, const FeatureSet& cols) const {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
          x(static_cast<Eigen::Index>(rows[r]), static_cast<Eigen::Index>(cols[k]));
    }
  }
  return out;
}

std::optional<std::size_t> Dataset::find_feature(const std::string& key) const {
  for (std::size_t c = 0; c < feature_names.size(); ++c) {
    if (feature_names[c] == key) return c;
  }
  std::size_t idx = 0;
  auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), idx);
  if (ec == std::errc() && ptr == key.data() + key.size() && idx < n_features()) return idx;
  return std::nullopt;
}

ClassPartition partition_by_class(const Dataset& ds) {
  if (!ds.has_labels()) throw DataError("dataset has no labels");
  if (ds.n_classes() < 2) throw DataError("at least two classes are required, found " + std::to_string(ds.n_classes()));
  ClassPartition part;
  part.class_names = ds.class_names;
  part.rows.resize(ds.n_classes());
  for (std::size_t r = 0; r < ds.labels.size(); ++r) part.rows[static_cast<std::size_t>(ds.labels[r])].push_back(r);
  for (std::size_t c = 0; c < part.rows.size(); ++c) {
    if (part.rows[c].empty()) throw DataError("class '" + part.class_names[c] + "' has no samples");
  }
  return part;
}

// --- Transformations ---------------------------------------------------------

namespace {

struct ColumnStats {
  Vector mean;
  Vector sd;
};

ColumnStats column_stats(const Matrix& x) {
  ColumnStats s;
  const double n = static_cast<double>(x.rows());
  s.mean = x.colwise().sum().transpose() / n;
  s.sd.resize(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    s.sd(c) = std::sqrt((x.col(c).array() - s.mean(c)).square().sum() / n);
  }
  return s;
}

}  // namespace

Matrix standardize_columns(const Matrix& x) {
  const ColumnStats s = column_stats(x);
  Matrix out = x;
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    out.col(c).array() -= s.mean(c);
    if (s.sd(c) > 0.0) out.col(c) /= s.sd(c);
  }
  return out;
}

FilterResult zscore_filter(const Dataset& ds, double threshold) {
  if (!(threshold > 0.0)) throw InvalidArgument("zscore_filter: threshold must be positive");
  const ColumnStats s = column_stats(ds.x);
  std::vector<std::size_t> keep;
  FilterResult result;
  for (Eigen::Index r = 0; r < ds.x.rows(); ++r) {
    bool outlier = false;
    for (Eigen::Index c = 0; c < ds.x.cols() && !outlier; ++c) {
      if (s.sd(c) > 0.0 && std::abs(ds.x(r, c) - s.mean(c)) > threshold * s.sd(c)) outlier = true;
    }
    (outlier ? result.removed : keep).push_back(static_cast<std::size_t>(r));
  }
  if (keep.empty()) throw DataError("zscore_filter: every row was removed");
  result.data = ds.select_rows(keep);
  return result;
}

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("train_fraction must lie strictly between 0 and 1");
  }
}

Split train_test_split(const Dataset& ds, const SplitSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Split split;
  if (spec.stratified) {
    const ClassPartition part = partition_by_class(ds);
    for (std::size_t c = 0; c < part.n_classes(); ++c) {
      std::vector<std::size_t> rows = part.rows[c];
      if (rows.size() < 2) {
        throw DataError("stratified split needs at least 2 rows in class '" + part.class_names[c] + "'");
      }
      rng.shuffle(rows);
      const auto n_c = static_cast<long long>(rows.size());
      const long long n_train = std::clamp(std::llround(spec.train_fraction * static_cast<double>(n_c)), 1LL, n_c - 1);
      split.train_rows.insert(split.train_rows.end(), rows.begin(), rows.begin() + n_train);
      split.test_rows.insert(split.test_rows.end(), rows.begin() + n_train, rows.end());
    }
  } else {
    std::vector<std::size_t> rows(ds.n_samples());
    std::iota(rows.begin(), rows.end(), 0);
    rng.shuffle(rows);
    const long long n_train = std::llround(spec.train_fraction * static_cast<double>(rows.size()));
    if (n_train <= 0 || n_train >= static_cast<long long>(rows.size())) {
      throw InvalidArgument("train_fraction " + std::to_string(spec.train_fraction) + " leaves an empty side for n = " +
                            std::to_string(rows.size()));
    }
    split.train_rows.assign(rows.begin(), rows.begin() + n_train);
    split.test_rows.assign(rows.begin() + n_train, rows.end());
  }
  std::sort(split.train_rows.begin(), split.train_rows.end());
  std::sort(split.test_rows.begin(), split.test_rows.end());
  split.train = ds.select_rows(split.train_rows);
  split.test = ds.select_rows(split.test_rows);
  return split;
}

Dataset synth_noise_features(const Dataset& ds, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw InvalidArgument("synth_noise_features: count must be >= 1");
  const ColumnStats s = column_stats(ds.x);
  const Eigen::Index d = ds.x.cols();
  Rng rng(seed);
  Dataset out = ds;
  out.x.conservativeResize(Eigen::NoChange, d + static_cast<Eigen::Index>(count));
  for (std::size_t k = 0; k < count; ++k) {
    const auto tmpl = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::size_t>(d)));
    const Eigen::Index col = d + static_cast<Eigen::Index>(k);
    for (Eigen::Index r = 0; r < ds.x.rows(); ++r) out.x(r, col) = rng.normal(s.mean(tmpl), s.sd(tmpl));
    out.feature_names.push_back("noise_" + std::to_string(k));
  }
  return out;
}

Dataset duplicate_features(const Dataset& ds, const FeatureSet& source, Affine affine) {
  source.validate(ds.n_features());
  if (affine.scale == 0.0 || !std::isfinite(affine.scale) || !std::isfinite(affine.offset)) {
    throw InvalidArgument("duplicate_features: scale must be finite and non-zero");
  }
  Dataset out = ds;
  const Eigen::Index d = ds.x.cols();
  out.x.conservativeResize(Eigen::NoChange, d + static_cast<Eigen::Index>(source.size()));
  for (std::size_t k = 0; k < source.size(); ++k) {
    out.x.col(d + static_cast<Eigen::Index>(k)) =
        (ds.x.col(static_cast<Eigen::Index>(source[k])).array() * affine.scale + affine.offset).matrix();
    out.feature_names.push_back(ds.feature_names[source[k]] + "_dup");
  }
  return out;
}

}  // namespace otfs
