#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "otfs/ot_core.hpp"

namespace otfs {

/// Ordered set of distinct column indices.
class FeatureSet {
 public:
  FeatureSet() = default;
  explicit FeatureSet(std::vector<std::size_t> indices);
  FeatureSet(std::initializer_list<std::size_t> indices) : FeatureSet(std::vector<std::size_t>(indices)) {}

  /// {begin, begin + 1, ..., end - 1}
  static FeatureSet range(std::size_t begin, std::size_t end);

  const std::vector<std::size_t>& indices() const { return indices_; }
  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  bool contains(std::size_t f) const;
  std::size_t operator[](std::size_t k) const { return indices_[k]; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  FeatureSet with(std::size_t f) const;
  FeatureSet without(std::size_t f) const;
  /// Same members in ascending order.
  FeatureSet sorted() const;

  /// Throws InvalidArgument if empty or any index is >= d.
  void validate(std::size_t d) const;

  std::string to_string() const;
  bool operator==(const FeatureSet&) const = default;

 private:
  std::vector<std::size_t> indices_;
};

/// n x d sample matrix with optional class labels.
///
/// Labels are dense codes into class_names; class_names keeps first-appearance
/// order from the source file so matrix row order is reproducible.
struct Dataset {
  Matrix x;
  std::vector<int> labels;  // empty when unlabeled
  std::vector<std::string> feature_names;
  std::vector<std::string> class_names;
  std::string label_name = "label";

  std::size_t n_samples() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t n_features() const { return static_cast<std::size_t>(x.cols()); }
  bool has_labels() const { return !labels.empty(); }
  std::size_t n_classes() const { return class_names.size(); }

  /// Throws DataError on shape or label inconsistencies or non-finite entries.
  void validate() const;

  Dataset select_rows(std::span<const std::size_t> rows) const;
  Dataset select_columns(const FeatureSet& columns) const;
  /// Submatrix on `columns` for all rows.
  Matrix columns(const FeatureSet& columns) const;
  /// Submatrix on `rows` x `columns`.
  Matrix submatrix(std::span<const std::size_t> rows, const FeatureSet& columns) const;

  /// Column index by name, or by a zero-based integer written as text.
  std::optional<std::size_t> find_feature(const std::string& name_or_index) const;
};

/// Row indices per class, in class_names order; each list ascending.
struct ClassPartition {
  std::vector<std::string> class_names;
  std::vector<std::vector<std::size_t>> rows;

  std::size_t n_classes() const { return rows.size(); }
};

ClassPartition partition_by_class(const Dataset& ds);

// ---------------------------------------------------------------------------
// CSV

struct CsvTable {
  std::vector<std::string> header;  // empty when the file has none
  std::vector<std::vector<std::string>> rows;
};

/// RFC-4180 reader: quoted fields, doubled quotes, CRLF or LF line ends.
CsvTable read_csv_table(const std::string& path, bool has_header);

/// Loads a numeric dataset. `label_column` is a header name or a zero-based
/// index; every other cell must parse as a finite real.
Dataset load_csv(const std::string& path, bool has_header = true,
                 const std::optional<std::string>& label_column = std::nullopt);

/// Writes a header row, then one row per sample with values in shortest
/// round-trip form, so load_csv reads the matrix back bit-exactly. The
/// label column, if any, comes last.
void save_csv(const Dataset& ds, const std::string& path);

/// Text form of a double that round-trips exactly.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Transformations

struct FilterResult {
  Dataset data;
  std::vector<std::size_t> removed;  // ascending
};

/// Drops every row with some |x - mean| > threshold * sd, with column means
/// and population standard deviations computed once on the input. Columns
/// with zero spread never trigger removal.
FilterResult zscore_filter(const Dataset& ds, double threshold = 10.0);

struct SplitSpec {
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  bool stratified = true;

  void validate() const;
};

struct Split {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_rows;  // ascending
  std::vector<std::size_t> test_rows;   // ascending
};

/// Seeded holdout split. Non-stratified: round(fraction * n) rows go to
/// train. Stratified: round(fraction * n_c) rows of every class go to train,
/// clamped so each class keeps at least one row on each side.
Split train_test_split(const Dataset& ds, const SplitSpec& spec);

/// Appends `count` Gaussian columns named noise_0, noise_1, ... Each copies
/// the mean and population standard deviation of a uniformly drawn existing
/// column.
Dataset synth_noise_features(const Dataset& ds, std::size_t count, std::uint64_t seed);

struct Affine {
  double scale = 1.0;
  double offset = 0.0;
};

/// Appends scale * column + offset for each source column, named <name>_dup.
Dataset duplicate_features(const Dataset& ds, const FeatureSet& source, Affine affine = {});

/// Column-wise z-scores with population standard deviation; zero-spread
/// columns are only centered.
Matrix standardize_columns(const Matrix& x);

}  // namespace otfs
