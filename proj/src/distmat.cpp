#include "otfs/distmat.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "otfs/error.hpp"
#include "otfs/parallel.hpp"
#include "otfs/random.hpp"

namespace otfs {

void OtOptions::validate() const {
  if (cap < 1) throw InvalidArgument("cap must be >= 1");
  if (n_projections < 1) throw InvalidArgument("n_projections must be >= 1");
}

const char* to_string(W1Mode mode) { return mode == W1Mode::exact ? "exact" : "sliced"; }

W1Mode parse_w1_mode(const std::string& s) {
  if (s == "exact") return W1Mode::exact;
  if (s == "sliced") return W1Mode::sliced;
  throw InvalidArgument("unknown W1 mode '" + s + "' (expected exact or sliced)");
}

namespace {

Matrix class_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(rows[r]));
  return out;
}

std::vector<double> class_values(const Matrix& x, const std::vector<std::size_t>& rows) {
  std::vector<double> out(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) out[r] = x(static_cast<Eigen::Index>(rows[r]), 0);
  return out;
}

Vector upper_triangle(const Matrix& m) {
  const Eigen::Index k = m.rows();
  Vector v(k * (k - 1) / 2);
  Eigen::Index t = 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) v(t++) = m(i, j);
  }
  return v;
}

void check_same_classes(const ClassDistanceMatrix& a, const ClassDistanceMatrix& b, const char* op) {
  if (a.class_names != b.class_names || a.d.rows() != b.d.rows()) {
    throw InvalidArgument(std::string(op) + ": matrices have different classes or class order");
  }
}

}  // namespace

ClassDistanceMatrix class_distance_matrix(const Dataset& ds, const FeatureSet& t, const OtOptions& opt) {
  opt.validate();
  t.validate(ds.n_features());
  const ClassPartition part = partition_by_class(ds);
  const auto k = static_cast<Eigen::Index>(part.n_classes());

  Matrix x = ds.columns(t);
  if (t.size() > 1 && opt.standardize) x = standardize_columns(x);

  ClassDistanceMatrix out;
  out.d = Matrix::Zero(k, k);
  out.class_names = part.class_names;
  out.feature_set = t;
  out.ot_config = opt;

  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i + 1; j < k; ++j) pairs.emplace_back(i, j);
  }
  std::vector<double> values(pairs.size());

  if (t.size() == 1) {
    std::vector<std::vector<double>> samples(part.n_classes());
    for (std::size_t c = 0; c < part.n_classes(); ++c) samples[c] = class_values(x, part.rows[c]);
    parallel_for(pairs.size(), [&](std::size_t p) {
      values[p] = ot::wasserstein1_1d(samples[static_cast<std::size_t>(pairs[p].first)],
                                      samples[static_cast<std::size_t>(pairs[p].second)]);
    });
  } else {
    std::vector<ot::WeightedPointCloud> clouds;
    for (std::size_t c = 0; c < part.n_classes(); ++c) {
      clouds.push_back(ot::WeightedPointCloud::uniform(class_rows(x, part.rows[c])));
    }
    parallel_for(pairs.size(), [&](std::size_t p) {
      const auto [i, j] = pairs[p];
      const std::uint64_t seed = derive_seed(opt.seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j));
      const auto& a = clouds[static_cast<std::size_t>(i)];
      const auto& b = clouds[static_cast<std::size_t>(j)];
      values[p] = opt.mode == W1Mode::exact ? ot::wasserstein1_nd(a, b, opt.cap, seed)
                                            : ot::sliced_wasserstein1(a, b, opt.n_projections, seed);
    });
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    out.d(pairs[p].first, pairs[p].second) = values[p];
    out.d(pairs[p].second, pairs[p].first) = values[p];
  }
  return out;
}

std::vector<ClassDistanceMatrix> single_feature_matrices(const Dataset& ds, const OtOptions& opt) {
  std::vector<ClassDistanceMatrix> out(ds.n_features());
  parallel_for(ds.n_features(), [&](std::size_t f) { out[f] = class_distance_matrix(ds, FeatureSet{f}, opt); });
  return out;
}

double frobenius_utility(const ClassDistanceMatrix& m) { return m.d.squaredNorm(); }

ClassDistanceMatrix mean_scale(const ClassDistanceMatrix& m) {
  const Eigen::Index k = m.d.rows();
  if (k < 2) throw DataError("mean_scale: need at least two classes");
  const double mean = (m.d.sum() - m.d.trace()) / static_cast<double>(k * (k - 1));
  if (!(mean > 0.0)) {
    throw DataError("mean_scale: distance matrix for feature set " + m.feature_set.to_string() +
                    " has no positive off-diagonal entry");
  }
  ClassDistanceMatrix out = m;
  out.d /= mean;
  return out;
}

double matrix_similarity(const ClassDistanceMatrix& a, const ClassDistanceMatrix& b, bool scaled) {
  check_same_classes(a, b, "matrix_similarity");
  const Vector va = upper_triangle(scaled ? mean_scale(a).d : a.d);
  const Vector vb = upper_triangle(scaled ? mean_scale(b).d : b.d);
  const double na = va.norm();
  const double nb = vb.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw DataError("matrix_similarity: zero distance matrix");
  return std::clamp(va.dot(vb) / (na * nb), -1.0, 1.0);
}

Matrix relative_change_matrix(const ClassDistanceMatrix& before, const ClassDistanceMatrix& after) {
  check_same_classes(before, after, "relative_change_matrix");
  const Eigen::Index k = before.d.rows();
  Matrix out = Matrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      if (i == j) continue;
      if (!(before.d(i, j) > 0.0)) {
        throw DataError("relative_change_matrix: zero distance between classes '" +
                        before.class_names[static_cast<std::size_t>(i)] + "' and '" +
                        before.class_names[static_cast<std::size_t>(j)] + "'");
      }
      out(i, j) = (after.d(i, j) - before.d(i, j)) / before.d(i, j);
    }
  }
  return out;
}

double redundancy_to_set(const std::vector<ClassDistanceMatrix>& singles, std::size_t f, const FeatureSet& t,
                         bool scaled, RedundancyAggregation agg) {
  t.validate(singles.size());
  if (f >= singles.size()) throw InvalidArgument("redundancy_to_set: feature index out of range");
  if (t.contains(f)) throw InvalidArgument("redundancy_to_set: feature " + std::to_string(f) + " is already in the set");
  double best = -1.0;
  double sum = 0.0;
  for (std::size_t g : t) {
    const double s = matrix_similarity(singles[f], singles[g], scaled);
    best = std::max(best, s);
    sum += s;
  }
  return agg == RedundancyAggregation::max ? best : sum / static_cast<double>(t.size());
}

double redundancy_to_set(const Dataset& ds, std::size_t f, const FeatureSet& t, bool scaled, const OtOptions& opt,
                         RedundancyAggregation agg) {
  t.validate(ds.n_features());
  if (f >= ds.n_features()) throw InvalidArgument("redundancy_to_set: feature index out of range");
  if (t.contains(f)) throw InvalidArgument("redundancy_to_set: feature " + std::to_string(f) + " is already in the set");
  const ClassDistanceMatrix mf = class_distance_matrix(ds, FeatureSet{f}, opt);
  double best = -1.0;
  double sum = 0.0;
  for (std::size_t g : t) {
    const double s = matrix_similarity(mf, class_distance_matrix(ds, FeatureSet{g}, opt), scaled);
    best = std::max(best, s);
    sum += s;
  }
  return agg == RedundancyAggregation::max ? best : sum / static_cast<double>(t.size());
}

void write_matrix_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& class_names) {
  out << "class";
  for (const auto& name : class_names) out << ',' << name;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << class_names[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << format_double(m(i, j));
    out << '\n';
  }
}

}  // namespace otfs
