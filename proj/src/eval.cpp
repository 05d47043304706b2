#include "otfs/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "otfs/error.hpp"
#include "otfs/gw_select.hpp"
#include "otfs/parallel.hpp"
#include "otfs/random.hpp"

namespace otfs {

double knn_accuracy(const Dataset& train, const Dataset& test, const FeatureSet& t, std::size_t k) {
  if (!train.has_labels() || !test.has_labels()) throw InvalidArgument("knn_accuracy: labels required");
  if (k == 0 || k % 2 == 0) throw InvalidArgument("knn_accuracy: k must be odd and positive");
  if (t.empty()) throw InvalidArgument("knn_accuracy: empty feature set");
  t.validate(train.n_features());
  t.validate(test.n_features());
  const std::size_t n_train = train.n_samples();
  if (k > n_train) throw InvalidArgument("knn_accuracy: k exceeds the train size");
  if (test.n_samples() == 0) throw DataError("knn_accuracy: empty test set");

  const Matrix a = train.columns(t);
  const Matrix b = test.columns(t);
  std::vector<int> truth(test.n_samples(), -1);
  for (std::size_t r = 0; r < test.n_samples(); ++r) {
    const std::string& name = test.class_names[static_cast<std::size_t>(test.labels[r])];
    const auto it = std::find(train.class_names.begin(), train.class_names.end(), name);
    if (it != train.class_names.end()) truth[r] = static_cast<int>(it - train.class_names.begin());
  }

  std::vector<char> hit(test.n_samples(), 0);
  parallel_for(test.n_samples(), [&](std::size_t r) {
    std::vector<std::pair<double, std::size_t>> d(n_train);
    for (std::size_t i = 0; i < n_train; ++i) {
      d[i] = {(a.row(static_cast<Eigen::Index>(i)) - b.row(static_cast<Eigen::Index>(r))).squaredNorm(), i};
    }
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
    std::vector<std::size_t> votes(train.n_classes(), 0);
    for (std::size_t j = 0; j < k; ++j) ++votes[static_cast<std::size_t>(train.labels[d[j].second])];
    const auto pred = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    hit[r] = pred == truth[r] ? 1 : 0;
  });
  const auto correct = std::accumulate(hit.begin(), hit.end(), std::size_t{0});
  return static_cast<double>(correct) / static_cast<double>(test.n_samples());
}

EvalMethod method_from_config(std::string name, SelectionConfig cfg) {
  return {std::move(name), [cfg](const Dataset& train, std::size_t m, std::uint64_t seed) {
            SelectionConfig c = cfg;
            c.m = m;
            c.seed = derive_seed(cfg.seed, seed);
            return select_features(train, c).chosen;
          }};
}

EvalMethod variance_ratio_method(std::string name) {
  return {std::move(name), [](const Dataset& train, std::size_t m, std::uint64_t) {
            const auto ranked = variance_ratio_baseline(train);
            if (m > ranked.size()) throw InvalidArgument("subset size exceeds the number of features");
            std::vector<std::size_t> out;
            for (std::size_t j = 0; j < m; ++j) out.push_back(ranked[j].feature);
            return FeatureSet(out);
          }};
}

EvalMethod fixed_order_method(std::string name, std::vector<std::size_t> order) {
  return {std::move(name), [order = std::move(order)](const Dataset& train, std::size_t m, std::uint64_t) {
            if (m > order.size()) throw InvalidArgument("subset size exceeds the fixed order length");
            FeatureSet out(std::vector<std::size_t>(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m)));
            out.validate(train.n_features());
            return out;
          }};
}

double AccuracyCurve::accuracy(std::size_t method, std::size_t size_index, std::size_t repeat) const {
  return records[(method * sizes.size() + size_index) * n_repeats + repeat].accuracy;
}

std::vector<AccuracySummary> AccuracyCurve::summary() const {
  std::vector<AccuracySummary> out;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (std::size_t s = 0; s < sizes.size(); ++s) {
      AccuracySummary row{methods[m], sizes[s]};
      double sum = 0.0;
      row.min = accuracy(m, s, 0);
      row.max = row.min;
      for (std::size_t r = 0; r < n_repeats; ++r) {
        const double v = accuracy(m, s, r);
        sum += v;
        row.min = std::min(row.min, v);
        row.max = std::max(row.max, v);
      }
      row.mean = sum / static_cast<double>(n_repeats);
      double ss = 0.0;
      for (std::size_t r = 0; r < n_repeats; ++r) ss += (accuracy(m, s, r) - row.mean) * (accuracy(m, s, r) - row.mean);
      row.std = std::sqrt(ss / static_cast<double>(n_repeats));
      out.push_back(row);
    }
  }
  return out;
}

AccuracyCurve accuracy_curve(const Dataset& ds, const std::vector<EvalMethod>& methods,
                             const std::vector<std::size_t>& sizes, const CurveOptions& opt) {
  if (methods.empty()) throw InvalidArgument("accuracy_curve: no methods");
  if (sizes.empty()) throw InvalidArgument("accuracy_curve: no sizes");
  if (opt.n_repeats < 1) throw InvalidArgument("accuracy_curve: n_repeats must be >= 1");
  for (std::size_t s = 0; s < sizes.size(); ++s) {
    if (sizes[s] < 1) throw InvalidArgument("accuracy_curve: sizes must be >= 1");
    if (s > 0 && sizes[s] <= sizes[s - 1]) throw InvalidArgument("accuracy_curve: sizes must be strictly increasing");
  }
  if (sizes.back() > ds.n_features()) throw InvalidArgument("accuracy_curve: size exceeds the number of features");
  if (opt.k == 0 || opt.k % 2 == 0) throw InvalidArgument("accuracy_curve: k must be odd and positive");

  AccuracyCurve curve;
  curve.sizes = sizes;
  curve.n_repeats = opt.n_repeats;
  for (const auto& m : methods) curve.methods.push_back(m.name);
  for (std::size_t r = 0; r < opt.n_repeats; ++r) curve.seeds.push_back(derive_seed(opt.seed, r));
  curve.records.resize(methods.size() * sizes.size() * opt.n_repeats);

  std::vector<Split> splits;
  for (std::size_t r = 0; r < opt.n_repeats; ++r) {
    splits.push_back(train_test_split(ds, SplitSpec{opt.train_fraction, curve.seeds[r], true}));
  }
  const std::size_t jobs = methods.size() * sizes.size() * opt.n_repeats;
  parallel_for(jobs, [&](std::size_t job) {
    const std::size_t r = job % opt.n_repeats;
    const std::size_t s = (job / opt.n_repeats) % sizes.size();
    const std::size_t m = job / (opt.n_repeats * sizes.size());
    const Split& split = splits[r];
    const FeatureSet chosen = methods[m].select(split.train, sizes[s], curve.seeds[r]);
    if (chosen.size() != sizes[s]) throw SolverError("method '" + methods[m].name + "' returned a subset of the wrong size");
    curve.records[job] = {methods[m].name, sizes[s], r, knn_accuracy(split.train, split.test, chosen, opt.k)};
  });
  return curve;
}

std::vector<RankedFeature> variance_ratio_baseline(const Dataset& ds) {
  const ClassPartition part = partition_by_class(ds);
  const std::size_t k = part.n_classes();
  std::vector<RankedFeature> out(ds.n_features());
  for (std::size_t f = 0; f < ds.n_features(); ++f) {
    const auto col = static_cast<Eigen::Index>(f);
    std::vector<double> means(k);
    double within = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      double s = 0.0;
      for (std::size_t r : part.rows[c]) s += ds.x(static_cast<Eigen::Index>(r), col);
      means[c] = s / static_cast<double>(part.rows[c].size());
      double v = 0.0;
      for (std::size_t r : part.rows[c]) {
        const double e = ds.x(static_cast<Eigen::Index>(r), col) - means[c];
        v += e * e;
      }
      within += v / static_cast<double>(part.rows[c].size());
    }
    within /= static_cast<double>(k);
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(k);
    double between = 0.0;
    for (double m : means) between += (m - grand) * (m - grand);
    between /= static_cast<double>(k);
    out[f] = {f, between / (within + 1e-12)};
  }
  std::stable_sort(out.begin(), out.end(), [](const RankedFeature& a, const RankedFeature& b) { return a.score > b.score; });
  return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("spearman: length mismatch");
  if (x.size() < 2) return std::nullopt;
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
  return sxy / std::sqrt(sxx * syy);
}

GwdAccuracyTable gwd_accuracy_table(const Dataset& ds, const std::vector<FeatureSet>& subsets, const ot::GwConfig& cfg,
                                    const GwdTableOptions& opt) {
  if (subsets.empty()) throw InvalidArgument("gwd_accuracy_table: no subsets");
  if (!(opt.floor > 0.0)) throw InvalidArgument("gwd_accuracy_table: floor must be positive");
  for (const auto& s : subsets) s.validate(ds.n_features());
  cfg.validate();

  const Split split = train_test_split(ds, SplitSpec{opt.train_fraction, opt.seed, true});
  GwdAccuracyTable table;
  table.gw_rows = gw_row_subsample(split.train, opt.cap, cfg.seed);
  table.rows.resize(subsets.size());
  parallel_for(subsets.size(), [&](std::size_t i) {
    const GwCriterionResult g = gw_to_full_on_rows(split.train, subsets[i], cfg, table.gw_rows);
    GwdAccuracyRow& row = table.rows[i];
    row.subset = subsets[i];
    row.gwd = g.gwd;
    row.inverse_gwd = 1.0 / std::max(g.gwd, opt.floor);
    row.converged = g.converged;
    row.accuracy = knn_accuracy(split.train, split.test, subsets[i], opt.k);
  });
  std::vector<double> inv;
  std::vector<double> acc;
  for (const auto& r : table.rows) {
    inv.push_back(r.inverse_gwd);
    acc.push_back(r.accuracy);
  }
  table.spearman = spearman(inv, acc);
  return table;
}

}  // namespace otfs
