#include "otfs/gw_select.hpp"

#include <algorithm>
#include <numeric>

#include "otfs/error.hpp"
#include "otfs/parallel.hpp"
#include "otfs/random.hpp"

namespace otfs {

std::vector<std::size_t> gw_row_subsample(const Dataset& ds, std::size_t cap, std::uint64_t seed) {
  if (cap < 2) throw InvalidArgument("GW row cap must be >= 2");
  std::vector<std::size_t> order(ds.n_samples());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (Eigen::Index c = 0; c < ds.x.cols(); ++c) {
      const double va = ds.x(static_cast<Eigen::Index>(a), c);
      const double vb = ds.x(static_cast<Eigen::Index>(b), c);
      if (va != vb) return va < vb;
    }
    return false;
  });
  if (order.size() <= cap) return order;
  Rng rng(derive_seed(seed, 0x67775F726F7773ULL));
  std::vector<std::size_t> picks = rng.sample_without_replacement(order.size(), cap);
  std::sort(picks.begin(), picks.end());
  std::vector<std::size_t> rows;
  rows.reserve(cap);
  for (std::size_t k : picks) rows.push_back(order[k]);
  return rows;
}

namespace {

Vector uniform_weights(std::size_t n) { return Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)); }

}  // namespace

GwCriterionResult gw_to_full_on_rows(const Dataset& ds, const FeatureSet& t, const ot::GwConfig& cfg,
                                     std::span<const std::size_t> rows) {
  t.validate(ds.n_features());
  cfg.validate();
  const Matrix dx = ot::pairwise_distances(ds.submatrix(rows, t));
  const Matrix dy = ot::pairwise_distances(ds.submatrix(rows, FeatureSet::range(0, ds.n_features())));
  const Vector w = uniform_weights(rows.size());
  const ot::GwResult gw = ot::entropic_gw(dx, dy, w, w, cfg);
  GwCriterionResult out;
  out.gwd = gw.value;
  out.feature_set = t;
  out.n_used = rows.size();
  out.config = cfg;
  out.converged = gw.converged;
  return out;
}

GwCriterionResult gw_to_full(const Dataset& ds, const FeatureSet& t, const ot::GwConfig& cfg, std::size_t cap) {
  t.validate(ds.n_features());
  const std::vector<std::size_t> rows = gw_row_subsample(ds, cap, cfg.seed);
  return gw_to_full_on_rows(ds, t, cfg, rows);
}

GwRedundancy feature_redundancy_gw(const Dataset& ds, const FeatureSet& t, std::size_t f, const ot::GwConfig& cfg,
                                   std::size_t cap, double floor) {
  t.validate(ds.n_features());
  if (!t.contains(f)) throw InvalidArgument("feature_redundancy_gw: feature " + std::to_string(f) + " is not in the set");
  if (t.size() < 2) throw InvalidArgument("feature_redundancy_gw: the set must have at least two features");
  if (!(floor > 0.0)) throw InvalidArgument("feature_redundancy_gw: floor must be positive");
  cfg.validate();
  const std::vector<std::size_t> rows = gw_row_subsample(ds, cap, cfg.seed);
  const Matrix dx = ot::pairwise_distances(ds.submatrix(rows, t.without(f)));
  const Matrix dy = ot::pairwise_distances(ds.submatrix(rows, t));
  const Vector w = uniform_weights(rows.size());
  const ot::GwResult gw = ot::entropic_gw(dx, dy, w, w, cfg);
  GwRedundancy out;
  out.distance = gw.value;
  out.redundancy = 1.0 / std::max(gw.value, floor);
  out.n_used = rows.size();
  out.converged = gw.converged;
  return out;
}

std::vector<GwRankEntry> gw_ranking(const Dataset& ds, const std::vector<FeatureSet>& candidates,
                                    const ot::GwConfig& cfg, std::size_t cap) {
  if (candidates.empty()) throw InvalidArgument("gw_ranking: no candidates");
  for (const auto& t : candidates) t.validate(ds.n_features());
  const std::vector<std::size_t> rows = gw_row_subsample(ds, cap, cfg.seed);
  std::vector<GwRankEntry> out(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t k) {
    const GwCriterionResult r = gw_to_full_on_rows(ds, candidates[k], cfg, rows);
    out[k] = {candidates[k], r.gwd, k, r.converged};
  });
  std::stable_sort(out.begin(), out.end(), [](const GwRankEntry& a, const GwRankEntry& b) { return a.gwd < b.gwd; });
  return out;
}

}  // namespace otfs
