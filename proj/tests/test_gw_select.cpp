#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "otfs/error.hpp"
#include "otfs/gw_select.hpp"
#include "otfs/random.hpp"
#include "otfs/synthetic.hpp"

using namespace otfs;

namespace {

PlantedDataset planted(std::uint64_t seed, std::size_t relevant = 3, std::size_t noise = 3, std::size_t n = 120) {
  PlantedSpec spec;
  spec.n_samples = n;
  spec.n_classes = 3;
  spec.n_relevant = relevant;
  spec.n_noise = noise;
  spec.seed = seed;
  return make_planted(spec);
}

Dataset permuted_rows(const Dataset& ds, std::uint64_t seed) {
  std::vector<std::size_t> order(ds.n_samples());
  std::iota(order.begin(), order.end(), 0);
  Rng(seed).shuffle(order);
  return ds.select_rows(order);
}

constexpr std::size_t kCap = 80;

}  // namespace

TEST_CASE("gw_row_subsample") {
  const Dataset ds = planted(1).data;
  const auto rows = gw_row_subsample(ds, 50, 3);
  CHECK(rows.size() == 50);
  CHECK(std::set<std::size_t>(rows.begin(), rows.end()).size() == 50);
  CHECK(rows == gw_row_subsample(ds, 50, 3));
  CHECK(gw_row_subsample(ds, 500, 3).size() == ds.n_samples());
  CHECK_THROWS_AS(gw_row_subsample(ds, 1, 3), InvalidArgument);

  // The same rows by content after a permutation of the dataset.
  const Dataset shuffled = permuted_rows(ds, 9);
  const auto other = gw_row_subsample(shuffled, 50, 3);
  CHECK(ds.submatrix(rows, FeatureSet::range(0, ds.n_features())) ==
        shuffled.submatrix(other, FeatureSet::range(0, ds.n_features())));
}

TEST_CASE("gw_to_full examples") {
  const auto p = planted(2);
  const FeatureSet all = FeatureSet::range(0, p.data.n_features());
  ot::GwConfig cfg;
  const GwCriterionResult full = gw_to_full(p.data, all, cfg, kCap);
  CHECK(full.gwd <= cfg.tol);
  CHECK(full.n_used == kCap);
  CHECK(full.feature_set == all);
  CHECK(full.converged);

  const GwCriterionResult noise = gw_to_full(p.data, {p.noise[0]}, cfg, kCap);
  CHECK(noise.gwd > full.gwd);
  CHECK(noise.gwd > 0.01);

  const GwCriterionResult small = gw_to_full(p.data, {0}, cfg, 1000);
  CHECK(small.n_used == p.data.n_samples());

  CHECK_THROWS_AS(gw_to_full(p.data, FeatureSet{}, cfg, kCap), InvalidArgument);
  CHECK_THROWS_AS(gw_to_full(p.data, {0}, cfg, 1), InvalidArgument);
}

TEST_CASE("gw_to_full on copies of one column") {
  Rng rng(5);
  Dataset ds;
  ds.x.resize(100, 4);
  for (Eigen::Index i = 0; i < 100; ++i) ds.x.row(i).setConstant(rng.normal());
  ds.feature_names = {"a", "b", "c", "d"};
  ot::GwConfig cfg;
  CHECK(gw_to_full(ds, {0}, cfg, kCap).gwd <= cfg.tol);
  cfg.normalize_metrics = false;
  CHECK(gw_to_full(ds, {0}, cfg, kCap).gwd > 0.1);
}

TEST_CASE("gw_to_full invariances") {
  const auto p = planted(3);
  ot::GwConfig cfg;
  const FeatureSet t{p.relevant[0], p.noise[1]};
  const double base = gw_to_full(p.data, t, cfg, kCap).gwd;
  CHECK(std::abs(gw_to_full(permuted_rows(p.data, 4), t, cfg, kCap).gwd - base) <= cfg.tol);
  Dataset scaled = p.data;
  scaled.x *= 7.5;
  CHECK(std::abs(gw_to_full(scaled, t, cfg, kCap).gwd - base) <= cfg.tol);
  CHECK(gw_to_full(p.data, t, cfg, kCap).gwd == base);
}

TEST_CASE("feature_redundancy_gw") {
  const auto p = planted(4, 2, 3);
  Dataset ds = duplicate_features(p.data, {p.relevant[0], p.noise[0]});
  const std::size_t rel_dup = p.data.n_features();
  const std::size_t noise_dup = p.data.n_features() + 1;
  ot::GwConfig cfg;
  const double floor = 1e-9;

  const GwRedundancy dup = feature_redundancy_gw(ds, {p.relevant[0], rel_dup}, rel_dup, cfg, kCap, floor);
  CHECK(dup.distance <= floor);
  CHECK(dup.redundancy == 1.0 / floor);

  const GwRedundancy indep = feature_redundancy_gw(ds, {p.relevant[0], p.relevant[1]}, p.relevant[1], cfg, kCap, floor);
  CHECK(indep.redundancy < dup.redundancy);
  CHECK(indep.redundancy <= 1.0 / floor);
  CHECK(indep.distance > 0.0);

  const FeatureSet mixed{p.relevant[0], p.noise[0], p.noise[1], noise_dup};
  const double informative = feature_redundancy_gw(ds, mixed, p.relevant[0], cfg, kCap, floor).redundancy;
  const double duplicated = feature_redundancy_gw(ds, mixed, noise_dup, cfg, kCap, floor).redundancy;
  const double plain_noise = feature_redundancy_gw(ds, mixed, p.noise[1], cfg, kCap, floor).redundancy;
  CHECK(informative < duplicated);
  CHECK(plain_noise <= duplicated);

  CHECK_THROWS_AS(feature_redundancy_gw(ds, {0, 1}, 2, cfg, kCap, floor), InvalidArgument);
  CHECK_THROWS_AS(feature_redundancy_gw(ds, {0}, 0, cfg, kCap, floor), InvalidArgument);
  CHECK_THROWS_AS(feature_redundancy_gw(ds, {0, 1}, 0, cfg, kCap, 0.0), InvalidArgument);
}

TEST_CASE("gw_ranking") {
  const auto p = planted(6, 4, 2);
  const FeatureSet all = FeatureSet::range(0, p.data.n_features());
  ot::GwConfig cfg;
  const std::vector<FeatureSet> cands{{p.noise[0]}, all, {p.relevant[0], p.relevant[1]}};
  const auto ranked = gw_ranking(p.data, cands, cfg, kCap);
  REQUIRE(ranked.size() == 3);
  CHECK(ranked[0].feature_set == all);
  CHECK(ranked[0].candidate_index == 1);
  for (std::size_t i = 1; i < ranked.size(); ++i) CHECK(ranked[i - 1].gwd <= ranked[i].gwd);

  // Ties keep input order.
  const std::vector<FeatureSet> tied{{0}, {1}, {0}, {1}};
  const auto t = gw_ranking(p.data, tied, cfg, kCap);
  REQUIRE(t.size() == 4);
  for (std::size_t i = 1; i < 4; ++i) {
    if (t[i - 1].gwd == t[i].gwd) CHECK(t[i - 1].candidate_index < t[i].candidate_index);
  }
  CHECK(t[0].gwd == t[1].gwd);
  CHECK(t[2].gwd == t[3].gwd);

  // Nested relevant subsets come out in inclusion order.
  std::vector<FeatureSet> nested;
  for (std::size_t k = p.relevant.size(); k >= 1; --k) {
    nested.emplace_back(std::vector<std::size_t>(p.relevant.begin(), p.relevant.begin() + static_cast<std::ptrdiff_t>(k)));
  }
  const auto order = gw_ranking(p.data, nested, cfg, kCap);
  for (std::size_t i = 0; i < order.size(); ++i) CHECK(order[i].candidate_index == i);

  CHECK_THROWS_AS(gw_ranking(p.data, {}, cfg, kCap), InvalidArgument);
}
