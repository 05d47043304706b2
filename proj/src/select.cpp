#include "otfs/select.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include "otfs/error.hpp"
#include "otfs/parallel.hpp"
#include "otfs/random.hpp"

namespace otfs {

const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::frobenius_supervised:
      return "frobenius_supervised";
    case Criterion::gw_unsupervised:
      return "gw_unsupervised";
    case Criterion::two_stage:
      return "two_stage";
  }
  return "?";
}

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::rank:
      return "rank";
    case Strategy::greedy:
      return "greedy";
    case Strategy::random_search:
      return "random_search";
  }
  return "?";
}

Criterion parse_criterion(const std::string& s) {
  if (s == "frobenius_supervised" || s == "frobenius") return Criterion::frobenius_supervised;
  if (s == "gw_unsupervised" || s == "gw") return Criterion::gw_unsupervised;
  if (s == "two_stage") return Criterion::two_stage;
  throw InvalidArgument("unknown criterion '" + s + "' (expected frobenius, gw or two_stage)");
}

Strategy parse_strategy(const std::string& s) {
  if (s == "rank") return Strategy::rank;
  if (s == "greedy") return Strategy::greedy;
  if (s == "random_search" || s == "random") return Strategy::random_search;
  throw InvalidArgument("unknown strategy '" + s + "' (expected rank, greedy or random)");
}

void SelectionConfig::validate() const {
  if (m < 1) throw InvalidArgument("m must be >= 1");
  if (strategy == Strategy::random_search && n_trials < 1) throw InvalidArgument("n_trials must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be finite and >= 0");
  if (gw_cap < 2) throw InvalidArgument("gw_cap must be >= 2");
  ot.validate();
  gw.validate();
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_size(const Dataset& ds, const SelectionConfig& cfg) {
  cfg.validate();
  if (cfg.m > ds.n_features()) {
    throw InvalidArgument("m = " + std::to_string(cfg.m) + " exceeds the number of features (" +
                          std::to_string(ds.n_features()) + ")");
  }
}

std::string describe(const SelectionConfig& cfg) {
  std::ostringstream s;
  switch (cfg.criterion) {
    case Criterion::frobenius_supervised:
      s << "maximize sum of squared class-pair W1 distances (" << to_string(cfg.ot.mode) << " W1"
        << (cfg.ot.standardize ? ", standardized multi-column sets" : "") << ")";
      break;
    case Criterion::gw_unsupervised:
      s << "minimize (" << cfg.gw.p << "," << cfg.gw.q << ")-GW distance to the full data matrix (epsilon "
        << cfg.gw.epsilon << ", row cap " << cfg.gw_cap << ")";
      break;
    case Criterion::two_stage:
      s << "relevance = squared Frobenius norm of the single-feature class distance matrix; redundancy = "
        << (cfg.redundancy == RedundancyAggregation::max ? "max" : "mean")
        << " scaled cosine similarity to selected features; score = relevance - " << cfg.lambda << " * redundancy";
      break;
  }
  s << "; strategy " << to_string(cfg.strategy);
  return s.str();
}

// Criterion value of a subset, oriented so that larger is better.
class SubsetScorer {
 public:
  SubsetScorer(const Dataset& ds, const SelectionConfig& cfg) : ds_(ds), cfg_(cfg) {
    if (cfg.criterion == Criterion::gw_unsupervised) rows_ = gw_row_subsample(ds, cfg.gw_cap, cfg.gw.seed);
  }

  bool supervised() const { return cfg_.criterion != Criterion::gw_unsupervised; }

  // Raw criterion value: utility (supervised) or GW distance (unsupervised).
  double raw(const FeatureSet& t, bool& converged) const {
    if (supervised()) return frobenius_utility(class_distance_matrix(ds_, t, cfg_.ot));
    const GwCriterionResult r = gw_to_full_on_rows(ds_, t, cfg_.gw, rows_);
    converged = converged && r.converged;
    return r.gwd;
  }

  bool better(double a, double b) const { return supervised() ? a > b : a < b; }

 private:
  const Dataset& ds_;
  const SelectionConfig& cfg_;
  std::vector<std::size_t> rows_;
};

// Evaluates all candidates in parallel and returns the raw values in order.
std::vector<double> score_all(const SubsetScorer& scorer, const std::vector<FeatureSet>& sets, bool& converged) {
  std::vector<double> values(sets.size());
  std::vector<char> ok(sets.size(), 1);
  parallel_for(sets.size(), [&](std::size_t k) {
    bool c = true;
    values[k] = scorer.raw(sets[k], c);
    ok[k] = c ? 1 : 0;
  });
  for (char c : ok) converged = converged && c;
  return values;
}

double similarity_or_zero(const ClassDistanceMatrix& a, const ClassDistanceMatrix& b) {
  if (!(a.d.maxCoeff() > 0.0) || !(b.d.maxCoeff() > 0.0)) return 0.0;
  return matrix_similarity(a, b, true);
}

}  // namespace

std::vector<RankedFeature> rank_by_disparity(const Dataset& ds, const SelectionConfig& cfg) {
  cfg.ot.validate();
  const std::vector<ClassDistanceMatrix> singles = single_feature_matrices(ds, cfg.ot);
  std::vector<RankedFeature> out(singles.size());
  for (std::size_t f = 0; f < singles.size(); ++f) out[f] = {f, frobenius_utility(singles[f])};
  std::stable_sort(out.begin(), out.end(), [](const RankedFeature& a, const RankedFeature& b) { return a.score > b.score; });
  return out;
}

SelectionResult greedy_forward(const Dataset& ds, const SelectionConfig& cfg) {
  const auto start = Clock::now();
  check_size(ds, cfg);
  SelectionResult result;
  result.criterion_details = describe(cfg);
  const SubsetScorer scorer(ds, cfg);
  FeatureSet chosen;
  while (chosen.size() < cfg.m) {
    std::vector<std::size_t> candidates;
    std::vector<FeatureSet> sets;
    for (std::size_t f = 0; f < ds.n_features(); ++f) {
      if (chosen.contains(f)) continue;
      candidates.push_back(f);
      sets.push_back(chosen.with(f));
    }
    const std::vector<double> values = score_all(scorer, sets, result.converged);
    std::size_t best = 0;
    for (std::size_t k = 1; k < values.size(); ++k) {
      if (scorer.better(values[k], values[best])) best = k;
    }
    chosen = sets[best];
    result.trace.push_back({FeatureSet{candidates[best]}, values[best]});
  }
  result.chosen = chosen;
  result.wall_seconds = seconds_since(start);
  return result;
}

SelectionResult random_search(const Dataset& ds, const SelectionConfig& cfg) {
  const auto start = Clock::now();
  check_size(ds, cfg);
  SelectionResult result;
  result.criterion_details = describe(cfg);
  const SubsetScorer scorer(ds, cfg);

  Rng rng(cfg.seed);
  std::vector<FeatureSet> trials;
  trials.reserve(cfg.n_trials);
  std::map<std::vector<std::size_t>, std::size_t> unique_index;
  std::vector<FeatureSet> unique;
  std::vector<std::size_t> trial_to_unique;
  for (std::size_t t = 0; t < cfg.n_trials; ++t) {
    std::vector<std::size_t> pick = rng.sample_without_replacement(ds.n_features(), cfg.m);
    std::sort(pick.begin(), pick.end());
    auto [it, inserted] = unique_index.emplace(pick, unique.size());
    if (inserted) unique.emplace_back(pick);
    trial_to_unique.push_back(it->second);
    trials.emplace_back(std::move(pick));
  }
  const std::vector<double> values = score_all(scorer, unique, result.converged);

  std::size_t best = 0;
  for (std::size_t t = 0; t < trials.size(); ++t) {
    const double v = values[trial_to_unique[t]];
    result.trace.push_back({trials[t], v});
    if (t > 0 && scorer.better(v, values[trial_to_unique[best]])) best = t;
  }
  result.chosen = trials[best];
  result.wall_seconds = seconds_since(start);
  return result;
}

SelectionResult two_stage_select(const Dataset& ds, const SelectionConfig& cfg) {
  const auto start = Clock::now();
  check_size(ds, cfg);
  SelectionResult result;
  result.criterion_details = describe(cfg);
  const std::vector<ClassDistanceMatrix> singles = single_feature_matrices(ds, cfg.ot);
  std::vector<double> relevance(singles.size());
  for (std::size_t f = 0; f < singles.size(); ++f) relevance[f] = frobenius_utility(singles[f]);

  FeatureSet chosen;
  while (chosen.size() < cfg.m) {
    std::size_t best_f = 0;
    double best_score = 0.0;
    double best_red = 0.0;
    bool have = false;
    for (std::size_t f = 0; f < singles.size(); ++f) {
      if (chosen.contains(f)) continue;
      double red = 0.0;
      if (!chosen.empty()) {
        // Constant columns have an all-zero matrix; they count as unrelated.
        double agg = cfg.redundancy == RedundancyAggregation::max ? -1.0 : 0.0;
        for (std::size_t g : chosen) {
          const double s = similarity_or_zero(singles[f], singles[g]);
          agg = cfg.redundancy == RedundancyAggregation::max ? std::max(agg, s) : agg + s;
        }
        red = cfg.redundancy == RedundancyAggregation::max ? agg : agg / static_cast<double>(chosen.size());
      }
      const double score = relevance[f] - cfg.lambda * red;
      if (!have || score > best_score) {
        have = true;
        best_f = f;
        best_score = score;
        best_red = red;
      }
    }
    chosen = chosen.with(best_f);
    TraceStep step{FeatureSet{best_f}, best_score};
    step.relevance = relevance[best_f];
    step.redundancy = best_red;
    result.trace.push_back(step);
  }
  result.chosen = chosen;
  result.wall_seconds = seconds_since(start);
  return result;
}

SelectionResult select_features(const Dataset& ds, const SelectionConfig& cfg) {
  if (cfg.criterion == Criterion::two_stage) return two_stage_select(ds, cfg);
  switch (cfg.strategy) {
    case Strategy::greedy:
      return greedy_forward(ds, cfg);
    case Strategy::random_search:
      return random_search(ds, cfg);
    case Strategy::rank:
      break;
  }
  const auto start = Clock::now();
  check_size(ds, cfg);
  SelectionResult result;
  result.criterion_details = describe(cfg);
  std::vector<std::size_t> order;
  if (cfg.criterion == Criterion::frobenius_supervised) {
    for (const RankedFeature& r : rank_by_disparity(ds, cfg)) {
      if (order.size() == cfg.m) break;
      order.push_back(r.feature);
      result.trace.push_back({FeatureSet{r.feature}, r.score});
    }
  } else {
    std::vector<FeatureSet> singles;
    for (std::size_t f = 0; f < ds.n_features(); ++f) singles.push_back(FeatureSet{f});
    for (const GwRankEntry& e : gw_ranking(ds, singles, cfg.gw, cfg.gw_cap)) {
      result.converged = result.converged && e.converged;
      if (order.size() == cfg.m) continue;
      order.push_back(e.feature_set[0]);
      result.trace.push_back({e.feature_set, e.gwd});
    }
  }
  result.chosen = FeatureSet(order);
  result.wall_seconds = seconds_since(start);
  return result;
}

}  // namespace otfs
