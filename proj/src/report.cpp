#include "otfs/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "otfs/error.hpp"

namespace otfs {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json to_json(const OtOptions& opt) {
  return Json{{"mode", to_string(opt.mode)},
              {"cap", opt.cap},
              {"n_projections", opt.n_projections},
              {"seed", opt.seed},
              {"standardize", opt.standardize}};
}

Json to_json(const ot::GwConfig& cfg) {
  return Json{{"p", cfg.p},
              {"q", cfg.q},
              {"epsilon", cfg.epsilon},
              {"max_outer_iter", cfg.max_outer_iter},
              {"max_sinkhorn_iter", cfg.max_sinkhorn_iter},
              {"tol", cfg.tol},
              {"normalize_metrics", cfg.normalize_metrics},
              {"polish_iter", cfg.polish_iter},
              {"seed", cfg.seed}};
}

Json to_json(const SelectionConfig& cfg) {
  return Json{{"criterion", to_string(cfg.criterion)},
              {"strategy", to_string(cfg.strategy)},
              {"m", cfg.m},
              {"n_trials", cfg.n_trials},
              {"lambda", cfg.lambda},
              {"redundancy", cfg.redundancy == RedundancyAggregation::max ? "max" : "mean"},
              {"seed", cfg.seed},
              {"gw_cap", cfg.gw_cap},
              {"ot", to_json(cfg.ot)},
              {"gw", to_json(cfg.gw)}};
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number_or_null(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json feature_list(const FeatureSet& t, const Dataset& ds) {
  Json out = Json::array();
  for (std::size_t f : t) {
    out.push_back({{"index", f}, {"name", f < ds.feature_names.size() ? ds.feature_names[f] : std::to_string(f)}});
  }
  return out;
}

Json to_json(const SelectionResult& r, const Dataset& ds) {
  Json trace = Json::array();
  for (std::size_t s = 0; s < r.trace.size(); ++s) {
    const TraceStep& step = r.trace[s];
    Json j{{"step", s}, {"features", feature_list(step.features, ds)}, {"score", number_or_null(step.score)}};
    if (!std::isnan(step.relevance)) j["relevance"] = step.relevance;
    if (!std::isnan(step.redundancy)) j["redundancy"] = step.redundancy;
    trace.push_back(std::move(j));
  }
  return Json{{"chosen", feature_list(r.chosen, ds)},
              {"criterion_details", r.criterion_details},
              {"converged", r.converged},
              {"trace", std::move(trace)}};
}

Json to_json(const ClassDistanceMatrix& m, const Dataset& ds) {
  return Json{{"features", feature_list(m.feature_set, ds)},
              {"class_names", m.class_names},
              {"utility", frobenius_utility(m)},
              {"matrix", to_json(m.d)}};
}

Json to_json(const GwCriterionResult& r, const Dataset& ds) {
  return Json{{"features", feature_list(r.feature_set, ds)},
              {"gwd", number_or_null(r.gwd)},
              {"n_used", r.n_used},
              {"converged", r.converged}};
}

Json to_json(const AccuracySummary& s) {
  return Json{{"method", s.method}, {"size", s.size}, {"mean", s.mean}, {"std", s.std}, {"min", s.min}, {"max", s.max}};
}

Json to_json(const GwdAccuracyTable& t, const Dataset& ds) {
  Json rows = Json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"features", feature_list(r.subset, ds)},
                    {"gwd", number_or_null(r.gwd)},
                    {"inverse_gwd", number_or_null(r.inverse_gwd)},
                    {"accuracy", r.accuracy},
                    {"converged", r.converged}});
  }
  return Json{{"rows", std::move(rows)},
              {"spearman", t.spearman ? Json(*t.spearman) : Json(nullptr)},
              {"n_gw_rows", t.gw_rows.size()}};
}

void write_file_atomic(const std::string& path, std::string_view content) {
  const std::string partial = path + ".partial";
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + partial);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw DataError("write failed for " + partial);
  }
  std::error_code ec;
  std::filesystem::rename(partial, path, ec);
  if (ec) throw DataError("cannot rename " + partial + " to " + path + ": " + ec.message());
}

}  // namespace otfs
