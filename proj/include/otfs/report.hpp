#pragma once

// JSON views of library results and small file helpers for reports.

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

#include "otfs/dataset.hpp"
#include "otfs/distmat.hpp"
#include "otfs/eval.hpp"
#include "otfs/gw_select.hpp"
#include "otfs/select.hpp"

namespace otfs {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t v);

/// Finite doubles as numbers, NaN and infinities as null.
Json number_or_null(double v);

Json to_json(const OtOptions& opt);
Json to_json(const ot::GwConfig& cfg);
Json to_json(const SelectionConfig& cfg);
Json to_json(const Matrix& m);

/// [{"index": i, "name": ...}, ...]
Json feature_list(const FeatureSet& t, const Dataset& ds);

Json to_json(const SelectionResult& r, const Dataset& ds);
Json to_json(const ClassDistanceMatrix& m, const Dataset& ds);
Json to_json(const GwCriterionResult& r, const Dataset& ds);
Json to_json(const AccuracySummary& s);
Json to_json(const GwdAccuracyTable& t, const Dataset& ds);

/// Writes `content` to `path + ".partial"` and renames it over `path`, so a
/// failed run never leaves a truncated file under the final name.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace otfs
