#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <numeric>
#include <ostream>
#include <sstream>

#include "otfs/cli.hpp"
#include "otfs/error.hpp"
#include "otfs/eval.hpp"
#include "otfs/gw_select.hpp"
#include "otfs/report.hpp"

namespace otfs::cli {

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

std::size_t parse_count(const std::string& s, const char* what) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != s.size() || s.front() == '-') throw InvalidArgument(std::string("bad ") + what + " '" + s + "'");
  return static_cast<std::size_t>(v);
}

FeatureSet parse_set(const std::string& text, const Dataset& ds) {
  std::vector<std::size_t> idx;
  for (const auto& tok : split(text, ',')) {
    if (tok.empty()) throw InvalidArgument("empty feature name in set '" + text + "'");
    const auto f = ds.find_feature(tok);
    if (!f) throw InvalidArgument("unknown feature '" + tok + "'");
    idx.push_back(*f);
  }
  FeatureSet t(idx);
  t.validate(ds.n_features());
  return t;
}

std::vector<FeatureSet> parse_sets(const std::string& text, const Dataset& ds) {
  std::vector<FeatureSet> out;
  for (const auto& part : split(text, ';')) out.push_back(parse_set(part, ds));
  if (out.empty()) throw InvalidArgument("no feature sets given");
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3) throw InvalidArgument("sizes range must be start:stop:step");
    const std::size_t start = parse_count(parts[0], "size");
    const std::size_t stop = parse_count(parts[1], "size");
    const std::size_t step = parse_count(parts[2], "size step");
    if (step == 0) throw InvalidArgument("size step must be positive");
    for (std::size_t s = start; s <= stop; s += step) out.push_back(s);
  } else {
    for (const auto& tok : split(text, ',')) out.push_back(parse_count(tok, "size"));
  }
  if (out.empty()) throw InvalidArgument("no sizes given");
  return out;
}

RedundancyAggregation parse_aggregation(const std::string& s) {
  if (s == "max") return RedundancyAggregation::max;
  if (s == "mean") return RedundancyAggregation::mean;
  throw InvalidArgument("unknown redundancy aggregation '" + s + "' (expected max or mean)");
}

OtOptions ot_options(const SolverOptions& s, std::uint64_t seed) {
  OtOptions o;
  o.mode = parse_w1_mode(s.w1);
  o.cap = s.cap;
  o.n_projections = s.projections;
  o.seed = seed;
  o.standardize = s.standardize;
  o.validate();
  return o;
}

ot::GwConfig gw_config(const SolverOptions& s, std::uint64_t seed) {
  ot::GwConfig g = s.gw;
  g.seed = seed;
  g.validate();
  if (s.gw_cap < 2) throw InvalidArgument("--gw-cap must be >= 2");
  return g;
}

Dataset load(const CommonOptions& c, bool need_labels, std::ostream& log) {
  if (need_labels && c.label.empty()) throw InvalidArgument("--label is required for this command");
  Dataset ds = load_csv(c.data, c.header, c.label.empty() ? std::nullopt : std::optional<std::string>(c.label));
  log << "[otfs] loaded " << c.data << ": " << ds.n_samples() << " rows, " << ds.n_features() << " features";
  if (ds.has_labels()) log << ", " << ds.n_classes() << " classes";
  log << "\n";
  if (c.zscore > 0.0) {
    FilterResult f = zscore_filter(ds, c.zscore);
    log << "[otfs] z-score filter at " << c.zscore << " removed " << f.removed.size() << " rows\n";
    ds = std::move(f.data);
  }
  return ds;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json timing(Clock::time_point start) {
  return Json{{"wall_seconds", std::chrono::duration<double>(Clock::now() - start).count()}, {"timestamp", timestamp()}};
}

Json header(const char* command, const ConfigEcho& echo) {
  Json cfg = Json::object();
  for (const auto& [k, v] : echo) cfg[k] = v;
  return Json{{"tool", "otfs"},
              {"version", kVersion},
              {"command", command},
              {"config", std::move(cfg)},
              {"config_hash", hex64(fnv1a(format_config(echo)))}};
}

Json dataset_json(const Dataset& ds, const std::string& path) {
  Json j{{"path", path}, {"n_samples", ds.n_samples()}, {"n_features", ds.n_features()}};
  if (ds.has_labels()) j["class_names"] = ds.class_names;
  return j;
}

fs::path prepare_out_dir(const CommonOptions& c) {
  const fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + c.out_dir + ": " + ec.message());
  return dir;
}

void write(const fs::path& path, std::string_view content, std::ostream& log) {
  write_file_atomic(path.string(), content);
  log << "[otfs] wrote " << path.string() << "\n";
}

void write_echo(const fs::path& dir, const char* command, const ConfigEcho& echo, std::ostream& log) {
  write(dir / (std::string("effective_") + command + ".cfg"), format_config(echo), log);
}

std::string matrix_csv(const Matrix& m, const std::vector<std::string>& names) {
  std::ostringstream s;
  write_matrix_csv(s, m, names);
  return s.str();
}

int finish(bool converged, std::ostream& log) {
  if (converged) return kOk;
  log << "[otfs] warning: a GW solve stopped at its iteration cap; results are flagged\n";
  return kNotConverged;
}

}  // namespace

int cmd_select(const SelectArgs& a, const ConfigEcho& echo, std::ostream& log) {
  const auto start = Clock::now();
  SelectionConfig cfg;
  cfg.criterion = parse_criterion(a.criterion);
  cfg.strategy = parse_strategy(a.strategy);
  cfg.m = a.m;
  cfg.n_trials = a.n_trials;
  cfg.lambda = a.lambda;
  cfg.redundancy = parse_aggregation(a.redundancy);
  cfg.seed = a.common.seed;
  cfg.ot = ot_options(a.solver, a.common.seed);
  cfg.gw = gw_config(a.solver, a.common.seed);
  cfg.gw_cap = a.solver.gw_cap;
  cfg.validate();

  const Dataset ds = load(a.common, cfg.criterion != Criterion::gw_unsupervised, log);
  const fs::path dir = prepare_out_dir(a.common);
  log << "[otfs] selecting " << cfg.m << " features (" << to_string(cfg.criterion) << ", " << to_string(cfg.strategy)
      << ")\n";
  const SelectionResult r = select_features(ds, cfg);

  Json report = header("select", echo);
  report["dataset"] = dataset_json(ds, a.common.data);
  report["selection_config"] = to_json(cfg);
  report["result"] = to_json(r, ds);
  report["timing"] = timing(start);
  write(dir / "selection.json", report.dump(2) + "\n", log);
  write_echo(dir, "select", echo, log);
  return finish(r.converged, log);
}

int cmd_distmat(const DistmatArgs& a, const ConfigEcho& echo, std::ostream& log) {
  const auto start = Clock::now();
  const OtOptions opt = ot_options(a.solver, a.common.seed);
  const Dataset ds = load(a.common, true, log);
  std::vector<FeatureSet> sets;
  if (a.sets.empty()) {
    for (std::size_t f = 0; f < ds.n_features(); ++f) sets.push_back(FeatureSet{f});
  } else {
    sets = parse_sets(a.sets, ds);
  }
  std::optional<ClassDistanceMatrix> base;
  if (!a.relative_to.empty()) base = class_distance_matrix(ds, parse_set(a.relative_to, ds), opt);
  const fs::path dir = prepare_out_dir(a.common);

  struct Entry {
    ClassDistanceMatrix raw;
    std::optional<ClassDistanceMatrix> scaled;
    std::optional<Matrix> change;
  };
  std::vector<Entry> entries;
  for (const auto& t : sets) {
    Entry e{class_distance_matrix(ds, t, opt), std::nullopt, std::nullopt};
    if (a.scaled) e.scaled = mean_scale(e.raw);
    if (base) e.change = relative_change_matrix(*base, e.raw);
    entries.push_back(std::move(e));
  }

  Json report = header("distmat", echo);
  report["dataset"] = dataset_json(ds, a.common.data);
  report["ot"] = to_json(opt);
  if (base) report["relative_to"] = feature_list(base->feature_set, ds);
  Json items = Json::array();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Entry& e = entries[i];
    const std::string stem = "distmat_" + std::to_string(i);
    Json item = to_json(e.raw, ds);
    item["file"] = stem + ".csv";
    write(dir / (stem + ".csv"), matrix_csv(e.raw.d, e.raw.class_names), log);
    if (e.scaled) {
      item["scaled_file"] = stem + "_scaled.csv";
      item["scaled_matrix"] = to_json(e.scaled->d);
      write(dir / (stem + "_scaled.csv"), matrix_csv(e.scaled->d, e.raw.class_names), log);
    }
    if (e.change) {
      const std::string name = "relchange_" + std::to_string(i) + ".csv";
      item["relative_change_file"] = name;
      item["relative_change"] = to_json(*e.change);
      write(dir / name, matrix_csv(*e.change, e.raw.class_names), log);
    }
    items.push_back(std::move(item));
  }
  report["matrices"] = std::move(items);
  report["timing"] = timing(start);
  write(dir / "distmat.json", report.dump(2) + "\n", log);
  write_echo(dir, "distmat", echo, log);
  return kOk;
}

int cmd_gw(const GwArgs& a, const ConfigEcho& echo, std::ostream& log) {
  const auto start = Clock::now();
  const ot::GwConfig cfg = gw_config(a.solver, a.common.seed);
  if (!(a.floor > 0.0)) throw InvalidArgument("--floor must be positive");
  const Dataset ds = load(a.common, false, log);
  const std::vector<FeatureSet> sets =
      a.sets.empty() ? std::vector<FeatureSet>{FeatureSet::range(0, ds.n_features())} : parse_sets(a.sets, ds);
  std::vector<std::pair<std::size_t, FeatureSet>> redundancy;
  if (!a.redundancy.empty()) {
    for (const auto& entry : split(a.redundancy, ';')) {
      const auto colon = entry.find(':');
      if (colon == std::string::npos) throw InvalidArgument("redundancy entry '" + entry + "' must look like f:a,b");
      const auto f = ds.find_feature(trim(entry.substr(0, colon)));
      if (!f) throw InvalidArgument("unknown feature '" + trim(entry.substr(0, colon)) + "'");
      redundancy.emplace_back(*f, parse_set(entry.substr(colon + 1), ds));
    }
  }
  const fs::path dir = prepare_out_dir(a.common);

  const std::vector<std::size_t> rows = gw_row_subsample(ds, a.solver.gw_cap, cfg.seed);
  std::vector<Json> lines;
  bool converged = true;
  for (const auto& t : sets) {
    log << "[otfs] gw " << t.to_string() << "\n";
    const GwCriterionResult r = gw_to_full_on_rows(ds, t, cfg, rows);
    converged = converged && r.converged;
    Json j{{"kind", "gw_to_full"}};
    j.update(to_json(r, ds));
    lines.push_back(std::move(j));
  }
  for (const auto& [f, t] : redundancy) {
    log << "[otfs] redundancy of " << f << " in " << t.to_string() << "\n";
    const GwRedundancy r = feature_redundancy_gw(ds, t, f, cfg, a.solver.gw_cap, a.floor);
    converged = converged && r.converged;
    lines.push_back(Json{{"kind", "redundancy"},
                         {"feature", feature_list(FeatureSet{f}, ds)[0]},
                         {"set", feature_list(t, ds)},
                         {"redundancy", number_or_null(r.redundancy)},
                         {"distance", number_or_null(r.distance)},
                         {"n_used", r.n_used},
                         {"converged", r.converged}});
  }

  Json head = header("gw", echo);
  head["kind"] = "run";
  head["dataset"] = dataset_json(ds, a.common.data);
  head["gw"] = to_json(cfg);
  head["converged"] = converged;
  head["timing"] = timing(start);
  std::string text = head.dump() + "\n";
  for (const auto& j : lines) text += j.dump() + "\n";
  write(dir / "gw.jsonl", text, log);
  write_echo(dir, "gw", echo, log);
  return finish(converged, log);
}

int cmd_eval(const EvalArgs& a, const ConfigEcho& echo, std::ostream& log) {
  const auto start = Clock::now();
  const OtOptions opt = ot_options(a.solver, a.common.seed);
  const ot::GwConfig gcfg = gw_config(a.solver, a.common.seed);
  const std::vector<std::size_t> sizes = parse_sizes(a.sizes);
  std::vector<std::string> tokens;
  for (const auto& tok : split(a.methods, ',')) {
    if (!tok.empty()) tokens.push_back(tok);
  }
  if (tokens.empty()) throw InvalidArgument("--methods lists no methods");
  const Dataset ds = load(a.common, true, log);

  std::vector<EvalMethod> methods;
  for (const auto& tok : tokens) {
    if (tok == "variance_ratio") {
      methods.push_back(variance_ratio_method(tok));
      continue;
    }
    if (tok == "first") {
      std::vector<std::size_t> order(ds.n_features());
      std::iota(order.begin(), order.end(), std::size_t{0});
      methods.push_back(fixed_order_method(tok, order));
      continue;
    }
    const auto colon = tok.find(':');
    SelectionConfig cfg;
    cfg.criterion = parse_criterion(tok.substr(0, colon));
    cfg.strategy = colon == std::string::npos ? Strategy::greedy : parse_strategy(tok.substr(colon + 1));
    cfg.n_trials = a.n_trials;
    cfg.lambda = a.lambda;
    cfg.seed = a.common.seed;
    cfg.ot = opt;
    cfg.gw = gcfg;
    cfg.gw_cap = a.solver.gw_cap;
    cfg.validate();
    methods.push_back(method_from_config(tok, cfg));
  }
  std::optional<std::vector<FeatureSet>> gwd_sets;
  if (!a.gwd_sets.empty()) gwd_sets = parse_sets(a.gwd_sets, ds);
  const fs::path dir = prepare_out_dir(a.common);

  log << "[otfs] accuracy curve: " << methods.size() << " methods, " << sizes.size() << " sizes, " << a.repeats
      << " repeats\n";
  CurveOptions copt;
  copt.n_repeats = a.repeats;
  copt.k = a.k;
  copt.seed = a.common.seed;
  copt.train_fraction = a.train_fraction;
  const AccuracyCurve curve = accuracy_curve(ds, methods, sizes, copt);

  std::optional<GwdAccuracyTable> table;
  if (gwd_sets) {
    log << "[otfs] gwd/accuracy table over " << gwd_sets->size() << " sets\n";
    GwdTableOptions topt;
    topt.k = a.k;
    topt.seed = a.common.seed;
    topt.train_fraction = a.train_fraction;
    topt.cap = a.solver.gw_cap;
    table = gwd_accuracy_table(ds, *gwd_sets, gcfg, topt);
  }

  std::string csv = "method,size,repeat,accuracy\n";
  for (const auto& r : curve.records) {
    csv += r.method + "," + std::to_string(r.size) + "," + std::to_string(r.repeat) + "," + format_double(r.accuracy) + "\n";
  }
  Json report = header("eval", echo);
  report["dataset"] = dataset_json(ds, a.common.data);
  report["methods"] = curve.methods;
  report["sizes"] = curve.sizes;
  report["n_repeats"] = curve.n_repeats;
  report["k"] = a.k;
  report["repeat_seeds"] = curve.seeds;
  Json summary = Json::array();
  for (const auto& s : curve.summary()) summary.push_back(to_json(s));
  report["summary"] = std::move(summary);
  bool converged = true;
  if (table) {
    report["gwd_accuracy"] = to_json(*table, ds);
    std::string tcsv = "features,gwd,inverse_gwd,accuracy\n";
    for (const auto& r : table->rows) {
      converged = converged && r.converged;
      std::string names;
      for (std::size_t f : r.subset) names += (names.empty() ? "" : " ") + ds.feature_names[f];
      tcsv += "\"" + names + "\"," + format_double(r.gwd) + "," + format_double(r.inverse_gwd) + "," +
              format_double(r.accuracy) + "\n";
    }
    write(dir / "gwd_accuracy.csv", tcsv, log);
  }
  report["timing"] = timing(start);
  write(dir / "curve.csv", csv, log);
  write(dir / "summary.json", report.dump(2) + "\n", log);
  write_echo(dir, "eval", echo, log);
  return finish(converged, log);
}

int cmd_synth(const SynthArgs& a, const ConfigEcho& echo, std::ostream& log) {
  Json manifest = header("synth", echo);
  Dataset out;
  if (!a.common.data.empty()) {
    if (a.add_noise == 0) throw InvalidArgument("--data given without --add-noise");
    const Dataset ds = load(a.common, false, log);
    out = synth_noise_features(ds, a.add_noise, a.common.seed);
    manifest["source"] = dataset_json(ds, a.common.data);
    manifest["noise"] = feature_list(FeatureSet::range(ds.n_features(), out.n_features()), out);
  } else {
    PlantedSpec spec = a.planted;
    spec.seed = a.common.seed;
    spec.validate();
    const PlantedDataset p = make_planted(spec);
    out = p.data;
    manifest["generator"] = Json{{"n_samples", spec.n_samples},     {"n_classes", spec.n_classes},
                                 {"separation", spec.separation},   {"n_relevant", spec.n_relevant},
                                 {"n_noise", spec.n_noise},         {"n_duplicates", spec.n_duplicates},
                                 {"noise_sd", spec.noise_sd},       {"seed", spec.seed}};
    manifest["relevant"] = feature_list(FeatureSet(p.relevant), out);
    manifest["noise"] = feature_list(FeatureSet(p.noise), out);
    manifest["duplicates"] = feature_list(FeatureSet(p.duplicates), out);
  }
  const fs::path dir = prepare_out_dir(a.common);
  manifest["output"] = dataset_json(out, (dir / "synth.csv").string());
  manifest["label_column"] = out.has_labels() ? Json(out.label_name) : Json(nullptr);

  const std::string partial = (dir / "synth.csv").string() + ".partial";
  save_csv(out, partial);
  fs::rename(partial, dir / "synth.csv");
  log << "[otfs] wrote " << (dir / "synth.csv").string() << "\n";
  write(dir / "synth_manifest.json", manifest.dump(2) + "\n", log);
  write_echo(dir, "synth", echo, log);
  return kOk;
}

}  // namespace otfs::cli
