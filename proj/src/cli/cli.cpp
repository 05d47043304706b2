#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "otfs/cli.hpp"
#include "otfs/error.hpp"
#include "otfs/parallel.hpp"
#include "otfs/report.hpp"

namespace otfs::cli {

namespace {

std::string echo_value(const std::string& v) { return v; }
std::string echo_value(bool v) { return v ? "true" : "false"; }
std::string echo_value(double v) { return format_double(v); }
template <typename T>
  requires std::is_integral_v<T>
std::string echo_value(T v) {
  return std::to_string(v);
}

// Registers options on one subcommand and remembers how to print each bound
// value, so the effective configuration can be echoed after parsing.
class Binder {
 public:
  explicit Binder(CLI::App* app) : app_(app) {}

  template <typename T>
  CLI::Option* option(const std::string& names, T& var, const std::string& desc) {
    CLI::Option* opt = app_->add_option(names, var, desc)->capture_default_str();
    remember(opt, var);
    return opt;
  }

  CLI::Option* flag(const std::string& names, bool& var, const std::string& desc) {
    CLI::Option* opt = app_->add_flag(names, var, desc);
    remember(opt, var);
    return opt;
  }

  ConfigEcho echo() const {
    ConfigEcho out;
    for (const auto& [key, get] : getters_) out.emplace_back(key, get());
    return out;
  }

 private:
  template <typename T>
  void remember(CLI::Option* opt, T& var) {
    getters_.emplace_back(opt->get_lnames().front(), [&var] { return echo_value(var); });
  }

  CLI::App* app_;
  std::vector<std::pair<std::string, std::function<std::string()>>> getters_;
};

void add_common(Binder& b, CommonOptions& c, bool data_required) {
  auto* data = b.option("--data", c.data, "Input CSV file");
  if (data_required) data->required();
  b.option("--label", c.label, "Label column (header name or zero-based index)");
  b.flag("--header", c.header, "Input has a header row (--header=false if not)");
  b.option("--seed", c.seed, "Master seed");
  b.option("--threads", c.threads, "Worker threads (0 = all logical cores)")->check(CLI::NonNegativeNumber);
  b.option("--out-dir", c.out_dir, "Output directory");
  b.option("--zscore", c.zscore, "Drop rows with any |z| above this before running (0 = off)")
      ->check(CLI::NonNegativeNumber);
  b.flag("--quiet", c.quiet, "No progress log");
}

void add_w1(Binder& b, SolverOptions& s) {
  b.option("--w1", s.w1, "W1 solver for multi-column sets: exact or sliced");
  b.option("--cap", s.cap, "Exact W1: max points per class (subsampled above)");
  b.option("--projections", s.projections, "Sliced W1: number of projections");
  b.flag("--standardize", s.standardize, "Z-score columns of multi-column sets (--standardize=false to disable)");
}

void add_gw(Binder& b, SolverOptions& s) {
  b.option("--gw-p", s.gw.p, "GW exponent p");
  b.option("--gw-q", s.gw.q, "Metric exponent q");
  b.option("--epsilon", s.gw.epsilon, "Entropic regularization");
  b.option("--max-outer", s.gw.max_outer_iter, "Max outer linearization steps");
  b.option("--max-sinkhorn", s.gw.max_sinkhorn_iter, "Max scaling iterations per step");
  b.option("--tol", s.gw.tol, "Relative objective tolerance");
  b.option("--polish", s.gw.polish_iter, "Exact polishing steps");
  b.flag("--normalize-metrics", s.gw.normalize_metrics, "Divide each metric by its mean off-diagonal entry (--normalize-metrics=false to disable)");
  b.option("--gw-cap", s.gw_cap, "Rows used for GW comparisons (subsampled above)");
}

std::string option_value(const char* const* argv, int argc, int& i) {
  const char* arg = argv[i];
  if (const char* eq = std::strchr(arg, '=')) return eq + 1;
  if (i + 1 < argc) return argv[++i];
  throw CLI::ArgumentMismatch("--config requires a path");
}

}  // namespace

ConfigEcho read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file " + path);
  ConfigEcho out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = line.substr(first, eq - first);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    std::string value = line.substr(eq + 1);
    const auto v0 = value.find_first_not_of(" \t");
    value = v0 == std::string::npos ? "" : value.substr(v0);
    if (key.empty()) throw InvalidArgument(path + ":" + std::to_string(lineno) + ": empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

std::string format_config(const ConfigEcho& echo) {
  std::string out;
  for (const auto& [k, v] : echo) out += k + "=" + v + "\n";
  return out;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal-transport feature selection toolkit", "otfs"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  SelectArgs select_args;
  DistmatArgs distmat_args;
  GwArgs gw_args;
  EvalArgs eval_args;
  SynthArgs synth_args;
  std::string config_path;

  auto* sel = app.add_subcommand("select", "Select a feature subset");
  auto* dm = app.add_subcommand("distmat", "Write class distance matrices");
  auto* gw = app.add_subcommand("gw", "Gromov-Wasserstein criterion values");
  auto* ev = app.add_subcommand("eval", "k-NN accuracy curves for selection methods");
  auto* sy = app.add_subcommand("synth", "Generate planted or noise-augmented datasets");
  std::map<CLI::App*, std::unique_ptr<Binder>> binders;
  for (auto* sub : {sel, dm, gw, ev, sy}) {
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    sub->add_option("--config", config_path, "Flat key=value file; command-line options take precedence");
    binders[sub] = std::make_unique<Binder>(sub);
  }

  {
    Binder& b = *binders[sel];
    add_common(b, select_args.common, true);
    b.option("--criterion", select_args.criterion, "frobenius, gw or two_stage");
    b.option("--strategy", select_args.strategy, "rank, greedy or random");
    b.option("-m,--size", select_args.m, "Subset size");
    b.option("--n-trials", select_args.n_trials, "Random search draws");
    b.option("--lambda", select_args.lambda, "Two-stage redundancy weight");
    b.option("--redundancy", select_args.redundancy, "Two-stage aggregation over the set: max or mean");
    add_w1(b, select_args.solver);
    add_gw(b, select_args.solver);
  }
  {
    Binder& b = *binders[dm];
    add_common(b, distmat_args.common, true);
    b.option("--sets", distmat_args.sets, "Feature sets 'a,b;c' by name or index (default: every column)");
    b.flag("--scaled", distmat_args.scaled, "Also write mean-scaled matrices");
    b.option("--relative-to", distmat_args.relative_to, "Base set for relative-change matrices");
    add_w1(b, distmat_args.solver);
  }
  {
    Binder& b = *binders[gw];
    add_common(b, gw_args.common, true);
    b.option("--sets", gw_args.sets, "Feature sets 'a,b;c' compared to the full data (default: all columns)");
    b.option("--redundancy-of", gw_args.redundancy, "Entries 'f:a,b;...' giving GW redundancy of f within {a,b}");
    b.option("--floor", gw_args.floor, "Distance floor for reciprocals");
    add_gw(b, gw_args.solver);
  }
  {
    Binder& b = *binders[ev];
    add_common(b, eval_args.common, true);
    b.option("--methods", eval_args.methods,
             "Comma list of criterion[:strategy], variance_ratio or first (e.g. frobenius:greedy,gw:rank)");
    b.option("--sizes", eval_args.sizes, "Subset sizes: '10,20,30' or 'start:stop:step'")->required();
    b.option("--repeats", eval_args.repeats, "Random splits");
    b.option("-k,--neighbors", eval_args.k, "k-NN neighbours (odd)");
    b.option("--train-fraction", eval_args.train_fraction, "Share of each class used for training");
    b.option("--n-trials", eval_args.n_trials, "Random search draws");
    b.option("--lambda", eval_args.lambda, "Two-stage redundancy weight");
    b.option("--gwd-sets", eval_args.gwd_sets, "Feature sets for a GWD-vs-accuracy table");
    add_w1(b, eval_args.solver);
    add_gw(b, eval_args.solver);
  }
  {
    Binder& b = *binders[sy];
    add_common(b, synth_args.common, false);
    PlantedSpec& p = synth_args.planted;
    b.option("-n,--samples", p.n_samples, "Rows");
    b.option("--classes", p.n_classes, "Classes");
    b.option("--separation", p.separation, "Mean shift between adjacent classes, in noise sd");
    b.option("--relevant", p.n_relevant, "Relevant columns");
    b.option("--noise", p.n_noise, "Pure-noise columns");
    b.option("--duplicates", p.n_duplicates, "Copies of the first relevant columns");
    b.option("--noise-sd", p.noise_sd, "Noise standard deviation");
    b.option("--add-noise", synth_args.add_noise, "With --data: append this many noise columns");
  }

  // Config file values go right after the subcommand token, so anything on
  // the command line parses later and wins under TakeLast.
  std::vector<std::string> args;
  for (int i = 0; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    std::string cfg_file;
    for (int i = 1; i < argc; ++i) {
      if (std::strncmp(argv[i], "--config", 8) == 0 && (argv[i][8] == '\0' || argv[i][8] == '=')) {
        cfg_file = option_value(argv, argc, i);
      }
    }
    if (!cfg_file.empty()) {
      std::size_t pos = 1;
      while (pos < args.size() && !app.get_subcommand_no_throw(args[pos])) ++pos;
      if (pos < args.size()) {
        std::vector<std::string> injected;
        for (const auto& [k, v] : read_config_file(cfg_file)) {
          // CLI11 reads "--key=" as a missing value, so empty values go in as a separate token.
          if (v.empty()) {
            injected.push_back("--" + k);
            injected.emplace_back();
          } else {
            injected.push_back("--" + k + "=" + v);
          }
        }
        args.insert(args.begin() + static_cast<std::ptrdiff_t>(pos) + 1, injected.begin(), injected.end());
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInvalidArgument;
  }

  std::vector<const char*> cargv;
  for (const auto& a : args) cargv.push_back(a.c_str());
  CLI::App* active = nullptr;
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
    for (auto* sub : {sel, dm, gw, ev, sy}) {
      if (sub->parsed()) active = sub;
    }
  } catch (const CLI::CallForHelp&) {
    CLI::App* target = &app;
    for (auto* sub : {sel, dm, gw, ev, sy}) {
      if (sub->parsed()) target = sub;
    }
    out << target->help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    CLI::App* target = &app;
    for (auto* sub : {sel, dm, gw, ev, sy}) {
      if (sub->parsed()) target = sub;
    }
    err << "error: " << e.what() << "\n\n" << target->help();
    return kInvalidArgument;
  }

  const ConfigEcho echo = binders[active]->echo();
  std::ostringstream sink;
  try {
    if (active == sel) {
      set_thread_count(select_args.common.threads);
      return cmd_select(select_args, echo, select_args.common.quiet ? sink : err);
    }
    if (active == dm) {
      set_thread_count(distmat_args.common.threads);
      return cmd_distmat(distmat_args, echo, distmat_args.common.quiet ? sink : err);
    }
    if (active == gw) {
      set_thread_count(gw_args.common.threads);
      return cmd_gw(gw_args, echo, gw_args.common.quiet ? sink : err);
    }
    if (active == ev) {
      set_thread_count(eval_args.common.threads);
      return cmd_eval(eval_args, echo, eval_args.common.quiet ? sink : err);
    }
    set_thread_count(synth_args.common.threads);
    return cmd_synth(synth_args, echo, synth_args.common.quiet ? sink : err);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n\n" << active->help();
    return kInvalidArgument;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return kNotConverged;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  }
}

}  // namespace otfs::cli
