#pragma once

// Command-line front-end: select, distmat, gw, eval, synth.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "otfs/distmat.hpp"
#include "otfs/ot_core.hpp"
#include "otfs/select.hpp"
#include "otfs/synthetic.hpp"

namespace otfs::cli {

enum ExitCode : int { kOk = 0, kInvalidArgument = 2, kDataError = 3, kNotConverged = 4 };

/// Effective key=value pairs of one run, in option order.
using ConfigEcho = std::vector<std::pair<std::string, std::string>>;

struct CommonOptions {
  std::string data;
  std::string label;
  bool header = true;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_dir = ".";
  double zscore = 0.0;  // row filter threshold; 0 disables
  bool quiet = false;
};

struct SolverOptions {
  std::string w1 = "exact";
  std::size_t cap = 256;
  std::size_t projections = 100;
  bool standardize = true;
  ot::GwConfig gw;
  std::size_t gw_cap = 300;
};

struct SelectArgs {
  CommonOptions common;
  SolverOptions solver;
  std::string criterion = "frobenius";
  std::string strategy = "greedy";
  std::size_t m = 10;
  std::size_t n_trials = 1000;
  double lambda = 1.0;
  std::string redundancy = "max";
};

struct DistmatArgs {
  CommonOptions common;
  SolverOptions solver;
  std::string sets;  // "a,b;c"; empty means every single column
  bool scaled = false;
  std::string relative_to;
};

struct GwArgs {
  CommonOptions common;
  SolverOptions solver;
  std::string sets;        // empty means the full column set
  std::string redundancy;  // "f:a,b;g:c,d"
  double floor = 1e-9;
};

struct EvalArgs {
  CommonOptions common;
  SolverOptions solver;
  std::string methods = "frobenius:greedy,variance_ratio";
  std::string sizes;
  std::size_t repeats = 10;
  std::size_t k = 5;
  double train_fraction = 0.7;
  std::size_t n_trials = 1000;
  double lambda = 1.0;
  std::string gwd_sets;
};

struct SynthArgs {
  CommonOptions common;
  PlantedSpec planted;
  std::size_t add_noise = 0;  // with --data: append this many noise columns
};

/// Parses argv and runs one command. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int cmd_select(const SelectArgs& a, const ConfigEcho& echo, std::ostream& log);
int cmd_distmat(const DistmatArgs& a, const ConfigEcho& echo, std::ostream& log);
int cmd_gw(const GwArgs& a, const ConfigEcho& echo, std::ostream& log);
int cmd_eval(const EvalArgs& a, const ConfigEcho& echo, std::ostream& log);
int cmd_synth(const SynthArgs& a, const ConfigEcho& echo, std::ostream& log);

/// Reads a flat key=value file; '#' starts a comment line.
ConfigEcho read_config_file(const std::string& path);
std::string format_config(const ConfigEcho& echo);

}  // namespace otfs::cli
