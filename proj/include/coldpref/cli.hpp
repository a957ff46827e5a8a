#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "coldpref/run_config.hpp"
#include "coldpref/tabular_prep.hpp"

namespace coldpref::cli {

// Exit codes shared by every command.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;
inline constexpr int kUsageError = 2;

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  bool verbose = false;
};

struct PrepArgs {
  std::string input;
  std::string target;
  std::string output;
  std::string report;  // defaults to <output>.report.txt
  PrepOptions options;
};

struct SynthArgs {
  SyntheticOptions options;
  std::string output;
};

struct PlotArgs {
  std::string results;
  std::optional<std::string> limit;
  std::string output;
  std::optional<std::string> dataset;
  std::string title = "Learning curves";
};

int cmd_prep(const PrepArgs& args, const GlobalOptions& global, std::ostream& out, std::ostream& err);
int cmd_synth(SynthArgs args, const GlobalOptions& global, std::ostream& out, std::ostream& err);
int cmd_run(const std::string& config_path, const GlobalOptions& global, std::ostream& out, std::ostream& err,
            const EnvLookup& env = process_environment());
int cmd_bench_limit(const std::string& config_path, const GlobalOptions& global, std::ostream& out,
                    std::ostream& err, const EnvLookup& env = process_environment());
int cmd_plot(const PlotArgs& args, const GlobalOptions& global, std::ostream& out, std::ostream& err);

// Full command line: subcommands prep, synth, run, bench-limit, plot.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace coldpref::cli
