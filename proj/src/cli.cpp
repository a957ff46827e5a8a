#include "coldpref/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "coldpref/csv.hpp"
#include "coldpref/errors.hpp"
#include "coldpref/experiment.hpp"
#include "coldpref/plot.hpp"

namespace coldpref::cli {
namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

// Writes through a temporary file so a failed command never leaves a partial artifact.
void write_file(const std::string& path, const std::string& contents) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << contents;
    if (!out) throw std::runtime_error("cannot write " + path);
  }
  std::filesystem::rename(tmp, target);
}

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

RunConfig load_config(const std::string& path, const GlobalOptions& global, const EnvLookup& env) {
  auto in = open_input(path);
  RunConfig config = parse_run_config(in, env);
  if (global.seed) config.scenario.master_seed = *global.seed;
  return config;
}

PreparedDataset load_dataset(const RunConfig& config) {
  if (config.synthetic) return generate_synthetic(config.synth);
  auto in = open_input(*config.dataset_path);
  return read_prepared_csv(in);
}

void log_line(const GlobalOptions& global, std::ostream& err, const std::string& line) {
  if (global.verbose) err << line << '\n';
}

std::string diagnostics_csv(const std::string& dataset, const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << "dataset,policy,run,oracle_queries,pseudo_pairs,residual_variance,pca_f1,pca_f1_reversed,pretrained_f1\n";
  for (const auto& r : records) {
    const auto& w = r.stats.warmup;
    out << dataset << ',' << to_string(r.policy) << ',' << r.run << ',' << r.stats.oracle_queries << ','
        << w.pseudo_pairs << ',' << csv::format_double(w.residual_variance) << ',' << csv::format_double(w.pca_f1)
        << ',' << csv::format_double(w.pca_f1_reversed) << ',' << csv::format_double(w.pretrained_f1) << '\n';
  }
  return out.str();
}

std::optional<double> read_limit_csv(const std::string& path, const std::optional<std::string>& dataset) {
  auto in = open_input(path);
  std::string line;
  if (!csv::next_line(in, line)) throw InputError("limit file " + path + " is empty");
  const auto header = csv::split_line(line);
  if (header.size() != 2 || csv::trim(header[0]) != "dataset" || csv::trim(header[1]) != "f1_limit") {
    throw InputError("limit file " + path + " must have header dataset,f1_limit");
  }
  while (csv::next_line(in, line)) {
    const auto fields = csv::split_line(line);
    if (fields.size() != 2) throw InputError("malformed limit row: " + line);
    if (dataset && csv::trim(fields[0]) != *dataset) continue;
    const auto value = csv::parse_double(csv::trim(fields[1]));
    if (!value) throw InputError("non-numeric limit value: " + fields[1]);
    return *value;
  }
  throw InputError("limit file " + path + " has no matching row");
}

}  // namespace

int cmd_prep(const PrepArgs& args, const GlobalOptions& global, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto in = open_input(args.input);
    RawTable table = read_csv(in, args.target);
    const PreparedDataset data = prepare(std::move(table), args.options);

    std::ostringstream csv_text;
    write_prepared_csv(csv_text, data);
    const std::string report_path = args.report.empty() ? args.output + ".report.txt" : args.report;
    write_file(args.output, csv_text.str());
    write_file(report_path, data.report.to_text());

    out << "prepared " << data.X.rows() << " rows x " << data.X.cols() << " features -> " << args.output << '\n';
    log_line(global, err, data.report.to_text());
    return kOk;
  });
}

int cmd_synth(SynthArgs args, const GlobalOptions& global, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (global.seed) args.options.seed = *global.seed;
    const PreparedDataset data = generate_synthetic(args.options);
    std::ostringstream csv_text;
    write_prepared_csv(csv_text, data);
    write_file(args.output, csv_text.str());
    out << "synthetic " << data.X.rows() << " rows x " << data.X.cols() << " features -> " << args.output << '\n';
    return kOk;
  });
}

int cmd_run(const std::string& config_path, const GlobalOptions& global, std::ostream& out, std::ostream& err,
            const EnvLookup& env) {
  return guarded(err, [&] {
    const RunConfig config = load_config(config_path, global, env);
    const PreparedDataset data = load_dataset(config);

    std::vector<std::string> warnings;
    const TestSet test =
        build_test_set(data, config.scenario.n_test, test_set_seed(config.scenario.master_seed), &warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';
    log_line(global, err,
             "dataset " + config.scenario.dataset_id + ": " + std::to_string(data.X.rows()) + " rows, " +
                 std::to_string(data.X.cols()) + " features, " + std::to_string(test.size()) + " test pairs");

    std::vector<RunRecord> records;
    const LearningCurve curve = run_scenario(data, test, config.scenario, config.policies,
                                             std::max<std::size_t>(1, global.jobs), &records);

    std::ostringstream results;
    write_results_csv(results, curve);
    write_file(config.results_path, results.str());

    const auto aggregate = aggregate_runs(curve);
    if (config.aggregate_path) {
      std::ostringstream agg;
      write_aggregate_csv(agg, aggregate);
      write_file(*config.aggregate_path, agg.str());
    }
    if (config.diagnostics_path) write_file(*config.diagnostics_path, diagnostics_csv(config.scenario.dataset_id, records));

    std::map<std::string, const AggregateRow*> last;
    for (const auto& row : aggregate) {
      auto& slot = last[to_string(row.policy)];
      if (slot == nullptr || row.queries > slot->queries) slot = &row;
    }
    out << "final mean F1 at " << config.scenario.max_queries << " queries (" << config.scenario.n_runs
        << " runs)\n";
    for (const auto& [name, row] : last) {
      out << "  " << name << ": " << csv::format_fixed(row->f1_mean, 4) << " +- "
          << csv::format_fixed(row->f1_std, 4) << '\n';
    }
    out << "results -> " << config.results_path << '\n';
    return kOk;
  });
}

int cmd_bench_limit(const std::string& config_path, const GlobalOptions& global, std::ostream& out,
                    std::ostream& err, const EnvLookup& env) {
  return guarded(err, [&] {
    const RunConfig config = load_config(config_path, global, env);
    const PreparedDataset data = load_dataset(config);
    std::vector<std::string> warnings;
    const TestSet test =
        build_test_set(data, config.scenario.n_test, test_set_seed(config.scenario.master_seed), &warnings);
    const LimitResult result = practical_limit(data, test, config.scenario, config.limit);
    warnings.insert(warnings.end(), result.warnings.begin(), result.warnings.end());
    for (const auto& w : warnings) err << "warning: " << w << '\n';

    std::ostringstream text;
    text << "dataset,f1_limit\n" << config.scenario.dataset_id << ',' << csv::format_double(result.f1) << '\n';
    write_file(config.limit_path, text.str());
    out << "practical limit F1 " << csv::format_fixed(result.f1, 4) << " from " << result.labels_used
        << " labels -> " << config.limit_path << '\n';
    return kOk;
  });
}

int cmd_plot(const PlotArgs& args, const GlobalOptions& global, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    auto in = open_input(args.results);
    LearningCurve curve = read_results_csv(in);
    if (args.dataset) {
      std::erase_if(curve, [&](const CurveRow& r) { return r.dataset != *args.dataset; });
      if (curve.empty()) throw InputError("no rows for dataset " + *args.dataset);
    } else {
      for (const auto& r : curve) {
        if (r.dataset != curve.front().dataset) {
          throw InputError("results hold several datasets; choose one with --dataset");
        }
      }
    }
    const auto rows = aggregate_runs(curve);
    std::optional<double> limit;
    if (args.limit) limit = read_limit_csv(*args.limit, args.dataset ? args.dataset : std::optional(curve.front().dataset));
    write_file(args.output, render_learning_curves_svg(rows, limit, args.title));
    out << "plot -> " << args.output << '\n';
    log_line(global, err, std::to_string(rows.size()) + " aggregate points");
    return kOk;
  });
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cold-start preference learning experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions global;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "Override the master / synthetic seed");
  app.add_option("--jobs", global.jobs, "Worker threads for independent runs")->check(CLI::PositiveNumber);
  app.add_flag("--verbose", global.verbose, "Progress details on stderr");

  PrepArgs prep;
  auto* prep_cmd = app.add_subcommand("prep", "Encode, impute and standardize a raw CSV");
  prep_cmd->add_option("input", prep.input, "Raw CSV")->required();
  prep_cmd->add_option("--target", prep.target, "Target column")->required();
  prep_cmd->add_option("-o,--output", prep.output, "Prepared CSV")->required();
  prep_cmd->add_option("--report", prep.report, "Preprocessing report (default <output>.report.txt)");
  prep_cmd->add_option("--onehot-max", prep.options.onehot_max_cardinality, "Largest one-hot cardinality");
  prep_cmd->add_option("--drop-threshold", prep.options.drop_threshold, "Missing fraction above which a column is dropped")
      ->check(CLI::Range(0.0, 1.0));
  prep_cmd->add_option("--drop", prep.options.drop_columns, "Columns to exclude")->delimiter(',');

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic linear dataset");
  synth_cmd->add_option("-o,--output", synth.output, "Prepared CSV")->required();
  synth_cmd->add_option("--n", synth.options.n, "Rows");
  synth_cmd->add_option("--p", synth.options.p, "Features");
  synth_cmd->add_option("--noise-std", synth.options.noise_std, "Target noise");
  synth_cmd->add_option("--factor-loading", synth.options.factor_loading, "Shared factor loading in [0,1)");

  std::string run_config;
  auto* run_cmd = app.add_subcommand("run", "Run the configured scenario");
  run_cmd->add_option("config", run_config, "Config file")->required();

  std::string limit_config;
  auto* limit_cmd = app.add_subcommand("bench-limit", "Compute the practical performance limit");
  limit_cmd->add_option("config", limit_config, "Config file")->required();

  PlotArgs plot;
  auto* plot_cmd = app.add_subcommand("plot", "Render learning curves as SVG");
  plot_cmd->add_option("results", plot.results, "Results CSV")->required();
  plot_cmd->add_option("--limit", plot.limit, "Limit CSV from bench-limit");
  plot_cmd->add_option("-o,--output", plot.output, "SVG file")->required();
  plot_cmd->add_option("--dataset", plot.dataset, "Dataset to plot");
  plot_cmd->add_option("--title", plot.title, "Plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }
  if (seed_opt->count() > 0) global.seed = seed;

  if (prep_cmd->parsed()) return cmd_prep(prep, global, out, err);
  if (synth_cmd->parsed()) return cmd_synth(synth, global, out, err);
  if (run_cmd->parsed()) return cmd_run(run_config, global, out, err);
  if (limit_cmd->parsed()) return cmd_bench_limit(limit_config, global, out, err);
  if (plot_cmd->parsed()) return cmd_plot(plot, global, out, err);
  return kUsageError;
}

}  // namespace coldpref::cli
