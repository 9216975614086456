// Experiment drivers behind the CLI subcommands. Each writes its artifacts
// under an output directory and returns enough structure for tests to verify
// them without re-parsing files.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "amto/config.hpp"
#include "amto/orchestrator.hpp"

namespace amto {

/// Command-line overrides applied on top of a parsed spec file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
};

struct PreparedData {
    Dataset gross;  // what the orchestrator sees
    Dataset test;   // held out; empty when test_ratio == 0
};

/// Generates or loads the full dataset, partitions it into gross/test with
/// the configured ratio (stratified, keyed by the dataset seed, stable across
/// run seeds), then applies label noise to the gross partition only.
PreparedData prepare_data(const DatasetConfig& cfg);

/// Completes run.net.layer_sizes from the dataset shape and the hidden layers.
RunConfig resolve_run_config(const ExperimentSpec& spec, const Dataset& gross);

struct SingleRunArtifacts {
    RunResult result;
    double test_accuracy = -1.0;  // percent; -1 when no test partition
    std::string metrics_path;
    std::string events_path;
    std::string summary_path;
    std::string checkpoint_path;
};

/// Executes one run and writes metrics.csv, events.jsonl, summary.json and
/// checkpoint.bin into `dir`.
SingleRunArtifacts run_single(const RunConfig& cfg, const PreparedData& data,
                              const std::string& dir);

struct CompareResult {
    std::vector<std::uint64_t> seeds;
    std::vector<double> sto_accuracy;   // percent, per seed
    std::vector<double> amto_accuracy;  // percent, per seed
    double sto_mean = 0.0;
    double amto_mean = 0.0;
    std::string table_path;
};

/// Paired STO-vs-AMTO comparison: for each of R repeat seeds both modes run
/// from the same master seed; emits compare.csv (rows STO, AMTO, gap;
/// columns per seed plus mean) mirroring a method-comparison table.
CompareResult run_compare(const ExperimentSpec& spec, int repeats,
                          const std::string& dir);

struct SweepResult {
    std::vector<int> task_counts;
    std::vector<double> mean_val_loss;       // winner's last-checkpoint val loss
    std::vector<double> mean_test_accuracy;  // percent
    std::string table_path;
    std::string svg_path;
};

/// Task-count sweep: per count, `repeats` runs (amto; count 1 degenerates to
/// single-task training); emits sweep.csv and a two-panel SVG.
SweepResult run_sweep(const ExperimentSpec& spec, const std::vector<int>& task_counts,
                      int repeats, const std::string& dir);

/// Renders one loss-curve SVG per run id found in the metrics CSV; returns
/// the paths written.
std::vector<std::string> plot_metrics(const std::string& csv_path,
                                      const std::string& dir);

/// CLI entry points; exceptions mapped to exit codes (config 2, runtime 1).
int cmd_run(const std::string& spec_path, const Overrides& ov);
int cmd_compare(const std::string& spec_path, std::optional<int> repeats,
                const Overrides& ov);
int cmd_sweep_tasks(const std::string& spec_path, const std::vector<int>& counts,
                    const Overrides& ov);
int cmd_plot(const std::string& csv_path, const Overrides& ov);

}  // namespace amto
