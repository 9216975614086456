// End-to-end training runs: task formulation, the fork-join
// reallocate/train/determine rounds, global stopping, and final model
// selection by harmonic validation accuracy.
//
// All cross-task interaction happens in a single-threaded barrier section
// ordered by task id; the parallel phases operate on disjoint state and the
// kernels are bitwise-deterministic, so a run's outputs are identical for
// any worker-pool size.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amto/data.hpp"
#include "amto/metrics.hpp"
#include "amto/nn.hpp"
#include "amto/tasks.hpp"
#include "amto/transfer.hpp"

namespace amto {

enum class Mode { amto, sto_with_val, sto_no_val };
enum class EarlyStopPolicy { all_stalled, any_stalled };

/// Whether each task's returned model is its master at termination or the
/// snapshot from its best-validation-loss checkpoint. `auto_mode` keeps the
/// best checkpoint for sto_with_val and for amto with a single task (the
/// degenerate case equivalent to it), and the terminal master otherwise.
enum class RetainBest { auto_mode, on, off };

enum class StopReason { max_iter, early_stop };

struct RunConfig {
    Mode mode = Mode::amto;
    int task_count = 4;            // M
    int checkpoint_interval = 100; // c
    long long max_iterations = 10000;
    int patience = 10;             // p
    double val_ratio = 0.1;
    std::uint64_t master_seed = 1;
    NetworkSpec net;               // init_seed is derived from master_seed
    OptimizerConfig opt;
    EarlyStopPolicy early_stop_policy = EarlyStopPolicy::all_stalled;
    RetainBest retain_best = RetainBest::auto_mode;
    bool shared_init = true;       // identical initial parameters across tasks
    int workers = 0;               // worker-pool size; 0 = runtime default
    int hflip_width = 0;
    std::string run_id = "run";    // copied into every metrics row
};

struct RunResult {
    int winner = 0;
    ParamVector winning_params;
    /// accuracy_matrix[m][k] = task m's final model evaluated on task k's
    /// validation set; empty for sto_no_val.
    std::vector<std::vector<double>> accuracy_matrix;
    std::vector<double> harmonic_accuracies;
    StopReason stop_reason = StopReason::max_iter;
    int checkpoints = 0;
    long long effective_max_iterations = 0;  // max_iterations rounded down to a multiple of c
    std::vector<MetricsRow> metrics;
    std::vector<TransferEvent> events;
    std::vector<TrainingTask> tasks;  // final task state
};

/// Hook into the two barrier edges of every round. `after_training` sees the
/// post-training, pre-substitution state; `after_barrier` sees the state after
/// transfer decisions, relationship updates, and patience bookkeeping.
struct RunObserver {
    virtual ~RunObserver() = default;
    virtual void after_training(int /*checkpoint*/, const std::vector<TrainingTask>&,
                                const std::vector<ValidationReport>&) {}
    virtual void after_barrier(int /*checkpoint*/, const std::vector<TrainingTask>&,
                               const std::vector<TransferEvent>& /*round_events*/) {}
};

/// Documented seed derivation: every per-task stream is a splitmix64 mix of
/// the master seed, a role tag, and the task id.
std::uint64_t derive_split_seed(std::uint64_t master_seed, int task);
std::uint64_t derive_init_seed(std::uint64_t master_seed, bool shared_init, int task);
std::uint64_t derive_batch_seed(std::uint64_t master_seed, int task, bool slave);
std::uint64_t derive_select_seed(std::uint64_t master_seed, int task);

void validate_run_config(const RunConfig& cfg, const Dataset& gross);

/// M tasks with distinct split seeds, identical initial parameters (when
/// shared_init), zeroed relationship lists, and fresh batch iterators.
std::vector<TrainingTask> formulate_tasks(const Dataset& gross, const RunConfig& cfg);

/// M / sum(1/A_m). Any A_m == 0 yields 0 (harmonic-mean limit convention).
double harmonic_accuracy(const std::vector<double>& accuracies);

/// The model a task would submit for final selection (retained best
/// checkpoint when present, terminal master otherwise).
const std::vector<double>& final_model_values(const TrainingTask& task);

struct WinnerSelection {
    int winner = 0;
    std::vector<std::vector<double>> accuracy_matrix;
    std::vector<double> harmonic_accuracies;
};

/// Evaluates every task's final model on every task's validation set and
/// picks the highest harmonic accuracy; ties break toward the lowest id.
WinnerSelection select_winner(const std::vector<TrainingTask>& tasks,
                              const Dataset& gross, const TrainOptions& opts);

RunResult run(const Dataset& gross, const RunConfig& cfg, RunObserver* observer = nullptr);

}  // namespace amto
