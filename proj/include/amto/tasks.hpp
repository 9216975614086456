// One formulated training task: master model, slave (temporary) model, its
// train/validation split, validation evaluation, and patience tracking.
#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "amto/data.hpp"
#include "amto/nn.hpp"

namespace amto {

/// Per-task vector of real-valued affinities to every other task. The
/// self-entry exists but is never read or written.
struct RelationshipList {
    std::vector<double> r;  // length M, zero-initialized
    int owner = 0;
};

struct TrainingTask {
    int id = 0;
    ParamVector master;  // the task's model
    ParamVector slave;   // the temporary transferred model
    SplitPair split;
    RelationshipList rl;
    double best_val_loss = std::numeric_limits<double>::infinity();
    int patience_counter = 0;
    BatchIterator master_batches;
    BatchIterator slave_batches;
    std::uint64_t select_seed = 0;   // source-selection stream
    std::uint64_t select_calls = 0;  // how many draws have been made
    long long steps_done = 0;        // per-task global iteration count
    double last_round_train_loss = 0.0;
    std::vector<double> best_params;  // best-checkpoint weights, when retained
};

/// Validation losses/accuracies of master and slave at one checkpoint,
/// measured before any master<-slave substitution.
struct ValidationReport {
    int task_id = 0;
    int checkpoint = 0;
    double master_val_loss = 0.0;
    double slave_val_loss = 0.0;
    double master_val_accuracy = 0.0;
    double slave_val_accuracy = 0.0;
};

struct TrainOptions {
    NetworkSpec net;
    OptimizerConfig opt;
    int hflip_width = 0;  // > 0 enables horizontal-flip augmentation
};

/// Advances one model by exactly c SGD steps on batches drawn from the given
/// iterator; the learning rate follows the milestone schedule at global steps
/// offset+1 .. offset+c. Returns the mean mini-batch loss over the c steps.
/// This is the unit of work one pool worker executes; master and slave of the
/// same task may run concurrently because they share no mutable state.
/// Throws numeric_error naming the task and iteration on non-finite loss.
double train_model_steps(ParamVector& params, BatchIterator& batches,
                         const Dataset& gross, const TrainOptions& opts, int c,
                         long long offset, int task_id, const char* role,
                         std::uint64_t role_tag);

/// Convenience wrapper: advances master and (when `train_slave`) slave by c
/// steps each from the task's current step count, then bumps the count.
void train_c_iterations(TrainingTask& task, const Dataset& gross,
                        const TrainOptions& opts, int c, bool train_slave);

/// Full-validation-set mean cross-entropy and top-1 accuracy for master and
/// slave. Pure: parameters are bitwise-unchanged.
ValidationReport evaluate_validation(const TrainingTask& task, const Dataset& gross,
                                     const TrainOptions& opts, int checkpoint,
                                     bool eval_slave);

/// Strict-improvement early-stopping bookkeeping: a strictly lower master
/// validation loss resets the counter; anything else increments it
/// (saturating at `patience_limit`). Returns true when the task is stalled
/// (counter >= limit).
bool update_patience(TrainingTask& task, const ValidationReport& report,
                     int patience_limit);

}  // namespace amto
