// Knowledge transfer between tasks: softmax source selection over the
// relationship list, reallocation of a source's parameters into the slave
// slot, the accept/reject decision, and the tanh relationship update.
#pragma once

#include <cstdint>
#include <vector>

#include "amto/tasks.hpp"

namespace amto {

/// Record of one reallocation round for one receiving task.
struct TransferEvent {
    int checkpoint = 0;
    int receiver = 0;
    int source = 0;
    double master_val_loss = 0.0;
    double slave_val_loss = 0.0;
    bool accepted = false;      // accepted <=> slave_val_loss < master_val_loss
    double rl_increment = 0.0;  // tanh(master_val_loss - slave_val_loss), in (-1,1)
};

/// Softmax over the M-1 non-self relationship entries, in task-id order with
/// the owner's slot removed: p_j = exp(r_j) / sum_{k != m} exp(r_k).
/// Computed with max subtraction; the shift leaves the result unchanged.
/// Throws config_error when M < 2.
std::vector<double> selection_probabilities(const RelationshipList& rl);

/// Draws a source task id != owner, categorically by selection_probabilities.
/// The selection stream is keyed by (select_seed, call index), so draws are
/// reproducible and independent of other tasks.
int select_source(const RelationshipList& rl, std::uint64_t select_seed,
                  std::uint64_t& select_calls);

/// slave.values <- copy of source weights; slave momentum zeroed; master and
/// source untouched.
void reallocate_knowledge(TrainingTask& task, const std::vector<double>& source_values);

/// Accepts the slave into the master slot iff it achieved strictly lower
/// validation loss (full copy including the slave's momentum, which was
/// earned on this task's own training set). Returns the event either way;
/// the caller fills in the source id beforehand.
TransferEvent determine_transfer(TrainingTask& task, const ValidationReport& report,
                                 int source);

/// r_j += tanh(master_val_loss - slave_val_loss); only entry j changes.
void update_relationship(RelationshipList& rl, int source, double master_val_loss,
                         double slave_val_loss);

}  // namespace amto
