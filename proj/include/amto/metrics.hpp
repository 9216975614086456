// Metrics CSV schema, transfer-event JSON-lines, and the number formatting
// shared by every artifact writer. All output is a pure function of the run
// results, so artifact files are byte-reproducible.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amto/transfer.hpp"

namespace amto {

/// One row per task per checkpoint, ordered by (run, checkpoint, task id).
struct MetricsRow {
    std::string run_id;
    std::uint64_t seed = 0;
    int task_id = 0;
    int checkpoint = 0;
    long long global_iteration = 0;
    double train_loss = 0.0;       // mean master mini-batch loss over the round
    double master_val_loss = 0.0;  // nan when the mode has no validation
    double slave_val_loss = 0.0;   // nan when no slave is trained
    double val_accuracy = 0.0;     // master top-1 on the task's validation set
    double lr = 0.0;               // effective rate at the round's last step
    int transfer_source = -1;      // -1 when no transfer machinery is active
    int transfer_accepted = 0;
};

/// Shortest round-trip decimal form (std::to_chars); NaN prints as "nan".
std::string format_double(double v);

/// The fixed header line (no trailing newline).
const std::string& metrics_csv_header();

std::string format_metrics_row(const MetricsRow& row);

/// Strict reader: validates the header and every field; errors name the
/// offending column. A header-only file is an error.
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

void write_metrics_csv(const std::string& path, const std::vector<MetricsRow>& rows);

/// One JSON object per line, keys: checkpoint, receiver, source,
/// master_val_loss, slave_val_loss, accepted, rl_increment.
void write_events_jsonl(const std::string& path, const std::vector<TransferEvent>& events);

}  // namespace amto
