// Static SVG emission for metrics. Pure functions of their inputs: the same
// rows always produce the same bytes.
#pragma once

#include <string>
#include <vector>

#include "amto/metrics.hpp"

namespace amto {

/// Per-task validation-loss curves for one run, with markers on accepted
/// transfers. Falls back to training loss when the run logged no validation
/// (sto_no_val). Throws data_error when the rows are empty.
std::string render_loss_curves(const std::string& run_id,
                               const std::vector<MetricsRow>& rows);

/// Two-panel figure: winner validation loss vs task count, test accuracy vs
/// task count. Panels are grouped as <g id="loss-panel"> and
/// <g id="accuracy-panel">.
std::string render_sweep_panels(const std::vector<int>& task_counts,
                                const std::vector<double>& mean_val_losses,
                                const std::vector<double>& mean_test_accuracies);

}  // namespace amto
