#include "amto/transfer.hpp"

#include <algorithm>
#include <cmath>

#include "amto/errors.hpp"
#include "amto/rng.hpp"

namespace amto {

namespace {

// tanh rounds to exactly +/-1.0 in double once |x| exceeds ~19, but the
// recorded increment must stay strictly inside (-1, 1). The clamp is one ulp
// and unobservable at any realistic loss gap.
double bounded_tanh(double x) {
    const double t = std::tanh(x);
    if (t >= 1.0) return std::nextafter(1.0, 0.0);
    if (t <= -1.0) return std::nextafter(-1.0, 0.0);
    return t;
}

}  // namespace

std::vector<double> selection_probabilities(const RelationshipList& rl) {
    const std::size_t m = rl.r.size();
    if (m < 2) throw config_error("source selection needs at least 2 tasks");

    double max_r = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j)
        if (j != static_cast<std::size_t>(rl.owner)) max_r = std::max(max_r, rl.r[j]);

    std::vector<double> p;
    p.reserve(m - 1);
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
        if (j == static_cast<std::size_t>(rl.owner)) continue;
        const double e = std::exp(rl.r[j] - max_r);
        p.push_back(e);
        sum += e;
    }
    const double inv = 1.0 / sum;
    for (double& v : p) v *= inv;
    return p;
}

int select_source(const RelationshipList& rl, std::uint64_t select_seed,
                  std::uint64_t& select_calls) {
    const std::vector<double> p = selection_probabilities(rl);
    Rng rng(seed_combine(select_seed, select_calls++));
    double u = rng.uniform();

    // Inverse CDF over the non-self entries in task-id order; the final
    // entry absorbs any floating-point shortfall.
    std::size_t pick = p.size() - 1;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (u < p[i]) {
            pick = i;
            break;
        }
        u -= p[i];
    }
    const int j = static_cast<int>(pick);
    return j >= rl.owner ? j + 1 : j;  // re-insert the removed self slot
}

void reallocate_knowledge(TrainingTask& task, const std::vector<double>& source_values) {
    if (source_values.size() != task.slave.values.size())
        throw data_error("source parameters incompatible with slave model");
    task.slave.values = source_values;
    std::fill(task.slave.momentum.begin(), task.slave.momentum.end(), 0.0);
}

TransferEvent determine_transfer(TrainingTask& task, const ValidationReport& report,
                                 int source) {
    TransferEvent ev;
    ev.checkpoint = report.checkpoint;
    ev.receiver = task.id;
    ev.source = source;
    ev.master_val_loss = report.master_val_loss;
    ev.slave_val_loss = report.slave_val_loss;
    ev.accepted = report.slave_val_loss < report.master_val_loss;
    ev.rl_increment = bounded_tanh(report.master_val_loss - report.slave_val_loss);
    if (ev.accepted) task.master = task.slave;
    return ev;
}

void update_relationship(RelationshipList& rl, int source, double master_val_loss,
                         double slave_val_loss) {
    if (!std::isfinite(master_val_loss) || !std::isfinite(slave_val_loss))
        throw numeric_error("non-finite validation loss in relationship update");
    if (source == rl.owner) throw data_error("relationship update for self entry");
    rl.r[static_cast<std::size_t>(source)] +=
        bounded_tanh(master_val_loss - slave_val_loss);
}

}  // namespace amto
