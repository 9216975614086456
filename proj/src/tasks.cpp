#include "amto/tasks.hpp"

#include <string>

#include "amto/errors.hpp"
#include "amto/rng.hpp"

namespace amto {

double train_model_steps(ParamVector& pv, BatchIterator& batches, const Dataset& gross,
                         const TrainOptions& opts, int c, long long offset, int task_id,
                         const char* role, std::uint64_t role_tag) {
    double loss_sum = 0.0;
    // Augmentation stream keyed by (task, role, round offset): reproducible
    // and independent of batch shuffling.
    Rng aug_rng(seed_combine(
        seed_combine(seed_combine(seed_tag::augment, static_cast<std::uint64_t>(task_id)),
                     role_tag),
        static_cast<std::uint64_t>(offset)));
    for (int k = 1; k <= c; ++k) {
        Batch b = gather_batch(gross, batches.next_indices());
        if (opts.hflip_width > 0) {
            Matrix flipped = flip_horizontal(b.inputs, opts.hflip_width);
            for (std::size_t i = 0; i < b.inputs.rows; ++i)
                if (aug_rng.uniform() < 0.5)
                    std::copy(flipped.row(i), flipped.row(i) + flipped.cols,
                              b.inputs.row(i));
        }
        try {
            LossGrad lg = loss_and_grad(pv, opts.net, b.inputs, b.labels);
            loss_sum += lg.loss;
            sgd_step(pv, lg.grad, lr_at(opts.opt, offset + k), opts.opt.momentum);
        } catch (const numeric_error& e) {
            throw numeric_error("task " + std::to_string(task_id) + " (" + role +
                                ") at iteration " + std::to_string(offset + k) + ": " +
                                e.what());
        }
    }
    return loss_sum / static_cast<double>(c);
}

void train_c_iterations(TrainingTask& task, const Dataset& gross,
                        const TrainOptions& opts, int c, bool train_slave) {
    if (c < 1) throw config_error("checkpoint interval must be >= 1");
    const long long offset = task.steps_done;
    task.last_round_train_loss =
        train_model_steps(task.master, task.master_batches, gross, opts, c, offset,
                          task.id, "master", seed_tag::master_batch);
    if (train_slave)
        train_model_steps(task.slave, task.slave_batches, gross, opts, c, offset,
                          task.id, "slave", seed_tag::slave_batch);
    task.steps_done += c;
}

ValidationReport evaluate_validation(const TrainingTask& task, const Dataset& gross,
                                     const TrainOptions& opts, int checkpoint,
                                     bool eval_slave) {
    if (task.split.val_indices.empty())
        throw data_error("task " + std::to_string(task.id) + " has no validation set");
    const Batch val = gather_batch(gross, task.split.val_indices);

    ValidationReport rep;
    rep.task_id = task.id;
    rep.checkpoint = checkpoint;
    const EvalResult m = evaluate(task.master, opts.net, val.inputs, val.labels);
    rep.master_val_loss = m.loss;
    rep.master_val_accuracy = m.accuracy;
    if (eval_slave) {
        const EvalResult s = evaluate(task.slave, opts.net, val.inputs, val.labels);
        rep.slave_val_loss = s.loss;
        rep.slave_val_accuracy = s.accuracy;
    } else {
        rep.slave_val_loss = std::numeric_limits<double>::quiet_NaN();
        rep.slave_val_accuracy = std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

bool update_patience(TrainingTask& task, const ValidationReport& report,
                     int patience_limit) {
    if (report.master_val_loss < task.best_val_loss) {
        task.best_val_loss = report.master_val_loss;
        task.patience_counter = 0;
    } else if (task.patience_counter < patience_limit) {
        ++task.patience_counter;
    }
    return task.patience_counter >= patience_limit;
}

}  // namespace amto
