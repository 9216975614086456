#include "amto/orchestrator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "amto/errors.hpp"
#include "amto/rng.hpp"

namespace amto {

std::uint64_t derive_split_seed(std::uint64_t master_seed, int task) {
    return seed_combine(seed_combine(master_seed, seed_tag::split),
                        static_cast<std::uint64_t>(task));
}

std::uint64_t derive_init_seed(std::uint64_t master_seed, bool shared_init, int task) {
    const std::uint64_t base = seed_combine(master_seed, seed_tag::init);
    return shared_init ? base : seed_combine(base, static_cast<std::uint64_t>(task));
}

std::uint64_t derive_batch_seed(std::uint64_t master_seed, int task, bool slave) {
    return seed_combine(
        seed_combine(master_seed, slave ? seed_tag::slave_batch : seed_tag::master_batch),
        static_cast<std::uint64_t>(task));
}

std::uint64_t derive_select_seed(std::uint64_t master_seed, int task) {
    return seed_combine(seed_combine(master_seed, seed_tag::select),
                        static_cast<std::uint64_t>(task));
}

void validate_run_config(const RunConfig& cfg, const Dataset& gross) {
    validate_dataset(gross);
    validate_spec(cfg.net);
    validate_optimizer(cfg.opt);
    if (cfg.task_count < 1) throw config_error("task count must be >= 1");
    if (cfg.mode != Mode::amto && cfg.task_count != 1)
        throw config_error("sto modes require exactly one task");
    if (cfg.checkpoint_interval < 1)
        throw config_error("checkpoint_interval must be >= 1");
    if (cfg.max_iterations < cfg.checkpoint_interval)
        throw config_error("max_iterations smaller than one checkpoint interval");
    if (cfg.patience < 1) throw config_error("patience must be >= 1");
    if (cfg.workers < 0) throw config_error("workers must be >= 0");
    if (cfg.net.layer_sizes.front() != static_cast<int>(gross.dim()))
        throw config_error("network input size " +
                           std::to_string(cfg.net.layer_sizes.front()) +
                           " does not match dataset dimension " +
                           std::to_string(gross.dim()));
    if (cfg.net.layer_sizes.back() != gross.class_count)
        throw config_error("network output size " +
                           std::to_string(cfg.net.layer_sizes.back()) +
                           " does not match class count " +
                           std::to_string(gross.class_count));
    if (cfg.mode != Mode::sto_no_val &&
        (cfg.val_ratio <= 0.0 || cfg.val_ratio >= 1.0))
        throw config_error("val_ratio must be in (0,1)");
}

std::vector<TrainingTask> formulate_tasks(const Dataset& gross, const RunConfig& cfg) {
    validate_run_config(cfg, gross);
    std::vector<TrainingTask> tasks;
    tasks.reserve(static_cast<std::size_t>(cfg.task_count));
    for (int m = 0; m < cfg.task_count; ++m) {
        TrainingTask t;
        t.id = m;

        NetworkSpec net = cfg.net;
        net.init_seed = derive_init_seed(cfg.master_seed, cfg.shared_init, m);
        t.master = init_params(net);
        t.slave = t.master;

        if (cfg.mode == Mode::sto_no_val) {
            t.split.train_indices.resize(gross.size());
            std::iota(t.split.train_indices.begin(), t.split.train_indices.end(), 0u);
            t.split.val_ratio = 0.0;
            t.split.split_seed = 0;
        } else {
            t.split = sample_split(gross, cfg.val_ratio, derive_split_seed(cfg.master_seed, m));
        }

        t.rl.r.assign(static_cast<std::size_t>(cfg.task_count), 0.0);
        t.rl.owner = m;
        t.master_batches = BatchIterator(t.split.train_indices, cfg.opt.batch_size,
                                         derive_batch_seed(cfg.master_seed, m, false));
        t.slave_batches = BatchIterator(t.split.train_indices, cfg.opt.batch_size,
                                        derive_batch_seed(cfg.master_seed, m, true));
        t.select_seed = derive_select_seed(cfg.master_seed, m);
        tasks.push_back(std::move(t));
    }
    return tasks;
}

double harmonic_accuracy(const std::vector<double>& accuracies) {
    double denom = 0.0;
    for (double a : accuracies) {
        if (a == 0.0) return 0.0;
        denom += 1.0 / a;
    }
    return static_cast<double>(accuracies.size()) / denom;
}

const std::vector<double>& final_model_values(const TrainingTask& task) {
    return task.best_params.empty() ? task.master.values : task.best_params;
}

WinnerSelection select_winner(const std::vector<TrainingTask>& tasks,
                              const Dataset& gross, const TrainOptions& opts) {
    WinnerSelection sel;
    const std::size_t m = tasks.size();
    sel.accuracy_matrix.assign(m, std::vector<double>(m, 0.0));
    sel.harmonic_accuracies.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        ParamVector model;
        model.values = final_model_values(tasks[i]);
        model.momentum.assign(model.values.size(), 0.0);
        for (std::size_t k = 0; k < m; ++k) {
            const Batch val = gather_batch(gross, tasks[k].split.val_indices);
            sel.accuracy_matrix[i][k] =
                evaluate(model, opts.net, val.inputs, val.labels).accuracy;
        }
        sel.harmonic_accuracies[i] = harmonic_accuracy(sel.accuracy_matrix[i]);
    }
    sel.winner = 0;
    for (std::size_t i = 1; i < m; ++i)
        if (sel.harmonic_accuracies[i] > sel.harmonic_accuracies[sel.winner])
            sel.winner = static_cast<int>(i);
    return sel;
}

namespace {

int pool_size(const RunConfig& cfg) {
    if (cfg.workers > 0) return cfg.workers;
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

ValidationReport nan_report(int task_id, int checkpoint) {
    ValidationReport rep;
    rep.task_id = task_id;
    rep.checkpoint = checkpoint;
    rep.master_val_loss = std::numeric_limits<double>::quiet_NaN();
    rep.slave_val_loss = std::numeric_limits<double>::quiet_NaN();
    rep.master_val_accuracy = std::numeric_limits<double>::quiet_NaN();
    rep.slave_val_accuracy = std::numeric_limits<double>::quiet_NaN();
    return rep;
}

}  // namespace

RunResult run(const Dataset& gross, const RunConfig& cfg, RunObserver* observer) {
    validate_run_config(cfg, gross);

    const int M = cfg.task_count;
    const int c = cfg.checkpoint_interval;
    const bool transfer_active = cfg.mode == Mode::amto && M >= 2;
    const bool has_validation = cfg.mode != Mode::sto_no_val;
    const bool retain_best =
        cfg.retain_best == RetainBest::on ||
        (cfg.retain_best == RetainBest::auto_mode && has_validation && !transfer_active);

    TrainOptions opts{cfg.net, cfg.opt, cfg.hflip_width};
    std::vector<TrainingTask> tasks = formulate_tasks(gross, cfg);

    RunResult result;
    result.effective_max_iterations = (cfg.max_iterations / c) * c;
    const int total_rounds = static_cast<int>(result.effective_max_iterations / c);
    const int workers = pool_size(cfg);

    std::vector<int> sources(static_cast<std::size_t>(M), -1);
    std::vector<double> round_losses(static_cast<std::size_t>(M), 0.0);
    std::vector<ValidationReport> reports(static_cast<std::size_t>(M));
    std::vector<TransferEvent> round_events;
    std::vector<char> stalled(static_cast<std::size_t>(M), 0);

    result.stop_reason = StopReason::max_iter;
    for (int round = 1; round <= total_rounds; ++round) {
        result.checkpoints = round;

        // Phase 1: snapshot masters and reallocate. Every receiver reads the
        // snapshot taken at this barrier, so a task can be source and
        // receiver in the same round without ordering effects.
        if (transfer_active) {
            std::vector<std::vector<double>> snapshots;
            snapshots.reserve(static_cast<std::size_t>(M));
            for (const auto& t : tasks) snapshots.push_back(t.master.values);
            for (int m = 0; m < M; ++m) {
                auto& t = tasks[static_cast<std::size_t>(m)];
                sources[static_cast<std::size_t>(m)] =
                    select_source(t.rl, t.select_seed, t.select_calls);
                reallocate_knowledge(
                    t, snapshots[static_cast<std::size_t>(sources[static_cast<std::size_t>(m)])]);
            }
        }

        // Phase 2: fork-join training. One unit per model; units share no
        // mutable state, so scheduling cannot affect results.
        const int units = transfer_active ? 2 * M : M;
        std::vector<std::exception_ptr> unit_errors(static_cast<std::size_t>(units));
        std::vector<long long> offsets(static_cast<std::size_t>(M));
        for (int m = 0; m < M; ++m)
            offsets[static_cast<std::size_t>(m)] = tasks[static_cast<std::size_t>(m)].steps_done;

#pragma omp parallel for schedule(dynamic) num_threads(workers)
        for (int u = 0; u < units; ++u) {
            const int m = u % M;
            auto& t = tasks[static_cast<std::size_t>(m)];
            try {
                if (u < M) {
                    round_losses[static_cast<std::size_t>(m)] = train_model_steps(
                        t.master, t.master_batches, gross, opts, c,
                        offsets[static_cast<std::size_t>(m)], m, "master",
                        seed_tag::master_batch);
                } else {
                    train_model_steps(t.slave, t.slave_batches, gross, opts, c,
                                      offsets[static_cast<std::size_t>(m)], m, "slave",
                                      seed_tag::slave_batch);
                }
            } catch (...) {
                unit_errors[static_cast<std::size_t>(u)] = std::current_exception();
            }
        }
        for (auto& e : unit_errors)
            if (e) std::rethrow_exception(e);

        for (int m = 0; m < M; ++m) {
            auto& t = tasks[static_cast<std::size_t>(m)];
            t.steps_done += c;
            t.last_round_train_loss = round_losses[static_cast<std::size_t>(m)];
        }

        // Phase 3: validation, read-only per task.
        if (has_validation) {
            std::vector<std::exception_ptr> eval_errors(static_cast<std::size_t>(M));
#pragma omp parallel for schedule(dynamic) num_threads(workers)
            for (int m = 0; m < M; ++m) {
                try {
                    reports[static_cast<std::size_t>(m)] =
                        evaluate_validation(tasks[static_cast<std::size_t>(m)], gross, opts,
                                            round, transfer_active);
                } catch (...) {
                    eval_errors[static_cast<std::size_t>(m)] = std::current_exception();
                }
            }
            for (auto& e : eval_errors)
                if (e) std::rethrow_exception(e);
        } else {
            for (int m = 0; m < M; ++m)
                reports[static_cast<std::size_t>(m)] = nan_report(m, round);
        }

        if (observer) observer->after_training(round, tasks, reports);

        // Phase 4: barrier section, single-threaded, ordered by task id.
        round_events.clear();
        for (int m = 0; m < M; ++m) {
            auto& t = tasks[static_cast<std::size_t>(m)];
            const auto& rep = reports[static_cast<std::size_t>(m)];

            int accepted = 0;
            if (has_validation && retain_best && rep.master_val_loss < t.best_val_loss)
                t.best_params = t.master.values;  // pre-substitution master

            if (transfer_active) {
                TransferEvent ev =
                    determine_transfer(t, rep, sources[static_cast<std::size_t>(m)]);
                update_relationship(t.rl, ev.source, rep.master_val_loss,
                                    rep.slave_val_loss);
                accepted = ev.accepted ? 1 : 0;
                result.events.push_back(ev);
                round_events.push_back(ev);
            }
            if (has_validation)
                stalled[static_cast<std::size_t>(m)] =
                    update_patience(t, rep, cfg.patience) ? 1 : 0;

            MetricsRow row;
            row.run_id = cfg.run_id;
            row.seed = cfg.master_seed;
            row.task_id = m;
            row.checkpoint = round;
            row.global_iteration = t.steps_done;
            row.train_loss = t.last_round_train_loss;
            row.master_val_loss = rep.master_val_loss;
            row.slave_val_loss = rep.slave_val_loss;
            row.val_accuracy = rep.master_val_accuracy;
            row.lr = lr_at(cfg.opt, t.steps_done);
            row.transfer_source = sources[static_cast<std::size_t>(m)];
            row.transfer_accepted = accepted;
            result.metrics.push_back(std::move(row));
        }

        if (observer) observer->after_barrier(round, tasks, round_events);

        if (has_validation) {
            const bool stop =
                cfg.early_stop_policy == EarlyStopPolicy::all_stalled
                    ? std::all_of(stalled.begin(), stalled.end(), [](char s) { return s; })
                    : std::any_of(stalled.begin(), stalled.end(), [](char s) { return s; });
            if (stop) {
                result.stop_reason = StopReason::early_stop;
                break;
            }
        }
    }

    if (has_validation) {
        WinnerSelection sel = select_winner(tasks, gross, opts);
        result.winner = sel.winner;
        result.accuracy_matrix = std::move(sel.accuracy_matrix);
        result.harmonic_accuracies = std::move(sel.harmonic_accuracies);
    } else {
        result.winner = 0;
    }
    const auto& winner_task = tasks[static_cast<std::size_t>(result.winner)];
    if (!winner_task.best_params.empty()) {
        result.winning_params.values = winner_task.best_params;
        result.winning_params.momentum.assign(result.winning_params.values.size(), 0.0);
    } else {
        result.winning_params = winner_task.master;
    }
    result.tasks = std::move(tasks);
    return result;
}

}  // namespace amto
