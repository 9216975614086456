#include "amto/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "amto/errors.hpp"
#include "amto/rng.hpp"
#include "amto/svg.hpp"

namespace fs = std::filesystem;

namespace amto {

namespace {

const char* mode_name(Mode m) {
    switch (m) {
        case Mode::amto: return "amto";
        case Mode::sto_with_val: return "sto_with_val";
        case Mode::sto_no_val: return "sto_no_val";
    }
    return "?";
}

const char* stop_name(StopReason r) {
    return r == StopReason::max_iter ? "max_iter" : "early_stop";
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::trunc | std::ios::binary);
    if (!os) throw data_error("cannot open " + path + " for writing");
    os << text;
}

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

/// Test-set top-1 accuracy in percent.
double test_accuracy_pct(const ParamVector& model, const NetworkSpec& net,
                         const Dataset& test) {
    ParamVector weights_only;
    weights_only.values = model.values;
    weights_only.momentum.assign(model.values.size(), 0.0);
    const EvalResult r = evaluate(weights_only, net, test.features, test.labels);
    return 100.0 * r.accuracy;
}

}  // namespace

PreparedData prepare_data(const DatasetConfig& cfg) {
    Dataset full;
    if (cfg.source == DatasetConfig::Source::synthetic) {
        full = make_synthetic(cfg.kind, cfg.n, cfg.classes, cfg.noise_sigma, cfg.seed);
    } else {
        if (cfg.path.empty()) throw config_error("dataset.path is required for csv source");
        full = load_csv(cfg.path, cfg.label_column, cfg.classes, cfg.has_header);
    }

    PreparedData out;
    if (cfg.test_ratio > 0.0) {
        // The gross/test partition is keyed by the dataset seed, not the run
        // seed, so every repeat shares one test set.
        const SplitPair sp = sample_split(
            full, cfg.test_ratio, seed_combine(cfg.seed, seed_tag::test_split));
        out.test = subset(full, sp.val_indices, full.name + "-test");
        out.gross = subset(full, sp.train_indices, full.name + "-gross");
    } else {
        out.gross = std::move(full);
    }
    if (cfg.label_noise > 0.0)
        apply_label_noise(out.gross, cfg.label_noise, cfg.seed);
    return out;
}

RunConfig resolve_run_config(const ExperimentSpec& spec, const Dataset& gross) {
    RunConfig cfg = spec.run;
    cfg.net.layer_sizes.clear();
    cfg.net.layer_sizes.push_back(static_cast<int>(gross.dim()));
    for (int h : spec.hidden_layers) cfg.net.layer_sizes.push_back(h);
    cfg.net.layer_sizes.push_back(gross.class_count);
    return cfg;
}

SingleRunArtifacts run_single(const RunConfig& cfg, const PreparedData& data,
                              const std::string& dir) {
    fs::create_directories(dir);
    const auto t0 = std::chrono::steady_clock::now();
    SingleRunArtifacts art;
    art.result = run(data.gross, cfg);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (!data.test.labels.empty())
        art.test_accuracy = test_accuracy_pct(art.result.winning_params, cfg.net, data.test);

    art.metrics_path = (fs::path(dir) / "metrics.csv").string();
    art.events_path = (fs::path(dir) / "events.jsonl").string();
    art.summary_path = (fs::path(dir) / "summary.json").string();
    art.checkpoint_path = (fs::path(dir) / "checkpoint.bin").string();

    write_metrics_csv(art.metrics_path, art.result.metrics);
    write_events_jsonl(art.events_path, art.result.events);

    NetworkSpec canonical = cfg.net;  // winner spec for the snapshot header
    canonical.init_seed = derive_init_seed(cfg.master_seed, cfg.shared_init,
                                           art.result.winner);
    save_snapshot(art.checkpoint_path, canonical, art.result.winning_params);

    nlohmann::ordered_json j;
    j["run_id"] = cfg.run_id;
    j["mode"] = mode_name(cfg.mode);
    j["seed"] = cfg.master_seed;
    j["dataset"] = data.gross.name;
    j["tasks"] = cfg.task_count;
    j["winner_task"] = art.result.winner;
    j["stop_reason"] = stop_name(art.result.stop_reason);
    j["checkpoints"] = art.result.checkpoints;
    j["effective_max_iterations"] = art.result.effective_max_iterations;
    if (!art.result.harmonic_accuracies.empty()) {
        j["harmonic_accuracies"] = art.result.harmonic_accuracies;
        j["winner_harmonic_accuracy"] =
            art.result.harmonic_accuracies[static_cast<std::size_t>(art.result.winner)];
        j["validation_accuracy_matrix"] = art.result.accuracy_matrix;
    }
    if (art.test_accuracy >= 0.0) j["test_accuracy_pct"] = art.test_accuracy;
    j["wall_time_seconds"] = wall;  // the one non-reproducible field
    write_text(art.summary_path, j.dump(2) + "\n");
    return art;
}

CompareResult run_compare(const ExperimentSpec& spec, int repeats,
                          const std::string& dir) {
    if (repeats < 1) throw config_error("repeats must be >= 1");
    PreparedData data = prepare_data(spec.dataset);
    if (data.test.labels.empty())
        throw config_error("compare needs dataset.test_ratio > 0");

    fs::create_directories(dir);
    CompareResult res;
    for (int r = 0; r < repeats; ++r) {
        const std::uint64_t seed =
            seed_combine(spec.run.master_seed,
                         seed_combine(seed_tag::repeat, static_cast<std::uint64_t>(r)));
        res.seeds.push_back(seed);

        // STO and AMTO start from the same seed within a repeat.
        ExperimentSpec sto_spec = spec;
        sto_spec.run.mode = Mode::sto_with_val;
        sto_spec.run.task_count = 1;
        RunConfig sto_cfg = resolve_run_config(sto_spec, data.gross);
        sto_cfg.master_seed = seed;
        sto_cfg.run_id = "sto-r" + std::to_string(r);
        SingleRunArtifacts sto = run_single(
            sto_cfg, data, (fs::path(dir) / ("sto-r" + std::to_string(r))).string());

        ExperimentSpec amto_spec = spec;
        amto_spec.run.mode = Mode::amto;
        RunConfig amto_cfg = resolve_run_config(amto_spec, data.gross);
        amto_cfg.master_seed = seed;
        amto_cfg.run_id = "amto-r" + std::to_string(r);
        SingleRunArtifacts amto = run_single(
            amto_cfg, data, (fs::path(dir) / ("amto-r" + std::to_string(r))).string());

        res.sto_accuracy.push_back(sto.test_accuracy);
        res.amto_accuracy.push_back(amto.test_accuracy);
    }
    res.sto_mean = mean(res.sto_accuracy);
    res.amto_mean = mean(res.amto_accuracy);

    std::ostringstream table;
    table << "method";
    for (int r = 0; r < repeats; ++r) table << ",seed_" << r;
    table << ",mean\n";
    table << "STO";
    for (double a : res.sto_accuracy) table << ',' << format_double(a);
    table << ',' << format_double(res.sto_mean) << "\nAMTO";
    for (double a : res.amto_accuracy) table << ',' << format_double(a);
    table << ',' << format_double(res.amto_mean) << "\ngap";
    for (int r = 0; r < repeats; ++r)
        table << ','
              << format_double(res.amto_accuracy[static_cast<std::size_t>(r)] -
                               res.sto_accuracy[static_cast<std::size_t>(r)]);
    table << ',' << format_double(res.amto_mean - res.sto_mean) << '\n';

    res.table_path = (fs::path(dir) / "compare.csv").string();
    write_text(res.table_path, table.str());
    return res;
}

SweepResult run_sweep(const ExperimentSpec& spec, const std::vector<int>& task_counts,
                      int repeats, const std::string& dir) {
    if (task_counts.empty()) throw config_error("sweep needs at least one task count");
    for (int c : task_counts)
        if (c < 1) throw config_error("task counts must be >= 1");
    PreparedData data = prepare_data(spec.dataset);
    if (data.test.labels.empty())
        throw config_error("sweep needs dataset.test_ratio > 0");

    fs::create_directories(dir);
    SweepResult res;
    res.task_counts = task_counts;
    for (int count : task_counts) {
        std::vector<double> losses, accs;
        for (int r = 0; r < repeats; ++r) {
            const std::uint64_t seed = seed_combine(
                spec.run.master_seed,
                seed_combine(seed_tag::repeat, static_cast<std::uint64_t>(r)));
            ExperimentSpec s = spec;
            s.run.mode = count == 1 ? Mode::sto_with_val : Mode::amto;
            s.run.task_count = count;
            RunConfig cfg = resolve_run_config(s, data.gross);
            cfg.master_seed = seed;
            cfg.run_id = "m" + std::to_string(count) + "-r" + std::to_string(r);
            SingleRunArtifacts art = run_single(
                cfg, data,
                (fs::path(dir) / ("m" + std::to_string(count) + "-r" + std::to_string(r)))
                    .string());

            // Winner's validation loss at the last checkpoint, from the
            // trajectory: the same quantity for every task count.
            const int winner = art.result.winner;
            const int last = art.result.checkpoints;
            double final_loss = std::numeric_limits<double>::quiet_NaN();
            for (const auto& row : art.result.metrics)
                if (row.checkpoint == last && row.task_id == winner)
                    final_loss = row.master_val_loss;
            losses.push_back(final_loss);
            accs.push_back(art.test_accuracy);
        }
        res.mean_val_loss.push_back(mean(losses));
        res.mean_test_accuracy.push_back(mean(accs));
    }

    std::ostringstream table;
    table << "task_count,mean_val_loss,mean_test_accuracy\n";
    for (std::size_t i = 0; i < task_counts.size(); ++i)
        table << task_counts[i] << ',' << format_double(res.mean_val_loss[i]) << ','
              << format_double(res.mean_test_accuracy[i]) << '\n';
    res.table_path = (fs::path(dir) / "sweep.csv").string();
    write_text(res.table_path, table.str());

    res.svg_path = (fs::path(dir) / "sweep.svg").string();
    write_text(res.svg_path,
               render_sweep_panels(task_counts, res.mean_val_loss, res.mean_test_accuracy));
    return res;
}

std::vector<std::string> plot_metrics(const std::string& csv_path,
                                      const std::string& dir) {
    const std::vector<MetricsRow> rows = read_metrics_csv(csv_path);
    fs::create_directories(dir);

    std::vector<std::string> run_ids;
    for (const auto& r : rows)
        if (std::find(run_ids.begin(), run_ids.end(), r.run_id) == run_ids.end())
            run_ids.push_back(r.run_id);

    std::vector<std::string> written;
    for (const auto& id : run_ids) {
        std::vector<MetricsRow> subset_rows;
        for (const auto& r : rows)
            if (r.run_id == id) subset_rows.push_back(r);
        const std::string path = (fs::path(dir) / (id + "_loss.svg")).string();
        write_text(path, render_loss_curves(id, subset_rows));
        written.push_back(path);
    }
    return written;
}

namespace {

ExperimentSpec load_with_overrides(const std::string& spec_path, const Overrides& ov) {
    ExperimentSpec spec = parse_spec_file(spec_path);
    if (ov.seed) spec.run.master_seed = *ov.seed;
    if (ov.output_dir) spec.output_dir = *ov.output_dir;
    return spec;
}

int guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int cmd_run(const std::string& spec_path, const Overrides& ov) {
    return guarded([&] {
        ExperimentSpec spec = load_with_overrides(spec_path, ov);
        PreparedData data = prepare_data(spec.dataset);
        RunConfig cfg = resolve_run_config(spec, data.gross);
        if (cfg.max_iterations % cfg.checkpoint_interval != 0)
            std::cerr << "note: max_iterations rounded down to a multiple of the "
                         "checkpoint interval\n";
        SingleRunArtifacts art = run_single(cfg, data, spec.output_dir);
        std::cout << "winner task " << art.result.winner << ", stop reason "
                  << stop_name(art.result.stop_reason) << ", checkpoints "
                  << art.result.checkpoints;
        if (art.test_accuracy >= 0.0)
            std::cout << ", test accuracy " << format_double(art.test_accuracy) << "%";
        std::cout << "\nartifacts in " << spec.output_dir << '\n';
    });
}

int cmd_compare(const std::string& spec_path, std::optional<int> repeats,
                const Overrides& ov) {
    return guarded([&] {
        ExperimentSpec spec = load_with_overrides(spec_path, ov);
        const int r = repeats.value_or(spec.repeats);
        CompareResult res = run_compare(spec, r, spec.output_dir);
        std::cout << "method";
        for (std::size_t i = 0; i < res.seeds.size(); ++i) std::cout << "\tseed_" << i;
        std::cout << "\tmean\nSTO ";
        for (double a : res.sto_accuracy) std::cout << '\t' << format_double(a);
        std::cout << '\t' << format_double(res.sto_mean) << "\nAMTO";
        for (double a : res.amto_accuracy) std::cout << '\t' << format_double(a);
        std::cout << '\t' << format_double(res.amto_mean) << "\ngap ";
        for (std::size_t i = 0; i < res.seeds.size(); ++i)
            std::cout << '\t' << format_double(res.amto_accuracy[i] - res.sto_accuracy[i]);
        std::cout << '\t' << format_double(res.amto_mean - res.sto_mean) << '\n'
                  << "table: " << res.table_path << '\n';
    });
}

int cmd_sweep_tasks(const std::string& spec_path, const std::vector<int>& counts,
                    const Overrides& ov) {
    return guarded([&] {
        ExperimentSpec spec = load_with_overrides(spec_path, ov);
        SweepResult res = run_sweep(spec, counts, spec.repeats, spec.output_dir);
        std::cout << "task_count\tmean_val_loss\tmean_test_accuracy\n";
        for (std::size_t i = 0; i < res.task_counts.size(); ++i)
            std::cout << res.task_counts[i] << '\t' << format_double(res.mean_val_loss[i])
                      << '\t' << format_double(res.mean_test_accuracy[i]) << '\n';
        std::cout << "table: " << res.table_path << "\nfigure: " << res.svg_path << '\n';
    });
}

int cmd_plot(const std::string& csv_path, const Overrides& ov) {
    return guarded([&] {
        const std::string dir = ov.output_dir.value_or(".");
        for (const auto& p : plot_metrics(csv_path, dir))
            std::cout << "wrote " << p << '\n';
    });
}

}  // namespace amto
