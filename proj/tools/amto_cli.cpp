// amto — multi-task trainer CLI.
//
//   amto run <spec>                     one experiment
//   amto compare <spec> --repeats R     paired STO-vs-AMTO comparison
//   amto sweep-tasks <spec> --counts L  task-count sweep with figure
//   amto plot <metrics.csv>             loss-curve SVGs from a metrics file
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration error.
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "amto/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"adaptive multi-task training for MLP classifiers"};
    app.require_subcommand(1);

    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;

    std::string spec_path;
    std::string csv_path;
    int repeats = 0;
    std::vector<int> counts = {1, 2, 4, 6};

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "override run.seed");
        sub->add_option("--output-dir", output_dir, "override run.output_dir");
    };

    auto* run = app.add_subcommand("run", "execute one training run");
    run->add_option("spec", spec_path, "experiment spec file")->required();
    add_common(run);

    auto* compare = app.add_subcommand("compare", "paired STO vs AMTO comparison");
    compare->add_option("spec", spec_path, "experiment spec file")->required();
    compare->add_option("--repeats", repeats, "number of paired seeds");
    add_common(compare);

    auto* sweep = app.add_subcommand("sweep-tasks", "sweep the number of tasks");
    sweep->add_option("spec", spec_path, "experiment spec file")->required();
    sweep->add_option("--counts", counts, "task counts to sweep")->delimiter(',');
    add_common(sweep);

    auto* plot = app.add_subcommand("plot", "render SVG curves from a metrics CSV");
    plot->add_option("csv", csv_path, "metrics CSV file")->required();
    add_common(plot);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    amto::Overrides ov{seed, output_dir};
    if (run->parsed()) return amto::cmd_run(spec_path, ov);
    if (compare->parsed())
        return amto::cmd_compare(spec_path,
                                 repeats > 0 ? std::optional<int>(repeats) : std::nullopt,
                                 ov);
    if (sweep->parsed()) return amto::cmd_sweep_tasks(spec_path, counts, ov);
    if (plot->parsed()) return amto::cmd_plot(csv_path, ov);
    return 2;
}
