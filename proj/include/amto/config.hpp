// Experiment spec files: flat dotted-key text format, one `key = value` per
// line, '#' comments. Unknown keys are a hard error so typos cannot silently
// fall back to defaults.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "amto/data.hpp"
#include "amto/orchestrator.hpp"

namespace amto {

struct DatasetConfig {
    enum class Source { synthetic, csv };
    Source source = Source::synthetic;
    // synthetic
    SyntheticKind kind = SyntheticKind::blobs;
    int n = 1000;
    int classes = 2;
    double noise_sigma = 0.5;
    std::uint64_t seed = 7;
    double label_noise = 0.0;  // applied to the gross partition only
    // csv
    std::string path;
    int label_column = 0;
    bool has_header = false;
    // gross/test pre-partition
    double test_ratio = 0.2;
};

/// Fully resolved experiment: dataset recipe plus the orchestrator config.
/// The network's input/output sizes are filled in from the dataset when the
/// experiment is prepared; spec files list only the hidden layers.
struct ExperimentSpec {
    DatasetConfig dataset;
    std::vector<int> hidden_layers = {16, 16};
    RunConfig run;  // run.net.layer_sizes completed later
    std::string output_dir = "out";
    int repeats = 5;
};

/// Parses a spec file. Throws config_error naming the offending key/value.
ExperimentSpec parse_spec_file(const std::string& path);

/// Same, from in-memory text (used by tests).
ExperimentSpec parse_spec_text(const std::string& text, const std::string& origin);

const std::vector<std::string>& known_spec_keys();

}  // namespace amto
