#include "amto/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "amto/errors.hpp"

namespace amto {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

long long to_int(const std::string& key, const std::string& v) {
    long long out;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw config_error(key + ": expected integer, got '" + v + "'");
    return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    std::uint64_t out;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw config_error(key + ": expected unsigned integer, got '" + v + "'");
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    double out;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw config_error(key + ": expected number, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw config_error(key + ": expected boolean, got '" + v + "'");
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    if (trim(v).empty()) return out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(static_cast<int>(to_int(key, trim(item))));
    return out;
}

std::vector<long long> to_ll_list(const std::string& key, const std::string& v) {
    std::vector<long long> out;
    if (trim(v).empty()) return out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_int(key, trim(item)));
    return out;
}

}  // namespace

const std::vector<std::string>& known_spec_keys() {
    static const std::vector<std::string> keys = {
        "dataset.source",        "dataset.kind",
        "dataset.n",             "dataset.classes",
        "dataset.noise_sigma",   "dataset.seed",
        "dataset.label_noise",   "dataset.path",
        "dataset.label_column",  "dataset.has_header",
        "dataset.test_ratio",    "model.hidden_layers",
        "model.activation",      "model.init",
        "optimizer.learning_rate", "optimizer.momentum",
        "optimizer.lr_milestones", "optimizer.lr_decay",
        "optimizer.batch_size",  "amto.tasks",
        "amto.checkpoint_interval", "amto.patience",
        "amto.val_ratio",        "amto.early_stop_policy",
        "amto.shared_init",      "run.seed",
        "run.max_iterations",    "run.mode",
        "run.output_dir",        "run.repeats",
        "run.workers",           "run.retain_best",
        "run.hflip_width",
    };
    return keys;
}

ExperimentSpec parse_spec_text(const std::string& text, const std::string& origin) {
    static const std::set<std::string> known(known_spec_keys().begin(),
                                             known_spec_keys().end());
    std::map<std::string, std::string> kv;
    std::stringstream ss(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error(origin + ":" + std::to_string(lineno) +
                               ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!known.count(key))
            throw config_error(origin + ":" + std::to_string(lineno) + ": unknown key '" +
                               key + "'");
        if (kv.count(key))
            throw config_error(origin + ":" + std::to_string(lineno) + ": duplicate key '" +
                               key + "'");
        kv[key] = value;
    }

    ExperimentSpec spec;
    auto take = [&](const char* key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };

    if (auto* v = take("dataset.source")) {
        if (*v == "synthetic")
            spec.dataset.source = DatasetConfig::Source::synthetic;
        else if (*v == "csv")
            spec.dataset.source = DatasetConfig::Source::csv;
        else
            throw config_error("dataset.source: expected synthetic|csv, got '" + *v + "'");
    }
    if (auto* v = take("dataset.kind")) {
        if (*v == "blobs")
            spec.dataset.kind = SyntheticKind::blobs;
        else if (*v == "two_moons")
            spec.dataset.kind = SyntheticKind::two_moons;
        else if (*v == "ring")
            spec.dataset.kind = SyntheticKind::ring;
        else
            throw config_error("dataset.kind: expected blobs|two_moons|ring, got '" + *v +
                               "'");
    }
    if (auto* v = take("dataset.n")) spec.dataset.n = static_cast<int>(to_int("dataset.n", *v));
    if (auto* v = take("dataset.classes"))
        spec.dataset.classes = static_cast<int>(to_int("dataset.classes", *v));
    if (auto* v = take("dataset.noise_sigma"))
        spec.dataset.noise_sigma = to_double("dataset.noise_sigma", *v);
    if (auto* v = take("dataset.seed")) spec.dataset.seed = to_u64("dataset.seed", *v);
    if (auto* v = take("dataset.label_noise"))
        spec.dataset.label_noise = to_double("dataset.label_noise", *v);
    if (auto* v = take("dataset.path")) spec.dataset.path = *v;
    if (auto* v = take("dataset.label_column"))
        spec.dataset.label_column = static_cast<int>(to_int("dataset.label_column", *v));
    if (auto* v = take("dataset.has_header"))
        spec.dataset.has_header = to_bool("dataset.has_header", *v);
    if (auto* v = take("dataset.test_ratio"))
        spec.dataset.test_ratio = to_double("dataset.test_ratio", *v);

    if (auto* v = take("model.hidden_layers"))
        spec.hidden_layers = to_int_list("model.hidden_layers", *v);
    if (auto* v = take("model.activation")) {
        if (*v == "relu")
            spec.run.net.activation = Activation::relu;
        else if (*v == "tanh")
            spec.run.net.activation = Activation::tanh;
        else
            throw config_error("model.activation: expected relu|tanh, got '" + *v + "'");
    }
    if (auto* v = take("model.init")) {
        if (*v == "he_uniform")
            spec.run.net.init_scheme = InitScheme::he_uniform;
        else if (*v == "xavier_uniform")
            spec.run.net.init_scheme = InitScheme::xavier_uniform;
        else
            throw config_error("model.init: expected he_uniform|xavier_uniform, got '" +
                               *v + "'");
    }

    if (auto* v = take("optimizer.learning_rate"))
        spec.run.opt.initial_lr = to_double("optimizer.learning_rate", *v);
    if (auto* v = take("optimizer.momentum"))
        spec.run.opt.momentum = to_double("optimizer.momentum", *v);
    if (auto* v = take("optimizer.lr_milestones"))
        spec.run.opt.lr_milestones = to_ll_list("optimizer.lr_milestones", *v);
    if (auto* v = take("optimizer.lr_decay"))
        spec.run.opt.lr_decay = to_double("optimizer.lr_decay", *v);
    if (auto* v = take("optimizer.batch_size"))
        spec.run.opt.batch_size = static_cast<int>(to_int("optimizer.batch_size", *v));

    if (auto* v = take("amto.tasks"))
        spec.run.task_count = static_cast<int>(to_int("amto.tasks", *v));
    if (auto* v = take("amto.checkpoint_interval"))
        spec.run.checkpoint_interval =
            static_cast<int>(to_int("amto.checkpoint_interval", *v));
    if (auto* v = take("amto.patience"))
        spec.run.patience = static_cast<int>(to_int("amto.patience", *v));
    if (auto* v = take("amto.val_ratio"))
        spec.run.val_ratio = to_double("amto.val_ratio", *v);
    if (auto* v = take("amto.early_stop_policy")) {
        if (*v == "all")
            spec.run.early_stop_policy = EarlyStopPolicy::all_stalled;
        else if (*v == "any")
            spec.run.early_stop_policy = EarlyStopPolicy::any_stalled;
        else
            throw config_error("amto.early_stop_policy: expected all|any, got '" + *v +
                               "'");
    }
    if (auto* v = take("amto.shared_init"))
        spec.run.shared_init = to_bool("amto.shared_init", *v);

    if (auto* v = take("run.seed")) spec.run.master_seed = to_u64("run.seed", *v);
    if (auto* v = take("run.max_iterations"))
        spec.run.max_iterations = to_int("run.max_iterations", *v);
    if (auto* v = take("run.mode")) {
        if (*v == "amto")
            spec.run.mode = Mode::amto;
        else if (*v == "sto_with_val")
            spec.run.mode = Mode::sto_with_val;
        else if (*v == "sto_no_val")
            spec.run.mode = Mode::sto_no_val;
        else
            throw config_error("run.mode: expected amto|sto_with_val|sto_no_val, got '" +
                               *v + "'");
    }
    if (auto* v = take("run.output_dir")) spec.output_dir = *v;
    if (auto* v = take("run.repeats"))
        spec.repeats = static_cast<int>(to_int("run.repeats", *v));
    if (auto* v = take("run.workers"))
        spec.run.workers = static_cast<int>(to_int("run.workers", *v));
    if (auto* v = take("run.retain_best")) {
        if (*v == "auto")
            spec.run.retain_best = RetainBest::auto_mode;
        else if (*v == "on")
            spec.run.retain_best = RetainBest::on;
        else if (*v == "off")
            spec.run.retain_best = RetainBest::off;
        else
            throw config_error("run.retain_best: expected auto|on|off, got '" + *v + "'");
    }
    if (auto* v = take("run.hflip_width"))
        spec.run.hflip_width = static_cast<int>(to_int("run.hflip_width", *v));

    if (spec.repeats < 1) throw config_error("run.repeats must be >= 1");
    if (spec.dataset.test_ratio < 0.0 || spec.dataset.test_ratio >= 1.0)
        throw config_error("dataset.test_ratio must be in [0,1)");
    for (int h : spec.hidden_layers)
        if (h < 1) throw config_error("model.hidden_layers entries must be >= 1");
    return spec;
}

ExperimentSpec parse_spec_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw config_error("cannot open spec file: " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_spec_text(buf.str(), path);
}

}  // namespace amto
