#include "amto/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "amto/errors.hpp"
#include "amto/rng.hpp"

namespace amto {

void validate_dataset(const Dataset& ds) {
    if (ds.class_count < 1) throw data_error("class_count must be >= 1");
    if (ds.size() < static_cast<std::size_t>(ds.class_count))
        throw data_error("dataset smaller than its class count");
    if (ds.labels.size() != ds.size())
        throw data_error("label vector length does not match feature rows");
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
        if (ds.labels[i] < 0 || ds.labels[i] >= ds.class_count)
            throw data_error("label out of range at row " + std::to_string(i + 1));
    for (double v : ds.features.data)
        if (std::isnan(v)) throw data_error("NaN feature value");
}

namespace {

double parse_double(const std::string& cell, std::size_t row) {
    double v;
    const char* b = cell.data();
    const char* e = b + cell.size();
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{} || res.ptr != e)
        throw data_error("row " + std::to_string(row) + ": cannot parse '" + cell + "'");
    return v;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

}  // namespace

Dataset load_csv(const std::string& path, int label_column, int class_count,
                 bool has_header) {
    std::ifstream is(path);
    if (!is) throw data_error("cannot open " + path);

    std::vector<double> feat;
    std::vector<int> labels;
    std::size_t dim = 0;
    std::size_t row = 0;
    std::string line;
    bool skipped_header = !has_header;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!skipped_header) {
            skipped_header = true;
            continue;
        }
        ++row;
        auto cells = split_line(line);
        if (label_column < 0 || static_cast<std::size_t>(label_column) >= cells.size())
            throw data_error("row " + std::to_string(row) + ": no label column " +
                             std::to_string(label_column));
        if (dim == 0)
            dim = cells.size() - 1;
        else if (cells.size() - 1 != dim)
            throw data_error("row " + std::to_string(row) + ": expected " +
                             std::to_string(dim + 1) + " columns, got " +
                             std::to_string(cells.size()));

        const double raw = parse_double(cells[static_cast<std::size_t>(label_column)], row);
        const int label = static_cast<int>(raw);
        if (static_cast<double>(label) != raw)
            throw data_error("row " + std::to_string(row) + ": label not integral");
        if (label < 0 || label >= class_count)
            throw data_error("row " + std::to_string(row) + ": label " +
                             std::to_string(label) + " outside [0," +
                             std::to_string(class_count) + ")");
        labels.push_back(label);
        for (std::size_t c = 0; c < cells.size(); ++c)
            if (c != static_cast<std::size_t>(label_column))
                feat.push_back(parse_double(cells[c], row));
    }
    if (row == 0) throw data_error("no data rows in " + path);

    Dataset ds;
    ds.features.rows = row;
    ds.features.cols = dim;
    ds.features.data = std::move(feat);
    ds.labels = std::move(labels);
    ds.class_count = class_count;
    ds.name = path;
    validate_dataset(ds);
    return ds;
}

namespace {
std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, p);
}
}  // namespace

void write_csv(const std::string& path, const Dataset& ds, int label_column,
               bool write_header) {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw data_error("cannot open " + path + " for writing");
    const std::size_t ncol = ds.dim() + 1;
    if (label_column < 0 || static_cast<std::size_t>(label_column) >= ncol)
        throw data_error("label column out of range");
    if (write_header) {
        for (std::size_t c = 0; c < ncol; ++c) {
            if (c) os << ',';
            if (c == static_cast<std::size_t>(label_column))
                os << "label";
            else
                os << 'f' << (c < static_cast<std::size_t>(label_column) ? c : c - 1);
        }
        os << '\n';
    }
    for (std::size_t i = 0; i < ds.size(); ++i) {
        std::size_t f = 0;
        for (std::size_t c = 0; c < ncol; ++c) {
            if (c) os << ',';
            if (c == static_cast<std::size_t>(label_column))
                os << ds.labels[i];
            else
                os << format_double(ds.features(i, f++));
        }
        os << '\n';
    }
}

Dataset make_synthetic(SyntheticKind kind, int n, int class_count, double noise_sigma,
                       std::uint64_t seed) {
    if (class_count < 1) throw config_error("class_count must be >= 1");
    if (n < class_count) throw config_error("need at least one sample per class");
    if (kind == SyntheticKind::two_moons && class_count != 2)
        throw config_error("two_moons requires exactly 2 classes");

    Dataset ds;
    ds.class_count = class_count;
    ds.features.resize(static_cast<std::size_t>(n), 2);
    ds.labels.resize(static_cast<std::size_t>(n));

    Rng rng(seed);
    constexpr double pi = 3.14159265358979323846;
    for (int i = 0; i < n; ++i) {
        const int cls = i % class_count;
        ds.labels[static_cast<std::size_t>(i)] = cls;
        double x = 0.0, y = 0.0;
        switch (kind) {
            case SyntheticKind::blobs: {
                const double angle = 2.0 * pi * cls / class_count;
                x = 3.0 * std::cos(angle);
                y = 3.0 * std::sin(angle);
                break;
            }
            case SyntheticKind::two_moons: {
                const double t = pi * rng.uniform();
                if (cls == 0) {
                    x = std::cos(t);
                    y = std::sin(t);
                } else {
                    x = 1.0 - std::cos(t);
                    y = 0.5 - std::sin(t);
                }
                break;
            }
            case SyntheticKind::ring: {
                const double t = 2.0 * pi * rng.uniform();
                const double r = 1.0 + cls;
                x = r * std::cos(t);
                y = r * std::sin(t);
                break;
            }
        }
        ds.features(static_cast<std::size_t>(i), 0) = x + noise_sigma * rng.gaussian();
        ds.features(static_cast<std::size_t>(i), 1) = y + noise_sigma * rng.gaussian();
    }

    const char* kind_name = kind == SyntheticKind::blobs     ? "blobs"
                            : kind == SyntheticKind::two_moons ? "two_moons"
                                                               : "ring";
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s-n%d-c%d-s%llu", kind_name, n, class_count,
                  static_cast<unsigned long long>(seed));
    ds.name = buf;
    return ds;
}

void apply_label_noise(Dataset& ds, double fraction, std::uint64_t seed) {
    if (fraction < 0.0 || fraction > 1.0)
        throw config_error("label noise fraction must be in [0,1]");
    if (fraction == 0.0 || ds.class_count < 2) return;
    const auto n = ds.size();
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    Rng rng(seed_combine(seed, seed_tag::label_noise));
    rng.shuffle(order);
    for (std::size_t i = 0; i < k; ++i) {
        int& y = ds.labels[order[i]];
        const int shift = 1 + static_cast<int>(rng.bounded(
                                  static_cast<std::uint64_t>(ds.class_count - 1)));
        y = (y + shift) % ds.class_count;
    }
}

SplitPair sample_split(const Dataset& gross, double val_ratio, std::uint64_t split_seed) {
    if (val_ratio <= 0.0 || val_ratio >= 1.0)
        throw data_error("val_ratio must be in (0,1)");
    const std::size_t n = gross.size();
    const auto target =
        static_cast<std::size_t>(std::llround(val_ratio * static_cast<double>(n)));
    if (target == 0) throw data_error("val_ratio yields an empty validation set");
    if (target >= n) throw data_error("val_ratio yields an empty training set");

    // Per-class validation quotas by largest remainder, so the total is
    // exactly `target` while each class stays proportional within 1.
    std::vector<std::vector<std::uint32_t>> by_class(
        static_cast<std::size_t>(gross.class_count));
    for (std::size_t i = 0; i < n; ++i)
        by_class[static_cast<std::size_t>(gross.labels[i])].push_back(
            static_cast<std::uint32_t>(i));

    std::vector<std::size_t> quota(by_class.size());
    std::vector<std::pair<double, std::size_t>> remainder;  // (-frac, class)
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        const double exact = val_ratio * static_cast<double>(by_class[c].size());
        quota[c] = static_cast<std::size_t>(exact);
        assigned += quota[c];
        remainder.emplace_back(-(exact - static_cast<double>(quota[c])), c);
    }
    std::sort(remainder.begin(), remainder.end());
    for (std::size_t r = 0; assigned < target && r < remainder.size(); ++r) {
        const std::size_t c = remainder[r].second;
        if (quota[c] < by_class[c].size()) {
            ++quota[c];
            ++assigned;
        }
    }
    if (assigned != target) throw data_error("cannot satisfy validation quota");

    SplitPair sp;
    sp.val_ratio = val_ratio;
    sp.split_seed = split_seed;
    Rng rng(split_seed);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        rng.shuffle(by_class[c]);
        for (std::size_t i = 0; i < by_class[c].size(); ++i)
            (i < quota[c] ? sp.val_indices : sp.train_indices).push_back(by_class[c][i]);
    }
    std::sort(sp.val_indices.begin(), sp.val_indices.end());
    std::sort(sp.train_indices.begin(), sp.train_indices.end());
    return sp;
}

BatchIterator::BatchIterator(std::vector<std::uint32_t> indices, int batch_size,
                             std::uint64_t shuffle_seed)
    : indices_(std::move(indices)), batch_size_(batch_size), shuffle_seed_(shuffle_seed) {
    if (batch_size_ < 1) throw config_error("batch_size must be >= 1");
    if (indices_.empty()) throw data_error("batch iterator over empty index set");
    reshuffle();
}

void BatchIterator::reshuffle() {
    order_ = indices_;
    Rng rng(seed_combine(shuffle_seed_, epoch_));
    rng.shuffle(order_);
    cursor_ = 0;
}

std::vector<std::uint32_t> BatchIterator::next_indices() {
    const std::size_t take =
        std::min(static_cast<std::size_t>(batch_size_), order_.size() - cursor_);
    std::vector<std::uint32_t> batch(order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                                     order_.begin() +
                                         static_cast<std::ptrdiff_t>(cursor_ + take));
    cursor_ += take;
    if (cursor_ >= order_.size()) {
        ++epoch_;
        reshuffle();
    }
    return batch;
}

Batch gather_batch(const Dataset& gross, const std::vector<std::uint32_t>& indices) {
    Batch b;
    b.inputs.resize(indices.size(), gross.dim());
    b.labels.resize(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const std::uint32_t src = indices[i];
        std::copy(gross.features.row(src), gross.features.row(src) + gross.dim(),
                  b.inputs.row(i));
        b.labels[i] = gross.labels[src];
    }
    return b;
}

Dataset subset(const Dataset& ds, const std::vector<std::uint32_t>& indices,
               const std::string& name) {
    Dataset out;
    out.class_count = ds.class_count;
    out.name = name;
    Batch b = gather_batch(ds, indices);
    out.features = std::move(b.inputs);
    out.labels = std::move(b.labels);
    return out;
}

Matrix flip_horizontal(const Matrix& X, int width) {
    if (width < 1 || X.cols % static_cast<std::size_t>(width) != 0)
        throw data_error("feature width does not divide feature count");
    Matrix out = X;
    const auto w = static_cast<std::size_t>(width);
    for (std::size_t i = 0; i < X.rows; ++i) {
        double* row = out.row(i);
        for (std::size_t seg = 0; seg < X.cols; seg += w)
            std::reverse(row + seg, row + seg + w);
    }
    return out;
}

}  // namespace amto
