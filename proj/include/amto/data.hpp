// Gross-training-set management: CSV loading, synthetic generation, the
// stratified train/validation splits that formulate each task, and
// deterministic mini-batch iteration.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "amto/kernels.hpp"

namespace amto {

struct Dataset {
    Matrix features;          // n rows x d columns
    std::vector<int> labels;  // length n, values in [0, class_count)
    int class_count = 0;
    std::string name;

    std::size_t size() const { return features.rows; }
    std::size_t dim() const { return features.cols; }
};

/// Throws data_error on label range violations, NaN features, or n < class_count.
void validate_dataset(const Dataset& ds);

/// One task's (training set, validation set) pair as index sets over the
/// gross set. train and val partition [0, n).
struct SplitPair {
    std::vector<std::uint32_t> train_indices;
    std::vector<std::uint32_t> val_indices;
    double val_ratio = 0.0;
    std::uint64_t split_seed = 0;
};

/// CSV with numeric cells; label column selected by index, remaining columns
/// become features in file order. Errors name the offending 1-based data row.
Dataset load_csv(const std::string& path, int label_column, int class_count,
                 bool has_header = false);

/// Inverse of load_csv, with the label written at `label_column`.
void write_csv(const std::string& path, const Dataset& ds, int label_column,
               bool write_header = false);

enum class SyntheticKind { blobs, two_moons, ring };

/// Deterministic 2-D toy classification sets. Classes are balanced (counts
/// differ by at most 1): sample i belongs to class i mod C. blobs places
/// class centroids on a circle of radius 3; two_moons (C = 2 only) uses the
/// usual interleaved half-circles; ring puts class k at radius k+1.
/// noise_sigma is the per-coordinate Gaussian jitter.
Dataset make_synthetic(SyntheticKind kind, int n, int class_count, double noise_sigma,
                       std::uint64_t seed);

/// Reassigns round(fraction*n) labels (chosen without replacement) to a
/// uniformly random different class.
void apply_label_noise(Dataset& ds, double fraction, std::uint64_t seed);

/// Stratified random split: exactly round(val_ratio*n) validation samples,
/// per-class counts proportional to val_ratio within 1 (largest-remainder
/// allocation, ties toward lower class ids). Throws data_error if either
/// side would be empty.
SplitPair sample_split(const Dataset& gross, double val_ratio, std::uint64_t split_seed);

/// Deterministic epoch iteration over an index set: each epoch is a
/// Fisher-Yates permutation keyed by (shuffle_seed, epoch); batches tile the
/// permutation and the final short batch of an epoch is emitted.
class BatchIterator {
public:
    BatchIterator() = default;
    BatchIterator(std::vector<std::uint32_t> indices, int batch_size,
                  std::uint64_t shuffle_seed);

    /// Gross-set indices of the next batch.
    std::vector<std::uint32_t> next_indices();

    std::uint64_t epoch() const { return epoch_; }

private:
    void reshuffle();

    std::vector<std::uint32_t> indices_;
    std::vector<std::uint32_t> order_;
    int batch_size_ = 1;
    std::uint64_t shuffle_seed_ = 0;
    std::uint64_t epoch_ = 0;
    std::size_t cursor_ = 0;
};

struct Batch {
    Matrix inputs;
    std::vector<int> labels;
};

/// Materializes the rows named by `indices`.
Batch gather_batch(const Dataset& gross, const std::vector<std::uint32_t>& indices);

/// Subset of the dataset as a standalone dataset (used to hide the test
/// partition from the training side).
Dataset subset(const Dataset& ds, const std::vector<std::uint32_t>& indices,
               const std::string& name);

/// Mirrors each row of image-shaped features (row-major rows of `width`
/// pixels) left-to-right. Applying it twice is the identity.
Matrix flip_horizontal(const Matrix& X, int width);

}  // namespace amto
