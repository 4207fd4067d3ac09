#ifndef VQC_DATA_HPP
#define VQC_DATA_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace vqc {

/// A classification dataset in row-major feature layout with labels
/// re-indexed to 0..num_classes-1.
struct Dataset {
    std::string name;
    std::size_t num_features = 0;
    std::vector<double> features;  // num_rows x num_features, row-major
    std::vector<int> labels;
    int num_classes = 0;

    std::size_t num_rows() const { return labels.size(); }
    double at(std::size_t row, std::size_t col) const { return features[row * num_features + col]; }
    std::vector<double> row(std::size_t r) const {
        return {features.begin() + static_cast<std::ptrdiff_t>(r * num_features),
                features.begin() + static_cast<std::ptrdiff_t>((r + 1) * num_features)};
    }
};

struct LoadOptions {
    // Column holding the class label; negative counts from the end
    // (-1 = last column). All other columns are numeric features.
    int label_column = -1;
};

/// Reads a comma- or whitespace-delimited numeric text file, one sample per
/// row. Labels are re-indexed to 0..K-1 in first-appearance order. Blank or
/// non-numeric feature cells raise an ingestion error naming row and column.
Dataset load_dataset(const std::string& path, const LoadOptions& options = {});
Dataset load_dataset(const std::string& path, const std::string& name, const LoadOptions& options = {});

/// Stratified shuffled split into train_size + test_size rows, deterministic
/// per seed. Per-class proportions are preserved within rounding; classes
/// with fewer than 2 rows go entirely to the training side.
std::pair<Dataset, Dataset> split(const Dataset& dataset, std::size_t train_size,
                                  std::size_t test_size, std::uint64_t seed);

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> std_dev;  // population convention (divide by N)
};

/// Centers and scales using statistics of the training split only, applying
/// them to both splits. A zero-variance training column is an error.
Standardizer standardize_fit_apply(Dataset& train, Dataset& test);

struct PcaModel {
    std::vector<double> mean;        // length F
    std::vector<double> components;  // k x F, row-major, orthonormal rows
    std::size_t k = 0;
    std::size_t input_features = 0;
    std::vector<double> explained_variance_ratio;  // length k

    double component(std::size_t c, std::size_t f) const { return components[c * input_features + f]; }
};

/// Top-k right singular vectors of the centered training matrix, ordered by
/// decreasing singular value. Each component is signed so its
/// largest-magnitude entry is positive.
PcaModel pca_fit(const Dataset& train, std::size_t k);

/// Projects rows onto the component subspace: (X - mean) * components^T.
Dataset pca_apply(const PcaModel& model, const Dataset& data);

/// Rotation-angle encoding of a standardized feature value.
struct EncodingParams {
    double alpha = 0.1;
    double q = 3.0;
};

/// encode(W) = (1 - alpha/2) * (pi/q) * W.
double encode(double standardized_value, const EncodingParams& params = {});

/// Applies encode() elementwise to every feature of every row.
std::vector<double> encode_features(const Dataset& data, const EncodingParams& params = {});

}  // namespace vqc

#endif
