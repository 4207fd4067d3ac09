#ifndef VQC_TRAINING_HPP
#define VQC_TRAINING_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vqc/circuits.hpp"
#include "vqc/data.hpp"
#include "vqc/noise.hpp"

namespace vqc {

/// Partition of the 2^n bitstrings into num_classes equal contiguous ranges
/// of floor(2^n / K) bitstrings each; the leftover tail is ignored.
struct OutputMapping {
    int num_qubits = 0;
    int num_classes = 0;

    std::size_t block_size() const { return (std::size_t{1} << num_qubits) / static_cast<std::size_t>(num_classes); }
};

void validate(const OutputMapping& mapping);

/// Per-class probabilities: sum the distribution mass of each class range,
/// then renormalize. If every retained bin is zero the result is uniform.
std::vector<double> class_probabilities(std::span<const double> distribution,
                                        const OutputMapping& mapping);
std::vector<double> class_probabilities(std::span<const std::uint64_t> counts,
                                        const OutputMapping& mapping);

/// -log(e^{P_y} / sum_k e^{P_k}), softmax applied to the class probabilities
/// themselves. Always finite and nonnegative for P in [0, 1]^K.
double nll_loss(std::span<const double> class_probs, int label);

/// Optimizer settings and the shot growth schedule.
struct TrainConfig {
    double rho_begin = 1.0;
    double tolerance = 0.0002;
    int max_epochs = 200;
    double init_low = -3.14159265358979323846;
    double init_high = 3.14159265358979323846;
    std::uint64_t test_shots = 300;

    // 250 shots for epochs 1-20, 500 for 21-50, 750 afterwards.
    std::uint64_t shots_for_epoch(int epoch) const {
        if (epoch <= 20) return 250;
        if (epoch <= 50) return 500;
        return 750;
    }
};

/// A dataset already passed through encode(): rotation angles plus labels.
struct EncodedDataset {
    std::size_t num_features = 0;
    std::vector<double> angles;  // rows x features, row-major
    std::vector<int> labels;
    int num_classes = 0;

    std::size_t num_rows() const { return labels.size(); }
    std::span<const double> row(std::size_t r) const {
        return {angles.data() + r * num_features, num_features};
    }
};

EncodedDataset encode_dataset(const Dataset& data, const EncodingParams& params = {});

/// Mean sampled loss over a training set for one parameter vector: bind,
/// simulate (noisy when a model is given), draw `shots`, map to class
/// probabilities, take the Eq.-style loss, average. Per-sample randomness is
/// derived from (seed, epoch, sample index), so the value is deterministic
/// per (seed, epoch).
double objective(std::span<const double> parameters, const CircuitSpec& spec,
                 const EncodedDataset& train_set, std::uint64_t shots,
                 const std::optional<NoiseModel>& noise, std::uint64_t seed, int epoch = 1);

struct TrainedModel {
    CircuitSpec spec;
    std::vector<double> parameters;
    std::vector<double> loss_history;  // one sampled mean loss per epoch
    int epochs_used = 0;
};

/// COBYLA training: parameters start uniform in [init_low, init_high], one
/// epoch is one objective evaluation, and the shot count follows the
/// schedule indexed by evaluation number. Returns the best parameters seen.
TrainedModel train(const CircuitSpec& spec, const EncodedDataset& train_set,
                   const TrainConfig& config, const std::optional<NoiseModel>& noise,
                   std::uint64_t seed);

/// Holdout accuracy: per sample the predicted class is the argmax of the
/// class probabilities from `test_shots` draws (ties break to the lowest
/// class index).
double evaluate(const TrainedModel& model, const EncodedDataset& test_set, std::uint64_t test_shots,
                const std::optional<NoiseModel>& noise, std::uint64_t seed);

/// Everything one holdout repetition needs besides the circuit.
struct HoldoutConfig {
    TrainConfig train;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::optional<std::size_t> pca_components;
    EncodingParams encoding;
};

struct HoldoutResult {
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;  // sample standard deviation; 0 when repeats == 1
    std::vector<double> per_run;
};

/// Runs split -> standardize -> optional PCA -> encode -> train -> evaluate
/// `repeats` times with per-repeat seeds derived from base_seed. Evaluation
/// uses the same noise model as training.
HoldoutResult holdout_repeat(const CircuitSpec& spec, const Dataset& dataset, int repeats,
                             const HoldoutConfig& config, const std::optional<NoiseModel>& noise,
                             std::uint64_t base_seed);

}  // namespace vqc

#endif
