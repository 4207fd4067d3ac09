#include "vqc/training.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vqc/cobyla.hpp"
#include "vqc/rng.hpp"

namespace vqc {

void validate(const OutputMapping& mapping) {
    if (mapping.num_qubits < 1 || mapping.num_qubits > 12)
        throw std::invalid_argument("OutputMapping: num_qubits out of range");
    if (mapping.num_classes < 1) throw std::invalid_argument("OutputMapping: num_classes must be >= 1");
    if ((std::size_t{1} << mapping.num_qubits) < static_cast<std::size_t>(mapping.num_classes))
        throw std::invalid_argument("OutputMapping: 2^n must be >= num_classes");
}

std::vector<double> class_probabilities(std::span<const double> distribution,
                                        const OutputMapping& mapping) {
    validate(mapping);
    const std::size_t k = static_cast<std::size_t>(mapping.num_classes);
    const std::size_t block = mapping.block_size();
    if (distribution.size() != (std::size_t{1} << mapping.num_qubits))
        throw std::invalid_argument("class_probabilities: distribution size != 2^n");
    std::vector<double> p(k, 0.0);
    for (std::size_t cls = 0; cls < k; ++cls)
        for (std::size_t b = cls * block; b < (cls + 1) * block; ++b) p[cls] += distribution[b];
    double total = 0.0;
    for (double v : p) total += v;
    if (total <= 0.0) {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(k));
        return p;
    }
    for (double& v : p) v /= total;
    return p;
}

std::vector<double> class_probabilities(std::span<const std::uint64_t> counts,
                                        const OutputMapping& mapping) {
    std::vector<double> dist(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) dist[i] = static_cast<double>(counts[i]);
    return class_probabilities(std::span<const double>(dist), mapping);
}

double nll_loss(std::span<const double> class_probs, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= class_probs.size())
        throw std::invalid_argument("nll_loss: label out of range");
    double mx = class_probs[0];
    for (double v : class_probs) mx = std::max(mx, v);
    double sum = 0.0;
    for (double v : class_probs) sum += std::exp(v - mx);
    return std::log(sum) + mx - class_probs[static_cast<std::size_t>(label)];
}

EncodedDataset encode_dataset(const Dataset& data, const EncodingParams& params) {
    EncodedDataset out;
    out.num_features = data.num_features;
    out.labels = data.labels;
    out.num_classes = data.num_classes;
    out.angles = encode_features(data, params);
    return out;
}

namespace {

// One sample's executable circuit with the trainable Rz angles indexed for
// in-place patching, so an optimizer evaluation does not rebuild gate lists.
struct SampleCircuit {
    std::vector<GateOp> gates;
    std::vector<std::pair<std::size_t, int>> param_patches;  // gate index -> parameter index
    bool noisy = false;
};

SampleCircuit prepare_sample(const CircuitSpec& spec, std::span<const double> encoded_row,
                             const std::optional<NoiseModel>& noise) {
    // Parameter slots in spec scan order; the j-th Rz gate of the bound list
    // corresponds to the j-th slot.
    std::vector<int> slot_param;
    for (const RotationLayer& layer : spec.rotation_layers)
        for (const SlotRef& slot : layer.slots)
            slot_param.push_back(slot.kind == SlotRef::Kind::Parameter ? slot.index : -1);

    const std::vector<double> zeros(static_cast<std::size_t>(spec.num_parameters), 0.0);
    SampleCircuit sc;
    sc.gates = vqc::bind(spec, encoded_row, zeros);
    if (noise) {
        sc.gates = insert_relaxations(sc.gates, spec.num_qubits, *noise);
        sc.noisy = true;
    }
    std::size_t rz_seen = 0;
    for (std::size_t g = 0; g < sc.gates.size(); ++g) {
        if (sc.gates[g].kind != GateOp::Kind::Rz) continue;
        const int pidx = slot_param[rz_seen++];
        if (pidx >= 0) sc.param_patches.emplace_back(g, pidx);
    }
    return sc;
}

std::vector<double> run_and_classify(SampleCircuit& sc, int num_qubits,
                                     std::span<const double> parameters,
                                     const OutputMapping& mapping, std::uint64_t shots, Rng& rng) {
    for (const auto& [gate_idx, param_idx] : sc.param_patches)
        sc.gates[gate_idx].angle = parameters[static_cast<std::size_t>(param_idx)];
    const QuantumState state = run_gates(sc.gates, num_qubits, sc.noisy);
    const auto counts = sample_counts(state, shots, rng);
    return class_probabilities(std::span<const std::uint64_t>(counts), mapping);
}

struct PreparedSet {
    std::vector<SampleCircuit> circuits;
    OutputMapping mapping;
};

PreparedSet prepare_set(const CircuitSpec& spec, const EncodedDataset& set,
                        const std::optional<NoiseModel>& noise) {
    if (set.num_features != static_cast<std::size_t>(spec.num_features))
        throw std::invalid_argument("training: dataset feature count does not match the circuit");
    PreparedSet prep;
    prep.mapping = OutputMapping{spec.num_qubits, set.num_classes};
    validate(prep.mapping);
    prep.circuits.reserve(set.num_rows());
    for (std::size_t r = 0; r < set.num_rows(); ++r)
        prep.circuits.push_back(prepare_sample(spec, set.row(r), noise));
    return prep;
}

double mean_loss(PreparedSet& prep, const CircuitSpec& spec, const EncodedDataset& set,
                 std::span<const double> parameters, std::uint64_t shots, std::uint64_t seed,
                 int epoch) {
    double total = 0.0;
    for (std::size_t r = 0; r < set.num_rows(); ++r) {
        Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(epoch), r}));
        const auto probs =
            run_and_classify(prep.circuits[r], spec.num_qubits, parameters, prep.mapping, shots, rng);
        total += nll_loss(probs, set.labels[r]);
    }
    return total / static_cast<double>(set.num_rows());
}

}  // namespace

double objective(std::span<const double> parameters, const CircuitSpec& spec,
                 const EncodedDataset& train_set, std::uint64_t shots,
                 const std::optional<NoiseModel>& noise, std::uint64_t seed, int epoch) {
    if (train_set.num_rows() == 0) throw std::invalid_argument("objective: empty training set");
    PreparedSet prep = prepare_set(spec, train_set, noise);
    return mean_loss(prep, spec, train_set, parameters, shots, seed, epoch);
}

TrainedModel train(const CircuitSpec& spec, const EncodedDataset& train_set,
                   const TrainConfig& config, const std::optional<NoiseModel>& noise,
                   std::uint64_t seed) {
    TrainedModel model;
    model.spec = spec;
    if (spec.num_parameters == 0) return model;  // nothing to optimize
    if (config.max_epochs < spec.num_parameters + 2)
        throw std::invalid_argument("train: max_epochs must be >= num_parameters + 2 (" +
                                    std::to_string(spec.num_parameters + 2) + ") for COBYLA");

    Rng init_rng(derive_seed(seed, {0x696e6974}));
    std::vector<double> x0(static_cast<std::size_t>(spec.num_parameters));
    for (double& v : x0) v = init_rng.uniform_real(config.init_low, config.init_high);

    PreparedSet prep = prepare_set(spec, train_set, noise);
    const std::uint64_t objective_seed = derive_seed(seed, {0x6f626a});

    int epoch = 0;
    auto f = [&](std::span<const double> params) -> double {
        ++epoch;
        const std::uint64_t shots = config.shots_for_epoch(epoch);
        const double loss = mean_loss(prep, spec, train_set, params, shots, objective_seed, epoch);
        model.loss_history.push_back(loss);
        return loss;
    };

    const CobylaResult result =
        cobyla_minimize(f, std::move(x0), config.rho_begin, config.tolerance, config.max_epochs);
    model.parameters = result.x;
    model.epochs_used = result.evaluations;
    return model;
}

double evaluate(const TrainedModel& model, const EncodedDataset& test_set, std::uint64_t test_shots,
                const std::optional<NoiseModel>& noise, std::uint64_t seed) {
    if (test_set.num_rows() == 0) throw std::invalid_argument("evaluate: empty test set");
    PreparedSet prep = prepare_set(model.spec, test_set, noise);
    std::size_t correct = 0;
    for (std::size_t r = 0; r < test_set.num_rows(); ++r) {
        Rng rng(derive_seed(seed, {r}));
        const auto probs = run_and_classify(prep.circuits[r], model.spec.num_qubits,
                                            model.parameters, prep.mapping, test_shots, rng);
        // Ties break to the lowest class index.
        const auto it = std::max_element(probs.begin(), probs.end());
        const int predicted = static_cast<int>(it - probs.begin());
        if (predicted == test_set.labels[r]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test_set.num_rows());
}

HoldoutResult holdout_repeat(const CircuitSpec& spec, const Dataset& dataset, int repeats,
                             const HoldoutConfig& config, const std::optional<NoiseModel>& noise,
                             std::uint64_t base_seed) {
    if (repeats < 1) throw std::invalid_argument("holdout_repeat: repeats must be >= 1");
    HoldoutResult result;
    result.per_run.reserve(static_cast<std::size_t>(repeats));

    for (int rep = 0; rep < repeats; ++rep) {
        const std::uint64_t rep_seed = derive_seed(base_seed, {static_cast<std::uint64_t>(rep)});
        auto [train_split, test_split] =
            split(dataset, config.train_size, config.test_size, derive_seed(rep_seed, {1}));
        standardize_fit_apply(train_split, test_split);
        if (config.pca_components) {
            const PcaModel pca = pca_fit(train_split, *config.pca_components);
            train_split = pca_apply(pca, train_split);
            test_split = pca_apply(pca, test_split);
        }
        const EncodedDataset train_enc = encode_dataset(train_split, config.encoding);
        const EncodedDataset test_enc = encode_dataset(test_split, config.encoding);

        const TrainedModel model =
            train(spec, train_enc, config.train, noise, derive_seed(rep_seed, {2}));
        const double acc =
            evaluate(model, test_enc, config.train.test_shots, noise, derive_seed(rep_seed, {3}));
        result.per_run.push_back(acc);
    }

    double sum = 0.0;
    for (double a : result.per_run) sum += a;
    result.mean_accuracy = sum / static_cast<double>(result.per_run.size());
    if (result.per_run.size() > 1) {
        double ss = 0.0;
        for (double a : result.per_run) {
            const double d = a - result.mean_accuracy;
            ss += d * d;
        }
        result.std_accuracy = std::sqrt(ss / static_cast<double>(result.per_run.size() - 1));
    }
    return result;
}

}  // namespace vqc
