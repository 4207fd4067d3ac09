#ifndef VQC_CIRCUITS_HPP
#define VQC_CIRCUITS_HPP

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vqc/simulator.hpp"

namespace vqc {

/// One rotation slot: the Rz angle of a basic block is either a dataset
/// feature or a trainable parameter.
struct SlotRef {
    enum class Kind { Feature, Parameter };
    Kind kind = Kind::Parameter;
    int index = 0;

    friend bool operator==(const SlotRef&, const SlotRef&) = default;
};

/// A row of basic blocks, one per qubit. A feature layer may carry parameter
/// slots as padding when the feature count is not a multiple of the width.
struct RotationLayer {
    enum class Kind { Feature, Parameter };
    Kind kind = Kind::Parameter;
    std::vector<SlotRef> slots;  // exactly num_qubits entries

    friend bool operator==(const RotationLayer&, const RotationLayer&) = default;
};

/// CZ gates inserted between two rotation layers. Pairs are stored with the
/// smaller qubit first and are unique within the layer.
struct EntanglerLayer {
    std::vector<std::pair<int, int>> pairs;

    friend bool operator==(const EntanglerLayer&, const EntanglerLayer&) = default;
};

/// A sampled circuit design: rotation layers alternating feature/parameter
/// kind with an entangler layer between each adjacent pair, ending on a
/// rotation layer, then measurement of every qubit.
struct CircuitSpec {
    int num_qubits = 0;
    std::vector<RotationLayer> rotation_layers;
    std::vector<EntanglerLayer> entangler_layers;  // size = rotation_layers.size() - 1
    int num_features = 0;
    int num_parameters = 0;
    bool repeat_features = false;
    std::uint64_t seed = 0;

    int num_cz_gates() const;

    friend bool operator==(const CircuitSpec&, const CircuitSpec&) = default;
};

/// Throws std::invalid_argument when any CircuitSpec invariant is broken
/// (slot counts, alternation, feature coverage, entangler pair rules).
void validate(const CircuitSpec& spec);

/// Draws one circuit from the design space: ceil(F_eff/Q) feature layers
/// with features assigned row-major and fresh parameters as padding, a
/// parameter layer between consecutive feature layers, leading/trailing
/// parameter layers each with probability 1/2, and an entangler layer after
/// every rotation layer but the last. Entangler size is uniform on
/// {1..min(3, C(Q,2))}, or every pair when all_pairs is set. Deterministic
/// per seed.
CircuitSpec sample_circuit(int num_qubits, int num_features, bool repeat_features, bool all_pairs,
                           std::uint64_t seed);

/// The canonical minimal circuit: one feature layer, one trailing parameter
/// layer, a single CZ on qubits (0, 1) between them. For Q = F = 4 its depth
/// is 8.
CircuitSpec minimal_circuit(int num_qubits, int num_features);

/// Length of the critical path through the gate dependency DAG: every
/// rotation of a basic block, every CZ, and the terminal per-qubit
/// measurement cost one step; gates on disjoint qubits run concurrently.
int circuit_depth(const CircuitSpec& spec);

/// ceil(num_features / num_qubits), the lower bound on feature layers.
int min_feature_layers(int num_features, int num_qubits);

/// Expands the spec into an executable gate list. Every slot becomes
/// RxHalfPi, Rz(bound value), RxHalfPi; entangler layers become CZ gates;
/// MeasureAll ends the list. Feature slots look up encoded_features by
/// feature index, so a repeated feature reuses its encoded value.
std::vector<GateOp> bind(const CircuitSpec& spec, std::span<const double> encoded_features,
                         std::span<const double> parameters);

/// Single-line serialization with stable field order; round-trips through
/// spec_from_string. Contains no commas, so it embeds in CSV unquoted.
std::string spec_to_string(const CircuitSpec& spec);
CircuitSpec spec_from_string(std::string_view text);

}  // namespace vqc

#endif
