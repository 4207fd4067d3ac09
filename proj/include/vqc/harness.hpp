#ifndef VQC_HARNESS_HPP
#define VQC_HARNESS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vqc/circuits.hpp"
#include "vqc/noise.hpp"
#include "vqc/training.hpp"

namespace vqc {

/// Flat key=value sweep configuration. Unknown keys in the file are
/// rejected.
struct SweepConfig {
    std::string dataset;
    std::string data_path;
    int label_column = -1;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::optional<std::size_t> pca_components;
    int qubit_min = 2;
    int qubit_max = 0;
    int num_circuits = 0;
    bool repeat_features = false;
    bool all_pairs = false;
    int repeats = 10;
    int max_epochs = 200;
    std::uint64_t base_seed = 0;
    std::string output_dir = ".";
    std::string output_name = "sweep";
    int workers = 1;

    // Optional T1/T2 grid attached to every circuit (both channels).
    std::optional<int> noise_grid_steps;

    // noise-curve runs: fixed serialized circuits trained at target errors.
    std::optional<NoisyOp> noise_op;
    std::vector<double> noise_targets;
    std::string specs_file;
    int grid_steps = 10;
    std::uint64_t error_shots = 10000;

    // error-surface ranges.
    NoiseGridDefaults ranges;
};

SweepConfig parse_config_file(const std::string& path);
SweepConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");

/// One circuit x noise-point result row of a sweep.
struct ExperimentRecord {
    int circuit_id = 0;
    CircuitSpec spec;
    int noise_index = -1;  // -1 when noiseless
    std::optional<double> noise_t1_ns;
    std::optional<double> noise_t2_ns;
    std::optional<double> cz_error;
    std::optional<double> measure_error;
    HoldoutResult holdout;
    double wall_time_s = 0.0;

    int depth() const { return circuit_depth(spec); }
};

struct SweepOutput {
    std::vector<ExperimentRecord> records;
    std::string csv_path;
    std::string specs_path;
    std::string times_path;
};

/// Samples circuits over the qubit range, runs the holdout pipeline for each
/// (circuit x noise point) and writes one CSV row per record in
/// (circuit_id, noise index) order. Worker count never changes the output
/// bytes; wall times go to a sidecar file so the results CSV is
/// reproducible byte for byte.
SweepOutput run_sweep(const SweepConfig& config);

struct NoiseCurveRecord {
    int circuit_id = 0;
    int depth = 0;
    NoisyOp op = NoisyOp::CZ;
    double target_error = 0.0;
    double estimated_error = 0.0;
    double mean_accuracy = 0.0;
    double std_accuracy = 0.0;
};

struct NoiseCurveOutput {
    std::vector<NoiseCurveRecord> records;
    std::string csv_path;
};

/// Trains previously serialized circuits at each target error of one
/// operation kind. A 0-error baseline row (plain noiseless training) is
/// always included.
NoiseCurveOutput run_noise_curve(const SweepConfig& config);

/// Writes the T1/T2 error surface CSV (columns t1_ns, t2_ns, op_kind,
/// estimated_error) and returns its path.
std::string run_error_surface(const SweepConfig& config);

/// Best mean accuracy per exact depth, keys ascending.
std::vector<std::pair<int, double>> aggregate_best_by_depth(const std::vector<ExperimentRecord>& records);

/// Best mean accuracy per qubit count, keys ascending.
std::vector<std::pair<int, double>> aggregate_best_by_qubits(const std::vector<ExperimentRecord>& records);

/// Group-by over a results CSV file (the run_sweep format); returns
/// "<key>,best_mean_accuracy" rows.
std::vector<std::pair<int, double>> aggregate_csv(const std::string& csv_path, const std::string& by);

}  // namespace vqc

#endif
