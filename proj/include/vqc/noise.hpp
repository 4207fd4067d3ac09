#ifndef VQC_NOISE_HPP
#define VQC_NOISE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vqc/simulator.hpp"

namespace vqc {

/// Thermal relaxation attached to one operation kind.
struct Relaxation {
    double t1_ns = 0.0;
    double t2_ns = 0.0;
    double duration_ns = 0.0;
};

constexpr double kCzGateDurationNs = 300.0;
constexpr double kMeasureDurationNs = 1000.0;

/// Optional relaxation channels for CZ gates and for the terminal
/// measurement. Present channels must satisfy 0 < t1 and 0 < t2 <= 2*t1.
struct NoiseModel {
    std::optional<Relaxation> cz;
    std::optional<Relaxation> measure;

    static NoiseModel both(double t1_ns, double t2_ns) {
        return {Relaxation{t1_ns, t2_ns, kCzGateDurationNs},
                Relaxation{t1_ns, t2_ns, kMeasureDurationNs}};
    }
    static NoiseModel cz_only(double t1_ns, double t2_ns) {
        return {Relaxation{t1_ns, t2_ns, kCzGateDurationNs}, std::nullopt};
    }
    static NoiseModel measure_only(double t1_ns, double t2_ns) {
        return {std::nullopt, Relaxation{t1_ns, t2_ns, kMeasureDurationNs}};
    }
};

void validate(const NoiseModel& model);

enum class NoisyOp { CZ, Measure };

std::string to_string(NoisyOp op);

/// Rewrites a bound gate list for noisy execution: each CZ is followed by a
/// relaxation on both of its qubits, and MeasureAll is preceded by a
/// relaxation on every qubit. The result must run on a density matrix.
std::vector<GateOp> insert_relaxations(std::span<const GateOp> gates, int num_qubits,
                                       const NoiseModel& model);

struct NoiseGridDefaults {
    double t1_min_ns = 100.0;
    double t1_max_ns = 80000.0;
    double t2_min_ns = 100.0;
    double t2_max_ns = 140000.0;
};

/// Log-spaced steps x steps grid over the T1/T2 ranges, keeping only the
/// CPTP-valid points with t2 <= 2*t1. Each grid model carries both the CZ
/// and the measurement channel.
std::vector<NoiseModel> grid(const NoiseGridDefaults& ranges, int steps);
std::vector<NoiseModel> grid(int steps);

/// Fraction of shots that flip when the given basis state of one qubit goes
/// through the measurement relaxation channel. Exposed for the analytic
/// population-decay checks.
double measure_flip_fraction(int input_bit, const NoiseModel& model, std::uint64_t shots,
                             std::uint64_t seed);

/// Estimates the effective error of one noisy operation by sampling it in
/// isolation: the declared input ensemble goes through the noisy op, the
/// empirical histogram is compared to the ideal output distribution, and the
/// error is the mean over inputs of the mean per-bitstring deviation.
/// Deterministic per seed.
double estimate_error(NoisyOp op, const NoiseModel& model, std::uint64_t shots, std::uint64_t seed);

struct GridErrorEntry {
    NoiseModel model;
    double error = 0.0;
};

/// estimate_error evaluated over a whole grid, in grid order.
std::vector<GridErrorEntry> estimate_errors_on_grid(NoisyOp op, const std::vector<NoiseModel>& models,
                                                    std::uint64_t shots, std::uint64_t seed);

/// Picks the grid model whose estimated error is nearest the target (ties
/// prefer the smaller error) and strips the other operation's channel. A
/// target more than 0.025 outside the achievable [min, max] band is an
/// error that reports the band.
NoiseModel model_for_target_error(NoisyOp op, double target_error,
                                  const std::vector<GridErrorEntry>& estimates);

/// Row of the error-surface CSV.
struct ErrorSurfacePoint {
    double t1_ns = 0.0;
    double t2_ns = 0.0;
    NoisyOp op = NoisyOp::CZ;
    double error = 0.0;
};

/// Full T1/T2 error surface for both operation kinds (grid order, CZ rows
/// before Measure rows).
std::vector<ErrorSurfacePoint> error_surface(const NoiseGridDefaults& ranges, int steps,
                                             std::uint64_t shots, std::uint64_t seed);

}  // namespace vqc

#endif
