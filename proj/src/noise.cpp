#include "vqc/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "vqc/rng.hpp"
#include "vqc/text.hpp"

namespace vqc {

namespace {

void validate_channel(const Relaxation& r, const char* what) {
    if (!(r.t1_ns > 0.0) || !(r.t2_ns > 0.0) || r.t2_ns > 2.0 * r.t1_ns)
        throw std::invalid_argument(std::string(what) + " relaxation needs 0 < t1 and 0 < t2 <= 2*t1");
    if (r.duration_ns < 0.0)
        throw std::invalid_argument(std::string(what) + " relaxation duration must be >= 0");
}

}  // namespace

void validate(const NoiseModel& model) {
    if (model.cz) validate_channel(*model.cz, "CZ");
    if (model.measure) validate_channel(*model.measure, "measurement");
}

std::string to_string(NoisyOp op) { return op == NoisyOp::CZ ? "cz" : "measure"; }

std::vector<GateOp> insert_relaxations(std::span<const GateOp> gates, int num_qubits,
                                       const NoiseModel& model) {
    validate(model);
    std::vector<GateOp> out;
    out.reserve(gates.size() * 2);
    for (const GateOp& g : gates) {
        if (g.kind == GateOp::Kind::MeasureAll && model.measure) {
            const Relaxation& r = *model.measure;
            for (int q = 0; q < num_qubits; ++q)
                out.push_back(GateOp::relax(q, r.t1_ns, r.t2_ns, r.duration_ns));
        }
        out.push_back(g);
        if (g.kind == GateOp::Kind::CZ && model.cz) {
            const Relaxation& r = *model.cz;
            const int lo = std::min(g.q0, g.q1);
            const int hi = std::max(g.q0, g.q1);
            out.push_back(GateOp::relax(lo, r.t1_ns, r.t2_ns, r.duration_ns));
            out.push_back(GateOp::relax(hi, r.t1_ns, r.t2_ns, r.duration_ns));
        }
    }
    return out;
}

std::vector<NoiseModel> grid(const NoiseGridDefaults& ranges, int steps) {
    if (steps < 2) throw std::invalid_argument("grid: steps must be >= 2");
    if (!(ranges.t1_min_ns > 0.0) || !(ranges.t2_min_ns > 0.0) ||
        ranges.t1_max_ns < ranges.t1_min_ns || ranges.t2_max_ns < ranges.t2_min_ns)
        throw std::invalid_argument("grid: ranges must be positive and ordered");

    auto log_axis = [steps](double lo, double hi) {
        std::vector<double> v(static_cast<std::size_t>(steps));
        const double llo = std::log(lo), lhi = std::log(hi);
        for (int i = 0; i < steps; ++i)
            v[static_cast<std::size_t>(i)] = std::exp(llo + (lhi - llo) * i / (steps - 1));
        v.front() = lo;
        v.back() = hi;
        return v;
    };
    const auto t1s = log_axis(ranges.t1_min_ns, ranges.t1_max_ns);
    const auto t2s = log_axis(ranges.t2_min_ns, ranges.t2_max_ns);

    std::vector<NoiseModel> models;
    for (double t1 : t1s)
        for (double t2 : t2s)
            if (t2 <= 2.0 * t1) models.push_back(NoiseModel::both(t1, t2));
    if (models.empty()) throw std::runtime_error("grid: no CPTP-valid points after t2 <= 2*t1 filter");
    return models;
}

std::vector<NoiseModel> grid(int steps) { return grid(NoiseGridDefaults{}, steps); }

namespace {

// Mean per-bitstring absolute deviation between an empirical histogram and
// the ideal distribution. For the one-qubit measurement protocol this equals
// the flipped-outcome fraction.
double mean_bin_deviation(const std::vector<std::uint64_t>& counts, const std::vector<double>& ideal,
                          std::uint64_t shots) {
    double acc = 0.0;
    for (std::size_t i = 0; i < ideal.size(); ++i) {
        const double emp = static_cast<double>(counts[i]) / static_cast<double>(shots);
        acc += std::fabs(emp - ideal[i]);
    }
    return acc / static_cast<double>(ideal.size());
}

QuantumState basis_state_1q(int bit) {
    QuantumState s = zero_state(1, true);
    if (bit) {
        s.data.assign(4, cplx{0.0, 0.0});
        s.rho(1, 1) = cplx{1.0, 0.0};
    }
    return s;
}

}  // namespace

double measure_flip_fraction(int input_bit, const NoiseModel& model, std::uint64_t shots,
                             std::uint64_t seed) {
    if (!model.measure) throw std::invalid_argument("measure_flip_fraction: measurement channel absent");
    validate(model);
    QuantumState s = basis_state_1q(input_bit);
    const Relaxation& r = *model.measure;
    apply_gate_inplace(s, GateOp::relax(0, r.t1_ns, r.t2_ns, r.duration_ns));
    Rng rng(seed);
    const auto counts = sample_counts(s, shots, rng);
    const std::size_t flipped = input_bit ? 0 : 1;
    return static_cast<double>(counts[flipped]) / static_cast<double>(shots);
}

double estimate_error(NoisyOp op, const NoiseModel& model, std::uint64_t shots, std::uint64_t seed) {
    validate(model);
    if (shots < 1) throw std::invalid_argument("estimate_error: shots must be >= 1");

    if (op == NoisyOp::Measure) {
        if (!model.measure) throw std::invalid_argument("estimate_error: measurement channel absent");
        const double e0 = measure_flip_fraction(0, model, shots, derive_seed(seed, {0}));
        const double e1 = measure_flip_fraction(1, model, shots, derive_seed(seed, {1}));
        return 0.5 * (e0 + e1);
    }

    if (!model.cz) throw std::invalid_argument("estimate_error: CZ channel absent");
    const Relaxation& r = *model.cz;

    // Input ensemble: the four 2-qubit basis states plus the uniform
    // superposition (|00> + |01> + |10> + |11>) / 2.
    double total = 0.0;
    for (int input = 0; input < 5; ++input) {
        QuantumState noisy = zero_state(2, true);
        QuantumState ideal = zero_state(2, false);
        if (input < 4) {
            if (input != 0) {
                noisy.data.assign(16, cplx{0.0, 0.0});
                noisy.rho(static_cast<std::size_t>(input), static_cast<std::size_t>(input)) =
                    cplx{1.0, 0.0};
                ideal.data.assign(4, cplx{0.0, 0.0});
                ideal.data[static_cast<std::size_t>(input)] = cplx{1.0, 0.0};
            }
        } else {
            for (std::size_t a = 0; a < 4; ++a) {
                ideal.data[a] = cplx{0.5, 0.0};
                for (std::size_t b = 0; b < 4; ++b) noisy.rho(a, b) = cplx{0.25, 0.0};
            }
        }
        apply_gate_inplace(ideal, GateOp::cz(0, 1));
        apply_gate_inplace(noisy, GateOp::cz(0, 1));
        apply_gate_inplace(noisy, GateOp::relax(0, r.t1_ns, r.t2_ns, r.duration_ns));
        apply_gate_inplace(noisy, GateOp::relax(1, r.t1_ns, r.t2_ns, r.duration_ns));

        Rng rng(derive_seed(seed, {2, static_cast<std::uint64_t>(input)}));
        const auto counts = sample_counts(noisy, shots, rng);
        total += mean_bin_deviation(counts, exact_probabilities(ideal), shots);
    }
    return total / 5.0;
}

std::vector<GridErrorEntry> estimate_errors_on_grid(NoisyOp op, const std::vector<NoiseModel>& models,
                                                    std::uint64_t shots, std::uint64_t seed) {
    std::vector<GridErrorEntry> out;
    out.reserve(models.size());
    for (std::size_t i = 0; i < models.size(); ++i)
        out.push_back({models[i], estimate_error(op, models[i], shots, derive_seed(seed, {i}))});
    return out;
}

NoiseModel model_for_target_error(NoisyOp op, double target_error,
                                  const std::vector<GridErrorEntry>& estimates) {
    if (estimates.empty()) throw std::invalid_argument("model_for_target_error: empty grid");
    if (target_error < 0.0) throw std::invalid_argument("model_for_target_error: negative target");

    double lo = estimates.front().error, hi = estimates.front().error;
    std::size_t best = 0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        lo = std::min(lo, estimates[i].error);
        hi = std::max(hi, estimates[i].error);
        const double d = std::fabs(estimates[i].error - target_error);
        const double db = std::fabs(estimates[best].error - target_error);
        if (d < db || (d == db && estimates[i].error < estimates[best].error)) best = i;
    }
    constexpr double kReachSlack = 0.025;
    if (target_error > hi + kReachSlack || target_error < lo - kReachSlack)
        throw std::runtime_error("model_for_target_error: target " + format_double(target_error) +
                                 " outside achievable range [" + format_double(lo) + ", " +
                                 format_double(hi) + "]");
    const NoiseModel& m = estimates[best].model;
    return op == NoisyOp::CZ ? NoiseModel{m.cz, std::nullopt} : NoiseModel{std::nullopt, m.measure};
}

std::vector<ErrorSurfacePoint> error_surface(const NoiseGridDefaults& ranges, int steps,
                                             std::uint64_t shots, std::uint64_t seed) {
    const auto models = grid(ranges, steps);
    std::vector<ErrorSurfacePoint> out;
    out.reserve(models.size() * 2);
    for (NoisyOp op : {NoisyOp::CZ, NoisyOp::Measure}) {
        const auto entries =
            estimate_errors_on_grid(op, models, shots, derive_seed(seed, {op == NoisyOp::CZ ? 0u : 1u}));
        for (const auto& e : entries) {
            const Relaxation& r = op == NoisyOp::CZ ? *e.model.cz : *e.model.measure;
            out.push_back({r.t1_ns, r.t2_ns, op, e.error});
        }
    }
    return out;
}

}  // namespace vqc
