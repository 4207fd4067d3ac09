#include "vqc/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vqc {

namespace {

constexpr int kMaxQubits = 12;
constexpr double kInvSqrt2 = 0.70710678118654752440;

void check_qubit(const QuantumState& state, int q) {
    if (q < 0 || q >= state.num_qubits)
        throw std::out_of_range("gate qubit index " + std::to_string(q) + " out of range for " +
                                std::to_string(state.num_qubits) + " qubits");
}

// Rx(pi/2) = (1/sqrt2) [[1, -i], [-i, 1]].
void rx_half_pi_pure(std::vector<cplx>& amp, std::size_t dim, int q) {
    const std::size_t step = std::size_t{1} << q;
    const cplx mi(0.0, -1.0);
    for (std::size_t base = 0; base < dim; base += 2 * step) {
        for (std::size_t i = base; i < base + step; ++i) {
            const cplx a = amp[i];
            const cplx b = amp[i + step];
            amp[i] = (a + mi * b) * kInvSqrt2;
            amp[i + step] = (mi * a + b) * kInvSqrt2;
        }
    }
}

void rz_pure(std::vector<cplx>& amp, std::size_t dim, int q, double angle) {
    const cplx p0 = std::polar(1.0, -0.5 * angle);
    const cplx p1 = std::polar(1.0, 0.5 * angle);
    const std::size_t mask = std::size_t{1} << q;
    for (std::size_t i = 0; i < dim; ++i) amp[i] *= (i & mask) ? p1 : p0;
}

void cz_pure(std::vector<cplx>& amp, std::size_t dim, int a, int b) {
    const std::size_t mask = (std::size_t{1} << a) | (std::size_t{1} << b);
    for (std::size_t i = 0; i < dim; ++i)
        if ((i & mask) == mask) amp[i] = -amp[i];
}

// rho -> U rho U-dagger for the 2x2 unitary u acting on qubit q.
void one_qubit_mixed(QuantumState& s, int q, const cplx u[2][2]) {
    const std::size_t dim = s.dim();
    const std::size_t step = std::size_t{1} << q;
    // Left multiply by U: mixes row pairs within each column.
    for (std::size_t rb = 0; rb < dim; rb += 2 * step) {
        for (std::size_t r = rb; r < rb + step; ++r) {
            cplx* row0 = &s.data[r * dim];
            cplx* row1 = &s.data[(r + step) * dim];
            for (std::size_t c = 0; c < dim; ++c) {
                const cplx x = row0[c];
                const cplx y = row1[c];
                row0[c] = u[0][0] * x + u[0][1] * y;
                row1[c] = u[1][0] * x + u[1][1] * y;
            }
        }
    }
    // Right multiply by U-dagger: mixes column pairs within each row.
    const cplx c00 = std::conj(u[0][0]), c01 = std::conj(u[0][1]);
    const cplx c10 = std::conj(u[1][0]), c11 = std::conj(u[1][1]);
    for (std::size_t r = 0; r < dim; ++r) {
        cplx* row = &s.data[r * dim];
        for (std::size_t cb = 0; cb < dim; cb += 2 * step) {
            for (std::size_t c = cb; c < cb + step; ++c) {
                const cplx x = row[c];
                const cplx y = row[c + step];
                row[c] = x * c00 + y * c01;
                row[c + step] = x * c10 + y * c11;
            }
        }
    }
}

void cz_mixed(QuantumState& s, int a, int b) {
    const std::size_t dim = s.dim();
    const std::size_t mask = (std::size_t{1} << a) | (std::size_t{1} << b);
    for (std::size_t r = 0; r < dim; ++r) {
        const bool rs = (r & mask) == mask;
        cplx* row = &s.data[r * dim];
        for (std::size_t c = 0; c < dim; ++c) {
            if (rs != ((c & mask) == mask)) row[c] = -row[c];
        }
    }
}

void rz_mixed(QuantumState& s, int q, double angle) {
    const std::size_t dim = s.dim();
    const std::size_t mask = std::size_t{1} << q;
    const cplx p0 = std::polar(1.0, -0.5 * angle);
    const cplx p1 = std::polar(1.0, 0.5 * angle);
    for (std::size_t r = 0; r < dim; ++r) {
        const cplx pr = (r & mask) ? p1 : p0;
        cplx* row = &s.data[r * dim];
        for (std::size_t c = 0; c < dim; ++c) row[c] = pr * row[c] * std::conj((c & mask) ? p1 : p0);
    }
}

// Thermal relaxation on qubit q, viewed blockwise on the full density
// matrix: the qubit's excited block decays into the ground block with
// factor e^{-t/T1}, coherence blocks shrink by e^{-t/T2}. Real scale
// factors keep Hermiticity exact.
void relax_mixed(QuantumState& s, const GateOp& g) {
    if (!(g.t1_ns > 0.0) || !(g.t2_ns > 0.0) || g.t2_ns > 2.0 * g.t1_ns)
        throw std::invalid_argument("Relax requires 0 < t1 and 0 < t2 <= 2*t1");
    if (g.duration_ns < 0.0) throw std::invalid_argument("Relax duration must be >= 0");
    const double e1 = std::exp(-g.duration_ns / g.t1_ns);
    const double e2 = std::exp(-g.duration_ns / g.t2_ns);
    const std::size_t dim = s.dim();
    const std::size_t m = std::size_t{1} << g.q0;
    for (std::size_t r = 0; r < dim; ++r) {
        const bool r1 = (r & m) != 0;
        cplx* row = &s.data[r * dim];
        for (std::size_t c = 0; c < dim; ++c) {
            const bool c1 = (c & m) != 0;
            if (r1 && c1) {
                // Move population before scaling the excited block.
                s.data[(r ^ m) * dim + (c ^ m)] += (1.0 - e1) * row[c];
                row[c] *= e1;
            } else if (r1 != c1) {
                row[c] *= e2;
            }
        }
    }
}

}  // namespace

QuantumState zero_state(int num_qubits, bool noisy) {
    if (num_qubits < 1 || num_qubits > kMaxQubits)
        throw std::invalid_argument("num_qubits must be in [1, " + std::to_string(kMaxQubits) +
                                    "], got " + std::to_string(num_qubits));
    QuantumState s;
    s.num_qubits = num_qubits;
    s.mixed = noisy;
    const std::size_t dim = s.dim();
    s.data.assign(noisy ? dim * dim : dim, cplx{0.0, 0.0});
    s.data[0] = cplx{1.0, 0.0};
    return s;
}

void apply_gate_inplace(QuantumState& state, const GateOp& gate) {
    switch (gate.kind) {
        case GateOp::Kind::RxHalfPi: {
            check_qubit(state, gate.q0);
            if (!state.mixed) {
                rx_half_pi_pure(state.data, state.dim(), gate.q0);
            } else {
                const cplx mi(0.0, -1.0);
                const cplx u[2][2] = {{kInvSqrt2, mi * kInvSqrt2}, {mi * kInvSqrt2, kInvSqrt2}};
                one_qubit_mixed(state, gate.q0, u);
            }
            return;
        }
        case GateOp::Kind::Rz: {
            check_qubit(state, gate.q0);
            if (!state.mixed)
                rz_pure(state.data, state.dim(), gate.q0, gate.angle);
            else
                rz_mixed(state, gate.q0, gate.angle);
            return;
        }
        case GateOp::Kind::CZ: {
            check_qubit(state, gate.q0);
            check_qubit(state, gate.q1);
            if (gate.q0 == gate.q1) throw std::invalid_argument("CZ control equals target");
            if (!state.mixed)
                cz_pure(state.data, state.dim(), gate.q0, gate.q1);
            else
                cz_mixed(state, gate.q0, gate.q1);
            return;
        }
        case GateOp::Kind::Relax: {
            check_qubit(state, gate.q0);
            if (!state.mixed)
                throw std::logic_error("Relax channel is defined on density matrices only");
            relax_mixed(state, gate);
            return;
        }
        case GateOp::Kind::MeasureAll:
            return;  // sampling is a separate step
    }
    throw std::logic_error("unknown gate kind");
}

QuantumState apply_gate(QuantumState state, const GateOp& gate) {
    apply_gate_inplace(state, gate);
    return state;
}

QuantumState run_gates(std::span<const GateOp> gates, int num_qubits, bool noisy) {
    QuantumState s = zero_state(num_qubits, noisy);
    for (const GateOp& g : gates) apply_gate_inplace(s, g);
    return s;
}

std::vector<double> exact_probabilities(const QuantumState& state) {
    const std::size_t dim = state.dim();
    std::vector<double> p(dim);
    if (!state.mixed) {
        for (std::size_t i = 0; i < dim; ++i) p[i] = std::norm(state.data[i]);
    } else {
        for (std::size_t i = 0; i < dim; ++i) p[i] = state.data[i * dim + i].real();
    }
    for (double& v : p) v = std::clamp(v, 0.0, 1.0);
    return p;
}

std::vector<std::uint64_t> sample_counts(const QuantumState& state, std::uint64_t shots, Rng& rng) {
    if (shots < 1) throw std::invalid_argument("shots must be >= 1");
    const std::vector<double> p = exact_probabilities(state);
    std::vector<double> cdf(p.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        cdf[i] = acc;
    }
    std::vector<std::uint64_t> counts(p.size(), 0);
    for (std::uint64_t s = 0; s < shots; ++s) {
        const double u = rng.uniform_double() * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        std::size_t idx = static_cast<std::size_t>(it - cdf.begin());
        if (idx >= counts.size()) idx = counts.size() - 1;
        ++counts[idx];
    }
    return counts;
}

}  // namespace vqc
