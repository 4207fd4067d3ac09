#ifndef VQC_SIMULATOR_HPP
#define VQC_SIMULATOR_HPP

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "vqc/rng.hpp"

namespace vqc {

using cplx = std::complex<double>;

/// Dense state of an n-qubit register. Pure states hold 2^n amplitudes,
/// mixed states a row-major 2^n x 2^n density matrix. Qubit 0 is the least
/// significant bit of a computational-basis index.
struct QuantumState {
    int num_qubits = 0;
    bool mixed = false;
    // Pure: size 2^n. Mixed: size 4^n, entry (r, c) at r * 2^n + c.
    std::vector<cplx> data;

    std::size_t dim() const { return std::size_t{1} << num_qubits; }
    cplx& rho(std::size_t r, std::size_t c) { return data[r * dim() + c]; }
    const cplx& rho(std::size_t r, std::size_t c) const { return data[r * dim() + c]; }
};

/// One instruction of the simulator's gate set. `MeasureAll` terminates a
/// circuit and is a no-op on the state itself; sampling happens separately.
struct GateOp {
    enum class Kind { RxHalfPi, Rz, CZ, Relax, MeasureAll };

    Kind kind = Kind::MeasureAll;
    int q0 = 0;          // target qubit (control for CZ)
    int q1 = 0;          // second qubit of CZ
    double angle = 0.0;  // Rz rotation angle, radians
    double t1_ns = 0.0;  // Relax channel times
    double t2_ns = 0.0;
    double duration_ns = 0.0;

    static GateOp rx_half_pi(int q) { return {Kind::RxHalfPi, q, 0, 0, 0, 0, 0}; }
    static GateOp rz(int q, double angle) { return {Kind::Rz, q, 0, angle, 0, 0, 0}; }
    static GateOp cz(int a, int b) { return {Kind::CZ, a, b, 0, 0, 0, 0}; }
    static GateOp relax(int q, double t1_ns, double t2_ns, double duration_ns) {
        return {Kind::Relax, q, 0, 0, t1_ns, t2_ns, duration_ns};
    }
    static GateOp measure_all() { return {Kind::MeasureAll, 0, 0, 0, 0, 0, 0}; }
};

/// |0...0> as a statevector (noisy=false) or density matrix (noisy=true).
/// num_qubits outside [1, 12] is rejected as a resource error.
QuantumState zero_state(int num_qubits, bool noisy);

/// Applies `gate` in place. Relax is defined on mixed states only; unitaries
/// act as U rho U-dagger on mixed states.
void apply_gate_inplace(QuantumState& state, const GateOp& gate);

/// Value-returning variant of apply_gate_inplace.
QuantumState apply_gate(QuantumState state, const GateOp& gate);

/// Runs a gate list on a fresh |0...0> register.
QuantumState run_gates(std::span<const GateOp> gates, int num_qubits, bool noisy);

/// Per-basis-state outcome probabilities: |amplitude|^2 for pure states, the
/// real diagonal for mixed ones. Entries are clamped to [0, 1].
std::vector<double> exact_probabilities(const QuantumState& state);

/// Multinomial sample of `shots` measurement outcomes; counts[i] is the
/// number of shots that landed on basis state i.
std::vector<std::uint64_t> sample_counts(const QuantumState& state, std::uint64_t shots, Rng& rng);

}  // namespace vqc

#endif
