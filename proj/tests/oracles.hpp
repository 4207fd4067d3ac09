// Independent reference implementations used only by tests. Everything here
// recomputes expected values by brute force, never through the library path
// it checks.
#ifndef VQC_TESTS_ORACLES_HPP
#define VQC_TESTS_ORACLES_HPP

#include <algorithm>
#include <array>
#include <complex>
#include <cstdlib>
#include <string>
#include <vector>

#include "vqc/circuits.hpp"
#include "vqc/rng.hpp"
#include "vqc/simulator.hpp"

namespace oracles {

using cplx = std::complex<double>;
using Mat2 = std::array<std::array<cplx, 2>, 2>;

inline Mat2 matmul2(const Mat2& a, const Mat2& b) {
    Mat2 r{};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
    return r;
}

inline Mat2 rx_half_pi() {
    const double s = 1.0 / std::sqrt(2.0);
    const cplx mi(0.0, -1.0);
    return {{{cplx{s, 0.0}, mi * s}, {mi * s, cplx{s, 0.0}}}};
}

inline Mat2 rz(double theta) {
    return {{{std::polar(1.0, -theta / 2.0), cplx{0.0, 0.0}},
             {cplx{0.0, 0.0}, std::polar(1.0, theta / 2.0)}}};
}

// Longest path through the explicit gate dependency DAG: nodes are gates
// (plus one measurement node per qubit), edges connect consecutive gates on
// each qubit. Unit weights throughout.
inline int dag_longest_path(const vqc::CircuitSpec& spec) {
    const auto gates = vqc::bind(spec, std::vector<double>(static_cast<std::size_t>(spec.num_features), 0.0),
                                 std::vector<double>(static_cast<std::size_t>(spec.num_parameters), 0.0));
    struct Node {
        std::vector<int> preds;
    };
    std::vector<Node> nodes;
    std::vector<int> last_on_qubit(static_cast<std::size_t>(spec.num_qubits), -1);
    for (const vqc::GateOp& g : gates) {
        if (g.kind == vqc::GateOp::Kind::MeasureAll) {
            for (int q = 0; q < spec.num_qubits; ++q) {
                Node node;
                if (last_on_qubit[static_cast<std::size_t>(q)] >= 0)
                    node.preds.push_back(last_on_qubit[static_cast<std::size_t>(q)]);
                last_on_qubit[static_cast<std::size_t>(q)] = static_cast<int>(nodes.size());
                nodes.push_back(node);
            }
            continue;
        }
        Node node;
        const bool two = g.kind == vqc::GateOp::Kind::CZ;
        for (int q : {g.q0, two ? g.q1 : g.q0}) {
            if (last_on_qubit[static_cast<std::size_t>(q)] >= 0)
                node.preds.push_back(last_on_qubit[static_cast<std::size_t>(q)]);
        }
        const int id = static_cast<int>(nodes.size());
        last_on_qubit[static_cast<std::size_t>(g.q0)] = id;
        if (two) last_on_qubit[static_cast<std::size_t>(g.q1)] = id;
        nodes.push_back(node);
    }
    // Gates were appended in dependency order, so a single forward pass is a
    // valid topological relaxation.
    std::vector<int> dist(nodes.size(), 1);
    int best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (int p : nodes[i].preds) dist[i] = std::max(dist[i], dist[static_cast<std::size_t>(p)] + 1);
        best = std::max(best, dist[i]);
    }
    return best;
}

// Random noiseless gate sequence over n qubits ending in MeasureAll.
inline std::vector<vqc::GateOp> random_gate_list(vqc::Rng& rng, int n, int length) {
    std::vector<vqc::GateOp> gates;
    for (int i = 0; i < length; ++i) {
        const auto pick = rng.uniform_int(n >= 2 ? 3 : 2);
        const int q = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
        if (pick == 0) {
            gates.push_back(vqc::GateOp::rx_half_pi(q));
        } else if (pick == 1) {
            gates.push_back(vqc::GateOp::rz(q, rng.uniform_real(-3.2, 3.2)));
        } else {
            int q2 = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n - 1)));
            if (q2 >= q) ++q2;
            gates.push_back(vqc::GateOp::cz(q, q2));
        }
    }
    gates.push_back(vqc::GateOp::measure_all());
    return gates;
}

// Random density matrix: rho = A A^dagger / tr(A A^dagger).
inline vqc::QuantumState random_density_matrix(vqc::Rng& rng, int n) {
    const std::size_t dim = std::size_t{1} << n;
    std::vector<cplx> a(dim * dim);
    for (auto& v : a) v = cplx{rng.uniform_real(-1.0, 1.0), rng.uniform_real(-1.0, 1.0)};
    vqc::QuantumState s;
    s.num_qubits = n;
    s.mixed = true;
    s.data.assign(dim * dim, cplx{0.0, 0.0});
    for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c) {
            cplx acc{0.0, 0.0};
            for (std::size_t k = 0; k < dim; ++k) acc += a[r * dim + k] * std::conj(a[c * dim + k]);
            s.rho(r, c) = acc;
        }
    double tr = 0.0;
    for (std::size_t i = 0; i < dim; ++i) tr += s.rho(i, i).real();
    for (auto& v : s.data) v /= tr;
    return s;
}

inline std::string data_dir() {
    if (const char* env = std::getenv("VQC_DATA_DIR")) return env;
    return "data";
}

}  // namespace oracles

#endif
