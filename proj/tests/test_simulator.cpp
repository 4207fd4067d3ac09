#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "vqc/simulator.hpp"

using namespace vqc;

namespace {

double total_trace(const QuantumState& s) {
    double tr = 0.0;
    for (std::size_t i = 0; i < s.dim(); ++i) tr += s.rho(i, i).real();
    return tr;
}

double pure_norm(const QuantumState& s) {
    double n = 0.0;
    for (const auto& a : s.data) n += std::norm(a);
    return std::sqrt(n);
}

double max_distance(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
    return d;
}

}  // namespace

TEST_CASE("zero_state layouts") {
    const auto pure1 = zero_state(1, false);
    REQUIRE(pure1.data.size() == 2);
    CHECK(pure1.data[0] == cplx{1.0, 0.0});
    CHECK(pure1.data[1] == cplx{0.0, 0.0});

    const auto mixed2 = zero_state(2, true);
    REQUIRE(mixed2.data.size() == 16);
    CHECK(mixed2.rho(0, 0) == cplx{1.0, 0.0});
    for (std::size_t i = 1; i < 16; ++i) CHECK(mixed2.data[i] == cplx{0.0, 0.0});

    const auto pure3 = zero_state(3, false);
    REQUIRE(pure3.data.size() == 8);
    CHECK(pure3.data[0].real() == 1.0);

    CHECK_THROWS_AS(zero_state(0, false), std::invalid_argument);
    CHECK_THROWS_AS(zero_state(13, false), std::invalid_argument);
}

TEST_CASE("two RxHalfPi gates act as Rx(pi), checked against a 2x2 matrix oracle") {
    // Oracle: multiply the matrices by hand and apply to |0>.
    const auto m = oracles::matmul2(oracles::rx_half_pi(), oracles::rx_half_pi());
    const double p1_oracle = std::norm(m[1][0]);
    CHECK(p1_oracle == doctest::Approx(1.0).epsilon(1e-12));

    QuantumState s = zero_state(1, false);
    apply_gate_inplace(s, GateOp::rx_half_pi(0));
    apply_gate_inplace(s, GateOp::rx_half_pi(0));
    const auto probs = exact_probabilities(s);
    CHECK(std::fabs(probs[1] - 1.0) < 1e-10);
    CHECK(std::fabs(probs[1] - p1_oracle) < 1e-12);
}

TEST_CASE("CZ leaves (|0>+|1>)|0> unchanged") {
    QuantumState s;
    s.num_qubits = 2;
    s.mixed = false;
    const double r = 1.0 / std::sqrt(2.0);
    s.data = {cplx{r, 0}, cplx{r, 0}, cplx{0, 0}, cplx{0, 0}};
    const auto before = s.data;
    apply_gate_inplace(s, GateOp::cz(0, 1));
    for (std::size_t i = 0; i < 4; ++i) CHECK(s.data[i] == before[i]);
}

TEST_CASE("full relaxation limit lands on |0><0|") {
    Rng rng(11);
    QuantumState s = oracles::random_density_matrix(rng, 1);
    apply_gate_inplace(s, GateOp::relax(0, 1000.0, 2000.0, 1e12));
    CHECK(std::fabs(s.rho(0, 0).real() - 1.0) < 1e-9);
    CHECK(std::abs(s.rho(1, 1)) < 1e-9);
    CHECK(std::abs(s.rho(0, 1)) < 1e-9);
}

TEST_CASE("exact_probabilities basic reads") {
    QuantumState pure;
    pure.num_qubits = 1;
    pure.data = {cplx{1, 0}, cplx{0, 0}};
    CHECK(exact_probabilities(pure) == std::vector<double>{1.0, 0.0});

    const double r = 1.0 / std::sqrt(2.0);
    pure.data = {cplx{r, 0}, cplx{0, -r}};
    const auto p = exact_probabilities(pure);
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-12));

    QuantumState mixed;
    mixed.num_qubits = 1;
    mixed.mixed = true;
    mixed.data = {cplx{0.3, 0}, cplx{0, 0}, cplx{0, 0}, cplx{0.7, 0}};
    const auto pm = exact_probabilities(mixed);
    CHECK(pm[0] == doctest::Approx(0.3));
    CHECK(pm[1] == doctest::Approx(0.7));
}

TEST_CASE("sample_counts: deterministic outcome, binomial bound, seed reproducibility") {
    QuantumState basis = zero_state(1, false);
    Rng rng(3);
    const auto counts = sample_counts(basis, 300, rng);
    CHECK(counts[0] == 300);
    CHECK(counts[1] == 0);

    QuantumState plus;
    plus.num_qubits = 1;
    const double r = 1.0 / std::sqrt(2.0);
    plus.data = {cplx{r, 0}, cplx{r, 0}};
    const std::uint64_t shots = 100000;
    Rng rng7(7);
    const auto c = sample_counts(plus, shots, rng7);
    CHECK(c[0] + c[1] == shots);
    const double sigma = std::sqrt(0.25 * static_cast<double>(shots));
    CHECK(std::fabs(static_cast<double>(c[0]) - 0.5 * static_cast<double>(shots)) <= 3.0 * sigma);

    Rng rng7a(7), rng7b(7);
    CHECK(sample_counts(plus, 1234, rng7a) == sample_counts(plus, 1234, rng7b));
}

TEST_CASE("unitaries preserve norm and trace") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform_int(3));
        const auto gates = oracles::random_gate_list(rng, n, 30);
        const auto pure = run_gates(gates, n, false);
        CHECK(std::fabs(pure_norm(pure) - 1.0) < 1e-10);
        const auto mixed = run_gates(gates, n, true);
        CHECK(std::fabs(total_trace(mixed) - 1.0) < 1e-10);
    }
}

TEST_CASE("relax preserves trace and exact Hermiticity") {
    Rng rng(22);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform_int(3));
        QuantumState s = oracles::random_density_matrix(rng, n);
        const double t1 = rng.uniform_real(100.0, 50000.0);
        const double t2 = rng.uniform_real(0.1, 2.0) * t1;
        const int q = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
        const double tr_before = total_trace(s);
        apply_gate_inplace(s, GateOp::relax(q, t1, t2, rng.uniform_real(0.0, 5000.0)));
        CHECK(std::fabs(total_trace(s) - tr_before) < 1e-10);
        for (std::size_t r = 0; r < s.dim(); ++r)
            for (std::size_t c = r; c < s.dim(); ++c)
                CHECK(s.rho(r, c) == std::conj(s.rho(c, r)));
    }
}

TEST_CASE("pure and mixed runs agree on noiseless circuits") {
    Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform_int(4));
        const auto gates = oracles::random_gate_list(rng, n, 40);
        const auto p_pure = exact_probabilities(run_gates(gates, n, false));
        const auto p_mixed = exact_probabilities(run_gates(gates, n, true));
        CHECK(max_distance(p_pure, p_mixed) < 1e-9);
    }
}

TEST_CASE("CZ is self-inverse and Rz(theta) Rz(-theta) is the identity") {
    Rng rng(24);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_int(2));
        const auto gates = oracles::random_gate_list(rng, n, 25);
        QuantumState s = run_gates(gates, n, false);
        const auto reference = s.data;

        apply_gate_inplace(s, GateOp::cz(0, 1));
        apply_gate_inplace(s, GateOp::cz(0, 1));
        for (std::size_t i = 0; i < reference.size(); ++i)
            CHECK(std::abs(s.data[i] - reference[i]) < 1e-10);

        const double theta = rng.uniform_real(-3.0, 3.0);
        apply_gate_inplace(s, GateOp::rz(0, theta));
        apply_gate_inplace(s, GateOp::rz(0, -theta));
        for (std::size_t i = 0; i < reference.size(); ++i)
            CHECK(std::abs(s.data[i] - reference[i]) < 1e-10);
    }
}

TEST_CASE("relax with infinite times or zero duration is the identity channel") {
    Rng rng(25);
    QuantumState s = oracles::random_density_matrix(rng, 2);
    const auto reference = s.data;
    const double inf = std::numeric_limits<double>::infinity();
    apply_gate_inplace(s, GateOp::relax(0, inf, inf, 500.0));
    apply_gate_inplace(s, GateOp::relax(1, 700.0, 900.0, 0.0));
    for (std::size_t i = 0; i < reference.size(); ++i)
        CHECK(std::abs(s.data[i] - reference[i]) < 1e-12);
}

TEST_CASE("error paths: relax on pure state, bad indices, CPTP violation") {
    QuantumState pure = zero_state(2, false);
    CHECK_THROWS_AS(apply_gate_inplace(pure, GateOp::relax(0, 100, 100, 10)), std::logic_error);
    CHECK_THROWS_AS(apply_gate_inplace(pure, GateOp::rz(5, 0.1)), std::out_of_range);
    CHECK_THROWS_AS(apply_gate_inplace(pure, GateOp::cz(0, 0)), std::invalid_argument);

    QuantumState mixed = zero_state(1, true);
    CHECK_THROWS_AS(apply_gate_inplace(mixed, GateOp::relax(0, 100, 300, 10)), std::invalid_argument);
    CHECK_THROWS_AS(apply_gate_inplace(mixed, GateOp::relax(0, 0, 0, 10)), std::invalid_argument);
}

TEST_CASE("noisy circuit density matrices stay positive semidefinite (n <= 4)") {
    Rng rng(26);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform_int(4));
        auto gates = oracles::random_gate_list(rng, n, 30);
        // Sprinkle relaxations through the list.
        std::vector<GateOp> noisy;
        for (const auto& g : gates) {
            noisy.push_back(g);
            if (rng.bernoulli(0.3)) {
                const double t1 = rng.uniform_real(100.0, 10000.0);
                noisy.push_back(GateOp::relax(static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n))),
                                              t1, rng.uniform_real(0.2, 2.0) * t1,
                                              rng.uniform_real(0.0, 2000.0)));
            }
        }
        const QuantumState s = run_gates(noisy, n, true);
        const auto dim = static_cast<Eigen::Index>(s.dim());
        Eigen::MatrixXcd rho(dim, dim);
        for (Eigen::Index r = 0; r < dim; ++r)
            for (Eigen::Index c = 0; c < dim; ++c)
                rho(r, c) = s.rho(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
        CHECK((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(rho);
        CHECK(eig.eigenvalues().minCoeff() > -1e-9);
    }
}
