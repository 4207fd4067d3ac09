#ifndef VQC_COBYLA_HPP
#define VQC_COBYLA_HPP

#include <functional>
#include <span>
#include <vector>

namespace vqc {

struct CobylaResult {
    std::vector<double> x;         // best point seen
    double f = 0.0;                // objective value at x
    int evaluations = 0;
    bool aborted_nonfinite = false;  // objective returned NaN/inf; best-so-far was kept
};

/// Derivative-free minimization with Powell's COBYLA: linear interpolation
/// models over a nondegenerate simplex of dim+1 points, improved by trust
/// region steps while the radius shrinks from rho_begin to rho_end. Stops
/// when the radius reaches rho_end or after max_evals objective evaluations
/// (max_evals must be at least dim + 2). Returns the best point evaluated,
/// which is never worse than f(x0).
CobylaResult cobyla_minimize(const std::function<double(std::span<const double>)>& objective,
                             std::vector<double> x0, double rho_begin, double rho_end,
                             int max_evals);

namespace detail {

// calcfc(x, con): fill con[0..m) with constraint values (feasible when
// >= 0) and return the objective. Used directly by tests that exercise the
// constrained algorithm.
using CalcFc = std::function<double(std::span<const double>, std::span<double>)>;

// Powell's COBYLA on x (dimension n, m inequality constraints). On return x
// holds the final vertex and maxfun the number of evaluations used.
void cobyla(int n, int m, std::vector<double>& x, double rhobeg, double rhoend, int& maxfun,
            const CalcFc& calcfc);

}  // namespace detail

}  // namespace vqc

#endif
