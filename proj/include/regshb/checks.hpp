#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regshb/operators.hpp"
#include "regshb/penalty.hpp"
#include "regshb/solver.hpp"

namespace regshb {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Discrete H1_0 inner product <u,v> + <grad u, grad v> on an n x n grid,
// differences taken across all edges including those to the zero boundary.
double h1_inner(std::span<const double> u, std::span<const double> v, std::size_t n);

// Asserts the per-step descent inequality, monotonicity of the Bregman
// distance to x_dagger, gating soundness and the gamma~ dominance along one
// run. Returns the number of violated steps (0 when everything held).
struct DescentCheckStats {
    std::size_t steps = 0;
    std::size_t descent_violations = 0;
    std::size_t monotonicity_violations = 0;
    std::size_t gate_violations = 0;
    std::size_t gamma_violations = 0;
    bool stopped_by_rule = false;
    bool discrepancy_ok = false;
};
// exact_prox = false (TV penalty) skips the subgradient-exactness-dependent
// gamma/gate drift checks and is meant to be paired with slack 1e-3.
DescentCheckStats run_descent_check(const ForwardSystem& sys, const Penalty& pen,
                                    const SolverConfig& cfg, RunMode mode,
                                    std::span<const double> x_dagger, double slack_scale = 1e-10,
                                    bool exact_prox = true);

// Global minimizer of the short 1D TV denoising objective on a refined value
// lattice (dynamic program); brute-force oracle for the PDHG prox.
std::vector<double> tv1d_lattice_minimizer(std::span<const double> target, double lambda);

// Full invariant suite used by the `check` subcommand.
std::vector<CheckResult> run_all_checks(std::uint64_t seed);

}  // namespace regshb
