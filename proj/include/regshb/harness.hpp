#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "regshb/operators.hpp"
#include "regshb/penalty.hpp"
#include "regshb/solver.hpp"

namespace regshb {

struct FredholmSpec {
    std::size_t n = 300;
};
struct TomoSpec {
    std::size_t grid_n = 128;
    std::size_t n_angles = 45;
    std::size_t n_rays = 360;
    bool modified_phantom = false;
};
struct SchlierenSpec {
    std::size_t grid_n = 110;
    std::size_t n_dirs = 60;
    double eta = 0.01;
};
using ProblemSpec = std::variant<FredholmSpec, TomoSpec, SchlierenSpec>;

struct PenaltySpec {
    PenaltyKind kind = PenaltyKind::ConstrainedQuadratic;
    double lambda = 1.0;
};

struct NamedSolver {
    std::string name;
    RunMode mode = RunMode::NoisyShb;
    SolverConfig cfg;
};

struct ExperimentSpec {
    std::string problem_name;
    ProblemSpec problem;
    PenaltySpec penalty;
    NoiseModel noise_model = NoiseModel::UniformSup;
    std::vector<double> levels;
    std::vector<NamedSolver> solvers;
    std::size_t trials = 1;
    std::uint64_t base_seed = 0;
    bool redraw_noise = true;  // fresh noise per trial; false fixes one draw
    double xi0 = 0.0;          // constant initial dual iterate
};

std::size_t problem_block_count(const ProblemSpec& p);
Problem build_problem(const ProblemSpec& p);
Penalty make_penalty(const PenaltySpec& p, const GridShape& domain);
void validate_experiment(const ExperimentSpec& spec);

// ||x - x_dagger||^2 / ||x_dagger||^2
double relative_error(std::span<const double> x, std::span<const double> x_dagger);

struct BoxplotSummary {
    double median = 0, q25 = 0, q75 = 0, whisker_lo = 0, whisker_hi = 0;
    std::vector<double> outliers;
};

// Quartiles by linear interpolation (inclusive method); whiskers reach the
// most extreme samples within 1.5*IQR of the box.
BoxplotSummary boxplot_stats(std::vector<double> samples);

struct TrialSample {
    double error = 0.0;
    std::size_t n_delta = 0;
    bool safeguard = false;
    double wall_s = 0.0;
};

struct TrialStats {
    std::string solver;
    double level = 0.0;
    double mean_iter = 0.0;  // over trials that stopped by rule
    double mean_wall = 0.0;
    double mean_error = 0.0;  // over all trials
    std::size_t safeguard_count = 0;
    std::vector<TrialSample> samples;
};

struct BenchResult {
    std::vector<TrialStats> stats;          // solver-major, then level
    std::size_t stopping_violations = 0;    // discrepancy re-checks that failed
};

// Runs trials x levels x solvers. Trial k at level index l draws its noise
// from Rng::stream(base_seed, l * 1000003 + k); solver c then runs with seed
// mix(stream_seed + c). Deterministic for a fixed base_seed regardless of
// worker count. Every rule-stopped trial is re-checked against the full
// discrepancy principle.
BenchResult monte_carlo(const ExperimentSpec& spec, std::size_t workers = 1);

// True when all residuals of x satisfy ||F_i(x) - y_i^d|| <= tau * delta_i.
bool discrepancy_satisfied(const ForwardSystem& sys, std::span<const double> x, double tau);

}  // namespace regshb
