#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "regshb/grid.hpp"

namespace regshb {

enum class PenaltyKind {
    ConstrainedQuadratic,  // (1/2)||x||^2 + indicator of {x >= 0}
    TVQuadratic,           // (1/(2 lambda))||x||^2 + isotropic discrete TV
};

// Settings for the primal-dual hybrid gradient TV denoiser. Step sizes of 0
// mean "choose 1/||grad||", which satisfies primal*dual*||grad||^2 <= 1.
struct PdhgSettings {
    double gap_tol = 1e-3;
    std::size_t max_iters = 100;
    double primal_step = 0.0;
    double dual_step = 0.0;
};

struct PdhgReport {
    std::size_t iters = 0;
    double rel_gap = 0.0;
    bool gap_converged = false;  // false => the iteration cap fired
};

// Isotropic discrete total variation: forward differences, differences at the
// last row/column are zero (replicate boundary).
double tv_isotropic(std::span<const double> x, const GridShape& grid);

// Solves min_z (1/(2 lambda)) ||z - target||^2 + TV(z). Returns the primal
// iterate; optionally reports the exit condition and exposes the final dual
// variable for independent gap evaluation.
std::vector<double> pdhg_tv_denoise(std::span<const double> target, double lambda,
                                    const GridShape& grid, const PdhgSettings& settings,
                                    PdhgReport* report = nullptr,
                                    std::vector<double>* dual_out = nullptr);

// Primal/dual objective values of the TV denoising problem; used for gap
// evaluation inside PDHG and by tests as an independent oracle.
double tv_denoise_primal(std::span<const double> z, std::span<const double> target,
                         double lambda, const GridShape& grid);
double tv_denoise_dual(std::span<const double> p, std::span<const double> target,
                       double lambda, const GridShape& grid);

// Strongly convex penalty Theta with modulus sigma. Instances are immutable
// and safe to share between threads.
class Penalty {
public:
    static Penalty nonneg(GridShape grid);
    static Penalty tv(double lambda, GridShape grid, PdhgSettings settings = {});

    PenaltyKind kind() const { return kind_; }
    double sigma() const { return sigma_; }
    double lambda() const { return lambda_; }
    const GridShape& grid() const { return grid_; }
    const PdhgSettings& pdhg_settings() const { return pdhg_; }

    // Theta(x); returns +infinity for infeasible x (not an exception).
    double value(std::span<const double> x) const;

    // Unique minimizer of Theta(z) - <xi, z>.
    void prox_conjugate(std::span<const double> xi, std::span<double> x_out) const;
    std::vector<double> prox_conjugate(std::span<const double> xi) const;

    // D_xi Theta(x_bar, x) = Theta(x_bar) - Theta(x) - <xi, x_bar - x>; the
    // caller guarantees xi is a subgradient of Theta at x.
    double bregman(std::span<const double> x_bar, std::span<const double> x,
                   std::span<const double> xi) const;

private:
    Penalty(PenaltyKind kind, double sigma, double lambda, GridShape grid, PdhgSettings pdhg)
        : kind_(kind), sigma_(sigma), lambda_(lambda), grid_(grid), pdhg_(pdhg) {}

    PenaltyKind kind_;
    double sigma_;
    double lambda_;
    GridShape grid_;
    PdhgSettings pdhg_;
};

}  // namespace regshb
