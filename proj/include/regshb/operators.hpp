#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "regshb/grid.hpp"
#include "regshb/rng.hpp"

namespace regshb {

// Duality mapping J_r(y) = ||y||^{r-2} y of a Hilbert-type space (Euclidean
// norm); J_r(0) = 0.
std::vector<double> duality_map(std::span<const double> y, double r);

// Per-block data stacked into one flat array.
struct BlockData {
    std::vector<double> flat;
    std::vector<std::size_t> offsets;  // size = block_count + 1

    std::size_t block_count() const { return offsets.empty() ? 0 : offsets.size() - 1; }
    std::span<const double> block(std::size_t i) const {
        return std::span<const double>(flat).subspan(offsets[i], offsets[i + 1] - offsets[i]);
    }
    std::span<double> block_mut(std::size_t i) {
        return std::span<double>(flat).subspan(offsets[i], offsets[i + 1] - offsets[i]);
    }

    // One scalar per block.
    static BlockData scalars(std::vector<double> values);
};

// The math of all N blocks of one forward system. Implementations are
// immutable and all calls are safe to issue concurrently.
class SystemKernel {
public:
    virtual ~SystemKernel() = default;

    virtual std::size_t block_count() const = 0;
    virtual std::size_t domain_dim() const = 0;
    virtual std::size_t residual_dim(std::size_t i) const = 0;
    virtual bool linear() const = 0;

    // Quadrature weight of one sample of block i's range space; the block's
    // norm is sqrt(weight * sum y_k^2).
    virtual double range_weight(std::size_t) const { return 1.0; }

    virtual void apply(std::size_t i, std::span<const double> x, std::span<double> out) const = 0;
    virtual void linearize(std::size_t i, std::span<const double> x, std::span<const double> h,
                           std::span<double> out) const = 0;
    virtual void adjoint(std::size_t i, std::span<const double> x, std::span<const double> w,
                         std::span<double> out) const = 0;

    // inout += L_i(x)* w; sparse kernels override this to skip the dense pass.
    virtual void adjoint_accumulate(std::size_t i, std::span<const double> x,
                                    std::span<const double> w, std::span<double> inout) const;
};

class ForwardSystem;

// Lightweight view of one equation block.
class Block {
public:
    Block(const ForwardSystem& sys, std::size_t i) : sys_(&sys), i_(i) {}

    void apply(std::span<const double> x, std::span<double> out) const;
    void linearize(std::span<const double> x, std::span<const double> h,
                   std::span<double> out) const;
    void adjoint(std::span<const double> x, std::span<const double> w,
                 std::span<double> out) const;
    std::span<const double> data() const;
    double noise_level() const;
    std::size_t residual_dim() const;
    double range_weight() const;

private:
    const ForwardSystem* sys_;
    std::size_t i_;
};

// N equation blocks sharing one domain grid, plus the right-hand side data
// and per-block noise levels. Immutable after construction.
class ForwardSystem {
public:
    ForwardSystem(std::shared_ptr<const SystemKernel> kernel, GridShape domain, double eta,
                  BlockData data, std::vector<double> noise_levels);

    std::size_t block_count() const { return kernel_->block_count(); }
    std::size_t domain_dim() const { return kernel_->domain_dim(); }
    const GridShape& domain_shape() const { return domain_; }
    double eta() const { return eta_; }
    const SystemKernel& kernel() const { return *kernel_; }
    Block block(std::size_t i) const { return Block(*this, i); }

    std::span<const double> data(std::size_t i) const { return data_.block(i); }
    const BlockData& all_data() const { return data_; }
    double noise_level(std::size_t i) const { return noise_[i]; }
    const std::vector<double>& noise_levels() const { return noise_; }

    // Weighted norm of a vector in block i's range space.
    double range_norm(std::size_t i, std::span<const double> v) const;

    // Same kernel, new right-hand side.
    ForwardSystem with_data(BlockData data, std::vector<double> noise_levels) const;

private:
    std::shared_ptr<const SystemKernel> kernel_;
    GridShape domain_;
    double eta_;
    BlockData data_;
    std::vector<double> noise_;
};

// Exact solution together with the clean data it generates.
struct GroundTruth {
    std::vector<double> x_dagger;
    BlockData clean;
};

struct Problem {
    ForwardSystem system;  // built with clean data and zero noise levels
    GroundTruth truth;
};

enum class NoiseModel { UniformSup, GaussianAbsolute, GaussianRelativePerBlock };

struct NoisyData {
    BlockData data;
    std::vector<double> delta;
};

// Applies the chosen noise model to clean data. The system is consulted only
// for range-space quadrature weights (block norms).
NoisyData add_noise(const ForwardSystem& sys, const BlockData& clean, NoiseModel model,
                    double level, Rng& rng);

// System with one scalar block per row of a dense matrix; handy for custom
// linear problems and small solver traces.
ForwardSystem make_dense_system(std::size_t rows, std::size_t cols, std::vector<double> matrix,
                                GridShape domain, double eta, BlockData data,
                                std::vector<double> noise_levels);

// --- Problem generators -----------------------------------------------------

// First-kind Fredholm integral equation with kernel 4 exp(-(s-t)^2/0.01) on
// [0,1], trapezoidal quadrature and exact solution max{40t(t-0.25)(0.8-t),0}.
Problem fredholm_build(std::size_t n);

double fredholm_kernel(double s, double t);
double fredholm_exact_solution(double t);

// Standard ten-ellipse Shepp-Logan phantom on grid_n x grid_n, row-major with
// the top row at y = +1. `modified` switches to the high-contrast table.
std::vector<double> shepp_logan(std::size_t grid_n, bool modified = false);

// Parallel-beam CT: n_angles projections equally spaced over 180 degrees,
// n_rays unit-spaced lines per projection, Siddon intersection lengths, one
// scalar block per ray. Ground truth is the Shepp-Logan phantom.
Problem tomo_build(std::size_t grid_n = 128, std::size_t n_angles = 45,
                   std::size_t n_rays = 360, bool modified_phantom = false);

// Dirichlet Helmholtz solve (I - Laplacian) u = v on an n x n grid via fast
// diagonalization in the discrete sine basis.
class HelmholtzSolver {
public:
    explicit HelmholtzSolver(std::size_t n);
    std::size_t n() const { return n_; }
    void solve(std::span<const double> v, std::span<double> u) const;
    std::vector<double> solve(std::span<const double> v) const;

private:
    std::size_t n_;
    std::vector<double> sine_;    // DST-I matrix, n x n
    std::vector<double> eig_;     // 1D Dirichlet Laplacian eigenvalues
};

// Squared-Radon ("schlieren") system: n_dirs directions on the half circle,
// block i maps f to (R_i f)^2 sampled at grid_n detector offsets spanning
// [-sqrt(2), sqrt(2)] over the domain [-1,1]^2.
Problem schlieren_build(std::size_t grid_n = 110, std::size_t n_dirs = 60, double eta = 0.01);

// Fixed piecewise-constant schlieren ground truth (disk + annulus segments).
std::vector<double> schlieren_phantom(std::size_t grid_n);

// --- Ray geometry (shared by CT and schlieren) ------------------------------

struct SparseRow {
    std::vector<std::uint32_t> idx;
    std::vector<double> val;
};

// Exact Siddon intersection lengths of the line through `point` along the
// unit vector `dir` with the cells of an n x n grid whose lower-left corner
// is `origin` and cell side is h. Lengths are in physical units.
SparseRow siddon_trace(std::size_t n, double origin_x, double origin_y, double h,
                       double point_x, double point_y, double dir_x, double dir_y);

}  // namespace regshb
