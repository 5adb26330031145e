#include <cmath>
#include <memory>

#include "kernels.hpp"
#include "regshb/errors.hpp"
#include "regshb/operators.hpp"
#include "regshb/vec.hpp"

namespace regshb {

HelmholtzSolver::HelmholtzSolver(std::size_t n) : n_(n) {
    sine_.resize(n * n);
    eig_.resize(n);
    const double np1 = static_cast<double>(n + 1);
    for (std::size_t k = 0; k < n; ++k) {
        eig_[k] = 2.0 - 2.0 * std::cos(static_cast<double>(k + 1) * M_PI / np1);
        for (std::size_t j = 0; j < n; ++j)
            sine_[k * n + j] =
                std::sin(static_cast<double>(k + 1) * static_cast<double>(j + 1) * M_PI / np1);
    }
}

namespace {

// out = S * a * S with S symmetric n x n (row-major).
void sandwich(const std::vector<double>& S, std::span<const double> a, std::size_t n,
              std::vector<double>& tmp, std::span<double> out) {
    tmp.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            const double s = S[i * n + k];
            if (s == 0.0) continue;
            const double* arow = &a[k * n];
            double* trow = &tmp[i * n];
            for (std::size_t j = 0; j < n; ++j) trow[j] += s * arow[j];
        }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            const double* trow = &tmp[i * n];
            for (std::size_t k = 0; k < n; ++k) acc += trow[k] * S[k * n + j];
            out[i * n + j] = acc;
        }
}

}  // namespace

void HelmholtzSolver::solve(std::span<const double> v, std::span<double> u) const {
    const std::size_t n = n_;
    std::vector<double> tmp, hat(n * n);
    sandwich(sine_, v, n, tmp, hat);
    const double norm = 2.0 / static_cast<double>(n + 1);
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = 0; l < n; ++l)
            hat[k * n + l] *= norm * norm / (1.0 + eig_[k] + eig_[l]);
    sandwich(sine_, hat, n, tmp, u);
}

std::vector<double> HelmholtzSolver::solve(std::span<const double> v) const {
    std::vector<double> u(v.size());
    solve(v, u);
    return u;
}

std::vector<double> schlieren_phantom(std::size_t grid_n) {
    // Disk of value 1 at (0.1, 0.05), radius 0.35, plus two annulus segments
    // of value 0.6 in the ring 0.55 <= rho <= 0.8 covering the angular ranges
    // [20, 160] and [200, 340] degrees.
    std::vector<double> img(grid_n * grid_n, 0.0);
    const double h = 2.0 / static_cast<double>(grid_n);
    const double deg = M_PI / 180.0;
    for (std::size_t r = 0; r < grid_n; ++r) {
        const double y = 1.0 - (static_cast<double>(r) + 0.5) * h;
        for (std::size_t c = 0; c < grid_n; ++c) {
            const double x = -1.0 + (static_cast<double>(c) + 0.5) * h;
            double v = 0.0;
            const double ddx = x - 0.1, ddy = y - 0.05;
            if (ddx * ddx + ddy * ddy <= 0.35 * 0.35) v += 1.0;
            const double rho = std::sqrt(x * x + y * y);
            if (rho >= 0.55 && rho <= 0.8) {
                double ang = std::atan2(y, x);
                if (ang < 0.0) ang += 2.0 * M_PI;
                if ((ang >= 20.0 * deg && ang <= 160.0 * deg) ||
                    (ang >= 200.0 * deg && ang <= 340.0 * deg))
                    v += 0.6;
            }
            img[r * grid_n + c] = v;
        }
    }
    return img;
}

namespace {

// Block i maps f to (R_i f)^2 over detector offsets; R_i is the Radon
// transform along direction i, realized as Siddon rows on the pixel grid.
class SchlierenKernel : public SystemKernel {
public:
    SchlierenKernel(std::size_t grid_n, std::size_t n_dirs)
        : grid_n_(grid_n), n_dirs_(n_dirs), n_s_(grid_n), helmholtz_(grid_n) {
        const double h = 2.0 / static_cast<double>(grid_n);
        const double smax = std::sqrt(2.0);
        ds_ = 2.0 * smax / static_cast<double>(n_s_);
        radon_.reserve(n_dirs);
        for (std::size_t i = 0; i < n_dirs; ++i) {
            const double theta = static_cast<double>(i) * M_PI / static_cast<double>(n_dirs);
            const double cx = std::cos(theta), sy = std::sin(theta);
            DirRows rows;
            rows.indptr.assign(n_s_ + 1, 0);
            for (std::size_t k = 0; k < n_s_; ++k) {
                const double s = -smax + (static_cast<double>(k) + 0.5) * ds_;
                SparseRow row =
                    siddon_trace(grid_n, -1.0, -1.0, h, s * cx, s * sy, -sy, cx);
                for (std::size_t m = 0; m < row.idx.size(); ++m) {
                    const std::uint32_t gy = row.idx[m] / static_cast<std::uint32_t>(grid_n);
                    const std::uint32_t gx = row.idx[m] % static_cast<std::uint32_t>(grid_n);
                    rows.idx.push_back((static_cast<std::uint32_t>(grid_n) - 1 - gy) *
                                           static_cast<std::uint32_t>(grid_n) +
                                       gx);
                    rows.val.push_back(row.val[m]);
                }
                rows.indptr[k + 1] = rows.idx.size();
            }
            radon_.push_back(std::move(rows));
        }
    }

    std::size_t block_count() const override { return n_dirs_; }
    std::size_t domain_dim() const override { return grid_n_ * grid_n_; }
    std::size_t residual_dim(std::size_t) const override { return n_s_; }
    bool linear() const override { return false; }
    double range_weight(std::size_t) const override { return ds_; }

    void radon_apply(std::size_t i, std::span<const double> f, std::span<double> out) const {
        const DirRows& rows = radon_[i];
        for (std::size_t k = 0; k < n_s_; ++k) {
            double s = 0.0;
            for (std::size_t m = rows.indptr[k]; m < rows.indptr[k + 1]; ++m)
                s += rows.val[m] * f[rows.idx[m]];
            out[k] = s;
        }
    }

    void radon_adjoint(std::size_t i, std::span<const double> g, std::span<double> out) const {
        fill(out, 0.0);
        const DirRows& rows = radon_[i];
        for (std::size_t k = 0; k < n_s_; ++k)
            for (std::size_t m = rows.indptr[k]; m < rows.indptr[k + 1]; ++m)
                out[rows.idx[m]] += g[k] * rows.val[m];
    }

    void apply(std::size_t i, std::span<const double> x, std::span<double> out) const override {
        radon_apply(i, x, out);
        for (auto& v : out) v *= v;
    }

    void linearize(std::size_t i, std::span<const double> x, std::span<const double> h,
                   std::span<double> out) const override {
        std::vector<double> rx(n_s_);
        radon_apply(i, x, rx);
        radon_apply(i, h, out);
        for (std::size_t k = 0; k < n_s_; ++k) out[k] *= 2.0 * rx[k];
    }

    // L(f)* g = (I - Laplacian)^{-1} (2 ds R^T (g .* R f)); the ds factor is
    // the detector quadrature weight of the L2 pairing.
    void adjoint(std::size_t i, std::span<const double> x, std::span<const double> w,
                 std::span<double> out) const override {
        std::vector<double> rx(n_s_);
        radon_apply(i, x, rx);
        for (std::size_t k = 0; k < n_s_; ++k) rx[k] *= 2.0 * ds_ * w[k];
        std::vector<double> back(domain_dim());
        radon_adjoint(i, rx, back);
        helmholtz_.solve(back, out);
    }

    const HelmholtzSolver& helmholtz() const { return helmholtz_; }
    double detector_spacing() const { return ds_; }

private:
    struct DirRows {
        std::vector<std::size_t> indptr;
        std::vector<std::uint32_t> idx;
        std::vector<double> val;
    };

    std::size_t grid_n_, n_dirs_, n_s_;
    double ds_ = 0.0;
    HelmholtzSolver helmholtz_;
    std::vector<DirRows> radon_;
};

}  // namespace

Problem schlieren_build(std::size_t grid_n, std::size_t n_dirs, double eta) {
    if (grid_n < 16) throw ConfigError("schlieren_build: grid_n must be >= 16");
    if (n_dirs < 1) throw ConfigError("schlieren_build: n_dirs must be >= 1");

    auto kernel = std::make_shared<SchlierenKernel>(grid_n, n_dirs);

    GroundTruth truth;
    truth.x_dagger = schlieren_phantom(grid_n);
    const std::size_t n_s = grid_n;
    BlockData clean;
    clean.offsets.resize(n_dirs + 1);
    clean.flat.assign(n_dirs * n_s, 0.0);
    for (std::size_t i = 0; i <= n_dirs; ++i) clean.offsets[i] = i * n_s;
    for (std::size_t i = 0; i < n_dirs; ++i)
        kernel->apply(i, truth.x_dagger, clean.block_mut(i));
    truth.clean = std::move(clean);

    ForwardSystem sys(kernel, GridShape{grid_n, grid_n}, eta, truth.clean,
                      std::vector<double>(n_dirs, 0.0));
    detail::verify_ground_truth(sys, truth);
    return Problem{std::move(sys), std::move(truth)};
}

}  // namespace regshb
