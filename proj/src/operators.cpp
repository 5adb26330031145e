#include "regshb/operators.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "kernels.hpp"
#include "regshb/errors.hpp"
#include "regshb/vec.hpp"

namespace regshb {

std::vector<double> duality_map(std::span<const double> y, double r) {
    if (!(r > 1.0)) throw ConfigError("duality_map: exponent r must be > 1");
    std::vector<double> out(y.size(), 0.0);
    const double nrm = norm2(y);
    if (nrm == 0.0) return out;
    const double scale = (r == 2.0) ? 1.0 : std::pow(nrm, r - 2.0);
    for (std::size_t i = 0; i < y.size(); ++i) out[i] = scale * y[i];
    return out;
}

BlockData BlockData::scalars(std::vector<double> values) {
    BlockData d;
    d.offsets.resize(values.size() + 1);
    for (std::size_t i = 0; i <= values.size(); ++i) d.offsets[i] = i;
    d.flat = std::move(values);
    return d;
}

void SystemKernel::adjoint_accumulate(std::size_t i, std::span<const double> x,
                                      std::span<const double> w, std::span<double> inout) const {
    std::vector<double> tmp(domain_dim());
    adjoint(i, x, w, tmp);
    axpy(1.0, tmp, inout);
}

void Block::apply(std::span<const double> x, std::span<double> out) const {
    sys_->kernel().apply(i_, x, out);
}

void Block::linearize(std::span<const double> x, std::span<const double> h,
                      std::span<double> out) const {
    sys_->kernel().linearize(i_, x, h, out);
}

void Block::adjoint(std::span<const double> x, std::span<const double> w,
                    std::span<double> out) const {
    sys_->kernel().adjoint(i_, x, w, out);
}

std::span<const double> Block::data() const { return sys_->data(i_); }
double Block::noise_level() const { return sys_->noise_level(i_); }
std::size_t Block::residual_dim() const { return sys_->kernel().residual_dim(i_); }
double Block::range_weight() const { return sys_->kernel().range_weight(i_); }

ForwardSystem::ForwardSystem(std::shared_ptr<const SystemKernel> kernel, GridShape domain,
                             double eta, BlockData data, std::vector<double> noise_levels)
    : kernel_(std::move(kernel)),
      domain_(domain),
      eta_(eta),
      data_(std::move(data)),
      noise_(std::move(noise_levels)) {
    if (kernel_->block_count() < 1) throw ConfigError("ForwardSystem: needs at least one block");
    if (!(eta_ >= 0.0 && eta_ < 1.0)) throw ConfigError("ForwardSystem: eta must be in [0, 1)");
    if (domain_.size() != kernel_->domain_dim())
        throw ConfigError("ForwardSystem: domain shape does not match kernel");
    if (data_.block_count() != kernel_->block_count() || noise_.size() != kernel_->block_count())
        throw ConfigError("ForwardSystem: data/noise block counts do not match kernel");
}

double ForwardSystem::range_norm(std::size_t i, std::span<const double> v) const {
    return std::sqrt(kernel_->range_weight(i) * norm2_sq(v));
}

ForwardSystem ForwardSystem::with_data(BlockData data, std::vector<double> noise_levels) const {
    return ForwardSystem(kernel_, domain_, eta_, std::move(data), std::move(noise_levels));
}

NoisyData add_noise(const ForwardSystem& sys, const BlockData& clean, NoiseModel model,
                    double level, Rng& rng) {
    if (level < 0.0) throw ConfigError("add_noise: level must be >= 0");
    const std::size_t N = clean.block_count();
    NoisyData out;
    out.data = clean;
    out.delta.assign(N, 0.0);

    switch (model) {
        case NoiseModel::UniformSup: {
            const double d = level * max_abs(clean.flat);
            for (std::size_t i = 0; i < N; ++i) {
                auto blk = out.data.block_mut(i);
                std::vector<double> eps(blk.size());
                for (auto& e : eps) e = rng.uniform_sym();
                // For vector-valued blocks the perturbation is rescaled so the
                // promised bound ||y_d - y|| <= delta_i still holds.
                const double en = sys.range_norm(i, eps);
                const double scale = d / std::max(1.0, en);
                for (std::size_t k = 0; k < blk.size(); ++k) blk[k] += scale * eps[k];
                out.delta[i] = d;
            }
            break;
        }
        case NoiseModel::GaussianAbsolute: {
            for (std::size_t i = 0; i < N; ++i) {
                auto blk = out.data.block_mut(i);
                for (auto& v : blk) v += level * rng.gaussian();
                out.delta[i] = level;
            }
            break;
        }
        case NoiseModel::GaussianRelativePerBlock: {
            for (std::size_t i = 0; i < N; ++i) {
                const double nrm = sys.range_norm(i, clean.block(i));
                auto blk = out.data.block_mut(i);
                for (auto& v : blk) v += level * nrm * rng.gaussian();
                out.delta[i] = level * nrm;
            }
            break;
        }
    }
    return out;
}

// --- Fredholm ----------------------------------------------------------------

double fredholm_kernel(double s, double t) {
    const double d = s - t;
    return 4.0 * std::exp(-d * d / 0.01);
}

double fredholm_exact_solution(double t) {
    return std::max(40.0 * t * (t - 0.25) * (0.8 - t), 0.0);
}

namespace {

// Dense matrix, one scalar block per row.
class DenseRowKernel : public SystemKernel {
public:
    DenseRowKernel(std::size_t rows, std::size_t cols, std::vector<double> m)
        : rows_(rows), cols_(cols), m_(std::move(m)) {}

    std::size_t block_count() const override { return rows_; }
    std::size_t domain_dim() const override { return cols_; }
    std::size_t residual_dim(std::size_t) const override { return 1; }
    bool linear() const override { return true; }

    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(m_).subspan(i * cols_, cols_);
    }

    void apply(std::size_t i, std::span<const double> x, std::span<double> out) const override {
        out[0] = dot(row(i), x);
    }
    void linearize(std::size_t i, std::span<const double>, std::span<const double> h,
                   std::span<double> out) const override {
        apply(i, h, out);
    }
    void adjoint(std::size_t i, std::span<const double>, std::span<const double> w,
                 std::span<double> out) const override {
        auto r = row(i);
        for (std::size_t j = 0; j < cols_; ++j) out[j] = w[0] * r[j];
    }
    void adjoint_accumulate(std::size_t i, std::span<const double>, std::span<const double> w,
                            std::span<double> inout) const override {
        axpy(w[0], row(i), inout);
    }

private:
    std::size_t rows_, cols_;
    std::vector<double> m_;
};

}  // namespace

namespace detail {

BlockData scalar_block_data(std::vector<double> values) {
    return BlockData::scalars(std::move(values));
}

void verify_ground_truth(const ForwardSystem& sys, const GroundTruth& truth) {
    std::vector<double> buf;
    for (std::size_t i = 0; i < sys.block_count(); ++i) {
        const auto want = truth.clean.block(i);
        buf.assign(want.size(), 0.0);
        sys.kernel().apply(i, truth.x_dagger, buf);
        for (std::size_t k = 0; k < want.size(); ++k) {
            const double scale = std::max(1.0, std::abs(want[k]));
            if (std::abs(buf[k] - want[k]) > 1e-12 * scale)
                throw std::logic_error("GroundTruth: clean data does not match apply(x_dagger)");
        }
    }
}

void SparseRowsKernel::apply(std::size_t i, std::span<const double> x,
                             std::span<double> out) const {
    double s = 0.0;
    for (std::size_t k = indptr_[i]; k < indptr_[i + 1]; ++k) s += val_[k] * x[idx_[k]];
    out[0] = s;
}

void SparseRowsKernel::adjoint(std::size_t i, std::span<const double>, std::span<const double> w,
                               std::span<double> out) const {
    fill(out, 0.0);
    for (std::size_t k = indptr_[i]; k < indptr_[i + 1]; ++k) out[idx_[k]] = w[0] * val_[k];
}

}  // namespace detail

ForwardSystem make_dense_system(std::size_t rows, std::size_t cols, std::vector<double> matrix,
                                GridShape domain, double eta, BlockData data,
                                std::vector<double> noise_levels) {
    if (matrix.size() != rows * cols) throw ConfigError("make_dense_system: bad matrix size");
    auto kernel = std::make_shared<DenseRowKernel>(rows, cols, std::move(matrix));
    return ForwardSystem(std::move(kernel), domain, eta, std::move(data),
                         std::move(noise_levels));
}

Problem fredholm_build(std::size_t n) {
    if (n < 2) throw ConfigError("fredholm_build: n must be >= 2");
    const double h = 1.0 / static_cast<double>(n - 1);

    std::vector<double> m(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        const double s = static_cast<double>(i) * h;
        for (std::size_t j = 0; j < n; ++j) {
            const double t = static_cast<double>(j) * h;
            const double w = (j == 0 || j == n - 1) ? 0.5 * h : h;
            m[i * n + j] = w * fredholm_kernel(s, t);
        }
    }

    GroundTruth truth;
    truth.x_dagger.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        truth.x_dagger[j] = fredholm_exact_solution(static_cast<double>(j) * h);

    auto kernel = std::make_shared<DenseRowKernel>(n, n, std::move(m));
    std::vector<double> clean(n);
    for (std::size_t i = 0; i < n; ++i) clean[i] = dot(kernel->row(i), truth.x_dagger);
    truth.clean = detail::scalar_block_data(std::move(clean));

    ForwardSystem sys(kernel, GridShape{1, n}, 0.0, truth.clean, std::vector<double>(n, 0.0));
    detail::verify_ground_truth(sys, truth);
    return Problem{std::move(sys), std::move(truth)};
}

// --- Siddon ray tracing -------------------------------------------------------

SparseRow siddon_trace(std::size_t n, double origin_x, double origin_y, double h,
                       double point_x, double point_y, double dir_x, double dir_y) {
    SparseRow row;
    const double nn = static_cast<double>(n);
    // Grid coordinates: cells [i, i+1) x [j, j+1), i,j in 0..n-1.
    const double ux = (point_x - origin_x) / h;
    const double uy = (point_y - origin_y) / h;

    double tmin = -std::numeric_limits<double>::infinity();
    double tmax = std::numeric_limits<double>::infinity();
    if (dir_x != 0.0) {
        const double t1 = (0.0 - ux) / dir_x, t2 = (nn - ux) / dir_x;
        tmin = std::max(tmin, std::min(t1, t2));
        tmax = std::min(tmax, std::max(t1, t2));
    } else if (ux < 0.0 || ux > nn) {
        return row;
    }
    if (dir_y != 0.0) {
        const double t1 = (0.0 - uy) / dir_y, t2 = (nn - uy) / dir_y;
        tmin = std::max(tmin, std::min(t1, t2));
        tmax = std::min(tmax, std::max(t1, t2));
    } else if (uy < 0.0 || uy > nn) {
        return row;
    }
    if (!(tmax > tmin)) return row;

    double t = tmin;
    const double sx = ux + t * dir_x;
    const double sy = uy + t * dir_y;
    auto entry_cell = [](double s, double d, std::size_t count) {
        auto c = static_cast<long>(std::floor(s));
        if (d < 0.0 && s == std::floor(s)) --c;  // entering a boundary moving down
        if (c < 0) c = 0;
        if (c >= static_cast<long>(count)) c = static_cast<long>(count) - 1;
        return c;
    };
    long ix = entry_cell(sx, dir_x, n);
    long iy = entry_cell(sy, dir_y, n);

    const long step_x = dir_x > 0.0 ? 1 : (dir_x < 0.0 ? -1 : 0);
    const long step_y = dir_y > 0.0 ? 1 : (dir_y < 0.0 ? -1 : 0);
    const double inf = std::numeric_limits<double>::infinity();
    const double t_delta_x = dir_x != 0.0 ? std::abs(1.0 / dir_x) : inf;
    const double t_delta_y = dir_y != 0.0 ? std::abs(1.0 / dir_y) : inf;
    double t_max_x = inf, t_max_y = inf;
    if (step_x > 0) t_max_x = t + (static_cast<double>(ix + 1) - sx) / dir_x;
    if (step_x < 0) t_max_x = t + (static_cast<double>(ix) - sx) / dir_x;
    if (step_y > 0) t_max_y = t + (static_cast<double>(iy + 1) - sy) / dir_y;
    if (step_y < 0) t_max_y = t + (static_cast<double>(iy) - sy) / dir_y;

    while (t < tmax) {
        const double t_next = std::min({t_max_x, t_max_y, tmax});
        const double len = t_next - t;
        if (len > 0.0 && ix >= 0 && iy >= 0 && ix < static_cast<long>(n) &&
            iy < static_cast<long>(n)) {
            row.idx.push_back(static_cast<std::uint32_t>(iy * static_cast<long>(n) + ix));
            row.val.push_back(len * h);
        }
        if (t_next >= tmax) break;
        if (t_max_x < t_max_y) {
            ix += step_x;
            t_max_x += t_delta_x;
        } else if (t_max_y < t_max_x) {
            iy += step_y;
            t_max_y += t_delta_y;
        } else {  // corner crossing
            ix += step_x;
            t_max_x += t_delta_x;
            iy += step_y;
            t_max_y += t_delta_y;
        }
        t = t_next;
        if (ix < 0 || iy < 0 || ix >= static_cast<long>(n) || iy >= static_cast<long>(n)) break;
    }
    return row;
}

}  // namespace regshb
