#include "regshb/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "regshb/errors.hpp"
#include "regshb/vec.hpp"

namespace regshb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Forward-difference gradient. dx holds column differences, dy row
// differences; entries at the last column/row stay zero.
void grad_forward(std::span<const double> x, const GridShape& g, std::span<double> dx,
                  std::span<double> dy) {
    const std::size_t R = g.rows, C = g.cols;
    for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t c = 0; c < C; ++c) {
            const std::size_t k = r * C + c;
            dx[k] = (c + 1 < C) ? x[k + 1] - x[k] : 0.0;
            dy[k] = (r + 1 < R) ? x[k + C] - x[k] : 0.0;
        }
    }
}

// Negative divergence, the adjoint of grad_forward.
void div_adjoint(std::span<const double> dx, std::span<const double> dy, const GridShape& g,
                 std::span<double> out) {
    const std::size_t R = g.rows, C = g.cols;
    for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t c = 0; c < C; ++c) {
            const std::size_t k = r * C + c;
            double v = 0.0;
            if (c + 1 < C) v -= dx[k];
            if (c > 0) v += dx[k - 1];
            if (r + 1 < R) v -= dy[k];
            if (r > 0) v += dy[k - C];
            out[k] = v;
        }
    }
}

double grad_norm_bound(const GridShape& g) {
    // ||grad||^2 <= 8 on a 2D grid, <= 4 in 1D.
    return g.is_2d() ? std::sqrt(8.0) : 2.0;
}

}  // namespace

double tv_isotropic(std::span<const double> x, const GridShape& g) {
    const std::size_t R = g.rows, C = g.cols;
    double tv = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
        for (std::size_t c = 0; c < C; ++c) {
            const std::size_t k = r * C + c;
            const double dx = (c + 1 < C) ? x[k + 1] - x[k] : 0.0;
            const double dy = (r + 1 < R) ? x[k + C] - x[k] : 0.0;
            tv += std::sqrt(dx * dx + dy * dy);
        }
    }
    return tv;
}

double tv_denoise_primal(std::span<const double> z, std::span<const double> target,
                         double lambda, const GridShape& g) {
    double q = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double d = z[i] - target[i];
        q += d * d;
    }
    return q / (2.0 * lambda) + tv_isotropic(z, g);
}

double tv_denoise_dual(std::span<const double> p, std::span<const double> target,
                       double lambda, const GridShape& g) {
    // D(p) = <K^T p, target> - (lambda/2) ||K^T p||^2 for p in the unit ball.
    const std::size_t n = g.size();
    std::vector<double> ktp(n);
    div_adjoint(p.subspan(0, n), p.subspan(n, n), g, ktp);
    return dot(ktp, target) - 0.5 * lambda * norm2_sq(ktp);
}

std::vector<double> pdhg_tv_denoise(std::span<const double> target, double lambda,
                                    const GridShape& g, const PdhgSettings& settings,
                                    PdhgReport* report, std::vector<double>* dual_out) {
    if (!(lambda > 0.0)) throw ConfigError("pdhg_tv_denoise: lambda must be positive");
    if (!(settings.gap_tol > 0.0)) throw ConfigError("pdhg_tv_denoise: gap_tol must be positive");
    if (settings.max_iters < 1) throw ConfigError("pdhg_tv_denoise: max_iters must be >= 1");
    if (!all_finite(target)) throw InputError("pdhg_tv_denoise: non-finite target");

    const std::size_t n = g.size();
    const double L = grad_norm_bound(g);
    const double tau = settings.primal_step > 0.0 ? settings.primal_step : 1.0 / L;
    const double sig = settings.dual_step > 0.0 ? settings.dual_step : 1.0 / L;
    if (tau * sig * L * L > 1.0 + 1e-12)
        throw ConfigError("pdhg_tv_denoise: step sizes violate primal*dual*||grad||^2 <= 1");

    std::vector<double> z(target.begin(), target.end());
    std::vector<double> zbar = z, znew(n);
    std::vector<double> p(2 * n, 0.0);  // (p_x | p_y)
    std::vector<double> dx(n), dy(n), ktp(n);

    PdhgReport rep;
    for (std::size_t iter = 1; iter <= settings.max_iters; ++iter) {
        // Dual ascent + projection onto the pointwise unit ball.
        grad_forward(zbar, g, dx, dy);
        for (std::size_t i = 0; i < n; ++i) {
            double px = p[i] + sig * dx[i];
            double py = p[n + i] + sig * dy[i];
            const double mag = std::sqrt(px * px + py * py);
            if (mag > 1.0) {
                px /= mag;
                py /= mag;
            }
            p[i] = px;
            p[n + i] = py;
        }
        // Primal descent with the exact quadratic prox.
        div_adjoint(std::span<const double>(p).subspan(0, n),
                    std::span<const double>(p).subspan(n, n), g, ktp);
        const double denom = 1.0 + tau / lambda;
        for (std::size_t i = 0; i < n; ++i)
            znew[i] = (z[i] - tau * ktp[i] + (tau / lambda) * target[i]) / denom;
        for (std::size_t i = 0; i < n; ++i) {
            zbar[i] = 2.0 * znew[i] - z[i];
            z[i] = znew[i];
        }

        const double primal = tv_denoise_primal(z, target, lambda, g);
        const double dual = tv_denoise_dual(p, target, lambda, g);
        rep.iters = iter;
        rep.rel_gap = (primal - dual) / std::max(1.0, std::abs(primal));
        if (rep.rel_gap < settings.gap_tol) {
            rep.gap_converged = true;
            break;
        }
    }
    if (report) *report = rep;
    if (dual_out) *dual_out = std::move(p);
    return z;
}

Penalty Penalty::nonneg(GridShape grid) {
    return Penalty(PenaltyKind::ConstrainedQuadratic, 0.5, 0.0, grid, PdhgSettings{});
}

Penalty Penalty::tv(double lambda, GridShape grid, PdhgSettings settings) {
    if (!(lambda > 0.0)) throw ConfigError("Penalty::tv: lambda must be positive");
    return Penalty(PenaltyKind::TVQuadratic, 1.0 / (2.0 * lambda), lambda, grid, settings);
}

double Penalty::value(std::span<const double> x) const {
    if (!all_finite(x)) throw InputError("Penalty::value: non-finite input");
    if (kind_ == PenaltyKind::ConstrainedQuadratic) {
        for (double v : x)
            if (v < 0.0) return kInf;
        return 0.5 * norm2_sq(x);
    }
    return norm2_sq(x) / (2.0 * lambda_) + tv_isotropic(x, grid_);
}

void Penalty::prox_conjugate(std::span<const double> xi, std::span<double> x_out) const {
    if (!all_finite(xi)) throw InputError("Penalty::prox_conjugate: non-finite input");
    if (kind_ == PenaltyKind::ConstrainedQuadratic) {
        for (std::size_t i = 0; i < xi.size(); ++i) x_out[i] = std::max(xi[i], 0.0);
        return;
    }
    // argmin Theta(z) - <xi, z> = argmin (1/(2 lambda)) ||z - lambda xi||^2 + TV(z)
    std::vector<double> target(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) target[i] = lambda_ * xi[i];
    auto z = pdhg_tv_denoise(target, lambda_, grid_, pdhg_);
    std::copy(z.begin(), z.end(), x_out.begin());
}

std::vector<double> Penalty::prox_conjugate(std::span<const double> xi) const {
    std::vector<double> out(xi.size());
    prox_conjugate(xi, out);
    return out;
}

double Penalty::bregman(std::span<const double> x_bar, std::span<const double> x,
                        std::span<const double> xi) const {
    const double vb = value(x_bar);
    if (!std::isfinite(vb)) return kInf;
    double inner = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) inner += xi[i] * (x_bar[i] - x[i]);
    return vb - value(x) - inner;
}

}  // namespace regshb
