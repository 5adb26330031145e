#include <cmath>
#include <memory>

#include "kernels.hpp"
#include "regshb/errors.hpp"
#include "regshb/operators.hpp"
#include "regshb/vec.hpp"

namespace regshb {

namespace {

struct Ellipse {
    double intensity, a, b, x0, y0, phi_deg;
};

// Shepp & Logan (1974) head phantom.
constexpr Ellipse kStandard[10] = {
    {1.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0},   {-0.98, 0.6624, 0.8740, 0.00, -0.0184, 0.0},
    {-0.02, 0.1100, 0.3100, 0.22, 0.0000, -18.0}, {-0.02, 0.1600, 0.4100, -0.22, 0.0000, 18.0},
    {0.01, 0.2100, 0.2500, 0.00, 0.3500, 0.0},   {0.01, 0.0460, 0.0460, 0.00, 0.1000, 0.0},
    {0.01, 0.0460, 0.0460, 0.00, -0.1000, 0.0},  {0.01, 0.0460, 0.0230, -0.08, -0.6050, 0.0},
    {0.01, 0.0230, 0.0230, 0.00, -0.6060, 0.0},  {0.01, 0.0230, 0.0460, 0.06, -0.6050, 0.0},
};

// High-contrast ("modified") intensities, same geometry.
constexpr double kModifiedIntensity[10] = {1.0, -0.8, -0.2, -0.2, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1};

double phantom_value(double x, double y, bool modified) {
    double v = 0.0;
    for (int e = 0; e < 10; ++e) {
        const Ellipse& el = kStandard[e];
        const double phi = el.phi_deg * M_PI / 180.0;
        const double ct = std::cos(phi), st = std::sin(phi);
        const double xr = (x - el.x0) * ct + (y - el.y0) * st;
        const double yr = -(x - el.x0) * st + (y - el.y0) * ct;
        const double q = (xr / el.a) * (xr / el.a) + (yr / el.b) * (yr / el.b);
        if (q <= 1.0) v += modified ? kModifiedIntensity[e] : el.intensity;
    }
    return v;
}

}  // namespace

std::vector<double> shepp_logan(std::size_t grid_n, bool modified) {
    if (grid_n < 8) throw ConfigError("shepp_logan: grid_n must be >= 8");
    std::vector<double> img(grid_n * grid_n);
    const double h = 2.0 / static_cast<double>(grid_n);
    for (std::size_t r = 0; r < grid_n; ++r) {
        const double y = 1.0 - (static_cast<double>(r) + 0.5) * h;  // row 0 at the top
        for (std::size_t c = 0; c < grid_n; ++c) {
            const double x = -1.0 + (static_cast<double>(c) + 0.5) * h;
            img[r * grid_n + c] = phantom_value(x, y, modified);
        }
    }
    return img;
}

Problem tomo_build(std::size_t grid_n, std::size_t n_angles, std::size_t n_rays,
                   bool modified_phantom) {
    if (grid_n < 8) throw ConfigError("tomo_build: grid_n must be >= 8");
    if (n_angles < 1 || n_rays < 1) throw ConfigError("tomo_build: need angles and rays >= 1");

    const std::size_t N = n_angles * n_rays;
    const std::size_t Q = grid_n * grid_n;
    const double half = static_cast<double>(grid_n) / 2.0;

    std::vector<std::size_t> indptr(N + 1, 0);
    std::vector<std::uint32_t> idx;
    std::vector<double> val;

    std::size_t block = 0;
    for (std::size_t a = 0; a < n_angles; ++a) {
        const double theta = static_cast<double>(a) * M_PI / static_cast<double>(n_angles);
        const double cx = std::cos(theta), sy = std::sin(theta);
        for (std::size_t j = 0; j < n_rays; ++j, ++block) {
            // Unit-spaced detector offsets centered on the image.
            const double s =
                static_cast<double>(j) - (static_cast<double>(n_rays) - 1.0) / 2.0;
            SparseRow row = siddon_trace(grid_n, -half, -half, 1.0, s * cx, s * sy, -sy, cx);
            for (std::size_t k = 0; k < row.idx.size(); ++k) {
                // Remap bottom-up grid cells to top-down image pixels.
                const std::uint32_t gy = row.idx[k] / static_cast<std::uint32_t>(grid_n);
                const std::uint32_t gx = row.idx[k] % static_cast<std::uint32_t>(grid_n);
                const std::uint32_t pix =
                    (static_cast<std::uint32_t>(grid_n) - 1 - gy) * static_cast<std::uint32_t>(grid_n) + gx;
                idx.push_back(pix);
                val.push_back(row.val[k]);
            }
            indptr[block + 1] = idx.size();
        }
    }

    auto kernel = std::make_shared<detail::SparseRowsKernel>(N, Q, std::move(indptr),
                                                             std::move(idx), std::move(val));

    GroundTruth truth;
    truth.x_dagger = shepp_logan(grid_n, modified_phantom);
    std::vector<double> clean(N);
    for (std::size_t i = 0; i < N; ++i) {
        double y = 0.0;
        auto ri = kernel->row_idx(i);
        auto rv = kernel->row_val(i);
        for (std::size_t k = 0; k < ri.size(); ++k) y += rv[k] * truth.x_dagger[ri[k]];
        clean[i] = y;
    }
    truth.clean = detail::scalar_block_data(std::move(clean));

    ForwardSystem sys(kernel, GridShape{grid_n, grid_n}, 0.0, truth.clean,
                      std::vector<double>(N, 0.0));
    detail::verify_ground_truth(sys, truth);
    return Problem{std::move(sys), std::move(truth)};
}

}  // namespace regshb
