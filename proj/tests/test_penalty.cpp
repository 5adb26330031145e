#include <cmath>
#include <limits>

#include "doctest.h"
#include "regshb/checks.hpp"
#include "regshb/errors.hpp"
#include "regshb/penalty.hpp"
#include "regshb/rng.hpp"
#include "regshb/vec.hpp"

using namespace regshb;

namespace {

std::vector<double> rand_vec(Rng& rng, std::size_t n, double scale = 1.0) {
    std::vector<double> v(n);
    for (auto& e : v) e = scale * rng.uniform_sym();
    return v;
}

// Exhaustive two-pixel minimizer by nested grid refinement, independent of
// both PDHG and the lattice DP.
std::pair<double, double> two_pixel_grid_search(double t0, double t1, double lambda) {
    double lo = std::min(t0, t1) - 1.0, hi = std::max(t0, t1) + 1.0;
    double best0 = t0, best1 = t1;
    double step = (hi - lo) / 100.0;
    auto obj = [&](double a, double b) {
        const double d0 = a - t0, d1 = b - t1;
        return (d0 * d0 + d1 * d1) / (2.0 * lambda) + std::abs(b - a);
    };
    double c0 = lo, c1 = lo, w = hi - lo;
    for (int stage = 0; stage < 5; ++stage) {
        double best = std::numeric_limits<double>::infinity();
        const double a0 = (stage == 0) ? lo : c0 - w, a1 = (stage == 0) ? lo : c1 - w;
        for (int i = 0; i <= 100; ++i) {
            for (int j = 0; j <= 100; ++j) {
                const double za = a0 + step * i, zb = a1 + step * j;
                const double o = obj(za, zb);
                if (o < best) {
                    best = o;
                    best0 = za;
                    best1 = zb;
                }
            }
        }
        c0 = best0;
        c1 = best1;
        w = 2.0 * step;
        step = 4.0 * step / 100.0;
    }
    return {best0, best1};
}

}  // namespace

TEST_CASE("nonneg prox is the componentwise projection") {
    Penalty pen = Penalty::nonneg({1, 2});
    auto x = pen.prox_conjugate(std::vector<double>{-1.0, 2.0});
    CHECK(x[0] == 0.0);
    CHECK(x[1] == 2.0);
    auto z = pen.prox_conjugate(std::vector<double>{0.0, 0.0});
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 0.0);
}

TEST_CASE("nonneg prox rejects non-finite input") {
    Penalty pen = Penalty::nonneg({1, 2});
    CHECK_THROWS_AS(pen.prox_conjugate(std::vector<double>{1.0, std::nan("")}), InputError);
}

TEST_CASE("penalty values") {
    Penalty pen = Penalty::nonneg({1, 2});
    CHECK(pen.value(std::vector<double>{1.0, 2.0}) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(std::isinf(pen.value(std::vector<double>{-1.0, 0.0})));

    Penalty tv = Penalty::tv(2.0, {1, 2});
    CHECK(tv.sigma() == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(tv.value(std::vector<double>{0.0, 1.0}) == doctest::Approx(1.25).epsilon(1e-14));
}

TEST_CASE("bregman distance basics") {
    Penalty pen = Penalty::nonneg({1, 3});
    std::vector<double> x{0.5, 1.0, 0.0};
    CHECK(pen.bregman(x, x, x) == doctest::Approx(0.0));

    std::vector<double> xbar{1.0, 0.25, 2.0};
    double half_sq = 0.0;
    for (std::size_t i = 0; i < 3; ++i) half_sq += 0.5 * (xbar[i] - x[i]) * (xbar[i] - x[i]);
    CHECK(pen.bregman(xbar, x, x) == doctest::Approx(half_sq).epsilon(1e-14));

    std::vector<double> infeasible{-1.0, 0.0, 0.0};
    CHECK(std::isinf(pen.bregman(infeasible, x, x)));

    Penalty tv = Penalty::tv(1.0, {1, 2});
    std::vector<double> ones{1.0, 1.0}, zeros{0.0, 0.0};
    CHECK(tv.bregman(ones, zeros, zeros) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("three-point identity on random subgradient pairs") {
    Penalty pen = Penalty::nonneg({1, 12});
    Rng rng(101);
    for (int trial = 0; trial < 50; ++trial) {
        auto xi1 = rand_vec(rng, 12, 2.0);
        auto xi2 = rand_vec(rng, 12, 2.0);
        auto x1 = pen.prox_conjugate(xi1);
        auto x2 = pen.prox_conjugate(xi2);
        std::vector<double> x(12);
        for (auto& v : x) v = std::abs(rng.uniform_sym());
        const double lhs = pen.bregman(x, x2, xi2) - pen.bregman(x, x1, xi1);
        double inner = 0.0;
        for (std::size_t j = 0; j < x.size(); ++j) inner += (xi2[j] - xi1[j]) * (x1[j] - x[j]);
        const double rhs = pen.bregman(x1, x2, xi2) + inner;
        CHECK(std::abs(lhs - rhs) <= 1e-10);
    }
}

TEST_CASE("prox contraction bound") {
    Rng rng(7);
    Penalty pen = Penalty::nonneg({1, 20});
    for (int trial = 0; trial < 50; ++trial) {
        auto a = rand_vec(rng, 20, 3.0);
        auto b = rand_vec(rng, 20, 3.0);
        auto xa = pen.prox_conjugate(a);
        auto xb = pen.prox_conjugate(b);
        std::vector<double> dx(20), dxi(20);
        for (std::size_t j = 0; j < 20; ++j) {
            dx[j] = xa[j] - xb[j];
            dxi[j] = a[j] - b[j];
        }
        CHECK(norm2(dx) <= norm2(dxi) / (2.0 * pen.sigma()) + 1e-6);
    }

    Penalty tv = Penalty::tv(1.0, {6, 6});
    for (int trial = 0; trial < 8; ++trial) {
        auto a = rand_vec(rng, 36);
        auto b = rand_vec(rng, 36);
        auto xa = tv.prox_conjugate(a);
        auto xb = tv.prox_conjugate(b);
        std::vector<double> dx(36), dxi(36);
        for (std::size_t j = 0; j < 36; ++j) {
            dx[j] = xa[j] - xb[j];
            dxi[j] = a[j] - b[j];
        }
        CHECK(norm2(dx) <= norm2(dxi) / (2.0 * tv.sigma()) + 1e-2);
    }
}

TEST_CASE("tv of constants is zero and pdhg fixes constants at iteration 1") {
    GridShape g{4, 4};
    std::vector<double> c(16, 0.7);
    CHECK(tv_isotropic(c, g) == 0.0);

    PdhgReport rep;
    auto z = pdhg_tv_denoise(c, 1.0, g, PdhgSettings{}, &rep);
    for (double v : z) CHECK(v == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(rep.iters == 1);
    CHECK(rep.gap_converged);
    CHECK(rep.rel_gap <= 1e-12);

    // prox of a constant dual iterate with lambda = 1 is that constant
    Penalty tv = Penalty::tv(1.0, g);
    auto x = tv.prox_conjugate(c);
    for (double v : x) CHECK(v == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("pdhg reduces the objective of a 1D step signal") {
    GridShape g{1, 16};
    std::vector<double> target(16, 0.0);
    for (std::size_t i = 8; i < 16; ++i) target[i] = 1.0;
    auto z = pdhg_tv_denoise(target, 1.0, g, PdhgSettings{});
    const double before = tv_denoise_primal(target, target, 1.0, g);
    const double after = tv_denoise_primal(z, target, 1.0, g);
    CHECK(after <= before);
    // the jump shrinks but stays monotone
    CHECK(z[15] - z[0] < 1.0);
    CHECK(z[15] > z[0]);
}

TEST_CASE("pdhg exit contract on a random 8x8 target") {
    GridShape g{8, 8};
    Rng rng(33);
    auto target = rand_vec(rng, 64);
    PdhgReport rep;
    std::vector<double> dual;
    auto z = pdhg_tv_denoise(target, 1.0, g, PdhgSettings{}, &rep, &dual);
    const double primal = tv_denoise_primal(z, target, 1.0, g);
    const double dualv = tv_denoise_dual(dual, target, 1.0, g);
    const double rel = (primal - dualv) / std::max(1.0, std::abs(primal));
    if (rep.gap_converged) {
        CHECK(rel < 1e-3);
    } else {
        CHECK(rep.iters == 100);
    }
}

TEST_CASE("two-pixel tv prox matches grid search and shrinkage formula") {
    Rng rng(55);
    for (int trial = 0; trial < 6; ++trial) {
        const double a = rng.uniform_sym() * 0.4, b = rng.uniform_sym() * 0.4;
        const double lambda = 1.0;
        GridShape g{1, 2};
        Penalty tv = Penalty::tv(lambda, g);
        auto x = tv.prox_conjugate(std::vector<double>{a, b});

        const double t0 = lambda * a, t1 = lambda * b;
        auto [z0, z1] = two_pixel_grid_search(t0, t1, lambda);
        std::vector<double> target{t0, t1};
        const double obj_x = tv_denoise_primal(x, target, lambda, g);
        const double obj_z =
            tv_denoise_primal(std::vector<double>{z0, z1}, target, lambda, g);
        CHECK(obj_x <= obj_z + 1e-4);

        // shrink-the-difference closed form
        double e0, e1;
        if (std::abs(t1 - t0) <= 2.0 * lambda) {
            e0 = e1 = 0.5 * (t0 + t1);
        } else {
            const double s = t1 > t0 ? 1.0 : -1.0;
            e0 = t0 + lambda * s;
            e1 = t1 - lambda * s;
        }
        CHECK(obj_x <=
              tv_denoise_primal(std::vector<double>{e0, e1}, target, lambda, g) + 1e-4);
    }
}

TEST_CASE("short 1D tv prox against the lattice dynamic program") {
    Rng rng(77);
    for (std::size_t n = 2; n <= 8; ++n) {
        GridShape g{1, n};
        const double lambda = 0.75;
        Penalty tv = Penalty::tv(lambda, g);
        auto xi = rand_vec(rng, n, 0.07);
        auto x = tv.prox_conjugate(xi);
        std::vector<double> target(n);
        for (std::size_t j = 0; j < n; ++j) target[j] = lambda * xi[j];
        auto z = tv1d_lattice_minimizer(target, lambda);
        const double obj_x = tv_denoise_primal(x, target, lambda, g);
        const double obj_z = tv_denoise_primal(z, target, lambda, g);
        CHECK(obj_x - obj_z <= 1e-3);
    }
}

TEST_CASE("bregman nonnegativity and strong-convexity lower bound") {
    Rng rng(91);
    Penalty pen = Penalty::nonneg({1, 10});
    Penalty tv = Penalty::tv(0.5, {1, 10});
    for (int trial = 0; trial < 40; ++trial) {
        auto xi = rand_vec(rng, 10, 2.0);
        std::vector<double> xbar(10);
        for (auto& v : xbar) v = std::abs(rng.uniform_sym());

        auto x = pen.prox_conjugate(xi);
        const double d = pen.bregman(xbar, x, xi);
        double n2 = 0.0;
        for (std::size_t j = 0; j < 10; ++j) n2 += (xbar[j] - x[j]) * (xbar[j] - x[j]);
        CHECK(d >= -1e-12);
        CHECK(d >= pen.sigma() * n2 - 1e-9 * (1.0 + d));

        auto xt = tv.prox_conjugate(xi);
        const double dt = tv.bregman(xbar, xt, xi);
        double nt = 0.0;
        for (std::size_t j = 0; j < 10; ++j) nt += (xbar[j] - xt[j]) * (xbar[j] - xt[j]);
        // inexact prox: small slack on both bounds
        CHECK(dt >= -1e-6);
        CHECK(dt >= tv.sigma() * nt - 1e-3 * (1.0 + std::abs(dt)));
    }
}

TEST_CASE("pdhg settings are validated") {
    GridShape g{4, 4};
    std::vector<double> t(16, 0.0);
    PdhgSettings bad;
    bad.primal_step = 10.0;
    bad.dual_step = 10.0;
    CHECK_THROWS_AS(pdhg_tv_denoise(t, 1.0, g, bad), ConfigError);
    CHECK_THROWS_AS(pdhg_tv_denoise(t, -1.0, g, PdhgSettings{}), ConfigError);
    CHECK_THROWS_AS(Penalty::tv(0.0, g), ConfigError);
}
