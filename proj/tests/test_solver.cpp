#include <cmath>

#include "doctest.h"
#include "regshb/errors.hpp"
#include "regshb/operators.hpp"
#include "regshb/penalty.hpp"
#include "regshb/rng.hpp"
#include "regshb/solver.hpp"
#include "regshb/vec.hpp"

using namespace regshb;

namespace {

SolverConfig base_cfg() {
    SolverConfig cfg;
    cfg.mu0 = 0.7;
    cfg.mu1 = 1e4;
    cfg.tau = 1.2;
    cfg.upsilon0 = 1e-6;
    cfg.upsilon1 = 1e-5;
    cfg.beta_cap = 0.99;
    cfg.eta = 0.0;
    cfg.r = 2.0;
    return cfg;
}

ForwardSystem noisy_fredholm(std::size_t n, double level, std::uint64_t seed,
                             std::vector<double>* x_dagger = nullptr) {
    Problem p = fredholm_build(n);
    Rng rng(seed);
    auto nd = add_noise(p.system, p.truth.clean, NoiseModel::UniformSup, level, rng);
    if (x_dagger) *x_dagger = p.truth.x_dagger;
    return p.system.with_data(std::move(nd.data), std::move(nd.delta));
}

}  // namespace

TEST_CASE("step size, noisy data") {
    SolverConfig cfg = base_cfg();

    // inside the discrepancy ball: zero step
    std::vector<double> g{1.0};
    CHECK(step_size_noisy(1.0, g, 1.0, cfg) == 0.0);

    // min{0.7*(2-0.5)*2/4, 1e4} = 0.525
    std::vector<double> g2{2.0};
    CHECK(step_size_noisy(2.0, g2, 0.5, cfg) == doctest::Approx(0.525).epsilon(1e-15));

    // vanishing gradient: second argument wins
    std::vector<double> g3{1e-8};
    CHECK(step_size_noisy(2.0, g3, 0.5, cfg) == doctest::Approx(1e4).epsilon(1e-15));

    // g = 0 with an active residual: first argument is +inf
    std::vector<double> g4{0.0};
    CHECK(step_size_noisy(2.0, g4, 0.5, cfg) == doctest::Approx(1e4).epsilon(1e-15));
}

TEST_CASE("step size, exact data") {
    SolverConfig cfg = base_cfg();
    std::vector<double> g{1.0};
    CHECK(step_size_exact(0.0, g, cfg) == 0.0);

    // min{0.7*1/1, 1e4} = 0.7
    CHECK(step_size_exact(1.0, g, cfg) == doctest::Approx(0.7).epsilon(1e-15));

    Rng rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const double rn = std::abs(rng.uniform_sym()) * 3.0;
        std::vector<double> gv{rng.uniform_sym() * 2.0};
        CHECK(step_size_exact(rn, gv, cfg) == step_size_noisy(rn, gv, 0.0, cfg));
    }
}

TEST_CASE("gamma update") {
    SolverConfig cfg = base_cfg();
    std::vector<double> zero{0.0};

    CHECK(gamma_update(zero, zero, 0.0, 0.0, 0.0, 0.0, 0.0, cfg) == 0.0);

    // 0.1764 - 0.42 = -0.2436
    std::vector<double> m{0.42}, dx{0.42};
    CHECK(gamma_update(m, dx, 0.42, 1.0, 0.0, 0.0, 0.0, cfg) ==
          doctest::Approx(-0.2436).epsilon(1e-14));

    // -4 + 1*0.5*1*2 = -3
    CHECK(gamma_update(zero, zero, 1.0, 2.0, 0.5, 0.0, 0.0, cfg) ==
          doctest::Approx(-3.0).epsilon(1e-14));

    // exact mode drops the delta term: -4
    CHECK(gamma_update(zero, zero, 1.0, 2.0, 0.5, 0.0, 0.0, cfg, true) ==
          doctest::Approx(-4.0).epsilon(1e-14));
}

TEST_CASE("momentum coefficient") {
    SolverConfig cfg = base_cfg();
    cfg.upsilon0 = 1e-5;
    cfg.upsilon1 = 1e-4;
    const double sigma = 0.5;

    // m = 0 -> first gate fails
    std::vector<double> zero2{0.0, 0.0};
    std::vector<double> g{1.0, 0.0};
    CHECK(momentum_coeff(1.0, g, zero2, -1.0, 1e-3, sigma, cfg) == 0.0);

    // ||m||^2 = 1, t<g,m> = 0.2, gamma~ = -0.2: candidate (0.2+0.2)/1 = 0.4
    std::vector<double> m{1.0, 0.0};
    std::vector<double> g2{0.2, 0.0};
    CHECK(momentum_coeff(1.0, g2, m, -0.2, 1e-3, sigma, cfg) ==
          doctest::Approx(0.4).epsilon(1e-14));

    // gamma~ = -2: candidate 2.2 capped at 0.99
    CHECK(momentum_coeff(1.0, g2, m, -2.0, 1e-3, sigma, cfg) ==
          doctest::Approx(0.99).epsilon(1e-15));

    // second gate blocks when the drift is not negative enough
    CHECK(momentum_coeff(1.0, g2, m, 0.5, 1e-3, sigma, cfg) == 0.0);
}

TEST_CASE("single-step hand trace on a scalar problem") {
    // F(x) = x, y_d = 1, delta = 0.4, tau = 2, mu0 = 0.7: t = 0.42
    SolverConfig cfg = base_cfg();
    cfg.tau = 2.0;
    ForwardSystem sys = make_dense_system(1, 1, {1.0}, GridShape{1, 1}, 0.0,
                                          BlockData::scalars({1.0}), {0.4});
    Penalty pen = Penalty::nonneg({1, 1});
    SolverEngine eng(sys, pen, cfg, RunMode::NoisyShb);

    auto out = eng.step(0);
    CHECK(out.residual_norm == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(out.t == doctest::Approx(0.42).epsilon(1e-15));
    CHECK(out.beta == 0.0);
    CHECK(eng.state().xi[0] == doctest::Approx(0.42).epsilon(1e-15));
    CHECK(eng.state().x[0] == doctest::Approx(0.42).epsilon(1e-15));
}

TEST_CASE("state keeps x = prox(xi)") {
    ForwardSystem sys = noisy_fredholm(40, 0.2, 5);
    Penalty pen = Penalty::nonneg(sys.domain_shape());
    SolverConfig cfg = base_cfg();
    SolverEngine eng(sys, pen, cfg, RunMode::NoisyShb);
    Rng rng(9);
    for (int step = 0; step < 50; ++step) {
        eng.step(static_cast<std::uint32_t>(rng.uniform_below(40)));
        const auto& st = eng.state();
        for (std::size_t j = 0; j < st.x.size(); ++j)
            CHECK(st.x[j] == std::max(st.xi[j], 0.0));
    }
}

TEST_CASE("already-solved system empties the active set in N steps") {
    const std::size_t n = 6;
    std::vector<double> matrix(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) matrix[i * n + i] = 1.0;
    ForwardSystem sys = make_dense_system(n, n, std::move(matrix), GridShape{1, n}, 0.0,
                                          BlockData::scalars(std::vector<double>(n, 0.0)),
                                          std::vector<double>(n, 0.0));
    Penalty pen = Penalty::nonneg({1, n});
    SolverConfig cfg = base_cfg();
    cfg.seed = 3;

    RunRecord rec = run(sys, pen, cfg, RunMode::NoisyShb);
    CHECK(rec.stop == StopReason::ActiveSetEmpty);
    CHECK(rec.steps == n);
    CHECK(rec.n_delta == n);
    for (const auto& o : rec.outcomes) {
        CHECK(o.t == 0.0);
        CHECK(o.beta == 0.0);
        CHECK(o.removed);
    }
}

TEST_CASE("sgd equals shb with zero momentum cap, same seed") {
    ForwardSystem sys = noisy_fredholm(60, 0.2, 11);
    Penalty pen = Penalty::nonneg(sys.domain_shape());
    SolverConfig cfg = base_cfg();
    cfg.seed = 17;

    SolverConfig capped = cfg;
    capped.beta_cap = 0.0;

    RunRecord sgd = run(sys, pen, cfg, RunMode::Sgd);
    RunRecord shb = run(sys, pen, capped, RunMode::NoisyShb);

    REQUIRE(sgd.steps == shb.steps);
    REQUIRE(sgd.outcomes.size() == shb.outcomes.size());
    for (std::size_t k = 0; k < sgd.outcomes.size(); ++k) {
        CHECK(sgd.outcomes[k].drawn == shb.outcomes[k].drawn);
        CHECK(sgd.outcomes[k].t == shb.outcomes[k].t);
        CHECK(sgd.outcomes[k].beta == 0.0);
        CHECK(shb.outcomes[k].beta == 0.0);
        CHECK(sgd.outcomes[k].removed == shb.outcomes[k].removed);
    }
    CHECK(sgd.final_x == shb.final_x);
    CHECK(sgd.final_xi == shb.final_xi);
    CHECK(sgd.n_delta == shb.n_delta);
}

TEST_CASE("mini-batch with b = 1 reproduces the single-index step exactly") {
    ForwardSystem sys = noisy_fredholm(60, 0.1, 13);
    Penalty pen = Penalty::nonneg(sys.domain_shape());
    SolverConfig cfg = base_cfg();

    SolverConfig mb = cfg;
    mb.batch = 1;

    SolverEngine single(sys, pen, cfg, RunMode::NoisyShb);
    SolverEngine batch(sys, pen, mb, RunMode::MiniBatch);

    Rng rng(21);
    for (int step = 0; step < 200; ++step) {
        const auto idx = static_cast<std::uint32_t>(rng.uniform_below(60));
        auto a = single.step(idx);
        const std::uint32_t arr[1] = {idx};
        auto b = batch.step_batch(std::span<const std::uint32_t>(arr, 1));
        CHECK(a.t == b.t);
        CHECK(a.beta == b.beta);
        CHECK(a.removed == b.removed);
        CHECK(single.state().xi == batch.state().xi);
        CHECK(single.state().x == batch.state().x);
    }
}

TEST_CASE("mini-batch removal semantics") {
    const std::size_t n = 6;
    std::vector<double> matrix(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) matrix[i * n + i] = 1.0;
    ForwardSystem sys = make_dense_system(n, n, std::move(matrix), GridShape{1, n}, 0.0,
                                          BlockData::scalars(std::vector<double>(n, 0.0)),
                                          std::vector<double>(n, 0.0));
    Penalty pen = Penalty::nonneg({1, n});

    // b = N with exact data at the solution: one removal step terminates
    SolverConfig cfg = base_cfg();
    cfg.batch = n;
    cfg.seed = 31;
    RunRecord rec = run(sys, pen, cfg, RunMode::MiniBatch);
    CHECK(rec.stop == StopReason::ActiveSetEmpty);
    CHECK(rec.steps == 1);
    CHECK(rec.outcomes[0].removed);
    CHECK(rec.outcomes[0].t == 0.0);
    CHECK(rec.outcomes[0].active_size == 0);

    // b = 2: the whole batch leaves the set at once
    SolverConfig cfg2 = base_cfg();
    cfg2.batch = 2;
    cfg2.seed = 32;
    RunRecord rec2 = run(sys, pen, cfg2, RunMode::MiniBatch);
    CHECK(rec2.stop == StopReason::ActiveSetEmpty);
    CHECK(rec2.steps == 3);
}

TEST_CASE("runs are bytewise deterministic for a fixed seed") {
    ForwardSystem sys = noisy_fredholm(50, 0.3, 41);
    Penalty pen = Penalty::nonneg(sys.domain_shape());
    SolverConfig cfg = base_cfg();
    cfg.seed = 77;

    RunRecord a = run(sys, pen, cfg, RunMode::NoisyShb);
    RunRecord b = run(sys, pen, cfg, RunMode::NoisyShb);
    REQUIRE(a.steps == b.steps);
    CHECK(a.final_x == b.final_x);
    CHECK(a.final_xi == b.final_xi);
    for (std::size_t k = 0; k < a.outcomes.size(); ++k) {
        CHECK(a.outcomes[k].drawn == b.outcomes[k].drawn);
        CHECK(a.outcomes[k].t == b.outcomes[k].t);
        CHECK(a.outcomes[k].beta == b.outcomes[k].beta);
        CHECK(a.outcomes[k].residual_norm == b.outcomes[k].residual_norm);
    }
}

TEST_CASE("safeguard marker") {
    ForwardSystem sys = noisy_fredholm(50, 0.05, 43);
    Penalty pen = Penalty::nonneg(sys.domain_shape());
    SolverConfig cfg = base_cfg();
    cfg.max_iters = 10;
    cfg.seed = 5;
    RunRecord rec = run(sys, pen, cfg, RunMode::NoisyShb);
    CHECK(rec.stop == StopReason::Safeguard);
    CHECK(rec.safeguard_hit());
    CHECK(rec.steps == 10);
    CHECK(rec.final_x.size() == 50);
}

TEST_CASE("exact-data mode runs a fixed horizon") {
    Problem p = fredholm_build(40);
    Penalty pen = Penalty::nonneg(p.system.domain_shape());
    SolverConfig cfg = base_cfg();
    cfg.max_iters = 500;
    cfg.seed = 51;
    RunRecord rec = run(p.system, pen, cfg, RunMode::ExactShb);
    // residuals never vanish exactly, so the horizon fires
    CHECK(rec.stop == StopReason::Horizon);
    CHECK(rec.steps == 500);

    // the run still makes progress toward the solution
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < rec.final_x.size(); ++j) {
        const double d = rec.final_x[j] - p.truth.x_dagger[j];
        num += d * d;
        den += p.truth.x_dagger[j] * p.truth.x_dagger[j];
    }
    CHECK(num / den < 1.0);
}

TEST_CASE("full-set sampling also drains the active set eventually") {
    const std::size_t n = 6;
    std::vector<double> matrix(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) matrix[i * n + i] = 1.0;
    ForwardSystem sys = make_dense_system(n, n, std::move(matrix), GridShape{1, n}, 0.0,
                                          BlockData::scalars(std::vector<double>(n, 0.0)),
                                          std::vector<double>(n, 0.0));
    Penalty pen = Penalty::nonneg({1, n});
    SolverConfig cfg = base_cfg();
    cfg.sampling = SamplingMode::FullSet;
    cfg.seed = 8;
    cfg.max_iters = 10000;
    RunRecord rec = run(sys, pen, cfg, RunMode::NoisyShb);
    CHECK(rec.stop == StopReason::ActiveSetEmpty);
    CHECK(rec.steps >= n);  // coupon collection over repeated draws
}

TEST_CASE("mini-batch clips the batch to the active set under restricted sampling") {
    const std::size_t n = 6;
    std::vector<double> matrix(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) matrix[i * n + i] = 1.0;
    ForwardSystem sys = make_dense_system(n, n, std::move(matrix), GridShape{1, n}, 0.0,
                                          BlockData::scalars(std::vector<double>(n, 0.0)),
                                          std::vector<double>(n, 0.0));
    Penalty pen = Penalty::nonneg({1, n});
    SolverConfig cfg = base_cfg();
    cfg.batch = 4;
    cfg.seed = 9;
    RunRecord rec = run(sys, pen, cfg, RunMode::MiniBatch);
    CHECK(rec.stop == StopReason::ActiveSetEmpty);
    CHECK(rec.steps == 2);  // 4 removed, then the remaining 2
}

TEST_CASE("schlieren end to end with the tv penalty") {
    Problem p = schlieren_build(24, 8);
    Rng nr(61);
    auto nd = add_noise(p.system, p.truth.clean, NoiseModel::GaussianRelativePerBlock, 0.05, nr);
    ForwardSystem noisy = p.system.with_data(std::move(nd.data), std::move(nd.delta));
    Penalty pen = Penalty::tv(1.0, p.system.domain_shape());

    SolverConfig cfg;
    cfg.mu0 = 0.9;
    cfg.mu1 = 1e4;
    cfg.tau = 1.5;
    cfg.eta = 0.01;
    cfg.upsilon0 = 1e-5;
    cfg.upsilon1 = 1e-4;
    cfg.beta_cap = 0.99;
    cfg.seed = 15;
    cfg.max_iters = 2000;

    std::vector<double> xi0(p.system.domain_dim(), 0.05);
    RunOptions opts;
    opts.record_steps = false;
    opts.xi0 = xi0;
    RunRecord rec = run(noisy, pen, cfg, RunMode::NoisyShb, opts);

    std::vector<double> x0 = pen.prox_conjugate(xi0);
    const double err0 = 0.0;
    (void)err0;
    double num0 = 0.0, num1 = 0.0, den = 0.0;
    for (std::size_t j = 0; j < x0.size(); ++j) {
        const double d0 = x0[j] - p.truth.x_dagger[j];
        const double d1 = rec.final_x[j] - p.truth.x_dagger[j];
        num0 += d0 * d0;
        num1 += d1 * d1;
        den += p.truth.x_dagger[j] * p.truth.x_dagger[j];
    }
    CHECK(all_finite(rec.final_x));
    CHECK(num1 / den < num0 / den);  // reconstruction improves on the start
    CHECK(rec.steps > 0);
}

TEST_CASE("config validation") {
    Penalty pen = Penalty::nonneg({1, 4});
    SolverConfig cfg = base_cfg();

    SolverConfig bad_mu = cfg;
    bad_mu.mu0 = 3.0;  // 4*sigma = 2
    CHECK_THROWS_AS(validate_config(bad_mu, pen, 4, RunMode::NoisyShb), ConfigError);

    SolverConfig bad_tau = cfg;
    bad_tau.tau = 1.0;
    CHECK_THROWS_AS(validate_config(bad_tau, pen, 4, RunMode::NoisyShb), ConfigError);

    SolverConfig bad_beta = cfg;
    bad_beta.beta_cap = 1.0;
    CHECK_THROWS_AS(validate_config(bad_beta, pen, 4, RunMode::NoisyShb), ConfigError);

    SolverConfig bad_r = cfg;
    bad_r.r = 1.0;
    CHECK_THROWS_AS(validate_config(bad_r, pen, 4, RunMode::NoisyShb), ConfigError);

    SolverConfig bad_batch = cfg;
    bad_batch.batch = 9;
    CHECK_THROWS_AS(validate_config(bad_batch, pen, 4, RunMode::MiniBatch), ConfigError);

    CHECK_NOTHROW(validate_config(cfg, pen, 4, RunMode::NoisyShb));

    // out-of-range index is a logic error
    ForwardSystem sys = make_dense_system(1, 1, {1.0}, GridShape{1, 1}, 0.0,
                                          BlockData::scalars({1.0}), {0.0});
    SolverEngine eng(sys, Penalty::nonneg({1, 1}), cfg, RunMode::NoisyShb);
    CHECK_THROWS_AS(eng.step(5), std::logic_error);
}
