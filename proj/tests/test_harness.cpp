#include <cmath>

#include "doctest.h"
#include "regshb/checks.hpp"
#include "regshb/errors.hpp"
#include "regshb/harness.hpp"

using namespace regshb;

namespace {

ExperimentSpec small_fredholm_spec() {
    ExperimentSpec spec;
    spec.problem_name = "fredholm";
    spec.problem = FredholmSpec{60};
    spec.penalty.kind = PenaltyKind::ConstrainedQuadratic;
    spec.noise_model = NoiseModel::UniformSup;
    spec.levels = {0.3};
    NamedSolver shb;
    shb.name = "shb";
    shb.mode = RunMode::NoisyShb;
    shb.cfg.mu0 = 0.7;
    shb.cfg.tau = 1.2;
    shb.cfg.upsilon0 = 1e-6;
    shb.cfg.upsilon1 = 1e-5;
    spec.solvers = {shb};
    spec.trials = 3;
    spec.base_seed = 2024;
    return spec;
}

}  // namespace

TEST_CASE("relative error") {
    std::vector<double> xd{1.0, 2.0, 2.0};
    CHECK(relative_error(xd, xd) == 0.0);
    std::vector<double> zero(3, 0.0);
    CHECK(relative_error(zero, xd) == doctest::Approx(1.0).epsilon(1e-15));
    std::vector<double> twice{2.0, 4.0, 4.0};
    CHECK(relative_error(twice, xd) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(relative_error(xd, zero), InputError);
    CHECK_THROWS_AS(relative_error(std::vector<double>{1.0}, xd), InputError);
}

TEST_CASE("boxplot statistics") {
    auto b = boxplot_stats({1, 2, 3, 4, 5});
    CHECK(b.median == 3.0);
    CHECK(b.q25 == 2.0);
    CHECK(b.q75 == 4.0);
    CHECK(b.outliers.empty());
    CHECK(b.whisker_lo == 1.0);
    CHECK(b.whisker_hi == 5.0);

    auto single = boxplot_stats({7});
    CHECK(single.median == 7.0);
    CHECK(single.q25 == 7.0);
    CHECK(single.q75 == 7.0);
    CHECK(single.whisker_lo == 7.0);
    CHECK(single.whisker_hi == 7.0);
    CHECK(single.outliers.empty());

    auto out = boxplot_stats({1, 2, 3, 4, 5, 6, 7, 8, 9, 100});
    REQUIRE(out.outliers.size() == 1);
    CHECK(out.outliers[0] == 100.0);
    CHECK(out.whisker_hi == 9.0);
    CHECK(out.whisker_lo == 1.0);
    CHECK(out.q25 == doctest::Approx(3.25));
    CHECK(out.q75 == doctest::Approx(7.75));

    CHECK_THROWS_AS(boxplot_stats({}), InputError);

    // every sample is inside the whiskers or listed as an outlier
    auto mixed = boxplot_stats({0.1, 0.2, 0.2, 0.3, 0.35, 0.4, 2.5, -3.0});
    for (double v : {0.1, 0.2, 0.2, 0.3, 0.35, 0.4, 2.5, -3.0}) {
        const bool inside = v >= mixed.whisker_lo && v <= mixed.whisker_hi;
        bool listed = false;
        for (double o : mixed.outliers) listed = listed || o == v;
        CHECK((inside || listed));
    }
    CHECK(mixed.q25 <= mixed.median);
    CHECK(mixed.median <= mixed.q75);
}

TEST_CASE("monte carlo with one trial equals the single run") {
    ExperimentSpec spec = small_fredholm_spec();
    spec.trials = 1;
    BenchResult r = monte_carlo(spec);
    REQUIRE(r.stats.size() == 1);
    REQUIRE(r.stats[0].samples.size() == 1);
    const auto& s = r.stats[0].samples[0];
    CHECK(r.stats[0].mean_error == s.error);
    CHECK(r.stats[0].mean_iter == static_cast<double>(s.n_delta));
    CHECK(r.stats[0].safeguard_count == 0);
    CHECK(r.stopping_violations == 0);
}

TEST_CASE("monte carlo is deterministic across worker counts") {
    ExperimentSpec spec = small_fredholm_spec();
    BenchResult a = monte_carlo(spec, 1);
    BenchResult b = monte_carlo(spec, 4);
    REQUIRE(a.stats.size() == b.stats.size());
    for (std::size_t i = 0; i < a.stats.size(); ++i) {
        CHECK(a.stats[i].mean_error == b.stats[i].mean_error);
        CHECK(a.stats[i].mean_iter == b.stats[i].mean_iter);
        REQUIRE(a.stats[i].samples.size() == b.stats[i].samples.size());
        for (std::size_t k = 0; k < a.stats[i].samples.size(); ++k) {
            CHECK(a.stats[i].samples[k].error == b.stats[i].samples[k].error);
            CHECK(a.stats[i].samples[k].n_delta == b.stats[i].samples[k].n_delta);
        }
    }
    CHECK(a.stopping_violations == 0);
    CHECK(b.stopping_violations == 0);
}

TEST_CASE("means recompute from the stored samples") {
    ExperimentSpec spec = small_fredholm_spec();
    BenchResult r = monte_carlo(spec);
    for (const auto& ts : r.stats) {
        double err = 0.0, iter = 0.0;
        std::size_t stopped = 0;
        for (const auto& s : ts.samples) {
            err += s.error;
            if (!s.safeguard) {
                iter += static_cast<double>(s.n_delta);
                ++stopped;
            }
        }
        CHECK(std::abs(ts.mean_error - err / ts.samples.size()) <= 1e-12);
        if (stopped > 0) CHECK(std::abs(ts.mean_iter - iter / stopped) <= 1e-12);
    }
}

TEST_CASE("fresh noise per trial changes the stopping index") {
    ExperimentSpec spec = small_fredholm_spec();
    spec.trials = 4;
    BenchResult r = monte_carlo(spec);
    const auto& samples = r.stats[0].samples;
    bool any_diff = false;
    for (std::size_t k = 1; k < samples.size(); ++k)
        any_diff = any_diff || samples[k].n_delta != samples[0].n_delta ||
                   samples[k].error != samples[0].error;
    CHECK(any_diff);

    // with redraw off, every trial sees the same data but different sampling
    spec.redraw_noise = false;
    BenchResult fixed = monte_carlo(spec);
    CHECK(fixed.stats[0].samples.size() == 4);
}

TEST_CASE("experiment validation catches bad configs") {
    ExperimentSpec spec = small_fredholm_spec();
    spec.trials = 0;
    CHECK_THROWS_AS(validate_experiment(spec), ConfigError);

    spec = small_fredholm_spec();
    spec.levels.clear();
    CHECK_THROWS_AS(validate_experiment(spec), ConfigError);

    spec = small_fredholm_spec();
    spec.solvers[0].cfg.mu0 = 5.0;
    CHECK_THROWS_AS(validate_experiment(spec), ConfigError);
}

TEST_CASE("descent check suite on a small run") {
    Problem p = fredholm_build(50);
    Rng rng(99);
    auto nd = add_noise(p.system, p.truth.clean, NoiseModel::UniformSup, 0.2, rng);
    ForwardSystem noisy = p.system.with_data(std::move(nd.data), std::move(nd.delta));
    Penalty pen = Penalty::nonneg(p.system.domain_shape());
    SolverConfig cfg;
    cfg.mu0 = 0.7;
    cfg.tau = 1.2;
    cfg.upsilon0 = 1e-6;
    cfg.upsilon1 = 1e-5;
    cfg.seed = 4;
    auto st = run_descent_check(noisy, pen, cfg, RunMode::NoisyShb, p.truth.x_dagger);
    CHECK(st.steps > 0);
    CHECK(st.descent_violations == 0);
    CHECK(st.monotonicity_violations == 0);
    CHECK(st.gate_violations == 0);
    CHECK(st.gamma_violations == 0);
    CHECK(st.stopped_by_rule);
    CHECK(st.discrepancy_ok);
}
