#include "regshb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "regshb/errors.hpp"
#include "regshb/vec.hpp"

namespace regshb {

std::size_t problem_block_count(const ProblemSpec& p) {
    if (const auto* f = std::get_if<FredholmSpec>(&p)) return f->n;
    if (const auto* t = std::get_if<TomoSpec>(&p)) return t->n_angles * t->n_rays;
    return std::get<SchlierenSpec>(p).n_dirs;
}

Problem build_problem(const ProblemSpec& p) {
    if (const auto* f = std::get_if<FredholmSpec>(&p)) return fredholm_build(f->n);
    if (const auto* t = std::get_if<TomoSpec>(&p))
        return tomo_build(t->grid_n, t->n_angles, t->n_rays, t->modified_phantom);
    const auto& s = std::get<SchlierenSpec>(p);
    return schlieren_build(s.grid_n, s.n_dirs, s.eta);
}

Penalty make_penalty(const PenaltySpec& p, const GridShape& domain) {
    if (p.kind == PenaltyKind::ConstrainedQuadratic) return Penalty::nonneg(domain);
    return Penalty::tv(p.lambda, domain);
}

void validate_experiment(const ExperimentSpec& spec) {
    if (spec.trials < 1) throw ConfigError("trials: must be >= 1");
    if (spec.levels.empty()) throw ConfigError("noise.levels: must be nonempty");
    for (double l : spec.levels)
        if (l < 0.0) throw ConfigError("noise.levels: must be >= 0");
    if (spec.solvers.empty()) throw ConfigError("solvers: must be nonempty");
    const std::size_t n_blocks = problem_block_count(spec.problem);
    // Penalty constraints only need sigma, so a 1x1 stand-in grid suffices.
    const Penalty pen = make_penalty(spec.penalty, GridShape{1, 1});
    for (const auto& s : spec.solvers) {
        try {
            validate_config(s.cfg, pen, n_blocks, s.mode);
        } catch (const ConfigError& e) {
            throw ConfigError("solver '" + s.name + "': " + e.what());
        }
    }
}

double relative_error(std::span<const double> x, std::span<const double> x_dagger) {
    if (x.size() != x_dagger.size()) throw InputError("relative_error: shape mismatch");
    const double denom = norm2_sq(x_dagger);
    if (!(denom > 0.0)) throw InputError("relative_error: x_dagger must be nonzero");
    double num = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - x_dagger[i];
        num += d * d;
    }
    return num / denom;
}

namespace {

double quantile_inclusive(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double pos = p * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, n - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

BoxplotSummary boxplot_stats(std::vector<double> samples) {
    if (samples.empty()) throw InputError("boxplot_stats: empty sample set");
    std::sort(samples.begin(), samples.end());
    BoxplotSummary b;
    b.q25 = quantile_inclusive(samples, 0.25);
    b.median = quantile_inclusive(samples, 0.50);
    b.q75 = quantile_inclusive(samples, 0.75);
    const double iqr = b.q75 - b.q25;
    const double lo_fence = b.q25 - 1.5 * iqr;
    const double hi_fence = b.q75 + 1.5 * iqr;
    b.whisker_lo = b.q75;
    b.whisker_hi = b.q25;
    bool any_in = false;
    for (double v : samples) {
        if (v < lo_fence || v > hi_fence) {
            b.outliers.push_back(v);
        } else {
            if (!any_in) {
                b.whisker_lo = v;
                b.whisker_hi = v;
                any_in = true;
            } else {
                b.whisker_lo = std::min(b.whisker_lo, v);
                b.whisker_hi = std::max(b.whisker_hi, v);
            }
        }
    }
    if (!any_in) {  // degenerate: everything flagged; fall back to the box
        b.whisker_lo = b.q25;
        b.whisker_hi = b.q75;
        b.outliers.clear();
    }
    return b;
}

bool discrepancy_satisfied(const ForwardSystem& sys, std::span<const double> x, double tau) {
    std::vector<double> buf;
    for (std::size_t i = 0; i < sys.block_count(); ++i) {
        const std::size_t dim = sys.kernel().residual_dim(i);
        buf.assign(dim, 0.0);
        sys.kernel().apply(i, x, buf);
        const auto y = sys.data(i);
        for (std::size_t k = 0; k < dim; ++k) buf[k] -= y[k];
        if (sys.range_norm(i, buf) > tau * sys.noise_level(i)) return false;
    }
    return true;
}

BenchResult monte_carlo(const ExperimentSpec& spec, std::size_t workers) {
    validate_experiment(spec);
    const Problem prob = build_problem(spec.problem);
    const Penalty pen = make_penalty(spec.penalty, prob.system.domain_shape());
    for (const auto& s : spec.solvers) validate_config(s.cfg, pen, prob.system.block_count(), s.mode);

    const std::size_t L = spec.levels.size();
    const std::size_t C = spec.solvers.size();
    const std::size_t M = spec.trials;

    std::vector<double> xi0(prob.system.domain_dim(), spec.xi0);

    // samples[c * L + l][k]
    std::vector<std::vector<TrialSample>> samples(C * L, std::vector<TrialSample>(M));
    std::atomic<std::size_t> next_task{0};
    std::atomic<std::size_t> violations{0};

    auto worker_fn = [&]() {
        for (;;) {
            const std::size_t task = next_task.fetch_add(1);
            if (task >= L * M) return;
            const std::size_t l = task / M;
            const std::size_t k = task % M;
            const std::uint64_t stream_key =
                static_cast<std::uint64_t>(l) * 1000003ULL + static_cast<std::uint64_t>(k);
            const std::uint64_t noise_key = spec.redraw_noise ? stream_key
                                                              : static_cast<std::uint64_t>(l) * 1000003ULL;
            Rng noise_rng = Rng::stream(spec.base_seed, noise_key);
            NoisyData nd =
                add_noise(prob.system, prob.truth.clean, spec.noise_model, spec.levels[l], noise_rng);
            const ForwardSystem noisy = prob.system.with_data(std::move(nd.data), std::move(nd.delta));
            for (std::size_t c = 0; c < C; ++c) {
                SolverConfig cfg = spec.solvers[c].cfg;
                cfg.seed = Rng::mix(Rng::mix(spec.base_seed ^ Rng::mix(stream_key + 1)) + c);
                RunOptions opts;
                opts.record_steps = false;
                opts.xi0 = xi0;
                RunRecord rec = run(noisy, pen, cfg, spec.solvers[c].mode, opts);
                TrialSample s;
                s.error = relative_error(rec.final_x, prob.truth.x_dagger);
                s.n_delta = rec.steps;
                s.safeguard = rec.safeguard_hit();
                s.wall_s = rec.wall_seconds;
                if (!s.safeguard && !discrepancy_satisfied(noisy, rec.final_x, cfg.tau))
                    violations.fetch_add(1);
                samples[c * L + l][k] = s;
            }
        }
    };

    if (workers <= 1) {
        worker_fn();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker_fn);
        for (auto& th : pool) th.join();
    }

    BenchResult out;
    out.stopping_violations = violations.load();
    out.stats.reserve(C * L);
    for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t l = 0; l < L; ++l) {
            TrialStats ts;
            ts.solver = spec.solvers[c].name;
            ts.level = spec.levels[l];
            ts.samples = samples[c * L + l];
            double iter_sum = 0.0, wall_sum = 0.0, err_sum = 0.0;
            std::size_t stopped = 0;
            for (const auto& s : ts.samples) {
                err_sum += s.error;
                wall_sum += s.wall_s;
                if (s.safeguard) {
                    ++ts.safeguard_count;
                } else {
                    iter_sum += static_cast<double>(s.n_delta);
                    ++stopped;
                }
            }
            ts.mean_error = err_sum / static_cast<double>(M);
            ts.mean_wall = wall_sum / static_cast<double>(M);
            ts.mean_iter = stopped > 0 ? iter_sum / static_cast<double>(stopped) : 0.0;
            out.stats.push_back(std::move(ts));
        }
    }
    return out;
}

}  // namespace regshb
