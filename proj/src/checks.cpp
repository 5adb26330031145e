#include "regshb/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "regshb/harness.hpp"
#include "regshb/rng.hpp"
#include "regshb/vec.hpp"

namespace regshb {

double h1_inner(std::span<const double> u, std::span<const double> v, std::size_t n) {
    double acc = dot(u, v);
    auto at = [n](std::span<const double> a, long r, long c) -> double {
        if (r < 0 || c < 0 || r >= static_cast<long>(n) || c >= static_cast<long>(n)) return 0.0;
        return a[static_cast<std::size_t>(r) * n + static_cast<std::size_t>(c)];
    };
    // Differences across every edge, including edges into the zero boundary.
    for (long r = 0; r <= static_cast<long>(n); ++r)
        for (long c = 0; c < static_cast<long>(n); ++c)
            acc += (at(u, r, c) - at(u, r - 1, c)) * (at(v, r, c) - at(v, r - 1, c));
    for (long r = 0; r < static_cast<long>(n); ++r)
        for (long c = 0; c <= static_cast<long>(n); ++c)
            acc += (at(u, r, c) - at(u, r, c - 1)) * (at(v, r, c) - at(v, r, c - 1));
    return acc;
}

DescentCheckStats run_descent_check(const ForwardSystem& sys, const Penalty& pen,
                                    const SolverConfig& cfg, RunMode mode,
                                    std::span<const double> x_dagger, double slack_scale,
                                    bool exact_prox) {
    DescentCheckStats stats;
    const double sigma = pen.sigma();
    const double c0 =
        (1.0 - cfg.mu0 / (4.0 * sigma)) * (1.0 - cfg.eta - (1.0 + cfg.eta) / cfg.tau);

    RunOptions opts;
    opts.record_steps = false;
    opts.observer = [&](const StepView& v) {
        ++stats.steps;
        const double d_before = pen.bregman(x_dagger, v.x_before, v.xi_before);
        const double d_after = pen.bregman(x_dagger, v.x_after, v.xi_after);
        const double m2 = norm2_sq(v.m);
        const double slack = slack_scale * (1.0 + d_before);

        const double rhs = -c0 * v.t * v.psi - 0.5 * cfg.upsilon1 * v.delta_gate * v.beta * m2;
        if (!(d_after - d_before <= rhs + slack)) ++stats.descent_violations;
        if (!(d_after <= d_before + slack)) ++stats.monotonicity_violations;

        // Gating soundness at decision time.
        if ((v.t > 0.0) != (v.psi > 0.0)) ++stats.gate_violations;
        if (v.beta > 0.0) {
            const double drift = v.gamma_tilde - (v.t / (2.0 * sigma)) * dot(v.g, v.m);
            const bool gate1 = std::sqrt(m2) > cfg.upsilon0 * v.delta_gate;
            const bool gate2 = v.delta_gate > 0.0 ? drift < -cfg.upsilon1 * v.delta_gate * m2
                                                  : drift < 0.0;
            if (!(gate1 && (gate2 || !exact_prox) && v.beta <= cfg.beta_cap))
                ++stats.gate_violations;
        }

        // gamma~ dominates <m, x_n - x_dagger>; needs the exact prox.
        if (exact_prox) {
            double m_dot = 0.0;
            for (std::size_t j = 0; j < v.m.size(); ++j)
                m_dot += v.m[j] * (v.x_before[j] - x_dagger[j]);
            if (!(v.gamma_tilde >= m_dot - 1e-9 * (1.0 + std::abs(v.gamma_tilde))))
                ++stats.gamma_violations;
        }
    };
    RunRecord rec = run(sys, pen, cfg, mode, opts);
    stats.stopped_by_rule = rec.stop == StopReason::ActiveSetEmpty;
    stats.discrepancy_ok =
        !stats.stopped_by_rule || discrepancy_satisfied(sys, rec.final_x, cfg.tau);
    return stats;
}

namespace {

struct Suite {
    std::vector<CheckResult> results;
    void add(const std::string& name, bool pass, const std::string& detail) {
        results.push_back({name, pass, detail});
    }
};

std::vector<double> random_vec(Rng& rng, std::size_t n, double scale = 1.0) {
    std::vector<double> v(n);
    for (auto& e : v) e = scale * rng.uniform_sym();
    return v;
}

void check_duality_map(Suite& s, Rng& rng) {
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const double r = 1.5 + 0.5 * (trial % 6);
        auto y = random_vec(rng, 1 + rng.uniform_below(16));
        auto j = duality_map(y, r);
        const double ny = norm2(y);
        if (ny == 0.0) continue;
        const double pair_err = std::abs(dot(j, y) - std::pow(ny, r)) / std::pow(ny, r);
        const double norm_err =
            std::abs(norm2(j) - std::pow(ny, r - 1.0)) / std::pow(ny, r - 1.0);
        worst = std::max({worst, pair_err, norm_err});
    }
    s.add("duality_map pairing/norm identities", worst <= 1e-12,
          "max relative error " + std::to_string(worst));
}

void check_linear_adjoints(Suite& s, Rng& rng, const ForwardSystem& sys,
                           const std::string& label) {
    double worst = 0.0, worst_lin = 0.0;
    const std::size_t q = sys.domain_dim();
    std::vector<double> lh(1), adj(q);
    for (int trial = 0; trial < 120; ++trial) {
        const auto i = static_cast<std::size_t>(rng.uniform_below(sys.block_count()));
        auto h = random_vec(rng, q);
        const double w = rng.uniform_sym();
        sys.kernel().linearize(i, h, h, lh);
        sys.kernel().adjoint(i, h, std::span<const double>(&w, 1), adj);
        const double lhs = lh[0] * w;
        const double rhs = dot(h, adj);
        const double scale = std::max(1.0, norm2(h) * std::abs(w));
        worst = std::max(worst, std::abs(lhs - rhs) / scale);

        auto x = random_vec(rng, q);
        auto y = random_vec(rng, q);
        const double a = rng.uniform_sym(), b = rng.uniform_sym();
        std::vector<double> combo(q);
        for (std::size_t k = 0; k < q; ++k) combo[k] = a * x[k] + b * y[k];
        std::vector<double> fa(1), fb(1), fc(1);
        sys.kernel().apply(i, x, fa);
        sys.kernel().apply(i, y, fb);
        sys.kernel().apply(i, combo, fc);
        const double lin_scale = std::max(1.0, std::abs(fc[0]));
        worst_lin = std::max(worst_lin, std::abs(fc[0] - a * fa[0] - b * fb[0]) / lin_scale);
    }
    s.add(label + " adjoint identity", worst <= 1e-10, "max error " + std::to_string(worst));
    s.add(label + " linearity", worst_lin <= 1e-12, "max error " + std::to_string(worst_lin));
}

void check_schlieren(Suite& s, Rng& rng) {
    const std::size_t n = 32, dirs = 12;
    Problem prob = schlieren_build(n, dirs);
    const ForwardSystem& sys = prob.system;
    const std::size_t q = sys.domain_dim();
    const std::size_t dim = sys.kernel().residual_dim(0);
    const double ds = sys.kernel().range_weight(0);

    double worst_adj = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto i = static_cast<std::size_t>(rng.uniform_below(dirs));
        auto f = random_vec(rng, q), h = random_vec(rng, q);
        auto g = random_vec(rng, dim);
        std::vector<double> lh(dim), lstar(q);
        sys.kernel().linearize(i, f, h, lh);
        sys.kernel().adjoint(i, f, g, lstar);
        const double lhs = ds * dot(lh, g);
        const double rhs = h1_inner(h, lstar, n);
        worst_adj = std::max(worst_adj, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
    }
    s.add("schlieren adjoint (L2 vs H1 pairing)", worst_adj <= 1e-8,
          "max relative error " + std::to_string(worst_adj));

    // Central differences are exact for the quadratic map, up to roundoff.
    double worst_fd = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const auto i = static_cast<std::size_t>(rng.uniform_below(dirs));
        auto f = random_vec(rng, q), h = random_vec(rng, q);
        const double eps = 1e-4;
        std::vector<double> fp(dim), fm(dim), lh(dim), fe(q);
        for (std::size_t k = 0; k < q; ++k) fe[k] = f[k] + eps * h[k];
        sys.kernel().apply(i, fe, fp);
        for (std::size_t k = 0; k < q; ++k) fe[k] = f[k] - eps * h[k];
        sys.kernel().apply(i, fe, fm);
        sys.kernel().linearize(i, f, h, lh);
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            const double fd = (fp[k] - fm[k]) / (2.0 * eps);
            num += (fd - lh[k]) * (fd - lh[k]);
            den += lh[k] * lh[k];
        }
        if (den > 0.0) worst_fd = std::max(worst_fd, std::sqrt(num / den));
    }
    s.add("schlieren derivative vs central differences", worst_fd <= 1e-4,
          "max relative error " + std::to_string(worst_fd));

    // Tangential cone ratio near the phantom, reported but not asserted.
    double eta_est = 0.0;
    const std::vector<double>& base = prob.truth.x_dagger;
    for (int trial = 0; trial < 20; ++trial) {
        const auto i = static_cast<std::size_t>(rng.uniform_below(dirs));
        auto d = random_vec(rng, q, 0.02);
        std::vector<double> xb(q);
        for (std::size_t k = 0; k < q; ++k) xb[k] = base[k] + d[k];
        std::vector<double> fx(dim), fxb(dim), ld(dim);
        sys.kernel().apply(i, base, fx);
        sys.kernel().apply(i, xb, fxb);
        sys.kernel().linearize(i, xb, d, ld);
        double lhs = 0.0, den = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            const double gap = fxb[k] - fx[k] - ld[k];
            lhs += gap * gap;
            const double df = fxb[k] - fx[k];
            den += df * df;
        }
        if (den > 0.0) eta_est = std::max(eta_est, std::sqrt(lhs / den));
    }
    s.add("schlieren tangential-cone ratio (reported)", true,
          "eta_est = " + std::to_string(eta_est));

    HelmholtzSolver hs(n);
    std::vector<double> mode(n * n), out(n * n);
    const std::size_t kk = 3, ll = 5;
    const double np1 = static_cast<double>(n + 1);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            mode[r * n + c] = std::sin(static_cast<double>((kk + 1) * (r + 1)) * M_PI / np1) *
                              std::sin(static_cast<double>((ll + 1) * (c + 1)) * M_PI / np1);
    hs.solve(mode, out);
    const double lam_k = 2.0 - 2.0 * std::cos(static_cast<double>(kk + 1) * M_PI / np1);
    const double lam_l = 2.0 - 2.0 * std::cos(static_cast<double>(ll + 1) * M_PI / np1);
    const double expect = 1.0 / (1.0 + lam_k + lam_l);
    double worst_mode = 0.0;
    for (std::size_t j = 0; j < mode.size(); ++j)
        worst_mode = std::max(worst_mode, std::abs(out[j] - expect * mode[j]));
    s.add("helmholtz sine eigenmode", worst_mode <= 1e-10,
          "max abs error " + std::to_string(worst_mode));

    auto a = random_vec(rng, n * n), b = random_vec(rng, n * n);
    std::vector<double> sa(n * n), sb(n * n);
    hs.solve(a, sa);
    hs.solve(b, sb);
    const double sym = std::abs(dot(sa, b) - dot(a, sb)) / std::max(1.0, std::abs(dot(sa, b)));
    s.add("helmholtz self-adjointness", sym <= 1e-10, "relative error " + std::to_string(sym));
}

}  // namespace

std::vector<double> tv1d_lattice_minimizer(std::span<const double> target, double lambda) {
    const std::size_t n = target.size();
    auto dp_pass = [&](const std::vector<std::vector<double>>& cand) {
        const double big = std::numeric_limits<double>::infinity();
        std::vector<double> prev_cost(cand[0].size());
        std::vector<std::vector<std::size_t>> parent(n);
        for (std::size_t v = 0; v < cand[0].size(); ++v) {
            const double d = cand[0][v] - target[0];
            prev_cost[v] = d * d / (2.0 * lambda);
        }
        for (std::size_t j = 1; j < n; ++j) {
            std::vector<double> cost(cand[j].size(), big);
            parent[j].assign(cand[j].size(), 0);
            for (std::size_t v = 0; v < cand[j].size(); ++v) {
                double best = big;
                std::size_t arg = 0;
                for (std::size_t u = 0; u < cand[j - 1].size(); ++u) {
                    const double c = prev_cost[u] + std::abs(cand[j][v] - cand[j - 1][u]);
                    if (c < best) {
                        best = c;
                        arg = u;
                    }
                }
                const double d = cand[j][v] - target[j];
                cost[v] = best + d * d / (2.0 * lambda);
                parent[j][v] = arg;
            }
            prev_cost = std::move(cost);
        }
        std::size_t v = 0;
        for (std::size_t u = 1; u < prev_cost.size(); ++u)
            if (prev_cost[u] < prev_cost[v]) v = u;
        std::vector<double> z(n);
        for (std::size_t j = n; j-- > 0;) {
            z[j] = cand[j][v];
            if (j > 0) v = parent[j][v];
        }
        return z;
    };

    double lo = target[0], hi = target[0];
    for (double v : target) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    lo -= 0.5;
    hi += 0.5;
    const std::size_t levels = 121;
    std::vector<std::vector<double>> cand(n, std::vector<double>(levels));
    for (std::size_t v = 0; v < levels; ++v)
        for (std::size_t j = 0; j < n; ++j)
            cand[j][v] = lo + (hi - lo) * static_cast<double>(v) / (levels - 1);
    std::vector<double> best = dp_pass(cand);

    double step = (hi - lo) / static_cast<double>(levels - 1);
    for (int stage = 0; stage < 3; ++stage) {
        const std::size_t fine = 41;
        for (std::size_t j = 0; j < n; ++j) {
            cand[j].assign(fine, 0.0);
            for (std::size_t v = 0; v < fine; ++v)
                cand[j][v] =
                    best[j] - 2.0 * step + 4.0 * step * static_cast<double>(v) / (fine - 1);
        }
        best = dp_pass(cand);
        step = 4.0 * step / static_cast<double>(fine - 1);
    }
    return best;
}

namespace {

void check_prox(Suite& s, Rng& rng) {
    // Nonnegativity-constrained quadratic: exact componentwise projection.
    {
        GridShape grid{1, 24};
        Penalty pen = Penalty::nonneg(grid);
        bool exact = true, optimality = true;
        double worst_contract = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            auto xi = random_vec(rng, grid.size(), 2.0);
            auto x = pen.prox_conjugate(xi);
            for (std::size_t j = 0; j < xi.size(); ++j) {
                if (x[j] != std::max(xi[j], 0.0)) exact = false;
                if (x[j] == 0.0 && xi[j] > 0.0) optimality = false;
            }
            auto xi2 = random_vec(rng, grid.size(), 2.0);
            auto x2 = pen.prox_conjugate(xi2);
            std::vector<double> dxi(xi.size()), dx(xi.size());
            for (std::size_t j = 0; j < xi.size(); ++j) {
                dxi[j] = xi[j] - xi2[j];
                dx[j] = x[j] - x2[j];
            }
            worst_contract =
                std::max(worst_contract, norm2(dx) - norm2(dxi) / (2.0 * pen.sigma()));
        }
        s.add("prox nonneg == max(xi,0)", exact && optimality, "componentwise projection");
        s.add("prox nonneg contraction", worst_contract <= 1e-6,
              "worst excess " + std::to_string(worst_contract));
    }

    // Bregman bounds and the three-point identity.
    {
        GridShape grid{1, 16};
        Penalty pen = Penalty::nonneg(grid);
        double worst_tp = 0.0;
        bool bounds_ok = true;
        for (int trial = 0; trial < 100; ++trial) {
            auto xi1 = random_vec(rng, grid.size(), 2.0);
            auto xi2 = random_vec(rng, grid.size(), 2.0);
            auto x1 = pen.prox_conjugate(xi1);
            auto x2 = pen.prox_conjugate(xi2);
            std::vector<double> xbar(grid.size());
            for (auto& v : xbar) v = std::abs(rng.uniform_sym());
            const double d = pen.bregman(xbar, x1, xi1);
            double nd = 0.0;
            for (std::size_t j = 0; j < xbar.size(); ++j)
                nd += (xbar[j] - x1[j]) * (xbar[j] - x1[j]);
            if (d < -1e-12 || d < pen.sigma() * nd - 1e-9 * (1.0 + d)) bounds_ok = false;

            const double lhs = pen.bregman(xbar, x2, xi2) - pen.bregman(xbar, x1, xi1);
            double inner = 0.0;
            for (std::size_t j = 0; j < xbar.size(); ++j)
                inner += (xi2[j] - xi1[j]) * (x1[j] - xbar[j]);
            const double rhs = pen.bregman(x1, x2, xi2) + inner;
            worst_tp = std::max(worst_tp, std::abs(lhs - rhs));
        }
        s.add("bregman nonnegativity and lower bound", bounds_ok, "random feasible pairs");
        s.add("three-point identity", worst_tp <= 1e-10,
              "max abs error " + std::to_string(worst_tp));
    }

    // TV prox against the lattice dynamic program on short 1D signals.
    {
        double worst_gap = 0.0;
        for (std::size_t n = 2; n <= 8; ++n) {
            GridShape grid{1, n};
            const double lambda = (n % 2 == 0) ? 1.0 : 0.5;
            Penalty pen = Penalty::tv(lambda, grid);
            auto xi = random_vec(rng, n, 0.07);
            auto x = pen.prox_conjugate(xi);
            std::vector<double> target(n);
            for (std::size_t j = 0; j < n; ++j) target[j] = lambda * xi[j];
            auto z = tv1d_lattice_minimizer(target, lambda);
            const double obj_pdhg = tv_denoise_primal(x, target, lambda, grid);
            const double obj_dp = tv_denoise_primal(z, target, lambda, grid);
            worst_gap = std::max(worst_gap, obj_pdhg - obj_dp);
        }
        s.add("tv prox vs lattice minimizer", worst_gap <= 1e-3,
              "worst objective excess " + std::to_string(worst_gap));
    }

    // TV prox contraction (inexact inner solve, 1e-2 slack).
    {
        GridShape grid{8, 8};
        const double lambda = 1.0;
        Penalty pen = Penalty::tv(lambda, grid);
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            auto xi1 = random_vec(rng, grid.size());
            auto xi2 = random_vec(rng, grid.size());
            auto x1 = pen.prox_conjugate(xi1);
            auto x2 = pen.prox_conjugate(xi2);
            std::vector<double> dxi(xi1.size()), dx(xi1.size());
            for (std::size_t j = 0; j < xi1.size(); ++j) {
                dxi[j] = xi1[j] - xi2[j];
                dx[j] = x1[j] - x2[j];
            }
            worst = std::max(worst, norm2(dx) - norm2(dxi) / (2.0 * pen.sigma()));
        }
        s.add("tv prox contraction", worst <= 1e-2, "worst excess " + std::to_string(worst));
    }

    // PDHG exit contract on a random 8x8 target.
    {
        GridShape grid{8, 8};
        auto target = random_vec(rng, grid.size());
        PdhgReport rep;
        std::vector<double> dual;
        auto z = pdhg_tv_denoise(target, 1.0, grid, PdhgSettings{}, &rep, &dual);
        const double primal = tv_denoise_primal(z, target, 1.0, grid);
        const double dualv = tv_denoise_dual(dual, target, 1.0, grid);
        const double rel = (primal - dualv) / std::max(1.0, std::abs(primal));
        const bool ok = rep.gap_converged ? rel < 1e-3 : rep.iters == 100;
        s.add("pdhg exit contract", ok,
              "iters " + std::to_string(rep.iters) + ", rel gap " + std::to_string(rel));
    }
}

void check_descent(Suite& s) {
    // Bounded noise so the descent hypothesis ||y_d - y|| <= delta holds.
    {
        Problem prob = fredholm_build(80);
        Rng noise_rng(42);
        NoisyData nd =
            add_noise(prob.system, prob.truth.clean, NoiseModel::UniformSup, 0.1, noise_rng);
        ForwardSystem noisy = prob.system.with_data(std::move(nd.data), std::move(nd.delta));
        Penalty pen = Penalty::nonneg(prob.system.domain_shape());
        SolverConfig cfg;
        cfg.mu0 = 0.7;
        cfg.tau = 1.2;
        cfg.upsilon0 = 1e-6;
        cfg.upsilon1 = 1e-5;
        cfg.seed = 7;
        cfg.max_iters = 200000;
        auto st = run_descent_check(noisy, pen, cfg, RunMode::NoisyShb, prob.truth.x_dagger);
        const bool ok = st.descent_violations == 0 && st.monotonicity_violations == 0 &&
                        st.gate_violations == 0 && st.gamma_violations == 0 &&
                        st.stopped_by_rule && st.discrepancy_ok;
        s.add("descent inequality (fredholm shb)", ok,
              std::to_string(st.steps) + " steps, " + std::to_string(st.descent_violations) +
                  "/" + std::to_string(st.monotonicity_violations) + "/" +
                  std::to_string(st.gate_violations) + "/" +
                  std::to_string(st.gamma_violations) + " violations");

        SolverConfig sgd = cfg;
        auto st2 = run_descent_check(noisy, pen, sgd, RunMode::Sgd, prob.truth.x_dagger);
        s.add("descent inequality (fredholm sgd)",
              st2.descent_violations == 0 && st2.stopped_by_rule && st2.discrepancy_ok,
              std::to_string(st2.steps) + " steps");
    }
    {
        // TV penalty over the same linear problem; the prox is inexact, so the
        // slack widens to 1e-3*(1+D) and the subgradient-exact checks are off.
        Problem prob = fredholm_build(60);
        Rng noise_rng(47);
        NoisyData nd =
            add_noise(prob.system, prob.truth.clean, NoiseModel::UniformSup, 0.05, noise_rng);
        ForwardSystem noisy = prob.system.with_data(std::move(nd.data), std::move(nd.delta));
        Penalty pen = Penalty::tv(1.0, prob.system.domain_shape());
        SolverConfig cfg;
        cfg.mu0 = 0.7;
        cfg.tau = 1.2;
        cfg.upsilon0 = 1e-6;
        cfg.upsilon1 = 1e-5;
        cfg.seed = 13;
        cfg.max_iters = 100000;
        auto st = run_descent_check(noisy, pen, cfg, RunMode::NoisyShb, prob.truth.x_dagger,
                                    1e-3, false);
        const bool ok = st.descent_violations == 0 && st.monotonicity_violations == 0 &&
                        st.stopped_by_rule && st.discrepancy_ok;
        s.add("descent inequality (fredholm tv, 1e-3 slack)", ok,
              std::to_string(st.steps) + " steps, " + std::to_string(st.descent_violations) +
                  "+" + std::to_string(st.monotonicity_violations) + " violations");
    }
    {
        Problem prob = tomo_build(32, 10, 45);
        Rng noise_rng(43);
        NoisyData nd =
            add_noise(prob.system, prob.truth.clean, NoiseModel::UniformSup, 0.01, noise_rng);
        ForwardSystem noisy = prob.system.with_data(std::move(nd.data), std::move(nd.delta));
        Penalty pen = Penalty::nonneg(prob.system.domain_shape());
        SolverConfig cfg;
        cfg.mu0 = 1.0;
        cfg.tau = 2.0;
        cfg.upsilon0 = 1e-7;
        cfg.upsilon1 = 1e-6;
        cfg.batch = 50;
        cfg.seed = 11;
        cfg.max_iters = 100000;
        auto st = run_descent_check(noisy, pen, cfg, RunMode::MiniBatch, prob.truth.x_dagger);
        const bool ok = st.descent_violations == 0 && st.monotonicity_violations == 0 &&
                        st.gate_violations == 0 && st.gamma_violations == 0 &&
                        st.stopped_by_rule && st.discrepancy_ok;
        s.add("descent inequality (scaled ct mini-batch)", ok,
              std::to_string(st.steps) + " steps, " + std::to_string(st.descent_violations) +
                  " descent violations");
    }
}

}  // namespace

std::vector<CheckResult> run_all_checks(std::uint64_t seed) {
    Suite suite;
    Rng rng(seed);

    check_duality_map(suite, rng);

    Problem fred = fredholm_build(60);
    check_linear_adjoints(suite, rng, fred.system, "fredholm");
    Problem tomo = tomo_build(64, 15, 90);
    check_linear_adjoints(suite, rng, tomo.system, "tomo");
    check_schlieren(suite, rng);
    check_prox(suite, rng);
    check_descent(suite);

    return suite.results;
}

}  // namespace regshb
