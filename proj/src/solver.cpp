#include "regshb/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "regshb/errors.hpp"
#include "regshb/rng.hpp"
#include "regshb/vec.hpp"

namespace regshb {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double pow_r(double base, double e) {
    if (e == 0.0) return 1.0;
    if (e == 1.0) return base;
    if (e == 2.0) return base * base;
    return std::pow(base, e);
}
}  // namespace

void validate_config(const SolverConfig& cfg, const Penalty& penalty, std::size_t n_blocks,
                     RunMode mode) {
    const double sigma = penalty.sigma();
    if (!(cfg.mu0 > 0.0 && cfg.mu0 < 4.0 * sigma))
        throw ConfigError("mu0: must satisfy 0 < mu0 < 4*sigma (sigma = " +
                          std::to_string(sigma) + ")");
    if (!(cfg.mu1 > 0.0)) throw ConfigError("mu1: must be positive");
    if (!(cfg.upsilon0 > 0.0)) throw ConfigError("upsilon0: must be positive");
    if (!(cfg.upsilon1 > 0.0)) throw ConfigError("upsilon1: must be positive");
    if (!(cfg.eta >= 0.0 && cfg.eta < 1.0)) throw ConfigError("eta: must be in [0, 1)");
    const double tau_min = (1.0 + cfg.eta) / (1.0 - cfg.eta);
    if (!(cfg.tau > tau_min))
        throw ConfigError("tau: must exceed (1+eta)/(1-eta) = " + std::to_string(tau_min));
    if (!(cfg.beta_cap >= 0.0 && cfg.beta_cap < 1.0))
        throw ConfigError("beta_cap: must be in [0, 1)");
    if (!(cfg.r > 1.0)) throw ConfigError("r: duality-map exponent must be > 1");
    if (cfg.max_iters < 1) throw ConfigError("max_iters: must be >= 1");
    if (mode == RunMode::MiniBatch) {
        if (cfg.batch < 1) throw ConfigError("batch: must be >= 1");
        if (cfg.batch > n_blocks) throw ConfigError("batch: exceeds the number of blocks");
    }
}

double step_size_noisy_scalar(double res_norm, double g_norm_sq, double delta_i,
                              const SolverConfig& cfg) {
    if (!(res_norm > cfg.tau * delta_i)) return 0.0;
    const double phi =
        ((1.0 - cfg.eta) * res_norm - (1.0 + cfg.eta) * delta_i) * pow_r(res_norm, cfg.r - 1.0);
    const double first = g_norm_sq > 0.0 ? cfg.mu0 * phi / g_norm_sq : kInf;
    const double second = cfg.mu1 * pow_r(res_norm, 2.0 - cfg.r);
    return std::min(first, second);
}

double step_size_noisy(double res_norm, std::span<const double> g, double delta_i,
                       const SolverConfig& cfg) {
    return step_size_noisy_scalar(res_norm, norm2_sq(g), delta_i, cfg);
}

double step_size_exact(double res_norm, std::span<const double> g, const SolverConfig& cfg) {
    if (res_norm == 0.0) return 0.0;
    return step_size_noisy(res_norm, g, 0.0, cfg);
}

double gamma_update(std::span<const double> m, std::span<const double> dx, double t_prev,
                    double res_prev_norm, double delta_prev, double beta_prev, double gamma_prev,
                    const SolverConfig& cfg, bool exact_mode) {
    double out = dot(m, dx);
    out -= (1.0 - cfg.eta) * t_prev * pow_r(res_prev_norm, cfg.r);
    if (!exact_mode)
        out += (1.0 + cfg.eta) * delta_prev * t_prev * pow_r(res_prev_norm, cfg.r - 1.0);
    out += beta_prev * gamma_prev;
    return out;
}

double momentum_coeff_scalar(double t, double g_dot_m, double m_norm_sq, double gamma_tilde,
                             double delta_gate, double sigma, const SolverConfig& cfg,
                             bool exact_gates) {
    if (!(m_norm_sq > 0.0)) return 0.0;
    const double m_norm = std::sqrt(m_norm_sq);
    const double drift = gamma_tilde - (t / (2.0 * sigma)) * g_dot_m;
    if (exact_gates) {
        if (!(drift < 0.0)) return 0.0;
    } else {
        if (!(m_norm > cfg.upsilon0 * delta_gate)) return 0.0;
        if (!(drift < -cfg.upsilon1 * delta_gate * m_norm_sq)) return 0.0;
    }
    const double candidate = (t * g_dot_m - 2.0 * sigma * gamma_tilde) / m_norm_sq;
    return std::min(candidate, cfg.beta_cap);
}

double momentum_coeff(double t, std::span<const double> g, std::span<const double> m,
                      double gamma_tilde, double delta_gate, double sigma,
                      const SolverConfig& cfg, bool exact_gates) {
    const double g_dot_m = g.empty() ? 0.0 : dot(g, m);
    return momentum_coeff_scalar(t, g_dot_m, norm2_sq(m), gamma_tilde, delta_gate, sigma, cfg,
                                 exact_gates);
}

ActiveSet::ActiveSet(std::size_t n) : n_(n), pos_(n, kAbsent) { reset_full(); }

bool ActiveSet::remove(std::uint32_t i) {
    const std::uint32_t p = pos_[i];
    if (p == kAbsent) return false;
    const std::uint32_t last = items_.back();
    items_[p] = last;
    pos_[last] = p;
    items_.pop_back();
    pos_[i] = kAbsent;
    return true;
}

void ActiveSet::reset_full() {
    items_.resize(n_);
    for (std::uint32_t i = 0; i < n_; ++i) {
        items_[i] = i;
        pos_[i] = i;
    }
}

SolverEngine::SolverEngine(const ForwardSystem& sys, const Penalty& penalty,
                           const SolverConfig& cfg, RunMode mode, std::span<const double> xi0)
    : sys_(sys), pen_(penalty), cfg_(cfg), mode_(mode), sigma_(penalty.sigma()),
      st_(sys.block_count()) {
    const std::size_t q = sys.domain_dim();
    st_.xi.assign(q, 0.0);
    if (!xi0.empty()) {
        if (xi0.size() != q) throw ConfigError("xi0: wrong dimension");
        std::copy(xi0.begin(), xi0.end(), st_.xi.begin());
    }
    st_.xi_prev = st_.xi;
    st_.x = pen_.prox_conjugate(st_.xi);
    st_.x_prev = st_.x;

    delta_min_ = 0.0;
    for (double d : sys.noise_levels())
        if (d > 0.0 && (delta_min_ == 0.0 || d < delta_min_)) delta_min_ = d;

    std::size_t max_dim = 0;
    for (std::size_t i = 0; i < sys.block_count(); ++i)
        max_dim = std::max(max_dim, sys.kernel().residual_dim(i));
    res_.resize(max_dim);
    jr_.resize(max_dim);
    g_.resize(q);
    m_.resize(q);
    xi_next_.resize(q);
    x_next_.resize(q);
}

StepOutcome SolverEngine::step(std::uint32_t drawn) {
    if (drawn >= sys_.block_count()) throw std::logic_error("step: drawn index out of range");
    if (mode_ == RunMode::MiniBatch)
        throw std::logic_error("step: engine is in mini-batch mode");
    const std::uint32_t batch[1] = {drawn};
    return step_impl(std::span<const std::uint32_t>(batch, 1));
}

StepOutcome SolverEngine::step_batch(std::span<const std::uint32_t> batch) {
    if (mode_ != RunMode::MiniBatch)
        throw std::logic_error("step_batch: engine is not in mini-batch mode");
    for (std::uint32_t i : batch)
        if (i >= sys_.block_count()) throw std::logic_error("step_batch: index out of range");
    return step_impl(batch);
}

StepOutcome SolverEngine::step_impl(std::span<const std::uint32_t> batch) {
    const bool exact = mode_ == RunMode::ExactShb;
    const bool minibatch = mode_ == RunMode::MiniBatch;

    // (ii) residuals over the batch; Gamma = indices above the discrepancy
    // threshold. g, Phi and Psi accumulate over Gamma only.
    double phi = 0.0, psi = 0.0, g_norm_sq = 0.0;
    double single_res_norm = 0.0;
    double delta_gate = minibatch ? delta_min_ : 0.0;
    bool gamma_set_nonempty = false;
    fill(g_, 0.0);
    for (std::uint32_t i : batch) {
        const std::size_t dim = sys_.kernel().residual_dim(i);
        auto res = std::span<double>(res_).subspan(0, dim);
        sys_.kernel().apply(i, st_.x, res);
        const auto y = sys_.data(i);
        for (std::size_t k = 0; k < dim; ++k) res[k] -= y[k];
        const double rn = sys_.range_norm(i, res);
        const double delta_i = exact ? 0.0 : sys_.noise_level(i);
        if (!minibatch) {
            single_res_norm = rn;
            delta_gate = delta_i;
        }
        if (!(rn > cfg_.tau * delta_i)) continue;
        gamma_set_nonempty = true;
        // J_r of the residual in the weighted range space, then the adjoint.
        const double scale = cfg_.r == 2.0 ? 1.0 : pow_r(rn, cfg_.r - 2.0);
        auto jr = std::span<double>(jr_).subspan(0, dim);
        for (std::size_t k = 0; k < dim; ++k) jr[k] = scale * res[k];
        sys_.kernel().adjoint_accumulate(i, st_.x, jr, g_);
        phi += ((1.0 - cfg_.eta) * rn - (1.0 + cfg_.eta) * delta_i) * pow_r(rn, cfg_.r - 1.0);
        psi += pow_r(rn, cfg_.r);
    }

    double t = 0.0;
    if (gamma_set_nonempty) {
        g_norm_sq = norm2_sq(g_);
        const double first = g_norm_sq > 0.0 ? cfg_.mu0 * phi / g_norm_sq : kInf;
        const double second = cfg_.mu1 * pow_r(psi, 2.0 / cfg_.r - 1.0);
        t = std::min(first, second);
    }

    // (iii) momentum; the Sgd mode keeps beta at zero and skips gamma~.
    for (std::size_t j = 0; j < m_.size(); ++j) m_[j] = st_.xi[j] - st_.xi_prev[j];
    double gamma = 0.0;
    double beta = 0.0;
    if (mode_ != RunMode::Sgd) {
        if (st_.n > 0) {
            double m_dot_dx = 0.0;
            for (std::size_t j = 0; j < m_.size(); ++j)
                m_dot_dx += m_[j] * (st_.x[j] - st_.x_prev[j]);
            gamma = m_dot_dx - st_.t_prev * st_.phi_prev + st_.beta_prev * st_.gamma_tilde;
        }
        double g_dot_m = 0.0;
        if (t > 0.0) g_dot_m = dot(g_, m_);
        beta = momentum_coeff_scalar(t, g_dot_m, norm2_sq(m_), gamma, delta_gate, sigma_, cfg_,
                                     exact);
    }

    // (iv) dual and primal updates.
    for (std::size_t j = 0; j < xi_next_.size(); ++j) {
        double v = st_.xi[j];
        if (t != 0.0) v -= t * g_[j];
        if (beta != 0.0) v += beta * m_[j];
        xi_next_[j] = v;
    }
    pen_.prox_conjugate(xi_next_, x_next_);

    // (v) active-set bookkeeping: shrink on a vacuous step, reset otherwise.
    const bool removal_branch = (t == 0.0 && beta == 0.0);
    bool removed = false;
    if (removal_branch) {
        for (std::uint32_t i : batch) removed = st_.active.remove(i) || removed;
    } else {
        st_.active.reset_full();
    }

    StepOutcome out;
    out.drawn.assign(batch.begin(), batch.end());
    out.residual_norm = minibatch ? pow_r(psi, 1.0 / cfg_.r) : single_res_norm;
    out.t = t;
    out.beta = beta;
    out.removed = removed;
    out.active_size = st_.active.size();

    if (observer_) {
        StepView view;
        view.n = st_.n;
        view.drawn = batch;
        view.res_norm = out.residual_norm;
        view.t = t;
        view.beta = beta;
        view.gamma_tilde = gamma;
        view.delta_gate = delta_gate;
        view.psi = psi;
        view.g = g_;
        view.m = m_;
        view.x_before = st_.x;
        view.xi_before = st_.xi;
        view.x_after = x_next_;
        view.xi_after = xi_next_;
        view.removed = removed;
        observer_(view);
    }

    // rotate state
    st_.xi_prev.swap(st_.xi);
    st_.xi.swap(xi_next_);
    st_.x_prev.swap(st_.x);
    st_.x.swap(x_next_);
    st_.gamma_tilde = gamma;
    st_.t_prev = t;
    st_.res_prev = out.residual_norm;
    st_.delta_prev = delta_gate;
    st_.beta_prev = beta;
    st_.phi_prev = phi;
    ++st_.n;
    return out;
}

RunRecord run(const ForwardSystem& sys, const Penalty& penalty, const SolverConfig& cfg,
              RunMode mode, const RunOptions& opts) {
    validate_config(cfg, penalty, sys.block_count(), mode);

    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(cfg.seed);
    SolverEngine eng(sys, penalty, cfg, mode, opts.xi0);
    if (opts.observer) eng.set_observer(opts.observer);

    const std::size_t N = sys.block_count();
    std::vector<std::uint32_t> scratch, batch;

    RunRecord rec;
    rec.stop = mode == RunMode::ExactShb ? StopReason::Horizon : StopReason::Safeguard;
    std::size_t step = 0;
    for (; step < cfg.max_iters; ++step) {
        if (eng.active().empty()) {
            rec.stop = StopReason::ActiveSetEmpty;
            rec.n_delta = step;
            break;
        }
        StepOutcome out;
        if (mode == RunMode::MiniBatch) {
            // Sample without replacement via a partial Fisher-Yates pass.
            if (cfg.sampling == SamplingMode::RestrictedToActive) {
                auto items = eng.active().items();
                scratch.assign(items.begin(), items.end());
            } else {
                scratch.resize(N);
                for (std::uint32_t i = 0; i < N; ++i) scratch[i] = i;
            }
            const std::size_t b = std::min<std::size_t>(cfg.batch, scratch.size());
            for (std::size_t j = 0; j < b; ++j) {
                const std::size_t k = j + rng.uniform_below(scratch.size() - j);
                std::swap(scratch[j], scratch[k]);
            }
            batch.assign(scratch.begin(), scratch.begin() + b);
            std::sort(batch.begin(), batch.end());
            out = eng.step_batch(batch);
        } else {
            std::uint32_t drawn;
            if (cfg.sampling == SamplingMode::RestrictedToActive) {
                auto items = eng.active().items();
                drawn = items[rng.uniform_below(items.size())];
            } else {
                drawn = static_cast<std::uint32_t>(rng.uniform_below(N));
            }
            out = eng.step(drawn);
        }
        if (opts.record_steps) rec.outcomes.push_back(std::move(out));
    }
    rec.steps = step;
    rec.final_x = eng.state().x;
    rec.final_xi = eng.state().xi;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

}  // namespace regshb
