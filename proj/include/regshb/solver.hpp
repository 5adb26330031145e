#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "regshb/operators.hpp"
#include "regshb/penalty.hpp"

namespace regshb {

enum class SamplingMode { FullSet, RestrictedToActive };
enum class RunMode { NoisyShb, ExactShb, Sgd, MiniBatch };

struct SolverConfig {
    double mu0 = 0.7;
    double mu1 = 1e4;
    double tau = 1.2;
    double upsilon0 = 1e-6;
    double upsilon1 = 1e-5;
    double beta_cap = 0.99;  // in [0, 1)
    double eta = 0.0;
    double r = 2.0;  // duality-map exponent, > 1
    std::size_t batch = 1;
    SamplingMode sampling = SamplingMode::RestrictedToActive;
    std::size_t max_iters = 10'000'000;
    std::uint64_t seed = 0;
};

// Throws ConfigError unless 0 < mu0 < 4 sigma, tau > (1+eta)/(1-eta),
// beta_cap in [0,1), r > 1 and batch <= N (mini-batch mode).
void validate_config(const SolverConfig& cfg, const Penalty& penalty, std::size_t n_blocks,
                     RunMode mode);

// --- Per-step scalar rules (Algorithm steps (ii)-(iii)) ----------------------

double step_size_noisy(double res_norm, std::span<const double> g, double delta_i,
                       const SolverConfig& cfg);
double step_size_noisy_scalar(double res_norm, double g_norm_sq, double delta_i,
                              const SolverConfig& cfg);
double step_size_exact(double res_norm, std::span<const double> g, const SolverConfig& cfg);

double gamma_update(std::span<const double> m, std::span<const double> dx, double t_prev,
                    double res_prev_norm, double delta_prev, double beta_prev, double gamma_prev,
                    const SolverConfig& cfg, bool exact_mode = false);

double momentum_coeff(double t, std::span<const double> g, std::span<const double> m,
                      double gamma_tilde, double delta_gate, double sigma,
                      const SolverConfig& cfg, bool exact_gates = false);
double momentum_coeff_scalar(double t, double g_dot_m, double m_norm_sq, double gamma_tilde,
                             double delta_gate, double sigma, const SolverConfig& cfg,
                             bool exact_gates = false);

// --- Iteration state ----------------------------------------------------------

// Active index set I_n; removal is O(1), reset refills {0..N-1}.
class ActiveSet {
public:
    explicit ActiveSet(std::size_t n);
    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    bool contains(std::uint32_t i) const { return pos_[i] != kAbsent; }
    bool remove(std::uint32_t i);  // returns whether i was present
    void reset_full();
    std::span<const std::uint32_t> items() const { return items_; }

private:
    static constexpr std::uint32_t kAbsent = 0xFFFFFFFFu;
    std::size_t n_;
    std::vector<std::uint32_t> items_;
    std::vector<std::uint32_t> pos_;
};

struct IterState {
    std::vector<double> xi_prev, xi, x;
    double gamma_tilde = 0.0;  // gamma~ of the latest executed step
    ActiveSet active;
    std::size_t n = 0;

    // previous-step quantities the gamma~ recursion needs
    std::vector<double> x_prev;
    double t_prev = 0.0, res_prev = 0.0, delta_prev = 0.0, beta_prev = 0.0, phi_prev = 0.0;

    explicit IterState(std::size_t n_blocks) : active(n_blocks) {}
};

struct StepOutcome {
    std::vector<std::uint32_t> drawn;
    double residual_norm = 0.0;  // mini-batch: aggregate Psi^(1/r)
    double t = 0.0;
    double beta = 0.0;
    bool removed = false;
    std::size_t active_size = 0;
};

// Snapshot handed to a step observer (used by property tests).
struct StepView {
    std::size_t n = 0;
    std::span<const std::uint32_t> drawn;
    double res_norm = 0.0;
    double t = 0.0;
    double beta = 0.0;
    double gamma_tilde = 0.0;
    double delta_gate = 0.0;
    double psi = 0.0;  // sum of ||r_i||^r over the stepped (sub)batch
    std::span<const double> g;  // zero-filled when the step took t = 0
    std::span<const double> m, x_before, xi_before, x_after, xi_after;
    bool removed = false;
};
using StepObserver = std::function<void(const StepView&)>;

enum class StopReason { ActiveSetEmpty, Safeguard, Horizon };

struct RunRecord {
    std::vector<StepOutcome> outcomes;  // empty when step recording is off
    std::size_t steps = 0;              // iterations executed
    std::size_t n_delta = 0;            // stopping index when stop == ActiveSetEmpty
    StopReason stop = StopReason::Safeguard;
    std::vector<double> final_x, final_xi;
    double wall_seconds = 0.0;

    bool safeguard_hit() const { return stop == StopReason::Safeguard; }
};

// --- Engine -------------------------------------------------------------------

class SolverEngine {
public:
    SolverEngine(const ForwardSystem& sys, const Penalty& penalty, const SolverConfig& cfg,
                 RunMode mode, std::span<const double> xi0 = {});

    // Executes one iteration with the given index / batch (batch must be
    // sorted, unique and within range). Throws std::logic_error on an
    // out-of-range index.
    StepOutcome step(std::uint32_t drawn);
    StepOutcome step_batch(std::span<const std::uint32_t> batch);

    const IterState& state() const { return st_; }
    const ActiveSet& active() const { return st_.active; }
    void set_observer(StepObserver obs) { observer_ = std::move(obs); }

private:
    StepOutcome step_impl(std::span<const std::uint32_t> batch);

    const ForwardSystem& sys_;
    const Penalty& pen_;
    SolverConfig cfg_;
    RunMode mode_;
    double sigma_;
    double delta_min_ = 0.0;  // min over strictly positive noise levels
    IterState st_;
    StepObserver observer_;

    // scratch
    std::vector<double> res_, jr_, g_, m_, xi_next_, x_next_;
};

struct RunOptions {
    bool record_steps = true;
    StepObserver observer;
    std::span<const double> xi0 = {};
};

RunRecord run(const ForwardSystem& sys, const Penalty& penalty, const SolverConfig& cfg,
              RunMode mode, const RunOptions& opts = {});

}  // namespace regshb
