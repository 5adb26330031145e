#include "regshb/cli_config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <thread>

#include "json.hpp"
#include "regshb/checks.hpp"
#include "regshb/errors.hpp"
#include "regshb/io.hpp"

namespace regshb {

using nlohmann::json;

namespace {

json fredholm_preset() {
    return json{
        {"problem", {{"type", "fredholm"}, {"n", 300}}},
        {"penalty", {{"kind", "nonneg"}}},
        {"noise", {{"model", "uniform_sup"}, {"levels", {0.5, 0.1, 0.05, 0.01}}}},
        {"solvers",
         {{{"name", "sgd"}, {"mode", "sgd"}, {"mu0", 0.7}, {"mu1", 1e4}, {"tau", 1.2},
           {"max_iters", 10000000}},
          {{"name", "shb"}, {"mode", "shb"}, {"mu0", 0.7}, {"mu1", 1e4}, {"tau", 1.2},
           {"upsilon0", 1e-6}, {"upsilon1", 1e-5}, {"beta_cap", 0.99},
           {"max_iters", 10000000}}}},
        {"trials", 100},
        {"base_seed", 20250},
        {"redraw_noise", true},
        {"xi0", 0.0}};
}

json tomo_preset() {
    return json{
        {"problem",
         {{"type", "tomo"}, {"grid_n", 128}, {"n_angles", 45}, {"n_rays", 360},
          {"modified_phantom", false}}},
        {"penalty", {{"kind", "nonneg"}}},
        {"noise", {{"model", "gaussian_absolute"}, {"levels", {0.5, 0.1, 0.05}}}},
        {"solvers",
         {{{"name", "sgd"}, {"mode", "minibatch"}, {"mu0", 1.0}, {"mu1", 1e4}, {"tau", 2.0},
           {"batch", 1800}, {"beta_cap", 0.0}, {"max_iters", 1000000}},
          {{"name", "shb"}, {"mode", "minibatch"}, {"mu0", 1.0}, {"mu1", 1e4}, {"tau", 2.0},
           {"batch", 1800}, {"upsilon0", 1e-7}, {"upsilon1", 1e-6}, {"beta_cap", 0.99},
           {"max_iters", 1000000}}}},
        {"trials", 100},
        {"base_seed", 20251},
        {"redraw_noise", true},
        {"xi0", 0.0}};
}

json schlieren_preset() {
    return json{
        {"problem", {{"type", "schlieren"}, {"grid_n", 110}, {"n_dirs", 60}, {"eta", 0.01}}},
        {"penalty", {{"kind", "tv"}, {"lambda", 1.0}}},
        {"noise",
         {{"model", "gaussian_relative"}, {"levels", {0.05, 0.02, 0.01, 0.005, 0.002}}}},
        {"solvers",
         {{{"name", "sgd"}, {"mode", "sgd"}, {"mu0", 0.9}, {"mu1", 1e4}, {"tau", 1.5},
           {"eta", 0.01}, {"max_iters", 1000000}},
          {{"name", "shb"}, {"mode", "shb"}, {"mu0", 0.9}, {"mu1", 1e4}, {"tau", 1.5},
           {"eta", 0.01}, {"upsilon0", 1e-5}, {"upsilon1", 1e-4}, {"beta_cap", 0.99},
           {"max_iters", 1000000}}}},
        {"trials", 100},
        {"base_seed", 20252},
        {"redraw_noise", true},
        {"xi0", 0.05}};
}

json preset_json(const std::string& name) {
    if (name == "fredholm") return fredholm_preset();
    if (name == "tomo") return tomo_preset();
    if (name == "schlieren") return schlieren_preset();
    throw ConfigError("unknown preset '" + name + "' (expected fredholm|tomo|schlieren)");
}

// Per-solver keys accepted both inside solvers[] entries and as bare
// overrides (applied to every solver).
const std::set<std::string> kSolverKeys = {
    "name", "mode",     "mu0",      "mu1",      "tau",      "upsilon0", "upsilon1",
    "beta_cap", "eta",  "r",        "batch",    "sampling", "max_iters"};

const std::set<std::string> kTopKeys = {"problem", "penalty", "noise",        "solvers",
                                        "trials",  "base_seed", "redraw_noise", "xi0"};

json parse_override_value(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error&) {
        return json(text);  // plain string
    }
}

void apply_override(json& root, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override '" + assignment + "': expected KEY=VALUE");
    const std::string key = assignment.substr(0, eq);
    const json value = parse_override_value(assignment.substr(eq + 1));

    // Bare solver keys fan out to every configured solver.
    if (key.find('.') == std::string::npos && kSolverKeys.count(key) && key != "name" &&
        key != "mode") {
        for (auto& s : root.at("solvers")) s[key] = value;
        return;
    }
    if (key.find('.') == std::string::npos && kTopKeys.count(key)) {
        root[key] = value;
        return;
    }
    // Dotted path; numeric segments index arrays.
    json* node = &root;
    std::size_t start = 0;
    std::vector<std::string> parts;
    for (;;) {
        const auto pos = key.find('.', start);
        parts.push_back(key.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    for (std::size_t p = 0; p + 1 < parts.size(); ++p) {
        const std::string& seg = parts[p];
        if (node->is_array()) {
            const auto idx = static_cast<std::size_t>(std::stoull(seg));
            if (idx >= node->size()) throw ConfigError("override '" + key + "': index out of range");
            node = &(*node)[idx];
        } else if (node->is_object() && node->contains(seg)) {
            node = &(*node)[seg];
        } else {
            throw ConfigError("override '" + key + "': unknown key '" + seg + "'");
        }
    }
    const std::string& last = parts.back();
    if (node->is_array()) {
        const auto idx = static_cast<std::size_t>(std::stoull(last));
        if (idx >= node->size()) throw ConfigError("override '" + key + "': index out of range");
        (*node)[idx] = value;
    } else {
        (*node)[last] = value;  // validated against the schema afterwards
    }
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
    for (const auto& [k, v] : obj.items()) {
        (void)v;
        if (!allowed.count(k))
            throw ConfigError("unknown key '" + k + "' in " + where);
    }
}

double get_num(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj.at(key).is_number())
        throw ConfigError("key '" + key + "': expected a number");
    return obj.at(key).get<double>();
}

std::size_t get_count(const json& obj, const std::string& key, std::size_t fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number() || v.get<double>() < 0 ||
        v.get<double>() != std::floor(v.get<double>()))
        throw ConfigError("key '" + key + "': expected a nonnegative integer");
    return static_cast<std::size_t>(v.get<double>());
}

RunMode parse_mode(const std::string& m) {
    if (m == "shb") return RunMode::NoisyShb;
    if (m == "sgd") return RunMode::Sgd;
    if (m == "minibatch") return RunMode::MiniBatch;
    if (m == "exact") return RunMode::ExactShb;
    throw ConfigError("mode '" + m + "': expected shb|sgd|minibatch|exact");
}

ExperimentSpec spec_from_json(const json& root, const std::string& problem_label) {
    reject_unknown(root, kTopKeys, "config root");
    ExperimentSpec spec;
    spec.problem_name = problem_label;

    const json& prob = root.at("problem");
    reject_unknown(prob,
                   {"type", "n", "grid_n", "n_angles", "n_rays", "modified_phantom", "n_dirs",
                    "eta"},
                   "problem");
    const std::string type = prob.at("type").get<std::string>();
    if (type == "fredholm") {
        FredholmSpec f;
        f.n = get_count(prob, "n", 300);
        spec.problem = f;
    } else if (type == "tomo") {
        TomoSpec t;
        t.grid_n = get_count(prob, "grid_n", 128);
        t.n_angles = get_count(prob, "n_angles", 45);
        t.n_rays = get_count(prob, "n_rays", 360);
        if (prob.contains("modified_phantom")) t.modified_phantom = prob.at("modified_phantom").get<bool>();
        spec.problem = t;
    } else if (type == "schlieren") {
        SchlierenSpec sc;
        sc.grid_n = get_count(prob, "grid_n", 110);
        sc.n_dirs = get_count(prob, "n_dirs", 60);
        sc.eta = get_num(prob, "eta", 0.01);
        spec.problem = sc;
    } else {
        throw ConfigError("problem.type '" + type + "': expected fredholm|tomo|schlieren");
    }

    const json& pen = root.at("penalty");
    reject_unknown(pen, {"kind", "lambda"}, "penalty");
    const std::string kind = pen.at("kind").get<std::string>();
    if (kind == "nonneg") {
        spec.penalty.kind = PenaltyKind::ConstrainedQuadratic;
    } else if (kind == "tv") {
        spec.penalty.kind = PenaltyKind::TVQuadratic;
        spec.penalty.lambda = get_num(pen, "lambda", 1.0);
    } else {
        throw ConfigError("penalty.kind '" + kind + "': expected nonneg|tv");
    }

    const json& noise = root.at("noise");
    reject_unknown(noise, {"model", "levels"}, "noise");
    const std::string model = noise.at("model").get<std::string>();
    if (model == "uniform_sup") spec.noise_model = NoiseModel::UniformSup;
    else if (model == "gaussian_absolute") spec.noise_model = NoiseModel::GaussianAbsolute;
    else if (model == "gaussian_relative") spec.noise_model = NoiseModel::GaussianRelativePerBlock;
    else throw ConfigError("noise.model '" + model + "' not recognized");
    if (!noise.at("levels").is_array()) throw ConfigError("noise.levels: expected an array");
    for (const auto& l : noise.at("levels")) spec.levels.push_back(l.get<double>());

    for (const auto& s : root.at("solvers")) {
        reject_unknown(s, kSolverKeys, "solvers[] entry");
        NamedSolver ns;
        ns.name = s.at("name").get<std::string>();
        ns.mode = parse_mode(s.at("mode").get<std::string>());
        SolverConfig& c = ns.cfg;
        c.mu0 = get_num(s, "mu0", c.mu0);
        c.mu1 = get_num(s, "mu1", c.mu1);
        c.tau = get_num(s, "tau", c.tau);
        c.upsilon0 = get_num(s, "upsilon0", c.upsilon0);
        c.upsilon1 = get_num(s, "upsilon1", c.upsilon1);
        c.beta_cap = get_num(s, "beta_cap", ns.mode == RunMode::Sgd ? 0.0 : c.beta_cap);
        c.eta = get_num(s, "eta", 0.0);
        c.r = get_num(s, "r", 2.0);
        c.batch = get_count(s, "batch", 1);
        c.max_iters = get_count(s, "max_iters", c.max_iters);
        if (s.contains("sampling")) {
            const std::string sm = s.at("sampling").get<std::string>();
            if (sm == "restricted") c.sampling = SamplingMode::RestrictedToActive;
            else if (sm == "full") c.sampling = SamplingMode::FullSet;
            else throw ConfigError("sampling '" + sm + "': expected restricted|full");
        }
        spec.solvers.push_back(std::move(ns));
    }

    spec.trials = get_count(root, "trials", 1);
    spec.base_seed = root.contains("base_seed")
                         ? root.at("base_seed").get<std::uint64_t>()
                         : 0;
    if (root.contains("redraw_noise")) spec.redraw_noise = root.at("redraw_noise").get<bool>();
    spec.xi0 = get_num(root, "xi0", 0.0);

    validate_experiment(spec);
    return spec;
}

}  // namespace

std::vector<std::string> preset_names() { return {"fredholm", "tomo", "schlieren"}; }

std::string preset_config_text(const std::string& name) { return preset_json(name).dump(2) + "\n"; }

ExperimentSpec parse_config(const std::optional<std::string>& preset,
                            const std::optional<std::filesystem::path>& config_path,
                            const std::vector<std::string>& overrides) {
    json root;
    std::string label = "custom";
    if (preset) {
        root = preset_json(*preset);
        label = *preset;
    }
    if (config_path) {
        std::ifstream in(*config_path);
        if (!in) throw ConfigError("cannot open config file " + config_path->string());
        try {
            json file = json::parse(in);
            if (root.is_null()) {
                root = std::move(file);
                label = config_path->stem().string();
            } else {
                for (auto& [k, v] : file.items()) root[k] = v;  // file refines the preset
            }
        } catch (const json::parse_error& e) {
            throw ConfigError("config parse error: " + std::string(e.what()));
        }
    }
    if (root.is_null())
        throw ConfigError("no configuration: give a preset name or --config PATH");
    for (const auto& ov : overrides) apply_override(root, ov);
    return spec_from_json(root, label);
}

std::size_t resolve_workers(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("REG_SHB_WORKERS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

int cmd_solve(const ExperimentSpec& spec_in, const SolveOptions& opts) {
    ExperimentSpec spec = spec_in;
    if (opts.noise_level) spec.levels = {*opts.noise_level};
    spec.base_seed = opts.seed;
    validate_experiment(spec);

    std::size_t solver_idx = 0;
    if (!opts.solver_name.empty()) {
        bool found = false;
        for (std::size_t c = 0; c < spec.solvers.size(); ++c)
            if (spec.solvers[c].name == opts.solver_name) {
                solver_idx = c;
                found = true;
                break;
            }
        if (!found) throw ConfigError("solver '" + opts.solver_name + "' is not configured");
    }

    Problem prob = build_problem(spec.problem);
    Penalty pen = make_penalty(spec.penalty, prob.system.domain_shape());
    const double level = spec.levels.front();

    // Mirrors the bench seeding with level index 0 and trial 0.
    Rng noise_rng = Rng::stream(spec.base_seed, 0);
    NoisyData nd = add_noise(prob.system, prob.truth.clean, spec.noise_model, level, noise_rng);
    ForwardSystem noisy = prob.system.with_data(std::move(nd.data), std::move(nd.delta));

    SolverConfig cfg = spec.solvers[solver_idx].cfg;
    cfg.seed = Rng::mix(Rng::mix(spec.base_seed ^ Rng::mix(1)) + solver_idx);

    std::vector<double> xi0(prob.system.domain_dim(), spec.xi0);
    RunOptions ropts;
    ropts.xi0 = xi0;
    RunRecord rec = run(noisy, pen, cfg, spec.solvers[solver_idx].mode, ropts);

    const double err = relative_error(rec.final_x, prob.truth.x_dagger);
    std::filesystem::create_directories(opts.out_dir);
    write_trace_jsonl(opts.out_dir / "trace.jsonl", rec, err);
    write_trace_binary(opts.out_dir / "trace.bin", rec);
    const GridShape& g = prob.system.domain_shape();
    write_f64(opts.out_dir / "reconstruction.f64", rec.final_x, {g.rows, g.cols});
    {
        std::ofstream t(opts.out_dir / "timing.json");
        t << "{\"wall_s\": " << format_double(rec.wall_seconds) << "}\n";
    }
    std::cout << "solve " << spec.problem_name << " solver=" << spec.solvers[solver_idx].name
              << " level=" << format_double(level) << " steps=" << rec.steps
              << (rec.safeguard_hit() ? " (safeguard)" : "") << " error=" << format_double(err)
              << "\n";
    return 0;
}

int cmd_bench(const ExperimentSpec& spec_in, const BenchOptions& opts) {
    ExperimentSpec spec = spec_in;
    if (opts.seed_set) spec.base_seed = opts.seed;
    const std::size_t workers = resolve_workers(opts.workers);
    BenchResult result = monte_carlo(spec, workers);
    std::filesystem::create_directories(opts.out_dir);
    write_results_csv(opts.out_dir / "results.csv", spec, result);
    write_results_json(opts.out_dir / "results.json", spec, result);
    for (const auto& ts : result.stats)
        std::cout << spec.problem_name << " " << ts.solver << " level="
                  << format_double(ts.level) << " iter=" << format_double(ts.mean_iter)
                  << " time=" << format_double(ts.mean_wall)
                  << " error=" << format_double(ts.mean_error)
                  << " safeguards=" << ts.safeguard_count << "\n";
    std::cout << "stopping_violations=" << result.stopping_violations << "\n";
    return 0;
}

int cmd_check(std::uint64_t seed) {
    const auto results = run_all_checks(seed);
    std::size_t failed = 0;
    for (const auto& r : results) {
        std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name << "  (" << r.detail << ")\n";
        if (!r.pass) ++failed;
    }
    std::cout << results.size() << " checks, " << failed << " failed\n";
    return failed == 0 ? 0 : 1;
}

int cmd_export_problem(const ExperimentSpec& spec, const std::filesystem::path& out_dir) {
    Problem prob = build_problem(spec.problem);
    std::filesystem::create_directories(out_dir);
    const GridShape& g = prob.system.domain_shape();
    write_f64(out_dir / "phantom.f64", prob.truth.x_dagger, {g.rows, g.cols});

    const std::size_t N = prob.system.block_count();
    const std::size_t dim = prob.system.kernel().residual_dim(0);
    write_f64(out_dir / "clean_data.f64", prob.truth.clean.flat,
              dim == 1 ? std::vector<std::size_t>{N} : std::vector<std::size_t>{N, dim});

    if (prob.system.kernel().linear()) {
        const std::size_t q = prob.system.domain_dim();
        if (N * q * 8 > (1ull << 30))
            throw ConfigError("export-problem: dense system matrix would exceed 1 GiB; "
                              "export at a smaller size");
        std::vector<double> matrix(N * q);
        std::vector<double> dummy(q, 0.0), row(q);
        const double one = 1.0;
        for (std::size_t i = 0; i < N; ++i) {
            prob.system.kernel().adjoint(i, dummy, std::span<const double>(&one, 1), row);
            std::copy(row.begin(), row.end(), matrix.begin() + static_cast<long>(i * q));
        }
        write_f64(out_dir / "system_matrix.f64", matrix, {N, q});
    }
    std::cout << "exported " << spec.problem_name << " to " << out_dir.string() << "\n";
    return 0;
}

}  // namespace regshb
