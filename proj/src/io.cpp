#include "regshb/io.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "regshb/errors.hpp"

namespace regshb {

using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{}) throw InputError("bad numeric field: '" + s + "'");
    return v;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open for writing: " + path.string());
    out << text;
}

json boxplot_json(const BoxplotSummary& b) {
    return json{{"median", b.median},     {"q25", b.q25},
                {"q75", b.q75},           {"whisker_lo", b.whisker_lo},
                {"whisker_hi", b.whisker_hi}, {"outliers", b.outliers}};
}

}  // namespace

void write_f64(const std::filesystem::path& path, std::span<const double> data,
               const std::vector<std::size_t>& shape) {
    std::size_t count = 1;
    for (std::size_t s : shape) count *= s;
    if (count != data.size()) throw InputError("write_f64: shape does not match data size");

    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open for writing: " + path.string());
    static_assert(sizeof(double) == 8);
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));

    json side{{"dtype", "float64"},
              {"byte_order", "little"},
              {"order", "row-major"},
              {"shape", shape}};
    write_text(path.string() + ".json", side.dump(2) + "\n");
}

std::vector<double> read_f64(const std::filesystem::path& path,
                             std::vector<std::size_t>* shape_out) {
    std::ifstream side(path.string() + ".json");
    if (!side) throw InputError("missing sidecar for " + path.string());
    json meta = json::parse(side);
    std::size_t count = 1;
    std::vector<std::size_t> shape;
    for (const auto& s : meta.at("shape")) {
        shape.push_back(s.get<std::size_t>());
        count *= shape.back();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::vector<double> data(count);
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double))
        throw InputError("short read: " + path.string());
    if (shape_out) *shape_out = std::move(shape);
    return data;
}

namespace {

const char* stop_name(StopReason s) {
    switch (s) {
        case StopReason::ActiveSetEmpty: return "active_set_empty";
        case StopReason::Safeguard: return "safeguard";
        case StopReason::Horizon: return "horizon";
    }
    return "?";
}

}  // namespace

void write_trace_jsonl(const std::filesystem::path& path, const RunRecord& rec,
                       double final_error) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open for writing: " + path.string());
    std::size_t n = 0;
    for (const auto& o : rec.outcomes) {
        json line{{"n", n++},
                  {"drawn", o.drawn},
                  {"res", o.residual_norm},
                  {"t", o.t},
                  {"beta", o.beta},
                  {"removed", o.removed},
                  {"active", o.active_size}};
        out << line.dump() << "\n";
    }
    json summary{{"summary", true},
                 {"steps", rec.steps},
                 {"stop", stop_name(rec.stop)}};
    if (rec.stop == StopReason::ActiveSetEmpty) summary["n_delta"] = rec.n_delta;
    if (std::isfinite(final_error)) summary["final_error"] = final_error;
    out << summary.dump() << "\n";
}

void write_trace_binary(const std::filesystem::path& path, const RunRecord& rec) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open for writing: " + path.string());
    auto put_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    auto put_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
    auto put_f64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };

    out.write("SHBT", 4);
    put_u32(1);  // version
    put_u64(rec.outcomes.size());
    for (const auto& o : rec.outcomes) {
        put_u32(static_cast<std::uint32_t>(o.drawn.size()));
        for (std::uint32_t i : o.drawn) put_u32(i);
        put_f64(o.residual_norm);
        put_f64(o.t);
        put_f64(o.beta);
        put_u32(o.removed ? 1u : 0u);
        put_u32(static_cast<std::uint32_t>(o.active_size));
    }
    put_u64(rec.steps);
    put_u32(static_cast<std::uint32_t>(rec.stop));
    put_u64(rec.stop == StopReason::ActiveSetEmpty ? rec.n_delta : 0);
    put_u64(rec.final_x.size());
    for (double v : rec.final_x) put_f64(v);
}

void write_results_csv(const std::filesystem::path& path, const ExperimentSpec& spec,
                       const BenchResult& result) {
    std::string text =
        "problem,solver,level,trials,mean_iter,mean_time_s,mean_error,safeguard_hits\n";
    for (const auto& ts : result.stats) {
        text += spec.problem_name + "," + ts.solver + "," + format_double(ts.level) + "," +
                std::to_string(ts.samples.size()) + "," + format_double(ts.mean_iter) + "," +
                format_double(ts.mean_wall) + "," + format_double(ts.mean_error) + "," +
                std::to_string(ts.safeguard_count) + "\n";
    }
    write_text(path, text);
}

std::vector<CsvRow> parse_results_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) ||
        line != "problem,solver,level,trials,mean_iter,mean_time_s,mean_error,safeguard_hits")
        throw InputError("unexpected CSV header in " + path.string());
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (;;) {
            const auto pos = line.find(',', start);
            f.push_back(line.substr(start, pos - start));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        if (f.size() != 8) throw InputError("bad CSV row: " + line);
        CsvRow r;
        r.problem = f[0];
        r.solver = f[1];
        r.level = parse_double(f[2]);
        r.trials = static_cast<std::size_t>(std::stoull(f[3]));
        r.mean_iter = parse_double(f[4]);
        r.mean_time_s = parse_double(f[5]);
        r.mean_error = parse_double(f[6]);
        r.safeguard_hits = static_cast<std::size_t>(std::stoull(f[7]));
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string noise_model_name(NoiseModel m) {
    switch (m) {
        case NoiseModel::UniformSup: return "uniform_sup";
        case NoiseModel::GaussianAbsolute: return "gaussian_absolute";
        case NoiseModel::GaussianRelativePerBlock: return "gaussian_relative";
    }
    return "?";
}

std::string run_mode_name(RunMode m) {
    switch (m) {
        case RunMode::NoisyShb: return "shb";
        case RunMode::ExactShb: return "exact";
        case RunMode::Sgd: return "sgd";
        case RunMode::MiniBatch: return "minibatch";
    }
    return "?";
}

void write_results_json(const std::filesystem::path& path, const ExperimentSpec& spec,
                        const BenchResult& result) {
    json root;
    root["problem"] = spec.problem_name;
    root["noise_model"] = noise_model_name(spec.noise_model);
    root["trials"] = spec.trials;
    root["base_seed"] = spec.base_seed;
    root["stopping_violations"] = result.stopping_violations;
    json arr = json::array();
    for (const auto& ts : result.stats) {
        std::vector<double> errs, iters;
        errs.reserve(ts.samples.size());
        for (const auto& s : ts.samples) {
            errs.push_back(s.error);
            iters.push_back(static_cast<double>(s.n_delta));
        }
        json entry{{"solver", ts.solver},
                   {"level", ts.level},
                   {"mean_iter", ts.mean_iter},
                   {"mean_error", ts.mean_error},
                   {"safeguard_hits", ts.safeguard_count},
                   {"samples", json{{"error", errs}, {"n_delta", iters}}},
                   {"boxplot_error", boxplot_json(boxplot_stats(errs))},
                   {"boxplot_iter", boxplot_json(boxplot_stats(iters))},
                   {"timing", json{{"mean_wall_s", ts.mean_wall}}}};
        arr.push_back(std::move(entry));
    }
    root["results"] = std::move(arr);
    write_text(path, root.dump(2) + "\n");
}

}  // namespace regshb
