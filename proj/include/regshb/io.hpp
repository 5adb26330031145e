#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "regshb/harness.hpp"
#include "regshb/solver.hpp"

namespace regshb {

// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double v);

// Flat little-endian float64 array plus a JSON sidecar (same path with an
// extra .json suffix) describing shape, dtype and element order.
void write_f64(const std::filesystem::path& path, std::span<const double> data,
               const std::vector<std::size_t>& shape);
std::vector<double> read_f64(const std::filesystem::path& path,
                             std::vector<std::size_t>* shape_out = nullptr);

// Run trace as JSON lines: one StepOutcome per line, then a summary line.
// Wall time is not part of the trace; it lives in a separate timing file.
void write_trace_jsonl(const std::filesystem::path& path, const RunRecord& rec,
                       double final_error);

// Compact binary trace (documented in the README).
void write_trace_binary(const std::filesystem::path& path, const RunRecord& rec);

struct CsvRow {
    std::string problem, solver;
    double level = 0.0;
    std::size_t trials = 0;
    double mean_iter = 0.0;
    double mean_time_s = 0.0;
    double mean_error = 0.0;
    std::size_t safeguard_hits = 0;
};

void write_results_csv(const std::filesystem::path& path, const ExperimentSpec& spec,
                       const BenchResult& result);
std::vector<CsvRow> parse_results_csv(const std::filesystem::path& path);

void write_results_json(const std::filesystem::path& path, const ExperimentSpec& spec,
                        const BenchResult& result);

std::string noise_model_name(NoiseModel m);
std::string run_mode_name(RunMode m);

}  // namespace regshb
