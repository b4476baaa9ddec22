#pragma once

#include <string>
#include <vector>

#include "hierctl/runs.hpp"
#include "hierctl/simulation.hpp"

namespace hierctl {

// Preset orderings expected of the benchmark: ours-M0 lowest mean_ekin,
// ours-0I lowest mean_l, ours-MI lowest mean_sum (ties within 1e-9
// relative allowed), dynghc-I and ghc rows equal to 1e-9. Returns one
// message per violation; presets absent from the table are reported too.
std::vector<std::string> check_benchmark_orderings(const BenchmarkTable& table);

// Locale-independent %.17g.
std::string format_double(double v);

std::string benchmark_json(const BenchmarkTable& table);
std::string benchmark_text(const BenchmarkTable& table);

// Stack trace: t, q*, qd_cmd*, eta_*, a_31, a_32, a_34, dyncon, contribution
// columns per task, motion_computed*, min_distance.
std::string trace_csv(const std::vector<TraceRow>& trace);

std::string labeled_traces_csv(const LabeledTraces& traces);

std::string perf_json(const PerfReport& report);

// Throws IoError when the file cannot be written.
void write_text_file(const std::string& path, const std::string& content);

}  // namespace hierctl
