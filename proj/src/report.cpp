#include "hierctl/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hierctl/errors.hpp"

namespace hierctl {
namespace {

constexpr const char* kTaskNames[kStackSize] = {"coll", "jla", "motion", "mnp"};

void append(std::string& line, double v) {
  if (!line.empty()) {
    line += ',';
  }
  line += format_double(v);
}

void append(std::string& line, const std::string& name) {
  if (!line.empty()) {
    line += ',';
  }
  line += name;
}

const BenchmarkRow* find_row(const BenchmarkTable& table, const std::string& name) {
  for (const BenchmarkRow& r : table.rows) {
    if (r.preset == name) {
      return &r;
    }
  }
  return nullptr;
}

bool at_most(double value, double minimum) {
  return value <= minimum + 1e-9 * std::max(1.0, std::abs(minimum));
}

}  // namespace

std::vector<std::string> check_benchmark_orderings(const BenchmarkTable& table) {
  std::vector<std::string> failures;
  std::vector<const BenchmarkRow*> rows;
  for (const ControllerPreset& p : hierarchy_presets()) {
    const BenchmarkRow* r = find_row(table, p.name);
    if (r == nullptr) {
      failures.push_back("preset " + p.name + " missing from the table");
    } else {
      rows.push_back(r);
    }
  }
  if (!failures.empty()) {
    return failures;
  }
  struct Column {
    const char* name;
    double BenchmarkRow::*field;
    const char* winner;
  };
  for (const Column c : {Column{"mean_ekin", &BenchmarkRow::mean_ekin, "ours-M0"},
                         Column{"mean_l", &BenchmarkRow::mean_l, "ours-0I"},
                         Column{"mean_sum", &BenchmarkRow::mean_sum, "ours-MI"}}) {
    double best = std::numeric_limits<double>::infinity();
    std::string best_name;
    for (const BenchmarkRow* r : rows) {
      if (r->*c.field < best) {
        best = r->*c.field;
        best_name = r->preset;
      }
    }
    const double value = find_row(table, c.winner)->*c.field;
    if (!(at_most(value, best))) {
      failures.push_back(std::string(c.winner) + " is not minimal in " + c.name + " (" +
                         format_double(value) + " vs " + best_name + " " + format_double(best) + ")");
    }
  }
  const BenchmarkRow* dyn = find_row(table, "dynghc-I");
  const BenchmarkRow* ghc = find_row(table, "ghc");
  for (double BenchmarkRow::*f : {&BenchmarkRow::mean_ekin, &BenchmarkRow::mean_l, &BenchmarkRow::mean_sum}) {
    if (!(std::abs(dyn->*f - ghc->*f) <= 1e-9)) {
      failures.push_back("dynghc-I and ghc rows differ");
      break;
    }
  }
  return failures;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string benchmark_json(const BenchmarkTable& table) {
  nlohmann::ordered_json root;
  root["seed"] = table.seed;
  root["scenarios"] = table.scenarios;
  root["excluded"] = table.excluded;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const BenchmarkRow& r : table.rows) {
    nlohmann::ordered_json row;
    row["preset"] = r.preset;
    row["mean_ekin"] = r.mean_ekin;
    row["mean_l"] = r.mean_l;
    row["mean_sum"] = r.mean_sum;
    row["n_completed"] = r.n_completed;
    row["seed"] = table.seed;
    rows.push_back(std::move(row));
  }
  root["configs"] = std::move(rows);
  return root.dump(2) + "\n";
}

std::string benchmark_text(const BenchmarkTable& table) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof line, "%-14s %12s %12s %12s %6s\n", "preset", "mean_ekin", "mean_l",
                "mean_sum", "n");
  out << line;
  for (const BenchmarkRow& r : table.rows) {
    std::snprintf(line, sizeof line, "%-14s %12.4f %12.4f %12.4f %6zu\n", r.preset.c_str(), r.mean_ekin,
                  r.mean_l, r.mean_sum, r.n_completed);
    out << line;
  }
  out << "seed " << table.seed << ", " << table.scenarios << " scenarios, " << table.excluded
      << " excluded\n";
  return out.str();
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::string out;
  if (trace.empty()) {
    return out;
  }
  const Eigen::Index n = trace.front().q.size();
  std::string header;
  append(header, std::string("t"));
  for (Eigen::Index i = 0; i < n; ++i) {
    append(header, "q" + std::to_string(i));
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    append(header, "qd_cmd" + std::to_string(i));
  }
  for (const char* name : kTaskNames) {
    append(header, std::string("eta_") + name);
  }
  for (const char* name : {"a_31", "a_32", "a_34", "dyncon"}) {
    append(header, std::string(name));
  }
  for (const char* name : kTaskNames) {
    for (Eigen::Index i = 0; i < n; ++i) {
      append(header, std::string("contrib_") + name + "_" + std::to_string(i));
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    append(header, "motion_computed" + std::to_string(i));
  }
  append(header, std::string("min_distance"));
  out += header + '\n';

  const std::size_t motion = index_of(StackTask::kMotion);
  for (const TraceRow& row : trace) {
    if (row.importances.size() != kStackSize || row.contributions.size() != kStackSize) {
      throw InputError("trace rows must come from the four-task stack");
    }
    std::string line;
    append(line, row.t);
    for (Eigen::Index i = 0; i < n; ++i) {
      append(line, row.q(i));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      append(line, row.qd(i));
    }
    for (double eta : row.importances) {
      append(line, eta);
    }
    append(line, row.priorities(motion, index_of(StackTask::kCollision)));
    append(line, row.priorities(motion, index_of(StackTask::kJointLimits)));
    append(line, row.priorities(motion, index_of(StackTask::kManipulability)));
    append(line, row.dyncon);
    for (const Vector& c : row.contributions) {
      for (Eigen::Index i = 0; i < n; ++i) {
        append(line, c(i));
      }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      append(line, row.motion_computed(i));
    }
    append(line, row.min_distance);
    out += line + '\n';
  }
  return out;
}

std::string labeled_traces_csv(const LabeledTraces& traces) {
  std::string out;
  std::string header;
  append(header, std::string("t"));
  for (const std::string& l : traces.labels) {
    append(header, l);
  }
  append(header, std::string("flagged"));
  out += header + '\n';
  for (std::size_t k = 0; k < traces.time.size(); ++k) {
    std::string line;
    append(line, traces.time[k]);
    for (const auto& v : traces.values) {
      append(line, v[k]);
    }
    append(line, std::string(traces.flagged[k] ? "1" : "0"));
    out += line + '\n';
  }
  return out;
}

std::string perf_json(const PerfReport& report) {
  nlohmann::ordered_json root;
  root["dof"] = report.dof;
  root["cycles"] = report.cycles;
  root["repeats"] = report.repeats;
  root["active_tasks"] = report.active_tasks;
  root["initial_importances"] = report.initial_importances;
  root["mean_active_tasks"] = report.mean_active_tasks;
  root["mean_ms"] = report.mean_ms;
  root["median_ms"] = report.median_ms;
  root["p99_ms"] = report.p99_ms;
  root["max_ms"] = report.max_ms;
  root["repeat_means_ms"] = report.repeat_means_ms;
  root["repeat_stddev_ms"] = report.repeat_stddev_ms;
  return root.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path + " for writing");
  }
  out << content;
  if (!out) {
    throw IoError("failed writing " + path);
  }
}

}  // namespace hierctl
