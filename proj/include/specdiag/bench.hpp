#pragma once

// Runtime R, speedup S = T1/Tp and efficiency E = S/p of the speculative
// provider against the sequential one, across core counts and look-ahead
// budgets. Wall time covers the fastdiag call only.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "specdiag/diagcore.hpp"
#include "specdiag/error.hpp"
#include "specdiag/ingest.hpp"
#include "specdiag/speculate.hpp"
#include "specdiag/task.hpp"

namespace specdiag {

// maxGCC per core count: either #cores - 1 or a fixed value.
struct MaxGccPolicy {
  std::optional<std::size_t> fixed;

  std::size_t for_cores(std::size_t cores) const { return fixed ? *fixed : (cores > 0 ? cores - 1 : 0); }

  // "cores-1", "fixed:K" or a bare integer.
  static MaxGccPolicy parse(const std::string& text) {
    if (text == "cores-1" || text == "coresMinusOne") return {};
    std::string digits = text.rfind("fixed:", 0) == 0 ? text.substr(6) : text;
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit))
      throw ContractViolation("maxgcc policy must be 'cores-1' or 'fixed:K', got '" + text + "'");
    return {static_cast<std::size_t>(std::stoull(digits))};
  }

  std::string str() const { return fixed ? "fixed:" + std::to_string(*fixed) : "cores-1"; }
};

struct BenchOptions {
  std::vector<std::size_t> cores{1};
  MaxGccPolicy max_gcc;
  std::size_t repetitions = 3;
  std::chrono::microseconds latency{0};
  // Overrides the default pool size of cores - 1.
  std::optional<std::size_t> workers;

  void validate() const {
    if (repetitions < 1) throw ContractViolation("repetitions must be at least 1");
    if (cores.empty()) throw ContractViolation("at least one core count is required");
    for (auto c : cores)
      if (c < 1) throw ContractViolation("core counts must be at least 1");
    if (latency.count() < 0) throw ContractViolation("latency must not be negative");
  }
};

struct BenchConfig {
  std::filesystem::path kb;
  std::filesystem::path requirements_dir;
  std::filesystem::path output = "bench.csv";
  BenchOptions options;
};

struct BenchRecord {
  std::string task;
  std::size_t cardinality = 0;
  std::size_t cores = 1;
  std::size_t max_gcc = 0;
  std::size_t run = 0;
  double wall_s = 0;
  std::uint64_t solver_calls = 0;
  std::uint64_t lookup_hits = 0;
  std::vector<std::string> diagnosis;
};

struct BenchError {
  std::string task;
  std::string message;
};

struct BenchReport {
  std::vector<BenchRecord> records;
  std::vector<BenchError> errors;
};

struct NamedRequirements {
  std::string name;
  ConstraintSet requirements;
};

inline double speedup(double t1, double tp) {
  if (!(t1 > 0) || !(tp > 0)) throw ContractViolation("speedup needs positive times");
  return t1 / tp;
}

inline double efficiency(double s, std::size_t p) {
  if (p < 1 || !(s > 0)) throw ContractViolation("efficiency needs p >= 1 and s > 0");
  return s / static_cast<double>(p);
}

// One task, one setting, one run.
inline BenchRecord bench_once(const DiagnosisTask& task, const std::string& name, std::size_t cores,
                              std::size_t run, const BenchOptions& opt) {
  BenchRecord rec;
  rec.task = name;
  rec.cores = cores;
  rec.run = run;
  FastDiagResult result;
  if (cores == 1) {
    SequentialProvider provider(builtin_backend(), opt.latency);
    result = fastdiag(task, provider);
  } else {
    SpeculationOptions so;
    so.workers = opt.workers.value_or(cores - 1);
    so.max_gcc = opt.max_gcc.for_cores(cores);
    so.latency = opt.latency;
    rec.max_gcc = so.max_gcc;
    SpeculativeProvider provider(so);
    result = fastdiag(task, provider);
  }
  rec.cardinality = result.diagnosis.removed().size();
  rec.wall_s = std::chrono::duration<double>(result.stats.wall_time).count();
  rec.solver_calls = result.stats.solver_calls;
  rec.lookup_hits = result.stats.lookup_hits;
  rec.diagnosis = result.diagnosis.removed().ids();
  return rec;
}

// Runs every (task, cores, repetition). A failing task yields an error
// entry and the run continues with the next task.
inline BenchReport run_bench(const KnowledgeBase& kb, const std::vector<NamedRequirements>& tasks,
                             const BenchOptions& opt) {
  opt.validate();
  BenchReport report;
  for (const auto& t : tasks) {
    try {
      DiagnosisTask task(t.requirements, kb.constraints, kb.variables);
      if (check_union({std::cref(task.background()), std::cref(task.requirements())}).consistent)
        throw Error("requirements are consistent with the knowledge base");
      std::vector<BenchRecord> recs;
      for (auto cores : opt.cores)
        for (std::size_t r = 1; r <= opt.repetitions; ++r) recs.push_back(bench_once(task, t.name, cores, r, opt));
      for (const auto& rec : recs)
        if (rec.diagnosis != recs.front().diagnosis)
          throw Error("diagnosis differs between settings (cores " + std::to_string(rec.cores) + ")");
      report.records.insert(report.records.end(), recs.begin(), recs.end());
    } catch (const std::exception& e) {
      report.errors.push_back({t.name, e.what()});
    }
  }
  return report;
}

namespace detail {

// req_2 before req_10.
inline bool natural_less(const std::string& a, const std::string& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (std::isdigit(static_cast<unsigned char>(a[i])) && std::isdigit(static_cast<unsigned char>(b[j]))) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && std::isdigit(static_cast<unsigned char>(a[ie]))) ++ie;
      while (je < b.size() && std::isdigit(static_cast<unsigned char>(b[je]))) ++je;
      const auto na = std::stoull(a.substr(i, ie - i));
      const auto nb = std::stoull(b.substr(j, je - j));
      if (na != nb) return na < nb;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  return a.size() - i < b.size() - j;
}

}  // namespace detail

inline BenchReport run_bench(const BenchConfig& config) {
  config.options.validate();
  const KnowledgeBase kb = load_kb(config.kb);
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(config.requirements_dir))
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
    return detail::natural_less(a.filename().string(), b.filename().string());
  });

  BenchReport report;
  std::vector<NamedRequirements> tasks;
  for (const auto& f : files) {
    try {
      tasks.push_back({f.stem().string(), load_requirements(f, kb)});
    } catch (const std::exception& e) {
      report.errors.push_back({f.stem().string(), e.what()});
    }
  }
  BenchReport ran = run_bench(kb, tasks, config.options);
  report.records = std::move(ran.records);
  report.errors.insert(report.errors.end(), ran.errors.begin(), ran.errors.end());
  return report;
}

// Mean R per (diagnosis cardinality, cores); S against the cores = 1 mean
// of the same cardinality; E = S/p, plus S/(p-1) for comparison with
// tables that count only the speculating cores.
struct AggregateRow {
  std::size_t cardinality = 0;
  std::size_t cores = 0;
  std::size_t samples = 0;
  double mean_r = 0;
  std::optional<double> s;
  std::optional<double> e;
  std::optional<double> e_excl;
};

inline std::vector<AggregateRow> aggregate(const std::vector<BenchRecord>& records) {
  std::map<std::pair<std::size_t, std::size_t>, std::pair<double, std::size_t>> sums;
  for (const auto& r : records) {
    auto& [sum, n] = sums[{r.cardinality, r.cores}];
    sum += r.wall_s;
    ++n;
  }
  std::vector<AggregateRow> rows;
  for (const auto& [group, acc] : sums) {
    AggregateRow row;
    row.cardinality = group.first;
    row.cores = group.second;
    row.samples = acc.second;
    row.mean_r = acc.first / static_cast<double>(acc.second);
    rows.push_back(row);
  }
  for (auto& row : rows) {
    if (row.cores == 1) continue;
    auto base = std::find_if(rows.begin(), rows.end(), [&](const AggregateRow& r) {
      return r.cardinality == row.cardinality && r.cores == 1;
    });
    if (base == rows.end() || !(base->mean_r > 0) || !(row.mean_r > 0)) continue;
    row.s = speedup(base->mean_r, row.mean_r);
    row.e = efficiency(*row.s, row.cores);
    row.e_excl = *row.s / static_cast<double>(row.cores - 1);
  }
  return rows;
}

inline std::filesystem::path aggregate_path(const std::filesystem::path& raw) {
  auto p = raw;
  p.replace_extension();
  p += ".agg.csv";
  return p;
}

namespace detail {

inline std::string fmt(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

inline std::string fmt_opt(const std::optional<double>& v, int precision) { return v ? fmt(*v, precision) : ""; }

inline std::string join(const std::vector<std::string>& ids, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += sep;
    out += ids[i];
  }
  return out;
}

}  // namespace detail

inline void write_records_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
  out << "task,card,cores,maxgcc,run,wall_s,solver_calls,lookup_hits,diagnosis\n";
  for (const auto& r : records)
    out << r.task << ',' << r.cardinality << ',' << r.cores << ',' << r.max_gcc << ',' << r.run << ','
        << detail::fmt(r.wall_s, 6) << ',' << r.solver_calls << ',' << r.lookup_hits << ','
        << detail::join(r.diagnosis, " ") << '\n';
}

inline void write_aggregate_csv(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "card,cores,samples,mean_r_s,speedup,efficiency,efficiency_excl\n";
  for (const auto& r : rows)
    out << r.cardinality << ',' << r.cores << ',' << r.samples << ',' << detail::fmt(r.mean_r, 6) << ','
        << detail::fmt_opt(r.s, 4) << ',' << detail::fmt_opt(r.e, 4) << ',' << detail::fmt_opt(r.e_excl, 4) << '\n';
}

// Writes the raw records to `path` and the aggregate next to it as
// <stem>.agg.csv. Returns the aggregate rows.
inline std::vector<AggregateRow> emit_csv(const std::vector<BenchRecord>& records, const std::filesystem::path& path) {
  if (records.empty()) throw ContractViolation("no benchmark records to write");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto rows = aggregate(records);
  {
    std::ofstream out(path);
    write_records_csv(out, records);
    if (!out) throw Error("cannot write " + path.string());
  }
  {
    const auto agg = aggregate_path(path);
    std::ofstream out(agg);
    write_aggregate_csv(out, rows);
    if (!out) throw Error("cannot write " + agg.string());
  }
  return rows;
}

// R/S/E per cardinality and core count, one block per cardinality.
inline std::string format_table(const std::vector<AggregateRow>& rows) {
  std::ostringstream out;
  std::size_t card = static_cast<std::size_t>(-1);
  for (const auto& r : rows) {
    if (r.cardinality != card) {
      card = r.cardinality;
      out << "|diag|=" << card << '\n';
    }
    out << "  cores=" << r.cores << "  R=" << detail::fmt(r.mean_r, 4);
    if (r.s) out << "  S=" << detail::fmt(*r.s, 2) << "  E=" << detail::fmt(*r.e, 2);
    out << '\n';
  }
  return out.str();
}

}  // namespace specdiag
