#pragma once

// The specdiag command line. run_cli() does all the work so tests can
// drive it in-process; tools/specdiag.cpp is a thin main().
//
// Exit codes: 0 diagnosis found (or command succeeded), 1 requirements
// consistent with the knowledge base, 2 any error.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "specdiag/bench.hpp"
#include "specdiag/diagcore.hpp"
#include "specdiag/error.hpp"
#include "specdiag/ingest.hpp"
#include "specdiag/oracle.hpp"
#include "specdiag/speculate.hpp"
#include "specdiag/task.hpp"

namespace specdiag {

constexpr int kExitFound = 0;
constexpr int kExitConsistent = 1;
constexpr int kExitError = 2;

namespace cli_detail {

inline std::string join_ids(const ConstraintSet& s) {
  std::string out;
  for (const auto& c : s) {
    if (!out.empty()) out += ' ';
    out += c->id();
  }
  return out;
}

inline std::string braces(const ConstraintSet& s) {
  std::string out = "{";
  for (const auto& c : s) {
    if (out.size() > 1) out += ", ";
    out += c->id();
  }
  return out + "}";
}

// SPECDIAG_THREADS wins over the computed pool size.
inline std::size_t worker_count(std::size_t fallback) {
  if (const char* env = std::getenv("SPECDIAG_THREADS"); env && *env) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (*end != '\0' || v == 0) throw ContractViolation("SPECDIAG_THREADS must be a positive integer");
    return v;
  }
  return fallback;
}

inline std::pair<std::size_t, std::size_t> parse_card(const std::string& text) {
  const auto colon = text.find(':');
  auto num = [&](const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
      throw ContractViolation("--card expects A or A:B, got '" + text + "'");
    return static_cast<std::size_t>(std::stoull(s));
  };
  if (colon == std::string::npos) {
    const auto v = num(text);
    return {v, v};
  }
  return {num(text.substr(0, colon)), num(text.substr(colon + 1))};
}

struct Inputs {
  std::string kb;
  std::string reqs;
};

inline void add_inputs(CLI::App* cmd, Inputs& in, bool need_reqs = true) {
  cmd->add_option("--kb", in.kb, "Knowledge base (.kb grammar, or DIMACS for .cnf/.dimacs)")
      ->required()
      ->check(CLI::ExistingFile);
  auto* r = cmd->add_option("--reqs", in.reqs, "Requirements file, one 'id: variable=t|f' per line, in preference order")
                ->check(CLI::ExistingFile);
  if (need_reqs) r->required();
}

struct DiagnoseArgs {
  Inputs in;
  bool parallel = false;
  std::optional<std::size_t> cores;
  std::optional<std::size_t> max_gcc;
  bool trace = false;
  bool global_budget = false;
  long latency_ms = 0;
};

inline int cmd_check(const Inputs& in, std::ostream& out) {
  const KnowledgeBase kb = load_kb(in.kb);
  ConstraintSet reqs;
  if (!in.reqs.empty()) reqs = load_requirements(in.reqs, kb);
  const bool ok = check_union({std::cref(kb.constraints), std::cref(reqs)}).consistent;
  out << (ok ? "consistent" : "inconsistent") << '\n';
  return ok ? kExitConsistent : kExitFound;
}

inline int cmd_diagnose(const DiagnoseArgs& a, std::ostream& out) {
  const KnowledgeBase kb = load_kb(a.in.kb);
  const ConstraintSet reqs = load_requirements(a.in.reqs, kb);
  DiagnosisTask task(reqs, kb.constraints, kb.variables);
  const auto latency = std::chrono::microseconds(a.latency_ms * 1000);

  FastDiagResult result;
  if (a.parallel) {
    const std::size_t cores = a.cores.value_or(std::max<std::size_t>(2, std::thread::hardware_concurrency()));
    if (cores < 1) throw ContractViolation("--cores must be at least 1");
    SpeculationOptions so;
    so.workers = worker_count(std::max<std::size_t>(1, cores - 1));
    so.max_gcc = a.max_gcc.value_or(cores - 1);
    so.budget_scope = a.global_budget ? BudgetScope::global : BudgetScope::per_wave;
    so.latency = latency;
    std::mutex out_mu;
    if (a.trace)
      so.trace = [&out, &out_mu](const std::string& event) {
        std::lock_guard lock(out_mu);
        out << "trace: " << event << '\n';
      };
    SpeculativeProvider provider(so);
    result = fastdiag(task, provider);
  } else {
    SequentialProvider provider(builtin_backend(), latency);
    result = fastdiag(task, provider);
  }

  if (result.diagnosis.empty()) {
    out << "consistent: empty diagnosis\n";
    return kExitConsistent;
  }
  out << "diagnosis: " << join_ids(result.diagnosis.removed()) << '\n';
  out << "mss: " << join_ids(result.diagnosis.complement()) << '\n';
  out << "solver calls: " << result.stats.solver_calls << '\n';
  if (a.parallel) out << "lookup hits: " << result.stats.lookup_hits << '\n';
  out << "wall time: " << detail::fmt(std::chrono::duration<double, std::milli>(result.stats.wall_time).count(), 3)
      << " ms\n";
  return kExitFound;
}

inline int cmd_oracle(const Inputs& in, std::size_t max_n, std::ostream& out) {
  const KnowledgeBase kb = load_kb(in.kb);
  DiagnosisTask task(load_requirements(in.reqs, kb), kb.constraints, kb.variables);
  const auto conflicts = all_minimal_conflicts(task, max_n);
  if (conflicts.empty()) {
    out << "no conflicts\n";
    return kExitConsistent;
  }
  out << "conflicts:\n";
  for (const auto& cs : conflicts) out << "  " << braces(cs) << '\n';
  out << "diagnoses:\n";
  for (const auto& d : all_minimal_diagnoses(task, max_n)) out << "  " << braces(d.removed()) << '\n';
  out << "preferred: " << braces(preferred_diagnosis(task, max_n).removed()) << '\n';
  return kExitFound;
}

inline int cmd_gen_reqs(const std::string& kb_path, GenOptions opt, const std::string& dir, std::ostream& out) {
  const KnowledgeBase kb = load_kb(kb_path);
  const auto specs = generate_requirements(kb, opt);
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const std::string name = "req_" + std::to_string(i + 1) + ".txt";
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream f(path, std::ios::binary);
    f << format_requirements(specs[i]);
    if (!f) throw Error("cannot write " + path.string());
    out << name << ' ' << specs[i].size() << '\n';
  }
  return kExitFound;
}

}  // namespace cli_detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Preferred minimal diagnosis of inconsistent requirements over a boolean knowledge base"};
  app.require_subcommand(1);

  cli_detail::Inputs check_in;
  auto* check = app.add_subcommand("check", "Report whether the requirements are consistent with the knowledge base");
  cli_detail::add_inputs(check, check_in, false);

  cli_detail::DiagnoseArgs da;
  auto* diagnose = app.add_subcommand("diagnose", "Compute the preferred minimal diagnosis");
  cli_detail::add_inputs(diagnose, da.in);
  auto* parallel = diagnose->add_flag("--parallel", da.parallel, "Use speculative look-ahead with a worker pool");
  diagnose->add_option("--cores", da.cores, "Cores to model; the pool gets cores-1 workers (default: all)")
      ->check(CLI::PositiveNumber)
      ->needs(parallel);
  diagnose->add_option("--maxgcc", da.max_gcc, "Speculative checks generated per look-ahead wave (default: cores-1)")
      ->needs(parallel);
  diagnose->add_flag("--global-budget", da.global_budget, "Cap speculative checks over the whole run, not per wave")
      ->needs(parallel);
  diagnose->add_flag("--trace", da.trace, "Stream lookup-table events (ADD/DONE) to stdout")->needs(parallel);
  diagnose->add_option("--latency", da.latency_ms, "Extra delay per solver call, in milliseconds")
      ->check(CLI::NonNegativeNumber);

  cli_detail::Inputs oracle_in;
  std::size_t max_n = kDefaultOracleLimit;
  auto* oracle = app.add_subcommand("oracle", "List all minimal conflicts and diagnoses by enumeration");
  cli_detail::add_inputs(oracle, oracle_in);
  oracle->add_option("--max-n", max_n, "Largest requirement count to enumerate")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{1}, std::size_t{30}));

  std::string gen_kb, gen_out, gen_card = "1";
  GenOptions gen;
  auto* gen_reqs = app.add_subcommand("gen-reqs", "Write random requirement sets inconsistent with the knowledge base");
  gen_reqs->add_option("--kb", gen_kb, "Knowledge base")->required()->check(CLI::ExistingFile);
  gen_reqs->add_option("--count", gen.count, "Number of requirement files")->required();
  gen_reqs->add_option("--card", gen_card, "Cardinality A or range A:B")->capture_default_str();
  gen_reqs->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  gen_reqs->add_option("--threads", gen.threads, "Threads for candidate checks (output is unaffected)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gen_reqs->add_option("--out", gen_out, "Output directory")->required();

  BenchConfig bc;
  std::string kb_path, reqs_dir, out_path = "bench.csv", policy = "cores-1";
  long bench_latency = 0;
  auto* bench = app.add_subcommand("bench", "Time sequential and speculative diagnosis over a requirement corpus");
  bench->add_option("--kb", kb_path, "Knowledge base")->required()->check(CLI::ExistingFile);
  bench->add_option("--reqs-dir", reqs_dir, "Directory of req_<i>.txt files")->required()->check(CLI::ExistingDirectory);
  bench->add_option("--cores", bc.options.cores, "Comma-separated core counts")->delimiter(',')->capture_default_str();
  bench->add_option("--maxgcc", policy, "cores-1 or fixed:K")->capture_default_str();
  bench->add_option("--repeat", bc.options.repetitions, "Repetitions per setting")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  bench->add_option("--latency", bench_latency, "Extra delay per solver call, in milliseconds")
      ->check(CLI::NonNegativeNumber);
  bench->add_option("--out", out_path, "Raw CSV path; the aggregate goes to <stem>.agg.csv")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*check) return cli_detail::cmd_check(check_in, out);
    if (*diagnose) return cli_detail::cmd_diagnose(da, out);
    if (*oracle) return cli_detail::cmd_oracle(oracle_in, max_n, out);
    if (*gen_reqs) {
      std::tie(gen.min_cardinality, gen.max_cardinality) = cli_detail::parse_card(gen_card);
      return cli_detail::cmd_gen_reqs(gen_kb, gen, gen_out, out);
    }
    if (*bench) {
      bc.kb = kb_path;
      bc.requirements_dir = reqs_dir;
      bc.output = out_path;
      bc.options.max_gcc = MaxGccPolicy::parse(policy);
      bc.options.latency = std::chrono::microseconds(bench_latency * 1000);
      if (std::getenv("SPECDIAG_THREADS")) bc.options.workers = cli_detail::worker_count(1);
      const BenchReport report = run_bench(bc);
      for (const auto& e : report.errors) err << "error: " << e.task << ": " << e.message << '\n';
      if (!report.records.empty()) out << format_table(emit_csv(report.records, bc.output));
      return report.errors.empty() && !report.records.empty() ? kExitFound : kExitError;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace specdiag
