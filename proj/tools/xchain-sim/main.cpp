// xchain-sim: runs scenario files, fault sweeps and trace comparisons.
#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "xchain/scenario/scenario.hpp"

namespace fs = std::filesystem;
using namespace xchain;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kError = 2;

struct Common {
  std::optional<std::uint64_t> seed;
  std::string trace_out;
  std::optional<sim::Tick> max_ticks;
  std::string locked_view_policy;
  bool verbose = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Simulation seed (overrides the file and XCHAIN_SIM_SEED)");
  cmd->add_option("--trace-out", c.trace_out, "Write the run's trace to this file");
  cmd->add_option("--max-ticks", c.max_ticks, "Stop the simulation after this many ticks");
  cmd->add_option("--locked-view-policy", c.locked_view_policy,
                  "Views of locked contracts: fail-if-locked, assume-ignored or assume-committed");
  cmd->add_flag("-v,--verbose", c.verbose, "Print details of passing checks too");
}

scenario::RunOptions options_of(const Common& c) {
  scenario::RunOptions o;
  o.seed = c.seed;
  o.max_ticks = c.max_ticks;
  if (!c.locked_view_policy.empty()) {
    auto p = ledger::parse_locked_view_policy(c.locked_view_policy);
    if (!p) throw scenario::ScenarioError("unknown locked view policy '" + c.locked_view_policy + "'");
    o.locked_view_policy = *p;
  }
  return o;
}

void print_sweep(const std::vector<scenario::CellReport>& cells, bool verbose) {
  std::size_t width = 4;
  for (const auto& c : cells) width = std::max(width, c.name.size());
  std::cout << std::left << std::setw(static_cast<int>(width)) << "cell" << "  expect   coordination  commits  ignores  atomic  result\n";
  std::size_t matched = 0, atomic = 0;
  for (const auto& c : cells) {
    matched += c.matches ? 1 : 0;
    atomic += c.atomic ? 1 : 0;
    std::cout << std::left << std::setw(static_cast<int>(width)) << c.name << "  " << std::setw(7)
              << scenario::to_string(c.expect) << "  " << std::setw(12) << c.coordination_state << "  "
              << std::setw(7) << c.commits << "  " << std::setw(7) << c.ignores << "  " << std::setw(6)
              << (c.atomic ? "yes" : "NO") << "  " << (c.matches ? "PASS" : "FAIL") << "\n";
    if (!c.matches || verbose) std::cout << "    faults: " << c.faults << "\n    " << c.detail << "\n";
  }
  std::cout << "sweep: " << cells.size() << " cells, " << matched << " as expected, " << atomic << " atomic\n";
}

bool sweep_ok(const std::vector<scenario::CellReport>& cells) {
  return std::all_of(cells.begin(), cells.end(), [](const auto& c) { return c.matches; });
}

int cmd_run(const std::string& file, const Common& c) {
  auto s = scenario::load_scenario(file);
  auto opt = options_of(c);
  auto rep = scenario::run_scenario(s, opt);
  if (!c.trace_out.empty()) {
    std::ofstream out(c.trace_out);
    if (!out) throw scenario::ScenarioError(c.trace_out + ": cannot write trace");
    out << rep.trace;
  }
  std::cout << "scenario " << rep.scenario << " (seed " << rep.seed << ", " << rep.run.final_tick << " ticks)\n";
  std::size_t passed = 0;
  for (const auto& r : rep.results) {
    passed += r.passed ? 1 : 0;
    std::cout << "  " << (r.passed ? "PASS" : "FAIL") << "  " << r.description << "\n";
    if (!r.passed || c.verbose) std::cout << "        " << r.detail << "\n";
  }
  bool ok = rep.passed();
  if (s.sweep.present) {
    auto cells = scenario::run_sweep(s, opt);
    print_sweep(cells, c.verbose);
    ok = ok && sweep_ok(cells);
  }
  std::cout << "result: " << (ok ? "PASS" : "FAIL") << " (" << passed << "/" << rep.results.size() << " checks)\n";
  return ok ? kPass : kFail;
}

int cmd_sweep(const std::string& file, const Common& c, const std::string& fault_kind, const std::string& steps,
              unsigned jobs) {
  auto s = scenario::load_scenario(file);
  if (!s.sweep.present) throw scenario::ScenarioError(file + ": no sweep section");
  scenario::SweepFilter filter;
  filter.jobs = jobs;
  if (!fault_kind.empty()) {
    filter.fault_kind = sim::parse_fault_kind(fault_kind);
    if (!filter.fault_kind) throw scenario::ScenarioError("unknown fault kind '" + fault_kind + "'");
  }
  if (!steps.empty() && steps != "all") {
    std::stringstream ss(steps);
    for (std::string step; std::getline(ss, step, ',');) filter.steps.push_back(step);
  }
  auto cells = scenario::run_sweep(s, options_of(c), filter);
  std::cout << "scenario " << s.name << " sweep over " << s.sweep.tx << "\n";
  print_sweep(cells, c.verbose);
  return sweep_ok(cells) ? kPass : kFail;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_trace_diff(const std::string& a, const std::string& b, bool ignore_digests) {
  sim::Trace ta, tb;
  try {
    ta = sim::Trace::parse(read_file(a));
    tb = sim::Trace::parse(read_file(b));
  } catch (const std::invalid_argument& e) {
    throw scenario::ScenarioError(e.what());
  }
  auto d = sim::diff_traces(ta, tb, ignore_digests);
  if (d.identical()) {
    std::cout << "traces identical (" << ta.records().size() << " records)\n";
    return kPass;
  }
  std::cout << "first difference at record " << d.first_difference << "\n";
  for (const auto& l : d.lines) std::cout << l << "\n";
  return kFail;
}

int cmd_list(const std::string& dir) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".scn") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  int status = kPass;
  for (const auto& f : files) {
    try {
      auto s = scenario::load_scenario(f.string());
      std::cout << std::left << std::setw(28) << f.filename().string() << " " << s.name;
      if (s.sweep.present) std::cout << " [sweep]";
      if (!s.description.empty()) std::cout << ": " << s.description;
      std::cout << "\n";
    } catch (const scenario::ScenarioError& e) {
      std::cout << std::left << std::setw(28) << f.filename().string() << " PARSE ERROR " << e.what() << "\n";
      status = kError;
    }
  }
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic simulator for atomic crosschain transactions"};
  app.require_subcommand(1);

  Common run_opts, sweep_opts;
  std::string run_file, sweep_file, fault_kind, steps, trace_a, trace_b, list_dir = "scenarios";
  unsigned jobs = 0;
  bool ignore_digests = false;

  auto* run = app.add_subcommand("run", "Run a scenario and check its assertions");
  run->add_option("file", run_file, "Scenario file")->required();
  add_common(run, run_opts);

  auto* sweep = app.add_subcommand("sweep", "Run a scenario once per fault cell");
  sweep->add_option("file", sweep_file, "Scenario file with a sweep section")->required();
  sweep->add_option("--fault-kind", fault_kind, "Only cells made of this fault kind");
  sweep->add_option("--steps", steps, "'all' or a comma-separated list of crash steps");
  sweep->add_option("--jobs", jobs, "Parallel cells (default: hardware threads)");
  add_common(sweep, sweep_opts);

  auto* diff = app.add_subcommand("trace-diff", "Compare two trace files");
  diff->add_option("a", trace_a)->required();
  diff->add_option("b", trace_b)->required();
  diff->add_flag("--ignore-digests", ignore_digests, "Do not compare payload digests");

  auto* list = app.add_subcommand("list-scenarios", "List the scenario files in a directory");
  list->add_option("dir", list_dir, "Directory (default: scenarios)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kPass : kError;
  }

  try {
    if (*run) return cmd_run(run_file, run_opts);
    if (*sweep) return cmd_sweep(sweep_file, sweep_opts, fault_kind, steps, jobs);
    if (*diff) return cmd_trace_diff(trace_a, trace_b, ignore_digests);
    if (*list) return cmd_list(list_dir);
  } catch (const scenario::ScenarioError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
