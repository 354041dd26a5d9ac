#include <algorithm>
#include <atomic>
#include <exception>
#include <sstream>
#include <thread>

#include "xchain/scenario/scenario.hpp"

namespace xchain::scenario {

std::vector<SweepCell> sweep_cells(const Scenario& s, const SweepFilter& filter) {
  std::vector<SweepCell> cells;
  for (const auto& step : s.sweep.crash_steps) {
    if (!filter.steps.empty() && std::find(filter.steps.begin(), filter.steps.end(), step) == filter.steps.end()) {
      continue;
    }
    SweepCell c;
    c.name = "crash@" + step;
    sim::FaultSpec f;
    f.kind = sim::FaultKind::CrashNode;
    f.step = step;
    c.faults.push_back(f);
    auto it = s.sweep.expect.find(step);
    c.expect = it == s.sweep.expect.end() ? s.sweep.default_expect : it->second;
    cells.push_back(std::move(c));
  }
  for (const auto& c : s.sweep.cells) cells.push_back(c);
  if (filter.fault_kind) {
    std::erase_if(cells, [&](const SweepCell& c) {
      return c.faults.empty() ||
             std::any_of(c.faults.begin(), c.faults.end(), [&](const sim::FaultSpec& f) { return f.kind != *filter.fault_kind; });
    });
  }
  return cells;
}

namespace {

CellReport run_cell(const Scenario& s, const RunOptions& base, const SweepCell& cell) {
  CellReport rep;
  rep.name = cell.name;
  rep.expect = cell.expect;
  std::ostringstream faults;
  for (const auto& f : cell.faults) faults << (faults.tellp() > 0 ? "; " : "") << f.describe();
  rep.faults = faults.str();

  RunOptions opt = base;
  opt.extra_faults.insert(opt.extra_faults.end(), cell.faults.begin(), cell.faults.end());
  Instance inst(s, opt);
  auto run = inst.run();
  auto refs = inst.world().submitted(s.sweep.tx);
  rep.coordination_state = refs.empty() ? "absent" : inst.coordination_state(refs.back());
  for (const auto& ref : refs) {
    Hash256 key = wire::coordination_key(ref.tx_id, ref.originating);
    for (const auto& f : inst.world().finalizations()) {
      if (!(f.key == key)) continue;
      (f.decision == ledger::Decision::Commit ? rep.commits : rep.ignores) += 1;
    }
  }
  auto atom = inst.atomicity(refs);
  rep.atomic = atom.passed;
  bool committed = rep.coordination_state == "Committed";
  if (cell.expect == CellExpect::Commit) {
    rep.matches = rep.atomic && committed && rep.commits > 0;
  } else {
    rep.matches = rep.atomic && !committed && rep.commits == 0;
  }
  if (run.tick_limit_hit) rep.matches = false;
  std::ostringstream d;
  if (!rep.atomic) d << atom.detail;
  if (run.tick_limit_hit) d << "tick limit hit; ";
  if (rep.matches) d << "ok";
  else d << "expected " << to_string(cell.expect) << ", coordination " << rep.coordination_state;
  rep.detail = d.str();
  return rep;
}

}  // namespace

std::vector<CellReport> run_sweep(const Scenario& s, const RunOptions& options, const SweepFilter& filter) {
  if (!s.sweep.present) throw ScenarioError(s.name + ": scenario has no sweep section");
  auto cells = sweep_cells(s, filter);
  std::vector<CellReport> reports(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  unsigned jobs = filter.jobs != 0 ? filter.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(1, cells.size())));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        reports[i] = run_cell(s, options, cells[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reports;
}

}  // namespace xchain::scenario
