// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "fluid_oracle.hpp"
#include "mccsim/allocator.hpp"
#include "mccsim/capacity.hpp"
#include "mccsim/cli.hpp"
#include "mccsim/engine.hpp"
#include "mccsim/report.hpp"

using namespace mccsim;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kScenarios = MCCSIM_SCENARIO_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double rel_err(double got, double want) {
  if (got == want) return 0.0;
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

std::vector<fs::path> bundled() {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(kScenarios)) {
    if (e.path().extension() == ".scenario") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<ProcessingElement> random_pes(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 16);
  std::uniform_real_distribution<double> mips(1.0, 1e4);
  std::vector<ProcessingElement> pes(static_cast<std::size_t>(count(rng)));
  for (auto& pe : pes) pe.mips = mips(rng);
  return pes;
}

// Direct evaluation in extended precision.
long double oracle_sum(const std::vector<ProcessingElement>& pes) {
  long double s = 0;
  for (const auto& pe : pes) s += pe.mips;
  return s;
}

Outcome formula_oracles() {
  const auto start = Clock::now();
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<long long> demand(0, 64);
  std::uniform_int_distribution<int> cores(1, 16);
  std::uniform_real_distribution<double> remaining(0.0, 1e6), ct(0.0, 1e4);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto pes = random_pes(rng);
    const long double want = oracle_sum(pes) / static_cast<long double>(pes.size());
    worst = std::max(worst, rel_err(space_shared_capacity(pes), static_cast<double>(want)));
  }
  for (int i = 0; i < 1000; ++i) {
    const auto pes = random_pes(rng);
    const long long d = demand(rng);
    const long long np = static_cast<long long>(pes.size());
    const long double want = oracle_sum(pes) / static_cast<long double>(d > np ? d : np);
    worst = std::max(worst, rel_err(time_shared_capacity(pes, d), static_cast<double>(want)));
  }
  for (int i = 0; i < 1000; ++i) {
    const auto pes = random_pes(rng);
    const double cap = time_shared_capacity(pes, demand(rng));
    const double now = ct(rng), rem = remaining(rng);
    const int c = cores(rng);
    const long double want = static_cast<long double>(now) +
                             static_cast<long double>(rem) / (static_cast<long double>(cap) * c);
    worst = std::max(worst, rel_err(estimated_finish_time(now, rem, cap, c), static_cast<double>(want)));
  }
  const double elapsed = seconds_since(start);
  std::ostringstream d;
  d << "3000 instances, worst relative error " << worst << ", " << elapsed << " s";
  return {worst <= 1e-12 && elapsed < 1.0, d.str()};
}

Outcome dominance() {
  std::mt19937_64 rng(2002);
  std::uniform_int_distribution<long long> demand(0, 64);
  int violations = 0;
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) {
    const auto pes = random_pes(rng);
    const long long d = demand(rng);
    const double space = space_shared_capacity(pes);
    const double time = time_shared_capacity(pes, d);
    const bool fits = d <= static_cast<long long>(pes.size());
    if (time > space || (time == space) != fits) ++violations;
  }
  return {violations == 0, std::to_string(trials) + " instances, " + std::to_string(violations) + " violations"};
}

// One node, one VM, up to six cloudlets arriving at staggered times.
Outcome fluid_equivalence() {
  const auto start = Clock::now();
  std::mt19937_64 rng(3003);
  std::uniform_int_distribution<int> vm_cores(1, 4), count(1, 6);
  std::uniform_real_distribution<double> mips(50, 2000), length(10, 5000), delay(0, 5);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int c = vm_cores(rng);
    const double m = mips(rng);
    std::uniform_int_distribution<int> task_cores(1, c);
    Scenario s;
    s.name = "fluid";
    s.nodes.push_back({"n1", {{"h1", std::vector<ProcessingElement>(static_cast<std::size_t>(c), {m}), {}}}, true});
    s.access_points.push_back({"ap", "n1", 0.0});
    s.devices.push_back({"d", "ap"});
    Application app;
    app.id = "a";
    app.device_id = "d";
    app.vms.push_back({"vm", c, m, std::nullopt});
    std::vector<oracle::FluidTask> tasks;
    for (int i = count(rng); i > 0; --i) {
      oracle::FluidTask t{i == 1 ? 0.0 : delay(rng), length(rng), task_cores(rng)};
      tasks.push_back(t);
      app.cloudlets.push_back(make_cloudlet("c" + std::to_string(tasks.size() - 1), t.length, t.cores, "vm", t.arrival));
    }
    s.applications.push_back(app);
    const auto result = run(s);
    const auto want = oracle::fluid_finish_times(c, m, tasks);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const auto& got = result.cloudlets[i].finish_time_s;
      worst = std::max(worst, got ? std::abs(*got - want[i]) : INFINITY);
    }
  }
  const double elapsed = seconds_since(start);
  std::ostringstream d;
  d << "200 scenarios, worst finish-time error " << worst << " s, " << elapsed << " s";
  return {worst <= 1e-6 && elapsed < 5.0, d.str()};
}

Outcome work_conservation() {
  double worst = 0.0;
  std::size_t n = 0;
  for (const auto& f : bundled()) {
    const auto r = run(load_scenario(f));
    worst = std::max(worst, std::abs(r.executed_mi - r.total_mi));
    ++n;
  }
  std::ostringstream d;
  d << n << " scenarios, worst |executed - declared| " << worst << " MI";
  return {n > 0 && worst <= 1e-6, d.str()};
}

// Random batches of simultaneous submissions with distinct requirements.
Outcome allocation_order() {
  std::mt19937_64 rng(5005);
  std::uniform_int_distribution<int> napps(2, 8), nvms(1, 3), cores(1, 4);
  std::uniform_real_distribution<double> mips(100, 1000), length(100, 3000);
  int order_violations = 0, oversubscribed = 0, trials = 0;
  for (int trial = 0; trial < 200; ++trial, ++trials) {
    Scenario s;
    s.name = "batch";
    s.dynamic = trial % 2 == 1;
    s.nodes.push_back({"n1", {{"n1-h1", {{1000}, {1000}, {1000}, {1000}}, {}}}, true});
    s.nodes.push_back({"n2", {{"n2-h1", {{800}, {800}, {800}}, {}}, {"n2-h2", {{1000}, {1000}}, {}}}, true});
    s.access_points.push_back({"ap", "n1", 0.0});
    s.devices.push_back({"d", "ap"});
    std::map<std::string, double> requirement;
    std::set<double> used;
    for (int a = napps(rng); a > 0; --a) {
      Application app;
      app.id = "app" + std::to_string(a);
      app.device_id = "d";
      for (int v = nvms(rng); v > 0; --v) {
        app.vms.push_back({app.id + "-vm" + std::to_string(v), cores(rng), std::round(mips(rng)), std::nullopt});
      }
      const double req = resource_requirement(app);
      if (!used.insert(req).second) continue;  // requirements must be distinct
      for (const auto& vm : app.vms) {
        app.cloudlets.push_back(make_cloudlet(vm.id + "-t", length(rng), 1, vm.id));
      }
      requirement[app.id] = req;
      s.applications.push_back(app);
    }
    const auto r = run(s);

    // Allocation decisions taken at the batch instant, in log order.
    std::vector<double> seen;
    for (const auto& e : r.log) {
      if (e.time != 0.0) break;
      if (e.kind != LogKind::Allocated) continue;
      const double req = requirement.at(e.app_id);
      if (seen.empty() || seen.back() != req) seen.push_back(req);
    }
    for (std::size_t i = 1; i < seen.size(); ++i) {
      if (!(seen[i] < seen[i - 1])) ++order_violations;
    }

    if (!s.dynamic) {
      std::map<std::string, std::size_t> capacity, held;
      for (const auto& n : s.nodes) {
        for (const auto& h : n.hosts) capacity[n.id] += h.np();
      }
      std::map<std::string, std::pair<std::string, std::size_t>> vm_at;
      for (const auto& e : r.log) {
        if (e.kind == LogKind::Allocated || e.kind == LogKind::Reallocated) {
          vm_at[e.vm_id] = {e.node_id, e.pe_indices.size()};
          held[e.node_id] += e.pe_indices.size();
        } else if ((e.kind == LogKind::Released || e.kind == LogKind::Failed) && !e.vm_id.empty()) {
          auto it = vm_at.find(e.vm_id);
          if (it != vm_at.end()) {
            held[it->second.first] -= it->second.second;
            vm_at.erase(it);
          }
        }
        for (const auto& [node, count] : held) {
          if (count > capacity[node]) ++oversubscribed;
        }
      }
    }
  }
  std::ostringstream d;
  d << trials << " batches, " << order_violations << " order violations, " << oversubscribed
    << " oversubscribed log states (static mode)";
  return {order_violations == 0 && oversubscribed == 0, d.str()};
}

Outcome failover() {
  const auto s = load_scenario(kScenarios / "failover_two_node.scenario");
  const auto r = run(s);
  auto baseline_s = s;
  baseline_s.events.clear();
  const auto baseline = run(baseline_s);
  bool all_done = r.status == RunStatus::Complete;
  double finish = 0.0;
  for (const auto& c : r.cloudlets) {
    all_done = all_done && c.finish_time_s.has_value();
    if (c.finish_time_s) finish = std::max(finish, *c.finish_time_s);
  }
  std::ostringstream d;
  d << "resume finish " << finish << " s (expected 4), makespan " << r.makespan_s << " s vs baseline "
    << baseline.makespan_s << " s";
  return {all_done && std::abs(finish - 4.0) <= 1e-6 && r.makespan_s >= baseline.makespan_s, d.str()};
}

Outcome log_replay() {
  std::size_t n = 0, mismatches = 0;
  for (const auto& f : bundled()) {
    Engine engine(load_scenario(f));
    engine.run();
    const auto state = replay(engine.log().entries());
    const auto live = engine.snapshot();
    if (!(state == live)) ++mismatches;
    ++n;
  }
  return {n > 0 && mismatches == 0, std::to_string(n) + " scenarios, " + std::to_string(mismatches) + " mismatches"};
}

Outcome determinism() {
  const fs::path tmp = fs::temp_directory_path() / ("mccsim-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(tmp);
  std::size_t compared = 0, differing = 0;
  for (const auto& f : bundled()) {
    for (const char* format : {"csv", "json"}) {
      std::map<std::string, std::string> first;
      for (const char* attempt : {"a", "b"}) {
        const auto out = tmp / attempt / f.stem() / format;
        const int code = run_cli({"run", f.string(), "--out", out.string(), "--format", format});
        if (code != kExitOk) ++differing;
        for (const auto& name : {std::string("report.") + format, std::string("chart.json"),
                                 std::string("runresult.json")}) {
          const auto text = slurp(out / name);
          if (first.count(name) == 0) {
            first[name] = text;
          } else {
            ++compared;
            if (text != first[name] || text.empty()) ++differing;
          }
        }
      }
    }
  }
  fs::remove_all(tmp);
  return {compared > 0 && differing == 0,
          std::to_string(compared) + " file pairs compared, " + std::to_string(differing) + " differ"};
}

Outcome table_shape() {
  std::vector<ReportRow> rows;
  for (const char* name : {"table2_row1", "table2_row2", "table2_row3"}) {
    rows.push_back(make_report_row(run(load_scenario(kScenarios / (std::string(name) + ".scenario")))));
  }
  const auto csv = write_report(rows, ReportFormat::Csv);
  const std::string header =
      "Distributed Cloud details(VMs),Capacity(Dynamically varying) using space shared,"
      "Estimated finish time(in milisec),Total processing capacity of Cloud host";
  const auto parsed = parse_report(csv, ReportFormat::Csv);
  const std::vector<std::string> labels{"12 tasks in 3 VMs", "23 tasks in 8 VMs", "39 tasks in 12 VMs"};
  bool ok = csv.substr(0, csv.find('\n')) == header && parsed.size() == 3;
  std::ostringstream d;
  for (std::size_t i = 0; ok && i < 3; ++i) {
    ok = parsed[i].label == labels[i];
    if (i > 0) ok = ok && parsed[i].finish_time_ms > parsed[i - 1].finish_time_ms;
  }
  d << "finish times";
  for (const auto& r : parsed) d << " " << r.finish_time_ms;
  d << " ms";
  return {ok, d.str()};
}

}  // namespace

int main() {
  const auto start = Clock::now();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"formula oracles", formula_oracles},
      {"capacity dominance", dominance},
      {"fluid schedule equivalence", fluid_equivalence},
      {"work conservation", work_conservation},
      {"allocation order and no oversubscription", allocation_order},
      {"two-node failover", failover},
      {"log replay", log_replay},
      {"determinism", determinism},
      {"report shape", table_shape},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << " " << criteria[i].first << ": "
              << o.detail << "\n";
  }
  const double total = seconds_since(start);
  const bool fast = total < 30.0;
  if (!fast) ++failed;
  std::cout << "suite runtime " << total << " s " << (fast ? "PASS" : "FAIL") << "\n";
  return failed == 0 ? 0 : 1;
}
