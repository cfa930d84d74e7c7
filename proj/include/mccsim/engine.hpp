#pragma once

// Deterministic discrete-event loop. Events are processed in (time, seq)
// order; every allocation, progress update, completion and failure is
// appended to the central log, from which placements can be replayed.

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "mccsim/allocator.hpp"
#include "mccsim/central_log.hpp"
#include "mccsim/model.hpp"
#include "mccsim/scheduler.hpp"

namespace mccsim {

struct EngineOptions {
  // On node failure, drop progress made since the cloudlet's last log entry.
  bool lose_progress_since_log = false;
  std::optional<std::uint64_t> seed_override;
};

enum class RunStatus { Complete, Degraded };

std::string_view to_string(RunStatus s) noexcept;

struct AppResult {
  std::string id;
  double submit_time_s = 0.0;
  std::optional<double> arrival_time_s;
  std::optional<double> finish_time_s;

  bool operator==(const AppResult&) const = default;
};

struct CloudletResult {
  std::string id;
  std::string app_id;
  std::string vm_id;
  double length_mi = 0.0;
  double remaining_mi = 0.0;
  std::optional<double> finish_time_s;

  bool operator==(const CloudletResult&) const = default;
};

struct RunStats {
  std::uint64_t events_processed = 0;
  std::uint64_t finish_events_acted = 0;
  std::uint64_t finish_events_stale = 0;
  std::uint64_t cloudlets_completed = 0;

  bool operator==(const RunStats&) const = default;
};

struct RunResult {
  std::string scenario_name;
  std::uint64_t seed = 0;
  RunStatus status = RunStatus::Complete;
  std::size_t task_count = 0;
  std::size_t vm_count = 0;
  double makespan_s = 0.0;
  // Mean host capacity over hosts that held a VM at some point.
  double space_shared_capacity = 0.0;
  // Time-shared capacity of the host with the highest concurrent core demand, at that peak.
  double time_shared_capacity = 0.0;
  // Work integrated from execution rates, and the declared total.
  double executed_mi = 0.0;
  double total_mi = 0.0;
  std::vector<AppResult> apps;
  std::vector<CloudletResult> cloudlets;
  RunStats stats;
  std::vector<LogEntry> log;

  /// "N tasks in M VMs".
  std::string label() const;

  bool operator==(const RunResult&) const = default;
};

class Engine {
 public:
  /// Throws ScenarioError if the scenario does not validate.
  explicit Engine(Scenario scenario, EngineOptions options = {});

  /// Processes every event with time <= t.
  void run_until(double t);
  /// Runs to exhaustion and summarizes.
  RunResult run();
  RunResult result() const;

  /// Live placement map and remaining lengths, comparable with replay(log).
  ReplayState snapshot() const;

  void handle_node_fail(const std::string& node_id, double ct);
  void handle_node_recover(const std::string& node_id, double ct);
  void handle_handoff(const std::string& device_id, const std::string& ap_id, double ct);

  const CentralLog& log() const noexcept { return log_; }
  double now() const noexcept { return clock_.now(); }
  const std::vector<CloudNode>& nodes() const noexcept { return nodes_; }
  const std::vector<Application>& applications() const noexcept { return apps_; }
  const MobileDevice& device(const std::string& id) const;
  const PendingQueue& pending() const noexcept { return queue_; }
  const RunStats& stats() const noexcept { return stats_; }
  bool idle() const noexcept { return events_.empty(); }

 private:
  enum class EventKind { AppSubmit, AppArrive, CloudletArrive, CloudletFinish, NodeFail, NodeRecover, ApHandoff };

  struct Event {
    double time = 0.0;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::AppSubmit;
    std::string subject;  // app, cloudlet, vm, node or device id
    std::string object;   // access point for handoffs
    std::uint64_t generation = 0;
  };

  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.time != b.time) return a.time > b.time;
      return a.seq > b.seq;
    }
  };

  struct CloudletRef {
    std::size_t app = 0;
    std::size_t index = 0;
    std::size_t order = 0;  // global declaration rank
    bool arrived = false;
    bool started = false;
    std::optional<double> finish_time;
  };

  void push(double time, EventKind kind, std::string subject, std::string object = {},
            std::uint64_t generation = 0);
  void process(const Event& e);
  void process_arrivals(double t, std::vector<std::string> app_ids);

  std::size_t app_index(const std::string& id) const;
  Application& app_of_vm(const std::string& vm_id);
  CloudNode& node(const std::string& id);
  std::string route(const Application& app) const;

  void admit(const AllocationPlan& plan, LogKind kind);
  void queue_app(const Application& app, bool force_dynamic);
  void start_ready_cloudlets(std::size_t app);
  void on_vm_changed(VmRuntime& rt);
  void account(VmRuntime& rt, double ct);
  void log_progress(const VmRuntime& rt);
  void complete(const VmRuntime& rt, const std::vector<std::string>& finished);
  void release_finished_apps();
  void track_host_demand();

  Scenario scenario_;
  EngineOptions options_;
  std::vector<CloudNode> nodes_;
  std::vector<Application> apps_;
  std::vector<MobileDevice> devices_;
  std::map<std::string, VmRuntime> runtimes_;
  std::map<std::string, CloudletRef> cloudlets_;
  std::map<std::string, std::string> routes_;  // app id -> node it was routed to
  std::map<std::string, double> arrivals_;
  std::map<std::string, double> app_finish_;
  std::set<std::string> ever_placed_;
  std::set<std::string> hosts_used_;
  std::map<std::string, long long> host_peak_demand_;
  std::vector<std::size_t> releasable_;
  PendingQueue queue_;
  CentralLog log_;
  SimClock clock_;
  RunStats stats_;
  double executed_mi_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::priority_queue<Event, std::vector<Event>, Later> events_;
};

/// Validates and runs a scenario to completion.
RunResult run(const Scenario& scenario, EngineOptions options = {});

}  // namespace mccsim
