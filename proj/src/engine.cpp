#include "mccsim/engine.hpp"

#include <algorithm>

#include "mccsim/capacity.hpp"

namespace mccsim {

std::string_view to_string(RunStatus s) noexcept {
  return s == RunStatus::Complete ? "complete" : "degraded";
}

std::string RunResult::label() const {
  return std::to_string(task_count) + " tasks in " + std::to_string(vm_count) + " VMs";
}

Engine::Engine(Scenario scenario, EngineOptions options)
    : scenario_(std::move(scenario)), options_(options) {
  if (auto errors = validate_scenario(scenario_); !errors.empty()) {
    throw ScenarioError(std::move(errors));
  }
  if (options_.seed_override) scenario_.seed = *options_.seed_override;

  nodes_ = scenario_.nodes;
  for (auto& n : nodes_) {
    n.alive = true;
    for (auto& h : n.hosts) h.release_all();
  }
  apps_ = scenario_.applications;
  devices_ = scenario_.devices;

  std::size_t order = 0;
  for (std::size_t a = 0; a < apps_.size(); ++a) {
    auto& app = apps_[a];
    for (auto& vm : app.vms) {
      vm.binding.reset();
      runtimes_.emplace(vm.id, VmRuntime(vm));
    }
    for (std::size_t c = 0; c < app.cloudlets.size(); ++c) {
      auto& cl = app.cloudlets[c];
      cl.remaining_mi = cl.length_mi;
      cl.state = CloudletState::Pending;
      cloudlets_.emplace(cl.id, CloudletRef{a, c, order++, false, false, std::nullopt});
    }
  }

  // Injected events are seeded first so that, at equal times, failures and
  // handoffs take effect before submissions.
  for (const auto& e : scenario_.events) {
    switch (e.kind) {
      case InjectedEventKind::NodeFail: push(e.time_s, EventKind::NodeFail, e.node_id); break;
      case InjectedEventKind::NodeRecover: push(e.time_s, EventKind::NodeRecover, e.node_id); break;
      case InjectedEventKind::ApHandoff: push(e.time_s, EventKind::ApHandoff, e.device_id, e.ap_id); break;
    }
  }
  for (const auto& app : apps_) push(app.submit_time_s, EventKind::AppSubmit, app.id);
}

void Engine::push(double time, EventKind kind, std::string subject, std::string object,
                  std::uint64_t generation) {
  events_.push(Event{time, next_seq_++, kind, std::move(subject), std::move(object), generation});
}

const MobileDevice& Engine::device(const std::string& id) const {
  auto it = std::find_if(devices_.begin(), devices_.end(), [&](const MobileDevice& d) { return d.id == id; });
  if (it == devices_.end()) throw SimError("unknown device " + id);
  return *it;
}

std::size_t Engine::app_index(const std::string& id) const {
  auto it = std::find_if(apps_.begin(), apps_.end(), [&](const Application& a) { return a.id == id; });
  if (it == apps_.end()) throw SimError("unknown application " + id);
  return static_cast<std::size_t>(it - apps_.begin());
}

Application& Engine::app_of_vm(const std::string& vm_id) {
  for (auto& app : apps_) {
    if (app.find_vm(vm_id)) return app;
  }
  throw SimError("unknown vm " + vm_id);
}

CloudNode& Engine::node(const std::string& id) {
  auto it = std::find_if(nodes_.begin(), nodes_.end(), [&](const CloudNode& n) { return n.id == id; });
  if (it == nodes_.end()) throw SimError("unknown node " + id);
  return *it;
}

std::string Engine::route(const Application& app) const {
  if (auto it = routes_.find(app.id); it != routes_.end()) return it->second;
  return preferred_node(device(app.device_id), scenario_.access_points);
}

void Engine::run_until(double t) {
  while (!events_.empty() && events_.top().time <= t) {
    Event e = events_.top();
    events_.pop();
    if (e.kind != EventKind::AppArrive) {
      process(e);
      continue;
    }
    // Simultaneous arrivals form one batch, allocated largest demand first.
    std::vector<std::string> batch{e.subject};
    while (!events_.empty() && events_.top().kind == EventKind::AppArrive && events_.top().time == e.time) {
      batch.push_back(events_.top().subject);
      events_.pop();
    }
    clock_.advance_to(e.time);
    stats_.events_processed += batch.size();
    process_arrivals(e.time, std::move(batch));
    release_finished_apps();
  }
}

RunResult Engine::run() {
  run_until(std::numeric_limits<double>::infinity());
  return result();
}

void Engine::process(const Event& e) {
  clock_.advance_to(e.time);
  ++stats_.events_processed;
  switch (e.kind) {
    case EventKind::AppSubmit: {
      const auto& app = apps_[app_index(e.subject)];
      const auto& dev = device(app.device_id);
      routes_[app.id] = preferred_node(dev, scenario_.access_points);
      double latency_ms = 0.0;
      for (const auto& ap : scenario_.access_points) {
        if (ap.id == dev.ap_id) latency_ms = ap.latency_ms;
      }
      push(e.time + latency_ms / 1000.0, EventKind::AppArrive, app.id);
      break;
    }
    case EventKind::AppArrive:
      process_arrivals(e.time, {e.subject});
      release_finished_apps();
      break;
    case EventKind::CloudletArrive: {
      auto& ref = cloudlets_.at(e.subject);
      ref.arrived = true;
      start_ready_cloudlets(ref.app);
      break;
    }
    case EventKind::CloudletFinish: {
      auto& rt = runtimes_.at(e.subject);
      if (e.generation != rt.generation) {
        ++stats_.finish_events_stale;
        break;
      }
      ++stats_.finish_events_acted;
      account(rt, e.time);
      auto finished = on_event_reschedule(rt, e.time);
      complete(rt, finished);
      log_progress(rt);
      on_vm_changed(rt);
      release_finished_apps();
      break;
    }
    case EventKind::NodeFail: handle_node_fail(e.subject, e.time); break;
    case EventKind::NodeRecover: handle_node_recover(e.subject, e.time); break;
    case EventKind::ApHandoff: handle_handoff(e.subject, e.object, e.time); break;
  }
}

void Engine::process_arrivals(double t, std::vector<std::string> app_ids) {
  std::vector<std::size_t> idx;
  for (const auto& id : app_ids) idx.push_back(app_index(id));
  std::sort(idx.begin(), idx.end());
  std::vector<Application> batch;
  for (auto i : idx) batch.push_back(apps_[i]);
  for (auto pos : sort_applications(batch)) {
    const std::size_t i = idx[pos];
    auto& app = apps_[i];
    arrivals_[app.id] = t;
    for (const auto& cl : app.cloudlets) {
      if (cl.submit_delay_s > 0.0) {
        push(t + cl.submit_delay_s, EventKind::CloudletArrive, cl.id);
      } else {
        cloudlets_.at(cl.id).arrived = true;
      }
    }
    std::optional<AllocationPlan> plan;
    try {
      plan = allocate_application(app, nodes_, routes_.at(app.id), scenario_.dynamic);
    } catch (const AllocationError& err) {
      throw ScenarioError("applications[" + std::to_string(i) + "]", err.what());
    }
    if (plan) {
      admit(*plan, LogKind::Allocated);
    } else {
      queue_app(app, false);
    }
  }
}

void Engine::admit(const AllocationPlan& plan, LogKind kind) {
  const std::size_t a = app_index(plan.app_id);
  auto& app = apps_[a];
  if (kind == LogKind::Allocated && ever_placed_.contains(app.id)) kind = LogKind::Reallocated;
  for (const auto& p : plan.placements) {
    log_.append({clock_.now(), kind, app.id, p.vm_id, {}, 0.0, p.binding.node_id, p.binding.host_id,
                 p.binding.pe_indices});
    runtimes_.at(p.vm_id).vm.binding = p.binding;
    hosts_used_.insert(p.binding.host_id);
  }
  ever_placed_.insert(app.id);
  queue_.remove(app.id);
  start_ready_cloudlets(a);
  track_host_demand();
  if (std::all_of(app.cloudlets.begin(), app.cloudlets.end(),
                  [](const Cloudlet& c) { return c.state == CloudletState::Finished; })) {
    releasable_.push_back(a);
  }
}

void Engine::queue_app(const Application& app, bool force_dynamic) {
  queue_.push({app.id, resource_requirement(app), app.submit_time_s, app_index(app.id), force_dynamic});
  log_.append({clock_.now(), LogKind::Queued, app.id, {}, {}, 0.0, {}, {}, {}});
}

void Engine::start_ready_cloudlets(std::size_t a) {
  auto& app = apps_[a];
  std::vector<VmRuntime*> changed;
  for (auto& cl : app.cloudlets) {
    auto& ref = cloudlets_.at(cl.id);
    if (!ref.arrived || cl.state != CloudletState::Pending) continue;
    auto& rt = runtimes_.at(cl.vm_id);
    if (!rt.vm.binding) continue;
    account(rt, clock_.now());
    submit_cloudlet(rt, cl, clock_.now(), ref.order);
    cl.state = CloudletState::Running;
    ref.started = true;
    if (std::find(changed.begin(), changed.end(), &rt) == changed.end()) changed.push_back(&rt);
  }
  for (auto* rt : changed) {
    log_progress(*rt);
    on_vm_changed(*rt);
  }
}

void Engine::account(VmRuntime& rt, double ct) {
  if (ct > rt.last_update) {
    executed_mi_ += rt.capacity * static_cast<double>(rt.running_core_demand()) * (ct - rt.last_update);
  }
}

void Engine::log_progress(const VmRuntime& rt) {
  auto& app = app_of_vm(rt.vm.id);
  const std::string node_id = rt.vm.binding ? rt.vm.binding->node_id : std::string{};
  for (const auto& t : rt.tasks) {
    if (t.cloudlet.state != CloudletState::Running) continue;
    log_.append({clock_.now(), LogKind::Progress, app.id, rt.vm.id, t.cloudlet.id, t.cloudlet.remaining_mi,
                 node_id, {}, {}});
    const auto& ref = cloudlets_.at(t.cloudlet.id);
    apps_[ref.app].cloudlets[ref.index].remaining_mi = t.cloudlet.remaining_mi;
  }
}

void Engine::complete(const VmRuntime& rt, const std::vector<std::string>& finished) {
  const std::string node_id = rt.vm.binding ? rt.vm.binding->node_id : std::string{};
  for (const auto& id : finished) {
    auto& ref = cloudlets_.at(id);
    auto& cl = apps_[ref.app].cloudlets[ref.index];
    cl.state = CloudletState::Finished;
    cl.remaining_mi = 0.0;
    ref.finish_time = clock_.now();
    ++stats_.cloudlets_completed;
    log_.append({clock_.now(), LogKind::Finished, apps_[ref.app].id, rt.vm.id, id, 0.0, node_id, {}, {}});
    const auto& app = apps_[ref.app];
    if (std::all_of(app.cloudlets.begin(), app.cloudlets.end(),
                    [](const Cloudlet& c) { return c.state == CloudletState::Finished; })) {
      releasable_.push_back(ref.app);
    }
  }
}

void Engine::on_vm_changed(VmRuntime& rt) {
  if (rt.next_completion) {
    push(rt.next_completion->eft, EventKind::CloudletFinish, rt.vm.id, {}, rt.generation);
  }
  track_host_demand();
}

void Engine::release_finished_apps() {
  while (!releasable_.empty()) {
    auto pending = std::move(releasable_);
    releasable_.clear();
    std::sort(pending.begin(), pending.end());
    pending.erase(std::unique(pending.begin(), pending.end()), pending.end());
    for (auto a : pending) {
      auto& app = apps_[a];
      if (app_finish_.contains(app.id)) continue;
      const RouteFn route_fn = [this](const Application& x) { return route(x); };
      auto result = release_application(app, apps_, nodes_, queue_, route_fn, scenario_.dynamic);
      app_finish_[app.id] = clock_.now();
      for (const auto& f : result.freed) {
        runtimes_.at(f.vm_id).vm.binding.reset();
        log_.append({clock_.now(), LogKind::Released, app.id, f.vm_id, {}, 0.0, f.binding.node_id,
                     f.binding.host_id, f.binding.pe_indices});
      }
      for (const auto& plan : result.admitted) admit(plan, LogKind::Allocated);
    }
  }
  track_host_demand();
}

void Engine::track_host_demand() {
  std::map<std::string, long long> demand;
  for (const auto& [id, rt] : runtimes_) {
    if (rt.vm.binding) demand[rt.vm.binding->host_id] += rt.running_core_demand();
  }
  for (const auto& [host, d] : demand) {
    auto& peak = host_peak_demand_[host];
    peak = std::max(peak, d);
  }
}

void Engine::handle_node_fail(const std::string& node_id, double ct) {
  clock_.advance_to(ct);
  auto& failed = node(node_id);
  if (!failed.alive) throw SimError("node " + node_id + " is already down");
  failed.alive = false;
  log_.append({ct, LogKind::Failed, {}, {}, {}, 0.0, node_id, {}, {}});

  std::vector<std::size_t> affected;
  for (std::size_t a = 0; a < apps_.size(); ++a) {
    auto& app = apps_[a];
    for (auto& vm : app.vms) {
      if (!vm.binding || vm.binding->node_id != node_id) continue;
      auto& rt = runtimes_.at(vm.id);
      account(rt, ct);
      if (!options_.lose_progress_since_log) {
        auto finished = on_event_reschedule(rt, ct);
        complete(rt, finished);
      }
      for (auto& slot : detach_running(rt, ct)) {
        const auto& ref = cloudlets_.at(slot.cloudlet.id);
        auto& cl = apps_[ref.app].cloudlets[ref.index];
        cl.state = CloudletState::Pending;
        cl.remaining_mi = slot.cloudlet.remaining_mi;
        log_.append({ct, LogKind::Progress, app.id, vm.id, cl.id, cl.remaining_mi, node_id, {}, {}});
      }
      log_.append({ct, LogKind::Failed, app.id, vm.id, {}, 0.0, node_id, vm.binding->host_id,
                   vm.binding->pe_indices});
      unbind_vm(vm, failed);
      rt.vm.binding.reset();
      if (affected.empty() || affected.back() != a) affected.push_back(a);
    }
  }
  for (auto& h : failed.hosts) h.release_all();
  track_host_demand();

  for (auto a : affected) {
    auto& app = apps_[a];
    if (std::all_of(app.cloudlets.begin(), app.cloudlets.end(),
                    [](const Cloudlet& c) { return c.state == CloudletState::Finished; })) {
      continue;  // finished at the failure instant; released below
    }
    if (auto plan = allocate_application(app, nodes_, route(app), true)) {
      admit(*plan, LogKind::Reallocated);
    } else {
      queue_app(app, true);
    }
  }
  release_finished_apps();
}

void Engine::handle_node_recover(const std::string& node_id, double ct) {
  clock_.advance_to(ct);
  auto& n = node(node_id);
  if (n.alive) throw SimError("node " + node_id + " is not down");
  n.alive = true;
  for (auto& h : n.hosts) h.release_all();
  log_.append({ct, LogKind::Recovered, {}, {}, {}, 0.0, node_id, {}, {}});
  const RouteFn route_fn = [this](const Application& x) { return route(x); };
  for (const auto& plan : drain_queue(queue_, apps_, nodes_, route_fn, scenario_.dynamic)) {
    admit(plan, LogKind::Allocated);
  }
  release_finished_apps();
}

void Engine::handle_handoff(const std::string& device_id, const std::string& ap_id, double ct) {
  clock_.advance_to(ct);
  auto dev = std::find_if(devices_.begin(), devices_.end(), [&](const MobileDevice& d) { return d.id == device_id; });
  if (dev == devices_.end()) throw SimError("unknown device " + device_id);
  const auto& aps = scenario_.access_points;
  if (std::none_of(aps.begin(), aps.end(), [&](const AccessPoint& ap) { return ap.id == ap_id; })) {
    throw SimError("unknown access point " + ap_id);
  }
  dev->ap_id = ap_id;
}

ReplayState Engine::snapshot() const {
  ReplayState state;
  for (const auto& app : apps_) {
    for (const auto& vm : app.vms) {
      if (vm.binding) state.placements[vm.id] = *vm.binding;
    }
    for (const auto& cl : app.cloudlets) {
      if (cloudlets_.at(cl.id).started) state.remaining[cl.id] = cl.remaining_mi;
    }
  }
  for (const auto& n : nodes_) {
    if (!n.alive) state.down_nodes.insert(n.id);
  }
  return state;
}

RunResult Engine::result() const {
  RunResult r;
  r.scenario_name = scenario_.name;
  r.seed = scenario_.seed;
  r.task_count = scenario_.cloudlet_count();
  r.vm_count = scenario_.vm_count();
  r.executed_mi = executed_mi_;
  r.stats = stats_;
  r.log = log_.entries();

  std::optional<double> last_finish;
  for (const auto& app : apps_) {
    AppResult ar{app.id, app.submit_time_s, std::nullopt, std::nullopt};
    if (auto it = arrivals_.find(app.id); it != arrivals_.end()) ar.arrival_time_s = it->second;
    if (auto it = app_finish_.find(app.id); it != app_finish_.end()) ar.finish_time_s = it->second;
    r.apps.push_back(ar);
    for (const auto& cl : app.cloudlets) {
      const auto& ref = cloudlets_.at(cl.id);
      r.cloudlets.push_back({cl.id, app.id, cl.vm_id, cl.length_mi, cl.remaining_mi, ref.finish_time});
      r.total_mi += cl.length_mi;
      if (cl.state != CloudletState::Finished) r.status = RunStatus::Degraded;
      if (ref.finish_time) last_finish = std::max(last_finish.value_or(*ref.finish_time), *ref.finish_time);
    }
  }
  if (last_finish && !apps_.empty()) {
    double first_submit = apps_.front().submit_time_s;
    for (const auto& app : apps_) first_submit = std::min(first_submit, app.submit_time_s);
    r.makespan_s = *last_finish - first_submit;
  }

  double sum = 0.0;
  std::size_t used = 0;
  const Host* busiest = nullptr;
  long long busiest_demand = -1;
  for (const auto& n : nodes_) {
    for (const auto& h : n.hosts) {
      if (!hosts_used_.contains(h.id)) continue;
      sum += space_shared_capacity(h.pes);
      ++used;
      auto it = host_peak_demand_.find(h.id);
      const long long peak = it == host_peak_demand_.end() ? 0 : it->second;
      if (peak > busiest_demand) {
        busiest_demand = peak;
        busiest = &h;
      }
    }
  }
  if (used > 0) r.space_shared_capacity = sum / static_cast<double>(used);
  if (busiest) r.time_shared_capacity = time_shared_capacity(busiest->pes, busiest_demand);
  return r;
}

RunResult run(const Scenario& scenario, EngineOptions options) {
  Engine engine(scenario, options);
  return engine.run();
}

}  // namespace mccsim
