#include "mccsim/scheduler.hpp"

#include <algorithm>
#include <limits>

#include "mccsim/capacity.hpp"

namespace mccsim {

long long VmRuntime::running_core_demand() const noexcept {
  long long demand = 0;
  for (const auto& t : tasks) {
    if (t.cloudlet.state == CloudletState::Running) demand += t.cloudlet.cores;
  }
  return demand;
}

bool VmRuntime::busy() const noexcept {
  return std::any_of(tasks.begin(), tasks.end(),
                     [](const TaskSlot& t) { return t.cloudlet.state == CloudletState::Running; });
}

const TaskSlot* VmRuntime::find(const std::string& cloudlet_id) const noexcept {
  auto it = std::find_if(tasks.begin(), tasks.end(),
                         [&](const TaskSlot& t) { return t.cloudlet.id == cloudlet_id; });
  return it == tasks.end() ? nullptr : &*it;
}

std::vector<ProcessingElement> VmRuntime::virtual_pes() const {
  return std::vector<ProcessingElement>(static_cast<std::size_t>(vm.cores),
                                        ProcessingElement{vm.mips_per_core});
}

std::optional<HostBinding> place_vm(Vm& vm, CloudNode& node) {
  if (!node.alive) throw SchedulerError("node down");
  if (vm.binding) throw SchedulerError("vm " + vm.id + " is already bound");
  const auto want = static_cast<std::size_t>(vm.cores);
  for (auto& host : node.hosts) {
    std::vector<std::size_t> picked;
    for (std::size_t i = 0; i < host.np() && picked.size() < want; ++i) {
      if (host.is_free(i) && host.pes[i].mips >= vm.mips_per_core) picked.push_back(i);
    }
    if (picked.size() < want) continue;
    for (auto i : picked) host.reserve(i, vm.id);
    vm.binding = HostBinding{node.id, host.id, std::move(picked)};
    return vm.binding;
  }
  return std::nullopt;
}

std::vector<std::size_t> unbind_vm(Vm& vm, CloudNode& node) {
  if (!vm.binding) throw SchedulerError("vm " + vm.id + " is not bound");
  if (vm.binding->node_id != node.id) {
    throw SchedulerError("vm " + vm.id + " is bound to node " + vm.binding->node_id);
  }
  auto host = std::find_if(node.hosts.begin(), node.hosts.end(),
                           [&](const Host& h) { return h.id == vm.binding->host_id; });
  if (host == node.hosts.end()) throw SchedulerError("unknown host " + vm.binding->host_id);
  auto freed = vm.binding->pe_indices;
  for (auto i : freed) {
    if (i < host->reserved_by.size() && host->reserved_by[i] == vm.id) host->release(i);
  }
  vm.binding.reset();
  return freed;
}

std::vector<std::size_t> release_vm(Vm& vm, CloudNode& node, const VmRuntime& runtime) {
  if (runtime.busy()) throw SchedulerError("vm busy");
  return unbind_vm(vm, node);
}

namespace {

void advance_all(VmRuntime& rt, double ct) {
  if (ct < rt.last_update) throw SchedulerError("clock went backwards");
  const double dt = ct - rt.last_update;
  if (dt > 0.0) {
    for (auto& t : rt.tasks) {
      if (t.cloudlet.state != CloudletState::Running) continue;
      t.cloudlet.remaining_mi = advance_progress(t.cloudlet, rt.capacity, dt);
    }
  }
  rt.last_update = ct;
}

void recompute(VmRuntime& rt, double ct) {
  const auto pes = rt.virtual_pes();
  rt.capacity = time_shared_capacity(pes, rt.running_core_demand());
  rt.next_completion.reset();
  double best = std::numeric_limits<double>::infinity();
  for (auto& t : rt.tasks) {
    if (t.cloudlet.state != CloudletState::Running) continue;
    t.eft = estimated_finish_time(ct, t.cloudlet.remaining_mi, rt.capacity, t.cloudlet.cores);
    // Strict comparison keeps the earliest-declared task on ties.
    if (t.eft < best) {
      best = t.eft;
      rt.next_completion = NextCompletion{t.cloudlet.id, t.eft};
    }
  }
  ++rt.generation;
}

}  // namespace

void submit_cloudlet(VmRuntime& runtime, Cloudlet cloudlet, double ct,
                     std::optional<std::size_t> order) {
  if (cloudlet.vm_id != runtime.vm.id) {
    throw SchedulerError("cloudlet " + cloudlet.id + " targets vm " + cloudlet.vm_id);
  }
  if (!runtime.vm.binding) throw SchedulerError("vm " + runtime.vm.id + " is not bound");
  if (cloudlet.state != CloudletState::Pending) {
    throw SchedulerError("cloudlet " + cloudlet.id + " is not pending");
  }
  if (cloudlet.cores > runtime.vm.cores) throw SchedulerError("cloudlet wider than VM");
  if (runtime.find(cloudlet.id) != nullptr) {
    throw SchedulerError("cloudlet " + cloudlet.id + " already submitted");
  }

  advance_all(runtime, ct);
  const std::size_t rank =
      order.value_or(runtime.tasks.empty() ? 0 : runtime.tasks.back().order + 1);
  cloudlet.state = CloudletState::Running;
  auto pos = std::upper_bound(runtime.tasks.begin(), runtime.tasks.end(), rank,
                              [](std::size_t r, const TaskSlot& t) { return r < t.order; });
  runtime.tasks.insert(pos, TaskSlot{rank, std::move(cloudlet), 0.0});
  recompute(runtime, ct);
}

std::vector<std::string> on_event_reschedule(VmRuntime& runtime, double ct) {
  advance_all(runtime, ct);
  std::vector<std::string> finished;
  for (auto& t : runtime.tasks) {
    if (t.cloudlet.state != CloudletState::Running) continue;
    // A residue too small to move the clock is rounding left over from eft.
    const bool residue = ct + t.cloudlet.remaining_mi / (runtime.capacity * t.cloudlet.cores) <= ct;
    if (t.cloudlet.remaining_mi <= kCompletionEpsilonMi || residue) {
      t.cloudlet.remaining_mi = 0.0;
      t.cloudlet.state = CloudletState::Finished;
      t.eft = ct;
      finished.push_back(t.cloudlet.id);
    }
  }
  recompute(runtime, ct);
  return finished;
}

std::vector<TaskSlot> detach_running(VmRuntime& runtime, double ct) {
  if (ct < runtime.last_update) throw SchedulerError("clock went backwards");
  std::vector<TaskSlot> detached;
  std::vector<TaskSlot> kept;
  for (auto& t : runtime.tasks) {
    if (t.cloudlet.state == CloudletState::Running) {
      t.cloudlet.state = CloudletState::Pending;
      detached.push_back(std::move(t));
    } else {
      kept.push_back(std::move(t));
    }
  }
  runtime.tasks = std::move(kept);
  runtime.last_update = ct;
  recompute(runtime, ct);
  return detached;
}

}  // namespace mccsim
