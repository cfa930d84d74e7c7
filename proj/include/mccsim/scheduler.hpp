#pragma once

// Space-shared VM placement onto host PEs and fluid time-shared execution of
// cloudlets inside a VM. Progress is materialized only at events; between
// events every running cloudlet advances linearly at capacity * cores MI/s.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mccsim/model.hpp"

namespace mccsim {

struct NextCompletion {
  std::string cloudlet_id;
  double eft = 0.0;
};

/// A cloudlet inside a VM together with its declaration rank and current eft.
struct TaskSlot {
  std::size_t order = 0;
  Cloudlet cloudlet;
  double eft = 0.0;
};

struct VmRuntime {
  Vm vm;
  // Sorted by order; finished tasks stay for bookkeeping.
  std::vector<TaskSlot> tasks;
  double last_update = 0.0;
  double capacity = 0.0;  // current per-core time-shared capacity
  std::optional<NextCompletion> next_completion;
  // Bumped whenever next_completion is recomputed, to detect stale events.
  std::uint64_t generation = 0;

  explicit VmRuntime(Vm v) : vm(std::move(v)) {}

  long long running_core_demand() const noexcept;
  bool busy() const noexcept;
  const TaskSlot* find(const std::string& cloudlet_id) const noexcept;
  std::vector<ProcessingElement> virtual_pes() const;
};

/// First-fit placement: the first host (in declaration order) with enough
/// free PEs of sufficient strength, reserving the lowest-indexed ones.
/// Returns nullopt when no host qualifies. Throws if the node is down.
std::optional<HostBinding> place_vm(Vm& vm, CloudNode& node);

/// Inverse of place_vm with no busy check. Returns the freed PE indices.
std::vector<std::size_t> unbind_vm(Vm& vm, CloudNode& node);

/// Like unbind_vm but refuses while the VM still runs cloudlets.
std::vector<std::size_t> release_vm(Vm& vm, CloudNode& node, const VmRuntime& runtime);

/// Starts a pending cloudlet at ct. Every running cloudlet is first advanced
/// to ct, then capacity and all efts are recomputed. `order` is the
/// cloudlet's declaration rank; by default it ranks after existing tasks.
void submit_cloudlet(VmRuntime& runtime, Cloudlet cloudlet, double ct,
                     std::optional<std::size_t> order = std::nullopt);

/// Advances all running cloudlets to ct and returns the ids of those that
/// completed, in declaration order.
std::vector<std::string> on_event_reschedule(VmRuntime& runtime, double ct);

/// Removes every running cloudlet from the VM without advancing progress and
/// returns them as pending tasks carrying their materialized remaining length.
std::vector<TaskSlot> detach_running(VmRuntime& runtime, double ct);

}  // namespace mccsim
