#pragma once

// Application allocation across distributed cloud nodes: largest demand first,
// access-point-aware node preference, whole-VM spillover across nodes in
// dynamic mode, and a pending queue drained whenever capacity is freed.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mccsim/model.hpp"

namespace mccsim {

struct VmPlacement {
  std::string vm_id;
  HostBinding binding;

  bool operator==(const VmPlacement&) const = default;
};

struct AllocationPlan {
  std::string app_id;
  std::vector<VmPlacement> placements;
  bool spilled = false;  // some VM landed off the preferred node

  bool operator==(const AllocationPlan&) const = default;
};

/// Applications waiting for capacity, kept ordered by descending resource
/// requirement, then submit time, then declaration order.
class PendingQueue {
 public:
  struct Entry {
    std::string app_id;
    double requirement = 0.0;
    double submit_time_s = 0.0;
    std::size_t declaration_order = 0;
    bool force_dynamic = false;  // re-placement after a node failure
  };

  void push(Entry entry);
  bool contains(std::string_view app_id) const noexcept;
  void remove(std::string_view app_id);
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

 private:
  std::vector<Entry> entries_;
};

/// Indices into `apps`, stably sorted by resource requirement, largest first.
std::vector<std::size_t> sort_applications(std::span<const Application> apps);

/// Node the device's current access point routes to.
std::string preferred_node(const MobileDevice& device, std::span<const AccessPoint> aps);

/// Sum over hosts of the mean PE strength times the host's PE count (free PEs only for the free form).
double node_total_capacity(const CloudNode& node);
double node_free_capacity(const CloudNode& node);

/// Alive nodes the application may use, in the order they are tried.
std::vector<CloudNode*> eligible_nodes(const Application& app, std::vector<CloudNode>& nodes,
                                       std::string_view preferred);

/// Places every currently unbound VM of `app`. The whole set lands on the
/// first eligible node when its demand is strictly below that node's free
/// capacity and first-fit succeeds; otherwise, in dynamic mode, VMs are placed
/// one by one on the first eligible node that takes them. Returns nullopt
/// (queued) with all reservations untouched if any VM stays unplaced.
std::optional<AllocationPlan> allocate_application(Application& app, std::vector<CloudNode>& nodes,
                                                   std::string_view preferred, bool dynamic);

/// Looks up the node an application should prefer when (re)allocated.
using RouteFn = std::function<std::string(const Application&)>;

struct ReleaseResult {
  std::vector<VmPlacement> freed;
  std::vector<AllocationPlan> admitted;
};

/// Admits queued applications, in queue order, that fit now.
std::vector<AllocationPlan> drain_queue(PendingQueue& queue, std::vector<Application>& apps,
                                        std::vector<CloudNode>& nodes, const RouteFn& route,
                                        bool dynamic);

/// Frees every VM of a finished application and then drains the queue.
ReleaseResult release_application(Application& app, std::vector<Application>& apps,
                                  std::vector<CloudNode>& nodes, PendingQueue& queue,
                                  const RouteFn& route, bool dynamic);

}  // namespace mccsim
