#include "mccsim/allocator.hpp"

#include <algorithm>
#include <numeric>

#include "mccsim/capacity.hpp"
#include "mccsim/scheduler.hpp"

namespace mccsim {

void PendingQueue::push(Entry entry) {
  if (contains(entry.app_id)) return;
  auto before = [](const Entry& a, const Entry& b) {
    if (a.requirement != b.requirement) return a.requirement > b.requirement;
    if (a.submit_time_s != b.submit_time_s) return a.submit_time_s < b.submit_time_s;
    return a.declaration_order < b.declaration_order;
  };
  auto pos = std::upper_bound(entries_.begin(), entries_.end(), entry, before);
  entries_.insert(pos, std::move(entry));
}

bool PendingQueue::contains(std::string_view app_id) const noexcept {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.app_id == app_id; });
}

void PendingQueue::remove(std::string_view app_id) {
  std::erase_if(entries_, [&](const Entry& e) { return e.app_id == app_id; });
}

std::vector<std::size_t> sort_applications(std::span<const Application> apps) {
  std::vector<std::size_t> order(apps.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> req(apps.size());
  for (std::size_t i = 0; i < apps.size(); ++i) req[i] = resource_requirement(apps[i]);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return req[a] > req[b]; });
  return order;
}

std::string preferred_node(const MobileDevice& device, std::span<const AccessPoint> aps) {
  auto it = std::find_if(aps.begin(), aps.end(),
                         [&](const AccessPoint& ap) { return ap.id == device.ap_id; });
  if (it == aps.end()) {
    throw AllocationError("device " + device.id + " is attached to unknown access point " +
                          device.ap_id);
  }
  return it->preferred_node;
}

double node_total_capacity(const CloudNode& node) {
  double total = 0.0;
  for (const auto& h : node.hosts) {
    total += space_shared_capacity(h.pes) * static_cast<double>(h.np());
  }
  return total;
}

double node_free_capacity(const CloudNode& node) {
  if (!node.alive) return 0.0;
  double total = 0.0;
  for (const auto& h : node.hosts) {
    total += space_shared_capacity(h.pes) * static_cast<double>(h.free_pe_count());
  }
  return total;
}

std::vector<CloudNode*> eligible_nodes(const Application& app, std::vector<CloudNode>& nodes,
                                       std::string_view preferred) {
  std::vector<CloudNode*> out, others;
  for (auto& n : nodes) {
    if (!n.alive) continue;
    if (app.app_class == ApplicationClass::Public || app.owns(n.id)) {
      out.push_back(&n);
    } else if (app.app_class == ApplicationClass::Hybrid) {
      others.push_back(&n);
    }
  }
  // The preferred node moves to the front of its own group; for Hybrid the
  // owned group always precedes the rest.
  auto to_front = [&](std::vector<CloudNode*>& group) {
    auto pref = std::find_if(group.begin(), group.end(),
                             [&](CloudNode* n) { return n->id == preferred; });
    if (pref != group.end()) std::rotate(group.begin(), pref, pref + 1);
  };
  to_front(out);
  to_front(others);
  out.insert(out.end(), others.begin(), others.end());
  return out;
}

namespace {

CloudNode& node_by_id(std::vector<CloudNode>& nodes, const std::string& id) {
  auto it = std::find_if(nodes.begin(), nodes.end(), [&](const CloudNode& n) { return n.id == id; });
  if (it == nodes.end()) throw AllocationError("unknown node " + id);
  return *it;
}

void undo(std::vector<Vm*>& placed, std::vector<CloudNode>& nodes) {
  for (auto it = placed.rbegin(); it != placed.rend(); ++it) {
    unbind_vm(**it, node_by_id(nodes, (*it)->binding->node_id));
  }
  placed.clear();
}

}  // namespace

std::optional<AllocationPlan> allocate_application(Application& app, std::vector<CloudNode>& nodes,
                                                   std::string_view preferred, bool dynamic) {
  if (app.app_class == ApplicationClass::Private && app.owned_nodes.empty()) {
    throw AllocationError("unplaceable by class");
  }
  std::vector<Vm*> pending;
  double demand = 0.0;
  for (auto& vm : app.vms) {
    if (!vm.binding) {
      pending.push_back(&vm);
      demand += static_cast<double>(vm.cores) * vm.mips_per_core;
    }
  }
  AllocationPlan plan{app.id, {}, false};
  if (pending.empty()) return plan;

  auto candidates = eligible_nodes(app, nodes, preferred);
  if (candidates.empty()) return std::nullopt;

  std::vector<Vm*> placed;
  bool done = false;
  CloudNode& first = *candidates.front();
  if (demand < node_free_capacity(first)) {
    done = true;
    for (Vm* vm : pending) {
      if (!place_vm(*vm, first)) {
        done = false;
        break;
      }
      placed.push_back(vm);
    }
    if (!done) undo(placed, nodes);
  }
  if (!done && dynamic) {
    done = true;
    for (Vm* vm : pending) {
      bool ok = false;
      for (CloudNode* node : candidates) {
        if (place_vm(*vm, *node)) {
          ok = true;
          break;
        }
      }
      if (!ok) {
        done = false;
        break;
      }
      placed.push_back(vm);
    }
    if (!done) undo(placed, nodes);
  }
  if (!done) return std::nullopt;

  for (Vm* vm : placed) {
    plan.spilled = plan.spilled || vm->binding->node_id != preferred;
    plan.placements.push_back({vm->id, *vm->binding});
  }
  return plan;
}

std::vector<AllocationPlan> drain_queue(PendingQueue& queue, std::vector<Application>& apps,
                                        std::vector<CloudNode>& nodes, const RouteFn& route,
                                        bool dynamic) {
  std::vector<AllocationPlan> admitted;
  const auto snapshot = queue.entries();
  for (const auto& entry : snapshot) {
    auto app = std::find_if(apps.begin(), apps.end(),
                            [&](const Application& a) { return a.id == entry.app_id; });
    if (app == apps.end()) throw AllocationError("queued application " + entry.app_id + " is unknown");
    auto plan = allocate_application(*app, nodes, route(*app), dynamic || entry.force_dynamic);
    if (plan) {
      queue.remove(entry.app_id);
      admitted.push_back(std::move(*plan));
    }
  }
  return admitted;
}

ReleaseResult release_application(Application& app, std::vector<Application>& apps,
                                  std::vector<CloudNode>& nodes, PendingQueue& queue,
                                  const RouteFn& route, bool dynamic) {
  for (const auto& c : app.cloudlets) {
    if (c.state != CloudletState::Finished) {
      throw AllocationError("application " + app.id + " has unfinished cloudlets");
    }
  }
  ReleaseResult result;
  for (auto& vm : app.vms) {
    if (!vm.binding) continue;
    HostBinding binding = *vm.binding;
    unbind_vm(vm, node_by_id(nodes, binding.node_id));
    result.freed.push_back({vm.id, std::move(binding)});
  }
  result.admitted = drain_queue(queue, apps, nodes, route, dynamic);
  return result;
}

}  // namespace mccsim
