#include "mccsim/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace mccsim {

ScenarioError::ScenarioError(std::vector<ValidationError> errors)
    : SimError(errors.empty() ? std::string("invalid scenario")
                              : errors.front().path + ": " + errors.front().message),
      errors_(std::move(errors)) {}

ScenarioError::ScenarioError(std::string path, std::string message)
    : ScenarioError(std::vector<ValidationError>{{std::move(path), std::move(message)}}) {}

std::size_t Host::free_pe_count() const noexcept {
  std::size_t n = 0;
  for (std::size_t i = 0; i < pes.size(); ++i) {
    if (is_free(i)) ++n;
  }
  return n;
}

void Host::reserve(std::size_t pe, const std::string& vm_id) {
  if (pe >= pes.size()) throw SchedulerError("PE index out of range on host " + id);
  if (reserved_by.size() < pes.size()) reserved_by.resize(pes.size());
  if (reserved_by[pe]) {
    throw SchedulerError("PE " + std::to_string(pe) + " of host " + id +
                         " already reserved by " + *reserved_by[pe]);
  }
  reserved_by[pe] = vm_id;
}

bool Host::operator==(const Host& other) const {
  if (id != other.id || pes != other.pes) return false;
  for (std::size_t i = 0; i < pes.size(); ++i) {
    const bool mine = !is_free(i);
    if (mine != !other.is_free(i)) return false;
    if (mine && *reserved_by[i] != *other.reserved_by[i]) return false;
  }
  return true;
}

void Host::release(std::size_t pe) noexcept {
  if (pe < reserved_by.size()) reserved_by[pe].reset();
}

Cloudlet make_cloudlet(std::string id, double length_mi, int cores, std::string vm_id,
                       double submit_delay_s) {
  Cloudlet c;
  c.id = std::move(id);
  c.length_mi = length_mi;
  c.cores = cores;
  c.vm_id = std::move(vm_id);
  c.remaining_mi = length_mi;
  c.state = CloudletState::Pending;
  c.submit_delay_s = submit_delay_s;
  return c;
}

std::string_view to_string(ApplicationClass c) noexcept {
  switch (c) {
    case ApplicationClass::Private: return "private";
    case ApplicationClass::Public: return "public";
    case ApplicationClass::Hybrid: return "hybrid";
  }
  return "public";
}

std::optional<ApplicationClass> parse_application_class(std::string_view s) noexcept {
  if (s == "private") return ApplicationClass::Private;
  if (s == "public") return ApplicationClass::Public;
  if (s == "hybrid") return ApplicationClass::Hybrid;
  return std::nullopt;
}

std::string_view to_string(CloudletState s) noexcept {
  switch (s) {
    case CloudletState::Pending: return "pending";
    case CloudletState::Running: return "running";
    case CloudletState::Finished: return "finished";
  }
  return "pending";
}

std::string_view to_string(InjectedEventKind k) noexcept {
  switch (k) {
    case InjectedEventKind::NodeFail: return "node_fail";
    case InjectedEventKind::NodeRecover: return "node_recover";
    case InjectedEventKind::ApHandoff: return "ap_handoff";
  }
  return "node_fail";
}

std::optional<InjectedEventKind> parse_injected_event_kind(std::string_view s) noexcept {
  if (s == "node_fail") return InjectedEventKind::NodeFail;
  if (s == "node_recover") return InjectedEventKind::NodeRecover;
  if (s == "ap_handoff") return InjectedEventKind::ApHandoff;
  return std::nullopt;
}

const Vm* Application::find_vm(std::string_view vm_id) const noexcept {
  auto it = std::find_if(vms.begin(), vms.end(), [&](const Vm& v) { return v.id == vm_id; });
  return it == vms.end() ? nullptr : &*it;
}

Vm* Application::find_vm(std::string_view vm_id) noexcept {
  auto it = std::find_if(vms.begin(), vms.end(), [&](const Vm& v) { return v.id == vm_id; });
  return it == vms.end() ? nullptr : &*it;
}

bool Application::owns(std::string_view node_id) const noexcept {
  return std::find(owned_nodes.begin(), owned_nodes.end(), node_id) != owned_nodes.end();
}

std::size_t Scenario::cloudlet_count() const noexcept {
  std::size_t n = 0;
  for (const auto& a : applications) n += a.cloudlets.size();
  return n;
}

std::size_t Scenario::vm_count() const noexcept {
  std::size_t n = 0;
  for (const auto& a : applications) n += a.vms.size();
  return n;
}

void SimClock::advance_to(double t) {
  if (t < now_) throw SchedulerError("clock went backwards");
  now_ = t;
}

double resource_requirement(const Application& app) noexcept {
  double total = 0.0;
  for (const auto& vm : app.vms) total += static_cast<double>(vm.cores) * vm.mips_per_core;
  return total;
}

namespace {

std::string idx(std::string_view base, std::size_t i) {
  return std::string(base) + "[" + std::to_string(i) + "]";
}

bool positive(double v) { return std::isfinite(v) && v > 0.0; }
bool non_negative(double v) { return std::isfinite(v) && v >= 0.0; }

class Validator {
 public:
  explicit Validator(const Scenario& s) : s_(s) {}

  std::vector<ValidationError> run() {
    check_nodes();
    check_access_points();
    check_devices();
    check_applications();
    check_events();
    return std::move(errors_);
  }

 private:
  void error(std::string path, std::string message) {
    errors_.push_back({std::move(path), std::move(message)});
  }

  void check_id(std::set<std::string>& seen, const std::string& id, const std::string& path,
                std::string_view kind) {
    if (id.empty()) {
      error(path + ".id", std::string(kind) + " id must be non-empty");
    } else if (!seen.insert(id).second) {
      error(path + ".id", "duplicate " + std::string(kind) + " id '" + id + "'");
    }
  }

  void check_nodes() {
    std::set<std::string> hosts;
    for (std::size_t n = 0; n < s_.nodes.size(); ++n) {
      const auto& node = s_.nodes[n];
      const auto np = idx("nodes", n);
      check_id(nodes_, node.id, np, "node");
      if (node.hosts.empty()) error(np + ".hosts", "node has no hosts");
      for (std::size_t h = 0; h < node.hosts.size(); ++h) {
        const auto& host = node.hosts[h];
        const auto hp = np + "." + idx("hosts", h);
        check_id(hosts, host.id, hp, "host");
        if (host.pes.empty()) error(hp + ".pes", "host has no processing elements");
        for (std::size_t p = 0; p < host.pes.size(); ++p) {
          if (!positive(host.pes[p].mips)) error(hp + "." + idx("pes", p), "mips must be positive");
        }
      }
    }
  }

  void check_access_points() {
    for (std::size_t i = 0; i < s_.access_points.size(); ++i) {
      const auto& ap = s_.access_points[i];
      const auto p = idx("access_points", i);
      check_id(aps_, ap.id, p, "access point");
      if (!nodes_.contains(ap.preferred_node)) {
        error(p + ".preferred_node", "dangling reference: node '" + ap.preferred_node + "'");
      }
      if (!non_negative(ap.latency_ms)) error(p + ".latency_ms", "latency must be non-negative");
    }
  }

  void check_devices() {
    for (std::size_t i = 0; i < s_.devices.size(); ++i) {
      const auto& d = s_.devices[i];
      const auto p = idx("devices", i);
      check_id(devices_, d.id, p, "device");
      if (!aps_.contains(d.ap_id)) error(p + ".ap", "dangling reference: access point '" + d.ap_id + "'");
    }
  }

  void check_applications() {
    std::set<std::string> apps, vms, cloudlets;
    for (std::size_t a = 0; a < s_.applications.size(); ++a) {
      const auto& app = s_.applications[a];
      const auto ap = idx("applications", a);
      check_id(apps, app.id, ap, "application");
      if (!devices_.contains(app.device_id)) {
        error(ap + ".device", "dangling reference: device '" + app.device_id + "'");
      }
      if (!non_negative(app.submit_time_s)) error(ap + ".submit_time_s", "submit time must be non-negative");
      for (std::size_t o = 0; o < app.owned_nodes.size(); ++o) {
        if (!nodes_.contains(app.owned_nodes[o])) {
          error(ap + "." + idx("owned_nodes", o), "dangling reference: node '" + app.owned_nodes[o] + "'");
        }
      }
      if (app.app_class == ApplicationClass::Private && app.owned_nodes.empty()) {
        error(ap + ".owned_nodes", "unplaceable by class: private application owns no nodes");
      }
      std::map<std::string, int> vm_cores;
      for (std::size_t v = 0; v < app.vms.size(); ++v) {
        const auto& vm = app.vms[v];
        const auto vp = ap + "." + idx("vms", v);
        check_id(vms, vm.id, vp, "vm");
        if (vm.cores < 1) error(vp + ".cores", "cores must be a positive integer");
        if (!positive(vm.mips_per_core)) error(vp + ".mips_per_core", "mips_per_core must be positive");
        vm_cores.emplace(vm.id, vm.cores);
      }
      for (std::size_t c = 0; c < app.cloudlets.size(); ++c) {
        const auto& cl = app.cloudlets[c];
        const auto cp = ap + "." + idx("cloudlets", c);
        check_id(cloudlets, cl.id, cp, "cloudlet");
        if (!positive(cl.length_mi)) error(cp + ".length_mi", "length_mi must be positive");
        if (cl.cores < 1) error(cp + ".cores", "cores must be a positive integer");
        if (!non_negative(cl.submit_delay_s)) error(cp + ".submit_delay_s", "submit delay must be non-negative");
        if (!(cl.remaining_mi >= 0.0 && cl.remaining_mi <= cl.length_mi)) {
          error(cp + ".remaining_mi", "remaining length outside [0, length_mi]");
        }
        auto it = vm_cores.find(cl.vm_id);
        if (it == vm_cores.end()) {
          error(cp + ".vm", "dangling reference: cloudlet '" + cl.id + "' targets undeclared vm '" +
                                cl.vm_id + "'");
        } else if (cl.cores > it->second) {
          error(cp + ".cores", "cloudlet wider than VM");
        }
      }
    }
  }

  void check_events() {
    // Replays fail/recover per node in time order to reject impossible sequences.
    std::vector<std::size_t> order(s_.events.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
      return s_.events[l].time_s < s_.events[r].time_s;
    });
    std::set<std::string> down;
    for (std::size_t i : order) {
      const auto& e = s_.events[i];
      const auto p = idx("events", i);
      if (!non_negative(e.time_s)) error(p + ".time_s", "event time must be non-negative");
      switch (e.kind) {
        case InjectedEventKind::NodeFail:
        case InjectedEventKind::NodeRecover:
          if (!nodes_.contains(e.node_id)) {
            error(p + ".node", "dangling reference: node '" + e.node_id + "'");
          } else if (e.kind == InjectedEventKind::NodeFail && !down.insert(e.node_id).second) {
            error(p, "node '" + e.node_id + "' fails while already down");
          } else if (e.kind == InjectedEventKind::NodeRecover && down.erase(e.node_id) == 0) {
            error(p, "node '" + e.node_id + "' recovers while alive");
          }
          break;
        case InjectedEventKind::ApHandoff:
          if (!devices_.contains(e.device_id)) error(p + ".device", "dangling reference: device '" + e.device_id + "'");
          if (!aps_.contains(e.ap_id)) error(p + ".ap", "dangling reference: access point '" + e.ap_id + "'");
          break;
      }
    }
  }

  const Scenario& s_;
  std::vector<ValidationError> errors_;
  std::set<std::string> nodes_, aps_, devices_;
};

}  // namespace

std::vector<ValidationError> validate_scenario(const Scenario& scenario) {
  return Validator(scenario).run();
}

}  // namespace mccsim
