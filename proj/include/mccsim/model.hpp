#pragma once

// Domain types for the mobile-cloud hierarchy: devices reach access points,
// access points route to distributed cloud nodes, nodes hold hosts, hosts hold
// processing elements that VMs reserve exclusively.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mccsim/error.hpp"

namespace mccsim {

struct ProcessingElement {
  double mips = 0.0;

  bool operator==(const ProcessingElement&) const = default;
};

struct Host {
  std::string id;
  std::vector<ProcessingElement> pes;
  // reserved_by[i] names the VM holding PE i. Runtime state, never serialized.
  std::vector<std::optional<std::string>> reserved_by = {};

  std::size_t np() const noexcept { return pes.size(); }
  bool is_free(std::size_t pe) const noexcept {
    return pe >= reserved_by.size() || !reserved_by[pe].has_value();
  }
  std::size_t free_pe_count() const noexcept;
  void reserve(std::size_t pe, const std::string& vm_id);
  void release(std::size_t pe) noexcept;
  void release_all() noexcept { reserved_by.assign(pes.size(), std::nullopt); }

  // Compares reservations per PE, not the storage of reserved_by.
  bool operator==(const Host& other) const;
};

struct CloudNode {
  std::string id;
  std::vector<Host> hosts;
  bool alive = true;

  bool operator==(const CloudNode&) const = default;
};

struct HostBinding {
  std::string node_id;
  std::string host_id;
  std::vector<std::size_t> pe_indices;

  bool operator==(const HostBinding&) const = default;
};

struct Vm {
  std::string id;
  int cores = 1;
  double mips_per_core = 0.0;
  std::optional<HostBinding> binding = std::nullopt;

  bool operator==(const Vm&) const = default;
};

enum class CloudletState { Pending, Running, Finished };

struct Cloudlet {
  std::string id;
  double length_mi = 0.0;
  int cores = 1;
  std::string vm_id;
  double remaining_mi = 0.0;
  CloudletState state = CloudletState::Pending;
  // Offset from the application's arrival at the cloud to this task's arrival.
  double submit_delay_s = 0.0;

  bool operator==(const Cloudlet&) const = default;
};

/// Builds a pending cloudlet with its full length remaining.
Cloudlet make_cloudlet(std::string id, double length_mi, int cores,
                       std::string vm_id, double submit_delay_s = 0.0);

enum class ApplicationClass { Private, Public, Hybrid };

std::string_view to_string(ApplicationClass c) noexcept;
std::optional<ApplicationClass> parse_application_class(std::string_view s) noexcept;
std::string_view to_string(CloudletState s) noexcept;

struct Application {
  std::string id;
  std::string device_id;
  ApplicationClass app_class = ApplicationClass::Public;
  std::vector<std::string> owned_nodes;
  std::vector<Vm> vms;
  std::vector<Cloudlet> cloudlets;
  double submit_time_s = 0.0;

  const Vm* find_vm(std::string_view vm_id) const noexcept;
  Vm* find_vm(std::string_view vm_id) noexcept;
  bool owns(std::string_view node_id) const noexcept;

  bool operator==(const Application&) const = default;
};

struct MobileDevice {
  std::string id;
  std::string ap_id;

  bool operator==(const MobileDevice&) const = default;
};

struct AccessPoint {
  std::string id;
  std::string preferred_node;
  double latency_ms = 0.0;

  bool operator==(const AccessPoint&) const = default;
};

enum class InjectedEventKind { NodeFail, NodeRecover, ApHandoff };

std::string_view to_string(InjectedEventKind k) noexcept;
std::optional<InjectedEventKind> parse_injected_event_kind(std::string_view s) noexcept;

/// A failure, recovery or handoff declared up front in the scenario.
struct InjectedEvent {
  double time_s = 0.0;
  InjectedEventKind kind = InjectedEventKind::NodeFail;
  std::string node_id;    // NodeFail / NodeRecover
  std::string device_id;  // ApHandoff
  std::string ap_id;      // ApHandoff

  bool operator==(const InjectedEvent&) const = default;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  bool dynamic = true;
  std::vector<CloudNode> nodes;
  std::vector<AccessPoint> access_points;
  std::vector<MobileDevice> devices;
  std::vector<Application> applications;
  std::vector<InjectedEvent> events;

  std::size_t cloudlet_count() const noexcept;
  std::size_t vm_count() const noexcept;

  bool operator==(const Scenario&) const = default;
};

/// Simulation time in seconds; never moves backwards.
class SimClock {
 public:
  double now() const noexcept { return now_; }
  void advance_to(double t);

 private:
  double now_ = 0.0;
};

/// One entry per violated scenario invariant; empty iff the scenario is runnable.
std::vector<ValidationError> validate_scenario(const Scenario& scenario);

/// MIPS demand of an application: the sum of cores * mips_per_core over its VMs.
double resource_requirement(const Application& app) noexcept;

}  // namespace mccsim
