#pragma once

// Append-only allocation/progress log kept at the central cloud. Replaying it
// rebuilds the VM placement map and every started cloudlet's remaining length.

#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mccsim/model.hpp"

namespace mccsim {

enum class LogKind { Allocated, Progress, Finished, Released, Failed, Reallocated, Queued, Recovered };

std::string_view to_string(LogKind kind) noexcept;
std::optional<LogKind> parse_log_kind(std::string_view s) noexcept;

struct LogEntry {
  double time = 0.0;
  LogKind kind = LogKind::Progress;
  std::string app_id;
  std::string vm_id;
  std::string cloudlet_id;
  double remaining_mi = 0.0;
  std::string node_id;
  std::string host_id;
  std::vector<std::size_t> pe_indices;

  bool operator==(const LogEntry&) const = default;
};

/// State reconstructed from the log.
struct ReplayState {
  std::map<std::string, HostBinding> placements;  // vm id -> binding
  std::map<std::string, double> remaining;        // cloudlet id -> remaining MI
  std::set<std::string> down_nodes;

  bool operator==(const ReplayState&) const = default;
};

class CentralLog {
 public:
  /// Throws LogError if the entry is older than the last one.
  void append(LogEntry entry);

  const std::vector<LogEntry>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }

  /// Entries with time <= t.
  std::vector<LogEntry> truncated_at(double t) const;

 private:
  std::vector<LogEntry> entries_;
};

ReplayState replay(std::span<const LogEntry> entries);

}  // namespace mccsim
