#include "mccsim/central_log.hpp"

#include <algorithm>

namespace mccsim {

namespace {

constexpr std::pair<LogKind, std::string_view> kKindNames[] = {
    {LogKind::Allocated, "allocated"}, {LogKind::Progress, "progress"},
    {LogKind::Finished, "finished"},   {LogKind::Released, "released"},
    {LogKind::Failed, "failed"},       {LogKind::Reallocated, "reallocated"},
    {LogKind::Queued, "queued"},       {LogKind::Recovered, "recovered"},
};

}  // namespace

std::string_view to_string(LogKind kind) noexcept {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "progress";
}

std::optional<LogKind> parse_log_kind(std::string_view s) noexcept {
  for (const auto& [k, name] : kKindNames) {
    if (name == s) return k;
  }
  return std::nullopt;
}

void CentralLog::append(LogEntry entry) {
  if (!entries_.empty() && entry.time < entries_.back().time) {
    throw LogError("log time went backwards");
  }
  entries_.push_back(std::move(entry));
}

std::vector<LogEntry> CentralLog::truncated_at(double t) const {
  auto end = std::find_if(entries_.begin(), entries_.end(),
                          [t](const LogEntry& e) { return e.time > t; });
  return {entries_.begin(), end};
}

ReplayState replay(std::span<const LogEntry> entries) {
  ReplayState state;
  for (const auto& e : entries) {
    switch (e.kind) {
      case LogKind::Allocated:
      case LogKind::Reallocated:
        state.placements[e.vm_id] = HostBinding{e.node_id, e.host_id, e.pe_indices};
        break;
      case LogKind::Released:
        state.placements.erase(e.vm_id);
        break;
      case LogKind::Failed:
        if (e.vm_id.empty()) {
          state.down_nodes.insert(e.node_id);
        } else {
          state.placements.erase(e.vm_id);
        }
        break;
      case LogKind::Recovered:
        state.down_nodes.erase(e.node_id);
        break;
      case LogKind::Progress:
        state.remaining[e.cloudlet_id] = e.remaining_mi;
        break;
      case LogKind::Finished:
        state.remaining[e.cloudlet_id] = 0.0;
        break;
      case LogKind::Queued:
        break;
    }
  }
  return state;
}

}  // namespace mccsim
