#pragma once

// Processing-capacity formulas. Capacities are per-core MIPS; times are seconds.

#include <span>

#include "mccsim/model.hpp"

namespace mccsim {

/// Remaining length at or below this many MI counts as finished.
inline constexpr double kCompletionEpsilonMi = 1e-9;

enum class CapacityBasis { SpaceShared, TimeShared };

struct CapacityView {
  double per_core_capacity = 0.0;
  CapacityBasis basis = CapacityBasis::SpaceShared;
};

/// Mean PE strength of a host: sum of cap(i)/np.
double space_shared_capacity(std::span<const ProcessingElement> pes);

/// Per-core share when cloudlets demanding `active_core_demand` cores multitask
/// on the PEs: sum of cap(i) / max(demand, np).
double time_shared_capacity(std::span<const ProcessingElement> pes, long long active_core_demand);

/// ct + remaining / (capacity * cores). Exactly ct when nothing remains.
double estimated_finish_time(double ct, double remaining_mi, double capacity, int cores);

/// Remaining length after running for dt seconds at capacity * cores MI/s, clamped at 0.
double advance_progress(const Cloudlet& cloudlet, double capacity, double dt);

}  // namespace mccsim
