#include "mccsim/capacity.hpp"

#include <algorithm>

namespace mccsim {

namespace {

double total_mips(std::span<const ProcessingElement> pes) {
  double sum = 0.0;
  for (const auto& pe : pes) sum += pe.mips;
  return sum;
}

}  // namespace

double space_shared_capacity(std::span<const ProcessingElement> pes) {
  if (pes.empty()) throw CapacityError("host has no processing elements");
  return total_mips(pes) / static_cast<double>(pes.size());
}

double time_shared_capacity(std::span<const ProcessingElement> pes, long long active_core_demand) {
  if (pes.empty()) throw CapacityError("host has no processing elements");
  if (active_core_demand < 0) throw CapacityError("negative core demand");
  const auto np = static_cast<long long>(pes.size());
  return total_mips(pes) / static_cast<double>(std::max(active_core_demand, np));
}

double estimated_finish_time(double ct, double remaining_mi, double capacity, int cores) {
  if (!(capacity > 0.0)) throw CapacityError("no processing capacity");
  if (cores < 1) throw CapacityError("cloudlet needs at least one core");
  if (remaining_mi <= 0.0) return ct;
  return ct + remaining_mi / (capacity * static_cast<double>(cores));
}

double advance_progress(const Cloudlet& cloudlet, double capacity, double dt) {
  if (dt < 0.0) throw CapacityError("negative time step");
  if (dt == 0.0) return cloudlet.remaining_mi;
  const double done = capacity * static_cast<double>(cloudlet.cores) * dt;
  return std::max(0.0, cloudlet.remaining_mi - done);
}

}  // namespace mccsim
