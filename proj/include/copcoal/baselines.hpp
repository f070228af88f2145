#pragma once

#include "copcoal/coalition.hpp"
#include "copcoal/network.hpp"
#include "copcoal/rng.hpp"

namespace copcoal {

enum class BaselinePolicy { RandomMaxSize };

/// Uniformly shuffled sensors cut into coalitions of the largest strictly
/// feasible size k*, the last one holding the remainder.
Partition random_partition(const NetworkModel& net, const EnergyModel& e, Rng& rng);

}  // namespace copcoal
