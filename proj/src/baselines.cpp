#include "copcoal/baselines.hpp"

#include <algorithm>
#include <numeric>

namespace copcoal {

Partition random_partition(const NetworkModel& net, const EnergyModel& e, Rng& rng) {
    e.validate();
    const std::size_t n = net.size();
    const std::size_t k = e.max_feasible_size(n);
    std::vector<SensorId> order(n);
    std::iota(order.begin(), order.end(), 0);
    // Fisher-Yates on Rng::below so the permutation does not depend on the
    // standard library's shuffle
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    std::vector<Coalition> cs;
    for (std::size_t lo = 0; lo < n; lo += k) {
        const std::size_t hi = std::min(lo + k, n);
        cs.emplace_back(std::vector<SensorId>(order.begin() + static_cast<std::ptrdiff_t>(lo),
                                              order.begin() + static_cast<std::ptrdiff_t>(hi)));
    }
    return Partition(std::move(cs), n);
}

}  // namespace copcoal
