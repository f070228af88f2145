#include "copcoal/coalition.hpp"

#include <algorithm>

#include "copcoal/error.hpp"

namespace copcoal {

Coalition::Coalition(std::vector<SensorId> members) : members_(std::move(members)) {
    require(!members_.empty(), ErrorKind::EmptyCoalition, "coalition must be nonempty");
    std::sort(members_.begin(), members_.end());
    require(std::adjacent_find(members_.begin(), members_.end()) == members_.end(), ErrorKind::InvalidPartition,
            "duplicate sensor id in coalition");
    require(members_.front() >= 0, ErrorKind::InvalidPartition, "negative sensor id");
}

bool Coalition::contains(SensorId id) const { return std::binary_search(members_.begin(), members_.end(), id); }

Coalition Coalition::unite(const Coalition& other) const {
    std::vector<SensorId> out;
    out.reserve(size() + other.size());
    std::merge(members_.begin(), members_.end(), other.members_.begin(), other.members_.end(), std::back_inserter(out));
    return Coalition(std::move(out));
}

std::string Coalition::to_string() const {
    std::string s;
    for (std::size_t i = 0; i < members_.size(); ++i) {
        if (i) s += ' ';
        s += std::to_string(members_[i]);
    }
    return s;
}

std::size_t CoalitionHash::operator()(const Coalition& c) const noexcept {
    std::size_t h = 1469598103934665603ULL;
    for (SensorId id : c.members()) {
        h ^= static_cast<std::size_t>(id) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

Partition::Partition(std::vector<Coalition> coalitions, std::size_t n_players)
    : coalitions_(std::move(coalitions)), n_players_(n_players), owner_(n_players, n_players) {
    std::sort(coalitions_.begin(), coalitions_.end());
    for (std::size_t c = 0; c < coalitions_.size(); ++c) {
        for (SensorId id : coalitions_[c].members()) {
            require(static_cast<std::size_t>(id) < n_players, ErrorKind::InvalidPartition,
                    "sensor id " + std::to_string(id) + " out of range");
            require(owner_[static_cast<std::size_t>(id)] == n_players, ErrorKind::InvalidPartition,
                    "sensor " + std::to_string(id) + " appears in two coalitions");
            owner_[static_cast<std::size_t>(id)] = c;
        }
    }
    for (std::size_t i = 0; i < n_players; ++i) {
        require(owner_[i] != n_players, ErrorKind::InvalidPartition, "sensor " + std::to_string(i) + " not covered");
    }
}

Partition Partition::singletons(std::size_t n_players) {
    std::vector<Coalition> cs;
    cs.reserve(n_players);
    for (std::size_t i = 0; i < n_players; ++i) cs.push_back(Coalition::singleton(static_cast<SensorId>(i)));
    return Partition(std::move(cs), n_players);
}

Partition Partition::grand(std::size_t n_players) {
    std::vector<SensorId> all(n_players);
    for (std::size_t i = 0; i < n_players; ++i) all[i] = static_cast<SensorId>(i);
    return Partition({Coalition(std::move(all))}, n_players);
}

std::size_t Partition::max_coalition_size() const {
    std::size_t m = 0;
    for (const auto& c : coalitions_) m = std::max(m, c.size());
    return m;
}

const Coalition& Partition::coalition_of(SensorId id) const {
    require(id >= 0 && static_cast<std::size_t>(id) < n_players_, ErrorKind::OutOfRange, "sensor id out of range");
    return coalitions_[owner_[static_cast<std::size_t>(id)]];
}

std::string Partition::to_string() const {
    std::string s;
    for (std::size_t i = 0; i < coalitions_.size(); ++i) {
        if (i) s += ';';
        s += coalitions_[i].to_string();
    }
    return s;
}

}  // namespace copcoal
