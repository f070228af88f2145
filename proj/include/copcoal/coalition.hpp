#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

namespace copcoal {

using SensorId = int;

/// Nonempty, sorted, duplicate-free set of sensor ids.
class Coalition {
public:
    explicit Coalition(std::vector<SensorId> members);
    Coalition(std::initializer_list<SensorId> members) : Coalition(std::vector<SensorId>(members)) {}

    static Coalition singleton(SensorId id) { return Coalition({id}); }

    const std::vector<SensorId>& members() const noexcept { return members_; }
    std::size_t size() const noexcept { return members_.size(); }
    SensorId smallest() const noexcept { return members_.front(); }
    bool contains(SensorId id) const;

    Coalition unite(const Coalition& other) const;

    /// Ids joined by single spaces, e.g. "0 3 5".
    std::string to_string() const;

    friend bool operator==(const Coalition&, const Coalition&) = default;
    // Canonical order: by smallest member, then lexicographic.
    friend std::strong_ordering operator<=>(const Coalition& a, const Coalition& b) { return a.members_ <=> b.members_; }

private:
    std::vector<SensorId> members_;
};

struct CoalitionHash {
    std::size_t operator()(const Coalition& c) const noexcept;
};

/// Disjoint coalitions covering sensors 0..N-1, kept in canonical order.
class Partition {
public:
    Partition(std::vector<Coalition> coalitions, std::size_t n_players);

    static Partition singletons(std::size_t n_players);
    static Partition grand(std::size_t n_players);

    const std::vector<Coalition>& coalitions() const noexcept { return coalitions_; }
    std::size_t size() const noexcept { return coalitions_.size(); }
    std::size_t players() const noexcept { return n_players_; }
    std::size_t max_coalition_size() const;
    /// Coalition containing `id`.
    const Coalition& coalition_of(SensorId id) const;

    /// Coalitions joined by ';', e.g. "0 3 5;1 2;4".
    std::string to_string() const;

    friend bool operator==(const Partition&, const Partition&) = default;

private:
    std::vector<Coalition> coalitions_;
    std::size_t n_players_;
    std::vector<std::size_t> owner_;
};

}  // namespace copcoal
