#pragma once

// Network builders shared by the unit tests and the acceptance binary.

#include <cmath>
#include <numbers>
#include <vector>

#include "copcoal/network.hpp"

namespace copcoal::testing {

/// Sensor distance that the dependence model maps to correlation `rho`;
/// rho = 0 puts the sensors far enough apart that tau underflows.
inline double distance_for_rho(double rho) {
    if (rho <= 0.0) return 40.0;
    const double tau = 2.0 / std::numbers::pi * std::asin(rho);
    return std::sqrt(-std::log(tau));
}

inline EnergyModel unit_energy(double alpha = 4.0) {
    EnergyModel e;
    e.alpha = alpha;
    return e;
}

/// Two Gaussian sensors with the given scales and correlation.
inline NetworkModel gaussian_pair(double sigma_x, double sigma_y, double rho, EnergyModel e = unit_energy()) {
    std::vector<Sensor> s = {{0, {0.0, 0.0}, GaussianMean{sigma_x}},
                             {1, {distance_for_rho(rho), 0.0}, GaussianMean{sigma_y}}};
    return NetworkModel(std::move(s), {-1.0, -1.0}, e);
}

/// Uniform deployment with independent random scales in [0.5, 2].
inline NetworkModel random_gaussian_network(std::size_t n, Rng& rng, double side = 1.0, EnergyModel e = unit_energy()) {
    auto s = deploy_uniform(n, Region{0.0, side, 0.0, side}, rng);
    for (auto& x : s) x.marginal = GaussianMean{rng.uniform(0.5, 2.0)};
    return NetworkModel(std::move(s), {side / 2, side / 2}, e);
}

}  // namespace copcoal::testing
