#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "copcoal/coalition.hpp"
#include "copcoal/copula.hpp"
#include "copcoal/rng.hpp"
#include "copcoal/univariate.hpp"

namespace copcoal {

struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

double distance(Point a, Point b);

struct Region {
    double x_min = 0.0;
    double x_max = 1.5;
    double y_min = 0.0;
    double y_max = 1.5;

    bool contains(Point p) const { return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max; }
};

/// Observation ~ Normal(theta, sigma^2).
struct GaussianMean {
    double sigma = 1.0;
};

/// Observation ~ Exponential with rate theta (density theta * exp(-theta x)).
struct ExponentialRate {};

using MarginalModel = std::variant<GaussianMean, ExponentialRate>;

bool is_gaussian(const MarginalModel& m);
std::string describe(const MarginalModel& m);

double marginal_log_pdf(const MarginalModel& m, double x, double theta);
TailProb marginal_cdf(const MarginalModel& m, double x, double theta);
double marginal_quantile(const MarginalModel& m, TailProb u, double theta);

struct Sensor {
    SensorId id = 0;
    Point location;
    MarginalModel marginal = GaussianMean{};
};

struct EnergyModel {
    double requests_per_unit_time = 1.0;  // r
    double energy_per_transmission = 1.0; // E_t
    double alpha = 4.0;                   // energy budget
    double t_barrier = 1.0;               // barrier control parameter t

    void validate() const;
    /// Largest coalition size k with r (k - 1) E_t < alpha, capped at n_max.
    std::size_t max_feasible_size(std::size_t n_max) const;
};

enum class VariancePolicy {
    PaperLiteral,          // sigma^2 = 1 / d
    DistanceProportional,  // sigma^2 = d
};

const char* to_string(VariancePolicy p);

inline constexpr double kSourceGuard = 1e-6;
/// Default floor for the correlation repair; see README ("Dependence model").
inline constexpr double kDefaultPsdFloor = 1e-2;

/// Immutable network description: sensors, source, dependence structure and
/// energy parameters.
class NetworkModel {
public:
    NetworkModel(std::vector<Sensor> sensors, Point source, EnergyModel energy, double psd_floor = kDefaultPsdFloor);

    std::size_t size() const noexcept { return sensors_.size(); }
    const std::vector<Sensor>& sensors() const noexcept { return sensors_; }
    const Sensor& sensor(SensorId id) const { return sensors_.at(static_cast<std::size_t>(id)); }
    Point source() const noexcept { return source_; }
    const Matrix& tau_matrix() const noexcept { return tau_; }
    const Matrix& corr_matrix() const noexcept { return corr_; }
    const EnergyModel& energy() const noexcept { return energy_; }
    double psd_floor() const noexcept { return psd_floor_; }

    /// Correlation submatrix for the coalition's members (in member order).
    Matrix corr_block(const Coalition& s) const;
    /// Covariance Sigma_S = D R_S D for all-Gaussian coalitions.
    Matrix covariance_block(const Coalition& s) const;
    bool all_gaussian(const Coalition& s) const;
    bool all_gaussian() const;

    NetworkModel with_energy(EnergyModel e) const;

private:
    std::vector<Sensor> sensors_;
    Point source_;
    EnergyModel energy_;
    double psd_floor_;
    Matrix tau_;
    Matrix corr_;
};

/// tau(n, m) = exp(-||s_n - s_m||^2).
Matrix build_tau_matrix(std::span<const Sensor> sensors);
/// rho = sin(pi tau / 2) entrywise, then nearest_psd with the given floor.
Matrix build_correlation_matrix(const Matrix& tau, double psd_floor = 0.0);

double sensor_variance(const Sensor& sensor, Point source, VariancePolicy policy = VariancePolicy::PaperLiteral);

double coalition_energy(std::size_t coalition_size, const EnergyModel& e);
double coalition_energy(const Coalition& s, const EnergyModel& e);

/// n sensors uniform over `region`, GaussianMean(1) marginals.
std::vector<Sensor> deploy_uniform(std::size_t n, const Region& region, Rng& rng);

/// Sets every sensor's marginal to GaussianMean with variance from the policy.
void assign_distance_gaussian(std::vector<Sensor>& sensors, Point source, VariancePolicy policy);

}  // namespace copcoal
