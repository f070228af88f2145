#include "copcoal/network.hpp"

#include <cmath>
#include <numbers>

#include "copcoal/error.hpp"

namespace copcoal {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

bool is_gaussian(const MarginalModel& m) { return std::holds_alternative<GaussianMean>(m); }

std::string describe(const MarginalModel& m) {
    if (const auto* g = std::get_if<GaussianMean>(&m)) return "gaussian(sigma=" + std::to_string(g->sigma) + ")";
    return "exponential";
}

namespace {

void require_rate(double theta) { require(theta > 0.0 && std::isfinite(theta), ErrorKind::InvalidTheta, "exponential rate must be > 0"); }

}  // namespace

double marginal_log_pdf(const MarginalModel& m, double x, double theta) {
    if (const auto* g = std::get_if<GaussianMean>(&m)) {
        const double z = (x - theta) / g->sigma;
        return -0.5 * z * z - std::log(g->sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
    }
    require_rate(theta);
    return std::log(theta) - theta * x;
}

TailProb marginal_cdf(const MarginalModel& m, double x, double theta) {
    if (const auto* g = std::get_if<GaussianMean>(&m)) return normal_cdf((x - theta) / g->sigma);
    require_rate(theta);
    if (x <= 0.0) return {0.0, 1.0};
    return {-std::expm1(-theta * x), std::exp(-theta * x)};
}

double marginal_quantile(const MarginalModel& m, TailProb u, double theta) {
    if (const auto* g = std::get_if<GaussianMean>(&m)) return theta + g->sigma * normal_quantile(u);
    require_rate(theta);
    u = u.clamped();
    // -log(1 - p) / theta, evaluated from whichever tail is accurate
    const double tail = u.lower < 0.5 ? -std::log1p(-u.lower) : -std::log(u.upper);
    return tail / theta;
}

void EnergyModel::validate() const {
    require(requests_per_unit_time >= 0.0 && std::isfinite(requests_per_unit_time), ErrorKind::OutOfRange,
            "r must be >= 0");
    require(energy_per_transmission >= 0.0 && std::isfinite(energy_per_transmission), ErrorKind::OutOfRange,
            "E_t must be >= 0");
    require(alpha > 0.0 && std::isfinite(alpha), ErrorKind::OutOfRange, "alpha must be > 0");
    require(t_barrier > 0.0 && std::isfinite(t_barrier), ErrorKind::OutOfRange, "t must be > 0");
}

std::size_t EnergyModel::max_feasible_size(std::size_t n_max) const {
    std::size_t k = 1;
    while (k < n_max && coalition_energy(k + 1, *this) < alpha) ++k;
    return k;
}

const char* to_string(VariancePolicy p) {
    return p == VariancePolicy::PaperLiteral ? "paper_literal" : "distance_proportional";
}

NetworkModel::NetworkModel(std::vector<Sensor> sensors, Point source, EnergyModel energy, double psd_floor)
    : sensors_(std::move(sensors)), source_(source), energy_(energy), psd_floor_(psd_floor) {
    require(!sensors_.empty(), ErrorKind::InvalidCount, "network needs at least one sensor");
    for (std::size_t i = 0; i < sensors_.size(); ++i) {
        require(sensors_[i].id == static_cast<SensorId>(i), ErrorKind::InvalidPartition,
                "sensor ids must be contiguous from 0");
        if (const auto* g = std::get_if<GaussianMean>(&sensors_[i].marginal)) {
            require(g->sigma > 0.0 && std::isfinite(g->sigma), ErrorKind::OutOfRange, "sigma must be > 0");
        }
    }
    require(psd_floor >= 0.0 && psd_floor < 1.0, ErrorKind::OutOfRange, "psd floor must lie in [0, 1)");
    energy_.validate();
    tau_ = build_tau_matrix(sensors_);
    corr_ = build_correlation_matrix(tau_, psd_floor_);
}

Matrix NetworkModel::corr_block(const Coalition& s) const {
    const auto& m = s.members();
    const auto k = static_cast<Eigen::Index>(m.size());
    Matrix out(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) out(a, b) = corr_(m[a], m[b]);
    }
    return out;
}

Matrix NetworkModel::covariance_block(const Coalition& s) const {
    require(all_gaussian(s), ErrorKind::DimensionMismatch, "covariance needs Gaussian marginals");
    Matrix out = corr_block(s);
    const auto& m = s.members();
    for (Eigen::Index a = 0; a < out.rows(); ++a) {
        const double sa = std::get<GaussianMean>(sensor(m[a]).marginal).sigma;
        for (Eigen::Index b = 0; b < out.cols(); ++b) {
            out(a, b) *= sa * std::get<GaussianMean>(sensor(m[b]).marginal).sigma;
        }
    }
    return out;
}

bool NetworkModel::all_gaussian(const Coalition& s) const {
    for (SensorId id : s.members()) {
        if (!is_gaussian(sensor(id).marginal)) return false;
    }
    return true;
}

bool NetworkModel::all_gaussian() const {
    for (const auto& s : sensors_) {
        if (!is_gaussian(s.marginal)) return false;
    }
    return true;
}

NetworkModel NetworkModel::with_energy(EnergyModel e) const {
    e.validate();
    NetworkModel copy = *this;
    copy.energy_ = e;
    return copy;
}

Matrix build_tau_matrix(std::span<const Sensor> sensors) {
    const auto n = static_cast<Eigen::Index>(sensors.size());
    Matrix tau(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        tau(i, i) = 1.0;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double d = distance(sensors[i].location, sensors[j].location);
            tau(i, j) = tau(j, i) = std::exp(-d * d);
        }
    }
    return tau;
}

Matrix build_correlation_matrix(const Matrix& tau, double psd_floor) {
    Matrix rho = tau.unaryExpr([](double t) { return std::sin(std::numbers::pi * t / 2.0); });
    rho.diagonal().setOnes();
    return nearest_psd(rho, 1e-10, psd_floor);
}

double sensor_variance(const Sensor& sensor, Point source, VariancePolicy policy) {
    const double d = distance(sensor.location, source);
    require(d >= kSourceGuard, ErrorKind::SourceCollocation,
            "sensor " + std::to_string(sensor.id) + " sits on the source");
    return policy == VariancePolicy::PaperLiteral ? 1.0 / d : d;
}

double coalition_energy(std::size_t coalition_size, const EnergyModel& e) {
    require(coalition_size >= 1, ErrorKind::EmptyCoalition, "coalition must be nonempty");
    return e.requests_per_unit_time * static_cast<double>(coalition_size - 1) * e.energy_per_transmission;
}

double coalition_energy(const Coalition& s, const EnergyModel& e) { return coalition_energy(s.size(), e); }

std::vector<Sensor> deploy_uniform(std::size_t n, const Region& region, Rng& rng) {
    require(n >= 1, ErrorKind::InvalidCount, "deployment needs at least one sensor");
    std::vector<Sensor> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i].id = static_cast<SensorId>(i);
        out[i].location.x = rng.uniform(region.x_min, region.x_max);
        out[i].location.y = rng.uniform(region.y_min, region.y_max);
        out[i].marginal = GaussianMean{1.0};
    }
    return out;
}

void assign_distance_gaussian(std::vector<Sensor>& sensors, Point source, VariancePolicy policy) {
    for (auto& s : sensors) s.marginal = GaussianMean{std::sqrt(sensor_variance(s, source, policy))};
}

}  // namespace copcoal
