#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "copcoal/coalition.hpp"
#include "copcoal/copula.hpp"
#include "copcoal/network.hpp"
#include "copcoal/rng.hpp"

namespace copcoal {

/// Parameter estimation. The data contribution to the posterior Fisher
/// information is averaged either over the prior or uniformly over a fixed
/// grid of theta values (required when exponential marginals are present).
struct Estimation {
    enum class Policy { PriorAverage, FixedGrid };

    Policy policy = Policy::FixedGrid;
    double prior_mean = 0.0;
    double prior_sd = 1.0;
    std::vector<double> grid = {0.5, 1.0, 2.0};
};

/// Binary hypothesis test, theta = theta0 under H0 and theta1 under H1.
struct Detection {
    double theta0 = 0.0;
    double theta1 = 1.4142135623730951;
};

using InferenceTask = std::variant<Estimation, Detection>;

void validate(const InferenceTask& task);
std::string task_name(const InferenceTask& task);

/// Prior contribution I_P to the posterior Fisher information. Reported only;
/// never part of a coalition comparison.
double prior_information(const Estimation& task);

enum class MetricMethod { ClosedForm, MonteCarlo };

/// I(S) or D(S) split into its individual and dependence-induced parts.
struct MetricValue {
    double total = 0.0;
    double individual_sum = 0.0;
    double copula_part = 0.0;
    double diversity_gain = 0.0;
    double redundancy_loss = 0.0;
    MetricMethod method = MetricMethod::ClosedForm;
    std::size_t samples = 0;
    double std_error = 0.0;
};

/// Delta_n of a lone sensor: Fisher information (estimation) or KLD (detection).
double individual_metric(const Sensor& sensor, const InferenceTask& task);

// ---------------------------------------------------------------------------
// Gaussian closed forms

/// Copula-induced Fisher information of a bivariate Gaussian pair whose means
/// move with derivatives (slope_x, slope_y) in theta.
double pairwise_gafi_gaussian(double sigma_x, double sigma_y, double slope_x, double slope_y, double rho);

/// Copula-induced KLD of a bivariate Gaussian pair with common mean shift.
double pairwise_gkld_gaussian(double sigma_x, double sigma_y, double theta0, double theta1, double rho);

/// I(S) = 1' Sigma_S^{-1} 1 with its D-vine diversity/redundancy split.
MetricValue coalition_fi_gaussian(const Coalition& s, const NetworkModel& net);

/// D(S) = ((theta1 - theta0)^2 / 2) 1' Sigma_S^{-1} 1 with its D-vine split.
MetricValue coalition_kld_gaussian(const Coalition& s, const NetworkModel& net, const Detection& task);

struct VineTerm {
    SensorId first;
    SensorId second;
    std::vector<SensorId> conditioning;
    double partial_corr;
    double value;
};

/// Canonical D-vine over the members in ascending id order. Each edge is the
/// pairwise term evaluated at the conditional parameters of the pair given
/// the members between them.
std::vector<VineTerm> pairwise_decomposition_gaussian(const Coalition& s, const NetworkModel& net,
                                                      const InferenceTask& task);

/// Direct matrix value of 1' Sigma_S^{-1} 1; throws SingularCovariance.
double gaussian_information_quadratic(const Matrix& cov);

// ---------------------------------------------------------------------------
// Monte-Carlo estimators

struct McSettings {
    std::size_t n_samples = 200000;
    double fd_step = 1e-3;
};

inline constexpr std::size_t kMinMcSamples = 1000;

/// Pre-drawn copula sample over a fixed set of sensors, with the copula
/// scores precomputed at every evaluation point the task needs. Any coalition
/// inside the set is then evaluated against the same draws, so comparisons
/// between coalitions use common random numbers.
///
/// Estimation: -E[d^2/dtheta^2 log c] by central differences at each theta
/// (grid point, or a prior draw per sample). Detection: E_H0[log c0 / c1].
/// Individual terms are exact; only the copula part is estimated.
class McBank {
public:
    /// `copula` has one dimension per entry of `ids`. `h1_copula`, when set,
    /// is the dependence structure under H1 (detection only).
    McBank(const NetworkModel& net, std::vector<SensorId> ids, CopulaFamily copula, InferenceTask task,
           McSettings settings, Rng& rng, std::optional<CopulaFamily> h1_copula = std::nullopt);

    MetricValue evaluate(const Coalition& s) const;

    std::size_t samples() const noexcept { return n_; }
    const InferenceTask& task() const noexcept { return task_; }

private:
    // Copula arguments at one value of theta, per local sensor and sample.
    struct Point {
        std::vector<std::vector<double>> score;   // elliptical quantile scores
        std::vector<std::vector<double>> margin;  // Student-t margin terms
        std::vector<std::vector<TailProb>> prob;  // Archimedean families
    };

    Point make_point(const CopulaFamily& fam, const std::vector<std::vector<double>>& x,
                     const std::vector<double>& theta) const;
    // log c per sample for coalition members `local`; `fam` is already
    // restricted to them.
    std::vector<double> log_c(const CopulaFamily& fam, const Point& pt, const std::vector<int>& local,
                              bool with_normalizer) const;

    const NetworkModel* net_;
    std::vector<SensorId> ids_;
    std::vector<int> local_of_;
    CopulaFamily copula_;
    std::optional<CopulaFamily> h1_copula_;
    InferenceTask task_;
    McSettings settings_;
    std::size_t n_;
    // estimation: (theta - h, theta, theta + h) for each grid value, or one
    // triple around per-sample prior draws; detection: {H0, H1}
    std::vector<Point> points_;
};

/// Copula for exactly the members of `s`: used as is when its dimension is
/// |S|, restricted to the members when it spans the whole network.
CopulaFamily coalition_copula(const CopulaFamily& copula, const Coalition& s, const NetworkModel& net);

MetricValue mc_coalition_kld(const Coalition& s, const NetworkModel& net, const Detection& task,
                             const CopulaFamily& copula, std::size_t n_samples, Rng& rng,
                             const std::optional<CopulaFamily>& h1_copula = std::nullopt);

MetricValue mc_coalition_fi(const Coalition& s, const NetworkModel& net, const Estimation& task,
                            const CopulaFamily& copula, std::size_t n_samples, double fd_step, Rng& rng);

}  // namespace copcoal
