#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "copcoal/copula.hpp"
#include "copcoal/error.hpp"
#include "copcoal/metrics.hpp"
#include "copcoal/network.hpp"

namespace copcoal {

enum class ExperimentKind { GafiVsRho, GkldVsTau, EightSensorGame, AlphaSweep };

const char* to_string(ExperimentKind k);
/// "gafi_vs_rho", "gkld_vs_tau", "eight_sensor_game", "alpha_sweep".
ExperimentKind experiment_from_string(const std::string& name);

struct PairSpec {
    double sigma_x = 1.0;
    double sigma_y = 1.0;
    double slope_x = 1.0;
    double slope_y = 1.0;
};

enum class MarginalAssignment {
    DistanceGaussian,  // Gaussian, variance from the distance policy
    Mixed,             // first `gaussian_count` Gaussian(gaussian_sigma), rest exponential
};

struct NetworkSpec {
    std::size_t count = 8;
    Region region;
    Point source{0.75, 0.75};
    std::vector<Point> locations;  // explicit deployment; empty means uniform random
    MarginalAssignment marginals = MarginalAssignment::DistanceGaussian;
    std::size_t gaussian_count = 14;
    double gaussian_sigma = 1.0;
};

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::EightSensorGame;
    std::uint64_t seed = 1;
    std::size_t trials = 1;
    std::size_t threads = 1;
    std::string output_dir;
    VariancePolicy variance_policy = VariancePolicy::PaperLiteral;
    double psd_floor = kDefaultPsdFloor;
    EnergyModel energy;
    std::vector<double> alphas;
    NetworkSpec network;
    FamilyKind copula = FamilyKind::Gaussian;
    double nu = 4.0;
    std::vector<FamilyKind> families;
    std::vector<InferenceTask> tasks;
    McSettings mc;
    PairSpec gafi_identical;
    PairSpec gafi_heterogeneous{1.0, 2.0, 1.0, 1.0};
    double rho_min = -0.95;
    double rho_max = 0.95;
    double rho_step = 0.01;
    double tau_min = 0.02;
    double tau_max = 0.95;
    double tau_step = 0.01;
    double gkld_sigma = 1.0;
    std::size_t operation_cap = 10000;
};

struct Violation {
    std::string field;
    std::string reason;
};

/// Every schema violation found in one config, reported together.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<Violation> violations);
    const std::vector<Violation>& violations() const noexcept { return violations_; }

private:
    std::vector<Violation> violations_;
};

/// Parses JSON text; syntax errors raise ParseError naming the line.
nlohmann::json parse_json_text(const std::string& text);

/// Builds a config from parsed JSON with experiment-specific defaults.
/// A manifest written by a previous run is accepted too (its "config" entry
/// is used).
ExperimentConfig parse_config(const nlohmann::json& j);

/// Reads, parses and validates a config file.
ExperimentConfig validate_config(const std::string& path);

/// Fully resolved config, suitable for rerunning.
nlohmann::json to_json(const ExperimentConfig& cfg);

nlohmann::json to_json(const InferenceTask& task);

}  // namespace copcoal
