#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "copcoal/config.hpp"
#include "copcoal/game.hpp"

namespace copcoal {

struct OutputFile {
    std::string name;
    std::string content;
};

struct Artifacts {
    std::vector<OutputFile> files;
    nlohmann::json summary = nlohmann::json::object();
    std::size_t failures = 0;

    const OutputFile* find(const std::string& name) const;
};

struct RunOptions {
    bool svg = true;
};

/// Sensors for one run: explicit locations or a uniform deployment drawn
/// from `rng`, with marginals assigned per the config.
NetworkModel build_network(const ExperimentConfig& cfg, Rng& rng);

/// Closed forms for Gaussian copula + Gaussian marginals, otherwise a
/// Monte-Carlo bank over the whole network.
std::unique_ptr<MetricEvaluator> make_evaluator(const NetworkModel& net, const ExperimentConfig& cfg,
                                                const InferenceTask& task, Rng& rng);

struct GafiResult {
    std::vector<double> rho;
    std::vector<double> identical;
    std::vector<double> heterogeneous;
    double heterogeneous_root = 0.0;  // nonzero zero crossing of the heterogeneous curve
    Artifacts artifacts;
};
GafiResult run_gafi_vs_rho(const ExperimentConfig& cfg, const RunOptions& opts = {});

struct GkldFamilyCurve {
    FamilyKind family;
    std::vector<double> value;
    std::vector<double> std_error;  // zero for closed-form values
    int sign_changes = 0;           // counted at 3-standard-error resolution
    double tau_star = 0.0;          // NaN when the sign never changes
    std::size_t noisy_points = 0;   // std error above 5% of |value|
};
struct GkldResult {
    std::vector<double> tau;
    std::vector<GkldFamilyCurve> curves;
    Artifacts artifacts;
};
GkldResult run_gkld_vs_tau(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// Sign sequence at `k` standard errors: +1, -1, or 0 when indistinguishable.
std::vector<int> resolved_signs(const std::vector<double>& value, const std::vector<double>& se, double k = 3.0);

struct EightSensorResult {
    std::vector<Sensor> sensors;
    Point source;
    GameResult game{Partition({}, 0), {}};
    std::vector<CoalitionValue> final_values;
    bool dhp_stable = false;
    bool dominates_all = false;  // brute-force check, only for N <= 8
    Artifacts artifacts;
};
EightSensorResult run_eight_sensor_game(const ExperimentConfig& cfg, const RunOptions& opts = {});

struct MethodStats {
    // one entry per successful trial, in trial order
    std::vector<double> payoff;
    std::vector<double> performance;
    std::vector<double> cost;
};
struct AlphaSweepResult {
    std::vector<double> alphas;
    std::vector<InferenceTask> tasks;
    // [task][alpha]
    std::vector<std::vector<MethodStats>> proposed;
    std::vector<std::vector<MethodStats>> random;
    std::size_t trials_ok = 0;
    Artifacts artifacts;
};
AlphaSweepResult run_alpha_sweep(const ExperimentConfig& cfg, const RunOptions& opts = {});

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};
MeanSe mean_and_se(const std::vector<double>& v);

/// Runs whichever experiment the config names.
Artifacts run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// Writes the artifacts, the resolved config and manifest.json into `dir`.
/// Returns the manifest.
nlohmann::json write_artifacts(const Artifacts& artifacts, const ExperimentConfig& cfg,
                               const std::filesystem::path& dir);

}  // namespace copcoal
