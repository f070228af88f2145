#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "copcoal/coalition.hpp"
#include "copcoal/error.hpp"
#include "copcoal/metrics.hpp"
#include "copcoal/network.hpp"

namespace copcoal {

struct CoalitionValue {
    double individual_sum = 0.0;
    double diversity_gain = 0.0;
    double redundancy_loss = 0.0;
    double energy = 0.0;
    double cost = 0.0;   // +inf when energy >= alpha
    double value = 0.0;  // -inf when energy >= alpha
    MetricValue metric;  // left default for infeasible coalitions
};

/// -(1/t) log(1 - E / alpha) for E < alpha, +inf otherwise.
double barrier_cost(double energy, const EnergyModel& e);

/// Source of Delta(S). Implementations must be deterministic and thread-safe.
class MetricEvaluator {
public:
    virtual ~MetricEvaluator() = default;
    virtual MetricValue evaluate(const Coalition& s) const = 0;
};

/// Gaussian closed forms; every sensor must have a Gaussian marginal.
class ClosedFormEvaluator final : public MetricEvaluator {
public:
    ClosedFormEvaluator(const NetworkModel& net, InferenceTask task);
    MetricValue evaluate(const Coalition& s) const override;

private:
    const NetworkModel* net_;
    InferenceTask task_;
};

/// Monte-Carlo values from one sample bank over the whole network.
class MonteCarloEvaluator final : public MetricEvaluator {
public:
    MonteCarloEvaluator(const NetworkModel& net, const CopulaFamily& copula, InferenceTask task, McSettings settings,
                        Rng& rng);
    MetricValue evaluate(const Coalition& s) const override { return bank_.evaluate(s); }

private:
    McBank bank_;
};

/// Memo of metric values keyed by member set. The metric does not depend on
/// the energy model, so one cache can serve several budgets.
class MetricCache {
public:
    MetricValue get(const Coalition& s, const MetricEvaluator& eval);
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::unordered_map<Coalition, MetricValue, CoalitionHash> values_;
};

struct GameContext {
    const MetricEvaluator* evaluator = nullptr;
    EnergyModel energy;
    MetricCache* cache = nullptr;
    std::size_t operation_cap = 10000;
    double strict_threshold = 1e-9;
};

/// v(S) = sum Delta_n + Delta_dg - Delta_rl - C(S). Infeasible coalitions get
/// -inf without touching the metric.
CoalitionValue coalition_value(const Coalition& s, const GameContext& ctx);

using ValueFn = std::function<double(const Coalition&)>;

/// Pareto order between two collections over the same players: every player
/// weakly gains, at least one by more than `strict_threshold`.
bool pareto_prefers(const std::vector<Coalition>& after, const std::vector<Coalition>& before, const ValueFn& value,
                    double strict_threshold = 1e-9);

struct TraceStep {
    std::size_t step = 0;
    std::string op;  // "init", "merge" or "split"
    Partition partition;
    double average_payoff = 0.0;
    std::size_t max_coalition_size = 0;
    double total_energy = 0.0;
    // per player, indexed by sensor id
    std::vector<double> payoff_before;
    std::vector<double> payoff_after;
};

struct GameResult {
    Partition final_partition;
    std::vector<TraceStep> trace;
    std::size_t operations() const { return trace.empty() ? 0 : trace.size() - 1; }
};

/// Thrown when the run is aborted by the operation cap or a revisited
/// partition; carries the trace up to the abort.
class GameAborted : public Error {
public:
    GameAborted(ErrorKind kind, const std::string& what, std::vector<TraceStep> trace)
        : Error(kind, what), trace_(std::move(trace)) {}
    const std::vector<TraceStep>& trace() const noexcept { return trace_; }

private:
    std::vector<TraceStep> trace_;
};

/// Per-player payoff Phi_n = v(S) for the coalition S holding n.
std::vector<double> player_payoffs(const Partition& p, const GameContext& ctx);
double average_payoff(const Partition& p, const GameContext& ctx);
/// (1/|P|) sum E(S).
double average_energy(const Partition& p, const EnergyModel& e);
/// Average over players of the metric Delta(S) of their coalition (no cost).
double average_performance(const Partition& p, const GameContext& ctx);

/// One merge sweep: pairwise merges in canonical order, restarting after
/// each accepted merge, until a full scan accepts none.
Partition merge_pass(const Partition& p, const GameContext& ctx, std::vector<TraceStep>* trace = nullptr);
/// Two-part splits in enumeration order, restarting after each accepted split.
Partition split_pass(const Partition& p, const GameContext& ctx, std::vector<TraceStep>* trace = nullptr);

GameResult run_merge_split(const Partition& initial, const GameContext& ctx);

/// No pairwise merge and no two-part split is Pareto-preferred.
bool is_dhp_stable(const Partition& p, const GameContext& ctx);

/// Every partition of the players, for N <= 10.
std::vector<Partition> all_partitions(std::size_t n_players);

/// True when every player's payoff in `p` is at least its payoff in every
/// other partition. Brute force, N <= 8.
bool weakly_dominates_all(const Partition& p, const GameContext& ctx);

}  // namespace copcoal
