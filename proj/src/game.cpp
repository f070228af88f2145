#include "copcoal/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace copcoal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const MetricEvaluator& evaluator_of(const GameContext& ctx) {
    require(ctx.evaluator != nullptr, ErrorKind::OutOfRange, "game context needs a metric evaluator");
    return *ctx.evaluator;
}

ValueFn value_fn(const GameContext& ctx) {
    return [&ctx](const Coalition& s) { return coalition_value(s, ctx).value; };
}

}  // namespace

double barrier_cost(double energy, const EnergyModel& e) {
    if (energy >= e.alpha) return kInf;
    return -std::log1p(-energy / e.alpha) / e.t_barrier;
}

ClosedFormEvaluator::ClosedFormEvaluator(const NetworkModel& net, InferenceTask task)
    : net_(&net), task_(std::move(task)) {
    validate(task_);
    require(net.all_gaussian(), ErrorKind::DimensionMismatch, "closed forms need Gaussian marginals");
}

MetricValue ClosedFormEvaluator::evaluate(const Coalition& s) const {
    if (const auto* d = std::get_if<Detection>(&task_)) return coalition_kld_gaussian(s, *net_, *d);
    return coalition_fi_gaussian(s, *net_);
}

namespace {

std::vector<SensorId> all_ids(const NetworkModel& net) {
    std::vector<SensorId> ids(net.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<SensorId>(i);
    return ids;
}

}  // namespace

MonteCarloEvaluator::MonteCarloEvaluator(const NetworkModel& net, const CopulaFamily& copula, InferenceTask task,
                                         McSettings settings, Rng& rng)
    : bank_(net, all_ids(net), copula, std::move(task), settings, rng) {}

MetricValue MetricCache::get(const Coalition& s, const MetricEvaluator& eval) {
    {
        std::lock_guard lock(mutex_);
        if (auto it = values_.find(s); it != values_.end()) return it->second;
    }
    MetricValue v = eval.evaluate(s);
    std::lock_guard lock(mutex_);
    // a concurrent writer may have won; keep the first value either way
    return values_.emplace(s, v).first->second;
}

std::size_t MetricCache::size() const {
    std::lock_guard lock(mutex_);
    return values_.size();
}

CoalitionValue coalition_value(const Coalition& s, const GameContext& ctx) {
    CoalitionValue cv;
    cv.energy = coalition_energy(s, ctx.energy);
    cv.cost = barrier_cost(cv.energy, ctx.energy);
    if (std::isinf(cv.cost)) {
        cv.value = -kInf;
        return cv;
    }
    const MetricEvaluator& eval = evaluator_of(ctx);
    cv.metric = ctx.cache ? ctx.cache->get(s, eval) : eval.evaluate(s);
    cv.individual_sum = cv.metric.individual_sum;
    cv.diversity_gain = cv.metric.diversity_gain;
    cv.redundancy_loss = cv.metric.redundancy_loss;
    // individual + copula part equals individual + dg - rl up to the vine's
    // rounding; the aggregate is used so both evaluators agree on the value
    cv.value = cv.metric.total - cv.cost;
    return cv;
}

bool pareto_prefers(const std::vector<Coalition>& after, const std::vector<Coalition>& before, const ValueFn& value,
                    double strict_threshold) {
    auto players = [](const std::vector<Coalition>& cs) {
        std::vector<SensorId> ids;
        for (const auto& c : cs) ids.insert(ids.end(), c.members().begin(), c.members().end());
        std::sort(ids.begin(), ids.end());
        return ids;
    };
    const auto pa = players(after);
    const auto pb = players(before);
    require(pa == pb, ErrorKind::PlayerSetMismatch, "collections cover different players");
    require(std::adjacent_find(pa.begin(), pa.end()) == pa.end(), ErrorKind::PlayerSetMismatch,
            "collection has overlapping coalitions");

    bool strict = false;
    for (const auto& ca : after) {
        const double va = value(ca);
        for (const auto& cb : before) {
            // players in both ca and cb move from v(cb) to v(ca)
            const bool overlap = std::any_of(ca.members().begin(), ca.members().end(),
                                             [&](SensorId id) { return cb.contains(id); });
            if (!overlap) continue;
            const double vb = value(cb);
            if (va < vb) return false;
            if (va > vb + strict_threshold) strict = true;
        }
    }
    return strict;
}

std::vector<double> player_payoffs(const Partition& p, const GameContext& ctx) {
    std::vector<double> out(p.players());
    for (const auto& c : p.coalitions()) {
        const double v = coalition_value(c, ctx).value;
        for (SensorId id : c.members()) out[static_cast<std::size_t>(id)] = v;
    }
    return out;
}

double average_payoff(const Partition& p, const GameContext& ctx) {
    double acc = 0.0;
    for (const auto& c : p.coalitions()) acc += static_cast<double>(c.size()) * coalition_value(c, ctx).value;
    return acc / static_cast<double>(p.players());
}

double average_energy(const Partition& p, const EnergyModel& e) {
    double acc = 0.0;
    for (const auto& c : p.coalitions()) acc += coalition_energy(c, e);
    return acc / static_cast<double>(p.size());
}

double average_performance(const Partition& p, const GameContext& ctx) {
    double acc = 0.0;
    const MetricEvaluator& eval = evaluator_of(ctx);
    for (const auto& c : p.coalitions()) {
        const MetricValue m = ctx.cache ? ctx.cache->get(c, eval) : eval.evaluate(c);
        acc += static_cast<double>(c.size()) * m.total;
    }
    return acc / static_cast<double>(p.players());
}

namespace {

double total_energy(const Partition& p, const EnergyModel& e) {
    double acc = 0.0;
    for (const auto& c : p.coalitions()) acc += coalition_energy(c, e);
    return acc;
}

TraceStep make_step(std::string op, const Partition& p, const GameContext& ctx, std::vector<double> before) {
    TraceStep s{0, std::move(op), p, 0.0, p.max_coalition_size(), total_energy(p, ctx.energy), std::move(before), {}};
    s.payoff_after = player_payoffs(p, ctx);
    double acc = 0.0;
    for (double v : s.payoff_after) acc += v;
    s.average_payoff = acc / static_cast<double>(p.players());
    if (s.payoff_before.empty()) s.payoff_before = s.payoff_after;
    return s;
}

void record(std::vector<TraceStep>* trace, std::string op, const Partition& before, const Partition& after,
            const GameContext& ctx) {
    if (!trace) return;
    TraceStep s = make_step(std::move(op), after, ctx, player_payoffs(before, ctx));
    s.step = trace->size();
    trace->push_back(std::move(s));
}

Partition replace(const Partition& p, const std::vector<std::size_t>& drop, std::vector<Coalition> add) {
    std::vector<Coalition> cs;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (std::find(drop.begin(), drop.end(), i) == drop.end()) cs.push_back(p.coalitions()[i]);
    }
    for (auto& c : add) cs.push_back(std::move(c));
    return Partition(std::move(cs), p.players());
}

// First Pareto-preferred split of `s` in enumeration order, if any. The
// 2^(k-1) - 1 two-part splits keep the first member in part A and are
// generated lazily, so large infeasible coalitions stop at the first mask.
bool find_split(const Coalition& s, const ValueFn& value, double delta, Coalition* a_out, Coalition* b_out) {
    const auto& m = s.members();
    const std::size_t k = m.size();
    if (k < 2) return false;
    require(k <= 63, ErrorKind::OutOfRange, "coalition too large to enumerate splits");
    const std::uint64_t count = (std::uint64_t{1} << (k - 1)) - 1;
    for (std::uint64_t mask = 1; mask <= count; ++mask) {
        std::vector<SensorId> a{m[0]}, b;
        for (std::size_t i = 1; i < k; ++i) ((mask >> (i - 1)) & 1 ? b : a).push_back(m[i]);
        Coalition ca(std::move(a)), cb(std::move(b));
        if (pareto_prefers({ca, cb}, {s}, value, delta)) {
            *a_out = std::move(ca);
            *b_out = std::move(cb);
            return true;
        }
    }
    return false;
}

bool find_merge(const Partition& p, const ValueFn& value, double delta, std::size_t* i_out, std::size_t* j_out) {
    const auto& cs = p.coalitions();
    for (std::size_t i = 0; i < cs.size(); ++i) {
        for (std::size_t j = i + 1; j < cs.size(); ++j) {
            if (pareto_prefers({cs[i].unite(cs[j])}, {cs[i], cs[j]}, value, delta)) {
                *i_out = i;
                *j_out = j;
                return true;
            }
        }
    }
    return false;
}

}  // namespace

namespace {

using StepHook = std::function<void()>;

Partition merge_impl(const Partition& p, const GameContext& ctx, std::vector<TraceStep>* trace, const StepHook& hook,
                     bool* changed) {
    const ValueFn value = value_fn(ctx);
    Partition cur = p;
    std::size_t i = 0, j = 0;
    while (find_merge(cur, value, ctx.strict_threshold, &i, &j)) {
        Partition next = replace(cur, {i, j}, {cur.coalitions()[i].unite(cur.coalitions()[j])});
        record(trace, "merge", cur, next, ctx);
        cur = std::move(next);
        if (hook) hook();
        if (changed) *changed = true;
    }
    return cur;
}

Partition split_impl(const Partition& p, const GameContext& ctx, std::vector<TraceStep>* trace, const StepHook& hook,
                     bool* changed) {
    const ValueFn value = value_fn(ctx);
    Partition cur = p;
    for (;;) {
        bool applied = false;
        for (std::size_t c = 0; c < cur.size() && !applied; ++c) {
            Coalition a{0}, b{0};
            if (find_split(cur.coalitions()[c], value, ctx.strict_threshold, &a, &b)) {
                Partition next = replace(cur, {c}, {std::move(a), std::move(b)});
                record(trace, "split", cur, next, ctx);
                cur = std::move(next);
                applied = true;
            }
        }
        if (!applied) return cur;
        if (hook) hook();
        if (changed) *changed = true;
    }
}

// Cap and cycle checks, run after every recorded operation.
class Guard {
public:
    Guard(const GameContext& ctx, const std::vector<TraceStep>& trace) : ctx_(ctx), trace_(trace) {
        seen_.insert(trace_.front().partition.to_string());
    }

    void operator()() {
        const TraceStep& last = trace_.back();
        if (!seen_.insert(last.partition.to_string()).second) {
            throw GameAborted(ErrorKind::CycleDetected, "partition revisited at step " + std::to_string(last.step),
                              trace_);
        }
        if (trace_.size() - 1 > ctx_.operation_cap) {
            throw GameAborted(ErrorKind::IterationCapExceeded,
                              "more than " + std::to_string(ctx_.operation_cap) + " operations", trace_);
        }
    }

private:
    const GameContext& ctx_;
    const std::vector<TraceStep>& trace_;
    std::set<std::string> seen_;
};

}  // namespace

Partition merge_pass(const Partition& p, const GameContext& ctx, std::vector<TraceStep>* trace) {
    return merge_impl(p, ctx, trace, {}, nullptr);
}

Partition split_pass(const Partition& p, const GameContext& ctx, std::vector<TraceStep>* trace) {
    return split_impl(p, ctx, trace, {}, nullptr);
}

GameResult run_merge_split(const Partition& initial, const GameContext& ctx) {
    std::vector<TraceStep> trace;
    trace.push_back(make_step("init", initial, ctx, {}));
    Guard guard(ctx, trace);
    const StepHook hook = [&guard] { guard(); };
    Partition cur = initial;
    for (;;) {
        bool changed = false;
        cur = merge_impl(cur, ctx, &trace, hook, &changed);
        cur = split_impl(cur, ctx, &trace, hook, &changed);
        if (!changed) break;
    }
    return GameResult{std::move(cur), std::move(trace)};
}

bool is_dhp_stable(const Partition& p, const GameContext& ctx) {
    const ValueFn value = value_fn(ctx);
    std::size_t i = 0, j = 0;
    if (find_merge(p, value, ctx.strict_threshold, &i, &j)) return false;
    Coalition a{0}, b{0};
    for (const auto& c : p.coalitions()) {
        if (find_split(c, value, ctx.strict_threshold, &a, &b)) return false;
    }
    return true;
}

std::vector<Partition> all_partitions(std::size_t n_players) {
    require(n_players >= 1 && n_players <= 10, ErrorKind::OutOfRange, "partition enumeration needs 1 <= N <= 10");
    // restricted growth strings
    std::vector<Partition> out;
    std::vector<std::size_t> a(n_players, 0);
    for (;;) {
        std::size_t blocks = *std::max_element(a.begin(), a.end()) + 1;
        std::vector<std::vector<SensorId>> groups(blocks);
        for (std::size_t i = 0; i < n_players; ++i) groups[a[i]].push_back(static_cast<SensorId>(i));
        std::vector<Coalition> cs;
        for (auto& g : groups) cs.emplace_back(std::move(g));
        out.emplace_back(std::move(cs), n_players);

        std::size_t i = n_players - 1;
        for (;; --i) {
            if (i == 0) return out;
            const std::size_t prefix_max = *std::max_element(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(i));
            if (a[i] <= prefix_max) {
                ++a[i];
                std::fill(a.begin() + static_cast<std::ptrdiff_t>(i) + 1, a.end(), 0);
                break;
            }
        }
    }
}

bool weakly_dominates_all(const Partition& p, const GameContext& ctx) {
    require(p.players() <= 8, ErrorKind::OutOfRange, "brute-force check limited to N <= 8");
    const auto mine = player_payoffs(p, ctx);
    for (const auto& q : all_partitions(p.players())) {
        const auto theirs = player_payoffs(q, ctx);
        for (std::size_t n = 0; n < mine.size(); ++n) {
            if (theirs[n] > mine[n]) return false;
        }
    }
    return true;
}

}  // namespace copcoal
