#include "copcoal/experiments.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <thread>

#include "copcoal/baselines.hpp"
#include "copcoal/output.hpp"

namespace copcoal {

using nlohmann::json;

const OutputFile* Artifacts::find(const std::string& name) const {
    for (const auto& f : files) {
        if (f.name == name) return &f;
    }
    return nullptr;
}

MeanSe mean_and_se(const std::vector<double>& v) {
    if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    if (v.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Grid lo, lo + step, ..., hi with values rounded to 1e-12 so that points
// such as 0 land exactly.
std::vector<double> grid(double lo, double hi, double step) {
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12);
    return out;
}

std::string task_label(const InferenceTask& t) { return task_name(t); }

}  // namespace

NetworkModel build_network(const ExperimentConfig& cfg, Rng& rng) {
    const auto& spec = cfg.network;
    std::vector<Sensor> sensors;
    if (spec.locations.empty()) {
        sensors = deploy_uniform(spec.count, spec.region, rng);
    } else {
        for (std::size_t i = 0; i < spec.locations.size(); ++i) {
            sensors.push_back(Sensor{static_cast<SensorId>(i), spec.locations[i], GaussianMean{1.0}});
        }
    }
    if (spec.marginals == MarginalAssignment::DistanceGaussian) {
        assign_distance_gaussian(sensors, spec.source, cfg.variance_policy);
    } else {
        for (std::size_t i = 0; i < sensors.size(); ++i) {
            if (i < spec.gaussian_count)
                sensors[i].marginal = GaussianMean{spec.gaussian_sigma};
            else
                sensors[i].marginal = ExponentialRate{};
        }
    }
    return NetworkModel(std::move(sensors), spec.source, cfg.energy, cfg.psd_floor);
}

std::unique_ptr<MetricEvaluator> make_evaluator(const NetworkModel& net, const ExperimentConfig& cfg,
                                                const InferenceTask& task, Rng& rng) {
    if (cfg.copula == FamilyKind::Gaussian && net.all_gaussian()) {
        return std::make_unique<ClosedFormEvaluator>(net, task);
    }
    require(cfg.copula == FamilyKind::Gaussian || cfg.copula == FamilyKind::StudentT, ErrorKind::DimensionMismatch,
            "network experiments need a Gaussian or Student-t copula");
    const CopulaFamily copula = cfg.copula == FamilyKind::Gaussian
                                    ? CopulaFamily::gaussian(net.corr_matrix())
                                    : CopulaFamily::student_t(net.corr_matrix(), cfg.nu);
    return std::make_unique<MonteCarloEvaluator>(net, copula, task, cfg.mc, rng);
}

// ---------------------------------------------------------------------------

GafiResult run_gafi_vs_rho(const ExperimentConfig& cfg, const RunOptions& opts) {
    GafiResult r;
    const PairSpec& a = cfg.gafi_identical;
    const PairSpec& b = cfg.gafi_heterogeneous;
    r.rho = grid(cfg.rho_min, cfg.rho_max, cfg.rho_step);
    CsvTable table({"rho", "gafi_identical", "gafi_heterogeneous"});
    for (double rho : r.rho) {
        r.identical.push_back(pairwise_gafi_gaussian(a.sigma_x, a.sigma_y, a.slope_x, a.slope_y, rho));
        r.heterogeneous.push_back(pairwise_gafi_gaussian(b.sigma_x, b.sigma_y, b.slope_x, b.slope_y, rho));
        table.add_row({format_real(rho), format_real(r.identical.back()), format_real(r.heterogeneous.back())});
    }
    const double den = b.slope_x * b.slope_x * b.sigma_y * b.sigma_y + b.slope_y * b.slope_y * b.sigma_x * b.sigma_x;
    r.heterogeneous_root = 2.0 * b.slope_x * b.slope_y * b.sigma_x * b.sigma_y / den;
    r.artifacts.files.push_back({"gafi_vs_rho.csv", table.str()});
    if (opts.svg) {
        PlotSpec p{"GAFI of a Gaussian copula", "rho", "I_c", {}, true};
        p.series.push_back({"identical marginals", r.rho, r.identical, "", false, true});
        p.series.push_back({"heterogeneous marginals", r.rho, r.heterogeneous, "", false, true});
        r.artifacts.files.push_back({"gafi_vs_rho.svg", render_svg(p)});
    }
    r.artifacts.summary = {{"heterogeneous_root", r.heterogeneous_root}, {"points", r.rho.size()}};
    return r;
}

// ---------------------------------------------------------------------------

std::vector<int> resolved_signs(const std::vector<double>& value, const std::vector<double>& se, double k) {
    std::vector<int> out(value.size(), 0);
    for (std::size_t i = 0; i < value.size(); ++i) {
        if (value[i] > k * se[i])
            out[i] = 1;
        else if (value[i] < -k * se[i])
            out[i] = -1;
    }
    return out;
}

GkldResult run_gkld_vs_tau(const ExperimentConfig& cfg, const RunOptions& opts) {
    GkldResult r;
    const Detection det = std::get<Detection>(cfg.tasks.front());
    r.tau = grid(cfg.tau_min, cfg.tau_max, cfg.tau_step);
    const double sigma = cfg.gkld_sigma;
    std::vector<Sensor> pair = {{0, {0.0, 0.0}, GaussianMean{sigma}}, {1, {1.0, 0.0}, GaussianMean{sigma}}};
    const NetworkModel net(pair, {0.5, 0.5}, cfg.energy);
    const Coalition both{0, 1};
    const Rng base(cfg.seed);
    std::vector<std::string> header{"tau"};
    for (auto f : cfg.families) {
        header.push_back(to_string(f));
        header.push_back(std::string(to_string(f)) + "_se");
    }
    CsvTable table(header);
    for (std::size_t k = 0; k < cfg.families.size(); ++k) {
        GkldFamilyCurve c;
        c.family = cfg.families[k];
        for (std::size_t i = 0; i < r.tau.size(); ++i) {
            const double tau = r.tau[i];
            if (c.family == FamilyKind::Gaussian) {
                const double rho = tau_to_param(FamilyKind::Gaussian, tau);
                c.value.push_back(pairwise_gkld_gaussian(sigma, sigma, det.theta0, det.theta1, rho));
                c.std_error.push_back(0.0);
                continue;
            }
            Rng rng = base.split(1000 * (k + 1) + i);
            const CopulaFamily cop = CopulaFamily::bivariate_from_tau(c.family, tau, cfg.nu);
            const MetricValue v = mc_coalition_kld(both, net, det, cop, cfg.mc.n_samples, rng);
            c.value.push_back(v.copula_part);
            c.std_error.push_back(v.std_error);
            if (v.std_error > 0.05 * std::abs(v.copula_part)) ++c.noisy_points;
        }
        const auto signs = resolved_signs(c.value, c.std_error);
        int last = 0;
        std::size_t last_i = 0;
        c.tau_star = kNaN;
        for (std::size_t i = 0; i < signs.size(); ++i) {
            if (signs[i] == 0) continue;
            if (last != 0 && signs[i] != last) {
                if (c.sign_changes == 0) {
                    // linear interpolation between the bracketing resolved points
                    const double v0 = c.value[last_i], v1 = c.value[i];
                    c.tau_star = r.tau[last_i] + (r.tau[i] - r.tau[last_i]) * v0 / (v0 - v1);
                }
                ++c.sign_changes;
            }
            last = signs[i];
            last_i = i;
        }
        r.curves.push_back(std::move(c));
    }
    for (std::size_t i = 0; i < r.tau.size(); ++i) {
        std::vector<std::string> row{format_real(r.tau[i])};
        for (const auto& c : r.curves) {
            row.push_back(format_real(c.value[i]));
            row.push_back(format_real(c.std_error[i]));
        }
        table.add_row(std::move(row));
    }
    CsvTable stars({"family", "sign_changes", "tau_star", "noisy_points"});
    json summary = json::object();
    for (const auto& c : r.curves) {
        stars.add_row({to_string(c.family), std::to_string(c.sign_changes), format_real(c.tau_star),
                       std::to_string(c.noisy_points)});
        summary[to_string(c.family)] = {{"sign_changes", c.sign_changes},
                                        {"tau_star", std::isnan(c.tau_star) ? json(nullptr) : json(c.tau_star)},
                                        {"noisy_points", c.noisy_points}};
    }
    r.artifacts.files.push_back({"gkld_vs_tau.csv", table.str()});
    r.artifacts.files.push_back({"gkld_tau_star.csv", stars.str()});
    if (opts.svg) {
        PlotSpec p{"GKLD vs Kendall tau (Gaussian marginals)", "Kendall tau", "D_c", {}, true};
        for (const auto& c : r.curves) p.series.push_back({to_string(c.family), r.tau, c.value, "", false, true});
        r.artifacts.files.push_back({"gkld_vs_tau.svg", render_svg(p)});
    }
    r.artifacts.summary = summary;
    return r;
}

// ---------------------------------------------------------------------------

namespace {

CsvTable trace_table(const std::vector<TraceStep>& trace) {
    CsvTable t({"step", "op", "coalitions", "average_payoff", "max_coalition_size", "total_energy"});
    for (const auto& s : trace) {
        t.add_row({std::to_string(s.step), s.op, s.partition.to_string(), format_real(s.average_payoff),
                   std::to_string(s.max_coalition_size), format_real(s.total_energy)});
    }
    return t;
}

}  // namespace

EightSensorResult run_eight_sensor_game(const ExperimentConfig& cfg, const RunOptions& opts) {
    EightSensorResult r;
    Rng base(cfg.seed);
    Rng deploy = base.split(1);
    const NetworkModel net = build_network(cfg, deploy);
    r.sensors = net.sensors();
    r.source = net.source();
    Rng mc = base.split(2);
    const auto evaluator = make_evaluator(net, cfg, cfg.tasks.front(), mc);
    MetricCache cache;
    GameContext ctx{evaluator.get(), cfg.energy, &cache, cfg.operation_cap};
    r.game = run_merge_split(Partition::singletons(net.size()), ctx);
    r.dhp_stable = is_dhp_stable(r.game.final_partition, ctx);
    if (net.size() <= 8) r.dominates_all = weakly_dominates_all(r.game.final_partition, ctx);

    CsvTable dep({"id", "x", "y", "distance_to_source", "marginal", "sigma", "individual_metric"});
    for (const auto& s : net.sensors()) {
        const bool g = is_gaussian(s.marginal);
        dep.add_row({std::to_string(s.id), format_real(s.location.x), format_real(s.location.y),
                     format_real(distance(s.location, net.source())), g ? "gaussian" : "exponential",
                     g ? format_real(std::get<GaussianMean>(s.marginal).sigma) : "",
                     format_real(individual_metric(s, cfg.tasks.front()))});
    }
    CsvTable part({"coalition", "members", "size", "energy", "cost", "individual_sum", "diversity_gain",
                   "redundancy_loss", "copula_part", "value"});
    std::vector<MapPoint> points;
    for (std::size_t c = 0; c < r.game.final_partition.size(); ++c) {
        const Coalition& s = r.game.final_partition.coalitions()[c];
        const CoalitionValue v = coalition_value(s, ctx);
        r.final_values.push_back(v);
        part.add_row({std::to_string(c + 1), s.to_string(), std::to_string(s.size()), format_real(v.energy),
                      format_real(v.cost), format_real(v.individual_sum), format_real(v.diversity_gain),
                      format_real(v.redundancy_loss), format_real(v.metric.copula_part), format_real(v.value)});
        for (SensorId id : s.members()) {
            const auto& loc = net.sensor(id).location;
            points.push_back({loc.x, loc.y, static_cast<int>(c), std::to_string(id)});
        }
    }
    r.artifacts.files.push_back({"deployment.csv", dep.str()});
    r.artifacts.files.push_back({"partition.csv", part.str()});
    r.artifacts.files.push_back({"trace.csv", trace_table(r.game.trace).str()});
    if (opts.svg) {
        std::vector<double> step, payoff;
        for (const auto& s : r.game.trace) {
            step.push_back(static_cast<double>(s.step));
            payoff.push_back(s.average_payoff);
        }
        PlotSpec p{"Average payoff per operation", "operation", "average payoff", {}, false};
        p.series.push_back({"merge-and-split", step, payoff, "", true, true});
        r.artifacts.files.push_back({"payoff_trace.svg", render_svg(p)});
        const auto& reg = cfg.network.region;
        r.artifacts.files.push_back({"partition_map.svg",
                                     render_map_svg("Final partition", points, net.source().x, net.source().y,
                                                    reg.x_min, reg.x_max, reg.y_min, reg.y_max)});
    }
    r.artifacts.summary = {{"final_partition", r.game.final_partition.to_string()},
                           {"operations", r.game.operations()},
                           {"max_coalition_size", r.game.final_partition.max_coalition_size()},
                           {"dhp_stable", r.dhp_stable},
                           {"weakly_dominates_all_partitions", net.size() <= 8 ? json(r.dominates_all) : json(nullptr)},
                           {"evaluator", cfg.copula == FamilyKind::Gaussian && net.all_gaussian() ? "closed_form"
                                                                                                  : "monte_carlo"}};
    return r;
}

// ---------------------------------------------------------------------------

namespace {

struct TrialCell {
    double payoff, performance, cost;
    std::size_t coalitions, max_size, operations;
};

struct TrialRecord {
    bool ok = false;
    std::string error;
    // [task][alpha], proposed and random
    std::vector<std::vector<TrialCell>> proposed, random;
};

TrialRecord run_trial(const ExperimentConfig& cfg, std::size_t trial) {
    TrialRecord rec;
    const Rng trial_rng = Rng(cfg.seed).split(trial);
    Rng deploy = trial_rng.split(1);
    const NetworkModel net = build_network(cfg, deploy);
    std::vector<Partition> random_parts;
    for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
        EnergyModel e = cfg.energy;
        e.alpha = cfg.alphas[a];
        Rng rr = trial_rng.split(1000 + a);
        random_parts.push_back(random_partition(net, e, rr));
    }
    for (std::size_t k = 0; k < cfg.tasks.size(); ++k) {
        Rng mc = trial_rng.split(100 + k);
        const auto evaluator = make_evaluator(net, cfg, cfg.tasks[k], mc);
        MetricCache cache;
        std::vector<TrialCell> prop, rnd;
        for (std::size_t a = 0; a < cfg.alphas.size(); ++a) {
            EnergyModel e = cfg.energy;
            e.alpha = cfg.alphas[a];
            GameContext ctx{evaluator.get(), e, &cache, cfg.operation_cap};
            const GameResult g = run_merge_split(Partition::singletons(net.size()), ctx);
            const Partition& p = g.final_partition;
            prop.push_back({average_payoff(p, ctx), average_performance(p, ctx), average_energy(p, e), p.size(),
                            p.max_coalition_size(), g.operations()});
            const Partition& q = random_parts[a];
            rnd.push_back({average_payoff(q, ctx), average_performance(q, ctx), average_energy(q, e), q.size(),
                           q.max_coalition_size(), 0});
        }
        rec.proposed.push_back(std::move(prop));
        rec.random.push_back(std::move(rnd));
    }
    rec.ok = true;
    return rec;
}

}  // namespace

AlphaSweepResult run_alpha_sweep(const ExperimentConfig& cfg, const RunOptions& opts) {
    AlphaSweepResult r;
    r.alphas = cfg.alphas;
    r.tasks = cfg.tasks;
    std::vector<TrialRecord> records(cfg.trials);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < cfg.trials; t = next++) {
            try {
                records[t] = run_trial(cfg, t);
            } catch (const std::exception& e) {
                records[t].ok = false;
                records[t].error = e.what();
            }
        }
    };
    const std::size_t nthreads = std::min(cfg.threads, cfg.trials);
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // aggregation in trial order
    const std::size_t nt = cfg.tasks.size(), na = cfg.alphas.size();
    r.proposed.assign(nt, std::vector<MethodStats>(na));
    r.random.assign(nt, std::vector<MethodStats>(na));
    CsvTable trials({"trial", "task", "alpha", "method", "payoff", "performance", "cost", "coalitions",
                     "max_coalition_size", "operations"});
    json failures = json::array();
    for (std::size_t t = 0; t < cfg.trials; ++t) {
        const TrialRecord& rec = records[t];
        if (!rec.ok) {
            ++r.artifacts.failures;
            failures.push_back({{"trial", t}, {"error", rec.error}});
            continue;
        }
        ++r.trials_ok;
        for (std::size_t k = 0; k < nt; ++k) {
            for (std::size_t a = 0; a < na; ++a) {
                for (int m = 0; m < 2; ++m) {
                    const TrialCell& c = m == 0 ? rec.proposed[k][a] : rec.random[k][a];
                    MethodStats& s = m == 0 ? r.proposed[k][a] : r.random[k][a];
                    s.payoff.push_back(c.payoff);
                    s.performance.push_back(c.performance);
                    s.cost.push_back(c.cost);
                    trials.add_row({std::to_string(t), task_label(cfg.tasks[k]), format_real(cfg.alphas[a]),
                                    m == 0 ? "proposed" : "random", format_real(c.payoff), format_real(c.performance),
                                    format_real(c.cost), std::to_string(c.coalitions), std::to_string(c.max_size),
                                    std::to_string(c.operations)});
                }
            }
        }
    }
    CsvTable summary({"task", "alpha", "method", "trials", "mean_payoff", "se_payoff", "mean_performance",
                      "se_performance", "mean_cost", "se_cost"});
    for (std::size_t k = 0; k < nt; ++k) {
        for (std::size_t a = 0; a < na; ++a) {
            for (int m = 0; m < 2; ++m) {
                const MethodStats& s = m == 0 ? r.proposed[k][a] : r.random[k][a];
                const MeanSe p = mean_and_se(s.payoff), q = mean_and_se(s.performance), c = mean_and_se(s.cost);
                summary.add_row({task_label(cfg.tasks[k]), format_real(cfg.alphas[a]), m == 0 ? "proposed" : "random",
                                 std::to_string(s.payoff.size()), format_real(p.mean), format_real(p.se),
                                 format_real(q.mean), format_real(q.se), format_real(c.mean), format_real(c.se)});
            }
        }
    }
    r.artifacts.files.push_back({"alpha_sweep_trials.csv", trials.str()});
    r.artifacts.files.push_back({"alpha_sweep_summary.csv", summary.str()});
    if (opts.svg) {
        for (std::size_t k = 0; k < nt; ++k) {
            const std::string name = task_label(cfg.tasks[k]);
            for (int metric = 0; metric < 2; ++metric) {
                PlotSpec p{metric == 0 ? "Overall payoff vs alpha (" + name + ")"
                                       : "Overall communication cost vs alpha (" + name + ")",
                           "alpha", metric == 0 ? "average payoff" : "average E(S)", {}, false};
                for (int m = 0; m < 2; ++m) {
                    std::vector<double> y;
                    for (std::size_t a = 0; a < na; ++a) {
                        const MethodStats& s = m == 0 ? r.proposed[k][a] : r.random[k][a];
                        y.push_back(mean_and_se(metric == 0 ? s.payoff : s.cost).mean);
                    }
                    p.series.push_back({m == 0 ? "coalition game" : "random", cfg.alphas, y, "", true, true});
                }
                r.artifacts.files.push_back({name + (metric == 0 ? "_payoff.svg" : "_cost.svg"), render_svg(p)});
            }
        }
    }
    r.artifacts.summary = {{"trials_ok", r.trials_ok}, {"failures", failures}};
    return r;
}

// ---------------------------------------------------------------------------

Artifacts run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
    switch (cfg.experiment) {
        case ExperimentKind::GafiVsRho: return run_gafi_vs_rho(cfg, opts).artifacts;
        case ExperimentKind::GkldVsTau: return run_gkld_vs_tau(cfg, opts).artifacts;
        case ExperimentKind::EightSensorGame: return run_eight_sensor_game(cfg, opts).artifacts;
        case ExperimentKind::AlphaSweep: return run_alpha_sweep(cfg, opts).artifacts;
    }
    throw Error(ErrorKind::SchemaViolation, "unknown experiment");
}

json write_artifacts(const Artifacts& artifacts, const ExperimentConfig& cfg, const std::filesystem::path& dir) {
    json files = json::array();
    auto emit = [&](const std::string& name, const std::string& content) {
        const std::string sum = write_file(dir / name, content);
        files.push_back({{"name", name}, {"sha256", sum}, {"bytes", content.size()}});
    };
    for (const auto& f : artifacts.files) emit(f.name, f.content);
    const json resolved = to_json(cfg);
    emit("config.json", resolved.dump(2) + "\n");
    json manifest = {{"manifest_version", 1},
                     {"experiment", to_string(cfg.experiment)},
                     {"seed", cfg.seed},
                     {"variance_policy", to_string(cfg.variance_policy)},
                     {"config", resolved},
                     {"files", files},
                     {"failures", artifacts.failures},
                     {"summary", artifacts.summary}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    return manifest;
}

}  // namespace copcoal
