// Command-line front end: one subcommand per experiment plus `check`.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "copcoal/experiments.hpp"
#include "copcoal/output.hpp"

using namespace copcoal;

namespace {

enum Exit { kOk = 0, kConfig = 2, kNumerical = 3, kAborted = 4 };

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::ParseError:
        case ErrorKind::SchemaViolation:
        case ErrorKind::Io: return kConfig;
        case ErrorKind::IterationCapExceeded:
        case ErrorKind::CycleDetected: return kAborted;
        default: return kNumerical;
    }
}

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<std::size_t> threads;
    bool no_svg = false;
};

std::string output_dir(const Options& o, const ExperimentConfig& cfg) {
    if (!o.out.empty()) return o.out;
    if (!cfg.output_dir.empty()) return cfg.output_dir;
    if (const char* env = std::getenv("COPCOAL_OUT_DIR"); env && *env) return env;
    return std::string("out/") + to_string(cfg.experiment);
}

ExperimentConfig load(const Options& o) {
    ExperimentConfig cfg = validate_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    if (o.threads) {
        if (*o.threads < 1) throw ConfigError(std::vector<Violation>{{"threads", "must be >= 1"}});
        cfg.threads = *o.threads;
    }
    return cfg;
}

void print_warnings(const Artifacts& a) {
    const auto& s = a.summary;
    for (auto it = s.begin(); it != s.end(); ++it) {
        if (it->is_object() && it->contains("noisy_points") && (*it)["noisy_points"].get<std::size_t>() > 0) {
            std::cerr << "warning: " << it.key() << ": " << (*it)["noisy_points"].get<std::size_t>()
                      << " points with Monte-Carlo standard error above 5% of |value|\n";
        }
    }
}

int run(const Options& o, ExperimentKind kind) {
    ExperimentConfig cfg = load(o);
    if (cfg.experiment != kind) {
        throw ConfigError(std::vector<Violation>{{"experiment", std::string("config is for '") + to_string(cfg.experiment) +
                                              "', subcommand expects '" + to_string(kind) + "'"}});
    }
    const Artifacts a = run_experiment(cfg, RunOptions{!o.no_svg});
    print_warnings(a);
    const std::string dir = output_dir(o, cfg);
    write_artifacts(a, cfg, dir);
    std::cout << "wrote " << a.files.size() + 2 << " files to " << dir << "\n" << a.summary.dump(2) << "\n";
    if (a.failures > 0) {
        std::cerr << a.failures << " trial(s) failed\n";
        return kNumerical;
    }
    return kOk;
}

// Invariants on the network a config describes.
int check(const Options& o) {
    ExperimentConfig cfg = load(o);
    Rng rng(cfg.seed);
    Rng deploy = rng.split(1);
    const NetworkModel net = build_network(cfg, deploy);
    const std::size_t n = net.size();
    int failed = 0;
    auto report = [&](const std::string& name, bool ok, const std::string& detail) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << "\n";
        if (!ok) ++failed;
    };
    char buf[160];

    const Matrix& r = net.corr_matrix();
    const double lam = min_eigenvalue(r);
    double diag = 0.0, asym = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        diag = std::max(diag, std::abs(r(i, i) - 1.0));
        for (std::size_t j = 0; j < n; ++j) asym = std::max(asym, std::abs(r(i, j) - r(j, i)));
    }
    std::snprintf(buf, sizeof buf, "min eigenvalue %.3g, max |diag-1| %.3g, max asymmetry %.3g", lam, diag, asym);
    report("correlation matrix", lam >= -1e-10 && diag < 1e-12 && asym < 1e-12, buf);

    if (net.all_gaussian()) {
        // nested chains 0 ⊂ {0,1} ⊂ ... and vine identity on each prefix up to size 6
        const Detection det = [&] {
            for (const auto& t : cfg.tasks)
                if (std::holds_alternative<Detection>(t)) return std::get<Detection>(t);
            return Detection{};
        }();
        double worst_mono = 0.0, worst_vine = 0.0;
        double prev_i = 0.0, prev_d = 0.0;
        std::vector<SensorId> members;
        for (std::size_t k = 0; k < n; ++k) {
            members.push_back(static_cast<SensorId>(k));
            const Coalition s(members);
            const double fi = coalition_fi_gaussian(s, net).total;
            const double kl = coalition_kld_gaussian(s, net, det).total;
            worst_mono = std::max({worst_mono, prev_i - fi, prev_d - kl});
            prev_i = fi;
            prev_d = kl;
            if (k < 6) {
                const MetricValue v = coalition_fi_gaussian(s, net);
                double sum = 0.0;
                for (const auto& term : pairwise_decomposition_gaussian(s, net, Estimation{})) sum += term.value;
                worst_vine = std::max(worst_vine, std::abs(sum - v.copula_part));
            }
        }
        std::snprintf(buf, sizeof buf, "largest decrease along the nested chain %.3g", worst_mono);
        report("metric monotonicity", worst_mono <= 1e-10, buf);
        std::snprintf(buf, sizeof buf, "max |vine sum - copula part| %.3g", worst_vine);
        report("vine decomposition", worst_vine <= 1e-9, buf);
    } else {
        std::cout << "SKIP closed-form checks: network has non-Gaussian marginals\n";
    }

    if (n <= 12) {
        Rng mc = rng.split(2);
        const auto evaluator = make_evaluator(net, cfg, cfg.tasks.front(), mc);
        MetricCache cache;
        GameContext ctx{evaluator.get(), cfg.energy, &cache, cfg.operation_cap};
        const GameResult g = run_merge_split(Partition::singletons(n), ctx);
        bool feasible = true;
        for (const auto& s : g.final_partition.coalitions())
            feasible = feasible && coalition_energy(s, cfg.energy) < cfg.energy.alpha;
        report("game", feasible && is_dhp_stable(g.final_partition, ctx),
               "final " + g.final_partition.to_string() + " after " + std::to_string(g.operations()) + " operations");
    } else {
        std::cout << "SKIP game check: more than 12 sensors\n";
    }
    return failed == 0 ? kOk : kNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Copula-based coalition formation simulator"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "experiment config (JSON)")->required();
        sub->add_option("--seed", o.seed, "override the config seed");
        sub->add_option("--out", o.out, "output directory (default: config, then $COPCOAL_OUT_DIR)");
        sub->add_option("--threads", o.threads, "worker threads for trial-parallel experiments");
        sub->add_flag("--no-svg", o.no_svg, "skip SVG plots");
    };
    struct Cmd {
        const char* name;
        const char* help;
        std::optional<ExperimentKind> kind;
    };
    const Cmd cmds[] = {
        {"gafi-curve", "GAFI of a Gaussian copula vs rho", ExperimentKind::GafiVsRho},
        {"gkld-curve", "GKLD of several copula families vs Kendall tau", ExperimentKind::GkldVsTau},
        {"eight-sensor", "merge-and-split game on one deployment", ExperimentKind::EightSensorGame},
        {"alpha-sweep", "proposed game vs random baseline over energy budgets", ExperimentKind::AlphaSweep},
        {"check", "invariant suite on the config's network", std::nullopt},
    };
    std::vector<std::pair<CLI::App*, std::optional<ExperimentKind>>> subs;
    for (const auto& c : cmds) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        add_common(sub);
        subs.emplace_back(sub, c.kind);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kConfig;
    }
    try {
        for (const auto& [sub, kind] : subs) {
            if (!sub->parsed()) continue;
            return kind ? run(o, *kind) : check(o);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error:\n";
        for (const auto& v : e.violations()) std::cerr << "  " << v.field << ": " << v.reason << "\n";
        return kConfig;
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kNumerical;
    }
    return kOk;
}
