#include "copcoal/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace copcoal {

using nlohmann::json;

const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::GafiVsRho: return "gafi_vs_rho";
        case ExperimentKind::GkldVsTau: return "gkld_vs_tau";
        case ExperimentKind::EightSensorGame: return "eight_sensor_game";
        case ExperimentKind::AlphaSweep: return "alpha_sweep";
    }
    return "?";
}

ExperimentKind experiment_from_string(const std::string& name) {
    for (auto k : {ExperimentKind::GafiVsRho, ExperimentKind::GkldVsTau, ExperimentKind::EightSensorGame,
                   ExperimentKind::AlphaSweep}) {
        if (name == to_string(k)) return k;
    }
    throw Error(ErrorKind::SchemaViolation, "unknown experiment '" + name + "'");
}

namespace {

std::string join_violations(const std::vector<Violation>& vs) {
    std::string s;
    for (const auto& v : vs) s += "\n  " + v.field + ": " + v.reason;
    return s;
}

}  // namespace

ConfigError::ConfigError(std::vector<Violation> violations)
    : Error(ErrorKind::SchemaViolation,
            std::to_string(violations.size()) + " config violation(s):" + join_violations(violations)),
      violations_(std::move(violations)) {}

json parse_json_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + e.what());
    }
}

namespace {

// Reads optional fields of one JSON object, recording type errors and
// unknown keys instead of throwing.
class Reader {
public:
    Reader(const json& j, std::string path, std::vector<Violation>& out) : j_(j), path_(std::move(path)), out_(out) {
        if (!j_.is_object()) fail("", "must be an object");
    }

    ~Reader() {
        if (!j_.is_object()) return;
        for (const auto& [key, _] : j_.items()) {
            if (!seen_.count(key)) out_.push_back({field(key), "unknown key"});
        }
    }

    bool has(const std::string& key) {
        seen_.insert(key);
        return j_.is_object() && j_.contains(key);
    }

    void number(const std::string& key, double& dst) {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number()) return fail(key, "must be a number");
        dst = v.get<double>();
    }

    template <class Int>
    void integer(const std::string& key, Int& dst) {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
            return fail(key, "must be a nonnegative integer");
        }
        dst = v.get<Int>();
    }

    void string(const std::string& key, std::string& dst) {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_string()) return fail(key, "must be a string");
        dst = v.get<std::string>();
    }

    void numbers(const std::string& key, std::vector<double>& dst) {
        if (!has(key)) return;
        const json& v = j_.at(key);
        if (!v.is_array()) return fail(key, "must be an array of numbers");
        std::vector<double> out;
        for (const auto& x : v) {
            if (!x.is_number()) return fail(key, "must be an array of numbers");
            out.push_back(x.get<double>());
        }
        dst = std::move(out);
    }

    void point(const std::string& key, Point& dst) {
        std::vector<double> xy;
        const std::size_t before = out_.size();
        numbers(key, xy);
        if (out_.size() != before || !has(key)) return;
        if (xy.size() != 2) return fail(key, "must be [x, y]");
        dst = {xy[0], xy[1]};
    }

    const json* object(const std::string& key) {
        if (!has(key)) return nullptr;
        return &j_.at(key);
    }

    std::string field(const std::string& key) const {
        if (path_.empty()) return key;
        return key.empty() ? path_ : path_ + "." + key;
    }

    void fail(const std::string& key, const std::string& reason) { out_.push_back({field(key), reason}); }

private:
    const json& j_;
    std::string path_;
    std::vector<Violation>& out_;
    std::set<std::string> seen_;
};

void apply_defaults(ExperimentConfig& c) {
    switch (c.experiment) {
        case ExperimentKind::GafiVsRho:
            c.tasks = {Estimation{}};
            break;
        case ExperimentKind::GkldVsTau:
            c.tasks = {Detection{0.0, std::sqrt(2.0)}};
            c.families = {FamilyKind::Gaussian, FamilyKind::StudentT, FamilyKind::Clayton, FamilyKind::Gumbel};
            break;
        case ExperimentKind::EightSensorGame:
            c.network.count = 8;
            c.network.marginals = MarginalAssignment::DistanceGaussian;
            c.copula = FamilyKind::Gaussian;
            c.tasks = {Estimation{}};
            break;
        case ExperimentKind::AlphaSweep:
            c.trials = 100;
            c.network.count = 28;
            c.network.marginals = MarginalAssignment::Mixed;
            c.network.gaussian_count = 14;
            c.copula = FamilyKind::StudentT;
            c.alphas = {2.0, 3.0, 4.0, 5.0, 6.0};
            c.tasks = {Estimation{}, Detection{1.0, 2.4}};
            break;
    }
}

void read_task(const json& j, const std::string& path, std::vector<Violation>& out, InferenceTask& dst) {
    Reader r(j, path, out);
    std::string kind = "estimation";
    r.string("kind", kind);
    if (kind == "estimation") {
        Estimation e;
        std::string policy = "fixed_grid";
        r.string("policy", policy);
        if (policy == "fixed_grid")
            e.policy = Estimation::Policy::FixedGrid;
        else if (policy == "prior_average")
            e.policy = Estimation::Policy::PriorAverage;
        else
            r.fail("policy", "must be fixed_grid or prior_average");
        r.numbers("grid", e.grid);
        r.number("prior_mean", e.prior_mean);
        r.number("prior_sd", e.prior_sd);
        dst = e;
    } else if (kind == "detection") {
        Detection d;
        r.number("theta0", d.theta0);
        r.number("theta1", d.theta1);
        dst = d;
    } else {
        r.fail("kind", "must be estimation or detection");
    }
}

void check(std::vector<Violation>& out, bool ok, const std::string& field, const std::string& reason) {
    if (!ok) out.push_back({field, reason});
}

void validate_semantics(const ExperimentConfig& c, std::vector<Violation>& out) {
    check(out, c.trials >= 1, "trials", "must be >= 1");
    check(out, c.threads >= 1, "threads", "must be >= 1");
    check(out, c.psd_floor >= 0.0 && c.psd_floor < 1.0, "psd_floor", "must lie in [0, 1)");
    check(out, c.energy.requests_per_unit_time >= 0.0, "energy.r", "must be >= 0");
    check(out, c.energy.energy_per_transmission >= 0.0, "energy.E_t", "must be >= 0");
    check(out, c.energy.alpha > 0.0, "energy.alpha", "must be > 0");
    check(out, c.energy.t_barrier > 0.0, "energy.t", "must be > 0");
    if (c.experiment == ExperimentKind::AlphaSweep) {
        check(out, !c.alphas.empty(), "energy.alphas", "must be nonempty for alpha_sweep");
        for (std::size_t i = 0; i < c.alphas.size(); ++i) {
            check(out, c.alphas[i] > 0.0, "energy.alphas", "entries must be > 0");
            if (i) check(out, c.alphas[i] > c.alphas[i - 1], "energy.alphas", "must be strictly increasing");
        }
    }
    const auto& n = c.network;
    check(out, n.region.x_min < n.region.x_max && n.region.y_min < n.region.y_max, "network.region",
          "min must be below max");
    if (n.locations.empty()) {
        check(out, n.count >= 1, "network.count", "must be >= 1");
    } else {
        for (const auto& p : n.locations) {
            check(out, n.region.contains(p), "network.locations", "location outside the region");
        }
    }
    const std::size_t count = n.locations.empty() ? n.count : n.locations.size();
    if (n.marginals == MarginalAssignment::Mixed) {
        check(out, n.gaussian_count <= count, "network.gaussian_count", "exceeds the sensor count");
    }
    check(out, n.gaussian_sigma > 0.0, "network.gaussian_sigma", "must be > 0");
    check(out, c.nu > 2.0, "copula.nu", "must be > 2");
    if (c.experiment == ExperimentKind::GkldVsTau) {
        check(out, c.families.size() >= 2, "copula.families", "needs at least two families");
        check(out, c.gkld_sigma > 0.0, "gkld.sigma", "must be > 0");
        check(out, c.tau_min > 0.0 && c.tau_min < c.tau_max && c.tau_max < 1.0, "gkld.tau_min",
              "need 0 < tau_min < tau_max < 1");
        check(out, c.tau_step > 0.0, "gkld.tau_step", "must be > 0");
    }
    if (c.experiment == ExperimentKind::GafiVsRho) {
        check(out, c.rho_min > -1.0 && c.rho_min < c.rho_max && c.rho_max < 1.0, "gafi.rho_min",
              "need -1 < rho_min < rho_max < 1");
        check(out, c.rho_step > 0.0, "gafi.rho_step", "must be > 0");
        for (const auto* p : {&c.gafi_identical, &c.gafi_heterogeneous}) {
            check(out, p->sigma_x > 0.0 && p->sigma_y > 0.0, "gafi", "sigmas must be > 0");
        }
    }
    check(out, !c.tasks.empty(), "tasks", "at least one task is required");
    for (const auto& t : c.tasks) {
        try {
            validate(t);
        } catch (const Error& e) {
            out.push_back({"task", e.what()});
        }
    }
    const bool mc_used = c.experiment == ExperimentKind::GkldVsTau || c.experiment == ExperimentKind::AlphaSweep ||
                         c.copula != FamilyKind::Gaussian || n.marginals == MarginalAssignment::Mixed;
    if (mc_used) {
        check(out, c.mc.n_samples >= kMinMcSamples, "mc.n_samples", "must be >= 1000");
        check(out, c.mc.fd_step >= 1e-6, "mc.fd_step", "must be >= 1e-6");
    }
    check(out, c.operation_cap >= 1, "game.operation_cap", "must be >= 1");
}

}  // namespace

ExperimentConfig parse_config(const json& root) {
    const json& j = root.is_object() && root.contains("manifest_version") && root.contains("config")
                        ? root.at("config")
                        : root;
    std::vector<Violation> out;
    ExperimentConfig c;
    {
        Reader r(j, "", out);
        std::string name;
        if (!r.has("experiment")) {
            r.fail("experiment", "is required");
        } else {
            r.string("experiment", name);
            try {
                c.experiment = experiment_from_string(name);
            } catch (const Error&) {
                r.fail("experiment", "unknown experiment '" + name + "'");
            }
        }
        apply_defaults(c);
        r.integer("seed", c.seed);
        r.integer("trials", c.trials);
        r.integer("threads", c.threads);
        r.string("output_dir", c.output_dir);
        std::string policy;
        r.string("variance_policy", policy);
        if (!policy.empty()) {
            if (policy == "paper_literal")
                c.variance_policy = VariancePolicy::PaperLiteral;
            else if (policy == "distance_proportional")
                c.variance_policy = VariancePolicy::DistanceProportional;
            else
                r.fail("variance_policy", "must be paper_literal or distance_proportional");
        }
        r.number("psd_floor", c.psd_floor);

        if (const json* e = r.object("energy")) {
            Reader er(*e, "energy", out);
            er.number("r", c.energy.requests_per_unit_time);
            er.number("E_t", c.energy.energy_per_transmission);
            er.number("alpha", c.energy.alpha);
            er.number("t", c.energy.t_barrier);
            er.numbers("alphas", c.alphas);
        }
        if (const json* n = r.object("network")) {
            Reader nr(*n, "network", out);
            nr.integer("count", c.network.count);
            if (const json* reg = nr.object("region")) {
                Reader rr(*reg, "network.region", out);
                rr.number("x_min", c.network.region.x_min);
                rr.number("x_max", c.network.region.x_max);
                rr.number("y_min", c.network.region.y_min);
                rr.number("y_max", c.network.region.y_max);
            }
            nr.point("source", c.network.source);
            if (const json* locs = nr.object("locations")) {
                if (!locs->is_array()) {
                    nr.fail("locations", "must be an array of [x, y]");
                } else {
                    for (const auto& p : *locs) {
                        if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
                            nr.fail("locations", "must be an array of [x, y]");
                            break;
                        }
                        c.network.locations.push_back({p[0].get<double>(), p[1].get<double>()});
                    }
                }
            }
            std::string marg;
            nr.string("marginals", marg);
            if (!marg.empty()) {
                if (marg == "distance_gaussian")
                    c.network.marginals = MarginalAssignment::DistanceGaussian;
                else if (marg == "mixed")
                    c.network.marginals = MarginalAssignment::Mixed;
                else
                    nr.fail("marginals", "must be distance_gaussian or mixed");
            }
            nr.integer("gaussian_count", c.network.gaussian_count);
            nr.number("gaussian_sigma", c.network.gaussian_sigma);
        }
        if (const json* cj = r.object("copula")) {
            Reader cr(*cj, "copula", out);
            std::string fam;
            cr.string("family", fam);
            if (!fam.empty()) {
                try {
                    c.copula = family_from_string(fam);
                } catch (const Error&) {
                    cr.fail("family", "unknown family '" + fam + "'");
                }
            }
            cr.number("nu", c.nu);
            if (const json* fs = cr.object("families")) {
                std::vector<FamilyKind> kinds;
                bool ok = fs->is_array();
                if (ok) {
                    for (const auto& f : *fs) {
                        try {
                            kinds.push_back(family_from_string(f.is_string() ? f.get<std::string>() : ""));
                        } catch (const Error&) {
                            ok = false;
                        }
                    }
                }
                if (ok)
                    c.families = std::move(kinds);
                else
                    cr.fail("families", "must be an array of family names");
            }
        }
        if (const json* t = r.object("task")) {
            c.tasks.assign(1, Estimation{});
            read_task(*t, "task", out, c.tasks[0]);
        }
        if (const json* ts = r.object("tasks")) {
            if (!ts->is_array() || ts->empty()) {
                r.fail("tasks", "must be a nonempty array of task objects");
            } else {
                c.tasks.assign(ts->size(), Estimation{});
                for (std::size_t i = 0; i < ts->size(); ++i) {
                    read_task((*ts)[i], "tasks[" + std::to_string(i) + "]", out, c.tasks[i]);
                }
            }
        }
        if (const json* m = r.object("mc")) {
            Reader mr(*m, "mc", out);
            mr.integer("n_samples", c.mc.n_samples);
            mr.number("fd_step", c.mc.fd_step);
        }
        if (const json* g = r.object("gafi")) {
            Reader gr(*g, "gafi", out);
            for (auto [key, spec] : {std::pair{"identical", &c.gafi_identical},
                                     std::pair{"heterogeneous", &c.gafi_heterogeneous}}) {
                if (const json* p = gr.object(key)) {
                    Reader pr(*p, std::string("gafi.") + key, out);
                    pr.number("sigma_x", spec->sigma_x);
                    pr.number("sigma_y", spec->sigma_y);
                    pr.number("slope_x", spec->slope_x);
                    pr.number("slope_y", spec->slope_y);
                }
            }
            gr.number("rho_min", c.rho_min);
            gr.number("rho_max", c.rho_max);
            gr.number("rho_step", c.rho_step);
        }
        if (const json* g = r.object("gkld")) {
            Reader gr(*g, "gkld", out);
            gr.number("sigma", c.gkld_sigma);
            gr.number("tau_min", c.tau_min);
            gr.number("tau_max", c.tau_max);
            gr.number("tau_step", c.tau_step);
        }
        if (const json* g = r.object("game")) {
            Reader gr(*g, "game", out);
            gr.integer("operation_cap", c.operation_cap);
        }
    }
    validate_semantics(c, out);
    if (!out.empty()) throw ConfigError(std::move(out));
    return c;
}

ExperimentConfig validate_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::Io, "cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(parse_json_text(ss.str()));
}

json to_json(const InferenceTask& task) {
    if (const auto* e = std::get_if<Estimation>(&task)) {
        return {{"kind", "estimation"},
                {"policy", e->policy == Estimation::Policy::FixedGrid ? "fixed_grid" : "prior_average"},
                {"grid", e->grid},
                {"prior_mean", e->prior_mean},
                {"prior_sd", e->prior_sd}};
    }
    const auto& d = std::get<Detection>(task);
    return {{"kind", "detection"}, {"theta0", d.theta0}, {"theta1", d.theta1}};
}

json to_json(const ExperimentConfig& c) {
    json j;
    j["experiment"] = to_string(c.experiment);
    j["seed"] = c.seed;
    j["trials"] = c.trials;
    j["threads"] = c.threads;
    j["output_dir"] = c.output_dir;
    j["variance_policy"] = to_string(c.variance_policy);
    j["psd_floor"] = c.psd_floor;
    j["energy"] = {{"r", c.energy.requests_per_unit_time},
                   {"E_t", c.energy.energy_per_transmission},
                   {"alpha", c.energy.alpha},
                   {"t", c.energy.t_barrier},
                   {"alphas", c.alphas}};
    json net;
    net["count"] = c.network.count;
    net["region"] = {{"x_min", c.network.region.x_min},
                     {"x_max", c.network.region.x_max},
                     {"y_min", c.network.region.y_min},
                     {"y_max", c.network.region.y_max}};
    net["source"] = {c.network.source.x, c.network.source.y};
    json locs = json::array();
    for (const auto& p : c.network.locations) locs.push_back({p.x, p.y});
    net["locations"] = locs;
    net["marginals"] = c.network.marginals == MarginalAssignment::Mixed ? "mixed" : "distance_gaussian";
    net["gaussian_count"] = c.network.gaussian_count;
    net["gaussian_sigma"] = c.network.gaussian_sigma;
    j["network"] = net;
    json fams = json::array();
    for (auto f : c.families) fams.push_back(to_string(f));
    j["copula"] = {{"family", to_string(c.copula)}, {"nu", c.nu}, {"families", fams}};
    json tasks = json::array();
    for (const auto& t : c.tasks) tasks.push_back(to_json(t));
    j["tasks"] = tasks;
    j["mc"] = {{"n_samples", c.mc.n_samples}, {"fd_step", c.mc.fd_step}};
    auto pair = [](const PairSpec& p) {
        return json{{"sigma_x", p.sigma_x}, {"sigma_y", p.sigma_y}, {"slope_x", p.slope_x}, {"slope_y", p.slope_y}};
    };
    j["gafi"] = {{"identical", pair(c.gafi_identical)},
                 {"heterogeneous", pair(c.gafi_heterogeneous)},
                 {"rho_min", c.rho_min},
                 {"rho_max", c.rho_max},
                 {"rho_step", c.rho_step}};
    j["gkld"] = {{"sigma", c.gkld_sigma}, {"tau_min", c.tau_min}, {"tau_max", c.tau_max}, {"tau_step", c.tau_step}};
    j["game"] = {{"operation_cap", c.operation_cap}};
    return j;
}

}  // namespace copcoal
