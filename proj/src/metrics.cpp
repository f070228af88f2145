#include "copcoal/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "copcoal/error.hpp"

namespace copcoal {

namespace {

double sigma_of(const Sensor& s) { return std::get<GaussianMean>(s.marginal).sigma; }

double shift_factor(const Detection& d) {
    const double dt = d.theta1 - d.theta0;
    return 0.5 * dt * dt;
}

bool has_exponential(const NetworkModel& net, std::span<const SensorId> ids) {
    return std::any_of(ids.begin(), ids.end(), [&](SensorId id) { return !is_gaussian(net.sensor(id).marginal); });
}

}  // namespace

void validate(const InferenceTask& task) {
    if (const auto* e = std::get_if<Estimation>(&task)) {
        require(std::isfinite(e->prior_mean), ErrorKind::OutOfRange, "prior mean must be finite");
        require(e->prior_sd > 0.0 && std::isfinite(e->prior_sd), ErrorKind::OutOfRange, "prior sd must be > 0");
        if (e->policy == Estimation::Policy::FixedGrid) {
            require(!e->grid.empty(), ErrorKind::OutOfRange, "theta grid must be nonempty");
            for (double t : e->grid) require(std::isfinite(t), ErrorKind::InvalidTheta, "theta grid must be finite");
        }
        return;
    }
    const auto& d = std::get<Detection>(task);
    require(std::isfinite(d.theta0) && std::isfinite(d.theta1), ErrorKind::InvalidTheta, "thetas must be finite");
}

std::string task_name(const InferenceTask& task) {
    return std::holds_alternative<Estimation>(task) ? "estimation" : "detection";
}

double prior_information(const Estimation& task) { return 1.0 / (task.prior_sd * task.prior_sd); }

double individual_metric(const Sensor& sensor, const InferenceTask& task) {
    if (const auto* e = std::get_if<Estimation>(&task)) {
        if (const auto* g = std::get_if<GaussianMean>(&sensor.marginal)) return 1.0 / (g->sigma * g->sigma);
        require(e->policy == Estimation::Policy::FixedGrid, ErrorKind::InvalidTheta,
                "exponential marginals need a positive fixed theta grid");
        double acc = 0.0;
        for (double t : e->grid) {
            require(t > 0.0, ErrorKind::InvalidTheta, "exponential rate must be > 0");
            acc += 1.0 / (t * t);
        }
        return acc / static_cast<double>(e->grid.size());
    }
    const auto& d = std::get<Detection>(task);
    if (const auto* g = std::get_if<GaussianMean>(&sensor.marginal)) return shift_factor(d) / (g->sigma * g->sigma);
    require(d.theta0 > 0.0 && d.theta1 > 0.0, ErrorKind::InvalidTheta, "exponential rate must be > 0");
    return std::log(d.theta0 / d.theta1) + d.theta1 / d.theta0 - 1.0;
}

// ---------------------------------------------------------------------------

double pairwise_gafi_gaussian(double sigma_x, double sigma_y, double slope_x, double slope_y, double rho) {
    require(sigma_x > 0.0 && sigma_y > 0.0, ErrorKind::OutOfRange, "sigmas must be > 0");
    require(std::abs(rho) < 1.0, ErrorKind::DegenerateCorrelation, "|rho| must be < 1");
    const double vx = sigma_x * sigma_x;
    const double vy = sigma_y * sigma_y;
    const double cross = 2.0 * rho * slope_x * slope_y * sigma_x * sigma_y;
    const double quad = rho * rho * (slope_x * slope_x * vy + slope_y * slope_y * vx);
    return -(cross - quad) / (vx * vy * (1.0 - rho * rho));
}

double pairwise_gkld_gaussian(double sigma_x, double sigma_y, double theta0, double theta1, double rho) {
    return shift_factor({theta0, theta1}) * pairwise_gafi_gaussian(sigma_x, sigma_y, 1.0, 1.0, rho);
}

double gaussian_information_quadratic(const Matrix& cov) {
    Eigen::LLT<Matrix> llt(cov);
    require(llt.info() == Eigen::Success, ErrorKind::SingularCovariance, "covariance not positive definite");
    const Matrix l = llt.matrixL();
    for (Eigen::Index i = 0; i < l.rows(); ++i) {
        require(l(i, i) > 1e-10, ErrorKind::SingularCovariance, "covariance numerically singular");
    }
    const Vector w = llt.matrixL().solve(Vector::Ones(cov.rows()));
    return w.squaredNorm();
}

namespace {

// Conditional law of (a, b) given the block `cond` of a Gaussian vector with
// mean theta * 1 and covariance `cov`.
struct ConditionalPair {
    double sigma_a, sigma_b, slope_a, slope_b, rho;
};

ConditionalPair condition_pair(const Matrix& cov, int a, int b, const std::vector<int>& cond) {
    if (cond.empty()) {
        const double sa = std::sqrt(cov(a, a));
        const double sb = std::sqrt(cov(b, b));
        return {sa, sb, 1.0, 1.0, cov(a, b) / (sa * sb)};
    }
    const auto m = static_cast<Eigen::Index>(cond.size());
    Matrix cc(m, m);
    Matrix rhs(m, 3);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) cc(i, j) = cov(cond[i], cond[j]);
        rhs(i, 0) = cov(cond[i], a);
        rhs(i, 1) = cov(cond[i], b);
        rhs(i, 2) = 1.0;
    }
    Eigen::LLT<Matrix> llt(cc);
    require(llt.info() == Eigen::Success, ErrorKind::SingularConditioningSet, "conditioning block not positive definite");
    const Matrix w = llt.matrixL().solve(rhs);
    const double vaa = cov(a, a) - w.col(0).squaredNorm();
    const double vbb = cov(b, b) - w.col(1).squaredNorm();
    const double vab = cov(a, b) - w.col(0).dot(w.col(1));
    require(vaa > 1e-14 && vbb > 1e-14, ErrorKind::SingularConditioningSet, "pair determined by conditioning set");
    ConditionalPair p;
    p.sigma_a = std::sqrt(vaa);
    p.sigma_b = std::sqrt(vbb);
    p.slope_a = 1.0 - w.col(0).dot(w.col(2));
    p.slope_b = 1.0 - w.col(1).dot(w.col(2));
    p.rho = vab / (p.sigma_a * p.sigma_b);
    return p;
}

std::vector<VineTerm> vine_terms(const Coalition& s, const NetworkModel& net, double scale) {
    const Matrix cov = net.covariance_block(s);
    const Matrix corr = net.corr_block(s);
    const auto& m = s.members();
    const int k = static_cast<int>(m.size());
    std::vector<VineTerm> out;
    out.reserve(static_cast<std::size_t>(k * (k - 1) / 2));
    for (int lag = 1; lag < k; ++lag) {
        for (int a = 0; a + lag < k; ++a) {
            const int b = a + lag;
            std::vector<int> cond;
            for (int c = a + 1; c < b; ++c) cond.push_back(c);
            const ConditionalPair p = condition_pair(cov, a, b, cond);
            VineTerm t;
            t.first = m[a];
            t.second = m[b];
            for (int c : cond) t.conditioning.push_back(m[c]);
            t.partial_corr = partial_correlation(corr, a, b, cond);
            t.value = scale * pairwise_gafi_gaussian(p.sigma_a, p.sigma_b, p.slope_a, p.slope_b, p.rho);
            out.push_back(std::move(t));
        }
    }
    return out;
}

MetricValue gaussian_closed_form(const Coalition& s, const NetworkModel& net, double scale) {
    require(net.all_gaussian(s), ErrorKind::DimensionMismatch, "closed form needs Gaussian marginals");
    MetricValue v;
    v.method = MetricMethod::ClosedForm;
    for (SensorId id : s.members()) v.individual_sum += scale / std::pow(sigma_of(net.sensor(id)), 2);
    if (s.size() == 1) {
        v.total = v.individual_sum;
        return v;
    }
    const double quad = gaussian_information_quadratic(net.covariance_block(s));
    v.copula_part = scale * quad - v.individual_sum;
    v.total = v.individual_sum + v.copula_part;
    for (const auto& term : vine_terms(s, net, scale)) {
        if (term.value >= 0.0)
            v.diversity_gain += term.value;
        else
            v.redundancy_loss -= term.value;
    }
    return v;
}

}  // namespace

std::vector<VineTerm> pairwise_decomposition_gaussian(const Coalition& s, const NetworkModel& net,
                                                      const InferenceTask& task) {
    require(net.all_gaussian(s), ErrorKind::DimensionMismatch, "vine decomposition needs Gaussian marginals");
    const double scale = std::holds_alternative<Detection>(task) ? shift_factor(std::get<Detection>(task)) : 1.0;
    return vine_terms(s, net, scale);
}

MetricValue coalition_fi_gaussian(const Coalition& s, const NetworkModel& net) {
    return gaussian_closed_form(s, net, 1.0);
}

MetricValue coalition_kld_gaussian(const Coalition& s, const NetworkModel& net, const Detection& task) {
    validate(task);
    return gaussian_closed_form(s, net, shift_factor(task));
}

// ---------------------------------------------------------------------------
// Monte Carlo

namespace {

void check_settings(const McSettings& st) {
    require(st.n_samples >= kMinMcSamples, ErrorKind::InvalidCount, "Monte-Carlo estimate needs >= 1000 samples");
    require(st.fd_step >= 1e-6 && std::isfinite(st.fd_step), ErrorKind::StepTooSmall,
            "finite-difference step below 1e-6");
}

struct MeanSe {
    double mean;
    double se;
};

MeanSe mean_se(const std::vector<double>& v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace

McBank::McBank(const NetworkModel& net, std::vector<SensorId> ids, CopulaFamily copula, InferenceTask task,
               McSettings settings, Rng& rng, std::optional<CopulaFamily> h1_copula)
    : net_(&net),
      ids_(std::move(ids)),
      local_of_(net.size(), -1),
      copula_(std::move(copula)),
      h1_copula_(std::move(h1_copula)),
      task_(std::move(task)),
      settings_(settings),
      n_(settings.n_samples) {
    validate(task_);
    check_settings(settings_);
    require(!ids_.empty() && ids_.size() == copula_.dimension(), ErrorKind::DimensionMismatch,
            "copula dimension must match the sensor set");
    for (std::size_t j = 0; j < ids_.size(); ++j) {
        require(ids_[j] >= 0 && static_cast<std::size_t>(ids_[j]) < net.size(), ErrorKind::OutOfRange,
                "sensor id out of range");
        require(local_of_[ids_[j]] < 0, ErrorKind::InvalidPartition, "duplicate sensor id");
        local_of_[ids_[j]] = static_cast<int>(j);
    }
    if (h1_copula_) {
        require(std::holds_alternative<Detection>(task_), ErrorKind::DimensionMismatch,
                "an H1 copula only applies to detection");
        require(h1_copula_->dimension() == copula_.dimension() && h1_copula_->kind() == copula_.kind(),
                ErrorKind::DimensionMismatch, "H1 copula must match the H0 copula's family and dimension");
    }
    for (SensorId id : ids_) individual_metric(net.sensor(id), task_);  // theta checks

    Rng base(rng.engine()());
    Rng urng = base.split(1);
    const Matrix u = sample(copula_, n_, urng);
    const std::size_t d = ids_.size();

    // observations at a per-sample theta, then copula arguments at each offset
    auto observe = [&](const std::vector<double>& theta) {
        std::vector<std::vector<double>> x(d, std::vector<double>(n_));
        for (std::size_t j = 0; j < d; ++j) {
            const auto& marg = net.sensor(ids_[j]).marginal;
            for (std::size_t i = 0; i < n_; ++i) {
                x[j][i] = marginal_quantile(marg, TailProb::from_lower(u(static_cast<Eigen::Index>(i),
                                                                          static_cast<Eigen::Index>(j))),
                                            theta[i]);
            }
        }
        return x;
    };

    if (const auto* e = std::get_if<Estimation>(&task_)) {
        const double h = settings_.fd_step;
        std::vector<std::vector<double>> thetas;
        if (e->policy == Estimation::Policy::FixedGrid) {
            for (double t : e->grid) thetas.emplace_back(n_, t);
        } else {
            require(!has_exponential(net, ids_), ErrorKind::InvalidTheta,
                    "prior averaging is undefined for exponential marginals");
            Rng prng = base.split(2);
            std::vector<double> t(n_);
            for (auto& v : t) v = e->prior_mean + e->prior_sd * prng.normal();
            thetas.push_back(std::move(t));
        }
        for (const auto& theta : thetas) {
            const auto x = observe(theta);
            for (double off : {-h, 0.0, h}) {
                std::vector<double> shifted(theta);
                for (auto& v : shifted) v += off;
                if (has_exponential(net, ids_)) {
                    for (double v : shifted) require(v > 0.0, ErrorKind::InvalidTheta, "theta - h must stay > 0");
                }
                points_.push_back(make_point(copula_, x, shifted));
            }
        }
    } else {
        const auto& det = std::get<Detection>(task_);
        const auto x = observe(std::vector<double>(n_, det.theta0));
        points_.push_back(make_point(copula_, x, std::vector<double>(n_, det.theta0)));
        points_.push_back(make_point(h1_copula_ ? *h1_copula_ : copula_, x, std::vector<double>(n_, det.theta1)));
    }
}

McBank::Point McBank::make_point(const CopulaFamily& fam, const std::vector<std::vector<double>>& x,
                                 const std::vector<double>& theta) const {
    Point pt;
    const std::size_t d = ids_.size();
    if (fam.elliptical()) {
        pt.score.assign(d, std::vector<double>(n_));
        if (fam.kind() == FamilyKind::StudentT) pt.margin.assign(d, std::vector<double>(n_));
    } else {
        pt.prob.assign(d, std::vector<TailProb>(n_));
    }
    for (std::size_t j = 0; j < d; ++j) {
        const auto& marg = net_->sensor(ids_[j]).marginal;
        for (std::size_t i = 0; i < n_; ++i) {
            const TailProb p = marginal_cdf(marg, x[j][i], theta[i]).clamped();
            if (fam.elliptical()) {
                const double z = elliptical::score(fam, p);
                pt.score[j][i] = z;
                if (!pt.margin.empty()) pt.margin[j][i] = elliptical::margin_term(fam, z);
            } else {
                pt.prob[j][i] = p;
            }
        }
    }
    return pt;
}

std::vector<double> McBank::log_c(const CopulaFamily& fam, const Point& pt, const std::vector<int>& local,
                                  bool with_normalizer) const {
    const auto d = static_cast<Eigen::Index>(local.size());
    const auto n = static_cast<Eigen::Index>(n_);
    std::vector<double> out(n_, 0.0);
    if (!fam.elliptical()) {
        std::array<TailProb, 2> uv{};
        for (std::size_t i = 0; i < n_; ++i) {
            uv[0] = pt.prob[local[0]][i];
            uv[1] = pt.prob[local[1]][i];
            out[i] = log_density(fam, std::span<const TailProb>(uv));
        }
        return out;
    }
    Matrix z(d, n);
    for (Eigen::Index a = 0; a < d; ++a) {
        const auto& col = pt.score[local[a]];
        for (Eigen::Index i = 0; i < n; ++i) z(a, i) = col[i];
    }
    const Matrix qm = elliptical::quadratic_matrix(fam, fam.precision());
    const Eigen::RowVectorXd q = z.cwiseProduct(qm * z).colwise().sum();
    const double c0 = with_normalizer ? elliptical::normalizer(fam, local.size(), fam.log_det()) : 0.0;
    for (Eigen::Index i = 0; i < n; ++i) out[i] = c0 - elliptical::radial_term(fam, q[i], local.size());
    if (!pt.margin.empty()) {
        for (int a : local) {
            const auto& col = pt.margin[a];
            for (std::size_t i = 0; i < n_; ++i) out[i] += col[i];
        }
    }
    return out;
}

MetricValue McBank::evaluate(const Coalition& s) const {
    MetricValue v;
    v.method = MetricMethod::MonteCarlo;
    v.samples = n_;
    std::vector<int> local;
    for (SensorId id : s.members()) {
        require(id >= 0 && static_cast<std::size_t>(id) < local_of_.size() && local_of_[id] >= 0,
                ErrorKind::DimensionMismatch, "coalition member outside the sample bank");
        local.push_back(local_of_[id]);
        v.individual_sum += individual_metric(net_->sensor(id), task_);
    }
    if (s.size() == 1) {
        v.total = v.individual_sum;
        return v;
    }
    require(copula_.elliptical() || s.size() == 2, ErrorKind::DimensionMismatch,
            "Archimedean copulas are bivariate only");
    auto restrict = [&](const CopulaFamily& fam) { return fam.elliptical() && local.size() < ids_.size() ? fam.marginal(local) : fam; };

    std::vector<double> per_sample(n_, 0.0);
    if (std::holds_alternative<Estimation>(task_)) {
        const CopulaFamily fam = restrict(copula_);
        const double h2 = settings_.fd_step * settings_.fd_step;
        const std::size_t groups = points_.size() / 3;
        for (std::size_t g = 0; g < groups; ++g) {
            const auto lm = log_c(fam, points_[3 * g], local, false);
            const auto l0 = log_c(fam, points_[3 * g + 1], local, false);
            const auto lp = log_c(fam, points_[3 * g + 2], local, false);
            for (std::size_t i = 0; i < n_; ++i) per_sample[i] -= (lp[i] - 2.0 * l0[i] + lm[i]) / h2;
        }
        for (auto& x : per_sample) x /= static_cast<double>(groups);
    } else {
        const CopulaFamily f0 = restrict(copula_);
        const CopulaFamily f1 = h1_copula_ ? restrict(*h1_copula_) : f0;
        const bool norm = h1_copula_.has_value();
        const auto l0 = log_c(f0, points_[0], local, norm);
        const auto l1 = log_c(f1, points_[1], local, norm);
        for (std::size_t i = 0; i < n_; ++i) per_sample[i] = l0[i] - l1[i];
    }
    const MeanSe ms = mean_se(per_sample);
    v.copula_part = ms.mean;
    v.std_error = ms.se;
    v.total = v.individual_sum + v.copula_part;
    v.diversity_gain = std::max(v.copula_part, 0.0);
    v.redundancy_loss = std::max(-v.copula_part, 0.0);
    return v;
}

CopulaFamily coalition_copula(const CopulaFamily& copula, const Coalition& s, const NetworkModel& net) {
    if (copula.dimension() == s.size()) return copula;
    require(copula.dimension() == net.size() && copula.elliptical(), ErrorKind::DimensionMismatch,
            "copula must span the coalition or the whole network");
    std::vector<int> idx(s.members().begin(), s.members().end());
    return copula.marginal(idx);
}

MetricValue mc_coalition_kld(const Coalition& s, const NetworkModel& net, const Detection& task,
                             const CopulaFamily& copula, std::size_t n_samples, Rng& rng,
                             const std::optional<CopulaFamily>& h1_copula) {
    std::optional<CopulaFamily> h1;
    if (h1_copula) h1 = coalition_copula(*h1_copula, s, net);
    McBank bank(net, s.members(), coalition_copula(copula, s, net), task, McSettings{n_samples, 1e-3}, rng,
                std::move(h1));
    return bank.evaluate(s);
}

MetricValue mc_coalition_fi(const Coalition& s, const NetworkModel& net, const Estimation& task,
                            const CopulaFamily& copula, std::size_t n_samples, double fd_step, Rng& rng) {
    McBank bank(net, s.members(), coalition_copula(copula, s, net), task, McSettings{n_samples, fd_step}, rng);
    return bank.evaluate(s);
}

}  // namespace copcoal
