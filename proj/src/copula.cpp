#include "copcoal/copula.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "copcoal/error.hpp"

namespace copcoal {

const char* to_string(FamilyKind kind) {
    switch (kind) {
        case FamilyKind::Gaussian: return "gaussian";
        case FamilyKind::StudentT: return "student_t";
        case FamilyKind::Clayton: return "clayton";
        case FamilyKind::Gumbel: return "gumbel";
    }
    return "?";
}

FamilyKind family_from_string(const std::string& name) {
    if (name == "gaussian") return FamilyKind::Gaussian;
    if (name == "student_t") return FamilyKind::StudentT;
    if (name == "clayton") return FamilyKind::Clayton;
    if (name == "gumbel") return FamilyKind::Gumbel;
    throw Error(ErrorKind::OutOfRange, "unknown copula family '" + name + "'");
}

// --- construction ----------------------------------------------------------

void CopulaFamily::factorize() {
    const auto d = corr_.rows();
    require(d >= 1 && corr_.cols() == d, ErrorKind::DimensionMismatch, "correlation matrix must be square");
    for (Eigen::Index i = 0; i < d; ++i) {
        require(std::abs(corr_(i, i) - 1.0) <= 1e-12, ErrorKind::NonPositiveDefinite, "correlation diagonal must be 1");
        for (Eigen::Index j = 0; j < i; ++j) {
            require(std::abs(corr_(i, j) - corr_(j, i)) <= 1e-12, ErrorKind::NonPositiveDefinite,
                    "correlation matrix must be symmetric");
        }
    }
    Eigen::LLT<Matrix> llt(corr_);
    require(llt.info() == Eigen::Success, ErrorKind::NonPositiveDefinite, "Cholesky factorization failed");
    chol_ = llt.matrixL();
    precision_ = llt.solve(Matrix::Identity(d, d));
    precision_ = 0.5 * (precision_ + precision_.transpose());
    log_det_ = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
        require(chol_(i, i) > 1e-12, ErrorKind::NonPositiveDefinite, "correlation matrix numerically singular");
        log_det_ += 2.0 * std::log(chol_(i, i));
    }
    dim_ = static_cast<std::size_t>(d);
}

CopulaFamily CopulaFamily::gaussian(Matrix corr) {
    CopulaFamily c;
    c.kind_ = FamilyKind::Gaussian;
    c.corr_ = std::move(corr);
    c.factorize();
    return c;
}

CopulaFamily CopulaFamily::student_t(Matrix corr, double nu) {
    require(nu > 2.0 && std::isfinite(nu), ErrorKind::OutOfRange, "student-t copula needs nu > 2");
    CopulaFamily c;
    c.kind_ = FamilyKind::StudentT;
    c.nu_ = nu;
    c.corr_ = std::move(corr);
    c.factorize();
    return c;
}

CopulaFamily CopulaFamily::clayton(double theta) {
    require(theta > 0.0 && std::isfinite(theta), ErrorKind::OutOfRange, "clayton theta must be > 0");
    CopulaFamily c;
    c.kind_ = FamilyKind::Clayton;
    c.theta_ = theta;
    c.dim_ = 2;
    return c;
}

CopulaFamily CopulaFamily::gumbel(double theta) {
    require(theta >= 1.0 && std::isfinite(theta), ErrorKind::OutOfRange, "gumbel theta must be >= 1");
    CopulaFamily c;
    c.kind_ = FamilyKind::Gumbel;
    c.theta_ = theta;
    c.dim_ = 2;
    return c;
}

CopulaFamily CopulaFamily::bivariate_from_tau(FamilyKind kind, double tau, double nu) {
    const double p = tau_to_param(kind, tau);
    switch (kind) {
        case FamilyKind::Gaussian:
        case FamilyKind::StudentT: {
            Matrix r(2, 2);
            r << 1.0, p, p, 1.0;
            return kind == FamilyKind::Gaussian ? gaussian(r) : student_t(r, nu);
        }
        case FamilyKind::Clayton: return clayton(p);
        case FamilyKind::Gumbel: return gumbel(p);
    }
    throw Error(ErrorKind::OutOfRange, "unknown family");
}

CopulaFamily CopulaFamily::marginal(std::span<const int> idx) const {
    require(elliptical(), ErrorKind::DimensionMismatch, "marginals only available for elliptical copulas");
    const auto k = static_cast<Eigen::Index>(idx.size());
    Matrix sub(k, k);
    for (Eigen::Index a = 0; a < k; ++a) {
        for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = corr_(idx[a], idx[b]);
    }
    return kind_ == FamilyKind::Gaussian ? gaussian(std::move(sub)) : student_t(std::move(sub), nu_);
}

// --- elliptical pieces -----------------------------------------------------

namespace elliptical {

double score(const CopulaFamily& family, TailProb u) {
    return family.kind() == FamilyKind::Gaussian ? normal_quantile(u) : student_t_quantile(u, family.nu());
}

Matrix quadratic_matrix(const CopulaFamily& family, const Matrix& precision) {
    if (family.kind() == FamilyKind::Gaussian) return precision - Matrix::Identity(precision.rows(), precision.cols());
    return precision;
}

double margin_term(const CopulaFamily& family, double z) {
    if (family.kind() == FamilyKind::Gaussian) return 0.0;
    const double nu = family.nu();
    return 0.5 * (nu + 1.0) * std::log1p(z * z / nu);
}

double radial_term(const CopulaFamily& family, double q, std::size_t d) {
    if (family.kind() == FamilyKind::Gaussian) return 0.5 * q;
    const double nu = family.nu();
    return 0.5 * (nu + static_cast<double>(d)) * std::log1p(q / nu);
}

double normalizer(const CopulaFamily& family, std::size_t d, double log_det) {
    if (family.kind() == FamilyKind::Gaussian) return -0.5 * log_det;
    const double nu = family.nu();
    const double dd = static_cast<double>(d);
    return std::lgamma(0.5 * (nu + dd)) + (dd - 1.0) * std::lgamma(0.5 * nu) - dd * std::lgamma(0.5 * (nu + 1.0)) -
           0.5 * log_det;
}

}  // namespace elliptical

// --- densities -------------------------------------------------------------

namespace {

double clayton_log_density(double theta, TailProb u, TailProb v) {
    const double lu = std::log(u.lower);
    const double lv = std::log(v.lower);
    // u^-theta + v^-theta - 1 written to stay accurate as theta -> 0
    const double a = std::expm1(-theta * lu) + std::expm1(-theta * lv);
    return std::log1p(theta) - (1.0 + theta) * (lu + lv) - (2.0 + 1.0 / theta) * std::log1p(a);
}

double neg_log(TailProb p) { return p.lower < 0.5 ? -std::log(p.lower) : -std::log1p(-p.upper); }

double gumbel_log_density(double theta, TailProb u, TailProb v) {
    const double x = neg_log(u);
    const double y = neg_log(v);
    const double lx = std::log(x);
    const double ly = std::log(y);
    // A = x^theta + y^theta in log space
    const double la_x = theta * lx;
    const double la_y = theta * ly;
    const double lmax = std::max(la_x, la_y);
    const double log_a = lmax + std::log(std::exp(la_x - lmax) + std::exp(la_y - lmax));
    const double s = std::exp(log_a / theta);
    return -s + x + y + (theta - 1.0) * (lx + ly) + (2.0 / theta - 2.0) * log_a + std::log1p((theta - 1.0) / s);
}

}  // namespace

double log_density(const CopulaFamily& family, std::span<const TailProb> u) {
    require(u.size() == family.dimension(), ErrorKind::DimensionMismatch, "u has wrong dimension");
    switch (family.kind()) {
        case FamilyKind::Clayton: return clayton_log_density(family.theta(), u[0].clamped(), u[1].clamped());
        case FamilyKind::Gumbel:
            if (family.theta() == 1.0) return 0.0;
            return gumbel_log_density(family.theta(), u[0].clamped(), u[1].clamped());
        case FamilyKind::Gaussian:
        case FamilyKind::StudentT: break;
    }
    const std::size_t d = u.size();
    Vector z(static_cast<Eigen::Index>(d));
    double margins = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        z[static_cast<Eigen::Index>(i)] = elliptical::score(family, u[i]);
        margins += elliptical::margin_term(family, z[static_cast<Eigen::Index>(i)]);
    }
    const Matrix qm = elliptical::quadratic_matrix(family, family.precision());
    const double q = z.dot(qm * z);
    return elliptical::normalizer(family, d, family.log_det()) - elliptical::radial_term(family, q, d) + margins;
}

double log_density(const CopulaFamily& family, std::span<const double> u) {
    std::vector<TailProb> p;
    p.reserve(u.size());
    for (double x : u) {
        require(std::isfinite(x) && x >= 0.0 && x <= 1.0, ErrorKind::OutOfRange, "copula argument outside [0,1]");
        p.push_back(TailProb::from_lower(x));
    }
    return log_density(family, std::span<const TailProb>(p));
}

// --- sampling --------------------------------------------------------------

namespace {

// Positive stable variate with Laplace transform exp(-s^alpha), 0 < alpha < 1
// (Kanter's representation).
double positive_stable(double alpha, Rng& rng) {
    const double w = std::numbers::pi * rng.uniform();
    const double e = rng.exponential();
    return std::sin(alpha * w) / std::pow(std::sin(w), 1.0 / alpha) *
           std::pow(std::sin((1.0 - alpha) * w) / e, (1.0 - alpha) / alpha);
}

}  // namespace

Matrix sample(const CopulaFamily& family, std::size_t n, Rng& rng) {
    require(n >= 1, ErrorKind::InvalidCount, "sample count must be >= 1");
    const auto d = static_cast<Eigen::Index>(family.dimension());
    const auto rows = static_cast<Eigen::Index>(n);
    Matrix out(rows, d);
    switch (family.kind()) {
        case FamilyKind::Gaussian:
        case FamilyKind::StudentT: {
            const Matrix& L = family.cholesky_lower();
            const bool t = family.kind() == FamilyKind::StudentT;
            Vector g(d);
            for (Eigen::Index r = 0; r < rows; ++r) {
                for (Eigen::Index i = 0; i < d; ++i) g[i] = rng.normal();
                Vector z = L * g;
                if (t) z /= std::sqrt(rng.chi_squared(family.nu()) / family.nu());
                for (Eigen::Index i = 0; i < d; ++i) {
                    out(r, i) = t ? student_t_cdf(z[i], family.nu()).lower : normal_cdf(z[i]).lower;
                }
            }
            break;
        }
        case FamilyKind::Clayton: {
            const double theta = family.theta();
            for (Eigen::Index r = 0; r < rows; ++r) {
                const double v = rng.gamma(1.0 / theta);
                for (Eigen::Index i = 0; i < d; ++i) out(r, i) = std::pow(1.0 + rng.exponential() / v, -1.0 / theta);
            }
            break;
        }
        case FamilyKind::Gumbel: {
            const double alpha = 1.0 / family.theta();
            for (Eigen::Index r = 0; r < rows; ++r) {
                if (alpha == 1.0) {
                    for (Eigen::Index i = 0; i < d; ++i) out(r, i) = rng.uniform();
                    continue;
                }
                const double s = positive_stable(alpha, rng);
                for (Eigen::Index i = 0; i < d; ++i) out(r, i) = std::exp(-std::pow(rng.exponential() / s, alpha));
            }
            break;
        }
    }
    return out;
}

// --- tau <-> parameter -----------------------------------------------------

double tau_to_param(FamilyKind kind, double tau) {
    switch (kind) {
        case FamilyKind::Gaussian:
        case FamilyKind::StudentT:
            require(tau >= -1.0 && tau <= 1.0, ErrorKind::OutOfRange, "tau must lie in [-1, 1]");
            return std::sin(std::numbers::pi * tau / 2.0);
        case FamilyKind::Clayton:
            require(tau > 0.0 && tau < 1.0, ErrorKind::OutOfRange, "clayton tau must lie in (0, 1)");
            return 2.0 * tau / (1.0 - tau);
        case FamilyKind::Gumbel:
            require(tau >= 0.0 && tau < 1.0, ErrorKind::OutOfRange, "gumbel tau must lie in [0, 1)");
            return 1.0 / (1.0 - tau);
    }
    throw Error(ErrorKind::OutOfRange, "unknown family");
}

double param_to_tau(FamilyKind kind, double param) {
    switch (kind) {
        case FamilyKind::Gaussian:
        case FamilyKind::StudentT:
            require(param >= -1.0 && param <= 1.0, ErrorKind::OutOfRange, "correlation must lie in [-1, 1]");
            return 2.0 / std::numbers::pi * std::asin(param);
        case FamilyKind::Clayton:
            require(param > 0.0 && std::isfinite(param), ErrorKind::OutOfRange, "clayton theta must be > 0");
            return param / (param + 2.0);
        case FamilyKind::Gumbel:
            require(param >= 1.0 && std::isfinite(param), ErrorKind::OutOfRange, "gumbel theta must be >= 1");
            return 1.0 - 1.0 / param;
    }
    throw Error(ErrorKind::OutOfRange, "unknown family");
}

// --- correlation-matrix utilities ------------------------------------------

double partial_correlation(const Matrix& corr, int i, int j, std::span<const int> cond) {
    const auto n = static_cast<int>(corr.rows());
    require(i != j && i >= 0 && j >= 0 && i < n && j < n, ErrorKind::OutOfRange, "bad variable indices");
    for (int k : cond) {
        require(k != i && k != j && k >= 0 && k < n, ErrorKind::OutOfRange, "conditioning index overlaps pair");
    }
    if (cond.empty()) return corr(i, j);

    const auto m = static_cast<Eigen::Index>(cond.size());
    Matrix cc(m, m);
    Matrix cp(m, 2);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) cc(a, b) = corr(cond[a], cond[b]);
        cp(a, 0) = corr(cond[a], i);
        cp(a, 1) = corr(cond[a], j);
    }
    Eigen::LLT<Matrix> llt(cc);
    require(llt.info() == Eigen::Success, ErrorKind::SingularConditioningSet, "conditioning block not positive definite");
    const Matrix lm = llt.matrixL();
    for (Eigen::Index a = 0; a < m; ++a) {
        require(lm(a, a) > 1e-10, ErrorKind::SingularConditioningSet, "conditioning block numerically singular");
    }
    // Schur complement of the conditioning block
    const Matrix w = llt.matrixL().solve(cp);
    const double sii = 1.0 - w.col(0).squaredNorm();
    const double sjj = 1.0 - w.col(1).squaredNorm();
    const double sij = corr(i, j) - w.col(0).dot(w.col(1));
    require(sii > 1e-14 && sjj > 1e-14, ErrorKind::SingularConditioningSet, "pair is determined by the conditioning set");
    return std::clamp(sij / std::sqrt(sii * sjj), -1.0, 1.0);
}

double min_eigenvalue(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

Matrix nearest_psd(const Matrix& m, double tol, double min_eig) {
    require(m.rows() == m.cols(), ErrorKind::DimensionMismatch, "matrix must be square");
    Matrix a = 0.5 * (m + m.transpose());
    if (min_eigenvalue(a) >= min_eig - tol) return m;
    for (int iter = 0; iter < 200; ++iter) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(a);
        Vector lam = es.eigenvalues().cwiseMax(min_eig);
        a = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
        const Vector s = a.diagonal().cwiseSqrt().cwiseInverse();
        a = s.asDiagonal() * a * s.asDiagonal();
        a = 0.5 * (a + a.transpose());
        a.diagonal().setOnes();
        if (min_eigenvalue(a) >= min_eig - tol) break;
    }
    return a;
}

double empirical_kendall_tau(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size() && x.size() >= 2, ErrorKind::InvalidCount, "need two equal-length samples");
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = y[order[i]];
    // count inversions of v by bottom-up merge sort
    std::vector<double> buf(n);
    std::uint64_t inversions = 0;
    for (std::size_t width = 1; width < n; width *= 2) {
        for (std::size_t lo = 0; lo < n; lo += 2 * width) {
            const std::size_t mid = std::min(lo + width, n);
            const std::size_t hi = std::min(lo + 2 * width, n);
            std::size_t a = lo, b = mid, k = lo;
            while (a < mid && b < hi) {
                if (v[b] < v[a]) {
                    inversions += mid - a;
                    buf[k++] = v[b++];
                } else {
                    buf[k++] = v[a++];
                }
            }
            while (a < mid) buf[k++] = v[a++];
            while (b < hi) buf[k++] = v[b++];
        }
        std::swap(v, buf);
    }
    const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    return 1.0 - 2.0 * static_cast<double>(inversions) / pairs;
}

}  // namespace copcoal
