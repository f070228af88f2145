#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "copcoal/rng.hpp"
#include "copcoal/univariate.hpp"

namespace copcoal {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class FamilyKind { Gaussian, StudentT, Clayton, Gumbel };

const char* to_string(FamilyKind kind);
FamilyKind family_from_string(const std::string& name);

/// A copula with its parameters validated and, for the elliptical families,
/// the correlation matrix factorized once at construction.
///
/// Gaussian and Student-t are d-dimensional; Clayton and Gumbel are bivariate.
class CopulaFamily {
public:
    static CopulaFamily gaussian(Matrix corr);
    static CopulaFamily student_t(Matrix corr, double nu);
    static CopulaFamily clayton(double theta);
    static CopulaFamily gumbel(double theta);
    /// Bivariate member of `kind` with Kendall's tau `tau` (nu used for Student-t).
    static CopulaFamily bivariate_from_tau(FamilyKind kind, double tau, double nu = 4.0);

    FamilyKind kind() const noexcept { return kind_; }
    std::size_t dimension() const noexcept { return dim_; }
    bool elliptical() const noexcept { return kind_ == FamilyKind::Gaussian || kind_ == FamilyKind::StudentT; }

    const Matrix& correlation() const { return corr_; }
    /// Lower Cholesky factor of the correlation matrix (elliptical only).
    const Matrix& cholesky_lower() const { return chol_; }
    /// Inverse of the correlation matrix (elliptical only).
    const Matrix& precision() const { return precision_; }
    double log_det() const noexcept { return log_det_; }
    double nu() const noexcept { return nu_; }
    /// Clayton theta_C or Gumbel theta_G.
    double theta() const noexcept { return theta_; }

    /// Restriction to the given variable indices (elliptical only).
    CopulaFamily marginal(std::span<const int> idx) const;

private:
    CopulaFamily() = default;
    void factorize();

    FamilyKind kind_ = FamilyKind::Gaussian;
    std::size_t dim_ = 0;
    Matrix corr_;
    Matrix chol_;
    Matrix precision_;
    double log_det_ = 0.0;
    double nu_ = 0.0;
    double theta_ = 0.0;
};

/// log c(u). Components are clamped into [1e-12, 1 - 1e-12].
double log_density(const CopulaFamily& family, std::span<const double> u);
/// Same, with tail-accurate probabilities.
double log_density(const CopulaFamily& family, std::span<const TailProb> u);

/// n i.i.d. draws, one row per draw.
Matrix sample(const CopulaFamily& family, std::size_t n, Rng& rng);

double tau_to_param(FamilyKind kind, double tau);
double param_to_tau(FamilyKind kind, double param);

/// Partial correlation of variables i and j given `cond`.
double partial_correlation(const Matrix& corr, int i, int j, std::span<const int> cond);

/// Eigenvalue clipping at `min_eigenvalue` followed by unit-diagonal rescaling,
/// repeated until the smallest eigenvalue is within `tol` of the floor.
/// Matrices already satisfying the floor are returned unchanged.
Matrix nearest_psd(const Matrix& m, double tol = 1e-10, double min_eigenvalue = 0.0);

double min_eigenvalue(const Matrix& m);

/// Sample Kendall tau-a in O(n log n).
double empirical_kendall_tau(std::span<const double> x, std::span<const double> y);

// Score-space pieces of the elliptical log density:
//   log c(u) = normalizer(d) - radial(z' Q z, d) + sum_i margin(z_i),
// with z_i = score(u_i) and Q = quadratic_matrix(R^{-1}): R^{-1} - I for the
// Gaussian family (whose margin term is zero), R^{-1} for Student-t.
namespace elliptical {
double score(const CopulaFamily& family, TailProb u);
Matrix quadratic_matrix(const CopulaFamily& family, const Matrix& precision);
double margin_term(const CopulaFamily& family, double z);
double radial_term(const CopulaFamily& family, double q, std::size_t d);
double normalizer(const CopulaFamily& family, std::size_t d, double log_det);
}  // namespace elliptical

}  // namespace copcoal
