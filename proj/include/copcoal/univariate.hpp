#pragma once

// Univariate CDF/quantile helpers shared by the copula and metric code.
// Probabilities travel as a (lower, upper) pair so both tails keep full
// relative precision through quantile transforms.

namespace copcoal {

inline constexpr double kUnitClamp = 1e-12;

struct TailProb {
    double lower;  // P(X <= x)
    double upper;  // P(X > x) = 1 - lower, computed without cancellation

    static TailProb from_lower(double p) { return {p, 1.0 - p}; }
    /// Clamps both components into [kUnitClamp, 1 - kUnitClamp].
    TailProb clamped() const;
};

TailProb normal_cdf(double z);
double normal_quantile(TailProb p);
double normal_quantile(double p);

/// Student-t with `nu` degrees of freedom. nu == 4 uses exact closed forms;
/// other values go through Boost.Math.
TailProb student_t_cdf(double t, double nu);
double student_t_quantile(TailProb p, double nu);
double student_t_quantile(double p, double nu);

}  // namespace copcoal
