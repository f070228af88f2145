#include "copcoal/univariate.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/erf.hpp>

namespace copcoal {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

// Upper tail of t_4 at |t|; exact and cancellation-free.
double t4_upper_abs(double t) {
    const double a = std::abs(t);
    const double s = std::sqrt(4.0 + a * a);
    const double y = a / s;
    const double one_minus_y = (4.0 / (s * s)) / (1.0 + y);
    return 0.25 * one_minus_y * one_minus_y * (2.0 + y);
}

double t4_pdf(double t) { return 0.375 * std::pow(1.0 + 0.25 * t * t, -2.5); }

// Returns t <= 0 with P(T <= t) = q, q in (0, 0.5].
double t4_lower_quantile(double q) {
    const double a = 4.0 * q * (1.0 - q);
    const double ra = std::sqrt(a);
    const double inner = std::cos(std::acos(ra) / 3.0) / ra - 1.0;
    double t = -2.0 * std::sqrt(std::max(inner, 0.0));
    for (int it = 0; it < 3; ++it) {
        const double f = t4_upper_abs(t) - q;
        const double step = f / t4_pdf(t);
        t -= step;
        if (t > 0.0) t = 0.0;
        if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(t))) break;
    }
    return t;
}

}  // namespace

TailProb TailProb::clamped() const {
    if (lower < kUnitClamp) return {kUnitClamp, 1.0 - kUnitClamp};
    if (upper < kUnitClamp) return {1.0 - kUnitClamp, kUnitClamp};
    return *this;
}

TailProb normal_cdf(double z) {
    return {0.5 * std::erfc(-z / kSqrt2), 0.5 * std::erfc(z / kSqrt2)};
}

double normal_quantile(TailProb p) {
    p = p.clamped();
    if (p.lower <= p.upper) return -kSqrt2 * boost::math::erfc_inv(2.0 * p.lower);
    return kSqrt2 * boost::math::erfc_inv(2.0 * p.upper);
}

double normal_quantile(double p) { return normal_quantile(TailProb::from_lower(p)); }

TailProb student_t_cdf(double t, double nu) {
    if (nu == 4.0) {
        const double tail = t4_upper_abs(t);
        return t >= 0.0 ? TailProb{1.0 - tail, tail} : TailProb{tail, 1.0 - tail};
    }
    const boost::math::students_t dist(nu);
    if (t >= 0.0) {
        const double up = boost::math::cdf(boost::math::complement(dist, t));
        return {1.0 - up, up};
    }
    const double lo = boost::math::cdf(dist, t);
    return {lo, 1.0 - lo};
}

double student_t_quantile(TailProb p, double nu) {
    p = p.clamped();
    const bool use_lower = p.lower <= p.upper;
    const double q = use_lower ? p.lower : p.upper;
    double t;
    if (nu == 4.0) {
        t = t4_lower_quantile(q);
    } else {
        t = boost::math::quantile(boost::math::students_t(nu), q);
    }
    return use_lower ? t : -t;
}

double student_t_quantile(double p, double nu) { return student_t_quantile(TailProb::from_lower(p), nu); }

}  // namespace copcoal
