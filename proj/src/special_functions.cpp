#include "jpa/special_functions.hpp"

#include <cmath>
#include <string>

#include "jpa/errors.hpp"

namespace jpa {

namespace {

constexpr double kSeriesLimit = 12.0;
constexpr double kArgumentLimit = 40.0;

long double series_j(int order, long double x) {
    const long double half = x / 2;
    const long double q = -half * half;
    long double term = 1;
    for (int i = 1; i <= order; ++i) term *= half / i;
    long double sum = term;
    for (int m = 1; m < 200; ++m) {
        term *= q / (static_cast<long double>(m) * (m + order));
        sum += term;
        if (std::fabs(term) < 1e-22L * std::fabs(sum) && m > 2) break;
    }
    return sum;
}

}  // namespace

double bessel_j(int order, double x) {
    if (order < 0 || order > 2)
        throw DomainError("bessel_j: unsupported order " + std::to_string(order));
    if (!std::isfinite(x)) throw DomainError("bessel_j: non-finite argument");
    if (std::fabs(x) > kArgumentLimit)
        throw DomainError("bessel_j: |x| exceeds " + std::to_string(kArgumentLimit));
    if (std::fabs(x) <= kSeriesLimit) return static_cast<double>(series_j(order, x));
    const double sign = (order % 2 == 1 && x < 0) ? -1.0 : 1.0;
    return sign * std::cyl_bessel_j(static_cast<double>(order), std::fabs(x));
}

double bessel_j(BesselOrder order, double x) { return bessel_j(static_cast<int>(order), x); }

double j1_ratio(double n) {
    if (!std::isfinite(n) || n < 0) throw DomainError("j1_ratio: n must be finite and >= 0");
    if (n < 1e-8) return 0.5 - n + (2.0 / 3.0) * n * n;
    const double x = 4.0 * std::sqrt(n);
    return bessel_j(1, x) / x;
}

}  // namespace jpa
