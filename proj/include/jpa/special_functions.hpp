#pragma once

#include <complex>
#include <type_traits>

namespace jpa {

// Orders of J_m used by the steady-state and gain formulas.
enum class BesselOrder : int { J0 = 0, J1 = 1, J2 = 2 };

// Bessel function of the first kind, |x| <= 40. Power series in long double
// for |x| <= 12, the standard library's cyl_bessel_j beyond.
double bessel_j(BesselOrder order, double x);
double bessel_j(int order, double x);

// J1(4 sqrt(n)) / (4 sqrt(n)), extended to 1/2 at n = 0.
double j1_ratio(double n);

namespace detail {

template <typename T>
struct real_of {
    using type = T;
};
template <typename T>
struct real_of<std::complex<T>> {
    using type = T;
};

}  // namespace detail

// Sum of c_k z^k for k in [first, last], with c_{k} = c_{k-1} * step(k).
// Terminates early once a term is negligible against the running sum.
// `last < 0` means sum to convergence.
template <typename Scalar, typename Step>
Scalar ratio_series(const Scalar& z, typename detail::real_of<Scalar>::type c_first, int first,
                    int last, Step step) {
    using Real = typename detail::real_of<Scalar>::type;
    constexpr int kMaxTerms = 400;
    Scalar power(1);
    for (int k = 0; k < first; ++k) power *= z;
    Real coeff = c_first;
    Scalar sum = coeff * power;
    const int stop = last < 0 ? first + kMaxTerms : last;
    for (int k = first + 1; k <= stop; ++k) {
        coeff *= step(k);
        power *= z;
        const Scalar term = coeff * power;
        sum += term;
        if (last < 0 && k > first + 2 && std::abs(term) <= Real(1e-18) * std::abs(sum)) break;
    }
    return sum;
}

// J1(4 sqrt(m)) / (4 sqrt(m)) as an entire function of m, for real or complex
// argument: sum_{k>=0} (-4m)^k / (2 k! (k+1)!).
template <typename Scalar>
Scalar j1_ratio_series(const Scalar& m) {
    using Real = typename detail::real_of<Scalar>::type;
    return ratio_series<Scalar>(-m, Real(0.5), 0, -1,
                                [](int k) { return Real(4) / (Real(k) * Real(k + 1)); });
}

}  // namespace jpa
