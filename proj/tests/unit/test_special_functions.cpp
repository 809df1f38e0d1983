#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <limits>

#include "frozen.hpp"
#include "jpa/errors.hpp"
#include "jpa/special_functions.hpp"
#include "oracles.hpp"

using Catch::Approx;
using namespace jpa;

TEST_CASE("bessel_j matches the quad-precision series", "[special]") {
    for (int order = 0; order <= 2; ++order) {
        for (int i = -400; i <= 400; ++i) {
            const double x = 0.1 * i;
            const double ref = oracle::bessel_j(order, x);
            INFO("order " << order << " x " << x);
            // cyl_bessel_j carries ~2e-15 absolute error beyond |x| = 12.
            const double margin = std::fabs(x) > 12.0 ? 1e-14 : 2e-15;
            REQUIRE(bessel_j(order, x) == Approx(ref).margin(margin).epsilon(1e-13));
        }
    }
}

TEST_CASE("bessel_j frozen values", "[special]") {
    CHECK(bessel_j(BesselOrder::J2, 1.0) == Approx(frozen::kJ2At1).epsilon(1e-15));
    CHECK(bessel_j(BesselOrder::J1, 4.0) / 4.0 == Approx(frozen::kJ1At4Over4).epsilon(1e-14));
    CHECK(bessel_j(BesselOrder::J0, 0.0) == 1.0);
    CHECK(bessel_j(BesselOrder::J1, 0.0) == 0.0);
    CHECK(bessel_j(1, -2.5) == Approx(-bessel_j(1, 2.5)).epsilon(1e-15));
}

TEST_CASE("bessel_j rejects bad input", "[special][errors]") {
    CHECK_THROWS_AS(bessel_j(0, std::numeric_limits<double>::quiet_NaN()), DomainError);
    CHECK_THROWS_AS(bessel_j(0, std::numeric_limits<double>::infinity()), DomainError);
    CHECK_THROWS_AS(bessel_j(0, 40.5), DomainError);
    CHECK_THROWS_AS(bessel_j(3, 1.0), DomainError);
    CHECK_THROWS_AS(bessel_j(-1, 1.0), DomainError);
    CHECK_NOTHROW(bessel_j(2, -40.0));
}

TEST_CASE("j1_ratio", "[special]") {
    CHECK(j1_ratio(0.0) == 0.5);
    CHECK(j1_ratio(0.019245) == Approx(frozen::kJ1RatioAt0019245).epsilon(1e-15));
    CHECK_THROWS_AS(j1_ratio(-1e-3), DomainError);
    CHECK_THROWS_AS(j1_ratio(std::numeric_limits<double>::quiet_NaN()), DomainError);

    // Continuous through the small-n branch switch.
    for (double n : {1e-12, 5e-9, 9.99e-9, 1.001e-8, 1e-6, 0.3, 1.0, 4.0}) {
        const double ref = oracle::bessel_j(1, 4.0 * std::sqrt(n)) / (4.0 * std::sqrt(n));
        INFO("n " << n);
        CHECK(j1_ratio(n) == Approx(ref).epsilon(1e-13));
    }
}

TEST_CASE("j1_ratio_series agrees with the closed form and is conjugate symmetric", "[special]") {
    for (double n : {0.0, 1e-4, 0.02, 0.5, 2.0}) {
        CHECK(j1_ratio_series(n) == Approx(j1_ratio(n)).epsilon(1e-13));
        const std::complex<double> z(n, 0.0);
        CHECK(j1_ratio_series(z).real() == Approx(j1_ratio(n)).epsilon(1e-13));
        CHECK(j1_ratio_series(z).imag() == 0.0);
    }
    const std::complex<double> m(0.02, 0.003);
    const auto a = j1_ratio_series(m);
    const auto b = j1_ratio_series(std::conj(m));
    CHECK(a.real() == Approx(b.real()).epsilon(1e-15));
    CHECK(a.imag() == Approx(-b.imag()).epsilon(1e-15));
    // First-order Taylor check: d/dm [J1(4 sqrt m)/(4 sqrt m)] = -1 at m = 0.
    const std::complex<double> h(1e-7, 1e-7);
    const auto slope = (j1_ratio_series(h) - 0.5) / h;
    CHECK(slope.real() == Approx(-1.0).epsilon(1e-6));
    CHECK(std::abs(slope.imag()) < 1e-6);
}

TEST_CASE("ratio_series honours an explicit cut-off", "[special]") {
    // sum_{k=0..3} x^k
    const double s = ratio_series<double>(0.5, 1.0, 0, 3, [](int) { return 1.0; });
    CHECK(s == Approx(1.875).epsilon(1e-15));
    const double g = ratio_series<double>(0.5, 1.0, 0, -1, [](int) { return 1.0; });
    CHECK(g == Approx(2.0).epsilon(1e-15));
}
