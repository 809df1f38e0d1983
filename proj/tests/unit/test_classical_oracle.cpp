#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "jpa/classical_oracle.hpp"
#include "jpa/errors.hpp"
#include "jpa/pump_steady_state.hpp"
#include "oracles.hpp"

using Catch::Approx;
using namespace jpa;

namespace {

const DerivedParams kDevice = derive(DeviceParams{7e9, 2e-6, 30});

// Single-harmonic balance of the pendulum solved from scratch: bisection on
// n for 16 n [(2 J1(x)/x - w^2)^2 + w^2/Q^2] = i_p^2, x = 4 sqrt(n); the
// lowest root.
double hb_oracle(double i_p, double w, double q) {
    auto f = [&](double n) {
        const double x = 4.0 * std::sqrt(n);
        const double R = n == 0.0 ? 0.5 : oracle::bessel_j(1, x) / x;
        const double s = 2.0 * R - w * w;
        return 16.0 * n * (s * s + w * w / (q * q)) - i_p * i_p;
    };
    double lo = 0.0, hi = 1e-6;
    while (f(hi) < 0.0) {
        lo = hi;
        hi *= 1.05;
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("pump current mapping", "[oracle]") {
    CHECK(pump_current_from_r(0.0, 30) == 0.0);
    CHECK(pump_current_from_r(1.0, 30) == Approx(0.02136).margin(5e-6));
    CHECK(pump_current_from_r(1.0, 120) == Approx(0.00267).margin(5e-6));
    CHECK(pump_current_from_r(1.0, 120) / pump_current_from_r(1.0, 30) == Approx(0.125).epsilon(1e-14));
    CHECK_THROWS_AS(pump_current_from_r(-1.0, 30), DomainError);
    CHECK_THROWS_AS(pump_current_from_r(1.0, 0.0), DomainError);
}

TEST_CASE("linear resonator limits of the pendulum", "[oracle]") {
    const double i_p = 1e-5;
    const PhaseResponse on = integrate_phase_eq(i_p, 1.0, 30);
    CHECK(on.phi_a == Approx(30 * i_p).epsilon(0.01));
    CHECK_FALSE(on.flagged());
    const PhaseResponse off = integrate_phase_eq(i_p, 2.0, 30);
    CHECK(off.phi_a == Approx(i_p / 3.0).epsilon(0.05));
    CHECK_FALSE(off.flagged());
}

TEST_CASE("free oscillation decays at 1/(2Q)", "[oracle]") {
    PhaseSimConfig sim;
    sim.window_periods = 2;
    sim.settle = 200;
    const PhaseResponse a = integrate_phase_eq(0.0, 1.0, 30, sim, PhaseState{1e-3, 0.0, 0.0});
    sim.settle = 500;
    const PhaseResponse b = integrate_phase_eq(0.0, 1.0, 30, sim, PhaseState{1e-3, 0.0, 0.0});
    const double rate = std::log(a.phi_a / b.phi_a) / (b.final_state.tau - a.final_state.tau);
    CHECK(rate == Approx(1.0 / 60.0).epsilon(0.02));
}

TEST_CASE("no drive, no motion", "[oracle]") {
    const PhaseResponse r = integrate_phase_eq(0.0, 0.97, 30);
    CHECK(r.phi_a == 0.0);
    CHECK_FALSE(r.flagged());
    const ResonanceComparison c = compare_resonance_curves(kDevice, 0.0, Eigen::VectorXd::LinSpaced(3, 0.95, 1.0));
    for (const auto& row : c.rows) {
        CHECK(row.n_cl == 0.0);
        CHECK(row.n_rwa == 0.0);
    }
}

TEST_CASE("harmonic balance roots", "[oracle]") {
    const double i_p = pump_current_from_r(0.5, 30);
    for (double w : {0.95, 0.99, 1.02}) {
        const auto roots = harmonic_balance_photon_number(i_p, w, 30);
        REQUIRE(roots.size() == 1);
        CHECK(roots[0] == Approx(hb_oracle(i_p, w, 30)).epsilon(1e-10));
    }
    CHECK(harmonic_balance_photon_number(0.0, 1.0, 30) == std::vector<double>{0.0});
    CHECK_THROWS_AS(harmonic_balance_photon_number(-1.0, 1.0, 30), ValidationError);
}

TEST_CASE("lab frame agrees with harmonic balance", "[oracle]") {
    const Eigen::VectorXd omegas = Eigen::VectorXd::LinSpaced(17, 0.95, 1.03);
    const ResonanceComparison c = compare_resonance_curves(kDevice, 0.5, omegas);
    CHECK_FALSE(c.any_flags);
    CHECK(c.max_hb_dev < 1e-3);
    CHECK(c.i_p == Approx(pump_current_from_r(0.5, 30)).epsilon(1e-15));
}

TEST_CASE("rotating-frame deviation is the model difference", "[oracle]") {
    // The deviation between lab frame and rotating frame equals the gap
    // between the two steady-state equations, computed independently.
    const Eigen::VectorXd omegas = Eigen::VectorXd::LinSpaced(9, 0.95, 1.03);
    const ResonanceComparison c = compare_resonance_curves(kDevice, 0.5, omegas);
    for (const auto& row : c.rows) {
        const double n_hb = hb_oracle(c.i_p, row.omega_rel, 30);
        const auto rwa = oracle::roots({30, row.omega_rel, 0.5, 0}, 8000);
        REQUIRE(rwa.size() == 1);
        const double model_gap = std::fabs(n_hb - rwa[0]) / rwa[0];
        INFO("omega " << row.omega_rel);
        CHECK(row.n_rwa == Approx(rwa[0]).epsilon(1e-9));
        CHECK(row.rel_dev == Approx(model_gap).margin(1e-3));
    }
}

TEST_CASE("deviation shrinks with the drive", "[oracle]") {
    const Eigen::VectorXd omegas = Eigen::VectorXd::LinSpaced(9, 0.95, 1.03);
    double previous = INFINITY;
    for (double r : {0.5, 0.2, 0.05}) {
        const ResonanceComparison c = compare_resonance_curves(kDevice, r, omegas);
        CHECK_FALSE(c.any_flags);
        CHECK(c.max_rel_dev < previous);
        previous = c.max_rel_dev;
    }
}

TEST_CASE("period-one response below the cusp", "[oracle]") {
    const Eigen::VectorXd omegas = Eigen::VectorXd::LinSpaced(9, 0.95, 1.03);
    const ResonanceComparison c = compare_resonance_curves(kDevice, 0.9, omegas);
    CHECK_FALSE(c.any_flags);
    for (const auto& row : c.rows) CHECK(row.n_cl > 0.0);
}

TEST_CASE("phase integration validation", "[oracle][errors]") {
    CHECK_THROWS_AS(integrate_phase_eq(-1e-3, 1.0, 30), ValidationError);
    CHECK_THROWS_AS(integrate_phase_eq(1e-3, 0.0, 30), ValidationError);
    CHECK_THROWS_AS(integrate_phase_eq(1e-3, 1.0, 0.0), ValidationError);
    PhaseSimConfig odd;
    odd.window_periods = 3;
    CHECK_THROWS_AS(integrate_phase_eq(1e-3, 1.0, 30, odd), ValidationError);
    CHECK_THROWS_AS(compare_resonance_curves(kDevice, 0.5, Eigen::VectorXd()), ValidationError);
}
