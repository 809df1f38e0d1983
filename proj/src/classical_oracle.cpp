#include "jpa/classical_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

#include "jpa/errors.hpp"
#include "jpa/parallel.hpp"
#include "jpa/pump_steady_state.hpp"
#include "jpa/rk4.hpp"
#include "jpa/special_functions.hpp"

namespace jpa {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double hb_residual(double n, double omega, double q, double i_p) {
    const double w2 = omega * omega;
    const double stiff = 0.5 * (2.0 * j1_ratio(n) - w2);
    return n * (stiff * stiff + w2 / (4.0 * q * q)) - i_p * i_p / 64.0;
}

double closest(const std::vector<double>& roots, double x) {
    double best = roots.front();
    for (double v : roots)
        if (std::fabs(v - x) < std::fabs(best - x)) best = v;
    return best;
}

}  // namespace

double pump_current_from_r(double r, double q) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("pump_current_from_r: r must be finite and >= 0");
    if (!(q > 0.0) || !std::isfinite(q)) throw DomainError("pump_current_from_r: Q must be finite and > 0");
    return 8.0 * r / (std::pow(3.0, 0.75) * std::pow(q, 1.5));
}

PhaseResponse integrate_phase_eq(double i_p, double omega_rel, double q, const PhaseSimConfig& sim,
                                 const PhaseState& start) {
    if (!(i_p >= 0.0) || !std::isfinite(i_p)) throw ValidationError("integrate_phase_eq: i_p must be >= 0");
    if (!(omega_rel > 0.0) || !std::isfinite(omega_rel))
        throw ValidationError("integrate_phase_eq: omega must be > 0");
    if (!(q > 0.0) || !std::isfinite(q)) throw ValidationError("integrate_phase_eq: Q must be > 0");
    if (sim.window_periods < 2 || sim.window_periods % 2 != 0)
        throw ValidationError("integrate_phase_eq: window_periods must be even and >= 2");

    const double period = kTwoPi / omega_rel;
    const double target = sim.dtau > 0.0 ? sim.dtau : kTwoPi / (200.0 * std::max(omega_rel, 1.0));
    const auto per_period = static_cast<long>(std::ceil(period / target * (1.0 - 1e-12)));
    const double h = period / static_cast<double>(per_period);
    const double settle = sim.settle > 0.0 ? sim.settle : 60.0 * q;
    const long settle_steps = static_cast<long>(std::ceil(settle / h));

    auto rhs = [&](double tau, const Eigen::Vector2d& y) {
        return Eigen::Vector2d(y[1], -y[1] / q - std::sin(y[0]) + i_p * std::cos(omega_rel * tau));
    };

    Eigen::Vector2d y(start.phi, start.dphi);
    double tau = start.tau;
    auto step = [&] {
        y = rk4_step(rhs, tau, y, h);
        tau += h;
        if (!y.allFinite()) {
            std::ostringstream msg;
            msg << "integrate_phase_eq: state diverged at tau=" << tau;
            throw DivergenceError(msg.str(), tau);
        }
    };
    for (long k = 0; k < settle_steps; ++k) step();

    // Trapezoid over each period; per-period fundamentals give the spread.
    using cd = std::complex<double>;
    cd fundamental{}, half{};
    std::vector<double> amplitudes;
    amplitudes.reserve(static_cast<std::size_t>(sim.window_periods));
    for (int p = 0; p < sim.window_periods; ++p) {
        cd one{};
        for (long k = 0; k <= per_period; ++k) {
            const double w = (k == 0 || k == per_period) ? 0.5 : 1.0;
            const cd e = std::exp(cd(0.0, omega_rel * tau));
            one += w * y[0] * e;
            half += w * y[0] * std::exp(cd(0.0, 0.5 * omega_rel * tau));
            if (k < per_period) step();
        }
        fundamental += one;
        amplitudes.push_back(2.0 * std::abs(one) / static_cast<double>(per_period));
    }
    const double samples = static_cast<double>(per_period) * sim.window_periods;

    PhaseResponse out;
    out.omega_rel = omega_rel;
    out.i_p = i_p;
    out.phi_a = 2.0 * std::abs(fundamental) / samples;
    out.phase = std::arg(fundamental);
    out.subharmonic = 2.0 * std::abs(half) / samples;
    for (std::size_t i = 1; i < amplitudes.size(); ++i) {
        const double scale = std::max(amplitudes[i], amplitudes[i - 1]);
        if (scale > 0.0)
            out.period_spread = std::max(out.period_spread, std::fabs(amplitudes[i] - amplitudes[i - 1]) / scale);
    }
    out.period_doubling = out.phi_a > 0.0 && out.subharmonic > 1e-3 * out.phi_a;
    out.non_periodic = out.period_spread > 1e-3;
    out.final_state = {y[0], y[1], tau};
    return out;
}

std::vector<double> harmonic_balance_photon_number(double i_p, double omega_rel, double q) {
    if (!(i_p >= 0.0) || !std::isfinite(i_p)) throw ValidationError("harmonic balance: i_p must be >= 0");
    if (!(omega_rel > 0.0) || !(q > 0.0)) throw ValidationError("harmonic balance: omega and Q must be > 0");
    if (i_p == 0.0) return {0.0};

    // Scan n in (0, kMaxPhotonNumber]; the residual is -i_p^2/64 at n = 0.
    constexpr int kCells = 20000;
    std::vector<double> roots;
    double a = 0.0;
    double fa = hb_residual(a, omega_rel, q, i_p);
    for (int i = 1; i <= kCells; ++i) {
        const double x = kMaxPhotonNumber * std::pow(double(i) / kCells, 2.0);
        const double fx = hb_residual(x, omega_rel, q, i_p);
        if ((fa < 0.0) != (fx < 0.0)) {
            double lo = a, hi = x, flo = fa;
            for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = hb_residual(mid, omega_rel, q, i_p);
                if ((fm < 0.0) == (flo < 0.0)) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push_back(0.5 * (lo + hi));
        }
        a = x;
        fa = fx;
    }
    if (roots.empty()) throw NumericalAnomaly("harmonic balance: no root below the photon-number ceiling");
    return roots;
}

ResonanceComparison compare_resonance_curves(const DerivedParams& params, double r, const Eigen::VectorXd& omega_grid,
                                             const PhaseSimConfig& sim, int threads) {
    if (omega_grid.size() == 0) throw ValidationError("compare_resonance_curves: empty omega grid");
    const double q = params.q;
    ResonanceComparison out;
    out.r = r;
    out.q = q;
    out.i_p = pump_current_from_r(r, q);
    out.rows.resize(static_cast<std::size_t>(omega_grid.size()));

    parallel_for(out.rows.size(), resolve_threads(threads), [&](std::size_t i) {
        const double omega = omega_grid[static_cast<Eigen::Index>(i)];
        ResonanceRow row;
        row.omega_rel = omega;
        const PhaseResponse resp = integrate_phase_eq(out.i_p, omega, q, sim);
        row.phi_a = resp.phi_a;
        row.n_cl = 0.0625 * resp.phi_a * resp.phi_a;
        row.period_doubling = resp.period_doubling;
        row.non_periodic = resp.non_periodic;

        std::vector<double> rwa;
        for (const SteadyState& s : solve_photon_number(params, PumpDrive{r, omega, 0.0, NonlinearityOrder::full()}))
            if (s.stable) rwa.push_back(s.n);
        row.n_rwa = closest(rwa, row.n_cl);
        row.n_hb = closest(harmonic_balance_photon_number(out.i_p, omega, q), row.n_cl);
        row.rel_dev = row.n_rwa > 0.0 ? std::fabs(row.n_cl - row.n_rwa) / row.n_rwa : std::fabs(row.n_cl);
        out.rows[i] = row;
    });

    for (const ResonanceRow& row : out.rows) {
        out.max_rel_dev = std::max(out.max_rel_dev, row.rel_dev);
        if (row.n_hb > 0.0) out.max_hb_dev = std::max(out.max_hb_dev, std::fabs(row.n_cl - row.n_hb) / row.n_hb);
        out.any_flags = out.any_flags || row.period_doubling || row.non_periodic;
    }
    return out;
}

}  // namespace jpa
