#include "jpa/linear_response.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "jpa/errors.hpp"
#include "jpa/parallel.hpp"

namespace jpa {

namespace {

using cd = std::complex<double>;
constexpr cd I{0.0, 1.0};

double to_db(double G) { return 10.0 * std::log10(G); }

GainPoint evaluate_point(const DerivedParams& params, PumpDrive drive, double omega, double delta) {
    drive.omega_rel = omega;
    GainPoint p;
    p.omega_rel = omega;
    try {
        const LinearGain lg = gain_at(params, drive, delta, &p.n);
        p.g = lg.g;
        p.m = lg.m;
        p.G_db = lg.G_db();
    } catch (const PoleError&) {
        p.pole = true;
        p.G_db = std::numeric_limits<double>::infinity();
    }
    return p;
}

}  // namespace

double LinearGain::G_db() const { return to_db(G); }

LinearCoefficients linear_coefficients(const DerivedParams& params, const PumpDrive& drive,
                                       const SteadyState& ss) {
    validate(drive);
    if (!(ss.n >= 0.0)) throw DomainError("linear_coefficients: n must be >= 0");
    const double q = params.q;
    LinearCoefficients co;
    co.l1 = I * (drive.omega_rel - 1.0 - self_phase_kernel(ss.n, drive.order)) - 0.5 / q;
    co.l2 = -I * params.kerr_ratio * ss.alpha * ss.alpha * conjugate_kernel(ss.n, drive.order);
    return co;
}

LinearGain gain(const LinearCoefficients& co, double q, double delta) {
    const cd a = co.l1 + I * delta;
    const cd b = std::conj(co.l1) + I * delta;
    const cd den = a * b - std::norm(co.l2);
    if (std::abs(den) < 1e-15) {
        std::ostringstream msg;
        msg << "gain: denominator " << std::abs(den) << " at delta=" << delta
            << " (parametric oscillation threshold)";
        throw PoleError(msg.str());
    }
    LinearGain out;
    out.delta = delta;
    out.g = -(1.0 / q) * b / den - 1.0;
    out.m = (1.0 / q) * co.l2 / den;
    out.G = std::norm(out.g);
    return out;
}

LinearGain gain_at(const DerivedParams& params, const PumpDrive& drive, double delta, double* n_out) {
    const SteadyState ss = solve_operating_point(params, drive);
    if (n_out) *n_out = ss.n;
    return gain(linear_coefficients(params, drive, ss), params.q, delta);
}

GainCurve gain_sweep(const DerivedParams& params, const PumpDrive& drive_template,
                     const Eigen::VectorXd& omega_grid, double delta, int threads) {
    for (Eigen::Index i = 0; i < omega_grid.size(); ++i) {
        if (!(omega_grid[i] > 0.0 && omega_grid[i] < 2.0))
            throw ValidationError("gain_sweep: omega grid must lie in (0, 2)");
        if (i > 0 && omega_grid[i] <= omega_grid[i - 1])
            throw ValidationError("gain_sweep: omega grid must be increasing");
    }
    GainCurve curve{params, drive_template, delta, {}};
    curve.points.resize(static_cast<std::size_t>(omega_grid.size()));
    parallel_for(curve.points.size(), resolve_threads(threads), [&](std::size_t i) {
        curve.points[i] = evaluate_point(params, drive_template, omega_grid[static_cast<Eigen::Index>(i)], delta);
    });
    return curve;
}

GainMaximum max_gain(const GainCurve& curve) {
    std::vector<double> omega, value;
    for (const auto& p : curve.points) {
        omega.push_back(p.omega_rel);
        value.push_back(p.pole ? -std::numeric_limits<double>::infinity() : p.G_db);
    }
    if (omega.empty()) throw ValidationError("max_gain: empty curve");
    auto eval = [&](double w) {
        const GainPoint p = evaluate_point(curve.params, curve.drive, w, curve.delta);
        return p.pole ? -std::numeric_limits<double>::infinity() : p.G_db;
    };

    // Zoom: keep the best sample's neighbours as the bracket, resample inside.
    constexpr int kSub = 8;
    constexpr double kResolution = 1e-7;
    for (int pass = 0; pass < 60; ++pass) {
        const auto best = static_cast<std::size_t>(std::max_element(value.begin(), value.end()) - value.begin());
        const std::size_t lo = best == 0 ? 0 : best - 1;
        const std::size_t hi = std::min(best + 1, omega.size() - 1);
        if (omega[hi] - omega[lo] <= kResolution || omega.size() < 2) break;
        std::vector<double> w{omega[lo]}, v{value[lo]};
        for (int k = 1; k < kSub; ++k) {
            const double x = omega[lo] + (omega[hi] - omega[lo]) * k / kSub;
            w.push_back(x);
            v.push_back(x == omega[best] ? value[best] : eval(x));
        }
        w.push_back(omega[hi]);
        v.push_back(value[hi]);
        omega = std::move(w);
        value = std::move(v);
    }

    const auto best = static_cast<std::size_t>(std::max_element(value.begin(), value.end()) - value.begin());
    GainMaximum out{omega[best], value[best]};
    if (best > 0 && best + 1 < omega.size() && std::isfinite(value[best - 1]) && std::isfinite(value[best + 1])) {
        const double x0 = omega[best - 1], x1 = omega[best], x2 = omega[best + 1];
        const double y0 = value[best - 1], y1 = value[best], y2 = value[best + 1];
        const double num = (x1 - x0) * (x1 - x0) * (y1 - y2) - (x1 - x2) * (x1 - x2) * (y1 - y0);
        const double den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
        if (den != 0.0) {
            const double vertex = x1 - 0.5 * num / den;
            if (vertex > x0 && vertex < x2) {
                const double at_vertex = eval(vertex);
                if (at_vertex > out.G_db) out = {vertex, at_vertex};
            }
        }
    }
    if (!std::isfinite(out.G_db)) throw PoleError("max_gain: every point of the curve is a pole");
    return out;
}

double half_max_width(const GainCurve& curve) {
    const auto& pts = curve.points;
    std::size_t best = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (!pts[i].pole && (pts[best].pole || pts[i].G_db > pts[best].G_db)) best = i;
    const double half = pts[best].G_db - to_db(2.0);
    auto crossing = [&](std::size_t inside, std::size_t outside) {
        const double t = (pts[inside].G_db - half) / (pts[inside].G_db - pts[outside].G_db);
        return pts[inside].omega_rel + t * (pts[outside].omega_rel - pts[inside].omega_rel);
    };
    std::size_t lo = best, hi = best;
    while (lo > 0 && pts[lo - 1].G_db >= half) --lo;
    while (hi + 1 < pts.size() && pts[hi + 1].G_db >= half) ++hi;
    if (lo == 0 || hi + 1 == pts.size())
        throw ValidationError("half_max_width: half-maximum not bracketed by the sweep");
    return crossing(hi, hi + 1) - crossing(lo, lo - 1);
}

std::pair<double, double> default_omega_window(double q) { return {1.0 - 2.0 / q, 1.0 + 0.5 / q}; }

GainMaximum max_gain(const DerivedParams& params, const PumpDrive& drive, double delta,
                     std::pair<double, double> omega_range, int grid_points, int threads) {
    if (omega_range.first == 0.0 && omega_range.second == 0.0) omega_range = default_omega_window(params.q);
    if (!(omega_range.first < omega_range.second) || grid_points < 3)
        throw ValidationError("max_gain: invalid omega range");
    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(grid_points, omega_range.first, omega_range.second);
    return max_gain(gain_sweep(params, drive, grid, delta, threads));
}

double match_pump_power(const DerivedParams& params, NonlinearityOrder order, double target_G_db,
                        std::pair<double, double> omega_range, double delta, int grid_points) {
    if (!std::isfinite(target_G_db)) throw ValidationError("match_pump_power: target must be finite");
    if (!(omega_range.first < omega_range.second) || grid_points < 3)
        throw ValidationError("match_pump_power: invalid omega range");
    if (target_G_db <= 0.0) return 0.0;

    const Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(grid_points, omega_range.first, omega_range.second);
    auto g_max = [&](double r) {
        const PumpDrive drive{r, 1.0, 0.0, order};
        return max_gain(gain_sweep(params, drive, grid, delta, 1)).G_db;
    };

    // Below the cusp the operating point is unique and G_max grows with r.
    const CuspPoint cusp = find_cusp(params, order);
    double lo = 0.0;
    double hi = cusp.r * (1.0 - 1e-9);
    if (g_max(hi) < target_G_db) {
        std::ostringstream msg;
        msg << "match_pump_power: target " << target_G_db << " dB exceeds the gain reachable below the "
            << "bifurcation (r < " << cusp.r << ") for order " << order.to_string();
        throw UnattainableError(msg.str());
    }
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double g = g_max(mid);
        if (std::fabs(g - target_G_db) < 1e-5) return mid;
        (g < target_G_db ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace jpa
