#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "jpa/classical_oracle.hpp"
#include "jpa/device_params.hpp"
#include "jpa/errors.hpp"
#include "jpa/linear_response.hpp"
#include "jpa/pump_steady_state.hpp"
#include "jpa/saturation_dynamics.hpp"

using namespace jpa;

namespace {

// Pinned tolerances.
constexpr double kCuspTol = 1e-3;
constexpr double kCubicCuspTol = 1e-6;
constexpr double kSeriesTol = 1e-10;
constexpr double kGainRelationTol = 1e-9;
constexpr double kS11Tol = 1e-12;
constexpr double kMatchedR = 1.00297;
constexpr double kMatchTol = 2e-3;
constexpr double kOrderingQ150Tol = 0.5;  // dB
constexpr double kOdeLinearTol = 0.05;    // dB
constexpr double kMonotoneSlack = 0.02;   // dB rise allowed between neighbours past the -0.1 dB point
constexpr double kC3TrackTol = 1.0;       // dB
constexpr double kOracleTol = 0.02;
constexpr double kClosureTol = 1e-9;

constexpr double kQ = 30.0;
constexpr double kR = 0.99;
constexpr int kSaturationPoints = 31;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double x, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

DerivedParams device(double q = kQ, double ic_a = 2e-6) { return derive({7e9, ic_a, q}); }

double omega_at_max(const DerivedParams& p, PumpDrive drive) { return max_gain(p, drive).omega_rel; }

PumpDrive cubic_drive(const DerivedParams& p) {
    PumpDrive d{kR, 1.0, 0.0, NonlinearityOrder::cubic()};
    d.omega_rel = omega_at_max(p, d);
    return d;
}

PumpDrive full_drive(const DerivedParams& p) {
    PumpDrive d{kMatchedR, 1.0, 0.0, NonlinearityOrder::full()};
    d.omega_rel = omega_at_max(p, d);
    return d;
}

std::vector<double> amplitudes(const DerivedParams& p, const PumpDrive& d, int count = kSaturationPoints) {
    const double pump = d.r * p.alpha_in_crit_rel();
    return log_spaced(1e-6 * pump, pump, count);
}

Outcome cusp() {
    const CuspPoint c = find_cusp(device(), NonlinearityOrder::full());
    const double dw = std::fabs(c.omega_rel - 0.96988), dr = std::fabs(c.r - 1.0401);
    return {c.converged && dw <= kCuspTol && dr <= kCuspTol,
            "omega=" + fmt(c.omega_rel, 8) + " r=" + fmt(c.r, 8) + " |d_omega|=" + fmt(dw, 3) + " |d_r|=" + fmt(dr, 3)};
}

Outcome cubic_cusp() {
    double worst = 0.0;
    bool ok = true;
    for (double q : {10.0, 30.0, 150.0}) {
        const CuspPoint c = find_cusp(device(q), NonlinearityOrder::cubic());
        ok = ok && c.converged;
        worst = std::max({worst, std::fabs(c.omega_rel - (1.0 - std::sqrt(3.0) / (2.0 * q))), std::fabs(c.r - 1.0)});
    }
    return {ok && worst <= kCubicCuspTol, "max deviation " + fmt(worst, 3)};
}

Outcome series_vs_bessel() {
    const NonlinearityOrder forty = NonlinearityOrder::truncated(40);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double n = 2.0 * i / 199.0;
        worst = std::max(worst, std::fabs(detuning_term(n, forty) - detuning_term(n, NonlinearityOrder::full())));
    }
    return {worst < kSeriesTol, "max |S_40 - S_inf| " + fmt(worst, 3)};
}

struct GridErrors {
    double gain_relation = 0.0;
    double s11 = 0.0;
    int poles = 0;
};

// 100 x 100 (omega, delta) grid at Q = 30, r = 0.99.
GridErrors grid_errors(NonlinearityOrder order) {
    const DerivedParams p = device();
    const auto [lo, hi] = default_omega_window(kQ);
    const Eigen::VectorXd omegas = Eigen::VectorXd::LinSpaced(100, lo, hi);
    const Eigen::VectorXd deltas = Eigen::VectorXd::LinSpaced(100, -3.0 / kQ, 3.0 / kQ);
    GridErrors e;
    for (double w : omegas) {
        const PumpDrive d{kR, w, 0.0, order};
        const SteadyState ss = solve_operating_point(p, d);
        const LinearCoefficients co = linear_coefficients(p, d, ss);
        e.s11 = std::max(e.s11, std::fabs(std::abs(reflection_s11(d, ss.n, kQ)) - 1.0));
        for (double delta : deltas) {
            try {
                const LinearGain g = gain(co, kQ, delta);
                e.gain_relation = std::max(e.gain_relation, std::fabs(g.G - std::norm(g.m) - 1.0));
            } catch (const PoleError&) {
                ++e.poles;
            }
        }
    }
    return e;
}

Outcome gain_relation() {
    const GridErrors a = grid_errors(NonlinearityOrder::cubic());
    const GridErrors b = grid_errors(NonlinearityOrder::full());
    const double worst = std::max(a.gain_relation, b.gain_relation);
    return {worst <= kGainRelationTol && a.poles + b.poles == 0,
            "max ||g|^2-|m|^2-1| N=1 " + fmt(a.gain_relation, 3) + " N=inf " + fmt(b.gain_relation, 3) +
                " poles " + std::to_string(a.poles + b.poles)};
}

Outcome s11_unit() {
    const double worst = std::max(grid_errors(NonlinearityOrder::cubic()).s11, grid_errors(NonlinearityOrder::full()).s11);
    return {worst <= kS11Tol, "max ||S11|-1| " + fmt(worst, 3)};
}

Outcome power_match() {
    const DerivedParams p = device();
    const double target = max_gain(p, PumpDrive{kR, 1.0, 0.0, NonlinearityOrder::cubic()}).G_db;
    const double r = match_pump_power(p, NonlinearityOrder::full(), target, default_omega_window(kQ));
    return {std::fabs(r - kMatchedR) <= kMatchTol, "target " + fmt(target, 8) + " dB, r=" + fmt(r, 8)};
}

Outcome gain_ordering() {
    const auto gmax = [](double q, NonlinearityOrder order) {
        return max_gain(device(q), PumpDrive{kR, 1.0, 0.0, order}).G_db;
    };
    bool ok = true;
    std::ostringstream os;
    for (double q : {10.0, 30.0}) {
        const double g1 = gmax(q, NonlinearityOrder::cubic()), g2 = gmax(q, NonlinearityOrder::truncated(2)),
                     g3 = gmax(q, NonlinearityOrder::truncated(3)), gi = gmax(q, NonlinearityOrder::full());
        ok = ok && g1 > g2 && g2 >= g3 && g3 >= gi;
        os << "Q=" << q << " G1/G2/G3/Ginf=" << fmt(g1) << "/" << fmt(g2) << "/" << fmt(g3) << "/" << fmt(gi) << " dB; ";
    }
    const double gap = std::fabs(gmax(150.0, NonlinearityOrder::cubic()) - gmax(150.0, NonlinearityOrder::full()));
    ok = ok && gap < kOrderingQ150Tol;
    os << "Q=150 |G1-Ginf|=" << fmt(gap) << " dB";
    return {ok, os.str()};
}

Outcome ode_vs_linear() {
    const DerivedParams p = device();
    struct Case {
        SignalModel model;
        PumpDrive drive;
    };
    const std::vector<Case> cases = {{SignalModel::cubic, cubic_drive(p)},
                                     {SignalModel::cubic_c3_only, cubic_drive(p)},
                                     {SignalModel::linear, cubic_drive(p)},
                                     {SignalModel::full_sine, full_drive(p)}};
    double worst = 0.0;
    bool ok = true;
    std::ostringstream os;
    for (const Case& c : cases) {
        const SteadyState ss = solve_operating_point(p, c.drive);
        const double a = 1e-6 * c.drive.r * p.alpha_in_crit_rel();
        const SaturationPoint pt = gain_at_amplitude(c.model, p, c.drive, ss, a, 0.0);
        const double lin = gain_at(p, c.drive, 0.0).G_db();
        const double dev = std::fabs(pt.G_db - lin);
        ok = ok && pt.converged && std::isfinite(dev);
        worst = std::max(worst, dev);
        os << to_string(c.model) << " " << fmt(pt.G_db, 8) << " vs " << fmt(lin, 8) << " dB; ";
    }
    os << "max dev " << fmt(worst, 3) << " dB";
    return {ok && worst <= kOdeLinearTol, os.str()};
}

// True when no point past the first one at or below G0 - 0.1 dB rises by more than the slack.
bool non_increasing_past_knee(const SaturationCurve& c, double* worst_rise) {
    *worst_rise = 0.0;
    std::size_t k = 0;
    while (k < c.points.size() && c.points[k].G_db > c.G0_db - 0.1) ++k;
    if (k == c.points.size()) return false;
    for (std::size_t i = k + 1; i < c.points.size(); ++i)
        *worst_rise = std::max(*worst_rise, c.points[i].G_db - c.points[i - 1].G_db);
    return *worst_rise <= kMonotoneSlack;
}

bool all_converged(const SaturationCurve& c) {
    return std::all_of(c.points.begin(), c.points.end(), [](const SaturationPoint& p) { return p.converged; });
}

Outcome saturation() {
    const DerivedParams p = device();
    const PumpDrive cd = cubic_drive(p), fd = full_drive(p);
    const SaturationCurve full = saturation_curve(SignalModel::full_sine, p, fd, amplitudes(p, fd), 0.0);
    const SaturationCurve cubic = saturation_curve(SignalModel::cubic, p, cd, amplitudes(p, cd), 0.0);
    const SaturationCurve c3 = saturation_curve(SignalModel::cubic_c3_only, p, cd, amplitudes(p, cd), 0.0);

    double rise_full = 0.0, rise_cubic = 0.0;
    const bool mono_full = non_increasing_past_knee(full, &rise_full);
    const bool mono_cubic = non_increasing_past_knee(cubic, &rise_cubic);

    const std::optional<double> marker = cubic.stiff_pump_marker;
    double track = 0.0;
    int tracked = 0;
    for (std::size_t i = 0; marker && i < cubic.points.size(); ++i) {
        if (cubic.points[i].a_in_mag > *marker) break;
        track = std::max(track, std::fabs(cubic.points[i].G_db - c3.points[i].G_db));
        ++tracked;
    }
    const bool ok = mono_full && mono_cubic && marker && tracked > 1 && track <= kC3TrackTol && all_converged(full) &&
                    all_converged(cubic) && all_converged(c3);
    std::ostringstream os;
    os << "full_sine max rise " << fmt(rise_full, 3) << " dB, cubic max rise " << fmt(rise_cubic, 3)
       << " dB; c3-only vs cubic max " << fmt(track, 3) << " dB over " << tracked << " points up to marker "
       << (marker ? fmt(*marker) : std::string("none")) << "; p1db full " << (full.p1db ? fmt(*full.p1db) : "none")
       << " cubic " << (cubic.p1db ? fmt(*cubic.p1db) : "none") << " c3 " << (c3.p1db ? fmt(*c3.p1db) : "none");
    return {ok, os.str()};
}

Outcome dynamic_range() {
    std::vector<double> p1;
    std::ostringstream os;
    bool ok = true;
    for (double ratio : {-1.0, -10.0, -100.0}) {
        const DerivedParams p = device(kQ, critical_current_for_kerr_q_ratio(7e9, kQ, ratio));
        const PumpDrive d = full_drive(p);
        const SaturationCurve c = saturation_curve(SignalModel::full_sine, p, d, amplitudes(p, d, 25), 0.0);
        ok = ok && c.p1db.has_value();
        p1.push_back(c.p1db.value_or(std::nan("")));
        os << ratio << ": p1db " << fmt(p1.back()) << "; ";
    }
    for (std::size_t i = 1; i < p1.size(); ++i) ok = ok && p1[i] > p1[i - 1];
    return {ok, os.str() + "sqrt(omega0) units"};
}

Outcome classical() {
    const ResonanceComparison c =
        compare_resonance_curves(device(), 0.5, Eigen::VectorXd::LinSpaced(33, 0.95, 1.03));
    return {c.max_rel_dev <= kOracleTol && !c.any_flags,
            "max rel dev lab vs rotating frame " + fmt(c.max_rel_dev, 4) + ", lab vs harmonic balance " +
                fmt(c.max_hb_dev, 3) + ", flags " + (c.any_flags ? "yes" : "none")};
}

Outcome closure() {
    const DerivedParams p = device();
    const PumpDrive d = full_drive(p);
    SaturationOptions opts;
    opts.sim.conjugate_drive = true;
    const SaturationCurve c = saturation_curve(SignalModel::full_sine, p, d, amplitudes(p, d), 0.0, opts);
    double gap = 0.0;
    bool finite = true;
    for (const SaturationPoint& pt : c.points) {
        gap = std::max(gap, pt.max_conjugate_gap);
        finite = finite && !pt.diverged;
    }
    return {finite && gap < kClosureTol, "max |v - u*| " + fmt(gap, 3) + " over " + std::to_string(c.points.size()) +
                                              " amplitudes"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::function<Outcome()>> criteria = {cusp,          cubic_cusp,    series_vs_bessel,
                                                            gain_relation, s11_unit,      power_match,
                                                            gain_ordering, ode_vs_linear, saturation,
                                                            dynamic_range, classical,     closure};
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--only" && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
            return 2;
        }
    }
    if (only < 0 || only > static_cast<int>(criteria.size())) {
        std::fprintf(stderr, "criterion must be in 1..%zu\n", criteria.size());
        return 2;
    }
    int failures = 0;
    for (int i = 1; i <= static_cast<int>(criteria.size()); ++i) {
        if (only && i != only) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i - 1]();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %d: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i, o.detail.c_str(), secs);
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
