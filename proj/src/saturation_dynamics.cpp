#include "jpa/saturation_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "jpa/errors.hpp"
#include "jpa/parallel.hpp"
#include "jpa/rk4.hpp"

namespace jpa {

namespace {

using cd = std::complex<double>;
constexpr cd I{0.0, 1.0};
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double signal_period(double delta) { return kTwoPi / std::fabs(delta); }

// Slowest decay rate of the linearised (u, v) dynamics; <= 0 when unstable.
// Eigenvalues of [[l1, l2], [l2*, l1*]] are Re l1 +- sqrt(|l2|^2 - (Im l1)^2).
double slowest_rate(const LinearCoefficients& co) {
    const double disc = std::norm(co.l2) - co.l1.imag() * co.l1.imag();
    return -(co.l1.real() + (disc > 0.0 ? std::sqrt(disc) : 0.0));
}

double db_ratio(double out, double in) { return 20.0 * std::log10(out / in); }

}  // namespace

std::string to_string(SignalModel model) {
    switch (model) {
        case SignalModel::cubic: return "cubic";
        case SignalModel::cubic_c3_only: return "cubic_c3_only";
        case SignalModel::full_sine: return "full_sine";
        case SignalModel::linear: return "linear";
    }
    return "unknown";
}

SignalModel parse_signal_model(const std::string& text) {
    for (auto m : {SignalModel::cubic, SignalModel::cubic_c3_only, SignalModel::full_sine, SignalModel::linear})
        if (text == to_string(m)) return m;
    throw ValidationError("unknown signal model '" + text + "' (cubic | cubic_c3_only | full_sine | linear)");
}

CubicCoefficients cubic_coefficients(const DerivedParams& params, const PumpDrive& drive, const SteadyState& ss) {
    validate(drive);
    if (!(ss.n >= 0.0)) throw DomainError("cubic_coefficients: n must be >= 0");
    const double kappa = params.kerr_ratio;
    const double quadratic = quadratic_kernel(ss.n, drive.order);
    CubicCoefficients c;
    c.c1 = -I * kappa * std::conj(ss.alpha) * quadratic;
    c.c2 = -I * kappa * ss.alpha * quadratic;  // (alpha / alpha*) c1
    c.c3 = -I * kappa * cubic_kernel(ss.n, drive.order) / 3.0;
    return c;
}

SignalSystem::SignalSystem(SignalModel model, const DerivedParams& params, const PumpDrive& drive,
                           const SteadyState& ss, double a_in_mag, double delta, bool conjugate_drive)
    : model_(model),
      q_(params.q),
      kappa_(params.kerr_ratio),
      n_(ss.n),
      omega_(drive.omega_rel),
      delta_(delta),
      a_in_mag_(a_in_mag),
      alpha_(ss.alpha),
      order_(drive.order),
      lin_(linear_coefficients(params, drive, ss)),
      cub_(cubic_coefficients(params, drive, ss)),
      s_n_(detuning_term(std::complex<double>(ss.n), drive.order).real()),  // same path as S(m)
      conjugate_drive_(conjugate_drive) {
    if (!std::isfinite(a_in_mag) || a_in_mag < 0.0)
        throw ValidationError("signal amplitude must be finite and >= 0");
    if (!std::isfinite(delta)) throw ValidationError("delta must be finite");
    if (model_ == SignalModel::cubic_c3_only) cub_.c1 = cub_.c2 = cd{};
}

cd SignalSystem::input(double tau) const { return a_in_mag_ * std::exp(-I * (delta_ * tau)); }

Eigen::Vector2cd SignalSystem::operator()(double tau, const Eigen::Vector2cd& y) const {
    const cd u = y[0];
    const cd v = y[1];
    const cd a = input(tau);
    const cd b = conjugate_drive_ ? std::conj(a) : cd{};
    const double coupling = 1.0 / std::sqrt(q_);
    Eigen::Vector2cd dy;
    switch (model_) {
        case SignalModel::linear:
            dy << lin_.l1 * u + lin_.l2 * v, std::conj(lin_.l1) * v + std::conj(lin_.l2) * u;
            break;
        case SignalModel::cubic:
        case SignalModel::cubic_c3_only: {
            const cd uv = u * v;
            dy << lin_.l1 * u + lin_.l2 * v + cub_.c1 * u * u + 2.0 * cub_.c2 * uv + 3.0 * cub_.c3 * u * uv,
                std::conj(lin_.l1) * v + std::conj(lin_.l2) * u + std::conj(cub_.c1) * v * v +
                    2.0 * std::conj(cub_.c2) * uv + 3.0 * std::conj(cub_.c3) * v * uv;
            break;
        }
        case SignalModel::full_sine: {
            // m(a) = n - K (alpha* a + alpha a* + a* a) / omega0, with a* -> v.
            const cd m = frozen_m_ ? cd(n_) : n_ - kappa_ * (std::conj(alpha_) * u + alpha_ * v + u * v);
            const cd s_m = detuning_term(m, order_);
            const cd detune = 1.0 - omega_ + s_m;
            const double damping = 0.5 / q_;
            dy << -(damping + I * detune) * u + I * (s_n_ - s_m) * alpha_,
                -(damping - I * detune) * v - I * (s_n_ - s_m) * std::conj(alpha_);
            break;
        }
    }
    dy[0] += coupling * a;
    dy[1] += coupling * b;
    return dy;
}

SimConfig resolve_sim(const SignalSystem& system, const SimConfig& sim) {
    SimConfig out = sim;
    const double q = system.q();
    const double delta = system.delta();
    const bool tone = delta != 0.0;
    const double period = tone ? signal_period(delta) : 0.0;

    double dtau = sim.dtau > 0.0 ? sim.dtau
                                 : std::min(0.25, kTwoPi / (40.0 * std::max(std::fabs(delta), 1.0 / q)));
    if (tone) dtau = period / std::ceil(period / dtau * (1.0 - 1e-12));
    out.dtau = dtau;

    if (sim.settle <= 0.0) {
        const double rate = slowest_rate(system.linear());
        double settle = 40.0 * q;
        if (rate > 0.0) settle = std::max(settle, 12.0 / rate);
        out.settle = std::min(settle, kMaxSettle);
    }
    out.settle = std::round(out.settle / dtau) * dtau;

    double window = sim.window > 0.0 ? sim.window : std::max(tone ? 20.0 * period : 0.0, 20.0 * q);
    if (tone) {
        double periods = std::ceil(window / period * (1.0 - 1e-12));
        if (std::fmod(periods, 2.0) != 0.0) periods += 1.0;  // halves hold whole periods
        window = periods * period;
    }
    out.window = std::round(window / dtau) * dtau;
    return out;
}

EnvelopeTrace integrate_envelope(const SignalSystem& system, const SimConfig& sim) {
    return integrate_envelope(system, sim, EnvelopeState{});
}

EnvelopeTrace integrate_envelope(const SignalSystem& system, const SimConfig& sim, const EnvelopeState& start) {
    const SimConfig cfg = resolve_sim(system, sim);
    EnvelopeTrace trace;
    trace.dtau = cfg.dtau;
    trace.settle = cfg.settle;
    trace.window = cfg.window;
    const auto settle_steps = static_cast<long>(std::llround(cfg.settle / cfg.dtau));
    const auto window_steps = static_cast<long>(std::llround(cfg.window / cfg.dtau));
    const long total = settle_steps + window_steps;

    Eigen::Vector2cd y(start.u, start.v);
    const double tau0 = start.tau;
    auto record = [&](long k) {
        trace.samples.push_back({y[0], y[1], tau0 + static_cast<double>(k) * cfg.dtau});
    };
    if (cfg.record_transient) trace.samples.reserve(static_cast<std::size_t>(total + 1));
    else trace.samples.reserve(static_cast<std::size_t>(window_steps + 1));

    for (long k = 0;; ++k) {
        if (k == settle_steps) trace.window_begin = trace.samples.size();
        if (cfg.record_transient || k >= settle_steps) record(k);
        trace.max_conjugate_gap = std::max(trace.max_conjugate_gap, std::abs(y[1] - std::conj(y[0])));
        if (k == total) break;
        const double tau = tau0 + static_cast<double>(k) * cfg.dtau;
        y = rk4_step(system, tau, y, cfg.dtau);
        if (!y.allFinite() || y.cwiseAbs().maxCoeff() > 1e150) {
            std::ostringstream msg;
            msg << "integrate_envelope: state diverged at tau=" << tau + cfg.dtau;
            throw DivergenceError(msg.str(), tau + cfg.dtau);
        }
    }
    return trace;
}

cd extract_tone(std::span<const double> tau, std::span<const cd> series, double delta) {
    if (tau.size() != series.size() || tau.size() < 2)
        throw WindowError("extract_tone: need at least two samples with matching times");
    const double span = tau.back() - tau.front();
    if (delta != 0.0 && span < signal_period(delta) * (1.0 - 1e-9))
        throw WindowError("extract_tone: window shorter than one signal period");
    cd sum{};
    for (std::size_t i = 0; i < tau.size(); ++i) {
        const double w = (i == 0 || i + 1 == tau.size()) ? 0.5 : 1.0;
        sum += w * series[i] * std::exp(I * (delta * tau[i]));
    }
    // Uniform step: trapezoid = h * sum, T = h * (N - 1).
    return sum / static_cast<double>(tau.size() - 1);
}

namespace {

cd window_tone(const SignalSystem& system, const EnvelopeTrace& trace, std::size_t begin, std::size_t end) {
    std::vector<double> tau;
    std::vector<cd> out;
    tau.reserve(end - begin);
    out.reserve(end - begin);
    const double coupling = 1.0 / std::sqrt(system.q());
    for (std::size_t i = begin; i < end; ++i) {
        const auto& s = trace.samples[i];
        tau.push_back(s.tau);
        out.push_back(coupling * s.u - system.input(s.tau));
    }
    return extract_tone(tau, out, system.delta());
}

struct RunResult {
    double G_db = 0.0;
    bool stationary = false;
    double gap = 0.0;
};

RunResult measure(const SignalSystem& system, const SimConfig& cfg) {
    const EnvelopeTrace trace = integrate_envelope(system, cfg);
    const std::size_t b = trace.window_begin;
    const std::size_t e = trace.samples.size();
    const std::size_t mid = b + (e - b) / 2;
    const cd whole = window_tone(system, trace, b, e);
    const cd first = window_tone(system, trace, b, mid + 1);
    const cd second = window_tone(system, trace, mid, e);
    RunResult r;
    r.G_db = db_ratio(std::abs(whole), system.a_in_mag());
    r.stationary = std::abs(first - second) <= cfg.stationarity_tol * std::abs(whole);
    r.gap = trace.max_conjugate_gap;
    return r;
}

}  // namespace

cd extract_tone(const SignalSystem& system, const EnvelopeTrace& trace) {
    return window_tone(system, trace, trace.window_begin, trace.samples.size());
}

SaturationPoint gain_at_amplitude(SignalModel model, const DerivedParams& params, const PumpDrive& drive,
                                  const SteadyState& ss, double a_in_mag, double delta, const SimConfig& sim) {
    if (!(a_in_mag > 0.0) || !std::isfinite(a_in_mag))
        throw ValidationError("gain_at_amplitude: a_in_mag must be finite and > 0");
    const SignalSystem system(model, params, drive, ss, a_in_mag, delta, sim.conjugate_drive);
    SimConfig cfg = resolve_sim(system, sim);
    cfg.record_transient = false;

    SaturationPoint p;
    p.a_in_mag = a_in_mag;
    p.a_in_flux = a_in_mag * a_in_mag * params.omega0;
    p.delta = delta;
    p.omega_rel = drive.omega_rel;
    try {
        RunResult coarse = measure(system, cfg);
        for (int ext = 0; !coarse.stationary && ext < sim.settle_extensions && cfg.settle < kMaxSettle; ++ext) {
            cfg.settle = std::min(2.0 * cfg.settle, kMaxSettle);
            coarse = measure(system, cfg);
        }
        p.G_db = coarse.G_db;
        p.stationary = coarse.stationary;
        p.step_used = cfg.dtau;
        p.max_conjugate_gap = coarse.gap;
        if (sim.step_halving) {
            SimConfig fine = cfg;
            fine.dtau = cfg.dtau / 2.0;
            const RunResult r = measure(system, fine);
            p.halving_change_db = std::fabs(r.G_db - coarse.G_db);
            p.G_db = r.G_db;
            p.stationary = coarse.stationary && r.stationary;
            p.step_used = fine.dtau;
            p.max_conjugate_gap = std::max(p.max_conjugate_gap, r.gap);
        }
    } catch (const DivergenceError&) {
        p.diverged = true;
        p.G_db = std::numeric_limits<double>::quiet_NaN();
        p.converged = false;
        return p;
    }
    p.converged = p.stationary && (!sim.step_halving || p.halving_change_db < sim.halving_tol_db);
    return p;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
    if (!(lo > 0.0 && hi > lo) || count < 2) throw ValidationError("log_spaced: need 0 < lo < hi and count >= 2");
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, double(i) / (count - 1));
    return out;
}

namespace {

// Log-linear interpolation of the amplitude where `value` crosses `level`
// between consecutive usable points (first crossing from above).
std::optional<std::pair<std::size_t, std::size_t>> first_drop(const std::vector<SaturationPoint>& pts,
                                                             double level) {
    std::optional<std::size_t> prev;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!pts[i].converged) continue;
        if (pts[i].G_db < level) {
            if (!prev) return std::nullopt;
            return std::make_pair(*prev, i);
        }
        prev = i;
    }
    return std::nullopt;
}

double interpolate_log(double a0, double y0, double a1, double y1, double level) {
    const double t = (level - y0) / (y1 - y0);
    return std::exp(std::log(a0) + t * (std::log(a1) - std::log(a0)));
}

}  // namespace

std::optional<double> compression_point(const SaturationCurve& curve) {
    const double level = curve.G0_db - 1.0;
    const auto bracket = first_drop(curve.points, level);
    if (!bracket) return std::nullopt;
    const auto& a = curve.points[bracket->first];
    const auto& b = curve.points[bracket->second];
    return interpolate_log(a.a_in_mag, a.G_db, b.a_in_mag, b.G_db, level);
}

std::optional<double> stiff_pump_marker(const SaturationCurve& curve) {
    // |a_out| = a_in 10^{G/20} reaches |alpha_in| / 10.
    const double level = std::log(curve.pump_input / 10.0);
    std::optional<std::size_t> prev;
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        const auto& p = curve.points[i];
        if (p.diverged || !std::isfinite(p.G_db)) continue;
        const double out = std::log(p.a_in_mag) + p.G_db * std::log(10.0) / 20.0;
        if (out >= level) {
            if (!prev) return std::nullopt;
            const auto& q = curve.points[*prev];
            const double out0 = std::log(q.a_in_mag) + q.G_db * std::log(10.0) / 20.0;
            return interpolate_log(q.a_in_mag, out0, p.a_in_mag, out, level);
        }
        prev = i;
    }
    return std::nullopt;
}

namespace {

SaturationPoint remaximized_point(SignalModel model, const DerivedParams& params, PumpDrive drive, double a,
                                  double delta, const SimConfig& sim) {
    const double half_width = 0.5 / params.q;
    double lo = drive.omega_rel - half_width;
    double hi = drive.omega_rel + half_width;
    SimConfig quick = sim;
    quick.step_halving = false;
    auto value = [&](double omega) {
        drive.omega_rel = omega;
        const SteadyState ss = solve_operating_point(params, drive);
        const SaturationPoint p = gain_at_amplitude(model, params, drive, ss, a, delta, quick);
        return p.diverged ? -std::numeric_limits<double>::infinity() : p.G_db;
    };
    const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - golden * (hi - lo), x2 = lo + golden * (hi - lo);
    double f1 = value(x1), f2 = value(x2);
    while (hi - lo > 1e-6) {
        if (f1 > f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - golden * (hi - lo);
            f1 = value(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + golden * (hi - lo);
            f2 = value(x2);
        }
    }
    drive.omega_rel = 0.5 * (lo + hi);
    const SteadyState ss = solve_operating_point(params, drive);
    return gain_at_amplitude(model, params, drive, ss, a, delta, sim);
}

}  // namespace

SaturationCurve saturation_curve(SignalModel model, const DerivedParams& params, const PumpDrive& drive,
                                 const std::vector<double>& amplitudes, double delta,
                                 const SaturationOptions& options) {
    if (amplitudes.empty()) throw ValidationError("saturation_curve: empty amplitude range");
    for (std::size_t i = 0; i < amplitudes.size(); ++i) {
        if (!(amplitudes[i] > 0.0) || !std::isfinite(amplitudes[i]))
            throw ValidationError("saturation_curve: amplitudes must be finite and > 0");
        if (i > 0 && amplitudes[i] <= amplitudes[i - 1])
            throw ValidationError("saturation_curve: amplitudes must be strictly increasing");
    }
    const SteadyState ss = solve_operating_point(params, drive);

    SaturationCurve curve;
    curve.model = model;
    curve.drive = drive;
    curve.delta = delta;
    curve.pump_input = drive.r * params.alpha_in_crit_rel();
    curve.pump_flux = curve.pump_input * curve.pump_input * params.omega0;
    curve.linear_G_db = gain(linear_coefficients(params, drive, ss), params.q, delta).G_db();
    curve.points.resize(amplitudes.size());

    auto point_at = [&](double a) {
        return options.remaximize_omega ? remaximized_point(model, params, drive, a, delta, options.sim)
                                        : gain_at_amplitude(model, params, drive, ss, a, delta, options.sim);
    };
    parallel_for(amplitudes.size(), resolve_threads(options.threads),
                 [&](std::size_t i) { curve.points[i] = point_at(amplitudes[i]); });

    curve.G0_db = curve.points.front().G_db;
    curve.p1db = compression_point(curve);
    if (curve.p1db && options.refine_p1db) {
        const auto bracket = *first_drop(curve.points, curve.G0_db - 1.0);
        double lo = std::log(curve.points[bracket.first].a_in_mag);
        double hi = std::log(curve.points[bracket.second].a_in_mag);
        for (int it = 0; it < 12; ++it) {
            const double mid = 0.5 * (lo + hi);
            const SaturationPoint p = point_at(std::exp(mid));
            if (!p.converged) break;
            (p.G_db >= curve.G0_db - 1.0 ? lo : hi) = mid;
        }
        curve.p1db = std::exp(0.5 * (lo + hi));
    }
    curve.stiff_pump_marker = stiff_pump_marker(curve);
    if (curve.stiff_pump_marker && options.refine_p1db) {
        // Bracket from the grid, then bisect on the output amplitude.
        const double level = std::log(curve.pump_input / 10.0);
        auto log_out = [](const SaturationPoint& p) {
            return std::log(p.a_in_mag) + p.G_db * std::log(10.0) / 20.0;
        };
        double lo = 0.0, hi = 0.0;
        for (std::size_t i = 1; i < curve.points.size(); ++i) {
            const auto& a = curve.points[i - 1];
            const auto& b = curve.points[i];
            if (std::isfinite(a.G_db) && std::isfinite(b.G_db) && log_out(a) < level && log_out(b) >= level) {
                lo = std::log(a.a_in_mag);
                hi = std::log(b.a_in_mag);
                break;
            }
        }
        for (int it = 0; hi > lo && it < 12; ++it) {
            const double mid = 0.5 * (lo + hi);
            const SaturationPoint p = point_at(std::exp(mid));
            if (p.diverged) break;
            (log_out(p) < level ? lo : hi) = mid;
        }
        if (hi > lo) curve.stiff_pump_marker = std::exp(0.5 * (lo + hi));
    }
    return curve;
}

}  // namespace jpa
