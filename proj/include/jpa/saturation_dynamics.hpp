#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "jpa/linear_response.hpp"

namespace jpa {

// Semi-classical signal models beyond linear response.
//   cubic          cubic expansion with c1, c2, c3 (Kerr model at order N = 1)
//   cubic_c3_only  cubic with c1 = c2 = 0
//   full_sine      closed-form all-order signal equation
//   linear         l1, l2 terms only
enum class SignalModel { cubic, cubic_c3_only, full_sine, linear };

std::string to_string(SignalModel model);
SignalModel parse_signal_model(const std::string& text);

struct CubicCoefficients {
    std::complex<double> c1;
    std::complex<double> c2;
    std::complex<double> c3;
};

CubicCoefficients cubic_coefficients(const DerivedParams& params, const PumpDrive& drive,
                                     const SteadyState& ss);

// Doubled phase space: u plays a, v plays a^dagger and is evolved as an
// independent variable. Only u is driven unless conjugate_drive is set.
struct EnvelopeState {
    std::complex<double> u;
    std::complex<double> v;
    double tau = 0.0;
};

struct SimConfig {
    double dtau = 0.0;    // 0: min(0.25, 2 pi / (40 max(|delta|, 1/Q))), snapped to the signal period
    double settle = 0.0;  // 0: max(40 Q, 12 / slowest linear decay rate), capped at kMaxSettle
    double window = 0.0;  // 0: max(20 signal periods, 20 Q), whole periods
    bool conjugate_drive = false;
    bool record_transient = false;
    bool step_halving = true;
    double stationarity_tol = 1e-3;
    double halving_tol_db = 0.01;
    int settle_extensions = 3;  // settle doublings tried before reporting non-stationary
};

inline constexpr double kMaxSettle = 4e5;

// Right-hand side of the doubled (u, v) system for one model and drive.
class SignalSystem {
public:
    SignalSystem(SignalModel model, const DerivedParams& params, const PumpDrive& drive, const SteadyState& ss,
                 double a_in_mag, double delta, bool conjugate_drive);

    Eigen::Vector2cd operator()(double tau, const Eigen::Vector2cd& y) const;

    std::complex<double> input(double tau) const;  // a_in(tau), sqrt(omega0) units
    double q() const { return q_; }
    double a_in_mag() const { return a_in_mag_; }
    double delta() const { return delta_; }
    const LinearCoefficients& linear() const { return lin_; }
    const CubicCoefficients& cubic() const { return cub_; }

    // Suppress the signal-dependence of m(a) in the full-sine model (m = n).
    void freeze_photon_number(bool frozen) { frozen_m_ = frozen; }

private:
    SignalModel model_;
    double q_, kappa_, n_, omega_, delta_, a_in_mag_;
    std::complex<double> alpha_;
    NonlinearityOrder order_;
    LinearCoefficients lin_;
    CubicCoefficients cub_;
    double s_n_;
    bool conjugate_drive_;
    bool frozen_m_ = false;
};

struct EnvelopeTrace {
    double dtau = 0.0;
    double settle = 0.0;
    double window = 0.0;
    std::vector<EnvelopeState> samples;  // measurement window (and transient if recorded)
    std::size_t window_begin = 0;        // index of the first window sample
    double max_conjugate_gap = 0.0;      // max |v - conj(u)| over the run
};

// Resolved step / settle / window for a system (defaults filled in).
SimConfig resolve_sim(const SignalSystem& system, const SimConfig& sim);

// Fixed-step RK4 from u = v = 0. Throws DivergenceError on a non-finite state.
EnvelopeTrace integrate_envelope(const SignalSystem& system, const SimConfig& sim);
EnvelopeTrace integrate_envelope(const SignalSystem& system, const SimConfig& sim, const EnvelopeState& start);

// (1/T) integral of series(tau) e^{+i delta tau} over the samples (uniform
// step, trapezoid). Throws WindowError if the span is shorter than one period.
std::complex<double> extract_tone(std::span<const double> tau, std::span<const std::complex<double>> series,
                                  double delta);

// Output tone of a trace's window: u_out = u / sqrt(Q) - a_in.
std::complex<double> extract_tone(const SignalSystem& system, const EnvelopeTrace& trace);

struct SaturationPoint {
    double a_in_mag = 0.0;   // sqrt(omega0) units
    double a_in_flux = 0.0;  // photons / s
    double delta = 0.0;
    double omega_rel = 0.0;
    double G_db = 0.0;
    bool converged = false;
    bool stationary = false;
    bool diverged = false;
    double step_used = 0.0;
    double halving_change_db = 0.0;
    double max_conjugate_gap = 0.0;
};

SaturationPoint gain_at_amplitude(SignalModel model, const DerivedParams& params, const PumpDrive& drive,
                                  const SteadyState& ss, double a_in_mag, double delta, const SimConfig& sim = {});

struct SaturationOptions {
    SimConfig sim;
    bool remaximize_omega = false;  // re-optimise the pump frequency at every amplitude
    int threads = 0;
    bool refine_p1db = true;
};

struct SaturationCurve {
    SignalModel model = SignalModel::full_sine;
    PumpDrive drive;
    double delta = 0.0;
    std::vector<SaturationPoint> points;
    double G0_db = 0.0;                        // gain at the smallest amplitude
    double linear_G_db = 0.0;                  // closed-form small-signal gain
    double pump_input = 0.0;                   // |alpha_in|, sqrt(omega0) units
    double pump_flux = 0.0;                    // |alpha_in|^2, photons / s
    std::optional<double> p1db;                // input amplitude at G0 - 1 dB
    std::optional<double> stiff_pump_marker;   // input amplitude with |alpha_in|^2 / |a_out|^2 = 100
};

// Amplitudes must be positive and strictly increasing.
SaturationCurve saturation_curve(SignalModel model, const DerivedParams& params, const PumpDrive& drive,
                                 const std::vector<double>& amplitudes, double delta,
                                 const SaturationOptions& options = {});

// Log-interpolated 1 dB compression amplitude from the curve's converged points.
std::optional<double> compression_point(const SaturationCurve& curve);

// Amplitude where the output signal power is 20 dB below the pump input power.
std::optional<double> stiff_pump_marker(const SaturationCurve& curve);

// Log-spaced amplitudes between lo and hi (inclusive).
std::vector<double> log_spaced(double lo, double hi, int count);

}  // namespace jpa
