#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "jpa/pump_steady_state.hpp"

namespace jpa {

// Stiff-pump linearisation da/dtau = l1 a + l2 a^dagger + a_in / sqrt(Q omega0).
struct LinearCoefficients {
    std::complex<double> l1;
    std::complex<double> l2;
};

struct LinearGain {
    double delta = 0.0;  // (omega_s - omega_p) / omega0
    std::complex<double> g;
    std::complex<double> m;
    double G = 1.0;  // |g|^2
    double G_db() const;
};

LinearCoefficients linear_coefficients(const DerivedParams& params, const PumpDrive& drive,
                                       const SteadyState& ss);

// Signal (g) and idler (m) amplitude gains. Throws PoleError at the
// parametric oscillation threshold.
LinearGain gain(const LinearCoefficients& co, double q, double delta);

// Gain on the default (smallest stable) branch for a single pump setting.
LinearGain gain_at(const DerivedParams& params, const PumpDrive& drive, double delta, double* n_out = nullptr);

struct GainPoint {
    double omega_rel = 0.0;
    double n = 0.0;
    double G_db = 0.0;  // +inf at a pole
    std::complex<double> g;
    std::complex<double> m;
    bool pole = false;
};

struct GainCurve {
    DerivedParams params;
    PumpDrive drive;  // omega_rel ignored; each point sets its own
    double delta = 0.0;
    std::vector<GainPoint> points;
};

GainCurve gain_sweep(const DerivedParams& params, const PumpDrive& drive_template,
                     const Eigen::VectorXd& omega_grid, double delta, int threads = 0);

struct GainMaximum {
    double omega_rel = 0.0;
    double G_db = 0.0;
};

// Maximum of a sweep: grid argmax, zoomed to 1e-6 in omega by re-evaluating
// the curve's drive, finished with a parabolic fit on G_db.
GainMaximum max_gain(const GainCurve& curve);

// Full width at half maximum (linear gain) of the peak containing the grid maximum.
double half_max_width(const GainCurve& curve);

// Pump window [1 - 2/Q, 1 + 1/(2Q)] containing the gain maximum for r near critical.
std::pair<double, double> default_omega_window(double q);

// max_gain over a uniform grid on omega_range (default window when empty).
GainMaximum max_gain(const DerivedParams& params, const PumpDrive& drive, double delta = 0.0,
                     std::pair<double, double> omega_range = {}, int grid_points = 801, int threads = 0);

// Pump amplitude r at which max over omega of G(delta) equals target_G_db (0.01 dB).
double match_pump_power(const DerivedParams& params, NonlinearityOrder order, double target_G_db,
                        std::pair<double, double> omega_range, double delta = 0.0, int grid_points = 801);

}  // namespace jpa
