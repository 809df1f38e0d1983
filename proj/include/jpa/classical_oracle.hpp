#pragma once

#include <vector>

#include <Eigen/Core>

#include "jpa/device_params.hpp"

namespace jpa {

// Lab-frame pendulum phi'' + phi'/Q + sin(phi) = i_p cos(omega tau).
struct PhaseState {
    double phi = 0.0;
    double dphi = 0.0;
    double tau = 0.0;
};

// Normalised pump current whose harmonic-balance response reproduces the
// rotating-frame steady state at the same r.
double pump_current_from_r(double r, double q);

struct PhaseSimConfig {
    double dtau = 0.0;        // 0: 2 pi / (200 max(omega, 1)), snapped to the drive period
    double settle = 0.0;      // 0: 60 Q
    int window_periods = 64;  // even, so the omega/2 probe sees whole periods
};

struct PhaseResponse {
    double omega_rel = 0.0;
    double i_p = 0.0;
    double phi_a = 0.0;        // fundamental amplitude, phi ~ phi_a cos(omega tau - phase)
    double phase = 0.0;
    double subharmonic = 0.0;  // amplitude at omega / 2
    double period_spread = 0.0;  // max relative change of the per-period amplitude
    bool period_doubling = false;
    bool non_periodic = false;
    PhaseState final_state;
    bool flagged() const { return period_doubling || non_periodic; }
};

// RK4 from `start` (rest by default). Throws DivergenceError on a non-finite state.
PhaseResponse integrate_phase_eq(double i_p, double omega_rel, double q, const PhaseSimConfig& sim = {},
                                 const PhaseState& start = {});

// Roots n = (phi_a / 4)^2 of the single-harmonic balance of the pendulum,
// n [((2 R(n) - omega^2) / 2)^2 + omega^2 / (4 Q^2)] = i_p^2 / 64, R(n) = J1(4 sqrt n) / (4 sqrt n).
std::vector<double> harmonic_balance_photon_number(double i_p, double omega_rel, double q);

struct ResonanceRow {
    double omega_rel = 0.0;
    double phi_a = 0.0;
    double n_cl = 0.0;
    double n_rwa = 0.0;  // closest stable rotating-frame root
    double n_hb = 0.0;   // closest harmonic-balance root
    double rel_dev = 0.0;
    bool period_doubling = false;
    bool non_periodic = false;
};

struct ResonanceComparison {
    double r = 0.0;
    double q = 0.0;
    double i_p = 0.0;
    std::vector<ResonanceRow> rows;
    double max_rel_dev = 0.0;
    double max_hb_dev = 0.0;  // lab frame vs harmonic balance
    bool any_flags = false;
};

// Only params.q and params.kerr_ratio enter.
ResonanceComparison compare_resonance_curves(const DerivedParams& params, double r, const Eigen::VectorXd& omega_grid,
                                             const PhaseSimConfig& sim = {}, int threads = 0);

}  // namespace jpa
