#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "jpa/device_params.hpp"
#include "jpa/nonlinearity.hpp"

namespace jpa {

// Pump specification. `r` is the input amplitude in units of the cubic-model
// critical input field, `omega_rel` the pump frequency in units of omega0.
struct PumpDrive {
    double r = 0.0;
    double omega_rel = 1.0;
    double phase = 0.0;
    NonlinearityOrder order = NonlinearityOrder::full();
};

void validate(const PumpDrive& drive);

struct SteadyState {
    double n = 0.0;                  // -K |alpha|^2 / omega0
    std::complex<double> alpha{};    // intra-resonator pump, photon-amplitude units
    bool stable = true;
    int branch_count = 1;
};

// Upper end of the photon-number scan (junction phase amplitude 4 sqrt(n) <= 8).
inline constexpr double kMaxPhotonNumber = 4.0;

// F(n) = [1/(4Q^2) + (1 - Omega + S_N(n))^2] n - r^2 / (sqrt(27) Q^3) and its
// first two n-derivatives.
double response_function(double n, double q, const PumpDrive& drive);
double response_slope(double n, double q, const PumpDrive& drive);
double response_curvature(double n, double q, const PumpDrive& drive);

// All steady states in (0, kMaxPhotonNumber], ascending. Each carries the
// pump amplitude for the drive's phase and the slope stability flag.
std::vector<SteadyState> solve_photon_number(const DerivedParams& params, const PumpDrive& drive);

// Smallest stable branch; the branch reached by raising the pump from zero.
const SteadyState& operating_point(const std::vector<SteadyState>& states);
SteadyState solve_operating_point(const DerivedParams& params, const PumpDrive& drive);

// Intra-resonator pump amplitude for a photon number returned by the solver.
std::complex<double> pump_amplitude(const DerivedParams& params, const PumpDrive& drive, double n);

// alpha_out / alpha_in; unit modulus.
std::complex<double> reflection_s11(const PumpDrive& drive, double n, double q);

// Branch counts over the grid: rows follow r_grid, columns omega_grid.
Eigen::MatrixXi stability_diagram(const DerivedParams& params, const Eigen::VectorXd& omega_grid,
                                  const Eigen::VectorXd& r_grid, NonlinearityOrder order,
                                  int threads = 0);

struct CuspPoint {
    double omega_rel = 0.0;
    double r = 0.0;
    double n = 0.0;
    bool converged = false;
    double residual = 0.0;
    int iterations = 0;
};

// Onset of bistability: F = dF/dn = d2F/dn2 = 0. On non-convergence the last
// iterate is returned with converged = false.
CuspPoint find_cusp(const DerivedParams& params, NonlinearityOrder order);

}  // namespace jpa
