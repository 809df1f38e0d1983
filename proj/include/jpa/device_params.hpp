#pragma once

namespace jpa {

// 2019 SI exact values.
namespace constants {
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kPlanck = 6.62607015e-34;             // J s
inline constexpr double kFluxQuantum = kPlanck / (2.0 * kElementaryCharge);
inline constexpr double kPi = 3.14159265358979323846;
}  // namespace constants

// Physical description of the amplifier: a junction of critical current
// `ic_a` shunted to resonate at `f0_hz`, galvanically coupled with quality
// factor `q`.
struct DeviceParams {
    double f0_hz = 0.0;
    double ic_a = 0.0;
    double q = 0.0;
};

// Everything downstream needs, in SI. Solver code works in units of omega0;
// kerr_ratio (K / omega0) and q are the only device numbers it consumes.
struct DerivedParams {
    double omega0 = 0.0;         // rad/s
    double K = 0.0;              // rad/s, negative
    double gamma = 0.0;          // rad/s
    double Lj = 0.0;             // H
    double Ej = 0.0;             // J
    double C = 0.0;              // F
    double alpha_in_crit = 0.0;  // sqrt(rad/s)
    double kerr_ratio = 0.0;     // K / omega0
    double q = 0.0;

    // Critical input amplitude in units of sqrt(omega0).
    double alpha_in_crit_rel() const;
};

// Throws ValidationError naming the offending field.
void validate(const DeviceParams& p);

DerivedParams derive(const DeviceParams& p);

// Critical current giving omega0 / (K Q) = `target` (< 0) at fixed f0 and Q.
double critical_current_for_kerr_q_ratio(double f0_hz, double q, double target);

}  // namespace jpa
