#include "jpa/device_params.hpp"

#include <cmath>
#include <string>

#include "jpa/errors.hpp"

namespace jpa {

namespace {

void require_positive(double value, const char* field) {
    if (!std::isfinite(value) || value <= 0.0)
        throw ValidationError(std::string("device: field '") + field + "' must be finite and > 0, got " +
                              std::to_string(value));
}

}  // namespace

void validate(const DeviceParams& p) {
    require_positive(p.f0_hz, "f0_hz");
    require_positive(p.ic_a, "ic_a");
    require_positive(p.q, "q");
}

DerivedParams derive(const DeviceParams& p) {
    using namespace constants;
    validate(p);
    DerivedParams d;
    d.q = p.q;
    d.omega0 = 2.0 * kPi * p.f0_hz;
    d.K = -(d.omega0 / 8.0) * (2.0 * kElementaryCharge * d.omega0 / p.ic_a);
    d.kerr_ratio = d.K / d.omega0;
    d.gamma = d.omega0 / p.q;
    d.Lj = kFluxQuantum / (2.0 * kPi * p.ic_a);
    d.Ej = p.ic_a * kFluxQuantum / (2.0 * kPi);
    d.C = 1.0 / (d.Lj * d.omega0 * d.omega0);
    d.alpha_in_crit = std::sqrt(-d.gamma * d.gamma / (std::sqrt(27.0) * d.K));
    return d;
}

double DerivedParams::alpha_in_crit_rel() const {
    return std::sqrt(-1.0 / (q * q * std::sqrt(27.0) * kerr_ratio));
}

double critical_current_for_kerr_q_ratio(double f0_hz, double q, double target) {
    if (!(target < 0.0)) throw ValidationError("omega0/(K Q) must be negative");
    require_positive(f0_hz, "f0_hz");
    require_positive(q, "q");
    // omega0 / (K Q) = -4 Ic / (e omega0 Q)
    const double omega0 = 2.0 * constants::kPi * f0_hz;
    return -target * constants::kElementaryCharge * omega0 * q / 4.0;
}

}  // namespace jpa
