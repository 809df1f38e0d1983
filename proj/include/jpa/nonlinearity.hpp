#pragma once

#include <complex>
#include <string>

#include "jpa/special_functions.hpp"

namespace jpa {

// Number of terms N kept from the sine expansion of the junction nonlinearity.
// N = 1 is the Kerr (cubic) model; `full()` keeps every order.
class NonlinearityOrder {
public:
    constexpr NonlinearityOrder() = default;

    static constexpr NonlinearityOrder full() { return NonlinearityOrder{}; }
    static NonlinearityOrder truncated(int terms);
    static constexpr NonlinearityOrder cubic() { return NonlinearityOrder{1}; }
    // "1", "2", ..., "inf".
    static NonlinearityOrder parse(const std::string& text);

    constexpr bool is_full() const { return terms_ == 0; }
    // Number of terms; only meaningful when !is_full().
    constexpr int terms() const { return terms_; }
    // Series cut-off understood by ratio_series (-1 = to convergence).
    constexpr int last_index(int first) const { return is_full() ? -1 : first + terms_ - 1; }

    std::string to_string() const;

    friend constexpr bool operator==(NonlinearityOrder, NonlinearityOrder) = default;

private:
    constexpr explicit NonlinearityOrder(int terms) : terms_(terms) {}
    int terms_ = 0;
};

// The rotating-wave kernels below are power series in the normalised photon
// number n. For the full order the real-argument forms use the Bessel closed
// forms; truncated orders sum the first N terms.

// S_N(n) = sum_{k=1..N} 2^{2k-1} (-n)^k / (k!(k+1)!);  S_inf = j1_ratio(n) - 1/2.
double detuning_term(double n, NonlinearityOrder order);

// Complex-argument continuation used by the doubled-phase-space signal model.
std::complex<double> detuning_term(std::complex<double> n, NonlinearityOrder order);

// d^k S / dn^k for k in [0, 3].
double detuning_derivative(double n, NonlinearityOrder order, int k);

// d(n S)/dn = sum 2^{2k-1} (-n)^k / (k!)^2;  full order: (J0(4 sqrt n) - 1) / 2.
double self_phase_kernel(double n, NonlinearityOrder order);

// -dS/dn = sum 2^{2k-1} (-n)^{k-1} / ((k-1)!(k+1)!);  full order: J2(4 sqrt n) / (2n).
double conjugate_kernel(double n, NonlinearityOrder order);

// sum 4^{k-1} (-n)^{k-1} / ((k-1)! k!);  full order: J1(4 sqrt n) / (2 sqrt n).
double quadratic_kernel(double n, NonlinearityOrder order);

// sum 4^{k-1} (-n)^{k-1} / ((k-1)!)^2;  full order: J0(4 sqrt n).
double cubic_kernel(double n, NonlinearityOrder order);

}  // namespace jpa
