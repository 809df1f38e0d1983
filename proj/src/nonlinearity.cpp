#include "jpa/nonlinearity.hpp"

#include <cmath>

#include "jpa/errors.hpp"

namespace jpa {

namespace {

void check_n(double n, const char* who) {
    if (!std::isfinite(n) || n < 0) throw DomainError(std::string(who) + ": n must be finite and >= 0");
}

// Below this n the Bessel closed forms are replaced by their series; the
// series is exact to rounding there and avoids 0/0.
constexpr double kSmallN = 1e-8;

}  // namespace

NonlinearityOrder NonlinearityOrder::truncated(int terms) {
    if (terms < 1) throw ValidationError("nonlinearity order must be >= 1");
    return NonlinearityOrder{terms};
}

NonlinearityOrder NonlinearityOrder::parse(const std::string& text) {
    if (text == "inf" || text == "infinity" || text == "full") return full();
    std::size_t used = 0;
    int value = 0;
    try {
        value = std::stoi(text, &used);
    } catch (const std::exception&) {
        throw ValidationError("invalid nonlinearity order '" + text + "'");
    }
    if (used != text.size()) throw ValidationError("invalid nonlinearity order '" + text + "'");
    return truncated(value);
}

std::string NonlinearityOrder::to_string() const {
    return is_full() ? std::string("inf") : std::to_string(terms_);
}

double detuning_term(double n, NonlinearityOrder order) {
    check_n(n, "detuning_term");
    if (order.is_full()) return j1_ratio(n) - 0.5;
    return ratio_series<double>(-n, 1.0, 1, order.last_index(1),
                                [](int k) { return 4.0 / (double(k) * (k + 1)); });
}

std::complex<double> detuning_term(std::complex<double> n, NonlinearityOrder order) {
    using C = std::complex<double>;
    if (order.is_full()) return j1_ratio_series(n) - 0.5;
    return ratio_series<C>(-n, 1.0, 1, order.last_index(1),
                           [](int k) { return 4.0 / (double(k) * (k + 1)); });
}

double detuning_derivative(double n, NonlinearityOrder order, int k) {
    check_n(n, "detuning_derivative");
    if (k < 0 || k > 3) throw DomainError("detuning_derivative: k must be in [0, 3]");
    if (k == 0) return detuning_term(n, order);
    if (k == 1) return -conjugate_kernel(n, order);
    // S = sum_j s_j n^j with s_j = (-1)^j 2^{2j-1} / (j!(j+1)!); differentiate termwise.
    const int last = order.is_full() ? 400 : order.terms();
    double coeff = -1.0;  // s_1
    double sum = 0.0;
    for (int j = 1; j <= last; ++j) {
        if (j > 1) coeff *= -4.0 / (double(j) * (j + 1));
        if (j < k) continue;
        double falling = 1.0;
        for (int i = 0; i < k; ++i) falling *= j - i;
        const double term = coeff * falling * std::pow(n, j - k);
        sum += term;
        if (order.is_full() && j > k + 2 && std::fabs(term) <= 1e-18 * std::fabs(sum)) break;
    }
    return sum;
}

double self_phase_kernel(double n, NonlinearityOrder order) {
    check_n(n, "self_phase_kernel");
    if (order.is_full() && n >= kSmallN) return 0.5 * (bessel_j(0, 4.0 * std::sqrt(n)) - 1.0);
    return ratio_series<double>(-n, 2.0, 1, order.last_index(1),
                                [](int k) { return 4.0 / (double(k) * k); });
}

double conjugate_kernel(double n, NonlinearityOrder order) {
    check_n(n, "conjugate_kernel");
    if (order.is_full() && n >= kSmallN) return bessel_j(2, 4.0 * std::sqrt(n)) / (2.0 * n);
    return ratio_series<double>(-n, 1.0, 0, order.last_index(0),
                                [](int j) { return 4.0 / (double(j) * (j + 2)); });
}

double quadratic_kernel(double n, NonlinearityOrder order) {
    check_n(n, "quadratic_kernel");
    if (order.is_full() && n >= kSmallN) return 2.0 * j1_ratio(n);
    return ratio_series<double>(-n, 1.0, 0, order.last_index(0),
                                [](int j) { return 4.0 / (double(j) * (j + 1)); });
}

double cubic_kernel(double n, NonlinearityOrder order) {
    check_n(n, "cubic_kernel");
    if (order.is_full() && n >= kSmallN) return bessel_j(0, 4.0 * std::sqrt(n));
    return ratio_series<double>(-n, 1.0, 0, order.last_index(0),
                                [](int j) { return 4.0 / (double(j) * j); });
}

}  // namespace jpa
