#include "jpa/pump_steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include <Eigen/Dense>

#include "jpa/errors.hpp"
#include "jpa/parallel.hpp"

namespace jpa {

namespace {

using cd = std::complex<double>;

const double kSqrt27 = std::sqrt(27.0);

double drive_level(double q, double r) { return r * r / (kSqrt27 * q * q * q); }

// S, S', S'' on the fixed scan grid. Independent of Q, Omega and r, so one
// table per nonlinearity order serves every solve.
struct ScanTable {
    std::vector<double> n, s, s1, s2;
};

std::vector<double> scan_grid() {
    constexpr int kGeometric = 1000;
    constexpr int kLinear = 3000;
    constexpr double kLow = 1e-9;
    constexpr double kKnee = 1e-2;
    std::vector<double> g;
    g.reserve(kGeometric + kLinear + 1);
    g.push_back(0.0);
    for (int i = 0; i < kGeometric; ++i)
        g.push_back(kLow * std::pow(kKnee / kLow, double(i) / kGeometric));
    for (int i = 0; i < kLinear; ++i)
        g.push_back(kKnee + (kMaxPhotonNumber - kKnee) * double(i) / (kLinear - 1));
    return g;
}

std::shared_ptr<const ScanTable> scan_table(NonlinearityOrder order) {
    static std::mutex mutex;
    static std::map<int, std::shared_ptr<const ScanTable>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[order.is_full() ? 0 : order.terms()];
    if (!slot) {
        auto table = std::make_shared<ScanTable>();
        table->n = scan_grid();
        for (double n : table->n) {
            table->s.push_back(detuning_derivative(n, order, 0));
            table->s1.push_back(detuning_derivative(n, order, 1));
            table->s2.push_back(detuning_derivative(n, order, 2));
        }
        slot = std::move(table);
    }
    return slot;
}

struct ResponseParts {
    double f, f1, f2;
};

// F and its derivatives from the detuning kernel and its derivatives.
ResponseParts response_parts(double n, double s, double s1, double s2, double q, double delta,
                             double level) {
    const double eps = 1.0 / (4.0 * q * q);
    const double y = delta + s;
    return {n * (eps + y * y) - level, eps + y * y + 2.0 * n * y * s1,
            4.0 * y * s1 + 2.0 * n * s1 * s1 + 2.0 * n * y * s2};
}

template <typename Fn>
double bisect(Fn&& f, double lo, double hi) {
    const bool lo_positive = f(lo) > 0.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if ((f(mid) > 0.0) == lo_positive)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

void validate(const PumpDrive& drive) {
    if (!std::isfinite(drive.r) || drive.r < 0.0) throw ValidationError("drive: r must be finite and >= 0");
    if (!std::isfinite(drive.omega_rel) || drive.omega_rel <= 0.0)
        throw ValidationError("drive: omega_rel must be finite and > 0");
    if (!std::isfinite(drive.phase)) throw ValidationError("drive: phase must be finite");
}

double response_function(double n, double q, const PumpDrive& drive) {
    const double eps = 1.0 / (4.0 * q * q);
    const double y = 1.0 - drive.omega_rel + detuning_term(n, drive.order);
    return n * (eps + y * y) - drive_level(q, drive.r);
}

double response_slope(double n, double q, const PumpDrive& drive) {
    return response_parts(n, detuning_term(n, drive.order), detuning_derivative(n, drive.order, 1), 0.0,
                          q, 1.0 - drive.omega_rel, drive_level(q, drive.r))
        .f1;
}

double response_curvature(double n, double q, const PumpDrive& drive) {
    return response_parts(n, detuning_term(n, drive.order), detuning_derivative(n, drive.order, 1),
                          detuning_derivative(n, drive.order, 2), q, 1.0 - drive.omega_rel,
                          drive_level(q, drive.r))
        .f2;
}

std::vector<SteadyState> solve_photon_number(const DerivedParams& params, const PumpDrive& drive) {
    validate(drive);
    const double q = params.q;
    if (drive.r == 0.0) return {SteadyState{0.0, cd{}, true, 1}};

    const auto table = scan_table(drive.order);
    const double delta = 1.0 - drive.omega_rel;
    const double level = drive_level(q, drive.r);
    auto F = [&](double n) { return response_function(n, q, drive); };
    auto F1 = [&](double n) { return response_slope(n, q, drive); };
    auto F2 = [&](double n) { return response_curvature(n, q, drive); };
    auto at = [&](std::size_t i) {
        return response_parts(table->n[i], table->s[i], table->s1[i], table->s2[i], q, delta, level);
    };

    std::vector<double> roots;
    ResponseParts left = at(0);
    for (std::size_t i = 0; i + 1 < table->n.size(); ++i) {
        const ResponseParts right = at(i + 1);
        const double a = table->n[i];
        const double b = table->n[i + 1];
        // Split the cell at interior extrema of F so each piece is monotone.
        std::vector<double> cuts{a};
        if ((left.f1 > 0.0) != (right.f1 > 0.0)) {
            cuts.push_back(bisect(F1, a, b));
        } else if ((left.f2 > 0.0) != (right.f2 > 0.0)) {
            const double inflection = bisect(F2, a, b);
            if ((F1(inflection) > 0.0) != (left.f1 > 0.0)) {
                cuts.push_back(bisect(F1, a, inflection));
                cuts.push_back(bisect(F1, inflection, b));
            }
        }
        cuts.push_back(b);
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
            const double fa = k == 0 ? left.f : F(cuts[k]);
            const double fb = k + 2 == cuts.size() ? right.f : F(cuts[k + 1]);
            if ((fa > 0.0) != (fb > 0.0)) roots.push_back(bisect(F, cuts[k], cuts[k + 1]));
        }
        left = right;
    }
    if (!(left.f > 0.0))
        throw NumericalAnomaly("solve_photon_number: response not closed at n_max = " +
                               std::to_string(kMaxPhotonNumber));
    if (roots.size() > 3)
        throw NumericalAnomaly("solve_photon_number: " + std::to_string(roots.size()) +
                               " roots found (at most 3 expected)");

    // A root found twice or three times within rounding is a degenerate
    // (fold or cusp) solution: report it once as marginal.
    const int branch_count = roots.size() == 1 ? 1 : 3;
    const double eps = 1.0 / (4.0 * q * q);
    std::vector<SteadyState> states;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const double n = roots[i];
        bool merged = false;
        while (i + 1 < roots.size() && roots[i + 1] - roots[i] < 1e-5 * std::max(roots[i], 1e-12)) {
            ++i;
            merged = true;
        }
        SteadyState s;
        s.n = merged ? 0.5 * (n + roots[i]) : n;
        s.stable = !merged && F1(s.n) > 1e-6 * eps;
        s.branch_count = branch_count;
        s.alpha = pump_amplitude(params, drive, s.n);
        states.push_back(s);
    }
    return states;
}

const SteadyState& operating_point(const std::vector<SteadyState>& states) {
    for (const auto& s : states)
        if (s.stable) return s;
    throw NumericalError("operating_point: no stable steady state");
}

SteadyState solve_operating_point(const DerivedParams& params, const PumpDrive& drive) {
    return operating_point(solve_photon_number(params, drive));
}

cd pump_amplitude(const DerivedParams& params, const PumpDrive& drive, double n) {
    validate(drive);
    if (drive.r == 0.0) return {};
    const double q = params.q;
    const double d = 1.0 - drive.omega_rel + detuning_term(n, drive.order);
    const cd input = drive.r * std::polar(params.alpha_in_crit_rel(), drive.phase);
    const cd alpha = input / (std::sqrt(q) * cd(0.5 / q, d));
    const double implied = std::norm(alpha) * (-params.kerr_ratio);
    if (std::fabs(implied - n) > 1e-6 * std::max(n, implied)) {
        std::ostringstream msg;
        msg << "pump_amplitude: n = " << n << " inconsistent with drive (implies " << implied << ")";
        throw ConsistencyError(msg.str());
    }
    return alpha;
}

cd reflection_s11(const PumpDrive& drive, double n, double q) {
    validate(drive);
    if (!std::isfinite(q) || q <= 0.0) throw ValidationError("reflection_s11: q must be > 0");
    const double qd = q * (1.0 - drive.omega_rel + detuning_term(n, drive.order));
    return cd(0.5, -qd) / cd(0.5, qd);
}

Eigen::MatrixXi stability_diagram(const DerivedParams& params, const Eigen::VectorXd& omega_grid,
                                  const Eigen::VectorXd& r_grid, NonlinearityOrder order, int threads) {
    for (Eigen::Index i = 0; i < omega_grid.size(); ++i)
        if (!std::isfinite(omega_grid[i]) || (i > 0 && omega_grid[i] <= omega_grid[i - 1]))
            throw ValidationError("stability_diagram: omega grid must be finite and increasing");
    for (Eigen::Index i = 0; i < r_grid.size(); ++i)
        if (!std::isfinite(r_grid[i]) || (i > 0 && r_grid[i] <= r_grid[i - 1]))
            throw ValidationError("stability_diagram: r grid must be finite and increasing");

    Eigen::MatrixXi counts(r_grid.size(), omega_grid.size());
    const auto cols = static_cast<std::size_t>(omega_grid.size());
    parallel_for(static_cast<std::size_t>(counts.size()), resolve_threads(threads), [&](std::size_t k) {
        const auto row = static_cast<Eigen::Index>(k / cols);
        const auto col = static_cast<Eigen::Index>(k % cols);
        const PumpDrive drive{r_grid[row], omega_grid[col], 0.0, order};
        auto where = [&] {
            std::ostringstream s;
            s.precision(17);
            s << " at cell (omega_rel=" << drive.omega_rel << ", r=" << drive.r << ")";
            return s.str();
        };
        try {
            counts(row, col) = solve_photon_number(params, drive).front().branch_count;
        } catch (const NumericalAnomaly& e) {
            throw NumericalAnomaly(e.what() + where());
        } catch (const NumericalError& e) {
            throw NumericalError(e.what() + where());
        } catch (const ValidationError& e) {
            throw ValidationError(e.what() + where());
        }
    });
    return counts;
}

CuspPoint find_cusp(const DerivedParams& params, NonlinearityOrder order) {
    const double q = params.q;
    if (!std::isfinite(q) || q <= 0.0) throw ValidationError("find_cusp: q must be > 0");
    const double eps = 1.0 / (4.0 * q * q);

    // Unknowns (n, delta = 1 - Omega): dF/dn = 0 and d2F/dn2 = 0 do not involve r.
    struct Eval {
        Eigen::Vector2d g;
        Eigen::Matrix2d jac;
    };
    auto evaluate = [&](const Eigen::Vector2d& x) {
        const double n = x[0];
        const double s = detuning_derivative(n, order, 0);
        const double s1 = detuning_derivative(n, order, 1);
        const double s2 = detuning_derivative(n, order, 2);
        const double s3 = detuning_derivative(n, order, 3);
        const double y = x[1] + s;
        Eval e;
        e.g << eps + y * y + 2.0 * n * y * s1, 4.0 * y * s1 + 2.0 * n * s1 * s1 + 2.0 * n * y * s2;
        e.jac << e.g[1], 2.0 * y + 2.0 * n * s1,
            6.0 * s1 * s1 + 6.0 * y * s2 + 6.0 * n * s1 * s2 + 2.0 * n * y * s3, 4.0 * s1 + 2.0 * n * s2;
        return e;
    };
    // Scale both residuals to O(1) so the merit function weighs them evenly.
    const Eigen::Vector2d scale(1.0 / eps, 1.0 / std::sqrt(eps));
    auto merit = [&](const Eval& e) { return e.g.cwiseProduct(scale).norm(); };

    // Exact cusp of the cubic model as the starting point.
    Eigen::Vector2d x(1.0 / (std::sqrt(3.0) * q), std::sqrt(3.0) / (2.0 * q));
    Eval current = evaluate(x);
    CuspPoint out;
    for (int it = 0; it < 100; ++it) {
        out.iterations = it + 1;
        if (merit(current) < 1e-13) break;
        const Eigen::Vector2d step = current.jac.partialPivLu().solve(-current.g);
        double lambda = 1.0;
        Eigen::Vector2d trial = x;
        Eval next = current;
        for (int halving = 0; halving < 40; ++halving, lambda *= 0.5) {
            trial = x + lambda * step;
            if (trial[0] <= 0.0) continue;
            next = evaluate(trial);
            if (merit(next) < merit(current)) break;
        }
        const bool stalled = (trial - x).norm() <= 1e-16 * x.norm();
        x = trial;
        current = next;
        if (stalled) break;
    }

    const double n = x[0];
    const double y = x[1] + detuning_derivative(n, order, 0);
    out.n = n;
    out.omega_rel = 1.0 - x[1];
    out.r = std::sqrt(kSqrt27 * q * q * q * n * (eps + y * y));
    out.residual = current.g.cwiseAbs().maxCoeff();
    out.converged = out.residual < 1e-10 && std::isfinite(out.r);
    return out;
}

}  // namespace jpa
