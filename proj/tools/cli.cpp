#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "io.hpp"
#include "jpa/classical_oracle.hpp"
#include "jpa/errors.hpp"
#include "jpa/linear_response.hpp"
#include "jpa/parallel.hpp"
#include "jpa/pump_steady_state.hpp"
#include "jpa/saturation_dynamics.hpp"

namespace jpa::cli {

namespace {

using json = nlohmann::json;
using io::Cell;
using io::Table;

constexpr double kUnset = 0.0;

struct Result {
    Table table;
    json summary = json::object();
    std::string line;
};

// Options shared by every subcommand.
struct Common {
    std::string device_path;
    std::string config_path;
    std::string out;
    std::string format = "csv";
    int threads = 0;
    double f0_hz = kUnset;
    double ic_a = kUnset;
    double q = kUnset;
};

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(text);
    while (std::getline(in, cur, sep)) {
        const auto b = cur.find_first_not_of(" \t");
        const auto e = cur.find_last_not_of(" \t");
        parts.push_back(b == std::string::npos ? "" : cur.substr(b, e - b + 1));
    }
    return parts;
}

double parse_double(const std::string& text, const std::string& what) {
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || *end != '\0') throw ValidationError(what + ": '" + text + "' is not a number");
    return v;
}

std::vector<double> parse_doubles(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const auto& p : split(text, ',')) out.push_back(parse_double(p, what));
    if (out.empty()) throw ValidationError(what + ": empty list");
    return out;
}

std::vector<NonlinearityOrder> parse_orders(const std::string& text) {
    std::vector<NonlinearityOrder> out;
    for (const auto& p : split(text, ',')) out.push_back(NonlinearityOrder::parse(p));
    if (out.empty()) throw ValidationError("orders: empty list");
    return out;
}

Eigen::VectorXd grid(double lo, double hi, int points, const std::string& what) {
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi) || points < 2)
        throw ValidationError(what + ": need min < max and at least 2 points");
    return Eigen::VectorXd::LinSpaced(points, lo, hi);
}

std::pair<double, double> omega_range(double lo, double hi, double q) {
    auto w = default_omega_window(q);
    if (lo != kUnset) w.first = lo;
    if (hi != kUnset) w.second = hi;
    return w;
}

json scalar_json(const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    if (s.empty()) return s;
    char* end = nullptr;
    const long long i = std::strtoll(s.c_str(), &end, 10);
    if (*end == '\0') return i;
    const double v = std::strtod(s.c_str(), &end);
    if (*end == '\0' && std::isfinite(v)) return v;
    return s;
}

std::string json_to_arg(const json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return io::format_double(v.get<double>());
    throw ValidationError("config: '" + key + "' must be a string, number or boolean");
}

std::string option_key(const CLI::Option* opt) {
    std::string key = opt->get_single_name();
    for (char& c : key)
        if (c == '-') c = '_';
    return key;
}

// Fill options not given on the command line from the JSON config.
void apply_config(CLI::App* sub, const json& cfg, json& device_block) {
    if (!cfg.is_object()) throw ValidationError("config: expected a JSON object");
    for (const auto& [key, value] : cfg.items()) {
        if (key == "device") {
            device_block = value;
            continue;
        }
        std::string flag = "--" + key;
        for (char& c : flag)
            if (c == '_') c = '-';
        CLI::Option* opt = key == "config" ? nullptr : sub->get_option_no_throw(flag);
        if (opt == nullptr) throw ValidationError("config: unknown key '" + key + "' for '" + sub->get_name() + "'");
        if (opt->count() > 0) continue;
        if (value.is_array()) {
            std::string joined;
            for (const auto& v : value) joined += (joined.empty() ? "" : ",") + json_to_arg(v, key);
            opt->add_result(joined);
        } else {
            opt->add_result(json_to_arg(value, key));
        }
        opt->run_callback();
    }
}

json resolved_options(const CLI::App* sub) {
    json out = json::object();
    for (const CLI::Option* opt : sub->get_options()) {
        const std::string key = option_key(opt);
        if (key.rfind("help", 0) == 0 || key == "config") continue;
        if (opt->count() > 0) {
            const auto results = opt->results();
            std::string joined;
            for (const auto& r : results) joined += (joined.empty() ? "" : ",") + r;
            out[key] = scalar_json(joined);
        } else {
            out[key] = scalar_json(opt->get_default_str());
        }
    }
    return out;
}

NonlinearityOrder model_order(SignalModel model, const std::string& text) {
    if (text == "auto")
        return (model == SignalModel::cubic || model == SignalModel::cubic_c3_only) ? NonlinearityOrder::cubic()
                                                                                     : NonlinearityOrder::full();
    return NonlinearityOrder::parse(text);
}

std::string fmt(double x, int digits = 6) {
    std::ostringstream os;
    os.precision(digits);
    os << x;
    return os.str();
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// ---------------------------------------------------------------- commands

struct Context {
    DerivedParams params;
    DeviceParams device;
    int threads = 0;
};

using Runner = std::function<Result(const Context&)>;

Runner add_steady(CLI::App* sub) {
    struct Opts {
        double r = 0.99, phase = 0.0, omega_min = kUnset, omega_max = kUnset;
        int omega_points = 401;
        std::string order = "inf";
    };
    auto o = std::make_shared<Opts>();
    sub->add_option("--r", o->r, "pump amplitude relative to the critical input")->capture_default_str();
    sub->add_option("--phase", o->phase, "pump phase (rad)")->capture_default_str();
    sub->add_option("--order", o->order, "nonlinearity order N (integer or inf)")->capture_default_str();
    sub->add_option("--omega-min", o->omega_min, "lowest pump frequency / omega0 (0: 1 - 2/Q)")->capture_default_str();
    sub->add_option("--omega-max", o->omega_max, "highest pump frequency / omega0 (0: 1 + 1/(2Q))")->capture_default_str();
    sub->add_option("--omega-points", o->omega_points)->capture_default_str();
    return [o](const Context& ctx) {
        const auto [lo, hi] = omega_range(o->omega_min, o->omega_max, ctx.params.q);
        const Eigen::VectorXd omegas = grid(lo, hi, o->omega_points, "omega grid");
        Result res;
        res.table.columns = {"omega_rel", "n", "stable", "re_alpha", "im_alpha", "re_s11", "im_s11"};
        std::vector<std::vector<SteadyState>> states(static_cast<std::size_t>(omegas.size()));
        const NonlinearityOrder order = NonlinearityOrder::parse(o->order);
        parallel_for(states.size(), ctx.threads, [&](std::size_t i) {
            states[i] = solve_photon_number(ctx.params, PumpDrive{o->r, omegas[Eigen::Index(i)], o->phase, order});
        });
        long long bistable = 0;
        for (std::size_t i = 0; i < states.size(); ++i) {
            const PumpDrive drive{o->r, omegas[Eigen::Index(i)], o->phase, order};
            if (states[i].size() > 1) ++bistable;
            for (const SteadyState& s : states[i]) {
                const auto s11 = reflection_s11(drive, s.n, ctx.params.q);
                res.table.add({drive.omega_rel, s.n, static_cast<long long>(s.stable), s.alpha.real(), s.alpha.imag(),
                               s11.real(), s11.imag()});
            }
        }
        res.summary = {{"points", omegas.size()}, {"rows", res.table.rows.size()}, {"multi_root_points", bistable}};
        res.line = "points=" + std::to_string(omegas.size()) + " rows=" + std::to_string(res.table.rows.size()) +
                   " multi_root_points=" + std::to_string(bistable);
        return res;
    };
}

Runner add_stability(CLI::App* sub) {
    struct Opts {
        double omega_min = kUnset, omega_max = kUnset, r_min = 0.9, r_max = 1.2;
        int omega_points = 201, r_points = 121;
        std::string order = "inf";
    };
    auto o = std::make_shared<Opts>();
    sub->add_option("--order", o->order)->capture_default_str();
    sub->add_option("--omega-min", o->omega_min)->capture_default_str();
    sub->add_option("--omega-max", o->omega_max)->capture_default_str();
    sub->add_option("--omega-points", o->omega_points)->capture_default_str();
    sub->add_option("--r-min", o->r_min)->capture_default_str();
    sub->add_option("--r-max", o->r_max)->capture_default_str();
    sub->add_option("--r-points", o->r_points)->capture_default_str();
    return [o](const Context& ctx) {
        const auto [lo, hi] = omega_range(o->omega_min, o->omega_max, ctx.params.q);
        const Eigen::VectorXd omegas = grid(lo, hi, o->omega_points, "omega grid");
        const Eigen::VectorXd rs = grid(o->r_min, o->r_max, o->r_points, "r grid");
        const NonlinearityOrder order = NonlinearityOrder::parse(o->order);
        const Eigen::MatrixXi counts = stability_diagram(ctx.params, omegas, rs, order, ctx.threads);
        Result res;
        res.table.columns = {"omega_rel", "r", "branch_count"};
        long long multi = 0;
        for (Eigen::Index i = 0; i < rs.size(); ++i)
            for (Eigen::Index j = 0; j < omegas.size(); ++j) {
                res.table.add({omegas[j], rs[i], static_cast<long long>(counts(i, j))});
                if (counts(i, j) > 1) ++multi;
            }
        const CuspPoint cusp = find_cusp(ctx.params, order);
        res.summary = {{"bistable_cells", multi},
                       {"cusp", {{"omega_rel", cusp.omega_rel}, {"r", cusp.r}, {"converged", cusp.converged}}}};
        res.line = "bistable_cells=" + std::to_string(multi) + " cusp_omega=" + fmt(cusp.omega_rel) +
                   " cusp_r=" + fmt(cusp.r);
        return res;
    };
}

Runner add_cusp(CLI::App* sub) {
    auto order = std::make_shared<std::string>("inf");
    sub->add_option("--order", *order)->capture_default_str();
    return [order](const Context& ctx) {
        const NonlinearityOrder n = NonlinearityOrder::parse(*order);
        const CuspPoint cusp = find_cusp(ctx.params, n);
        if (!cusp.converged) {
            std::ostringstream msg;
            msg << "find_cusp did not converge (residual " << cusp.residual << ")";
            throw ConsistencyError(msg.str());
        }
        Result res;
        res.table.columns = {"order", "omega_rel", "r", "n", "residual", "iterations"};
        res.table.add({n.to_string(), cusp.omega_rel, cusp.r, cusp.n, cusp.residual,
                       static_cast<long long>(cusp.iterations)});
        res.summary = {{"omega_rel", cusp.omega_rel}, {"r", cusp.r}, {"n", cusp.n}};
        res.line = "omega=" + fmt(cusp.omega_rel) + " r=" + fmt(cusp.r);
        return res;
    };
}

Runner add_lingain(CLI::App* sub) {
    struct Opts {
        double r = 0.99, delta = 0.0, omega_min = kUnset, omega_max = kUnset;
        int omega_points = 801;
        std::string orders = "1,2,3,inf", q_list;
    };
    auto o = std::make_shared<Opts>();
    sub->add_option("--r", o->r)->capture_default_str();
    sub->add_option("--delta", o->delta, "signal detuning from the pump / omega0")->capture_default_str();
    sub->add_option("--orders", o->orders)->capture_default_str();
    sub->add_option("--q-list", o->q_list, "comma-separated quality factors (default: device Q)")
        ->capture_default_str();
    sub->add_option("--omega-min", o->omega_min)->capture_default_str();
    sub->add_option("--omega-max", o->omega_max)->capture_default_str();
    sub->add_option("--omega-points", o->omega_points)->capture_default_str();
    return [o](const Context& ctx) {
        std::vector<double> qs =
            o->q_list.empty() ? std::vector<double>{ctx.device.q} : parse_doubles(o->q_list, "q-list");
        const auto orders = parse_orders(o->orders);
        Result res;
        res.table.columns = {"q", "order", "omega_rel", "n", "G_db", "re_g", "im_g", "re_m", "im_m"};
        json maxima = json::array();
        std::string line;
        for (double q : qs) {
            DeviceParams dev = ctx.device;
            dev.q = q;
            const DerivedParams params = derive(dev);
            const auto [lo, hi] = omega_range(o->omega_min, o->omega_max, q);
            const Eigen::VectorXd omegas = grid(lo, hi, o->omega_points, "omega grid");
            for (const NonlinearityOrder order : orders) {
                const PumpDrive drive{o->r, 1.0, 0.0, order};
                const GainCurve curve = gain_sweep(params, drive, omegas, o->delta, ctx.threads);
                for (const GainPoint& p : curve.points)
                    res.table.add({q, order.to_string(), p.omega_rel, p.n, p.G_db, p.g.real(), p.g.imag(),
                                   p.m.real(), p.m.imag()});
                const GainMaximum m = max_gain(curve);
                maxima.push_back({{"q", q}, {"order", order.to_string()}, {"omega_rel", m.omega_rel}, {"G_db", m.G_db}});
                line += (line.empty() ? "" : " ") + std::string("q=") + fmt(q) + ",N=" + order.to_string() +
                        ":G_max=" + fmt(m.G_db) + "@" + fmt(m.omega_rel, 8);
            }
        }
        res.summary = {{"maxima", maxima}};
        res.line = line;
        return res;
    };
}

// "order=1,r=0.99" -> drive
PumpDrive parse_target(const std::string& text) {
    PumpDrive d;
    d.r = std::numeric_limits<double>::quiet_NaN();
    for (const auto& part : split(text, ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos) throw ValidationError("target-from: expected key=value, got '" + part + "'");
        const std::string key = part.substr(0, eq), value = part.substr(eq + 1);
        if (key == "order") d.order = NonlinearityOrder::parse(value);
        else if (key == "r") d.r = parse_double(value, "target-from r");
        else throw ValidationError("target-from: unknown key '" + key + "' (order, r)");
    }
    if (std::isnan(d.r)) throw ValidationError("target-from: r is required");
    validate(d);
    return d;
}

Runner add_match_power(CLI::App* sub) {
    struct Opts {
        std::string target_from = "order=1,r=0.99", order = "inf";
        double target_db = std::numeric_limits<double>::quiet_NaN(), delta = 0.0;
        int omega_points = 801;
    };
    auto o = std::make_shared<Opts>();
    sub->add_option("--target-from", o->target_from, "reference pump setting whose maximal gain is matched")
        ->capture_default_str();
    sub->add_option("--target-db", o->target_db, "explicit target gain in dB (overrides --target-from)");
    sub->add_option("--order", o->order)->capture_default_str();
    sub->add_option("--delta", o->delta)->capture_default_str();
    sub->add_option("--omega-points", o->omega_points)->capture_default_str();
    return [o](const Context& ctx) {
        const auto window = default_omega_window(ctx.params.q);
        const Eigen::VectorXd omegas = grid(window.first, window.second, o->omega_points, "omega grid");
        const NonlinearityOrder order = NonlinearityOrder::parse(o->order);
        Result res;
        res.table.columns = {"role", "order", "r", "omega_rel", "n", "G_db"};
        auto add_profile = [&](const std::string& role, const PumpDrive& drive) {
            const GainCurve curve = gain_sweep(ctx.params, drive, omegas, o->delta, ctx.threads);
            for (const GainPoint& p : curve.points)
                res.table.add({role, drive.order.to_string(), drive.r, p.omega_rel, p.n, p.G_db});
            return max_gain(curve);
        };
        double target = o->target_db;
        if (std::isnan(target)) {
            const PumpDrive ref = parse_target(o->target_from);
            target = add_profile("target", ref).G_db;
        }
        const double r = match_pump_power(ctx.params, order, target, window, o->delta, o->omega_points);
        const GainMaximum m = add_profile("matched", PumpDrive{r, 1.0, 0.0, order});
        res.summary = {{"r", r}, {"order", order.to_string()}, {"target_db", target},
                       {"matched_db", m.G_db}, {"omega_rel", m.omega_rel}};
        res.line = "r=" + fmt(r) + " target_db=" + fmt(target) + " order=" + order.to_string();
        return res;
    };
}

struct SatOpts {
    std::string model = "full_sine", order = "auto";
    double r = 0.99, omega = kUnset, delta = 0.0;
    double a_min = kUnset, a_max = kUnset, a_min_rel = 1e-6, a_max_rel = 1.0;
    int points = 25;
    double dtau = 0.0, settle = 0.0, window = 0.0;
    bool conjugate_drive = false, remaximize = false, step_halving = true;
};

void add_sat_options(CLI::App* sub, SatOpts& o) {
    sub->add_option("--model", o.model, "cubic | cubic_c3_only | full_sine | linear")->capture_default_str();
    sub->add_option("--order", o.order, "pump order N (auto: 1 for cubic models, inf otherwise)")
        ->capture_default_str();
    sub->add_option("--r", o.r)->capture_default_str();
    sub->add_option("--omega", o.omega, "pump frequency / omega0 (0: small-signal max-gain frequency)")
        ->capture_default_str();
    sub->add_option("--delta", o.delta)->capture_default_str();
    sub->add_option("--a-min", o.a_min, "smallest input amplitude, sqrt(omega0) units (0: use --a-min-rel)")
        ->capture_default_str();
    sub->add_option("--a-max", o.a_max)->capture_default_str();
    sub->add_option("--a-min-rel", o.a_min_rel, "smallest input amplitude relative to the pump input")
        ->capture_default_str();
    sub->add_option("--a-max-rel", o.a_max_rel)->capture_default_str();
    sub->add_option("--points", o.points, "log-spaced amplitudes")->capture_default_str();
    sub->add_option("--dtau", o.dtau, "RK4 step (0: default rule)")->capture_default_str();
    sub->add_option("--settle", o.settle, "settle time (0: default rule)")->capture_default_str();
    sub->add_option("--window", o.window, "measurement window (0: default rule)")->capture_default_str();
    sub->add_option("--conjugate-drive", o.conjugate_drive, "drive the v equation with conj(a_in)")
        ->capture_default_str();
    sub->add_option("--remaximize", o.remaximize, "re-optimise the pump frequency at every amplitude")
        ->capture_default_str();
    sub->add_option("--step-halving", o.step_halving)->capture_default_str();
}

SaturationCurve run_saturation(const SatOpts& o, const DerivedParams& params, int threads) {
    const SignalModel model = parse_signal_model(o.model);
    PumpDrive drive{o.r, 1.0, 0.0, model_order(model, o.order)};
    validate(drive);
    drive.omega_rel = o.omega != kUnset ? o.omega : max_gain(params, drive, 0.0, {}, 801, threads).omega_rel;
    const double pump = o.r * params.alpha_in_crit_rel();
    const double lo = o.a_min != kUnset ? o.a_min : o.a_min_rel * pump;
    const double hi = o.a_max != kUnset ? o.a_max : o.a_max_rel * pump;
    if (o.points < 2) throw ValidationError("saturation: need at least 2 amplitudes");
    SaturationOptions opts;
    opts.sim.dtau = o.dtau;
    opts.sim.settle = o.settle;
    opts.sim.window = o.window;
    opts.sim.conjugate_drive = o.conjugate_drive;
    opts.sim.step_halving = o.step_halving;
    opts.remaximize_omega = o.remaximize;
    opts.threads = threads;
    return saturation_curve(model, params, drive, log_spaced(lo, hi, o.points), o.delta, opts);
}

Runner add_saturation(CLI::App* sub) {
    auto o = std::make_shared<SatOpts>();
    add_sat_options(sub, *o);
    return [o](const Context& ctx) {
        const SaturationCurve curve = run_saturation(*o, ctx.params, ctx.threads);
        Result res;
        res.table.columns = {"a_in_sqrt_w0", "a_in_flux", "G_db", "converged", "step_used"};
        for (const SaturationPoint& p : curve.points)
            res.table.add({p.a_in_mag, p.a_in_flux, p.G_db, static_cast<long long>(p.converged), p.step_used});
        const double w0 = ctx.params.omega0;
        auto flux = [&](const std::optional<double>& a) { return a ? json(*a * *a * w0) : json(nullptr); };
        long long unconverged = 0;
        for (const auto& p : curve.points) unconverged += p.converged ? 0 : 1;
        res.summary = {{"model", to_string(curve.model)},
                       {"order", curve.drive.order.to_string()},
                       {"r", curve.drive.r},
                       {"omega_rel", curve.drive.omega_rel},
                       {"delta", curve.delta},
                       {"G0_db", curve.G0_db},
                       {"linear_G_db", curve.linear_G_db},
                       {"p1db_sqrt_w0", optional_json(curve.p1db)},
                       {"p1db_flux", flux(curve.p1db)},
                       {"stiff_pump_marker_sqrt_w0", optional_json(curve.stiff_pump_marker)},
                       {"stiff_pump_marker_flux", flux(curve.stiff_pump_marker)},
                       {"pump_input_sqrt_w0", curve.pump_input},
                       {"pump_flux", curve.pump_flux},
                       {"unconverged_points", unconverged}};
        res.line = "p1db=" + (curve.p1db ? fmt(*curve.p1db) : std::string("none")) + " G0_db=" + fmt(curve.G0_db) +
                   " stiff_marker=" + (curve.stiff_pump_marker ? fmt(*curve.stiff_pump_marker) : std::string("none"));
        return res;
    };
}

Runner add_dynrange(CLI::App* sub) {
    struct Opts {
        SatOpts sat;
        std::string ratios = "-1,-10,-100";
    };
    auto o = std::make_shared<Opts>();
    o->sat.model = "cubic";
    o->sat.points = 21;
    add_sat_options(sub, o->sat);
    sub->add_option("--ratios", o->ratios, "omega0 / (K Q) values; Ic is adjusted at fixed f0 and Q")
        ->capture_default_str();
    return [o](const Context& ctx) {
        Result res;
        res.table.columns = {"kerr_q_ratio", "ic_a", "kerr_ratio", "omega_rel", "G0_db", "p1db_sqrt_w0",
                             "p1db_flux", "stiff_pump_marker_sqrt_w0"};
        const double nan = std::numeric_limits<double>::quiet_NaN();
        std::string line = "p1db:";
        json rows = json::array();
        for (double ratio : parse_doubles(o->ratios, "ratios")) {
            DeviceParams dev = ctx.device;
            dev.ic_a = critical_current_for_kerr_q_ratio(dev.f0_hz, dev.q, ratio);
            const DerivedParams params = derive(dev);
            const SaturationCurve curve = run_saturation(o->sat, params, ctx.threads);
            const double p1 = curve.p1db.value_or(nan);
            res.table.add({ratio, dev.ic_a, params.kerr_ratio, curve.drive.omega_rel, curve.G0_db, p1,
                           p1 * p1 * params.omega0, curve.stiff_pump_marker.value_or(nan)});
            rows.push_back({{"kerr_q_ratio", ratio}, {"p1db_sqrt_w0", optional_json(curve.p1db)}});
            line += " " + fmt(ratio) + "=" + (curve.p1db ? fmt(p1) : std::string("none"));
        }
        res.summary = {{"p1db", rows}};
        res.line = line;
        return res;
    };
}

Runner add_oracle(CLI::App* sub) {
    struct Opts {
        double r = 0.5, omega_min = 0.95, omega_max = 1.03, settle = 0.0, dtau = 0.0;
        int omega_points = 33, window_periods = 64;
    };
    auto o = std::make_shared<Opts>();
    sub->add_option("--r", o->r)->capture_default_str();
    sub->add_option("--omega-min", o->omega_min)->capture_default_str();
    sub->add_option("--omega-max", o->omega_max)->capture_default_str();
    sub->add_option("--omega-points", o->omega_points)->capture_default_str();
    sub->add_option("--dtau", o->dtau, "lab-frame step (0: 200 steps per period)")->capture_default_str();
    sub->add_option("--settle", o->settle, "settle time (0: 60 Q)")->capture_default_str();
    sub->add_option("--window-periods", o->window_periods)->capture_default_str();
    return [o](const Context& ctx) {
        const Eigen::VectorXd omegas = grid(o->omega_min, o->omega_max, o->omega_points, "omega grid");
        PhaseSimConfig sim;
        sim.dtau = o->dtau;
        sim.settle = o->settle;
        sim.window_periods = o->window_periods;
        const ResonanceComparison cmp = compare_resonance_curves(ctx.params, o->r, omegas, sim, ctx.threads);
        Result res;
        res.table.columns = {"omega_rel", "phi_a", "n_cl", "n_rwa", "rel_dev", "flags"};
        for (const ResonanceRow& row : cmp.rows) {
            std::string flags;
            if (row.period_doubling) flags = "period_doubling";
            if (row.non_periodic) flags += std::string(flags.empty() ? "" : "|") + "non_periodic";
            res.table.add({row.omega_rel, row.phi_a, row.n_cl, row.n_rwa, row.rel_dev, flags.empty() ? "none" : flags});
        }
        res.summary = {{"i_p", cmp.i_p}, {"max_rel_dev", cmp.max_rel_dev}, {"max_hb_dev", cmp.max_hb_dev},
                       {"flags", cmp.any_flags}};
        res.line = "max_rel_dev=" + fmt(cmp.max_rel_dev) + " max_hb_dev=" + fmt(cmp.max_hb_dev) +
                   " flags=" + (cmp.any_flags ? "1" : "0") + " i_p=" + fmt(cmp.i_p);
        return res;
    };
}

// ---------------------------------------------------------------- errors

std::string error_type(const std::exception& e) {
    if (dynamic_cast<const WindowError*>(&e)) return "WindowError";
    if (dynamic_cast<const DomainError*>(&e)) return "DomainError";
    if (dynamic_cast<const ValidationError*>(&e)) return "ValidationError";
    if (dynamic_cast<const DivergenceError*>(&e)) return "DivergenceError";
    if (dynamic_cast<const PoleError*>(&e)) return "PoleError";
    if (dynamic_cast<const UnattainableError*>(&e)) return "UnattainableError";
    if (dynamic_cast<const ConsistencyError*>(&e)) return "ConsistencyError";
    if (dynamic_cast<const NumericalAnomaly*>(&e)) return "NumericalAnomaly";
    if (dynamic_cast<const NumericalError*>(&e)) return "NumericalError";
    return "Error";
}

int report(std::ostream& err, int code, const std::string& command, const std::string& type,
           const std::string& message, const json& extra = json::object()) {
    json block{{"code", code},
               {"kind", code == kExitValidation ? "validation" : "numerical"},
               {"type", type},
               {"command", command},
               {"message", message}};
    for (const auto& [k, v] : extra.items()) block[k] = v;
    err << json{{"error", block}}.dump() << '\n';
    return code;
}

void write_outputs(const Common& c, const std::string& command, const json& metadata, const Result& res) {
    if (c.format != "csv" && c.format != "json") throw ValidationError("format must be csv or json");
    if (c.out.empty()) return;
    std::ofstream f(c.out, std::ios::binary);
    if (!f) throw ValidationError("cannot write '" + c.out + "'");
    if (c.format == "csv") io::write_csv(f, res.table, metadata);
    else io::write_json(f, res.table, metadata);
    if (!f) throw ValidationError("write to '" + c.out + "' failed");

    std::ofstream side(c.out + ".meta.json", std::ios::binary);
    if (!side) throw ValidationError("cannot write '" + c.out + ".meta.json'");
    json meta = metadata;
    meta["command"] = command;
    side << meta.dump(2) << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Josephson parametric amplifier studies"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    Common common;
    std::map<std::string, Runner> runners;
    auto add = [&](const std::string& name, const std::string& description, Runner (*make)(CLI::App*)) {
        CLI::App* sub = app.add_subcommand(name, description);
        sub->add_option("--device", common.device_path, "device JSON {\"f0_hz\", \"ic_a\", \"q\"}");
        sub->add_option("--config", common.config_path, "JSON object with option values (keys use '_')");
        sub->add_option("--out", common.out, "output file (a .meta.json sidecar is written next to it)");
        sub->add_option("--format", common.format, "csv | json")->capture_default_str();
        sub->add_option("--threads", common.threads, "worker cap (0: JPA_THREADS or all cores)")
            ->capture_default_str();
        sub->add_option("--f0-hz", common.f0_hz, "override device f0")->capture_default_str();
        sub->add_option("--ic-a", common.ic_a, "override device critical current")->capture_default_str();
        sub->add_option("--q", common.q, "override device Q")->capture_default_str();
        runners[name] = make(sub);
    };
    add("steady", "pump steady states along a pump-frequency sweep", add_steady);
    add("stability", "branch count over an (omega, r) grid", add_stability);
    add("cusp", "onset of bistability", add_cusp);
    add("lingain", "small-signal gain versus pump frequency", add_lingain);
    add("match-power", "pump amplitude matching a target maximal gain", add_match_power);
    add("saturation", "large-signal gain versus input amplitude", add_saturation);
    add("dynrange", "1 dB compression point versus omega0 / (K Q)", add_dynrange);
    add("oracle", "lab-frame pendulum versus rotating-frame steady state", add_oracle);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        return report(err, kExitValidation, "", "ParseError", e.what());
    }

    CLI::App* sub = app.get_subcommands().front();
    const std::string command = sub->get_name();
    try {
        json device_block;
        if (!common.config_path.empty()) apply_config(sub, io::read_json_file(common.config_path), device_block);

        DeviceParams device{7e9, 2e-6, 30.0};
        if (!common.device_path.empty()) device = io::device_from_json(io::read_json_file(common.device_path));
        else if (!device_block.is_null()) device = io::device_from_json(device_block);
        if (common.f0_hz != kUnset) device.f0_hz = common.f0_hz;
        if (common.ic_a != kUnset) device.ic_a = common.ic_a;
        if (common.q != kUnset) device.q = common.q;
        validate(device);
        if (common.threads < 0) throw ValidationError("threads must be >= 0");

        Context ctx{derive(device), device, resolve_threads(common.threads)};
        const Result res = runners.at(command)(ctx);

        json config = resolved_options(sub);
        for (const char* k : {"device", "out", "format", "threads", "f0_hz", "ic_a", "q"}) config.erase(k);
        const json metadata{{"command", command},
                            {"device", io::device_to_json(device)},
                            {"derived", io::derived_to_json(ctx.params)},
                            {"config", config},
                            {"summary", res.summary}};
        write_outputs(common, command, metadata, res);
        out << res.line << '\n';
        return kExitOk;
    } catch (const ValidationError& e) {
        return report(err, kExitValidation, command, error_type(e), e.what());
    } catch (const DivergenceError& e) {
        return report(err, kExitNumerical, command, error_type(e), e.what(), {{"tau", e.blowup_time()}});
    } catch (const NumericalError& e) {
        return report(err, kExitNumerical, command, error_type(e), e.what());
    } catch (const std::exception& e) {
        return report(err, kExitNumerical, command, error_type(e), e.what());
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return run(args, std::cout, std::cerr);
}

}  // namespace jpa::cli
