#pragma once

/**
 * @file functional.hpp
 * @brief Causal functionals, numeric horizontal/vertical derivatives and continuity probes.
 */

#include "partition.hpp"
#include "path.hpp"
#include "stopped.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace pathcalc {

enum class FunctionalClass { generic, C12, classS, classM };

inline const char* to_string(FunctionalClass c) {
    switch (c) {
    case FunctionalClass::generic: return "generic";
    case FunctionalClass::C12: return "C12";
    case FunctionalClass::classS: return "classS";
    case FunctionalClass::classM: return "classM";
    }
    return "?";
}

/// Ambient partition used when a path-dependent functional is evaluated on a raw path.
struct EvalContext {
    std::optional<Partition> grid;
};

using ScalarEval = std::function<double(const StoppedPath&, const EvalContext&)>;
using VectorEval = std::function<Vector(const StoppedPath&, const EvalContext&)>;
using MatrixEval = std::function<Matrix(const StoppedPath&, const EvalContext&)>;

/// F(t, x_t) with optional analytic derivatives. Only the stopped view is ever passed in.
struct Functional {
    std::string name;
    ScalarEval value;
    ScalarEval dt;   ///< horizontal derivative
    VectorEval grad; ///< vertical gradient
    MatrixEval hess; ///< vertical Hessian
    FunctionalClass declared = FunctionalClass::generic;

    double operator()(const StoppedPath& y, const EvalContext& ctx) const { return value(y, ctx); }
    double operator()(const StoppedPath& y) const { return value(y, EvalContext{}); }
};

/// Vector-valued causal functional used as an integrand phi(t, x_{t-}).
struct Integrand {
    std::string name;
    VectorEval value;

    Vector operator()(const StoppedPath& y, const EvalContext& ctx) const { return value(y, ctx); }
};

/// Integrand phi = grad F (analytic if attached).
inline Integrand gradient_integrand(const Functional& f) {
    if (!f.grad) throw PreconditionError("functional '" + f.name + "' has no analytic vertical gradient");
    return {"grad(" + f.name + ")", f.grad};
}

inline Integrand constant_integrand(const Vector& c) {
    return {"const", [c](const StoppedPath&, const EvalContext&) { return c; }};
}

/// k-th gradient component as a functional (e.g. to probe its causality).
inline Functional gradient_component(const Functional& f, int k) {
    if (!f.grad) throw PreconditionError("functional '" + f.name + "' has no analytic vertical gradient");
    Functional g;
    g.name = "grad_" + std::to_string(k) + "(" + f.name + ")";
    auto grad = f.grad;
    g.value = [grad, k](const StoppedPath& y, const EvalContext& c) { return grad(y, c)(k); };
    return g;
}

// ---------------------------------------------------------------------------
// numeric derivatives

inline std::vector<double> default_steps() {
    std::vector<double> h;
    for (int k = 4; k <= 12; ++k) h.push_back(std::ldexp(1.0, -k));
    return h;
}

struct DerivativeOptions {
    std::vector<double> steps = default_steps();
    double tol = 1e-7; ///< successive extrapolants must differ by less than tol * max(1, |value|)
};

template <class T>
struct Estimate {
    T value;
    Verdict verdict;
    std::vector<T> extrapolants;
};

namespace detail {

inline double max_abs(double v) { return std::abs(v); }
inline double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }
inline double max_abs(const Matrix& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

/// Richardson extrapolation of raw estimates with error expansion in h^order.
template <class T>
Estimate<T> richardson(const std::vector<T>& raw, const std::vector<double>& h, int order, double tol) {
    require(raw.size() >= 2, "derivative schedule needs at least two steps");
    Estimate<T> out{raw.back(), Verdict::diverged, {}};
    for (std::size_t k = 0; k + 1 < raw.size(); ++k) {
        const double r = std::pow(h[k] / h[k + 1], order);
        T e = (r * raw[k + 1] - raw[k]) / (r - 1.0);
        out.extrapolants.push_back(e);
        const std::size_t n = out.extrapolants.size();
        if (n >= 2) {
            const T& prev = out.extrapolants[n - 2];
            const T diff = e - prev;
            if (max_abs(diff) < tol * std::max(1.0, max_abs(e))) {
                out.value = e;
                out.verdict = Verdict::converged;
                return out;
            }
        }
        out.value = e;
    }
    return out;
}

inline Vector unit(int m, int k) {
    Vector e = zero_vector(m);
    e(k) = 1.0;
    return e;
}

} // namespace detail

/// Forward differences (F(tau+h, y) - F(tau, y)) / h, path frozen.
inline Estimate<double> horizontal_derivative(const Functional& f, const StoppedPath& y, const EvalContext& ctx,
                                              const DerivativeOptions& opt = {}) {
    const double hmax = *std::max_element(opt.steps.begin(), opt.steps.end());
    detail::require(y.time() + hmax <= y.horizon(), "t + max h exceeds the horizon");
    const double f0 = f(y, ctx);
    std::vector<double> raw;
    for (double h : opt.steps) raw.push_back((f(y.advanced(h), ctx) - f0) / h);
    return detail::richardson(raw, opt.steps, 1, opt.tol);
}

/// Central differences of e -> F(t, y + e 1_{[t, inf)}).
inline Estimate<Vector> vertical_derivative(const Functional& f, const StoppedPath& y, const EvalContext& ctx,
                                            const DerivativeOptions& opt = {}) {
    const int m = y.dimension();
    std::vector<Vector> raw;
    for (double h : opt.steps) {
        Vector d(m);
        for (int k = 0; k < m; ++k) {
            const Vector e = h * detail::unit(m, k);
            d(k) = (f(y.bumped(e), ctx) - f(y.bumped(-e), ctx)) / (2 * h);
        }
        raw.push_back(d);
    }
    return detail::richardson(raw, opt.steps, 2, opt.tol);
}

inline Estimate<Matrix> vertical_hessian(const Functional& f, const StoppedPath& y, const EvalContext& ctx,
                                         const DerivativeOptions& opt = {}) {
    const int m = y.dimension();
    const double f0 = f(y, ctx);
    std::vector<Matrix> raw;
    for (double h : opt.steps) {
        Matrix d(m, m);
        for (int a = 0; a < m; ++a) {
            const Vector ea = h * detail::unit(m, a);
            d(a, a) = (f(y.bumped(ea), ctx) - 2 * f0 + f(y.bumped(-ea), ctx)) / (h * h);
            for (int b = a + 1; b < m; ++b) {
                const Vector eb = h * detail::unit(m, b);
                d(a, b) = d(b, a) = (f(y.bumped(ea + eb), ctx) - f(y.bumped(ea - eb), ctx) -
                                     f(y.bumped(eb - ea), ctx) + f(y.bumped(-ea - eb), ctx)) /
                                    (4 * h * h);
            }
        }
        raw.push_back(d);
    }
    return detail::richardson(raw, opt.steps, 2, opt.tol);
}

struct CausalityProbe {
    bool invariant;       ///< F(t, y + e 1) == F(t, y) for all sampled e
    bool zero_derivative; ///< numeric vertical derivative vanishes
    bool strictly_causal() const { return invariant && zero_derivative; }
    bool consistent() const { return invariant == zero_derivative; }
};

inline CausalityProbe strict_causality_probe(const Functional& f, const StoppedPath& y, const EvalContext& ctx,
                                             const std::vector<double>& bumps, double tol = 1e-9) {
    detail::require(!bumps.empty(), "causality probe needs at least one bump");
    const int m = y.dimension();
    const double f0 = f(y, ctx);
    const double scale = std::max(1.0, std::abs(f0));
    CausalityProbe p{true, true};
    for (double e : bumps)
        for (int k = 0; k < m; ++k)
            if (std::abs(f(y.bumped(e * detail::unit(m, k)), ctx) - f0) > tol * scale) p.invariant = false;
    const auto d = vertical_derivative(f, y, ctx);
    p.zero_derivative = d.value.cwiseAbs().maxCoeff() <= 1e-6 * scale;
    return p;
}

// ---------------------------------------------------------------------------
// continuity probes

enum class CriterionStatus { pass, fail, not_applicable };

inline const char* to_string(CriterionStatus s) {
    switch (s) {
    case CriterionStatus::pass: return "pass";
    case CriterionStatus::fail: return "fail";
    case CriterionStatus::not_applicable: return "n/a";
    }
    return "?";
}

struct CriterionResult {
    std::string label;
    std::vector<double> abscissa; ///< level n or approach step h
    std::vector<double> values;
    std::vector<double> times;    ///< t_n or s used for each value
    double limit = NAN;           ///< value at the finest sample
    double target = NAN;
    CriterionStatus status = CriterionStatus::not_applicable;
};

struct ContinuityReport {
    std::array<CriterionResult, 8> criteria;
    double tol;

    const CriterionResult& at(const std::string& label) const {
        for (const auto& c : criteria)
            if (c.label == label) return c;
        throw InvalidArgument("unknown criterion label '" + label + "'");
    }
    bool all_pass() const {
        for (const auto& c : criteria)
            if (c.status == CriterionStatus::fail) return false;
        return true;
    }
};

struct ContinuityOptions {
    std::vector<double> approach; ///< steps h for the s -> t criteria; default 2^-k, k = 4..24
    double tol = 0.05;
};

/**
 * Samples the eight sequential criteria of the pi-topology at (t, x).
 * Group 1 targets F(t, x_{t-}); group 2 targets F(t, x_t). Sequences used:
 *   1(a) s = t - h on x_{s-}      1(b) s = t - h on x_s
 *   1(c) t_n = t'_n on x^n_{t_n-}  1(d) t_n = t'_n - mesh/2 on x^n_{t_n} (n/a when t'_n = 0)
 *   2(a) s = t + h on x_s         2(b) s = t + h on x_{s-}
 *   2(c) t_n = t on x^n_{t_n}      2(d) t_n = t on x^n_{t_n-}
 * Raw-path evaluations use the finest level of `seq` as ambient partition.
 */
inline ContinuityReport pi_continuity_report(const Functional& f, const CadlagPath& x, double t,
                                             const PartitionSequence& seq, ContinuityOptions opt = {}) {
    detail::require(t > 0.0 && t < x.horizon(), "continuity point must lie in (0, T)");
    if (opt.approach.empty())
        for (int k = 4; k <= 24; ++k) opt.approach.push_back(std::ldexp(x.horizon(), -k));
    const EvalContext ctx{seq.top()};
    const double left_target = f(StoppedPath::raw(x, t, true), ctx);
    const double right_target = f(StoppedPath::raw(x, t, false), ctx);
    ContinuityReport rep{};
    rep.tol = opt.tol;
    const char* labels[8] = {"1(a)", "1(b)", "1(c)", "1(d)", "2(a)", "2(b)", "2(c)", "2(d)"};
    for (int c = 0; c < 8; ++c) {
        auto& r = rep.criteria[c];
        r.label = labels[c];
        r.target = c < 4 ? left_target : right_target;
    }
    for (double h : opt.approach) {
        if (t - h > 0.0) {
            rep.criteria[0].abscissa.push_back(h);
            rep.criteria[0].times.push_back(t - h);
            rep.criteria[0].values.push_back(f(StoppedPath::raw(x, t - h, true), ctx));
            rep.criteria[1].abscissa.push_back(h);
            rep.criteria[1].times.push_back(t - h);
            rep.criteria[1].values.push_back(f(StoppedPath::raw(x, t - h, false), ctx));
        }
        if (t + h <= x.horizon()) {
            rep.criteria[4].abscissa.push_back(h);
            rep.criteria[4].times.push_back(t + h);
            rep.criteria[4].values.push_back(f(StoppedPath::raw(x, t + h, false), ctx));
            rep.criteria[5].abscissa.push_back(h);
            rep.criteria[5].times.push_back(t + h);
            rep.criteria[5].values.push_back(f(StoppedPath::raw(x, t + h, true), ctx));
        }
    }
    for (int n : seq.level_numbers()) {
        const Partition& p = seq.level(n);
        const double tp = p.prev_point(t);
        auto push = [&](int c, double tn, bool left) {
            rep.criteria[c].abscissa.push_back(n);
            rep.criteria[c].times.push_back(tn);
            rep.criteria[c].values.push_back(f(StoppedPath::pc(x, p, tn, left), ctx));
        };
        push(2, tp, true);
        if (tp > 0.0) {
            double below = p[p.count_below(tp) - 1];
            push(3, 0.5 * (below + tp), false);
        }
        push(6, t, false);
        push(7, t, true);
    }
    for (auto& r : rep.criteria) {
        if (r.values.empty()) continue;
        r.limit = r.values.back();
        const double scale = std::max(1.0, std::abs(r.target));
        r.status = std::abs(r.limit - r.target) <= opt.tol * scale ? CriterionStatus::pass : CriterionStatus::fail;
    }
    return rep;
}

struct UContinuityProbe {
    bool passed;
    double worst_final_gap;        ///< max over directions of |F(t_k, y_k) - F(t, x_t)| at the finest delta
    std::vector<std::vector<double>> gaps; ///< per direction, per delta
};

/**
 * Sequences converging uniformly to x_t: y = x_t + delta h for h in {constant, ramp s/T, bump at t}
 * and the horizontal sequence (t + delta, x_{t+delta}).
 */
inline UContinuityProbe u_continuity_probe(const Functional& f, const CadlagPath& x, double t, const EvalContext& ctx,
                                           double tol = 1e-6) {
    const double T = x.horizon();
    const int m = x.dimension();
    const Vector ones = Vector::Ones(m);
    const auto xt = stop(x, t);
    const double target = f(StoppedPath::raw(x, t), ctx);
    std::vector<CadlagPath> dirs{constant_path(ones, T),
                                 piecewise_linear(std::vector<double>{0.0, T}, std::vector<Vector>{zero_vector(m), ones}),
                                 step_path({{t > 0.0 ? t : T, ones}}, T, zero_vector(m))};
    UContinuityProbe out{true, 0.0, {}};
    for (const auto& h : dirs) {
        std::vector<double> g;
        for (int k = 4; k <= 30; k += 2) {
            const double d = std::ldexp(1.0, -k);
            const auto y = combine(1.0, xt, d, h);
            g.push_back(std::abs(f(StoppedPath::raw(y, t), ctx) - target));
        }
        out.worst_final_gap = std::max(out.worst_final_gap, g.back());
        out.gaps.push_back(std::move(g));
    }
    std::vector<double> g;
    for (int k = 4; k <= 30; k += 2) {
        const double d = std::ldexp(T, -k);
        if (t + d > T) continue;
        g.push_back(std::abs(f(StoppedPath::raw(x, t + d), ctx) - target));
    }
    if (!g.empty()) {
        out.worst_final_gap = std::max(out.worst_final_gap, g.back());
        out.gaps.push_back(std::move(g));
    }
    out.passed = out.worst_final_gap <= tol * std::max(1.0, std::abs(target));
    return out;
}

/// (delta, omega(delta)) pairs, monotone envelope applied.
inline std::vector<std::pair<double, double>> vertical_modulus_estimate(const Functional& f, const CadlagPath& x,
                                                                         double T, double r,
                                                                         const PartitionSequence& seq,
                                                                         int time_samples = 16, int radius_steps = 8) {
    detail::require(r > 0.0, "modulus radius must be positive");
    detail::require(T > 0.0 && T <= x.horizon(), "modulus horizon outside the path domain");
    const Partition& p = seq.top();
    const int m = x.dimension();
    const EvalContext ctx{p};
    std::vector<double> omega(2 * radius_steps + 1, 0.0);
    const double da = r / radius_steps;
    for (int s = 0; s < time_samples; ++s) {
        const double t = p[p.count_upto(T * s / time_samples) - 1];
        const auto y = StoppedPath::pc(x, p, t, true);
        std::vector<double> vals;
        for (int i = -radius_steps; i <= radius_steps; ++i) vals.push_back(f(y.bumped(i * da * detail::unit(m, 0)), ctx));
        for (std::size_t i = 0; i < vals.size(); ++i)
            for (std::size_t j = i; j < vals.size(); ++j)
                omega[j - i] = std::max(omega[j - i], std::abs(vals[j] - vals[i]));
    }
    std::vector<std::pair<double, double>> out;
    double env = 0.0;
    for (std::size_t k = 0; k < omega.size(); ++k) {
        env = std::max(env, omega[k]);
        out.emplace_back(k * da, env);
    }
    return out;
}

/// max_t |F(t, x^n_t)| over the grid of each level; no verdict, callers judge growth.
inline std::vector<std::pair<int, double>> local_boundedness_probe(const Functional& f, const CadlagPath& x,
                                                                   const PartitionSequence& seq, double T) {
    std::vector<std::pair<int, double>> out;
    for (int n : seq.level_numbers()) {
        const Partition& p = seq.level(n);
        double mx = 0.0;
        for (double t : p.points()) {
            if (t > T) break;
            mx = std::max(mx, std::abs(f(StoppedPath::pc(x, p, t), EvalContext{p})));
        }
        out.emplace_back(n, mx);
    }
    return out;
}

} // namespace pathcalc
