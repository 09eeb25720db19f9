#pragma once

/**
 * @file integrate.hpp
 * @brief Left Riemann sums along partitions, the Cauchy-in-J1 integrability test, time integrals,
 * and both change-of-variable formulas with per-level residual accounting.
 *
 * Path-dependent functionals are evaluated with the level's own partition as the ambient grid, so
 * every per-level residual is a statement about one finite computation.
 */

#include "builtins.hpp"
#include "functional.hpp"
#include "quadvar.hpp"
#include "report.hpp"
#include "skorokhod.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace pathcalc {

// ---------------------------------------------------------------------------
// left Riemann sums

namespace detail {

/// phi(t_i, x^n_{t_i-}) . (x(t_{i+1}) - x(t_i)) for every t_i < T with t_i <= t.
inline std::vector<double> riemann_terms(const Integrand& phi, const CadlagPath& x, const Partition& p, double t) {
    require(p.horizon() == x.horizon(), "partition horizon differs from the path horizon");
    require(t >= 0.0 && t <= x.horizon(), "time outside the path domain");
    const EvalContext ctx{p};
    const std::size_t n = std::min(p.count_upto(t), p.intervals());
    std::vector<double> terms;
    terms.reserve(n);
    Vector prev = x.eval(p[0]);
    for (std::size_t i = 0; i < n; ++i) {
        const Vector next = x.eval(p[i + 1]);
        const Vector a = phi(StoppedPath::pc(x, p, p[i], true), ctx);
        require(a.size() == x.dimension(), "integrand dimension does not match the path");
        terms.push_back(a.dot(next - prev));
        prev = next;
    }
    return terms;
}

inline Integrand scalar_integrand(const Functional& f) {
    return {f.name, [f](const StoppedPath& y, const EvalContext& c) { return scalar_vector(f(y, c)); }};
}

} // namespace detail

inline double riemann_sum(const Integrand& phi, const CadlagPath& x, const Partition& p, double t) {
    double s = 0.0;
    for (double v : detail::riemann_terms(phi, x, p, t)) s += v;
    return s;
}

/// Scalar functional as integrand against a scalar path.
inline double riemann_sum(const Functional& phi, const CadlagPath& x, const Partition& p, double t) {
    detail::require(x.dimension() == 1, "scalar integrand needs a scalar path");
    return riemann_sum(detail::scalar_integrand(phi), x, p, t);
}

/// g_n(t) = sum_{t_i <= t} phi(t_i, x^n_{t_i-}) . (x(t_{i+1}) - x(t_i)) as a step path.
inline CadlagPath riemann_path(const Integrand& phi, const CadlagPath& x, const Partition& p) {
    const auto terms = detail::riemann_terms(phi, x, p, x.horizon());
    std::vector<JumpPoint> jumps;
    jumps.reserve(terms.size());
    for (std::size_t i = 1; i < terms.size(); ++i) jumps.push_back({p[i], scalar_vector(terms[i])});
    return step_path(jumps, x.horizon(), scalar_vector(terms.empty() ? 0.0 : terms[0]));
}

struct PathwiseIntegral {
    double value;
    ConvergenceReport report;
};

struct IntegralOptions {
    double tol = 1e-3;
    bool diagnostics = true; ///< d_J1(g_{n-1}, g_n) between consecutive level paths
};

/// Per-level g_n, value = top-level g_n(T); Cauchy test on d_J1 and on the values.
inline PathwiseIntegral pathwise_integral(const Integrand& phi, const CadlagPath& x, const PartitionSequence& seq,
                                          double T, const IntegralOptions& opt = {}) {
    detail::require(T > 0.0 && T <= x.horizon(), "integration horizon outside the path domain");
    PathwiseIntegral out{0.0, {}};
    std::optional<CadlagPath> prev;
    for (int n : seq.level_numbers()) {
        const Partition& p = seq.level(n);
        if (T == x.horizon() && opt.diagnostics) {
            CadlagPath g = riemann_path(phi, x, p);
            const double dj = prev ? skorokhod(*prev, g).distance : std::numeric_limits<double>::quiet_NaN();
            out.report.push(n, g.eval(T)(0), dj);
            prev = std::move(g);
        } else {
            out.report.push(n, riemann_sum(phi, x, p, T));
        }
    }
    out.report.finish(opt.tol);
    out.value = out.report.limit;
    return out;
}

// ---------------------------------------------------------------------------
// time integrals

struct TimeIntegral {
    double value;
    Verdict verdict;
};

namespace detail {

inline ScalarEval dt_of(const Functional& f) {
    if (f.dt) return f.dt;
    return [f](const StoppedPath& y, const EvalContext& c) {
        DerivativeOptions opt;
        const double room = y.horizon() - y.time();
        std::vector<double> steps;
        for (double h : opt.steps)
            if (h <= room) steps.push_back(h);
        if (steps.size() < 2)
            throw PreconditionError("no room for a numeric horizontal derivative of '" + f.name + "' near the horizon");
        opt.steps = steps;
        const auto e = horizontal_derivative(f, y, c, opt);
        if (e.verdict != Verdict::converged)
            throw PreconditionError("numeric horizontal derivative of '" + f.name + "' did not converge");
        return e.value;
    };
}

inline VectorEval grad_of(const Functional& f) {
    if (f.grad) return f.grad;
    return [f](const StoppedPath& y, const EvalContext& c) {
        const auto e = vertical_derivative(f, y, c);
        if (e.verdict != Verdict::converged)
            throw PreconditionError("numeric vertical gradient of '" + f.name + "' did not converge");
        return e.value;
    };
}

inline MatrixEval hess_of(const Functional& f) {
    if (f.hess) return f.hess;
    return [f](const StoppedPath& y, const EvalContext& c) {
        const auto e = vertical_hessian(f, y, c);
        if (e.verdict != Verdict::converged)
            throw PreconditionError("numeric vertical Hessian of '" + f.name + "' did not converge");
        return e.value;
    };
}

} // namespace detail

/// int_0^T DF(t, x_t) dt, adaptive Gauss-Legendre between the breakpoints of x.
inline TimeIntegral time_integral(const Functional& f, const CadlagPath& x, double T, const EvalContext& ctx = {},
                                  double tol = 1e-12) {
    detail::require(T >= 0.0 && T <= x.horizon(), "integration horizon outside the path domain");
    const auto dt = detail::dt_of(f);
    std::vector<double> nodes;
    for (double k : x.knots())
        if (k < T) nodes.push_back(k);
    nodes.push_back(T);
    bool ok = true;
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < nodes.size(); ++k)
        s += detail::adaptive_gauss([&](double u) { return dt(StoppedPath::raw(x, u), ctx); }, nodes[k], nodes[k + 1],
                                    tol, ok);
    return {s, ok ? Verdict::converged : Verdict::diverged};
}

// ---------------------------------------------------------------------------
// change of variable

struct CovBreakdown {
    int level = 0;
    double lhs = 0.0;
    double time_term = 0.0;
    double integral_term = 0.0;
    double qv_term = 0.0;
    double jump_term = 0.0;
    double residual = 0.0;
};

struct CovReport {
    std::vector<CovBreakdown> rows;
    Verdict verdict = Verdict::not_applicable;
    double tol = 0.0;

    std::vector<double> residuals() const {
        std::vector<double> r;
        for (const auto& row : rows) r.push_back(std::abs(row.residual));
        return r;
    }
};

struct CovOptions {
    double tol = 1e-3;     ///< residual tolerance at the top level
    double eps = 0.0;      ///< jump cutoff for the compensation series
    bool check_qv = true;  ///< require a converged qv estimate over the top three levels
    double qv_tol = 0.05;
};

struct JumpSeries {
    double value = 0.0;
    std::size_t kept = 0;
    std::size_t discarded = 0;
    double tail_bound = 0.0; ///< (1/2) max |Hessian| * sum of discarded |Delta x|^2
};

/// sum over jumps with |Delta x(t)| > eps of F(t, x_t) - F(t, x_{t-}) - grad F(t, x_{t-}) . Delta x(t).
inline JumpSeries jump_compensation_series(const Functional& f, const CadlagPath& x, double T, double eps = 0.0,
                                           const EvalContext& ctx = {}) {
    const auto grad = detail::grad_of(f);
    JumpSeries out;
    double hmax = 0.0, discarded_sq = 0.0;
    for (const auto& j : x.jumps()) {
        if (j.time > T) break;
        const StoppedPath right = StoppedPath::raw(x, j.time), left = StoppedPath::raw(x, j.time, true);
        if (j.size.norm() > eps) {
            out.value += f(right, ctx) - f(left, ctx) - grad(left, ctx).dot(j.size);
            ++out.kept;
        } else {
            ++out.discarded;
            discarded_sq += j.size.squaredNorm();
            hmax = std::max(hmax, detail::hess_of(f)(left, ctx).norm());
        }
    }
    out.tail_bound = 0.5 * hmax * discarded_sq;
    return out;
}

namespace detail {

inline void finish_cov(CovReport& rep, double tol) {
    rep.tol = tol;
    if (rep.rows.empty()) return;
    rep.verdict = std::abs(rep.rows.back().residual) <= tol ? Verdict::converged : Verdict::diverged;
}

inline void require_causal_gradient(const Functional& f, const CadlagPath& x, const Partition& grid) {
    const auto grad = grad_of(f);
    const EvalContext ctx{grid};
    const int m = x.dimension();
    std::vector<double> times{0.25 * x.horizon(), 0.5 * x.horizon(), 0.75 * x.horizon()};
    for (const auto& j : x.jumps()) times.push_back(j.time);
    for (double t : times) {
        const StoppedPath y = StoppedPath::raw(x, t);
        for (int k = 0; k < m; ++k) {
            const Functional gk = gradient_component(Functional{f.name, f.value, {}, grad, {}, f.declared}, k);
            const auto probe = strict_causality_probe(gk, y, ctx, {-0.5, 0.25, 1.0});
            if (!probe.strictly_causal())
                throw PreconditionError("vertical gradient of '" + f.name + "' is not strictly causal at t = " +
                                        std::to_string(t));
        }
    }
}

} // namespace detail

/// F(T) - F(0) = int DF dt + int grad F . dx for class S functionals.
inline CovReport cov_class_S(const Functional& f, const CadlagPath& x, const PartitionSequence& seq, double T,
                             const CovOptions& opt = {}) {
    detail::require(T > 0.0 && T <= x.horizon(), "horizon outside the path domain");
    if (f.declared != FunctionalClass::classS && f.declared != FunctionalClass::classM)
        throw PreconditionError("functional '" + f.name + "' is not declared class S");
    detail::require_causal_gradient(f, x, seq.top());
    const Integrand phi{"grad", detail::grad_of(f)};
    CovReport rep;
    for (int n : seq.level_numbers()) {
        const Partition& p = seq.level(n);
        const EvalContext ctx{p};
        CovBreakdown row;
        row.level = n;
        row.lhs = f(StoppedPath::raw(x, T), ctx) - f(StoppedPath::raw(x, 0.0), ctx);
        row.time_term = time_integral(f, x, T, ctx).value;
        row.integral_term = riemann_sum(phi, x, p, T);
        row.residual = row.lhs - row.time_term - row.integral_term;
        rep.rows.push_back(row);
    }
    detail::finish_cov(rep, opt.tol);
    return rep;
}

/**
 * Föllmer-Itô formula for C^{1,2} functionals:
 *   F(T) - F(0) = int DF dt + int grad F . dx + (1/2) int <hess F, d[x]^c> + sum (dF - grad F . dx).
 * The qv term at level n integrates hess F(t_i, x^n_{t_i-}) against [x]^c estimated by q_n minus the
 * squared jumps of x, booked where q_n registers them.
 */
inline CovReport cov_C12(const Functional& f, const CadlagPath& x, const PartitionSequence& seq, double T,
                         const CovOptions& opt = {}) {
    detail::require(T > 0.0 && T <= x.horizon(), "horizon outside the path domain");
    if (opt.check_qv) {
        const auto lv = seq.level_numbers();
        const int lo = lv.size() >= 3 ? lv[lv.size() - 3] : lv.front();
        QvOptions qo;
        qo.tol = opt.qv_tol;
        const auto qv = qv_estimate(x, seq.restricted(lo, lv.back()), qo);
        if (qv.verdict != Verdict::converged)
            throw PreconditionError("quadratic variation of the path did not converge at tolerance " +
                                    std::to_string(opt.qv_tol));
    }
    const auto grad = detail::grad_of(f);
    const auto hess = detail::hess_of(f);
    const Integrand phi{"grad", grad};
    CovReport rep;
    for (int n : seq.level_numbers()) {
        const Partition& p = seq.level(n);
        const EvalContext ctx{p};
        CovBreakdown row;
        row.level = n;
        row.lhs = f(StoppedPath::raw(x, T), ctx) - f(StoppedPath::raw(x, 0.0), ctx);
        row.time_term = time_integral(f, x, T, ctx).value;
        row.integral_term = riemann_sum(phi, x, p, T);
        const auto dec = decompose_qv(qv_path(x, p), x.jumps(), p, std::numeric_limits<double>::infinity());
        StieltjesOptions so;
        so.atom_at_origin = true;
        row.qv_term = 0.5 * stieltjes_integral_matrix(
                                [&](double s) { return hess(StoppedPath::pc(x, p, s, true), ctx); }, dec.continuous_part,
                                T, so);
        row.jump_term = jump_compensation_series(f, x, T, opt.eps, ctx).value;
        row.residual = row.lhs - row.time_term - row.integral_term - row.qv_term - row.jump_term;
        rep.rows.push_back(row);
    }
    detail::finish_cov(rep, opt.tol);
    return rep;
}

} // namespace pathcalc
