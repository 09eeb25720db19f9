#pragma once

/**
 * @file identities.hpp
 * @brief Product rule for pathwise integrals, the 1-form identity, Sigma-harmonic functionals,
 * the fair-game construction, and the counterexample demos.
 */

#include "builtins.hpp"
#include "functional.hpp"
#include "integrate.hpp"
#include "quadvar.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace pathcalc {

struct IdentityResidual {
    std::vector<int> levels;
    std::vector<double> lhs;
    std::vector<std::string> component_names;
    std::vector<std::vector<double>> components; ///< per level, one value per component
    std::vector<double> residual;                ///< lhs - sum of components
    Verdict verdict = Verdict::not_applicable;
    double tol = 0.0;

    void push(int level, double l, std::vector<double> comps) {
        double r = l;
        for (double c : comps) r -= c;
        levels.push_back(level);
        lhs.push_back(l);
        components.push_back(std::move(comps));
        residual.push_back(r);
    }

    void finish(double tolerance) {
        tol = tolerance;
        if (residual.empty()) return;
        verdict = std::abs(residual.back()) <= tol ? Verdict::converged : Verdict::diverged;
    }

    std::vector<double> abs_residuals() const {
        std::vector<double> r;
        for (double v : residual) r.push_back(std::abs(v));
        return r;
    }
};

// ---------------------------------------------------------------------------
// product rule

/// {phi, psi}(t, x) = psi(t, x_{t-}) I_phi(t, x_{t-}) + phi(t, x_{t-}) I_psi(t, x_{t-}), with I at the ambient level.
inline Integrand bracket(const Integrand& phi, const Integrand& psi) {
    const Functional iphi = integral_functional(phi), ipsi = integral_functional(psi);
    return {"{" + phi.name + "," + psi.name + "}", [=](const StoppedPath& y, const EvalContext& c) {
                const StoppedPath yl = y.is_left() && y.time() == y.stop_time() ? y : y.left_stopped();
                return Vector(psi(yl, c) * iphi(yl, c) + phi(yl, c) * ipsi(yl, c));
            }};
}

/**
 * (int phi dx)(int psi dx) = int <phi psi', d[x]> + int {phi, psi} dx, level by level. The quadratic
 * term at level n is the weighted quadratic sum sum_i (phi_i . dx_i)(psi_i . dx_i).
 */
inline IdentityResidual kw_check(const Integrand& phi, const Integrand& psi, const CadlagPath& x,
                                 const PartitionSequence& seq, double T, double tol = 1e-3) {
    const Integrand br = bracket(phi, psi);
    IdentityResidual out;
    out.component_names = {"qv", "bracket_integral"};
    for (int n : seq.level_numbers()) {
        const Partition& p = seq.level(n);
        const EvalContext ctx{p};
        const auto a = detail::riemann_terms(phi, x, p, T);
        const auto b = detail::riemann_terms(psi, x, p, T);
        double sa = 0.0, sb = 0.0, quad = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            sa += a[i];
            sb += b[i];
            quad += a[i] * b[i];
        }
        out.push(n, sa * sb, {quad, riemann_sum(br, x, p, T)});
    }
    out.finish(tol);
    return out;
}

/**
 * int phi dx = sum_i [ int (x_i(T) - x_i) f_i(x_i) dx_i - int f_i(x_i) d[x_i] ] for the
 * path-dependent 1-form phi_i = (int_0^. f_i(x_i) dx_i)(t-).
 */
inline IdentityResidual one_form_identity_check(const std::vector<ScalarFunction>& fs, const CadlagPath& x,
                                                const PartitionSequence& seq, double T, double tol = 1e-3) {
    detail::require(static_cast<int>(fs.size()) == x.dimension(), "1-form needs one function per path coordinate");
    const Integrand phi = oneform_integrand(fs);
    IdentityResidual out;
    out.component_names = {"terminal_weighted", "minus_qv"};
    for (int n : seq.level_numbers()) {
        const Partition& p = seq.level(n);
        const std::size_t k = std::min(p.count_upto(T), p.intervals());
        const Vector xT = x.eval(p[k]);
        double a = 0.0, q = 0.0;
        Vector prev = x.eval(p[0]);
        for (std::size_t i = 0; i < k; ++i) {
            const Vector next = x.eval(p[i + 1]);
            for (std::size_t c = 0; c < fs.size(); ++c) {
                const auto j = static_cast<Eigen::Index>(c);
                const double d = next(j) - prev(j);
                const double fv = fs[c].f(prev(j));
                a += (xT(j) - prev(j)) * fv * d;
                q += fv * d * d;
            }
            prev = next;
        }
        out.push(n, riemann_sum(phi, x, p, T), {a, -q});
    }
    out.finish(tol);
    return out;
}

// ---------------------------------------------------------------------------
// Sigma-harmonic functionals

using SigmaFn = std::function<Matrix(double, const Vector&)>;

inline SigmaFn constant_sigma(const Matrix& s) {
    return [s](double, const Vector&) { return s; };
}

struct HarmonicOptions {
    double membership_tol = 0.1; ///< relative tolerance of d[x]/dt against Sigma
    std::size_t window = 256;    ///< grid intervals per finite-difference window of the qv estimate
    std::size_t pde_samples = 64;
    double tol = 1e-2;           ///< representation residual tolerance at the top level
};

struct HarmonicReport {
    double worst_membership_error = 0.0; ///< max relative error of windowed d[x]/dt against Sigma
    std::vector<std::pair<double, double>> pde_residual; ///< (t, DF + (1/2)<hess F, Sigma>)
    double max_pde_residual = 0.0;
    IdentityResidual representation; ///< F(T) - F(0) against int grad F(x_{t-}) dx
};

/**
 * Checks x in Omega_Sigma on the finest level, samples the PDE residual along x, and the
 * representation F(t, x_t) = F(0, x_0) + int grad F(s, x_{s-}) dx level by level.
 */
inline HarmonicReport harmonic_check(const Functional& f, const SigmaFn& sigma, const CadlagPath& x,
                                     const PartitionSequence& seq, double T, const HarmonicOptions& opt = {}) {
    detail::require(T > 0.0 && T <= x.horizon(), "horizon outside the path domain");
    const int m = x.dimension();
    HarmonicReport rep;
    {
        const Partition& p = seq.top();
        const std::size_t K = std::min(p.count_upto(T), p.intervals());
        const std::size_t w = std::min(opt.window, K);
        const auto v = x.sample(p);
        for (std::size_t a = 0; a + w <= K; a += w) {
            Matrix dq = Matrix::Zero(m, m), s = Matrix::Zero(m, m);
            for (std::size_t i = a; i < a + w; ++i) {
                const Vector d = v[i + 1] - v[i];
                dq += d * d.transpose();
                s += sigma(p[i], v[i]) * (p[i + 1] - p[i]);
            }
            const double err = (dq - s).norm() / std::max(s.norm(), 1e-300);
            rep.worst_membership_error = std::max(rep.worst_membership_error, err);
        }
        if (rep.worst_membership_error > opt.membership_tol)
            throw PreconditionError("path is not in Omega_Sigma: windowed d[x]/dt deviates from Sigma by " +
                                    std::to_string(rep.worst_membership_error) + " (relative tolerance " +
                                    std::to_string(opt.membership_tol) + ")");
    }
    {
        const auto dt = detail::dt_of(f);
        const auto hess = detail::hess_of(f);
        const EvalContext ctx{seq.top()};
        for (std::size_t k = 0; k < opt.pde_samples; ++k) {
            const double t = T * static_cast<double>(k) / static_cast<double>(opt.pde_samples);
            const StoppedPath y = StoppedPath::raw(x, t);
            const Matrix h = hess(y, ctx);
            const double r = dt(y, ctx) + 0.5 * (h.cwiseProduct(sigma(t, y.terminal()))).sum();
            rep.pde_residual.push_back({t, r});
            rep.max_pde_residual = std::max(rep.max_pde_residual, std::abs(r));
        }
    }
    const Integrand phi{"grad", detail::grad_of(f)};
    rep.representation.component_names = {"integral"};
    for (int n : seq.level_numbers()) {
        const Partition& p = seq.level(n);
        const EvalContext ctx{p};
        const double lhs = f(StoppedPath::raw(x, T), ctx) - f(StoppedPath::raw(x, 0.0), ctx);
        rep.representation.push(n, lhs, {riemann_sum(phi, x, p, T)});
    }
    rep.representation.finish(opt.tol);
    return rep;
}

// ---------------------------------------------------------------------------
// fair game

struct FairGameResult {
    Verdict verdict = Verdict::not_applicable; ///< converged: negative certificate found
    bool sign_flip = false;    ///< false when M already dips below M(0) on the discretized path
    double net_increment = 0.0; ///< M(T, z_T) - M(0, z_0)
    double t_star = 0.0;
    double value = 0.0;         ///< M(t*, z*_{t*}) - M(0, z*_0), from the view
    double reverified = 0.0;    ///< same quantity re-evaluated on the materialized path
    CadlagPath perturbed;
    int level = 0;
};

/**
 * Executes the construction behind the fair-game property on z = x^n at the finest level:
 * t* = first grid time with M(t*, z_{t*}) > M(0, z_0), z* = z_{t*-} - eps Delta z(t*) 1_{[t*, inf)}.
 */
inline FairGameResult fair_game_probe(const Functional& M, const CadlagPath& x, const PartitionSequence& seq,
                                      double eps = 0.5) {
    detail::require(eps > 0.0 && eps < 1.0, "fair-game eps must lie in (0, 1)");
    const Partition& p = seq.top();
    const EvalContext ctx{p};
    const CadlagPath z = pc_approx(x, p);
    const double T = z.horizon();
    FairGameResult out;
    out.level = seq.level_numbers().back();
    const double m0 = M(StoppedPath::raw(z, 0.0), ctx);
    out.net_increment = M(StoppedPath::raw(z, T), ctx) - m0;
    const double scale = std::max(1.0, std::abs(m0));
    if (std::abs(out.net_increment) <= 1e-14 * scale) return out;
    const double sign = out.net_increment > 0.0 ? 1.0 : -1.0;
    std::size_t star = p.size();
    for (std::size_t i = 0; i < p.size(); ++i)
        if (sign * (M(StoppedPath::raw(z, p[i]), ctx) - m0) > 0.0) {
            star = i;
            break;
        }
    detail::require(star < p.size(), "no grid time with a nonzero increment of M");
    out.t_star = p[star];
    StoppedPath view = StoppedPath::raw(z, out.t_star);
    if (sign > 0.0) {
        out.sign_flip = true;
        const StoppedPath left = StoppedPath::raw(z, out.t_star, true);
        view = left.bumped(-eps * z.jump(out.t_star));
    }
    out.value = M(view, ctx) - m0;
    out.perturbed = view.materialize();
    out.reverified = M(StoppedPath::raw(out.perturbed, out.t_star), ctx) - M(StoppedPath::raw(out.perturbed, 0.0), ctx);
    out.verdict = out.value < 0.0 && out.reverified < 0.0 && std::abs(out.value - out.reverified) <= 1e-10 * scale
                      ? Verdict::converged
                      : Verdict::diverged;
    return out;
}

// ---------------------------------------------------------------------------
// counterexamples

struct Prop11Report {
    double alpha = 0.0;
    std::vector<int> levels;
    std::vector<bool> member;          ///< alpha in pi_n, exact
    std::vector<double> q_jump_time;   ///< where q_n registers the unit jump
    QvResult qv;
    bool never_member() const {
        for (bool b : member)
            if (b) return false;
        return true;
    }
};

/// x = 1_{[alpha, inf)}: grid membership of alpha and the qv estimate along seq.
inline Prop11Report demo_prop11(double alpha, const PartitionSequence& seq, double tol = 1e-3) {
    const double T = seq.horizon();
    detail::require(alpha > 0.0 && alpha < T, "alpha must lie in (0, T)");
    Prop11Report rep;
    rep.alpha = alpha;
    for (int n : seq.level_numbers()) {
        const Partition& p = seq.level(n);
        rep.levels.push_back(n);
        rep.member.push_back(p.contains(alpha));
        rep.q_jump_time.push_back(p.prev_point(alpha));
    }
    const CadlagPath x = step_path(std::vector<std::pair<double, double>>{{alpha, 1.0}}, T);
    QvOptions qo;
    qo.tol = tol;
    rep.qv = qv_estimate(x, seq, qo);
    return rep;
}

struct UDiscontinuityRow {
    int level;
    double sup_distance;  ///< |x^(n) - x|_inf on [0, T]
    double qv_gap;        ///< |[x^(n)](T) - [x](T)|
    double integral_gap;  ///< |G(x^(n)) - G(x)| with G = int 2x dx
};

struct UDiscontinuityReport {
    bool applicable = false;
    int reference_level = 0; ///< level used for the qv of the piecewise-linear approximants
    std::vector<UDiscontinuityRow> rows;
};

/**
 * Piecewise-linear approximants converge uniformly to a continuous x while their quadratic
 * variation does not. [x] is read at the finest level of seq; [x^(n)] at a level `refine` deeper.
 */
inline UDiscontinuityReport demo_U_discontinuity(const CadlagPath& x, const PartitionSequence& seq, double T,
                                                 int refine = 6) {
    UDiscontinuityReport rep;
    if (!x.is_continuous() || x.dimension() != 1) return rep;
    rep.applicable = true;
    const Partition& top = seq.top();
    const double qx = qv_level(x, top, T).trace();
    const Integrand two_x{"2x", [](const StoppedPath& y, const EvalContext&) { return Vector(2.0 * y.left_terminal()); }};
    const double gx = riemann_sum(two_x, x, top, T);
    for (int n : seq.level_numbers()) {
        const CadlagPath pl = pl_approx(x, seq.level(n));
        const int ref = std::min(n + refine, 22);
        const Partition fine = seq.kind() == PartitionKind::dyadic ? Partition::dyadic(seq.horizon(), ref) : top;
        rep.reference_level = ref;
        const double qpl = qv_level(pl, fine, T).trace();
        const double gpl = riemann_sum(two_x, pl, fine, T);
        rep.rows.push_back({n, sup_distance(pl, x), std::abs(qpl - qx), std::abs(gpl - gx)});
    }
    return rep;
}

struct CompareReport {
    double t0 = 0.0;
    UContinuityProbe u_probe;
    ContinuityReport pi_report;
};

/// F(t, x) = |Delta x_t(t0)| on x = 1_{[t0, inf)}: U-continuous at (t0, x) yet not pi-continuous (criterion 2(c)).
inline CompareReport demo_compare_iii(double t0, const PartitionSequence& seq) {
    const double T = seq.horizon();
    detail::require(t0 > 0.0 && t0 < T, "t0 must lie in (0, T)");
    const CadlagPath x = step_path(std::vector<std::pair<double, double>>{{t0, 1.0}}, T);
    const Functional F = jump_size_at(t0);
    CompareReport rep;
    rep.t0 = t0;
    rep.u_probe = u_continuity_probe(F, x, t0, EvalContext{seq.top()});
    rep.pi_report = pi_continuity_report(F, x, t0, seq);
    return rep;
}

} // namespace pathcalc
