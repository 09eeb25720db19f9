#pragma once

/**
 * @file quadvar.hpp
 * @brief Quadratic sums q_n along partitions, their Skorokhod-Cauchy limit, polarisation,
 * continuous/jump decomposition, weighted quadratic sums and Lebesgue-Stieltjes integrals.
 *
 * Matrix-valued paths are stored flattened column-major as paths of dimension m*m.
 */

#include "partition.hpp"
#include "path.hpp"
#include "report.hpp"
#include "skorokhod.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace pathcalc {

// ---------------------------------------------------------------------------
// quadrature

namespace detail {

template <class F>
double gauss5(const F& f, double a, double b) {
    static constexpr double x[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                    0.9061798459386640};
    static constexpr double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665, 0.2369268850561891,
                                    0.2369268850561891};
    const double c = 0.5 * (a + b), r = 0.5 * (b - a);
    double s = 0.0;
    for (int k = 0; k < 5; ++k) s += w[k] * f(c + r * x[k]);
    return r * s;
}

/// Adaptive Gauss-Legendre on [a, b]; `ok` is cleared if the recursion bottoms out unconverged.
template <class F>
double adaptive_gauss(const F& f, double a, double b, double tol, bool& ok, int depth = 0) {
    const double whole = gauss5(f, a, b);
    const double m = 0.5 * (a + b);
    const double split = gauss5(f, a, m) + gauss5(f, m, b);
    if (std::abs(split - whole) <= tol * std::max(1.0, std::abs(split))) return split;
    if (depth >= 40 || m <= a || m >= b) {
        ok = false;
        return split;
    }
    return adaptive_gauss(f, a, m, tol, ok, depth + 1) + adaptive_gauss(f, m, b, tol, ok, depth + 1);
}

} // namespace detail

// ---------------------------------------------------------------------------
// Lebesgue-Stieltjes integrals against BV paths

struct StieltjesOptions {
    /// f is known to be left-continuous, so f(s-) = f(s). Otherwise f(s-) is probed as f(s - h).
    bool left_continuous = true;
    /// Treat g(0) as an atom at the origin (measure with distribution function g, e.g. q_n(0) != 0).
    bool atom_at_origin = false;
    double quad_tol = 1e-13;
};

using TimeMatrixFn = std::function<Matrix(double)>;
using TimeScalarFn = std::function<double(double)>;

namespace detail {

inline Matrix left_limit(const TimeMatrixFn& f, double s, bool left_continuous) {
    if (left_continuous || s == 0.0) return f(s);
    return f(s - std::ldexp(std::max(s, 1.0), -40));
}

} // namespace detail

/// int_0^T <f(s-), dg(s)> for a matrix integrand f and an m*m-flattened BV path g.
inline double stieltjes_integral_matrix(const TimeMatrixFn& f, const CadlagPath& g, double T,
                                        const StieltjesOptions& opt = {}) {
    detail::require(T >= 0.0 && T <= g.horizon(), "integration horizon outside the path domain");
    const int mm = g.dimension();
    const int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(mm))));
    detail::require(m * m == mm, "integrator dimension must be a square m*m");
    auto pair = [m](const Matrix& a, const Vector& dg) {
        detail::require(a.rows() == m && a.cols() == m, "integrand has the wrong shape");
        return flatten(a).dot(dg);
    };
    double total = 0.0;
    if (opt.atom_at_origin) total += pair(f(0.0), g.eval(0.0));
    const auto segs = g.segments();
    for (std::size_t k = 0; k < segs.size(); ++k) {
        const auto& s = segs[k];
        if (s.start > T) break;
        if (s.start > 0.0) {
            const Vector dg = g.jump(s.start);
            if (dg.squaredNorm() > 0.0) total += pair(detail::left_limit(f, s.start, opt.left_continuous), dg);
        }
        const double end = std::min(k + 1 < segs.size() ? segs[k + 1].start : g.horizon(), T);
        if (s.flat || end <= s.start) continue;
        const Vector slope = (s.v1 - s.v0) / (s.t1 - s.t0);
        bool ok = true;
        total += detail::adaptive_gauss([&](double u) { return pair(f(u), slope); }, s.start, end, opt.quad_tol, ok);
        if (!ok) throw ConsistencyError("Stieltjes quadrature did not converge");
    }
    return total;
}

/// Scalar integrand against a scalar BV path.
inline double stieltjes_integral(const TimeScalarFn& f, const CadlagPath& g, double T, const StieltjesOptions& opt = {}) {
    detail::require(g.dimension() == 1, "scalar Stieltjes integral needs a scalar integrator");
    return stieltjes_integral_matrix([&f](double u) { return Matrix::Constant(1, 1, f(u)); }, g, T, opt);
}

// ---------------------------------------------------------------------------
// quadratic sums

/// q_n(t) = sum_{t_i <= t} (x(t_{i+1}) - x(t_i))(x(t_{i+1}) - x(t_i))'
inline Matrix qv_level(const CadlagPath& x, const Partition& p, double t) {
    detail::require(p.horizon() == x.horizon(), "partition horizon differs from the path horizon");
    detail::require(t >= 0.0 && t <= x.horizon(), "time outside the path domain");
    const int m = x.dimension();
    Matrix q = Matrix::Zero(m, m);
    const std::size_t n = std::min(p.count_upto(t), p.intervals());
    Vector prev = x.eval(p[0]);
    for (std::size_t i = 0; i < n; ++i) {
        const Vector next = x.eval(p[i + 1]);
        const Vector d = next - prev;
        q += d * d.transpose();
        prev = next;
    }
    return q;
}

/**
 * t -> q_n(t) as an m*m-flattened step path. With keep_all_knots every partition point is a knot
 * (needed to combine level paths entrywise); otherwise zero increments leave no knot.
 */
inline CadlagPath qv_path(const CadlagPath& x, const Partition& p, bool keep_all_knots = false) {
    detail::require(p.horizon() == x.horizon(), "partition horizon differs from the path horizon");
    std::vector<JumpPoint> jumps;
    jumps.reserve(p.intervals());
    const auto v = x.sample(p);
    Vector x0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        const Vector d = v[i + 1] - v[i];
        Vector dd(d.size() * d.size());
        for (Eigen::Index j = 0; j < d.size(); ++j) dd.segment(j * d.size(), d.size()) = d(j) * d;
        if (i == 0)
            x0 = dd;
        else if (keep_all_knots || d.squaredNorm() > 0.0)
            jumps.push_back({p[i], dd});
    }
    return step_path(jumps, x.horizon(), x0);
}

struct QvLevel {
    int level;
    Partition grid;
    CadlagPath q;
};

struct QvResult {
    int dimension = 1;
    std::vector<QvLevel> levels;
    CadlagPath limit;
    CadlagPath continuous_part;
    std::vector<std::pair<double, Matrix>> jump_part; ///< (t, Delta x(t) Delta x(t)')
    std::vector<double> cauchy_diags;                 ///< d_J1(q_n, q_{n+1})
    Verdict verdict = Verdict::not_applicable;
    double tol = 0.0;

    Matrix value(double t) const { return unflatten(limit.eval(t), dimension); }
    double trace(double t) const { return value(t).trace(); }
};

namespace detail {

inline void require_same_knots(const CadlagPath& a, const CadlagPath& b) {
    require(a.horizon() == b.horizon(), "paths live on different horizons");
    require(a.knots() == b.knots(), "paths are not sampled on a common grid");
}

/// Assemble an m*m flattened step path from scalar step paths on identical knots.
inline CadlagPath stack_matrix(const std::vector<std::vector<CadlagPath>>& entries) {
    const int m = static_cast<int>(entries.size());
    const auto& ref = entries[0][0];
    const auto segs0 = ref.segments();
    std::vector<CadlagPath::Segment> segs;
    segs.reserve(segs0.size());
    for (std::size_t k = 0; k < segs0.size(); ++k) {
        Matrix a(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                const auto& s = entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].segments()[k];
                require(s.flat, "matrix assembly expects step paths");
                a(i, j) = s.v0(0);
            }
        segs.push_back(flat_segment(segs0[k].start, flatten(a)));
    }
    return CadlagPath::from_segments(m * m, ref.horizon(), std::move(segs));
}

inline void add_cauchy_diagnostics(QvResult& r, double tol, bool diagnostics) {
    r.tol = tol;
    if (diagnostics)
        for (std::size_t k = 0; k + 1 < r.levels.size(); ++k)
            r.cauchy_diags.push_back(skorokhod(r.levels[k].q, r.levels[k + 1].q).distance);
    if (r.cauchy_diags.empty()) {
        r.verdict = Verdict::not_applicable;
        return;
    }
    bool ok = true;
    const std::size_t n = r.cauchy_diags.size();
    for (std::size_t k = n - std::min<std::size_t>(2, n); k < n; ++k)
        if (!(r.cauchy_diags[k] < tol)) ok = false;
    r.verdict = ok ? Verdict::converged : Verdict::diverged;
}

} // namespace detail

/// (1/2)(q_sum - q_i - q_j) on a common grid.
inline CadlagPath polarise(const CadlagPath& q_i, const CadlagPath& q_j, const CadlagPath& q_sum) {
    detail::require_same_knots(q_i, q_j);
    detail::require_same_knots(q_i, q_sum);
    return combine(0.5, q_sum, -0.5, q_i + q_j);
}

struct QvDecomposition {
    CadlagPath continuous_part;
    std::vector<std::pair<double, Matrix>> jump_part;
};

/**
 * Split a qv estimate into [x]^c and the jump sum. When the estimate was sampled on a grid, each jump
 * of x is booked at the left end of the grid interval that straddles it, where q_n registers it.
 */
inline QvDecomposition decompose_qv(const CadlagPath& limit, const std::vector<JumpPoint>& jumps,
                                    const std::optional<Partition>& sampled_on = std::nullopt, double neg_tol = 1e-9) {
    const int mm = limit.dimension();
    const int m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(mm))));
    detail::require(m * m == mm, "qv path dimension must be a square m*m");
    QvDecomposition out;
    std::vector<JumpPoint> booked;
    Vector at_origin = zero_vector(mm);
    for (const auto& j : jumps) {
        detail::require(j.size.size() == m, "jump dimension does not match the qv path");
        const Matrix jj = j.size * j.size.transpose();
        out.jump_part.push_back({j.time, jj});
        const double at = sampled_on ? sampled_on->prev_point(j.time) : j.time;
        if (at == 0.0)
            at_origin += flatten(jj);
        else if (!booked.empty() && booked.back().time == at)
            booked.back().size += flatten(jj);
        else
            booked.push_back({at, flatten(jj)});
    }
    out.continuous_part = limit - step_path(booked, limit.horizon(), at_origin);
    double scale = 1.0;
    for (const auto& s : limit.segments()) scale = std::max(scale, s.v0.cwiseAbs().maxCoeff());
    for (const auto& s : out.continuous_part.segments())
        for (int i = 0; i < m; ++i)
            if (s.v0(i * m + i) < -neg_tol * scale || s.v1(i * m + i) < -neg_tol * scale)
                throw ConsistencyError("continuous part of the quadratic variation is negative at t = " +
                                       std::to_string(s.start));
    return out;
}

struct QvOptions {
    double tol = 1e-3;
    bool diagnostics = true; ///< compute d_J1(q_n, q_{n+1})
};

namespace detail {

inline QvResult qv_estimate_impl(const CadlagPath& x, const PartitionSequence& seq, const QvOptions& opt,
                                 bool keep_all_knots) {
    require(seq.level_numbers().size() >= 2, "qv estimate needs at least two levels");
    QvResult r;
    r.dimension = x.dimension();
    for (int n : seq.level_numbers()) r.levels.push_back({n, seq.level(n), qv_path(x, seq.level(n), keep_all_knots)});
    r.limit = r.levels.back().q;
    auto dec = decompose_qv(r.limit, x.jumps(), seq.top());
    r.continuous_part = std::move(dec.continuous_part);
    r.jump_part = std::move(dec.jump_part);
    add_cauchy_diagnostics(r, opt.tol, opt.diagnostics);
    return r;
}

} // namespace detail

/// Quadratic sums at every level of seq; limit = top level; verdict from the Cauchy diagnostics.
inline QvResult qv_estimate(const CadlagPath& x, const PartitionSequence& seq, const QvOptions& opt = {}) {
    return detail::qv_estimate_impl(x, seq, opt, false);
}

/// Matrix qv: diagonal from each coordinate, off-diagonal by polarising [x_i + x_j], [x_i], [x_j].
inline QvResult qv_matrix(const CadlagPath& x, const PartitionSequence& seq, const QvOptions& opt = {}) {
    const int m = x.dimension();
    std::vector<QvResult> diag;
    bool diverged = false;
    for (int i = 0; i < m; ++i) {
        diag.push_back(detail::qv_estimate_impl(x.component(i), seq, opt, true));
        diverged = diverged || diag.back().verdict == Verdict::diverged;
    }
    std::vector<std::vector<QvResult>> cross(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) {
            Matrix a = Matrix::Zero(1, m);
            a(0, i) = a(0, j) = 1.0;
            cross[static_cast<std::size_t>(i)].push_back(detail::qv_estimate_impl(x.linear_map(a), seq, opt, true));
            diverged = diverged || cross[static_cast<std::size_t>(i)].back().verdict == Verdict::diverged;
        }
    QvResult r;
    r.dimension = m;
    const auto levels = seq.level_numbers();
    for (std::size_t k = 0; k < levels.size(); ++k) {
        std::vector<std::vector<CadlagPath>> e(static_cast<std::size_t>(m), std::vector<CadlagPath>(static_cast<std::size_t>(m)));
        for (int i = 0; i < m; ++i) e[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = diag[static_cast<std::size_t>(i)].levels[k].q;
        for (int i = 0; i < m; ++i)
            for (int j = i + 1; j < m; ++j) {
                const auto& qs = cross[static_cast<std::size_t>(i)][static_cast<std::size_t>(j - i - 1)].levels[k].q;
                const CadlagPath c = polarise(e[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)],
                                              diag[static_cast<std::size_t>(j)].levels[k].q, qs);
                e[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = c;
                e[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = c;
            }
        r.levels.push_back({levels[k], seq.level(levels[k]), detail::stack_matrix(e)});
    }
    r.limit = r.levels.back().q;
    auto dec = decompose_qv(r.limit, x.jumps(), seq.top());
    r.continuous_part = std::move(dec.continuous_part);
    r.jump_part = std::move(dec.jump_part);
    detail::add_cauchy_diagnostics(r, opt.tol, opt.diagnostics);
    if (diverged) r.verdict = Verdict::diverged;
    return r;
}

// ---------------------------------------------------------------------------
// weighted quadratic sums

enum class QsVariant { i, ii, iii, iv };

inline const char* to_string(QsVariant v) {
    switch (v) {
    case QsVariant::i: return "i";
    case QsVariant::ii: return "ii";
    case QsVariant::iii: return "iii";
    case QsVariant::iv: return "iv";
    }
    return "?";
}

/// f_n(t): level-dependent weights; a fixed f ignores the level.
using LevelWeight = std::function<double(int level, double t)>;

/**
 * One weighted quadratic sum at a single level:
 *   (i)   sum_{t_i <= T} f(t_i) (dx_i)^2        (ii)  sum_{t_i <= T} f(t_{i+1} ^ T) (dx_i)^2
 *   (iii) sum_{t_i <  T} f(t_i) (dx_i)^2        (iv)  sum_{t_i <  T} f(t_{i+1} ^ T) (dx_i)^2
 */
inline double weighted_quad_sum_level(const std::function<double(double)>& f, const CadlagPath& x, const Partition& p,
                                      QsVariant variant, double T) {
    detail::require(x.dimension() == 1, "weighted quadratic sums take scalar paths");
    detail::require(p.horizon() == x.horizon(), "partition horizon differs from the path horizon");
    detail::require(T > 0.0 && T <= x.horizon(), "sum horizon outside the path domain");
    const bool inclusive = variant == QsVariant::i || variant == QsVariant::ii;
    const bool right = variant == QsVariant::ii || variant == QsVariant::iv;
    const std::size_t n = std::min(inclusive ? p.count_upto(T) : p.count_below(T), p.intervals());
    double s = 0.0;
    double prev = x.eval(p[0])(0);
    for (std::size_t i = 0; i < n; ++i) {
        const double next = x.eval(p[i + 1])(0);
        const double w = right ? f(std::min(p[i + 1], T)) : f(p[i]);
        s += w * (next - prev) * (next - prev);
        prev = next;
    }
    return s;
}

inline ConvergenceReport weighted_quad_sum(const LevelWeight& f, const CadlagPath& x, const PartitionSequence& seq,
                                           QsVariant variant, double T, double tol = 1e-3) {
    ConvergenceReport rep;
    for (int n : seq.level_numbers()) {
        const auto fn = [&f, n](double t) { return f(n, t); };
        rep.push(n, weighted_quad_sum_level(fn, x, seq.level(n), variant, T));
    }
    rep.finish(tol);
    return rep;
}

inline ConvergenceReport weighted_quad_sum(const std::function<double(double)>& f, const CadlagPath& x,
                                           const PartitionSequence& seq, QsVariant variant, double T,
                                           double tol = 1e-3) {
    return weighted_quad_sum([&f](int, double t) { return f(t); }, x, seq, variant, T, tol);
}

/// Oracle for a path with known qv: int_0^T f(s-) d[x] with [x] = [x]^c + sum of squared jumps.
inline double stieltjes_against_qv(const std::function<double(double)>& f, const CadlagPath& continuous_part,
                                   const std::vector<JumpPoint>& jumps, double T, bool left_continuous = true) {
    detail::require(continuous_part.dimension() == 1, "scalar qv expected");
    StieltjesOptions opt;
    opt.left_continuous = left_continuous;
    opt.atom_at_origin = true;
    double s = stieltjes_integral(f, continuous_part, T, opt);
    for (const auto& j : jumps)
        if (j.time <= T) s += detail::left_limit([&f](double u) { return Matrix::Constant(1, 1, f(u)); }, j.time,
                                                 left_continuous)(0, 0) *
                              j.size.squaredNorm();
    return s;
}

} // namespace pathcalc
