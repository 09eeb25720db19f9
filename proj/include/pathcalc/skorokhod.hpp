#pragma once

/**
 * @file skorokhod.hpp
 * @brief Skorokhod J1 distance on D[0, T].
 *
 * d(f, g) = inf over increasing bijections lambda of [0, T] of
 *           max(|lambda - id|_inf, |f o lambda - g|_inf).
 *
 * Step/step pairs are solved exactly: for a candidate eps the feasibility of a time change is
 * a monotone reachability problem over cells (i, j) = (state of f, state of g), solved by an
 * earliest-entry-time sweep; eps is then located by bisection. Other pairs get a certified
 * upper bound.
 */

#include "path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pathcalc {

struct SkorokhodResult {
    double distance;
    bool exact; ///< false: certified upper bound only
};

namespace detail {

struct StepData {
    std::vector<double> times;  ///< jump times, size p
    std::vector<Vector> values; ///< values, size p + 1 (values[0] = f(0))
};

inline StepData step_data(const CadlagPath& f) {
    StepData d;
    d.values.push_back(f.eval(0.0));
    for (const auto& j : f.jumps()) {
        d.times.push_back(j.time);
        d.values.push_back(f.eval(j.time));
    }
    return d;
}

/// Does a time change with |lambda - id| <= eps and |f o lambda - g| <= eps exist (closure)?
inline bool j1_feasible(const StepData& f, const StepData& g, double T, double eps) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::size_t p = f.times.size(), q = g.times.size();
    auto ok = [&](std::size_t i, std::size_t j) { return (f.values[i] - g.values[j]).norm() <= eps; };
    // g jump times with sentinels: bt[0] = 0, bt[q+1] = inf
    std::vector<double> bt(q + 2);
    bt[0] = 0.0;
    for (std::size_t j = 0; j < q; ++j) bt[j + 1] = g.times[j];
    bt[q + 1] = inf;
    auto lo_win = [&](std::size_t i) { // window of f's i-th jump (1-based)
        if (i > p) return inf;
        const double a = f.times[i - 1];
        return a == T ? T : std::max(a - eps, 0.0);
    };
    auto hi_win = [&](std::size_t i) {
        if (i > p) return inf;
        const double a = f.times[i - 1];
        return a == T ? T : std::min(a + eps, T);
    };
    auto band = [&](std::size_t i) {
        const double L = i == 0 ? 0.0 : lo_win(i);
        const double U = hi_win(i + 1);
        const std::size_t jlo = static_cast<std::size_t>(std::lower_bound(bt.begin() + 1, bt.end(), L) - bt.begin()) - 1;
        std::size_t jhi = static_cast<std::size_t>(std::upper_bound(bt.begin(), bt.begin() + static_cast<long>(q) + 1, U) -
                                                   bt.begin()) - 1;
        return std::pair<std::size_t, std::size_t>{jlo, jhi};
    };

    if (!ok(0, 0)) return false;
    auto [lo, hi] = band(0);
    if (lo != 0 || hi < lo) return false;
    std::vector<double> cur(hi - lo + 1, inf);
    cur[0] = 0.0;
    for (std::size_t i = 0;; ++i) {
        const double Lnext = lo_win(i + 1), Unext = hi_win(i + 1);
        std::size_t nlo = 0, nhi = 0;
        std::vector<double> nxt;
        if (i < p) {
            std::tie(nlo, nhi) = band(i + 1);
            if (nhi >= nlo) nxt.assign(nhi - nlo + 1, inf);
        }
        bool any = false;
        for (std::size_t j = lo; j <= hi; ++j) {
            const double tau = cur[j - lo];
            if (tau == inf) continue;
            if (j < q && j + 1 <= hi && (i == p || Unext >= bt[j + 1]) && ok(i, j + 1))
                cur[j + 1 - lo] = std::min(cur[j + 1 - lo], bt[j + 1]);
            if (i == p || nxt.empty()) continue;
            const double s = std::max(tau, Lnext);
            if (s <= Unext && s < bt[j + 1] && j >= nlo && j <= nhi && ok(i + 1, j)) {
                nxt[j - nlo] = std::min(nxt[j - nlo], s);
                any = true;
            }
            if (j < q && bt[j + 1] >= s && bt[j + 1] <= Unext && j + 1 >= nlo && j + 1 <= nhi && ok(i + 1, j + 1)) {
                nxt[j + 1 - nlo] = std::min(nxt[j + 1 - nlo], bt[j + 1]);
                any = true;
            }
        }
        if (i == p) return hi == q && cur[q - lo] != inf;
        if (!any) return false;
        cur = std::move(nxt);
        lo = nlo;
        hi = nhi;
    }
}

inline double step_step_distance(const CadlagPath& f, const CadlagPath& g, double upper) {
    const auto fd = step_data(f), gd = step_data(g);
    const double T = f.horizon();
    double lo = std::max((fd.values.front() - gd.values.front()).norm(), (fd.values.back() - gd.values.back()).norm());
    double hi = upper;
    if (hi <= lo) return hi;
    if (j1_feasible(fd, gd, T, lo)) return lo;
    // geometric descent keeps the early (expensive, wide-band) probes few
    for (double e = hi / 2; e > lo; e /= 2) {
        if (!j1_feasible(fd, gd, T, e)) {
            lo = e;
            break;
        }
        hi = e;
    }
    while (hi - lo > 1e-13 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (j1_feasible(fd, gd, T, mid) ? hi : lo) = mid;
    }
    return hi;
}

/// Maps f-time to g-time; piecewise linear through (a_i, b_i), exact at the nodes.
struct PiecewiseLinearMap {
    std::vector<double> from, to;
    double operator()(double s) const {
        auto it = std::lower_bound(from.begin(), from.end(), s);
        const std::size_t k = static_cast<std::size_t>(it - from.begin());
        if (it != from.end() && *it == s) return to[k];
        const double w = (s - from[k - 1]) / (from[k] - from[k - 1]);
        return to[k - 1] + w * (to[k] - to[k - 1]);
    }
};

/// Upper bound using the time change that aligns the i-th jump of f with the i-th jump of g.
inline double aligned_bound(const CadlagPath& f, const CadlagPath& g) {
    const auto jf = f.jumps(), jg = g.jumps();
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (jf.empty() || jf.size() != jg.size()) return inf;
    const double T = f.horizon();
    PiecewiseLinearMap mu{{0.0}, {0.0}}, lam{{0.0}, {0.0}};
    double shift = 0.0;
    for (std::size_t i = 0; i < jf.size(); ++i) {
        if (jf[i].time == T || jg[i].time == T) {
            if (jf[i].time != jg[i].time) return inf;
            continue;
        }
        mu.from.push_back(jf[i].time);
        mu.to.push_back(jg[i].time);
        shift = std::max(shift, std::abs(jf[i].time - jg[i].time));
    }
    mu.from.push_back(T);
    mu.to.push_back(T);
    lam.from = mu.to;
    lam.to = mu.from;
    std::vector<double> pts = f.knots();
    for (double u : g.knots()) pts.push_back(lam(u));
    pts.push_back(T);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double best = shift;
    for (double s : pts) {
        const double u = mu(s);
        best = std::max(best, (f.eval(s) - g.eval(u)).norm());
        if (s > 0.0) best = std::max(best, (f.eval_left(s) - g.eval_left(u)).norm());
    }
    return best;
}

} // namespace detail

inline SkorokhodResult skorokhod(const CadlagPath& f, const CadlagPath& g) {
    detail::require_compatible(f, g);
    const double uniform = sup_distance(f, g);
    if (uniform == 0.0) return {0.0, true};
    if (f.is_step() && g.is_step()) return {detail::step_step_distance(f, g, uniform), true};
    return {std::min(uniform, detail::aligned_bound(f, g)), false};
}

inline double skorokhod_distance(const CadlagPath& f, const CadlagPath& g, double T) {
    detail::require(T == f.horizon() && T == g.horizon(), "distance horizon must equal the path horizons");
    return skorokhod(f, g).distance;
}

} // namespace pathcalc
