#pragma once

/**
 * @file report.hpp
 * @brief Per-level convergence bookkeeping shared by the level sweeps.
 */

#include "types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pathcalc {

struct ConvergenceReport {
    std::vector<int> levels;
    std::vector<double> values;
    std::vector<double> deltas;    ///< |v_n - v_{n-1}|, NaN at the first level
    std::vector<double> dj1;       ///< d_J1(g_{n-1}, g_n) when the level objects are paths, else NaN
    double limit = std::numeric_limits<double>::quiet_NaN();
    Verdict verdict = Verdict::not_applicable;
    double tol = 0.0;

    void push(int level, double value, double dj1_prev = std::numeric_limits<double>::quiet_NaN()) {
        deltas.push_back(values.empty() ? std::numeric_limits<double>::quiet_NaN() : std::abs(value - values.back()));
        levels.push_back(level);
        values.push_back(value);
        dj1.push_back(dj1_prev);
        limit = value;
    }

    /// Converged when the last (up to two) successive differences, and J1 distances if present, are below tol.
    void finish(double tolerance) {
        tol = tolerance;
        if (values.size() < 2) {
            verdict = Verdict::not_applicable;
            return;
        }
        bool ok = true;
        const std::size_t n = values.size();
        for (std::size_t k = n - std::min<std::size_t>(2, n - 1); k < n; ++k) {
            if (!(deltas[k] < tol)) ok = false;
            if (!std::isnan(dj1[k]) && !(dj1[k] < tol)) ok = false;
        }
        verdict = ok ? Verdict::converged : Verdict::diverged;
    }
};

/// Nonincreasing up to an absolute noise floor.
inline bool nonincreasing(const std::vector<double>& v, double floor = 1e-12) {
    for (std::size_t k = 1; k < v.size(); ++k)
        if (v[k] > v[k - 1] + floor) return false;
    return true;
}

} // namespace pathcalc
