#pragma once

// Shared fixture paths and brute-force oracles. Oracles here never call the
// library's summation or approximation code; they work from raw samples.

#include <pathcalc/pathcalc.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

using namespace pathcalc;

inline const double kInvPi = 1.0 / std::numbers::pi;

struct NamedPath {
    std::string name;
    CadlagPath path;
};

/// Scalar step paths with on-grid and off-grid jumps.
inline std::vector<NamedPath> step_fixtures() {
    using J = std::vector<std::pair<double, double>>;
    return {
        {"single_on_grid", step_path(J{{0.5, 2.0}}, 1.0)},
        {"three_jumps", step_path(J{{0.25, 1.0}, {0.5, -1.5}, {0.8, 0.7}}, 1.0, 0.3)},
        {"off_grid_inv_pi", step_path(J{{kInvPi, 1.0}}, 1.0)},
        {"off_grid_mixed", step_path(J{{0.1, -0.4}, {1.0 / 3.0, 1.2}, {0.9, 0.5}}, 1.0)},
        {"jump_at_horizon", step_path(J{{0.375, -0.5}, {1.0, 1.0}}, 1.0, -0.2)},
    };
}

inline CadlagPath fs14() { return faber_schauder_path(14, 42); }

inline CadlagPath fs12_plus_inv_pi_jump() {
    using J = std::vector<std::pair<double, double>>;
    return faber_schauder_path(12, 42) + step_path(J{{kInvPi, 1.0}}, 1.0);
}

/// Every scalar fixture path.
inline std::vector<NamedPath> all_fixtures() {
    auto v = step_fixtures();
    v.push_back({"fs14_seed42", fs14()});
    v.push_back({"fs12_plus_jump", fs12_plus_inv_pi_jump()});
    v.push_back({"piecewise_linear", piecewise_linear(std::vector<double>{0.0, 0.3, 0.7, 1.0},
                                                      std::vector<double>{0.0, 1.0, -0.5, 0.25})});
    return v;
}

/// Random step path with 1..max_jumps jumps at uniform times in (0, 1), normal sizes.
inline CadlagPath random_step_path(std::uint64_t seed, int dim, int max_jumps = 10) {
    std::mt19937_64 gen(seed);
    std::uniform_int_distribution<int> count(1, max_jumps);
    std::uniform_real_distribution<double> when(0.0, 1.0);
    std::normal_distribution<double> size(0.0, 1.0);
    const int k = count(gen);
    std::vector<JumpPoint> jumps;
    for (int i = 0; i < k; ++i) {
        double t = 0.0;
        while (t == 0.0) t = when(gen);
        Vector a(dim);
        for (int c = 0; c < dim; ++c) a(c) = size(gen);
        jumps.push_back({t, a});
    }
    std::sort(jumps.begin(), jumps.end(), [](const JumpPoint& a, const JumpPoint& b) { return a.time < b.time; });
    return step_path(jumps, 1.0);
}

/// Dyadic grid points k 2^-n T, computed without the library.
inline std::vector<double> dyadic_points(int n, double T = 1.0) {
    std::vector<double> p;
    const std::size_t K = std::size_t{1} << n;
    for (std::size_t k = 0; k <= K; ++k) p.push_back(std::ldexp(T * static_cast<double>(k), -n));
    return p;
}

/// Scalar samples x(t_k) on a point list.
inline std::vector<double> samples(const CadlagPath& x, const std::vector<double>& pts, int coord = 0) {
    std::vector<double> v;
    v.reserve(pts.size());
    for (double t : pts) v.push_back(x.eval(t)(coord));
    return v;
}

/// sum (x(t_{i+1}) - x(t_i))^2 over all intervals.
inline double brute_quad_sum(const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) s += (v[i + 1] - v[i]) * (v[i + 1] - v[i]);
    return s;
}

/// sum (a(t_{i+1}) - a(t_i))(b(t_{i+1}) - b(t_i)).
inline double brute_cross_sum(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < a.size(); ++i) s += (a[i + 1] - a[i]) * (b[i + 1] - b[i]);
    return s;
}

/// sum g(x(t_i)) (x(t_{i+1}) - x(t_i)).
template <class G>
double brute_left_riemann(const std::vector<double>& v, G g) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < v.size(); ++i) s += g(v[i]) * (v[i + 1] - v[i]);
    return s;
}

/// Faber-Schauder values at the level-M dyadic points by direct tent summation, drawing signs
/// in the documented order: sigma_{-1} first, then level by level, top bit of each mt19937_64 draw.
inline std::vector<double> fs_tent_values(int M, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    auto sign = [&gen] { return (gen() >> 63) != 0 ? 1.0 : -1.0; };
    const double s_lin = sign();
    std::vector<std::vector<double>> sig(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m)
        for (std::size_t k = 0; k < (std::size_t{1} << m); ++k) sig[static_cast<std::size_t>(m)].push_back(sign());
    auto tent = [](double u) { return std::max(0.0, 0.5 - std::abs(u - 0.5)); };
    const auto pts = dyadic_points(M);
    std::vector<double> y;
    for (double s : pts) {
        double v = s_lin * s;
        for (int m = 0; m < M; ++m) {
            // only the tent with k <= 2^m s < k + 1 can be nonzero
            const double u = std::ldexp(s, m);
            const auto& row = sig[static_cast<std::size_t>(m)];
            const std::size_t k = std::min(static_cast<std::size_t>(u), row.size() - 1);
            v += row[k] * std::pow(2.0, -0.5 * m) * tent(u - static_cast<double>(k));
        }
        y.push_back(v);
    }
    return y;
}

/// q_n(1) of the tent-sum values restricted to level n <= M.
inline double fs_oracle_qv(const std::vector<double>& y, int M, int n) {
    const std::size_t stride = std::size_t{1} << (M - n);
    std::vector<double> v;
    for (std::size_t k = 0; k < y.size(); k += stride) v.push_back(y[k]);
    return brute_quad_sum(v);
}

} // namespace fixtures
