#pragma once

/**
 * @file path.hpp
 * @brief Piecewise-affine cadlag paths with exact jump bookkeeping.
 *
 * A path is a list of segments [tau_k, tau_{k+1}) (the last one closed at T). Each segment
 * lies on a line stored by its two anchor points, so splitting a segment never changes the
 * values it produces. Left limits at knots and jumps are therefore exact: a continuous path
 * built from node values has Delta x == 0 bit for bit.
 */

#include "partition.hpp"
#include "types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pathcalc {

struct JumpPoint {
    double time;
    Vector size;
};

class CadlagPath {
public:
    /// One affine piece. Values are evaluated on the line through (t0, v0) and (t1, v1).
    struct Segment {
        double start;      ///< knot tau_k
        double t0, t1;     ///< line anchors (t0 < t1 unless flat)
        Vector v0, v1;
        bool flat;         ///< constant value v0
    };

    CadlagPath() = default;

    static CadlagPath from_segments(int dim, double horizon, std::vector<Segment> segs) {
        detail::require(dim >= 1 && dim <= kMaxDim, "path dimension must lie in [1, 16]");
        detail::require(horizon > 0.0 && std::isfinite(horizon), "horizon must be positive");
        detail::require(!segs.empty() && segs.front().start == 0.0, "first segment must start at 0");
        for (std::size_t k = 0; k < segs.size(); ++k) {
            auto& s = segs[k];
            detail::require(s.v0.size() == dim && s.v1.size() == dim, "segment value has wrong dimension");
            detail::require(s.start <= horizon, "segment starts after the horizon");
            if (k > 0) detail::require(s.start > segs[k - 1].start, "segment knots must be strictly increasing");
            if (!s.flat) detail::require(s.t1 > s.t0, "affine segment needs distinct anchors");
            if (s.flat) s.v1 = s.v0;
        }
        if (segs.size() >= 2 && segs.back().start == horizon) segs.back().flat = true;
        CadlagPath p;
        p.d_ = std::make_shared<Data>(Data{dim, horizon, std::move(segs), detail::next_object_id()});
        return p;
    }

    bool valid() const { return d_ != nullptr; }
    int dimension() const { return d_->dim; }
    double horizon() const { return d_->horizon; }
    std::uint64_t id() const { return d_->id; }
    std::span<const Segment> segments() const { return d_->segs; }

    std::vector<double> knots() const {
        std::vector<double> out;
        out.reserve(d_->segs.size());
        for (const auto& s : d_->segs) out.push_back(s.start);
        return out;
    }

    bool is_step() const {
        return std::all_of(d_->segs.begin(), d_->segs.end(), [](const Segment& s) { return s.flat; });
    }

    Vector eval(double t) const {
        check_domain(t);
        const std::size_t k = segment_index(t);
        return line(d_->segs[k], t);
    }

    Vector eval_left(double t) const {
        check_domain(t);
        if (t == 0.0) return eval(0.0);
        const std::size_t k = segment_index_left(t);
        return line(d_->segs[k], t);
    }

    Vector jump(double t) const {
        check_domain(t);
        const auto& s = d_->segs;
        auto it = std::lower_bound(s.begin(), s.end(), t, [](const Segment& a, double v) { return a.start < v; });
        if (it == s.end() || it->start != t || it == s.begin()) return zero_vector(dimension());
        return line(*it, t) - line(*(it - 1), t);
    }

    /// All nonzero jumps in increasing time order.
    std::vector<JumpPoint> jumps() const {
        std::vector<JumpPoint> out;
        const auto& s = d_->segs;
        for (std::size_t k = 1; k < s.size(); ++k) {
            Vector d = line(s[k], s[k].start) - line(s[k - 1], s[k].start);
            if (d.cwiseAbs().maxCoeff() != 0.0) out.push_back({s[k].start, std::move(d)});
        }
        return out;
    }

    bool is_continuous() const { return jumps().empty(); }

    /// Drops knots between consecutive flat segments carrying the same value.
    CadlagPath normalized() const {
        std::vector<Segment> out;
        for (const auto& s : d_->segs) {
            if (!out.empty() && s.flat && out.back().flat && out.back().v0 == s.v0) continue;
            out.push_back(s);
        }
        return from_segments(dimension(), horizon(), std::move(out));
    }

    /// y = A x with A of shape k x m.
    CadlagPath linear_map(const Matrix& a) const {
        detail::require(a.cols() == dimension(), "linear map has wrong input dimension");
        std::vector<Segment> out;
        out.reserve(d_->segs.size());
        for (const auto& s : d_->segs) {
            Segment n = s;
            n.v0 = a * s.v0;
            n.v1 = s.flat ? Vector(n.v0) : Vector(a * s.v1);
            out.push_back(std::move(n));
        }
        return from_segments(static_cast<int>(a.rows()), horizon(), std::move(out));
    }

    CadlagPath component(int i) const {
        detail::require(i >= 0 && i < dimension(), "component index out of range");
        Matrix a = Matrix::Zero(1, dimension());
        a(0, i) = 1.0;
        return linear_map(a);
    }

    CadlagPath scaled(double c) const { return linear_map(c * Matrix::Identity(dimension(), dimension())); }

    /// Sample x at every partition point (row i = x(t_i)).
    std::vector<Vector> sample(const Partition& p) const {
        std::vector<Vector> out;
        out.reserve(p.size());
        std::size_t k = 0;
        const auto& s = d_->segs;
        for (double t : p.points()) {
            check_domain(t);
            while (k + 1 < s.size() && s[k + 1].start <= t) ++k;
            out.push_back(line(s[k], t));
        }
        return out;
    }

    static Vector line(const Segment& s, double t) {
        if (s.flat || t == s.t0) return s.v0;
        if (t == s.t1) return s.v1;
        const double w = (t - s.t0) / (s.t1 - s.t0);
        return s.v0 + w * (s.v1 - s.v0);
    }

private:
    struct Data {
        int dim;
        double horizon;
        std::vector<Segment> segs;
        std::uint64_t id;
    };

    void check_domain(double t) const {
        if (!(t >= 0.0 && t <= d_->horizon))
            throw InvalidArgument("time " + std::to_string(t) + " outside path domain [0, " +
                                  std::to_string(d_->horizon) + "]");
    }

    /// Last segment with start <= t.
    std::size_t segment_index(double t) const {
        const auto& s = d_->segs;
        auto it = std::upper_bound(s.begin(), s.end(), t, [](double v, const Segment& a) { return v < a.start; });
        return static_cast<std::size_t>(it - s.begin()) - 1;
    }

    /// Last segment with start < t.
    std::size_t segment_index_left(double t) const {
        const auto& s = d_->segs;
        auto it = std::lower_bound(s.begin(), s.end(), t, [](const Segment& a, double v) { return a.start < v; });
        return static_cast<std::size_t>(it - s.begin()) - 1;
    }

    std::shared_ptr<const Data> d_;
};

// ---------------------------------------------------------------------------
// constructors

inline CadlagPath::Segment flat_segment(double start, Vector v) {
    CadlagPath::Segment s{start, start, start, v, v, true};
    return s;
}

inline CadlagPath constant_path(const Vector& c, double horizon) {
    return CadlagPath::from_segments(static_cast<int>(c.size()), horizon, {flat_segment(0.0, c)});
}

inline CadlagPath zero_path(int dim, double horizon) { return constant_path(zero_vector(dim), horizon); }

/// x(t) = x0 + sum_{s <= t} jump(s). Jump times strictly increasing in (0, T].
inline CadlagPath step_path(const std::vector<JumpPoint>& jumps, double horizon, std::optional<Vector> x0 = {}) {
    int dim = x0 ? static_cast<int>(x0->size()) : (jumps.empty() ? 1 : static_cast<int>(jumps.front().size.size()));
    Vector v = x0 ? *x0 : zero_vector(dim);
    std::vector<CadlagPath::Segment> segs{flat_segment(0.0, v)};
    double prev = 0.0;
    for (const auto& j : jumps) {
        detail::require(j.size.size() == dim, "jump vectors must share one dimension");
        if (!(j.time > prev || (segs.size() == 1 && j.time > 0.0)))
            throw InvalidArgument("jump times must be strictly increasing and positive (offending time " +
                                  std::to_string(j.time) + ")");
        detail::require(j.time <= horizon, "jump time beyond the horizon");
        v = v + j.size;
        segs.push_back(flat_segment(j.time, v));
        prev = j.time;
    }
    return CadlagPath::from_segments(dim, horizon, std::move(segs));
}

inline CadlagPath step_path(const std::vector<std::pair<double, double>>& jumps, double horizon, double x0 = 0.0) {
    std::vector<JumpPoint> js;
    for (auto [t, a] : jumps) js.push_back({t, scalar_vector(a)});
    return step_path(js, horizon, scalar_vector(x0));
}

/// Continuous path interpolating (times[i], values[i]); times[0] = 0 and times.back() is the horizon.
inline CadlagPath piecewise_linear(const std::vector<double>& times, const std::vector<Vector>& values) {
    detail::require(times.size() >= 2 && times.size() == values.size(), "need at least two interpolation nodes");
    detail::require(times.front() == 0.0, "first node must be at t = 0");
    const int dim = static_cast<int>(values.front().size());
    std::vector<CadlagPath::Segment> segs;
    segs.reserve(times.size() - 1);
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        detail::require(times[i + 1] > times[i], "interpolation nodes must be strictly increasing");
        detail::require(values[i].size() == dim, "node values must share one dimension");
        segs.push_back({times[i], times[i], times[i + 1], values[i], values[i + 1], false});
    }
    return CadlagPath::from_segments(dim, times.back(), std::move(segs));
}

inline CadlagPath piecewise_linear(const std::vector<double>& times, const std::vector<double>& values) {
    std::vector<Vector> v;
    for (double a : values) v.push_back(scalar_vector(a));
    return piecewise_linear(times, v);
}

/**
 * Faber-Schauder path on [0, T]:
 *   y(s) = sigma_{-1} s + sum_{m<M} sum_k sigma_{m,k} 2^{-m/2} Lambda(2^m s - k),
 * Lambda(u) = max(0, 1/2 - |u - 1/2|), x(t) = sqrt(T) y(t/T). Signs come from mt19937_64(seed),
 * drawn as sigma_{-1} first then level by level; the sign is the top bit of each draw.
 */
inline CadlagPath faber_schauder_path(int levels, std::uint64_t seed, double horizon = 1.0) {
    detail::require(levels >= 1 && levels <= 24, "Faber-Schauder level count must lie in [1, 24]");
    detail::require(horizon > 0.0, "horizon must be positive");
    std::mt19937_64 gen(seed);
    auto sign = [&gen] { return (gen() >> 63) != 0 ? 1.0 : -1.0; };
    const std::size_t n = std::size_t{1} << levels;
    std::vector<double> y(n + 1, 0.0);
    y[n] = sign();
    for (int m = 0; m < levels; ++m) {
        const std::size_t step = n >> m;
        const double amp = 0.5 * std::pow(2.0, -0.5 * m);
        for (std::size_t k = 0; k < (std::size_t{1} << m); ++k) {
            const std::size_t lo = k * step, hi = lo + step;
            y[lo + step / 2] = 0.5 * (y[lo] + y[hi]) + sign() * amp;
        }
    }
    const double scale = std::sqrt(horizon);
    std::vector<double> times(n + 1);
    std::vector<Vector> vals(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        times[k] = std::ldexp(horizon * static_cast<double>(k), -levels);
        vals[k] = scalar_vector(scale * y[k]);
    }
    times[n] = horizon;
    return piecewise_linear(times, vals);
}

/// Coordinates built from independent Faber-Schauder paths with seeds seed, seed+1, ...
inline CadlagPath faber_schauder_path(int levels, std::uint64_t seed, double horizon, int dim) {
    const auto base = faber_schauder_path(levels, seed, horizon);
    if (dim == 1) return base;
    std::vector<CadlagPath> comps;
    for (int i = 0; i < dim; ++i) comps.push_back(i == 0 ? base : faber_schauder_path(levels, seed + i, horizon));
    std::vector<CadlagPath::Segment> segs;
    const auto s0 = base.segments();
    for (std::size_t k = 0; k < s0.size(); ++k) {
        CadlagPath::Segment s = s0[k];
        s.v0 = Vector(dim);
        s.v1 = Vector(dim);
        for (int i = 0; i < dim; ++i) {
            s.v0(i) = comps[i].segments()[k].v0(0);
            s.v1(i) = comps[i].segments()[k].v1(0);
        }
        segs.push_back(std::move(s));
    }
    return CadlagPath::from_segments(dim, horizon, std::move(segs));
}

// ---------------------------------------------------------------------------
// operations

/// x_t(s) = x(s ^ t)
inline CadlagPath stop(const CadlagPath& x, double t) {
    const Vector xt = x.eval(t);
    std::vector<CadlagPath::Segment> segs;
    for (const auto& s : x.segments()) {
        if (s.start > t) break;
        segs.push_back(s);
    }
    if (segs.back().start == t) {
        segs.back().flat = true;
        segs.back().v0 = segs.back().v1 = xt;
    } else if (t < x.horizon() && !segs.back().flat) {
        segs.push_back(flat_segment(t, xt));
    }
    return CadlagPath::from_segments(x.dimension(), x.horizon(), std::move(segs));
}

/// x_{t-}(s) = x(s) for s < t, x(t-) for s >= t
inline CadlagPath stop_left(const CadlagPath& x, double t) {
    if (t == 0.0) return constant_path(x.eval(0.0), x.horizon());
    const Vector xl = x.eval_left(t);
    std::vector<CadlagPath::Segment> segs;
    for (const auto& s : x.segments()) {
        if (s.start >= t) break;
        segs.push_back(s);
    }
    if (t < x.horizon()) {
        if (!(segs.back().flat && segs.back().v0 == xl)) segs.push_back(flat_segment(t, xl));
    }
    return CadlagPath::from_segments(x.dimension(), x.horizon(), std::move(segs));
}

/// stop(x, t) + e 1_{[t, inf)}
inline CadlagPath vertical_perturb(const CadlagPath& x, double t, const Vector& e) {
    detail::require(e.size() == x.dimension(), "bump dimension does not match the path");
    const Vector xt = x.eval(t);
    std::vector<CadlagPath::Segment> segs;
    for (const auto& s : x.segments()) {
        if (s.start >= t) break;
        segs.push_back(s);
    }
    segs.push_back(flat_segment(t, xt + e));
    return CadlagPath::from_segments(x.dimension(), x.horizon(), std::move(segs));
}

/// x^n = sum_i x(t_{i+1}) 1_{[t_i, t_{i+1})}, with x^n(T) = x(T).
inline CadlagPath pc_approx(const CadlagPath& x, const Partition& p) {
    detail::require(p.horizon() == x.horizon(), "partition horizon differs from the path horizon");
    const auto v = x.sample(p);
    std::vector<CadlagPath::Segment> segs;
    segs.reserve(p.size() - 1);
    for (std::size_t i = 0; i + 1 < p.size(); ++i) segs.push_back(flat_segment(p[i], v[i + 1]));
    return CadlagPath::from_segments(x.dimension(), x.horizon(), std::move(segs));
}

/// Continuous interpolation of x(t_i) at the partition points.
inline CadlagPath pl_approx(const CadlagPath& x, const Partition& p) {
    detail::require(p.horizon() == x.horizon(), "partition horizon differs from the path horizon");
    const auto v = x.sample(p);
    std::vector<double> times(p.points().begin(), p.points().end());
    return piecewise_linear(times, v);
}

namespace detail {

inline std::vector<double> merged_knots(const CadlagPath& f, const CadlagPath& g) {
    auto a = f.knots();
    auto b = g.knots();
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Evaluation at nondecreasing times in one forward sweep; matches eval and eval_left.
class Cursor {
public:
    explicit Cursor(const CadlagPath& p) : s_(p.segments()) {}

    Vector at(double t) {
        while (k_ + 1 < s_.size() && s_[k_ + 1].start <= t) ++k_;
        return CadlagPath::line(s_[k_], t);
    }

    /// Left limit at t > 0.
    Vector left(double t) {
        while (k_ + 1 < s_.size() && s_[k_ + 1].start < t) ++k_;
        return CadlagPath::line(s_[k_], t);
    }

private:
    std::span<const CadlagPath::Segment> s_;
    std::size_t k_ = 0;
};

inline void require_compatible(const CadlagPath& f, const CadlagPath& g) {
    require(f.dimension() == g.dimension(), "path dimensions differ (" + std::to_string(f.dimension()) + " vs " +
                                                std::to_string(g.dimension()) + ")");
    require(f.horizon() == g.horizon(), "path horizons differ");
}

} // namespace detail

/// a f + b g on the merged knot set.
inline CadlagPath combine(double a, const CadlagPath& f, double b, const CadlagPath& g) {
    detail::require_compatible(f, g);
    const auto knots = detail::merged_knots(f, g);
    const double T = f.horizon();
    std::vector<CadlagPath::Segment> segs;
    segs.reserve(knots.size());
    detail::Cursor cf(f), cg(g), lf(f), lg(g);
    for (std::size_t j = 0; j < knots.size(); ++j) {
        const double u = knots[j];
        const double w = j + 1 < knots.size() ? knots[j + 1] : T;
        const Vector v0 = a * cf.at(u) + b * cg.at(u);
        if (w == u) {
            segs.push_back(flat_segment(u, v0));
            continue;
        }
        const Vector v1 = a * lf.left(w) + b * lg.left(w);
        if (v0 == v1)
            segs.push_back(flat_segment(u, v0));
        else
            segs.push_back({u, u, w, v0, v1, false});
    }
    return CadlagPath::from_segments(f.dimension(), T, std::move(segs));
}

inline CadlagPath operator+(const CadlagPath& f, const CadlagPath& g) { return combine(1.0, f, 1.0, g); }
inline CadlagPath operator-(const CadlagPath& f, const CadlagPath& g) { return combine(1.0, f, -1.0, g); }

/// Exact sup_{[0,T]} |f - g| (Euclidean norm); both are affine between merged knots.
inline double sup_distance(const CadlagPath& f, const CadlagPath& g) {
    detail::require_compatible(f, g);
    const auto knots = detail::merged_knots(f, g);
    double best = 0.0;
    for (double u : knots) {
        best = std::max(best, (f.eval(u) - g.eval(u)).norm());
        if (u > 0.0) best = std::max(best, (f.eval_left(u) - g.eval_left(u)).norm());
    }
    const double T = f.horizon();
    best = std::max(best, (f.eval(T) - g.eval(T)).norm());
    best = std::max(best, (f.eval_left(T) - g.eval_left(T)).norm());
    return best;
}

} // namespace pathcalc
