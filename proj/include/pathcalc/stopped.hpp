#pragma once

/**
 * @file stopped.hpp
 * @brief Non-materializing view of a stopped path, the only argument functionals receive.
 *
 * A view represents one of
 *   x_t, x_{t-}                 (raw base path)
 *   x^n_t, x^n_{t-}             (piecewise-constant approximation along a sampling grid)
 * optionally followed by vertical bumps e 1_{[b, inf)} (b >= t) and evaluated at a functional
 * time tau >= t (horizontal extension keeps the path frozen).
 *
 * Conventions for x^n: x^n(s) = x(t_{i+1}) on [t_i, t_{i+1}), x^n(T) = x(T), and the left value
 * at the origin is x(0), so that sums over x^n_{t_i-} reproduce left Riemann sums of x.
 */

#include "partition.hpp"
#include "path.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace pathcalc {

struct Bump {
    double time;
    Vector size;
};

/// One term of a grid sum: left point, left value, increment, and where the integrand is evaluated.
struct SumTerm {
    double time;
    Vector left;
    Vector increment;
    std::ptrdiff_t grid_index; ///< >= 0: evaluate on x^G_{t_index-}; -1: on the view stopped left at `time`
};

/**
 * Decomposition of a grid sum over a view: terms 0..prefix-1 are the raw-sample terms
 * (t_i, x(t_i), x(t_{i+1}) - x(t_i)) of the base path on `grid`; `tail` holds the remaining terms.
 */
struct Skeleton {
    Partition grid;
    std::size_t prefix;
    std::vector<SumTerm> tail;
};

class StoppedPath {
public:
    static StoppedPath raw(const CadlagPath& x, double t, bool left = false) {
        detail::require(t >= 0.0 && t <= x.horizon(), "stop time outside the path domain");
        return StoppedPath(x, std::nullopt, t, left);
    }

    static StoppedPath pc(const CadlagPath& x, const Partition& p, double t, bool left = false) {
        detail::require(p.horizon() == x.horizon(), "sampling partition horizon differs from the path horizon");
        detail::require(t >= 0.0 && t <= x.horizon(), "stop time outside the path domain");
        return StoppedPath(x, p, t, left);
    }

    double time() const { return time_; }
    double stop_time() const { return freeze_; }
    bool is_left() const { return left_; }
    int dimension() const { return base_.dimension(); }
    double horizon() const { return base_.horizon(); }
    const CadlagPath& base() const { return base_; }
    const std::optional<Partition>& sampling() const { return sampling_; }
    const std::vector<Bump>& bumps() const { return bumps_; }

    Vector value(double s) const {
        if (s < freeze_) return base_value(s);
        Vector v = freeze_value();
        for (const auto& b : bumps_)
            if (b.time <= s) v += b.size;
        return v;
    }

    Vector left_value(double s) const {
        if (s == 0.0) return freeze_ > 0.0 ? base_value(0.0) : freeze_value();
        if (s <= freeze_) return base_left(s);
        Vector v = freeze_value();
        for (const auto& b : bumps_)
            if (b.time < s) v += b.size;
        return v;
    }

    Vector jump_at(double s) const { return value(s) - left_value(s); }
    Vector terminal() const { return value(time_); }
    Vector left_terminal() const { return left_value(time_); }

    /// y + e 1_{[tau, inf)}
    StoppedPath bumped(const Vector& e) const {
        detail::require(e.size() == dimension(), "bump dimension does not match the path");
        StoppedPath out = *this;
        if (!out.bumps_.empty() && out.bumps_.back().time == time_)
            out.bumps_.back().size += e;
        else
            out.bumps_.push_back({time_, e});
        return out;
    }

    /// Same frozen path, functional time tau + h.
    StoppedPath advanced(double h) const {
        detail::require(h >= 0.0 && time_ + h <= horizon(), "horizontal shift leaves the domain");
        StoppedPath out = *this;
        out.time_ = time_ + h;
        return out;
    }

    /// y_{b-} at functional time b, for freeze <= b <= tau.
    StoppedPath stopped_left_at(double b) const {
        detail::require(b >= freeze_ && b <= time_, "left stop outside [stop time, functional time]");
        StoppedPath out = *this;
        out.time_ = b;
        if (b == freeze_) out.left_ = true;
        std::erase_if(out.bumps_, [b](const Bump& k) { return k.time >= b; });
        return out;
    }

    StoppedPath left_stopped() const { return stopped_left_at(time_); }

    /// Grid-sum decomposition; raw views need an ambient partition.
    Skeleton skeleton(const std::optional<Partition>& ambient) const {
        if (sampling_) return pc_skeleton();
        if (!ambient) throw PreconditionError("path-dependent functional on a raw path needs an ambient partition");
        return raw_skeleton(*ambient);
    }

    CadlagPath materialize() const {
        CadlagPath y;
        if (sampling_ && left_ && freeze_ == 0.0)
            y = constant_path(base_.eval(0.0), horizon());
        else {
            const CadlagPath b = sampling_ ? pc_approx(base_, *sampling_) : base_;
            y = left_ ? stop_left(b, freeze_) : stop(b, freeze_);
        }
        for (const auto& k : bumps_) y = y + step_path({{k.time, k.size}}, horizon(), zero_vector(dimension()));
        return y;
    }

private:
    StoppedPath(CadlagPath x, std::optional<Partition> p, double t, bool left)
        : base_(std::move(x)), sampling_(std::move(p)), freeze_(t), left_(left), time_(t) {}

    Vector base_value(double s) const {
        if (!sampling_) return base_.eval(s);
        if (s >= horizon()) return base_.eval(horizon());
        const auto& p = *sampling_;
        return base_.eval(p[std::min(p.count_upto(s), p.size() - 1)]);
    }

    Vector base_left(double s) const {
        if (!sampling_) return base_.eval_left(s);
        if (s == 0.0) return base_.eval(0.0);
        const auto& p = *sampling_;
        return base_.eval(p[std::min(p.count_below(s), p.size() - 1)]);
    }

    Vector freeze_value() const { return left_ ? base_left(freeze_) : base_value(freeze_); }

    Skeleton pc_skeleton() const {
        const auto& p = *sampling_;
        std::size_t n = left_ ? p.count_below(freeze_) : p.count_upto(freeze_);
        Skeleton sk{p, std::min(n, p.intervals()), {}};
        add_bump_terms(sk);
        return sk;
    }

    Skeleton raw_skeleton(const Partition& g) const {
        detail::require(g.horizon() == horizon(), "ambient partition horizon differs from the path horizon");
        const std::size_t k = g.count_below(freeze_);
        Skeleton sk{g, 0, {}};
        if (k == 0) {
            add_bump_terms(sk);
            return sk;
        }
        sk.prefix = k - 1;
        const double tl = g[k - 1];
        const double tr = k < g.size() ? std::min(g[k], time_) : time_;
        const Vector xl = base_.eval(tl);
        // the jump at the stop time (and any bump there) is its own term, weighted at x(t-)
        const Vector xm = left_value(freeze_);
        sk.tail.push_back({tl, xl, xm - xl, static_cast<std::ptrdiff_t>(k - 1)});
        sk.tail.push_back({freeze_, xm, value(tr) - xm, -1});
        for (const auto& b : bumps_)
            if (b.time > tr) sk.tail.push_back({b.time, left_value(b.time), b.size, -1});
        return sk;
    }

    void add_bump_terms(Skeleton& sk) const {
        for (const auto& b : bumps_) sk.tail.push_back({b.time, left_value(b.time), b.size, -1});
    }

    CadlagPath base_;
    std::optional<Partition> sampling_;
    double freeze_;
    bool left_;
    double time_;
    std::vector<Bump> bumps_;
};

} // namespace pathcalc
