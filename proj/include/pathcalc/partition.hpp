#pragma once

/**
 * @file partition.hpp
 * @brief Interval partitions of [0, T] and refining partition sequences.
 */

#include "types.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pathcalc {

namespace detail {
inline std::uint64_t next_object_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
}
} // namespace detail

struct Straddle {
    double prev;        ///< max{t_i < t}, 0 if none
    double next;        ///< min{t_i >= t}, last point if none
    double next_strict; ///< min{t_i > t}, last point if none
};

/// Immutable, cheaply copyable partition 0 = t_0 < ... < t_K = T.
class Partition {
public:
    static Partition from_points(std::vector<double> pts) {
        detail::require(pts.size() >= 2, "partition needs at least two points");
        detail::require(pts.front() == 0.0, "partition must start at 0");
        for (std::size_t i = 1; i < pts.size(); ++i)
            detail::require(pts[i] > pts[i - 1],
                            "partition points must be strictly increasing (duplicate or unordered point at index " +
                                std::to_string(i) + ")");
        return Partition(std::move(pts), std::nullopt);
    }

    /// Points k * T * 2^-n, k = 0..2^n. Exact in binary when T is a power of two.
    static Partition dyadic(double horizon, int level) {
        detail::require(horizon > 0.0 && std::isfinite(horizon), "horizon must be positive");
        detail::require(level >= 0 && level <= 30, "dyadic level must lie in [0, 30]");
        const std::size_t n = std::size_t{1} << level;
        std::vector<double> pts(n + 1);
        for (std::size_t k = 0; k <= n; ++k) pts[k] = std::ldexp(horizon * static_cast<double>(k), -level);
        pts[n] = horizon;
        return Partition(std::move(pts), level);
    }

    static Partition uniform(double horizon, std::size_t intervals) {
        detail::require(horizon > 0.0 && std::isfinite(horizon), "horizon must be positive");
        detail::require(intervals >= 1, "uniform partition needs at least one interval");
        std::vector<double> pts(intervals + 1);
        for (std::size_t k = 0; k <= intervals; ++k)
            pts[k] = horizon * static_cast<double>(k) / static_cast<double>(intervals);
        pts[intervals] = horizon;
        return Partition(std::move(pts), std::nullopt);
    }

    std::span<const double> points() const { return d_->points; }
    std::size_t size() const { return d_->points.size(); }
    std::size_t intervals() const { return d_->points.size() - 1; }
    double operator[](std::size_t i) const { return d_->points[i]; }
    double horizon() const { return d_->points.back(); }
    std::uint64_t id() const { return d_->id; }
    std::optional<int> dyadic_level() const { return d_->level; }

    double mesh() const {
        double m = 0.0;
        for (std::size_t i = 1; i < size(); ++i) m = std::max(m, d_->points[i] - d_->points[i - 1]);
        return m;
    }

    /// Exact membership test (no tolerance).
    bool contains(double t) const {
        const auto& p = d_->points;
        return std::binary_search(p.begin(), p.end(), t);
    }

    /// #{t_i < t}
    std::size_t count_below(double t) const {
        const auto& p = d_->points;
        return static_cast<std::size_t>(std::lower_bound(p.begin(), p.end(), t) - p.begin());
    }

    /// #{t_i <= t}
    std::size_t count_upto(double t) const {
        const auto& p = d_->points;
        return static_cast<std::size_t>(std::upper_bound(p.begin(), p.end(), t) - p.begin());
    }

    /// Successor of point i with the empty-min convention: the last point maps to itself.
    double next_of(std::size_t i) const { return d_->points[std::min(i + 1, size() - 1)]; }

    double prev_point(double t) const {
        check_domain(t);
        const std::size_t k = count_below(t);
        return k == 0 ? 0.0 : d_->points[k - 1];
    }

    Straddle straddle(double t) const {
        check_domain(t);
        const auto& p = d_->points;
        const std::size_t below = count_below(t);
        const std::size_t upto = count_upto(t);
        Straddle s{};
        s.prev = below == 0 ? 0.0 : p[below - 1];
        s.next = below < p.size() ? p[below] : p.back();
        s.next_strict = upto < p.size() ? p[upto] : p.back();
        return s;
    }

    friend bool operator==(const Partition& a, const Partition& b) {
        return a.d_ == b.d_ || a.d_->points == b.d_->points;
    }

private:
    struct Data {
        std::vector<double> points;
        std::optional<int> level;
        std::uint64_t id;
    };

    Partition(std::vector<double> pts, std::optional<int> level)
        : d_(std::make_shared<const Data>(Data{std::move(pts), level, detail::next_object_id()})) {}

    void check_domain(double t) const {
        if (!(t >= 0.0 && t <= horizon()))
            throw InvalidArgument("time " + std::to_string(t) + " outside [0, " + std::to_string(horizon()) + "]");
    }

    std::shared_ptr<const Data> d_;
};

enum class PartitionKind { dyadic, uniform, custom };

/**
 * Refining sequence pi_n for n in [min_level, max_level]. All levels are built eagerly
 * so that every Partition keeps a stable identity for cache keys.
 */
class PartitionSequence {
public:
    PartitionKind kind() const { return kind_; }
    double horizon() const { return horizon_; }
    int min_level() const { return min_level_; }
    int max_level() const { return min_level_ + static_cast<int>(levels_.size()) - 1; }
    bool has_level(int n) const { return n >= min_level() && n <= max_level(); }

    const Partition& level(int n) const {
        if (!has_level(n))
            throw InvalidArgument("level " + std::to_string(n) + " outside [" + std::to_string(min_level()) + ", " +
                                  std::to_string(max_level()) + "]");
        return levels_[static_cast<std::size_t>(n - min_level_)];
    }

    const Partition& top() const { return levels_.back(); }

    std::vector<int> level_numbers() const {
        std::vector<int> out;
        for (int n = min_level(); n <= max_level(); ++n) out.push_back(n);
        return out;
    }

    /// Same sequence restricted to [lo, hi].
    PartitionSequence restricted(int lo, int hi) const {
        detail::require(lo <= hi && has_level(lo) && has_level(hi), "level range outside the sequence");
        PartitionSequence s = *this;
        s.levels_.assign(levels_.begin() + (lo - min_level_), levels_.begin() + (hi - min_level_ + 1));
        s.min_level_ = lo;
        return s;
    }

    friend PartitionSequence dyadic_sequence(double horizon, int max_level, int min_level);
    friend PartitionSequence uniform_sequence(double horizon, std::size_t base, int max_level, int min_level);
    friend PartitionSequence custom_sequence(std::vector<std::vector<double>> lists);

private:
    PartitionKind kind_ = PartitionKind::dyadic;
    double horizon_ = 1.0;
    int min_level_ = 1;
    std::vector<Partition> levels_;
};

inline PartitionSequence dyadic_sequence(double horizon, int max_level, int min_level = 1) {
    detail::require(horizon > 0.0 && std::isfinite(horizon), "horizon must be positive");
    detail::require(max_level >= 1, "max_level must be at least 1");
    detail::require(min_level >= 0 && min_level <= max_level, "min_level must lie in [0, max_level]");
    detail::require(max_level <= 24, "dyadic levels above 24 are not supported");
    PartitionSequence s;
    s.kind_ = PartitionKind::dyadic;
    s.horizon_ = horizon;
    s.min_level_ = min_level;
    for (int n = min_level; n <= max_level; ++n) s.levels_.push_back(Partition::dyadic(horizon, n));
    return s;
}

/// Level n has base * n equal intervals (mesh T / (base * n), nonincreasing in n).
inline PartitionSequence uniform_sequence(double horizon, std::size_t base, int max_level = 1, int min_level = 1) {
    detail::require(horizon > 0.0 && std::isfinite(horizon), "horizon must be positive");
    detail::require(base >= 1, "uniform base count must be at least 1");
    detail::require(min_level >= 1 && min_level <= max_level, "levels must satisfy 1 <= min <= max");
    PartitionSequence s;
    s.kind_ = PartitionKind::uniform;
    s.horizon_ = horizon;
    s.min_level_ = min_level;
    for (int n = min_level; n <= max_level; ++n)
        s.levels_.push_back(Partition::uniform(horizon, base * static_cast<std::size_t>(n)));
    return s;
}

/// Levels 1..k from explicit point lists; each must end at the common horizon.
inline PartitionSequence custom_sequence(std::vector<std::vector<double>> lists) {
    detail::require(!lists.empty(), "custom sequence needs at least one partition");
    PartitionSequence s;
    s.kind_ = PartitionKind::custom;
    s.min_level_ = 1;
    for (auto& l : lists) s.levels_.push_back(Partition::from_points(std::move(l)));
    s.horizon_ = s.levels_.front().horizon();
    for (const auto& p : s.levels_) detail::require(p.horizon() == s.horizon_, "custom partitions must share one horizon");
    return s;
}

} // namespace pathcalc
