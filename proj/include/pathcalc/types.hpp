#pragma once

/**
 * @file types.hpp
 * @brief Shared numeric types, error classes and verdicts.
 */

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace pathcalc {

/// Largest path dimension stored inline; matrix-valued paths are flattened, so m*m <= 16.
inline constexpr int kMaxDim = 16;

using Vector = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;
using Matrix = Eigen::MatrixXd;

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A documented precondition of an algorithm does not hold for the supplied input.
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Internal cross-check failed (e.g. a negative continuous quadratic variation).
class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Verdict { converged, diverged, not_applicable };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::converged: return "converged";
    case Verdict::diverged: return "diverged";
    case Verdict::not_applicable: return "not-applicable";
    }
    return "?";
}

inline Vector zero_vector(int m) { return Vector::Zero(m); }

inline Vector scalar_vector(double v) {
    Vector out(1);
    out(0) = v;
    return out;
}

/// Column-major flattening of a square matrix into a path value.
inline Vector flatten(const Matrix& a) {
    Vector out(a.size());
    for (Eigen::Index j = 0; j < a.cols(); ++j)
        for (Eigen::Index i = 0; i < a.rows(); ++i) out(j * a.rows() + i) = a(i, j);
    return out;
}

inline Matrix unflatten(const Vector& v, int m) {
    Matrix out(m, m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i) out(i, j) = v(j * m + i);
    return out;
}

namespace detail {

inline void require(bool ok, const char* what) {
    if (!ok) throw InvalidArgument(what);
}

inline void require(bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument(what);
}

} // namespace detail

} // namespace pathcalc
