#pragma once

/**
 * @file builtins.hpp
 * @brief Builtin functional families with analytic derivatives.
 *
 * Grid-sum functionals (quadratic-variation integrals, Follmer integrals, the path-dependent
 * 1-form) are evaluated through the view's Skeleton: the bulk of the sum over raw samples of the
 * base path is read from a prefix table cached per (path, partition) pair, the O(1) tail is
 * computed on the fly. This keeps a sweep over all grid points linear in the grid size.
 */

#include "functional.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

namespace pathcalc {

// ---------------------------------------------------------------------------
// scalar and space-time functions

struct ScalarFunction {
    std::string name;
    std::function<double(double)> f, df, d2f;
    bool affine = false;
};

inline ScalarFunction scalar_function(const std::string& name) {
    using F = std::function<double(double)>;
    auto mk = [&](F f, F df, F d2f, bool affine = false) { return ScalarFunction{name, f, df, d2f, affine}; };
    if (name == "zero") return mk([](double) { return 0.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }, true);
    if (name == "one") return mk([](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }, true);
    if (name == "identity")
        return mk([](double u) { return u; }, [](double) { return 1.0; }, [](double) { return 0.0; }, true);
    if (name == "square")
        return mk([](double u) { return u * u; }, [](double u) { return 2 * u; }, [](double) { return 2.0; });
    if (name == "cube")
        return mk([](double u) { return u * u * u; }, [](double u) { return 3 * u * u; }, [](double u) { return 6 * u; });
    if (name == "quartic")
        return mk([](double u) { return u * u * u * u; }, [](double u) { return 4 * u * u * u; },
                  [](double u) { return 12 * u * u; });
    if (name == "sin")
        return mk([](double u) { return std::sin(u); }, [](double u) { return std::cos(u); },
                  [](double u) { return -std::sin(u); });
    if (name == "cos")
        return mk([](double u) { return std::cos(u); }, [](double u) { return -std::sin(u); },
                  [](double u) { return -std::cos(u); });
    if (name == "exp")
        return mk([](double u) { return std::exp(u); }, [](double u) { return std::exp(u); },
                  [](double u) { return std::exp(u); });
    throw InvalidArgument("unknown function name '" + name + "'");
}

/// f(t, u) with its derivatives.
struct SpaceTimeFunction {
    std::string name;
    std::function<double(double, const Vector&)> f, dt;
    std::function<Vector(double, const Vector&)> grad;
    std::function<Matrix(double, const Vector&)> hess;
};

/// f(t, u) = sum_i g(u_i)
inline SpaceTimeFunction separable(const ScalarFunction& g) {
    return {g.name,
            [g](double, const Vector& u) {
                double s = 0.0;
                for (Eigen::Index i = 0; i < u.size(); ++i) s += g.f(u(i));
                return s;
            },
            [](double, const Vector&) { return 0.0; },
            [g](double, const Vector& u) {
                Vector d(u.size());
                for (Eigen::Index i = 0; i < u.size(); ++i) d(i) = g.df(u(i));
                return d;
            },
            [g](double, const Vector& u) {
                Matrix h = Matrix::Zero(u.size(), u.size());
                for (Eigen::Index i = 0; i < u.size(); ++i) h(i, i) = g.d2f(u(i));
                return h;
            }};
}

/// Space-time harmonic polynomials of the heat operator d_t + (1/2) d_uu (scalar paths).
inline SpaceTimeFunction heat_polynomial(int degree) {
    auto u0 = [](const Vector& u) {
        detail::require(u.size() == 1, "heat polynomials are defined for scalar paths");
        return u(0);
    };
    auto sv = [](double v) { return scalar_vector(v); };
    auto sm = [](double v) { return Matrix::Constant(1, 1, v); };
    switch (degree) {
    case 1:
        return {"heat1", [=](double, const Vector& u) { return u0(u); }, [](double, const Vector&) { return 0.0; },
                [=](double, const Vector&) { return sv(1.0); }, [=](double, const Vector&) { return sm(0.0); }};
    case 2:
        return {"heat2", [=](double t, const Vector& u) { return u0(u) * u0(u) - t; },
                [](double, const Vector&) { return -1.0; }, [=](double, const Vector& u) { return sv(2 * u0(u)); },
                [=](double, const Vector&) { return sm(2.0); }};
    case 3:
        return {"heat3", [=](double t, const Vector& u) { const double v = u0(u); return v * v * v - 3 * t * v; },
                [=](double, const Vector& u) { return -3 * u0(u); },
                [=](double t, const Vector& u) { const double v = u0(u); return sv(3 * v * v - 3 * t); },
                [=](double, const Vector& u) { return sm(6 * u0(u)); }};
    case 4:
        return {"heat4",
                [=](double t, const Vector& u) { const double v = u0(u); return v * v * v * v - 6 * t * v * v + 3 * t * t; },
                [=](double t, const Vector& u) { const double v = u0(u); return -6 * v * v + 6 * t; },
                [=](double t, const Vector& u) { const double v = u0(u); return sv(4 * v * v * v - 12 * t * v); },
                [=](double t, const Vector& u) { const double v = u0(u); return sm(12 * v * v - 12 * t); }};
    default: throw InvalidArgument("heat polynomial degree must lie in 1..4");
    }
}

/// Matrix-valued integrand phi(t, u) for quadratic-variation integrals.
struct MatrixFunction {
    std::string name;
    std::function<Matrix(double, const Vector&)> f;
};

inline MatrixFunction matrix_function(const std::string& name) {
    if (name == "identity")
        return {name, [](double, const Vector& u) { return Matrix(Matrix::Identity(u.size(), u.size())); }};
    if (name == "square")
        return {name, [](double, const Vector& u) { return Matrix(u.squaredNorm() * Matrix::Identity(u.size(), u.size())); }};
    if (name == "time")
        return {name, [](double t, const Vector& u) { return Matrix(t * Matrix::Identity(u.size(), u.size())); }};
    if (name == "outer") return {name, [](double, const Vector& u) { return Matrix(u * u.transpose()); }};
    throw InvalidArgument("unknown integrand name '" + name + "'");
}

// ---------------------------------------------------------------------------
// prefix-sum machinery

namespace detail {

struct TermSite {
    const StoppedPath* view; ///< view being evaluated (tail terms)
    const CadlagPath* base;
    const Partition* grid;
    std::ptrdiff_t index;    ///< grid index of the left point, or -1 for bump terms
    double time;
    const Vector* left;
    const Vector* increment;

    /// Path on which an integrand is evaluated for this term: x^G_{t_i-} or y_{b-}.
    StoppedPath integrand_view() const {
        if (index >= 0) return StoppedPath::pc(*base, *grid, (*grid)[static_cast<std::size_t>(index)], true);
        return view->stopped_left_at(time);
    }
};

using TermFn = std::function<void(const TermSite&, double*)>;

/// Prefix tables of a per-term quantity of fixed width, keyed by (path id, partition id).
class PrefixCache {
public:
    PrefixCache(std::size_t width, TermFn term) : width_(width), term_(std::move(term)) {}

    std::size_t width() const { return width_; }

    std::shared_ptr<const std::vector<double>> table(const CadlagPath& x, const Partition& p) {
        const auto key = std::make_pair(x.id(), p.id());
        {
            std::lock_guard<std::mutex> lock(mutex_);
            auto it = map_.find(key);
            if (it != map_.end()) return it->second;
        }
        auto tab = std::make_shared<std::vector<double>>(p.size() * width_, 0.0);
        const auto v = x.sample(p);
        std::vector<double> acc(width_, 0.0), term(width_);
        for (std::size_t j = 0; j + 1 < p.size(); ++j) {
            const Vector inc = v[j + 1] - v[j];
            std::fill(term.begin(), term.end(), 0.0);
            term_(TermSite{nullptr, &x, &p, static_cast<std::ptrdiff_t>(j), p[j], &v[j], &inc}, term.data());
            for (std::size_t w = 0; w < width_; ++w) {
                acc[w] += term[w];
                (*tab)[(j + 1) * width_ + w] = acc[w];
            }
        }
        std::lock_guard<std::mutex> lock(mutex_);
        if (map_.size() >= 64) map_.clear();
        map_.emplace(key, tab);
        return tab;
    }

    /// Full grid sum over the view into out[0..width).
    void accumulate(const StoppedPath& y, const EvalContext& ctx, double* out) {
        const Skeleton sk = y.skeleton(ctx.grid);
        const auto tab = table(y.base(), sk.grid);
        for (std::size_t w = 0; w < width_; ++w) out[w] = (*tab)[sk.prefix * width_ + w];
        std::vector<double> term(width_);
        for (const auto& t : sk.tail) {
            std::fill(term.begin(), term.end(), 0.0);
            term_(TermSite{&y, &y.base(), &sk.grid, t.grid_index, t.time, &t.left, &t.increment}, term.data());
            for (std::size_t w = 0; w < width_; ++w) out[w] += term[w];
        }
    }

    std::vector<double> accumulate(const StoppedPath& y, const EvalContext& ctx) {
        std::vector<double> out(width_);
        accumulate(y, ctx, out.data());
        return out;
    }

private:
    std::size_t width_;
    TermFn term_;
    std::mutex mutex_;
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::shared_ptr<const std::vector<double>>> map_;
};

inline Vector to_vector(const std::vector<double>& v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
}

inline FunctionalClass join_linear(FunctionalClass a, FunctionalClass b) {
    using C = FunctionalClass;
    if (a == C::generic || b == C::generic) return C::generic;
    if (a == C::classM && b == C::classM) return C::classM;
    if ((a == C::classM || a == C::classS) && (b == C::classM || b == C::classS)) return C::classS;
    return C::C12;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Markov-type functionals

/// F(t, x) = f(t, x(t))
inline Functional markov(const SpaceTimeFunction& st, FunctionalClass cls = FunctionalClass::C12) {
    Functional F;
    F.name = st.name;
    F.value = [st](const StoppedPath& y, const EvalContext&) { return st.f(y.time(), y.terminal()); };
    F.dt = [st](const StoppedPath& y, const EvalContext&) { return st.dt(y.time(), y.terminal()); };
    F.grad = [st](const StoppedPath& y, const EvalContext&) { return st.grad(y.time(), y.terminal()); };
    F.hess = [st](const StoppedPath& y, const EvalContext&) { return st.hess(y.time(), y.terminal()); };
    F.declared = cls;
    return F;
}

/// F(t, x) = sum_i g(x_i(t))
inline Functional eval(const ScalarFunction& g) {
    Functional F = markov(separable(g), g.affine ? FunctionalClass::classM : FunctionalClass::C12);
    F.name = "eval(" + g.name + ")";
    return F;
}

/// F(t, x) = alpha + beta . x(t)
inline Functional markov_affine(double alpha, const Vector& beta) {
    Functional F;
    F.name = "affine";
    F.value = [alpha, beta](const StoppedPath& y, const EvalContext&) {
        detail::require(beta.size() == y.dimension(), "affine coefficient dimension does not match the path");
        return alpha + beta.dot(y.terminal());
    };
    F.dt = [](const StoppedPath&, const EvalContext&) { return 0.0; };
    F.grad = [beta](const StoppedPath&, const EvalContext&) { return beta; };
    F.hess = [](const StoppedPath& y, const EvalContext&) { return Matrix(Matrix::Zero(y.dimension(), y.dimension())); };
    F.declared = FunctionalClass::classM;
    return F;
}

/// F(t, x) = sum_i g(x_i(t-)), strictly causal. Not horizontally differentiable at jump times,
/// and F(T) - F(0) is not an integral of its (zero) gradient, so it is declared generic.
inline Functional left_eval(const ScalarFunction& g) {
    Functional F;
    F.name = "left_eval(" + g.name + ")";
    F.value = [g](const StoppedPath& y, const EvalContext&) {
        const Vector v = y.left_terminal();
        double s = 0.0;
        for (Eigen::Index i = 0; i < v.size(); ++i) s += g.f(v(i));
        return s;
    };
    F.grad = [](const StoppedPath& y, const EvalContext&) { return zero_vector(y.dimension()); };
    F.hess = [](const StoppedPath& y, const EvalContext&) { return Matrix(Matrix::Zero(y.dimension(), y.dimension())); };
    F.declared = FunctionalClass::generic;
    return F;
}

/// F(t, x) = t^k (path independent).
inline Functional time_power(int k) {
    Functional F;
    F.name = "t^" + std::to_string(k);
    F.value = [k](const StoppedPath& y, const EvalContext&) { return std::pow(y.time(), k); };
    F.dt = [k](const StoppedPath& y, const EvalContext&) { return k == 0 ? 0.0 : k * std::pow(y.time(), k - 1); };
    F.grad = [](const StoppedPath& y, const EvalContext&) { return zero_vector(y.dimension()); };
    F.hess = [](const StoppedPath& y, const EvalContext&) { return Matrix(Matrix::Zero(y.dimension(), y.dimension())); };
    F.declared = k == 0 ? FunctionalClass::classM : FunctionalClass::C12;
    return F;
}

/// F(t, x) = |Delta x_t(t0)|; not differentiable, no analytic derivatives.
inline Functional jump_size_at(double t0) {
    Functional F;
    F.name = "jump_at";
    F.value = [t0](const StoppedPath& y, const EvalContext&) {
        if (y.time() < t0) return 0.0;
        return y.jump_at(t0).norm();
    };
    F.declared = FunctionalClass::generic;
    return F;
}

// ---------------------------------------------------------------------------
// grid-sum functionals

/// F(t, x) = int_0^t <phi(s, x_{s-}), d[x](s)>, C12 with grad (phi + phi')(t, x_{t-}) Delta x(t).
inline Functional qv_integral(const MatrixFunction& phi) {
    auto cache = std::make_shared<detail::PrefixCache>(1, [phi](const detail::TermSite& s, double* out) {
        const Vector& d = *s.increment;
        out[0] = d.dot(phi.f(s.time, *s.left) * d);
    });
    Functional F;
    F.name = "qv_integral(" + phi.name + ")";
    F.value = [cache](const StoppedPath& y, const EvalContext& c) {
        double v = 0.0;
        cache->accumulate(y, c, &v);
        return v;
    };
    F.dt = [](const StoppedPath&, const EvalContext&) { return 0.0; };
    F.grad = [phi](const StoppedPath& y, const EvalContext&) {
        const Matrix a = phi.f(y.time(), y.left_terminal());
        return Vector((a + a.transpose()) * y.jump_at(y.time()));
    };
    F.hess = [phi](const StoppedPath& y, const EvalContext&) {
        const Matrix a = phi.f(y.time(), y.left_terminal());
        return Matrix(a + a.transpose());
    };
    F.declared = FunctionalClass::C12;
    return F;
}

/// F(t, x) = g(trace [x](t)).
inline Functional qv_eval(const ScalarFunction& g) {
    auto cache = std::make_shared<detail::PrefixCache>(
        1, [](const detail::TermSite& s, double* out) { out[0] = s.increment->squaredNorm(); });
    auto trq = [cache](const StoppedPath& y, const EvalContext& c) {
        double v = 0.0;
        cache->accumulate(y, c, &v);
        return v;
    };
    Functional F;
    F.name = "qv_eval(" + g.name + ")";
    F.value = [g, trq](const StoppedPath& y, const EvalContext& c) { return g.f(trq(y, c)); };
    F.dt = [](const StoppedPath&, const EvalContext&) { return 0.0; };
    F.grad = [g, trq](const StoppedPath& y, const EvalContext& c) {
        return Vector(2 * g.df(trq(y, c)) * y.jump_at(y.time()));
    };
    F.hess = [g, trq](const StoppedPath& y, const EvalContext& c) {
        const double q = trq(y, c);
        const Vector d = y.jump_at(y.time());
        return Matrix(2 * g.df(q) * Matrix::Identity(d.size(), d.size()) + 4 * g.d2f(q) * d * d.transpose());
    };
    F.declared = FunctionalClass::C12;
    return F;
}

/// F(t, x) = int_0^t grad f(x(s-)) . dx with f(u) = sum_i g(u_i); class M.
inline Functional follmer_grad(const ScalarFunction& g) {
    auto cache = std::make_shared<detail::PrefixCache>(1, [g](const detail::TermSite& s, double* out) {
        const Vector& l = *s.left;
        const Vector& d = *s.increment;
        double v = 0.0;
        for (Eigen::Index i = 0; i < l.size(); ++i) v += g.df(l(i)) * d(i);
        out[0] = v;
    });
    Functional F;
    F.name = "follmer_grad(" + g.name + ")";
    F.value = [cache](const StoppedPath& y, const EvalContext& c) {
        double v = 0.0;
        cache->accumulate(y, c, &v);
        return v;
    };
    F.dt = [](const StoppedPath&, const EvalContext&) { return 0.0; };
    F.grad = [g](const StoppedPath& y, const EvalContext&) {
        const Vector l = y.left_terminal();
        Vector d(l.size());
        for (Eigen::Index i = 0; i < l.size(); ++i) d(i) = g.df(l(i));
        return d;
    };
    F.hess = [](const StoppedPath& y, const EvalContext&) { return Matrix(Matrix::Zero(y.dimension(), y.dimension())); };
    F.declared = FunctionalClass::classM;
    return F;
}

namespace detail {

/// Per coordinate i: A_i = int f_i dx_i, B_i = int x_i f_i dx_i, C_i = int f_i d[x_i] (width 3m).
inline std::shared_ptr<PrefixCache> oneform_cache(const std::vector<ScalarFunction>& fs) {
    const std::size_t m = fs.size();
    return std::make_shared<PrefixCache>(3 * m, [fs, m](const TermSite& s, double* out) {
        const Vector& l = *s.left;
        const Vector& d = *s.increment;
        require(static_cast<std::size_t>(l.size()) == m, "1-form needs one function per path coordinate");
        for (std::size_t i = 0; i < m; ++i) {
            const auto k = static_cast<Eigen::Index>(i);
            const double fv = fs[i].f(l(k));
            out[i] = fv * d(k);
            out[m + i] = l(k) * fv * d(k);
            out[2 * m + i] = fv * d(k) * d(k);
        }
    });
}

inline Vector oneform_value(PrefixCache& cache, std::size_t m, const StoppedPath& y, const EvalContext& c) {
    const auto acc = cache.accumulate(y.left_stopped(), c);
    return to_vector(std::vector<double>(acc.begin(), acc.begin() + static_cast<long>(m)));
}

} // namespace detail

/// The path-dependent 1-form phi_i(t, x) = (int_0^. f_i(x_i) dx_i)(t-).
inline Integrand oneform_integrand(const std::vector<ScalarFunction>& fs) {
    auto cache = detail::oneform_cache(fs);
    const std::size_t m = fs.size();
    return {"oneform", [cache, m](const StoppedPath& y, const EvalContext& c) {
                return detail::oneform_value(*cache, m, y, c);
            }};
}

/**
 * F(t, x) = sum_i [ x_i(t) A_i - B_i - C_i ], whose vertical gradient is the 1-form above:
 * a class M functional with a path-dependent strictly causal gradient.
 */
inline Functional bracket_1form(const std::vector<ScalarFunction>& fs) {
    detail::require(!fs.empty(), "1-form needs at least one function");
    auto cache = detail::oneform_cache(fs);
    const std::size_t m = fs.size();
    Functional F;
    F.name = "oneform";
    F.value = [cache, m](const StoppedPath& y, const EvalContext& c) {
        const auto acc = cache->accumulate(y, c);
        const Vector x = y.terminal();
        double v = 0.0;
        for (std::size_t i = 0; i < m; ++i) v += x(static_cast<Eigen::Index>(i)) * acc[i] - acc[m + i] - acc[2 * m + i];
        return v;
    };
    F.dt = [](const StoppedPath&, const EvalContext&) { return 0.0; };
    F.grad = [cache, m](const StoppedPath& y, const EvalContext& c) { return detail::oneform_value(*cache, m, y, c); };
    F.hess = [](const StoppedPath& y, const EvalContext&) { return Matrix(Matrix::Zero(y.dimension(), y.dimension())); };
    F.declared = FunctionalClass::classM;
    return F;
}

/// I_phi(t, x) = sum_{t_i} phi(t_i, x^G_{t_i-}) . (x(t_{i+1}) - x(t_i)) at the ambient level; grad = phi(t, x_{t-}).
inline Functional integral_functional(const Integrand& phi) {
    auto cache = std::make_shared<detail::PrefixCache>(1, [phi](const detail::TermSite& s, double* out) {
        out[0] = phi(s.integrand_view(), EvalContext{*s.grid}).dot(*s.increment);
    });
    Functional F;
    F.name = "integral(" + phi.name + ")";
    F.value = [cache](const StoppedPath& y, const EvalContext& c) {
        double v = 0.0;
        cache->accumulate(y, c, &v);
        return v;
    };
    F.dt = [](const StoppedPath&, const EvalContext&) { return 0.0; };
    F.grad = [phi](const StoppedPath& y, const EvalContext& c) { return phi(y.left_stopped(), c); };
    F.declared = FunctionalClass::classM;
    return F;
}

// ---------------------------------------------------------------------------
// algebra

inline Functional constant_functional(double c) {
    Functional F;
    F.name = "const";
    F.value = [c](const StoppedPath&, const EvalContext&) { return c; };
    F.dt = [](const StoppedPath&, const EvalContext&) { return 0.0; };
    F.grad = [](const StoppedPath& y, const EvalContext&) { return zero_vector(y.dimension()); };
    F.hess = [](const StoppedPath& y, const EvalContext&) { return Matrix(Matrix::Zero(y.dimension(), y.dimension())); };
    F.declared = FunctionalClass::classM;
    return F;
}

/// a F + b G
inline Functional linear_combination(double a, const Functional& f, double b, const Functional& g) {
    Functional h;
    h.name = "lincomb(" + f.name + "," + g.name + ")";
    h.value = [=](const StoppedPath& y, const EvalContext& c) { return a * f(y, c) + b * g(y, c); };
    if (f.dt && g.dt) h.dt = [=](const StoppedPath& y, const EvalContext& c) { return a * f.dt(y, c) + b * g.dt(y, c); };
    if (f.grad && g.grad)
        h.grad = [=](const StoppedPath& y, const EvalContext& c) { return Vector(a * f.grad(y, c) + b * g.grad(y, c)); };
    if (f.hess && g.hess)
        h.hess = [=](const StoppedPath& y, const EvalContext& c) { return Matrix(a * f.hess(y, c) + b * g.hess(y, c)); };
    h.declared = detail::join_linear(f.declared, g.declared);
    return h;
}

/// F G with Leibniz-rule derivatives.
inline Functional product(const Functional& f, const Functional& g) {
    Functional h;
    h.name = "product(" + f.name + "," + g.name + ")";
    h.value = [=](const StoppedPath& y, const EvalContext& c) { return f(y, c) * g(y, c); };
    if (f.dt && g.dt)
        h.dt = [=](const StoppedPath& y, const EvalContext& c) { return f(y, c) * g.dt(y, c) + g(y, c) * f.dt(y, c); };
    if (f.grad && g.grad)
        h.grad = [=](const StoppedPath& y, const EvalContext& c) {
            return Vector(f(y, c) * g.grad(y, c) + g(y, c) * f.grad(y, c));
        };
    if (f.grad && g.grad && f.hess && g.hess)
        h.hess = [=](const StoppedPath& y, const EvalContext& c) {
            const Vector df = f.grad(y, c), dg = g.grad(y, c);
            return Matrix(f(y, c) * g.hess(y, c) + g(y, c) * f.hess(y, c) + df * dg.transpose() + dg * df.transpose());
        };
    const bool smooth = f.declared != FunctionalClass::generic && g.declared != FunctionalClass::generic;
    h.declared = smooth ? FunctionalClass::C12 : FunctionalClass::generic;
    return h;
}

} // namespace pathcalc
