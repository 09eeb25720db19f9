#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace pathcalc;
using J = std::vector<std::pair<double, double>>;

namespace {

const Partition kGrid = Partition::dyadic(1.0, 12);
const EvalContext kCtx{kGrid};

CadlagPath mixed() { return fixtures::fs12_plus_inv_pi_jump(); }

} // namespace

TEST(HorizontalDerivative, Examples) {
    const auto x = mixed();
    const auto y = StoppedPath::raw(x, 0.4);
    EXPECT_NEAR(horizontal_derivative(eval(scalar_function("square")), y, kCtx).value, 0.0, 1e-12);
    const auto tx = product(time_power(1), eval(scalar_function("identity")));
    EXPECT_NEAR(horizontal_derivative(tx, y, kCtx).value, x.eval(0.4)(0), 1e-9);
    EXPECT_NEAR(horizontal_derivative(qv_integral(matrix_function("identity")), y, kCtx).value, 0.0, 1e-12);
    EXPECT_NEAR(horizontal_derivative(time_power(3), y, kCtx).value, 3 * 0.4 * 0.4, 1e-6);
}

TEST(VerticalDerivative, Square) {
    const auto x = mixed();
    const auto y = StoppedPath::raw(x, 0.6);
    const auto f = eval(scalar_function("square"));
    const auto g = vertical_derivative(f, y, kCtx);
    EXPECT_EQ(g.verdict, Verdict::converged);
    EXPECT_NEAR(g.value(0), 2 * x.eval(0.6)(0), 1e-9);
    EXPECT_NEAR(vertical_hessian(f, y, kCtx).value(0, 0), 2.0, 1e-7);
}

TEST(VerticalDerivative, QvIntegralAtAJump) {
    // grad of int phi d[x] at a jump time is (phi + phi')(t, x_{t-}) Delta x(t), here 2 Delta x
    const double a = 0.8;
    const auto x = step_path(J{{0.5, a}}, 1.0);
    const auto f = qv_integral(matrix_function("identity"));
    const auto y = StoppedPath::raw(x, 0.5);
    const EvalContext ctx{Partition::dyadic(1.0, 6)};
    EXPECT_NEAR(f.grad(y, ctx)(0), 2 * a, 1e-14);
    EXPECT_NEAR(vertical_derivative(f, y, ctx).value(0), 2 * a, 1e-9);
    EXPECT_NEAR(f(y, ctx), a * a, 1e-14);
}

TEST(VerticalDerivative, FollmerIntegralIsLeftGradient) {
    const auto x = mixed();
    const double t = fixtures::kInvPi;
    const auto f = follmer_grad(scalar_function("square"));
    const auto y = StoppedPath::raw(x, t);
    EXPECT_NEAR(f.grad(y, kCtx)(0), 2 * x.eval_left(t)(0), 1e-14);
    EXPECT_NEAR(vertical_derivative(f, y, kCtx).value(0), 2 * x.eval_left(t)(0), 1e-9);
}

TEST(Causality, Probe) {
    const auto x = mixed();
    const auto y = StoppedPath::raw(x, 0.7);
    const std::vector<double> bumps{0.1, -0.3, 1.0};
    EXPECT_TRUE(strict_causality_probe(left_eval(scalar_function("identity")), y, kCtx, bumps).strictly_causal());
    EXPECT_FALSE(strict_causality_probe(eval(scalar_function("identity")), y, kCtx, bumps).strictly_causal());
    const auto g = gradient_component(follmer_grad(scalar_function("sin")), 0);
    const auto p = strict_causality_probe(g, y, kCtx, bumps);
    EXPECT_TRUE(p.strictly_causal());
    EXPECT_TRUE(p.consistent());
}

TEST(Continuity, SmoothMarkovPassesAllCriteria) {
    const auto r = pi_continuity_report(eval(scalar_function("square")), fixtures::fs14(), 0.5, dyadic_sequence(1.0, 14, 8));
    for (const auto& c : r.criteria) EXPECT_NE(c.status, CriterionStatus::fail) << c.label;
    EXPECT_TRUE(r.all_pass());
}

TEST(Continuity, ConstantPathTrivial) {
    const auto r = pi_continuity_report(eval(scalar_function("identity")), constant_path(scalar_vector(2.0), 1.0), 0.3,
                                        dyadic_sequence(1.0, 10, 4));
    EXPECT_TRUE(r.all_pass());
}

TEST(Continuity, JumpSizeAtOffGridTimeFails2c) {
    const double t0 = 1.0 / 3.0;
    const auto x = step_path(J{{t0, 1.0}}, 1.0);
    const auto r = pi_continuity_report(jump_size_at(t0), x, t0, dyadic_sequence(1.0, 16, 4));
    EXPECT_EQ(r.at("2(c)").status, CriterionStatus::fail);
    EXPECT_EQ(r.at("2(c)").limit, 0.0);
    EXPECT_EQ(r.at("2(c)").target, 1.0);
    EXPECT_TRUE(u_continuity_probe(jump_size_at(t0), x, t0, kCtx).passed);
}

TEST(Modulus, Examples) {
    const auto seq = dyadic_sequence(1.0, 8, 8);
    const auto x = fixtures::fs14();
    for (const auto& [d, w] : vertical_modulus_estimate(eval(scalar_function("identity")), x, 1.0, 0.5, seq))
        EXPECT_NEAR(w, d, 1e-12);
    for (const auto& [d, w] : vertical_modulus_estimate(constant_functional(3.0), x, 1.0, 0.5, seq)) EXPECT_EQ(w, 0.0);
    double B = 0.0;
    for (const auto& s : x.segments()) B = std::max(B, std::abs(s.v0(0)));
    const double r = 0.5;
    for (const auto& [d, w] : vertical_modulus_estimate(eval(scalar_function("square")), x, 1.0, r, seq))
        EXPECT_LE(w, (2 * B + 2 * r - d) * d + 1e-12) << d;
}

TEST(LocalBoundedness, BoundedOnFixture) {
    const auto r = local_boundedness_probe(eval(scalar_function("square")), mixed(), dyadic_sequence(1.0, 10, 4), 1.0);
    ASSERT_EQ(r.size(), 7u);
    for (const auto& [n, v] : r) EXPECT_LT(v, 100.0);
}

TEST(Builtins, MarkovAffine) {
    const auto f = markov_affine(1.0, scalar_vector(2.0));
    const auto x = mixed();
    EXPECT_EQ(f.declared, FunctionalClass::classM);
    EXPECT_DOUBLE_EQ(f(StoppedPath::raw(x, 0.8), kCtx), 1.0 + 2.0 * x.eval(0.8)(0));
}

TEST(Builtins, FollmerGradDeclaration) {
    const auto f = follmer_grad(scalar_function("square"));
    EXPECT_EQ(f.declared, FunctionalClass::classM);
    const auto x = mixed();
    const auto y = StoppedPath::raw(x, 0.9);
    EXPECT_DOUBLE_EQ(f.grad(y, kCtx)(0), 2 * x.eval_left(0.9)(0));
}

TEST(Builtins, FollmerGradIsLeftRiemannSum) {
    const auto x = mixed();
    const auto f = follmer_grad(scalar_function("square"));
    const auto pts = fixtures::dyadic_points(12);
    const double oracle = fixtures::brute_left_riemann(fixtures::samples(x, pts), [](double u) { return 2 * u; });
    EXPECT_NEAR(f(StoppedPath::raw(x, 1.0), kCtx), oracle, 1e-12);
}

TEST(Builtins, QvIntegralIdentityIsTrace) {
    const auto x = mixed();
    const auto f = qv_integral(matrix_function("identity"));
    EXPECT_EQ(f.declared, FunctionalClass::C12);
    for (double t : {0.25, fixtures::kInvPi, 0.75, 1.0}) {
        // grid points below t, then x(t-), then x(t)
        std::vector<double> v;
        for (double s : fixtures::dyadic_points(12))
            if (s < t) v.push_back(x.eval(s)(0));
        v.push_back(x.eval_left(t)(0));
        v.push_back(x.eval(t)(0));
        const double oracle = fixtures::brute_quad_sum(v);
        EXPECT_NEAR(f(StoppedPath::raw(x, t), kCtx), oracle, 1e-12) << t;
    }
}

TEST(Builtins, QvEvalAndTimePower) {
    const auto x = mixed();
    const double q = qv_level(x, kGrid, 1.0)(0, 0);
    EXPECT_NEAR(qv_eval(scalar_function("sin"))(StoppedPath::raw(x, 1.0), kCtx), std::sin(q), 1e-12);
    EXPECT_DOUBLE_EQ(time_power(2)(StoppedPath::raw(x, 0.5), kCtx), 0.25);
}

TEST(Builtins, HeatPolynomialsSolveBackwardHeatEquation) {
    for (int k = 1; k <= 4; ++k) {
        const auto h = heat_polynomial(k);
        for (double t : {0.0, 0.3, 1.0})
            for (double u : {-1.2, 0.0, 0.7}) {
                const Vector v = scalar_vector(u);
                EXPECT_EQ(h.dt(t, v) + 0.5 * h.hess(t, v)(0, 0), 0.0) << k;
            }
    }
}

TEST(Builtins, UnknownNamesThrow) {
    EXPECT_THROW(scalar_function("tan"), InvalidArgument);
    EXPECT_THROW(matrix_function("nope"), InvalidArgument);
    EXPECT_THROW(heat_polynomial(5), InvalidArgument);
}

TEST(Builtins, ProductAndCombinationClasses) {
    const auto a = eval(scalar_function("square")), b = markov_affine(0.0, scalar_vector(1.0));
    EXPECT_EQ(product(a, b).declared, FunctionalClass::C12);
    EXPECT_EQ(linear_combination(1.0, b, 2.0, follmer_grad(scalar_function("sin"))).declared, FunctionalClass::classM);
    EXPECT_EQ(product(a, jump_size_at(0.5)).declared, FunctionalClass::generic);
}

TEST(Builtins, BracketOneFormGradientIsStrictlyCausal) {
    const auto f = bracket_1form({scalar_function("identity")});
    const auto y = StoppedPath::raw(mixed(), 0.6);
    EXPECT_TRUE(strict_causality_probe(gradient_component(f, 0), y, kCtx, {0.2, -0.5}).strictly_causal());
}

// property: analytic derivatives agree with extrapolated numeric ones on random points
TEST(DerivativeProperty, AnalyticMatchesNumeric) {
    std::vector<Functional> fs = {eval(scalar_function("cube")), eval(scalar_function("exp")), markov(heat_polynomial(4)),
                                  qv_eval(scalar_function("square")), follmer_grad(scalar_function("cos")),
                                  product(eval(scalar_function("sin")), qv_eval(scalar_function("identity")))};
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> when(0.05, 0.95);
    const auto x = mixed();
    for (const auto& f : fs)
        for (int k = 0; k < 8; ++k) {
            const auto y = StoppedPath::raw(x, when(gen));
            const double g = f.grad(y, kCtx)(0);
            EXPECT_NEAR(vertical_derivative(f, y, kCtx).value(0), g, 1e-6 * std::max(1.0, std::abs(g))) << f.name;
            const double h = f.hess(y, kCtx)(0, 0);
            EXPECT_NEAR(vertical_hessian(f, y, kCtx).value(0, 0), h, 1e-6 * std::max(1.0, std::abs(h))) << f.name;
        }
}
