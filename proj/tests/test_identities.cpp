#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace pathcalc;
using J = std::vector<std::pair<double, double>>;

namespace {

const Integrand kOne = constant_integrand(scalar_vector(1.0));
const Integrand kZero = constant_integrand(scalar_vector(0.0));

} // namespace

TEST(Bracket, OneOneIsTwiceTheIncrement) {
    const auto x = fixtures::fs12_plus_inv_pi_jump();
    const EvalContext ctx{Partition::dyadic(1.0, 10)};
    const auto b = bracket(kOne, kOne);
    for (double t : {0.2, fixtures::kInvPi, 0.9}) {
        const auto y = StoppedPath::raw(x, t);
        EXPECT_NEAR(b(y, ctx)(0), 2 * (x.eval_left(t)(0) - x.eval(0.0)(0)), 1e-12) << t;
    }
    EXPECT_EQ(bracket(kOne, kZero)(StoppedPath::raw(x, 0.5), ctx)(0), 0.0);
}

TEST(Bracket, IdentityWithItself) {
    const auto x = fixtures::fs12_plus_inv_pi_jump();
    const Partition p = Partition::dyadic(1.0, 10);
    const EvalContext ctx{p};
    const auto f = left_eval(scalar_function("identity"));
    const Integrand phi{"x-", [f](const StoppedPath& y, const EvalContext& c) { return scalar_vector(f(y, c)); }};
    const double t = 0.7;
    // grid sum up to the last point below t, then the partial term to t-
    const double tl = p.prev_point(t);
    const double xl = x.eval(tl)(0);
    std::vector<double> v;
    for (double s : fixtures::dyadic_points(10))
        if (s <= tl) v.push_back(x.eval(s)(0));
    const double inner = fixtures::brute_left_riemann(v, [](double u) { return u; }) + xl * (x.eval_left(t)(0) - xl);
    EXPECT_NEAR(bracket(phi, phi)(StoppedPath::raw(x, t), ctx)(0), 2 * x.eval_left(t)(0) * inner, 1e-10);
}

TEST(KW, SingleJump) {
    const double a = 1.4;
    const auto r = kw_check(kOne, kOne, step_path(J{{0.5, a}}, 1.0), dyadic_sequence(1.0, 8, 2), 1.0);
    for (std::size_t k = 0; k < r.levels.size(); ++k) {
        EXPECT_DOUBLE_EQ(r.lhs[k], a * a);
        EXPECT_DOUBLE_EQ(r.components[k][0], a * a);
        EXPECT_EQ(r.components[k][1], 0.0);
        EXPECT_EQ(r.residual[k], 0.0);
    }
}

TEST(KW, Zero) {
    const auto r = kw_check(kZero, kZero, fixtures::fs14(), dyadic_sequence(1.0, 10, 8), 1.0);
    for (double v : r.residual) EXPECT_EQ(v, 0.0);
}

TEST(KW, FaberSchauder) {
    const auto x = fixtures::fs14();
    const auto r = kw_check(kOne, kOne, x, dyadic_sequence(1.0, 14, 12), 1.0);
    EXPECT_EQ(r.verdict, Verdict::converged);
    const double d = x.eval(1.0)(0) - x.eval(0.0)(0);
    EXPECT_NEAR(r.lhs.back(), d * d, 1e-12);
    EXPECT_NEAR(r.components.back()[0], 1.0, 0.05);
}

TEST(KW, StepFixturesExactEveryLevel) {
    for (const auto& fx : fixtures::step_fixtures()) {
        const auto r = kw_check(kOne, kOne, fx.path, dyadic_sequence(1.0, 12, 1), 1.0);
        for (double v : r.abs_residuals()) EXPECT_LE(v, 1e-10) << fx.name;
    }
}

// property: KW and one-form residuals nonincreasing over the top three levels on every fixture
TEST(IdentityProperty, ResidualsNonincreasingOnFixtures) {
    const auto lid = left_eval(scalar_function("sin"));
    const Integrand phi{"sin(x-)", [lid](const StoppedPath& y, const EvalContext& c) { return scalar_vector(lid(y, c)); }};
    for (const auto& fx : fixtures::all_fixtures()) {
        const auto seq = dyadic_sequence(1.0, 12, 10);
        EXPECT_TRUE(nonincreasing(kw_check(phi, kOne, fx.path, seq, 1.0).abs_residuals())) << fx.name;
        EXPECT_TRUE(nonincreasing(one_form_identity_check({scalar_function("cube")}, fx.path, seq, 1.0).abs_residuals()))
            << fx.name;
    }
}

TEST(OneForm, ZeroFunction) {
    const auto r = one_form_identity_check({scalar_function("zero")}, fixtures::fs14(), dyadic_sequence(1.0, 10, 8), 1.0);
    for (std::size_t k = 0; k < r.levels.size(); ++k) {
        EXPECT_EQ(r.lhs[k], 0.0);
        EXPECT_EQ(r.residual[k], 0.0);
    }
}

TEST(OneForm, ConstantOneAgreesWithKW) {
    const auto x = fixtures::fs12_plus_inv_pi_jump();
    const auto seq = dyadic_sequence(1.0, 12, 10);
    const auto of = one_form_identity_check({scalar_function("one")}, x, seq, 1.0);
    const auto kw = kw_check(kOne, kOne, x, seq, 1.0);
    for (std::size_t k = 0; k < of.levels.size(); ++k) {
        // int (x- - x0) dx is half the bracket integral
        EXPECT_NEAR(of.lhs[k], 0.5 * kw.components[k][1], 1e-12);
        EXPECT_NEAR(of.residual[k], 0.0, 1e-10);
    }
}

TEST(OneForm, IdentityOnFaberSchauder) {
    const auto r = one_form_identity_check({scalar_function("identity")}, fixtures::fs14(), dyadic_sequence(1.0, 14, 12), 1.0);
    EXPECT_EQ(r.verdict, Verdict::converged);
}

TEST(OneForm, TwoDimensional) {
    const auto r = one_form_identity_check({scalar_function("identity"), scalar_function("sin")},
                                           faber_schauder_path(12, 8, 1.0, 2), dyadic_sequence(1.0, 12, 10), 1.0);
    EXPECT_LT(std::abs(r.residual.back()), 1e-10);
}

TEST(Harmonic, HeatPolynomials) {
    const auto sigma = constant_sigma(Matrix::Identity(1, 1));
    const auto seq = dyadic_sequence(1.0, 14, 12);
    const auto h2 = harmonic_check(markov(heat_polynomial(2)), sigma, fixtures::fs14(), seq, 1.0);
    EXPECT_EQ(h2.max_pde_residual, 0.0);
    EXPECT_LT(std::abs(h2.representation.residual.back()), 1e-3);
    const auto h3 = harmonic_check(markov(heat_polynomial(3)), sigma, fixtures::fs14(), seq, 1.0);
    EXPECT_EQ(h3.max_pde_residual, 0.0);
    EXPECT_LT(std::abs(h3.representation.residual.back()), 1e-2);
}

TEST(Harmonic, AffineIsExactForAnySigma) {
    const auto h = harmonic_check(markov(heat_polynomial(1)), constant_sigma(Matrix::Identity(1, 1)), fixtures::fs14(),
                                  dyadic_sequence(1.0, 12, 8), 1.0);
    EXPECT_EQ(h.max_pde_residual, 0.0);
    for (double v : h.representation.residual) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Harmonic, RejectsPathOutsideOmegaSigma) {
    EXPECT_THROW(harmonic_check(markov(heat_polynomial(2)), constant_sigma(4.0 * Matrix::Identity(1, 1)), fixtures::fs14(),
                                dyadic_sequence(1.0, 14, 12), 1.0),
                 PreconditionError);
}

TEST(FairGame, SingleUpJump) {
    const double a = 2.0, eps = 0.5;
    const auto M = integral_functional(kOne);
    const auto r = fair_game_probe(M, step_path(J{{0.5, a}}, 1.0), dyadic_sequence(1.0, 6, 6), eps);
    EXPECT_EQ(r.verdict, Verdict::converged);
    EXPECT_TRUE(r.sign_flip);
    EXPECT_NEAR(r.value, -eps * a, 1e-14);
    EXPECT_NEAR(r.perturbed.jump(r.t_star)(0), -eps * a, 1e-14);
    EXPECT_NEAR(r.reverified, r.value, 1e-10);
}

TEST(FairGame, AffineAndFollmer) {
    const auto seq = dyadic_sequence(1.0, 12, 12);
    const auto ra = fair_game_probe(markov_affine(0.0, scalar_vector(1.0)), fixtures::step_fixtures()[3].path, seq);
    EXPECT_EQ(ra.verdict, Verdict::converged);
    EXPECT_LT(ra.value, 0.0);
    // for square the Ito sum x(1)^2 - q_n(1) vanishes on every fs path, so use sin
    const auto rf = fair_game_probe(follmer_grad(scalar_function("sin")), fixtures::fs14(), seq);
    EXPECT_EQ(rf.verdict, Verdict::converged);
    EXPECT_LT(rf.reverified, 0.0);
}

TEST(FairGame, ConstantFunctionalNotApplicable) {
    const auto r = fair_game_probe(constant_functional(1.0), fixtures::fs14(), dyadic_sequence(1.0, 8, 8));
    EXPECT_EQ(r.verdict, Verdict::not_applicable);
}

TEST(FairGame, RejectsBadEps) {
    EXPECT_THROW(fair_game_probe(constant_functional(1.0), fixtures::fs14(), dyadic_sequence(1.0, 8, 8), 1.0), InvalidArgument);
}

TEST(OffGridJumpDemo, Membership) {
    const auto seq = dyadic_sequence(1.0, 20, 1);
    EXPECT_TRUE(demo_prop11(fixtures::kInvPi, seq).never_member());
    EXPECT_TRUE(demo_prop11(1.0 / 3.0, seq).never_member());
    const auto half = demo_prop11(0.5, seq);
    for (bool b : half.member) EXPECT_TRUE(b);
}

TEST(OffGridJumpDemo, QvJumpSitsAtStraddlingPoint) {
    const auto r = demo_prop11(fixtures::kInvPi, dyadic_sequence(1.0, 16, 1));
    for (std::size_t k = 0; k < r.levels.size(); ++k) {
        const auto& q = r.qv.levels[k].q;
        // in the first interval the increment is the initial value q_n(0)
        if (r.q_jump_time[k] == 0.0)
            EXPECT_EQ(q.eval(0.0)(0), 1.0);
        else
            EXPECT_EQ(q.jump(r.q_jump_time[k])(0), 1.0);
        EXPECT_LT(r.q_jump_time[k], fixtures::kInvPi);
        EXPECT_GT(r.q_jump_time[k] + std::ldexp(1.0, -r.levels[k]), fixtures::kInvPi);
    }
}

TEST(UDiscontinuity, FaberSchauder) {
    const auto r = demo_U_discontinuity(fixtures::fs14(), dyadic_sequence(1.0, 12, 8), 1.0);
    ASSERT_TRUE(r.applicable);
    EXPECT_LT(r.rows.back().sup_distance, 0.02);
    EXPECT_GT(r.rows.back().qv_gap, 0.9);
    EXPECT_GT(r.rows.back().integral_gap, 0.9);
}

TEST(UDiscontinuity, StepPathNotApplicable) {
    EXPECT_FALSE(demo_U_discontinuity(step_path(J{{0.5, 1.0}}, 1.0), dyadic_sequence(1.0, 8, 4), 1.0).applicable);
}

TEST(UDiscontinuity, ZeroPathDegenerate) {
    const auto r = demo_U_discontinuity(zero_path(1, 1.0), dyadic_sequence(1.0, 8, 4), 1.0);
    for (const auto& row : r.rows) {
        EXPECT_EQ(row.qv_gap, 0.0);
        EXPECT_EQ(row.integral_gap, 0.0);
    }
}
