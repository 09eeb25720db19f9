// Acceptance run: one PASS/FAIL line per criterion, with measured value, bound and runtime.
//
//   acceptance [--expect-fail N]...
//
// Exit status is 0 when every criterion passes, or fails only where listed with --expect-fail.
// Expected failures still print FAIL.

#include "fixtures.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

using namespace pathcalc;
using fixtures::kInvPi;

namespace {

struct Outcome {
    bool ok;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char b[128];
    std::snprintf(b, sizeof b, f, a);
    return b;
}

std::string fmt(const char* f, double a, double c) {
    char b[160];
    std::snprintf(b, sizeof b, f, a, c);
    return b;
}

// 1. polarisation of level-n cross sums on random 2-d step paths
Outcome criterion1() {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const CadlagPath x = fixtures::random_step_path(seed, 2);
        const CadlagPath x1 = x.component(0), x2 = x.component(1), s = x1 + x2;
        for (int n = 4; n <= 12; ++n) {
            const Partition p = Partition::dyadic(1.0, n);
            const auto pts = fixtures::dyadic_points(n);
            const double cross = fixtures::brute_cross_sum(fixtures::samples(x, pts, 0), fixtures::samples(x, pts, 1));
            const CadlagPath pol = polarise(qv_path(x1, p, true), qv_path(x2, p, true), qv_path(s, p, true));
            worst = std::max(worst, std::abs(pol.eval(1.0)(0) - cross));
            worst = std::max(worst, std::abs(qv_level(x, p, 1.0)(0, 1) - cross));
        }
    }
    return {worst <= 1e-10, fmt("max |cross - polarised| = %.3g (bound 1e-10)", worst)};
}

// 2. sum 2x dx + sum dx^2 = x(t_K)^2 - x(0)^2 on every fixture, levels 1..14
Outcome criterion2() {
    const Integrand two_x{"2x", [](const StoppedPath& y, const EvalContext&) { return Vector(2.0 * y.left_terminal()); }};
    double worst = 0.0;
    for (const auto& f : fixtures::all_fixtures()) {
        for (int n = 1; n <= 14; ++n) {
            const Partition p = Partition::dyadic(1.0, n);
            const double ito = riemann_sum(two_x, f.path, p, 1.0);
            const double qv = qv_level(f.path, p, 1.0)(0, 0);
            const double xT = f.path.eval(1.0)(0), x0 = f.path.eval(0.0)(0);
            const double scale = std::max({1.0, std::abs(ito), qv, xT * xT, x0 * x0});
            worst = std::max(worst, std::abs(ito + qv - (xT * xT - x0 * x0)) / scale);
        }
    }
    return {worst <= 1e-10, fmt("max relative telescoping defect = %.3g (bound 1e-10)", worst)};
}

std::vector<double> read_plateau_fixture() {
    std::ifstream in(PATHCALC_TEST_DATA_DIR "/fs14_seed42_qv.txt");
    std::vector<double> v;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        int n;
        double q;
        ss >> n >> q;
        v.push_back(q);
    }
    return v;
}

// 3. fs(14, seed 42): q_14(1) near 1, decreasing successive differences, frozen plateau
Outcome criterion3() {
    const CadlagPath x = fixtures::fs14();
    QvOptions o;
    o.tol = 0.05;
    o.diagnostics = false;
    const auto r = qv_estimate(x, dyadic_sequence(1.0, 14, 8), o);
    std::vector<double> q;
    for (const auto& l : r.levels) q.push_back(l.q.eval(1.0)(0));
    std::vector<double> d;
    for (int n = 10; n <= 13; ++n) d.push_back(std::abs(q[static_cast<std::size_t>(n - 8)] - q[static_cast<std::size_t>(n - 7)]));
    const auto frozen = read_plateau_fixture();
    bool fixture_ok = frozen.size() == q.size();
    for (std::size_t k = 0; fixture_ok && k < q.size(); ++k) fixture_ok = std::abs(q[k] - frozen[k]) <= 1e-12;
    const double err = std::abs(q.back() - 1.0);
    const bool ok = err <= 0.05 && nonincreasing(d) && fixture_ok;
    return {ok, fmt("|q_14(1) - 1| = %.3g (bound 0.05), max |q_n - q_n+1| over n=10..13 = %.3g", err,
                    *std::max_element(d.begin(), d.end())) +
                    (fixture_ok ? ", plateau matches frozen fixture" : ", plateau differs from frozen fixture")};
}

// 4. change of variable for x^2 on fs(12) + 1_[1/pi, inf)
Outcome criterion4() {
    const CadlagPath x = fixtures::fs12_plus_inv_pi_jump();
    // fs(12) is linear between level-12 points, so q_13, q_14 halve its continuous part and the
    // three-level convergence guard cannot hold; the per-level residual is what is measured
    CovOptions o;
    o.check_qv = false;
    const auto r = cov_C12(eval(scalar_function("square")), x, dyadic_sequence(1.0, 14, 10), 1.0, o);
    const auto res = r.residuals();
    std::vector<double> a;
    for (double v : res) a.push_back(std::abs(v));
    const bool ok = a.back() <= 1e-3 && nonincreasing(a);
    return {ok, fmt("|residual| at level 14 = %.3g (bound 1e-3), worst over 10..14 = %.3g", a.back(),
                    *std::max_element(a.begin(), a.end())) +
                    (nonincreasing(a) ? ", nonincreasing" : ", not nonincreasing")};
}

// 5. class S formula for int 2x dx on fs(14)
Outcome criterion5() {
    const auto r = cov_class_S(follmer_grad(scalar_function("square")), fixtures::fs14(), dyadic_sequence(1.0, 14, 12), 1.0);
    const double res = std::abs(r.rows.back().residual);
    return {res <= 1e-3, fmt("|residual| at level 14 = %.3g (bound 1e-3)", res)};
}

// 6. weighted quadratic sums, f(t) = t, against int f(s-) d[x] on 20 step paths
Outcome criterion6() {
    const auto f = [](double t) { return t; };
    const Partition p = Partition::dyadic(1.0, 14);
    double worst[4] = {0, 0, 0, 0};
    for (std::uint64_t seed = 1001; seed <= 1020; ++seed) {
        const CadlagPath x = fixtures::random_step_path(seed, 1);
        double oracle = 0.0; // atoms a^2 weighted by f(s-) = s
        for (const auto& j : x.jumps()) oracle += j.time * j.size(0) * j.size(0);
        const QsVariant vs[4] = {QsVariant::i, QsVariant::ii, QsVariant::iii, QsVariant::iv};
        for (int k = 0; k < 4; ++k)
            worst[k] = std::max(worst[k], std::abs(weighted_quad_sum_level(f, x, p, vs[k], 1.0) - oracle));
    }
    const double w = *std::max_element(worst, worst + 4);
    std::ostringstream os;
    os << "max error per variant (i, ii, iii, iv) = " << fmt("%.3g", worst[0]) << ", " << fmt("%.3g", worst[1]) << ", "
       << fmt("%.3g", worst[2]) << ", " << fmt("%.3g", worst[3]) << " (bound 1e-9)";
    return {w <= 1e-9, os.str()};
}

// 7. product rule with phi = psi = 1
Outcome criterion7() {
    const Integrand one = constant_integrand(scalar_vector(1.0));
    double worst_step = 0.0;
    for (const auto& f : fixtures::step_fixtures()) {
        const auto r = kw_check(one, one, f.path, dyadic_sequence(1.0, 14, 1), 1.0);
        for (double v : r.abs_residuals()) worst_step = std::max(worst_step, v);
    }
    const auto r = kw_check(one, one, fixtures::fs14(), dyadic_sequence(1.0, 14, 12), 1.0);
    const auto a = r.abs_residuals();
    const bool ok = worst_step <= 1e-10 && a.back() <= 1e-3 && nonincreasing(a);
    return {ok, fmt("step fixtures max |residual| = %.3g (bound 1e-10); fs(14) level-14 |residual| = %.3g (bound 1e-3)",
                    worst_step, a.back()) +
                    (nonincreasing(a) ? ", nonincreasing over 12..14" : ", not nonincreasing over 12..14")};
}

// 8. heat polynomials u^2 - t and u^3 - 3tu on fs(14), Sigma = 1
Outcome criterion8() {
    const auto seq = dyadic_sequence(1.0, 14, 12);
    const auto sigma = constant_sigma(Matrix::Identity(1, 1));
    double pde = 0.0, rep2 = 0.0, rep3 = 0.0;
    {
        const auto h = harmonic_check(markov(heat_polynomial(2)), sigma, fixtures::fs14(), seq, 1.0);
        pde = std::max(pde, h.max_pde_residual);
        rep2 = std::abs(h.representation.residual.back());
    }
    {
        const auto h = harmonic_check(markov(heat_polynomial(3)), sigma, fixtures::fs14(), seq, 1.0);
        pde = std::max(pde, h.max_pde_residual);
        rep3 = std::abs(h.representation.residual.back());
    }
    const bool ok = pde == 0.0 && rep2 <= 1e-2 && rep3 <= 1e-2;
    return {ok, fmt("max PDE residual = %.3g (must be 0); ", pde) +
                    fmt("representation |residual| u^2-t = %.3g, u^3-3tu = %.3g (bound 1e-2)", rep2, rep3)};
}

// 9. fair-game certificates for class M builtins on step fixtures
Outcome criterion9() {
    std::vector<Functional> ms = {
        markov_affine(0.0, scalar_vector(1.0)),
        markov_affine(1.0, scalar_vector(-2.0)),
        follmer_grad(scalar_function("square")),
        follmer_grad(scalar_function("sin")),
        integral_functional(constant_integrand(scalar_vector(1.0))),
        bracket_1form({scalar_function("identity")}),
        constant_functional(1.0),
    };
    for (const auto& m : ms)
        if (m.declared != FunctionalClass::classM) return {false, "builtin '" + m.name + "' is not declared class M"};
    int probes = 0, certified = 0;
    double worst_gap = 0.0;
    std::string first_bad;
    for (const auto& m : ms)
        for (const auto& f : fixtures::step_fixtures()) {
            const auto r = fair_game_probe(m, f.path, dyadic_sequence(1.0, 12, 12));
            if (r.verdict == Verdict::not_applicable) continue;
            ++probes;
            worst_gap = std::max(worst_gap, std::abs(r.value - r.reverified));
            if (r.verdict == Verdict::converged && r.value < 0.0 && r.reverified < 0.0)
                ++certified;
            else if (first_bad.empty())
                first_bad = m.name + " on " + f.name;
        }
    const bool ok = probes > 0 && certified == probes && worst_gap <= 1e-10;
    std::ostringstream os;
    os << certified << "/" << probes << " probes certified negative, max |value - reverified| = " << fmt("%.3g", worst_gap)
       << " (bound 1e-10)";
    if (!first_bad.empty()) os << ", first failure: " << first_bad;
    return {ok, os.str()};
}

// 10. counterexample demos
Outcome criterion10() {
    const auto seq20 = dyadic_sequence(1.0, 20, 1);
    std::ostringstream os;
    bool ok = true;
    for (double alpha : {kInvPi, 1.0 / 3.0}) {
        const auto r = demo_prop11(alpha, seq20, std::ldexp(1.0, -19));
        const double last = r.qv.cauchy_diags.back();
        const bool a_ok = r.never_member() && r.qv.verdict == Verdict::converged && last < std::ldexp(1.0, -19);
        ok = ok && a_ok;
        os << fmt("(a) alpha=%.6g: ", alpha) << (r.never_member() ? "never on grid" : "on grid") << fmt(", last d_J1 = %.3g; ", last);
    }
    {
        const auto r = demo_U_discontinuity(fixtures::fs14(), dyadic_sequence(1.0, 12, 8), 1.0);
        double sup12 = NAN, min_gap = INFINITY;
        for (const auto& row : r.rows) {
            min_gap = std::min(min_gap, row.qv_gap);
            if (row.level == 12) sup12 = row.sup_distance;
        }
        const bool b_ok = r.applicable && sup12 < 0.05 && min_gap >= 0.9;
        ok = ok && b_ok;
        os << fmt("(b) sup-distance at level 12 = %.3g (bound 0.05), min qv gap = %.3g (bound 0.9); ", sup12, min_gap);
    }
    {
        const auto r = demo_compare_iii(1.0 / 3.0, seq20);
        const bool c_ok = r.u_probe.passed && r.pi_report.at("2(c)").status == CriterionStatus::fail;
        ok = ok && c_ok;
        os << "(c) U-probe " << (r.u_probe.passed ? "passes" : "fails") << ", pi-criterion 2(c) "
           << to_string(r.pi_report.at("2(c)").status);
    }
    return {ok, os.str()};
}

// 11. analytic derivatives against extrapolated numeric probes at 50 points per builtin
Outcome criterion11() {
    struct Case {
        Functional f;
        int dim;
    };
    std::vector<Case> cases;
    for (const char* g : {"zero", "one", "identity", "square", "cube", "quartic", "sin", "cos", "exp"})
        cases.push_back({eval(scalar_function(g)), 1});
    for (int k = 1; k <= 4; ++k) cases.push_back({markov(heat_polynomial(k)), 1});
    cases.push_back({markov_affine(0.5, scalar_vector(-1.5)), 1});
    cases.push_back({left_eval(scalar_function("square")), 1});
    for (int k = 0; k <= 3; ++k) cases.push_back({time_power(k), 1});
    cases.push_back({qv_eval(scalar_function("square")), 1});
    cases.push_back({qv_eval(scalar_function("sin")), 1});
    cases.push_back({follmer_grad(scalar_function("square")), 1});
    cases.push_back({follmer_grad(scalar_function("cube")), 1});
    cases.push_back({bracket_1form({scalar_function("identity")}), 1});
    cases.push_back({integral_functional(constant_integrand(scalar_vector(1.0))), 1});
    cases.push_back({constant_functional(2.5), 1});
    cases.push_back({product(eval(scalar_function("sin")), time_power(1)), 1});
    cases.push_back({linear_combination(2.0, eval(scalar_function("cube")), -1.0, qv_eval(scalar_function("identity"))), 1});
    for (const char* g : {"identity", "square", "time", "outer"}) cases.push_back({qv_integral(matrix_function(g)), 2});
    cases.push_back({bracket_1form({scalar_function("identity"), scalar_function("sin")}), 2});
    cases.push_back({follmer_grad(scalar_function("square")), 2});

    const CadlagPath paths1[2] = {faber_schauder_path(10, 7) + step_path(std::vector<std::pair<double, double>>{{0.3, 0.5}, {kInvPi, -0.8}}, 1.0),
                                  faber_schauder_path(10, 11)};
    const CadlagPath paths2[1] = {faber_schauder_path(10, 5, 1.0, 2)};
    const EvalContext ctx{Partition::dyadic(1.0, 10)};
    std::mt19937_64 gen(2024);
    // the horizontal probe needs t + 2^-4 inside [0, 1]
    std::uniform_real_distribution<double> when(0.05, 0.9);

    int checked = 0;
    double worst = 0.0;
    std::string worst_name;
    std::map<std::string, double> over;
    auto record = [&](double err, const std::string& what) {
        ++checked;
        if (err > 1e-6) over[what] = std::max(over[what], err);
        if (err > worst) {
            worst = err;
            worst_name = what;
        }
    };
    for (const auto& c : cases) {
        for (int k = 0; k < 50; ++k) {
            const CadlagPath& x = c.dim == 1 ? paths1[k % 2] : paths2[0];
            // include the exact jump times among the sampled points
            double t = when(gen);
            if (c.dim == 1 && k % 10 == 0) t = k % 20 == 0 ? 0.3 : kInvPi;
            const StoppedPath y = StoppedPath::raw(x, t);
            if (c.f.grad) {
                const auto num = vertical_derivative(c.f, y, ctx);
                const Vector a = c.f.grad(y, ctx);
                record((a - num.value).cwiseAbs().maxCoeff() / std::max(1.0, a.cwiseAbs().maxCoeff()), c.f.name + " grad");
            }
            if (c.f.hess) {
                const auto num = vertical_hessian(c.f, y, ctx);
                const Matrix a = c.f.hess(y, ctx);
                record((a - num.value).cwiseAbs().maxCoeff() / std::max(1.0, a.cwiseAbs().maxCoeff()), c.f.name + " hess");
            }
            if (c.f.dt) {
                const auto num = horizontal_derivative(c.f, y, ctx);
                const double a = c.f.dt(y, ctx);
                record(std::abs(a - num.value) / std::max(1.0, std::abs(a)), c.f.name + " dt");
            }
        }
    }
    std::ostringstream os;
    os << checked << " comparisons over " << cases.size() << " builtins, max relative error = " << fmt("%.3g", worst)
       << " (bound 1e-6)";
    if (worst > 1e-6) os << ", worst: " << worst_name;
    for (const auto& [name, err] : over) os << "; over bound: " << name << " (" << fmt("%.3g", err) << ")";
    return {worst <= 1e-6, os.str()};
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> expected_fail;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--expect-fail" && i + 1 < argc)
            expected_fail.insert(std::stoi(argv[++i]));
        else {
            std::cerr << "usage: acceptance [--expect-fail N]...\n";
            return 1;
        }
    }
    struct Criterion {
        int id;
        double budget; // seconds
        std::function<Outcome()> run;
    };
    const Criterion all[] = {
        {1, 5, criterion1},  {2, 5, criterion2},  {3, 10, criterion3}, {4, 15, criterion4},
        {5, 10, criterion5}, {6, 5, criterion6},  {7, 10, criterion7}, {8, 10, criterion8},
        {9, 2, criterion9},  {10, 10, criterion10}, {11, 10, criterion11},
    };
    int unexpected = 0;
    double total = 0.0;
    for (const auto& c : all) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        total += secs;
        const bool in_time = secs <= c.budget;
        const bool pass = o.ok && in_time;
        std::printf("criterion %2d: %s  %s; runtime %.2f s (budget %.0f s)%s\n", c.id, pass ? "PASS" : "FAIL",
                    o.detail.c_str(), secs, c.budget,
                    !pass && expected_fail.count(c.id) ? " [expected failure]" : "");
        if (!pass && !expected_fail.count(c.id)) ++unexpected;
    }
    std::printf("total runtime %.2f s (budget 120 s)\n", total);
    if (total > 120.0) ++unexpected;
    std::fflush(stdout);
    return unexpected == 0 ? 0 : 1;
}
