// pathcalc: command-line experiments for pathwise functional Ito calculus.
// Every subcommand writes one CSV table (header, rows, trailing `# config:` line).
// Exit codes: 0 converged, 2 diverged, 1 usage or evaluation error.

#include <pathcalc/pathcalc.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

namespace pc = pathcalc;

namespace {

struct Config {
    std::string path = "fs:levels=14,seed=42";
    std::string functional = "eval:f=square";
    std::string partition = "dyadic:T=1,levels=8..14";
    std::string levels;
    double tol = 1e-3;
    std::string out;
    std::int64_t seed = -1;
    double eps = 0.5;
    // subcommand specific
    std::string integrand = "grad";
    std::string cls = "auto";
    bool no_qv_check = false;
    double qv_tol = 0.05;
    std::string phi = "1";
    std::string psi = "1";
    double sigma = 1.0;
    double alpha = 0.3183098861837907;
    double t0 = 1.0 / 3.0;
    double t = 0.5;
};

int exit_code(pc::Verdict v) { return v == pc::Verdict::diverged ? 2 : 0; }

std::optional<std::pair<int, int>> level_override(const Config& c) {
    if (c.levels.empty()) return std::nullopt;
    const auto dots = c.levels.find("..");
    try {
        if (dots == std::string::npos) {
            const int v = std::stoi(c.levels);
            return std::make_pair(v, v);
        }
        return std::make_pair(std::stoi(c.levels.substr(0, dots)), std::stoi(c.levels.substr(dots + 2)));
    } catch (const std::exception&) {
        throw pc::InvalidArgument("--levels expects a..b, got '" + c.levels + "'");
    }
}

pc::PartitionSequence partition_of(const Config& c) { return pc::parse_partition(c.partition, level_override(c)); }

pc::CadlagPath path_of(const Config& c) {
    pc::PathParseOptions o;
    if (c.seed >= 0) o.seed = static_cast<std::uint64_t>(c.seed);
    return pc::parse_path(c.path, o);
}

pc::Functional functional_of(const std::string& spec, int dim) {
    pc::FunctionalParseOptions o;
    o.dimension = dim;
    return pc::parse_functional(spec, o);
}

void require_same_horizon(const pc::CadlagPath& x, const pc::PartitionSequence& seq) {
    if (x.horizon() != seq.horizon()) throw pc::InvalidArgument("path and partition horizons differ");
}

std::string echo(const std::string& sub, const std::vector<std::pair<std::string, std::string>>& kv) {
    std::ostringstream os;
    os << "subcommand=" << sub;
    for (const auto& [k, v] : kv) os << ' ' << k << '=' << v;
    return os.str();
}

void emit(const Config& c, const pc::CsvTable& table, const std::string& config) {
    if (c.out.empty()) {
        table.write(std::cout, config);
        return;
    }
    std::ofstream f(c.out);
    if (!f) throw pc::InvalidArgument("cannot open output file '" + c.out + "'");
    table.write(f, config);
}

std::string g(double v) { return pc::format_double(v); }

// ---------------------------------------------------------------------------

int run_qv(const Config& c) {
    const auto x = path_of(c);
    const auto seq = partition_of(c);
    require_same_horizon(x, seq);
    pc::QvOptions o;
    o.tol = c.tol;
    const auto r = x.dimension() == 1 ? pc::qv_estimate(x, seq, o) : pc::qv_matrix(x, seq, o);
    const int m = x.dimension();
    std::vector<std::string> header{"level", "t"};
    for (int j = 1; j <= m; ++j)
        for (int i = 1; i <= m; ++i) header.push_back("q" + std::to_string(i) + std::to_string(j));
    header.push_back("d_J1_to_next");
    pc::CsvTable table(header);
    const double T = x.horizon();
    for (std::size_t k = 0; k < r.levels.size(); ++k) {
        table.row().add(r.levels[k].level).add(T);
        const pc::Vector v = r.levels[k].q.eval(T);
        for (int i = 0; i < v.size(); ++i) table.add(v(i));
        table.add(k < r.cauchy_diags.size() ? g(r.cauchy_diags[k]) : std::string("nan"));
    }
    emit(c, table,
         echo("qv", {{"path", c.path}, {"partition", c.partition}, {"levels", c.levels}, {"tol", g(c.tol)},
                     {"seed", std::to_string(c.seed)}, {"verdict", pc::to_string(r.verdict)}}));
    return exit_code(r.verdict);
}

int run_integrate(const Config& c) {
    const auto x = path_of(c);
    const auto seq = partition_of(c);
    require_same_horizon(x, seq);
    const auto f = functional_of(c.functional, x.dimension());
    pc::Integrand phi;
    if (c.integrand == "grad")
        phi = pc::gradient_integrand(f);
    else if (c.integrand == "value") {
        if (x.dimension() != 1) throw pc::InvalidArgument("--integrand value needs a scalar path");
        phi = {f.name, [f](const pc::StoppedPath& y, const pc::EvalContext& ctx) { return pc::scalar_vector(f(y, ctx)); }};
    } else
        throw pc::InvalidArgument("--integrand must be grad or value");
    pc::IntegralOptions o;
    o.tol = c.tol;
    const auto r = pc::pathwise_integral(phi, x, seq, x.horizon(), o);
    pc::CsvTable table({"level", "value", "delta_prev", "dJ1_prev"});
    for (std::size_t k = 0; k < r.report.levels.size(); ++k)
        table.row().add(r.report.levels[k]).add(r.report.values[k]).add(r.report.deltas[k]).add(r.report.dj1[k]);
    emit(c, table,
         echo("integrate", {{"path", c.path}, {"functional", c.functional}, {"integrand", c.integrand},
                            {"partition", c.partition}, {"levels", c.levels}, {"tol", g(c.tol)},
                            {"seed", std::to_string(c.seed)}, {"verdict", pc::to_string(r.report.verdict)}}));
    return exit_code(r.report.verdict);
}

int run_cov(const Config& c) {
    const auto x = path_of(c);
    const auto seq = partition_of(c);
    require_same_horizon(x, seq);
    const auto f = functional_of(c.functional, x.dimension());
    pc::CovOptions o;
    o.tol = c.tol;
    o.check_qv = !c.no_qv_check;
    o.qv_tol = c.qv_tol;
    bool class_s = false;
    if (c.cls == "auto")
        class_s = f.declared == pc::FunctionalClass::classS || f.declared == pc::FunctionalClass::classM;
    else if (c.cls == "S")
        class_s = true;
    else if (c.cls != "C12")
        throw pc::InvalidArgument("--class must be auto, S or C12");
    const auto r = class_s ? pc::cov_class_S(f, x, seq, x.horizon(), o) : pc::cov_C12(f, x, seq, x.horizon(), o);
    pc::CsvTable table({"level", "lhs", "time", "integral", "qv", "jump", "residual"});
    for (const auto& row : r.rows)
        table.row().add(row.level).add(row.lhs).add(row.time_term).add(row.integral_term).add(row.qv_term).add(
            row.jump_term).add(row.residual);
    emit(c, table,
         echo("cov", {{"path", c.path}, {"functional", c.functional}, {"class", class_s ? "S" : "C12"},
                      {"qv_check", c.no_qv_check ? "off" : g(c.qv_tol)}, {"partition", c.partition}, {"levels", c.levels}, {"tol", g(c.tol)},
                      {"seed", std::to_string(c.seed)}, {"verdict", pc::to_string(r.verdict)}}));
    return exit_code(r.verdict);
}

int run_kw(const Config& c) {
    const auto x = path_of(c);
    const auto seq = partition_of(c);
    require_same_horizon(x, seq);
    if (x.dimension() != 1) throw pc::InvalidArgument("kw takes scalar paths");
    auto as_integrand = [](const pc::Functional& f) {
        return pc::Integrand{f.name, [f](const pc::StoppedPath& y, const pc::EvalContext& ctx) {
                                 return pc::scalar_vector(f(y, ctx));
                             }};
    };
    const auto phi = as_integrand(functional_of(c.phi, 1));
    const auto psi = as_integrand(functional_of(c.psi, 1));
    const auto r = pc::kw_check(phi, psi, x, seq, x.horizon(), c.tol);
    pc::CsvTable table({"level", "lhs", "qv", "bracket_integral", "residual"});
    for (std::size_t k = 0; k < r.levels.size(); ++k)
        table.row().add(r.levels[k]).add(r.lhs[k]).add(r.components[k][0]).add(r.components[k][1]).add(r.residual[k]);
    emit(c, table,
         echo("kw", {{"path", c.path}, {"phi", c.phi}, {"psi", c.psi}, {"partition", c.partition},
                     {"levels", c.levels}, {"tol", g(c.tol)}, {"seed", std::to_string(c.seed)},
                     {"verdict", pc::to_string(r.verdict)}}));
    return exit_code(r.verdict);
}

int run_harmonic(const Config& c) {
    const auto x = path_of(c);
    const auto seq = partition_of(c);
    require_same_horizon(x, seq);
    const auto f = functional_of(c.functional, x.dimension());
    pc::HarmonicOptions o;
    o.tol = c.tol;
    const int m = x.dimension();
    const auto r = pc::harmonic_check(f, pc::constant_sigma(c.sigma * pc::Matrix::Identity(m, m)), x, seq,
                                      x.horizon(), o);
    pc::CsvTable table({"level", "lhs", "integral", "residual", "max_pde_residual", "omega_sigma_error"});
    const auto& rep = r.representation;
    for (std::size_t k = 0; k < rep.levels.size(); ++k)
        table.row().add(rep.levels[k]).add(rep.lhs[k]).add(rep.components[k][0]).add(rep.residual[k]).add(
            r.max_pde_residual).add(r.worst_membership_error);
    emit(c, table,
         echo("harmonic", {{"path", c.path}, {"functional", c.functional}, {"sigma", g(c.sigma)},
                           {"partition", c.partition}, {"levels", c.levels}, {"tol", g(c.tol)},
                           {"seed", std::to_string(c.seed)}, {"verdict", pc::to_string(rep.verdict)}}));
    return exit_code(rep.verdict);
}

int run_fairgame(const Config& c) {
    const auto x = path_of(c);
    const auto seq = partition_of(c);
    require_same_horizon(x, seq);
    const auto f = functional_of(c.functional, x.dimension());
    if (f.declared != pc::FunctionalClass::classM)
        throw pc::InvalidArgument("fairgame needs a class M functional, '" + c.functional + "' is " +
                                  pc::to_string(f.declared));
    const auto r = pc::fair_game_probe(f, x, seq, c.eps);
    pc::CsvTable table({"level", "net_increment", "t_star", "sign_flip", "value", "reverified", "verdict"});
    table.row().add(r.level).add(r.net_increment).add(r.t_star).add(r.sign_flip ? 1 : 0).add(r.value).add(
        r.reverified).add(pc::to_string(r.verdict));
    emit(c, table,
         echo("fairgame", {{"path", c.path}, {"functional", c.functional}, {"partition", c.partition},
                           {"levels", c.levels}, {"eps", g(c.eps)}, {"seed", std::to_string(c.seed)}}));
    return exit_code(r.verdict);
}

int run_prop11(const Config& c) {
    const auto seq = partition_of(c);
    const auto r = pc::demo_prop11(c.alpha, seq, c.tol);
    pc::CsvTable table({"level", "member", "q_jump_time", "d_J1_to_next"});
    for (std::size_t k = 0; k < r.levels.size(); ++k)
        table.row().add(r.levels[k]).add(r.member[k] ? 1 : 0).add(r.q_jump_time[k]).add(
            k < r.qv.cauchy_diags.size() ? g(r.qv.cauchy_diags[k]) : std::string("nan"));
    emit(c, table,
         echo("counterexample prop11", {{"alpha", g(c.alpha)}, {"partition", c.partition}, {"levels", c.levels},
                                        {"tol", g(c.tol)}, {"verdict", pc::to_string(r.qv.verdict)}}));
    return exit_code(r.qv.verdict);
}

int run_ulemma(const Config& c) {
    const auto x = path_of(c);
    const auto seq = partition_of(c);
    require_same_horizon(x, seq);
    const auto r = pc::demo_U_discontinuity(x, seq, x.horizon());
    pc::CsvTable table({"level", "sup_distance", "qv_gap", "integral_gap"});
    for (const auto& row : r.rows)
        table.row().add(row.level).add(row.sup_distance).add(row.qv_gap).add(row.integral_gap);
    emit(c, table,
         echo("counterexample ulemma", {{"path", c.path}, {"partition", c.partition}, {"levels", c.levels},
                                        {"seed", std::to_string(c.seed)},
                                        {"applicable", r.applicable ? "yes" : "no"}}));
    return 0;
}

int run_compare(const Config& c) {
    const auto seq = partition_of(c);
    const auto r = pc::demo_compare_iii(c.t0, seq);
    pc::CsvTable table({"criterion", "status", "limit", "target"});
    table.row().add("U").add(r.u_probe.passed ? "pass" : "fail").add(r.u_probe.worst_final_gap).add(0.0);
    for (const auto& cr : r.pi_report.criteria)
        table.row().add(cr.label).add(pc::to_string(cr.status)).add(cr.limit).add(cr.target);
    emit(c, table, echo("counterexample compare", {{"t0", g(c.t0)}, {"partition", c.partition}, {"levels", c.levels}}));
    return 0;
}

int run_sample(const Config& c) {
    const auto x = path_of(c);
    const auto seq = partition_of(c);
    require_same_horizon(x, seq);
    std::vector<std::string> header{"t"};
    for (int i = 1; i <= x.dimension(); ++i) header.push_back("x" + std::to_string(i));
    pc::CsvTable table(header);
    const auto& p = seq.top();
    for (std::size_t i = 0; i < p.size(); ++i) {
        table.row().add(p[i]);
        const pc::Vector v = x.eval(p[i]);
        for (int k = 0; k < v.size(); ++k) table.add(v(k));
    }
    emit(c, table,
         echo("sample", {{"path", c.path}, {"partition", c.partition}, {"levels", c.levels},
                         {"seed", std::to_string(c.seed)}}));
    return 0;
}

int run_continuity(const Config& c) {
    const auto x = path_of(c);
    const auto seq = partition_of(c);
    require_same_horizon(x, seq);
    const auto f = functional_of(c.functional, x.dimension());
    pc::ContinuityOptions o;
    if (c.tol != 1e-3) o.tol = c.tol;
    const auto r = pc::pi_continuity_report(f, x, c.t, seq, o);
    pc::CsvTable table({"criterion", "status", "limit", "target"});
    for (const auto& cr : r.criteria) table.row().add(cr.label).add(pc::to_string(cr.status)).add(cr.limit).add(cr.target);
    emit(c, table,
         echo("continuity", {{"path", c.path}, {"functional", c.functional}, {"t", g(c.t)},
                             {"partition", c.partition}, {"levels", c.levels}, {"tol", g(r.tol)},
                             {"seed", std::to_string(c.seed)}}));
    return r.all_pass() ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pathwise functional Ito calculus experiments"};
    app.require_subcommand(1);
    Config c;
    std::function<int(const Config&)> action;

    auto common = [&](CLI::App* s, bool path, bool functional) {
        if (path) s->add_option("--path", c.path, "path spec, e.g. fs:levels=14,seed=42 or step:0.5=2")->capture_default_str();
        if (functional) s->add_option("--functional", c.functional, "functional spec, e.g. eval:f=square")->capture_default_str();
        s->add_option("--partition", c.partition, "partition spec, e.g. dyadic:T=1,levels=8..14")->capture_default_str();
        s->add_option("--levels", c.levels, "level range a..b (overrides the partition spec)");
        s->add_option("--tol", c.tol, "convergence tolerance")->capture_default_str();
        s->add_option("--out", c.out, "output CSV file (default stdout)");
        s->add_option("--seed", c.seed, "seed overriding fs path seeds");
    };

    auto* qv = app.add_subcommand("qv", "quadratic sums q_n and their Skorokhod-Cauchy diagnostics");
    common(qv, true, false);
    qv->callback([&] { action = run_qv; });

    auto* integ = app.add_subcommand("integrate", "left Riemann sums and the J1 Cauchy test");
    common(integ, true, true);
    integ->add_option("--integrand", c.integrand, "grad (vertical gradient of the functional) or value")->capture_default_str();
    integ->callback([&] { action = run_integrate; });

    auto* cov = app.add_subcommand("cov", "change-of-variable breakdown per level");
    common(cov, true, true);
    cov->add_option("--class", c.cls, "auto, S or C12")->capture_default_str();
    cov->add_option("--qv-tol", c.qv_tol, "tolerance of the qv convergence guard (C12)")->capture_default_str();
    cov->add_flag("--no-qv-check", c.no_qv_check, "skip the qv convergence guard (C12)");
    cov->callback([&] { action = run_cov; });

    auto* kw = app.add_subcommand("kw", "product rule for pathwise integrals");
    common(kw, true, false);
    kw->add_option("--phi", c.phi, "first integrand (functional spec)")->capture_default_str();
    kw->add_option("--psi", c.psi, "second integrand (functional spec)")->capture_default_str();
    kw->callback([&] { action = run_kw; });

    auto* harm = app.add_subcommand("harmonic", "Sigma-harmonic PDE and representation residuals");
    common(harm, true, true);
    harm->add_option("--sigma", c.sigma, "constant Sigma (multiple of the identity)")->capture_default_str();
    harm->callback([&] { action = run_harmonic; });

    auto* fair = app.add_subcommand("fairgame", "sign-flip perturbation certificate for class M functionals");
    common(fair, true, true);
    fair->add_option("--eps", c.eps, "perturbation size in (0, 1)")->capture_default_str();
    fair->callback([&] { action = run_fairgame; });

    auto* ce = app.add_subcommand("counterexample", "counterexample demos");
    ce->require_subcommand(1);
    auto* p11 = ce->add_subcommand("prop11", "jump at a time that is never a grid point");
    common(p11, false, false);
    p11->add_option("--alpha", c.alpha, "jump time")->capture_default_str();
    p11->callback([&] { action = run_prop11; });
    auto* ul = ce->add_subcommand("ulemma", "uniform convergence without convergence of the quadratic variation");
    common(ul, true, false);
    ul->callback([&] { action = run_ulemma; });
    auto* cmp = ce->add_subcommand("compare", "U-continuous but not pi-continuous functional");
    common(cmp, false, false);
    cmp->add_option("--t0", c.t0, "jump time of the probe functional")->capture_default_str();
    cmp->callback([&] { action = run_compare; });

    auto* smp = app.add_subcommand("sample", "path values on the finest partition level");
    common(smp, true, false);
    smp->callback([&] { action = run_sample; });

    auto* cont = app.add_subcommand("continuity", "the eight pi-topology criteria at (t, x)");
    common(cont, true, true);
    cont->add_option("--t", c.t, "time in (0, T)")->capture_default_str();
    cont->callback([&] { action = run_continuity; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    try {
        return action(c);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
