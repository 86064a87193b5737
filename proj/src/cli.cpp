#include "salem2d/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "salem2d/dioph.hpp"
#include "salem2d/errors.hpp"
#include "salem2d/fm.hpp"
#include "salem2d/gauss.hpp"
#include "salem2d/measure.hpp"
#include "salem2d/parallel.hpp"
#include "salem2d/report.hpp"

namespace salem2d {

namespace {

constexpr std::uint64_t default_seed = 12345;

struct RunContext {
    std::string command_line;
    std::uint64_t seed = default_seed;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    std::vector<std::pair<std::string, double>> timings;

    RunManifest manifest() const {
        RunManifest m;
        m.command_line = command_line;
        m.config_digest = fnv1a64(command_line + "#seed=" + std::to_string(seed));
        m.seed = seed;
        m.wall_clock_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        m.timings = timings;
        return m;
    }
};

Vec2 parse_vec2(const std::string& s) {
    std::istringstream ss(s);
    double x, y;
    char comma;
    if (!(ss >> x >> comma >> y) || comma != ',')
        throw usage_error("expected \"x,y\", got \"" + s + "\"");
    return {x, y};
}

GaussInt parse_gauss_arg(const std::string& s) {
    auto z = parse_gauss(s);
    if (!z) throw usage_error("expected a Gaussian integer \"a,b\" or \"a+bi\", got \"" + s + "\"");
    return *z;
}

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::istringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    if (out.empty()) throw usage_error("expected a comma-separated list, got \"" + s + "\"");
    return out;
}

AnnulusMode parse_mode_arg(const std::string& s) {
    auto m = parse_mode(s);
    if (!m) throw usage_error("unknown mode \"" + s + "\" (expected all|primes)");
    return *m;
}

// CSV to --out with a manifest, or to stdout
void deliver(const CsvTable& table, const std::string& out_path, const RunContext& ctx,
             std::ostream& out) {
    if (out_path.empty()) {
        emit_csv(table, out);
    } else {
        emit_csv(table, out_path);
        write_manifest(ctx.manifest(), out_path);
    }
}

std::string complex_str(std::complex<double> z) {
    std::string s = fmt_double(z.real());
    s += (z.imag() < 0 || (z.imag() == 0 && std::signbit(z.imag()))) ? "-" : "+";
    s += fmt_double(std::fabs(z.imag()));
    s += "i";
    return s;
}

int run_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"computational toolkit for explicit planar Salem-measure constructions"};
    app.require_subcommand(1);

    int threads = 0;
    std::uint64_t seed = default_seed;
    app.add_option("--threads", threads, "worker threads (default: SALEM2D_THREADS or hardware)");
    app.add_option("--seed", seed, "seed for randomized procedures");

    RunContext ctx;
    {
        std::string joined = "salem2d";
        for (const auto& a : args) {
            joined += " ";
            joined += a;
        }
        ctx.command_line = joined;
    }

    // --- gaussian integers ---------------------------------------------
    auto* cmd_div = app.add_subcommand("divisors", "divisor set of a Gaussian integer (CSV: re,im)");
    std::string div_ell;
    std::string div_out;
    cmd_div->add_option("--ell", div_ell, "Gaussian integer a,b")->required();
    cmd_div->add_option("--out", div_out, "output CSV path");

    auto* cmd_primes = app.add_subcommand("primes", "Gaussian primes with M/2 < sup-norm <= M (CSV: re,im)");
    double primes_M = 0;
    std::string primes_out;
    cmd_primes->add_option("--M", primes_M, "annulus parameter (M >= 4)")->required();
    cmd_primes->add_option("--out", primes_out, "output CSV path");

    auto* cmd_dstats = app.add_subcommand("divisor-stats",
                                          "divisor-growth statistic per dyadic range of sup-norm");
    std::int64_t dstats_L = 0;
    std::string dstats_out;
    cmd_dstats->add_option("--L", dstats_L, "scan bound (L >= 3)")->required();
    cmd_dstats->add_option("--out", dstats_out, "output CSV path");

    auto* cmd_pstats = app.add_subcommand("prime-stats", "|P(M)| ln M / M^2 per M");
    std::string pstats_list;
    std::string pstats_out;
    cmd_pstats->add_option("--M-list", pstats_list, "comma-separated M values (each >= 4)")->required();
    cmd_pstats->add_option("--out", pstats_out, "output CSV path");

    // --- bump kernel -----------------------------------------------------
    auto* cmd_bump = app.add_subcommand("bump-selftest", "mollifier invariant checks");
    int bump_K = 5;
    double bump_tol = 1e-10;
    cmd_bump->add_option("--K", bump_K, "smoothness order");
    cmd_bump->add_option("--quad-tol", bump_tol, "transform quadrature tolerance");

    // --- averaged dilation operator ---------------------------------------
    auto* cmd_coeff = app.add_subcommand("fm-coeff", "one lattice Fourier coefficient");
    double fc_M = 0, fc_tau = 0;
    std::string fc_ell, fc_mode = "all", fc_theta;
    cmd_coeff->add_option("--M", fc_M, "annulus parameter")->required();
    cmd_coeff->add_option("--tau", fc_tau, "approximation exponent")->required();
    cmd_coeff->add_option("--ell", fc_ell, "frequency a,b")->required();
    cmd_coeff->add_option("--mode", fc_mode, "all|primes");
    cmd_coeff->add_option("--theta", fc_theta, "inhomogeneous shift x,y");

    auto* cmd_scan = app.add_subcommand("fm-scan", "shell maxima of the weighted coefficient decay");
    double fs_M = 0, fs_tau = 0, fs_zeta = 1.0;
    std::int64_t fs_L = 0;
    std::string fs_mode = "all", fs_out;
    cmd_scan->add_option("--M", fs_M, "annulus parameter")->required();
    cmd_scan->add_option("--tau", fs_tau, "approximation exponent")->required();
    cmd_scan->add_option("--L", fs_L, "scan bound on sup-norm")->required();
    cmd_scan->add_option("--mode", fs_mode, "all|primes");
    cmd_scan->add_option("--zeta", fs_zeta, "weight exponent (mode=all)");
    cmd_scan->add_option("--out", fs_out, "output CSV path");

    // --- staged measure ----------------------------------------------------
    auto* cmd_build = app.add_subcommand("build-measure", "run the staged recursion and write spec.json");
    double bm_tau = 0;
    std::string bm_ball = "0,0,1", bm_mode = "all", bm_out;
    int bm_k = 1, bm_K = 5;
    double bm_quad_tol = 1e-10, bm_delta0 = 0.25, bm_M0 = 1.0;
    cmd_build->add_option("--tau", bm_tau, "approximation exponent")->required();
    cmd_build->add_option("--ball", bm_ball, "support ball cx,cy,r");
    cmd_build->add_option("--k", bm_k, "number of stages (1..3)")->required();
    cmd_build->add_option("--mode", bm_mode, "all|primes");
    cmd_build->add_option("--out", bm_out, "output spec.json path")->required();
    cmd_build->add_option("--K", bm_K, "bump smoothness order");
    cmd_build->add_option("--quad-tol", bm_quad_tol, "transform quadrature tolerance");
    cmd_build->add_option("--delta0", bm_delta0, "stage-1 budget (halved per stage)");
    cmd_build->add_option("--m0", bm_M0, "stage-1 search start");

    auto* cmd_decay = app.add_subcommand("decay-scan", "dyadic-shell maxima of |mu-hat|/g");
    std::string dc_spec, dc_out;
    int dc_shells = 8, dc_samples = 64;
    cmd_decay->add_option("--spec", dc_spec, "spec.json path")->required();
    cmd_decay->add_option("--shells", dc_shells, "number of dyadic shells");
    cmd_decay->add_option("--samples", dc_samples, "samples per shell");
    cmd_decay->add_option("--out", dc_out, "output CSV path");

    auto* cmd_dens = app.add_subcommand("density-eval", "pointwise density of the staged measure");
    std::string de_spec, de_x;
    cmd_dens->add_option("--spec", de_spec, "spec.json path")->required();
    cmd_dens->add_option("--x", de_x, "point x,y")->required();

    // --- diophantine -----------------------------------------------------
    auto* cmd_member = app.add_subcommand("membership", "witness table for the approximation predicate");
    std::string mb_x, mb_mode = "all", mb_theta, mb_out;
    double mb_tau = 0, mb_qmax = 0;
    cmd_member->add_option("--x", mb_x, "point x,y")->required();
    cmd_member->add_option("--tau", mb_tau, "approximation exponent")->required();
    cmd_member->add_option("--qmax", mb_qmax, "search bound on sup_norm(q)")->required();
    cmd_member->add_option("--mode", mb_mode, "all|primes");
    cmd_member->add_option("--theta", mb_theta, "inhomogeneous shift x,y");
    cmd_member->add_option("--out", mb_out, "output CSV path");

    auto* cmd_verify = app.add_subcommand("verify-support", "per-stage witnesses at sampled support points");
    std::string vs_spec, vs_out;
    int vs_samples = 100;
    cmd_verify->add_option("--spec", vs_spec, "spec.json path")->required();
    cmd_verify->add_option("--samples", vs_samples, "number of density-positive samples");
    cmd_verify->add_option("--out", vs_out, "output CSV path");

    auto* cmd_density_check = app.add_subcommand("density-check", "|Q(M)| eps(M)^a h(M) >= M^a per M");
    double dck_a = 0, dck_tau = 1.0, dck_hscale = 1.0;
    std::string dck_hkind = "const", dck_list, dck_mode = "all", dck_out;
    cmd_density_check->add_option("--a", dck_a, "exponent a")->required();
    cmd_density_check->add_option("--h-kind", dck_hkind, "const|log");
    cmd_density_check->add_option("--h-scale", dck_hscale, "h scale factor");
    cmd_density_check->add_option("--M-list", dck_list, "comma-separated M values")->required();
    cmd_density_check->add_option("--tau", dck_tau, "approximation exponent for the default psi");
    cmd_density_check->add_option("--mode", dck_mode, "all|primes");
    cmd_density_check->add_option("--out", dck_out, "output CSV path");

    auto* cmd_dim = app.add_subcommand("dimension", "Hausdorff = Fourier dimension value");
    double dim_tau = 0;
    cmd_dim->add_option("--tau", dim_tau, "approximation exponent")->required();

    try {
        std::vector<std::string> argv_rev(args.rbegin(), args.rend());
        app.parse(argv_rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return exit_usage;
    }

    if (threads < 0) throw usage_error("--threads must be nonnegative");
    if (threads == 0) {
        if (const char* env = std::getenv("SALEM2D_THREADS")) threads = std::atoi(env);
    }
    set_thread_count(threads);
    ctx.seed = seed;

    if (cmd_div->parsed()) {
        deliver(gauss_list_table(divisors(parse_gauss_arg(div_ell))), div_out, ctx, out);
        return exit_ok;
    }
    if (cmd_primes->parsed()) {
        deliver(gauss_list_table(annulus(primes_M, AnnulusMode::primes).members), primes_out, ctx, out);
        return exit_ok;
    }
    if (cmd_dstats->parsed()) {
        deliver(divisor_stat_table(divisor_bound_stat(dstats_L)), dstats_out, ctx, out);
        return exit_ok;
    }
    if (cmd_pstats->parsed()) {
        deliver(prime_stat_table(prime_count_stat(parse_double_list(pstats_list))), pstats_out, ctx, out);
        return exit_ok;
    }

    if (cmd_bump->parsed()) {
        const Bump bump{BumpSpec{bump_K, bump_tol}};
        bool ok = true;
        auto check = [&](const std::string& name, bool pass, double value) {
            out << (pass ? "[PASS] " : "[FAIL] ") << name << " = " << fmt_double(value) << "\n";
            ok = ok && pass;
        };
        // integral of phi over the support square by tensor quadrature
        {
            const auto& [nodes, weights] = gauss_legendre(12);
            double acc = 0.0;
            const int panels = 8;
            for (int px = 0; px < panels; ++px)
                for (int py = 0; py < panels; ++py) {
                    const double cx = -1.0 + (2.0 * px + 1.0) / panels;
                    const double cy = -1.0 + (2.0 * py + 1.0) / panels;
                    for (std::size_t i = 0; i < nodes.size(); ++i)
                        for (std::size_t j = 0; j < nodes.size(); ++j)
                            acc += weights[i] * weights[j] *
                                   bump.phi(Vec2{cx + nodes[i] / panels, cy + nodes[j] / panels});
                }
            acc /= double(panels) * double(panels);
            check("integral(phi)", std::fabs(acc - 1.0) <= 100 * bump_tol, acc);
        }
        check("phi_hat(0,0)", bump.phi_hat(Vec2{0, 0}) == 1.0, bump.phi_hat(Vec2{0, 0}));
        check("phi outside support", bump.phi(Vec2{2, 0}) == 0.0, bump.phi(Vec2{2, 0}));
        {
            const double v1 = bump.periodized(0.25, Vec2{0.125, -0.25});
            const double v2 = bump.periodized(0.25, Vec2{3.125, -7.25});
            check("periodization invariance", v1 == v2, v1 - v2);
        }
        {
            double worst = 0.0;
            for (double t = 1.0; t <= 1e4; t *= 2.0)
                worst = std::max(worst, std::fabs(bump.phi_hat1(t)) *
                                            std::pow(1.0 + t, double(bump_K + 1)));
            check("transform decay envelope", worst <= bump.envelope_const(), worst);
        }
        return ok ? exit_ok : exit_numeric;
    }

    if (cmd_coeff->parsed()) {
        const Vec2 theta = fc_theta.empty() ? Vec2{0, 0} : parse_vec2(fc_theta);
        FMParams params = make_fm_params(fc_M, fc_tau, parse_mode_arg(fc_mode), BumpSpec{}, theta);
        out << complex_str(fm_coeff(params, parse_gauss_arg(fc_ell))) << "\n";
        return exit_ok;
    }
    if (cmd_scan->parsed()) {
        FMParams params = make_fm_params(fs_M, fs_tau, parse_mode_arg(fs_mode));
        deliver(shell_scan_table(fm_coeff_bound_check(params, fs_L, fs_zeta)), fs_out, ctx, out);
        return exit_ok;
    }

    if (cmd_build->parsed()) {
        const auto ball = parse_double_list(bm_ball);
        if (ball.size() != 3) throw usage_error("--ball expects cx,cy,r");
        WindowSpec window{{ball[0], ball[1]}, ball[2], BumpSpec{bm_K, bm_quad_tol}};
        BuildOptions opt;
        opt.delta0 = bm_delta0;
        opt.M0 = bm_M0;
        BuildResult res = build_measure(window, bm_tau, parse_mode_arg(bm_mode), bm_k, opt);
        save_measure_spec(res.spec, bm_out);
        write_manifest(ctx.manifest(), bm_out);
        for (const Stage& s : res.spec.stages)
            err << "stage M=" << fmt_double(s.M) << " delta=" << fmt_double(s.delta)
                << " grid_margin=" << fmt_double(s.report.grid_margin) << "\n";
        err << "mu_hat(0)=" << complex_str(res.diag.mu_hat_zero)
            << " telescope_max=" << fmt_double(res.diag.telescope_max_ratio) << "\n";
        return exit_ok;
    }
    if (cmd_decay->parsed()) {
        MeasureEvaluator eval(load_measure_spec(dc_spec));
        deliver(decay_report_table(decay_scan(eval, dc_shells, dc_samples)), dc_out, ctx, out);
        return exit_ok;
    }
    if (cmd_dens->parsed()) {
        MeasureEvaluator eval(load_measure_spec(de_spec));
        out << fmt_double(eval.density(parse_vec2(de_x))) << "\n";
        return exit_ok;
    }

    if (cmd_member->parsed()) {
        ApproxTarget target;
        target.tau = mb_tau;
        target.mode = parse_mode_arg(mb_mode);
        target.theta = mb_theta.empty() ? Vec2{0, 0} : parse_vec2(mb_theta);
        target.Q_max = mb_qmax;
        CsvTable t;
        t.header = {"q_re", "q_im", "r_re", "r_im", "defect"};
        for (const Witness& w : find_witnesses(parse_vec2(mb_x), target))
            t.rows.push_back({fmt_int(w.q.re), fmt_int(w.q.im), fmt_int(w.r.re), fmt_int(w.r.im),
                              fmt_double(w.defect)});
        deliver(t, mb_out, ctx, out);
        return exit_ok;
    }

    if (cmd_verify->parsed()) {
        MeasureSpec spec = load_measure_spec(vs_spec);
        MeasureEvaluator eval(std::move(spec));
        const Window window(eval.spec().window);
        std::mt19937_64 rng(ctx.seed);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const double s = window.scale();
        const Vec2 c = window.spec().center;
        CsvTable t;
        t.header = {"sample", "x", "y", "stage", "q_re", "q_im", "r_re", "r_im", "defect"};
        int failures = 0;
        for (int i = 0; i < vs_samples; ++i) {
            Vec2 x;
            int guard = 0;
            do {
                x = Vec2{c.x + s * u(rng), c.y + s * u(rng)};
                if (++guard > 2000000)
                    throw numeric_error("verify-support: rejection sampling exhausted");
            } while (!(eval.density(x) > 0.0));
            SupportChain chain = verify_support_chain(eval, x);
            if (!chain.ok) {
                ++failures;
                err << "sample " << i << ": " << chain.note << "\n";
                continue;
            }
            for (std::size_t k = 0; k < chain.stage_witnesses.size(); ++k) {
                const Witness& w = chain.stage_witnesses[k];
                t.rows.push_back({fmt_int(i), fmt_double(x.x), fmt_double(x.y),
                                  fmt_int(std::int64_t(k + 1)), fmt_int(w.q.re), fmt_int(w.q.im),
                                  fmt_int(w.r.re), fmt_int(w.r.im), fmt_double(w.defect)});
            }
        }
        deliver(t, vs_out, ctx, out);
        if (failures > 0) {
            err << failures << " sample(s) failed the support chain\n";
            return exit_numeric;
        }
        return exit_ok;
    }

    if (cmd_density_check->parsed()) {
        ApproxTarget target;
        target.tau = dck_tau;
        target.mode = parse_mode_arg(dck_mode);
        DensityCondition cond;
        cond.a = dck_a;
        if (dck_hkind == "const")
            cond.h_kind = HKind::constant;
        else if (dck_hkind == "log")
            cond.h_kind = HKind::log;
        else
            throw usage_error("--h-kind expects const|log");
        cond.h_scale = dck_hscale;
        cond.M_list = parse_double_list(dck_list);
        CsvTable t;
        t.header = {"M", "Q_count", "eps", "ratio", "pass"};
        for (const DensityRow& r : check_density_condition(target, cond))
            t.rows.push_back({fmt_double(r.M), fmt_int(std::int64_t(r.Q_count)), fmt_double(r.eps),
                              fmt_double(r.ratio), r.pass ? "1" : "0"});
        deliver(t, dck_out, ctx, out);
        return exit_ok;
    }

    if (cmd_dim->parsed()) {
        out << fmt_double(dimension_formula(dim_tau)) << "\n";
        return exit_ok;
    }

    throw usage_error("no subcommand selected");
}

} // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return run_dispatch(args, out, err);
    } catch (const usage_error& e) {
        err << "usage error: " << e.what() << "\n";
        return exit_usage;
    } catch (const search_failure& e) {
        err << "search failure: " << e.what() << " (best margin " << e.best_margin
            << " at candidate " << e.best_candidate << ")\n";
        return exit_search;
    } catch (const domain_error& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_numeric;
    }
}

} // namespace salem2d
