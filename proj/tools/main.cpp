#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dwlab/cutoff.hpp"
#include "dwlab/damping.hpp"
#include "dwlab/experiments.hpp"
#include "dwlab/heat_fujita.hpp"
#include "dwlab/scaled_solver.hpp"
#include "dwlab/wave_solver.hpp"

namespace {

using namespace dwlab;

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stod(tok));
    }
    return out;
}

// reverse of the label written into LifespanRecord, e.g. "powerlaw(0.5)"
DampingSpec spec_from_label(const std::string& label) {
    const auto open = label.find('(');
    const auto close = label.rfind(')');
    if (open == std::string::npos || close == std::string::npos) {
        throw std::runtime_error("cannot parse damping label: " + label);
    }
    return parse_damping(label.substr(0, open),
                         label.substr(open + 1, close - open - 1));
}

void write_snapshot(const std::string& path, const Snapshot& snap) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "# t=" << fmt17(snap.t) << " h=" << fmt17(snap.h)
       << " N=" << snap.N << "\n";
    for (size_t i = 0; i < snap.u.size(); ++i) {
        os << fmt17(static_cast<double>(i) * snap.h) << ' '
           << fmt17(snap.u[i]) << ' ' << fmt17(snap.v[i]) << '\n';
    }
}

void append_record_csv(const std::string& path, const LifespanRecord& rec) {
    const bool fresh = !std::filesystem::exists(path) ||
                       std::filesystem::file_size(path) == 0;
    std::ofstream os(path, std::ios::app);
    if (!os) throw std::runtime_error("cannot open " + path);
    if (fresh) {
        os << "label,N,p,beta_or_params,eps,T_num,B_of_T,reason,peak_norm,"
              "steps\n";
    }
    os << rec.label << ',' << rec.N << ',' << fmt17(rec.p) << ','
       << rec.params << ',' << fmt17(rec.eps) << ',' << fmt17(rec.T_num)
       << ',' << fmt17(rec.B_of_T) << ',' << to_string(rec.reason) << ','
       << fmt17(rec.peak_norm) << ',' << rec.steps << '\n';
}

void print_record(const LifespanRecord& rec) {
    std::cout << rec.label << ',' << rec.N << ',' << fmt17(rec.p) << ','
              << rec.params << ',' << fmt17(rec.eps) << ','
              << fmt17(rec.T_num) << ',' << fmt17(rec.B_of_T) << ','
              << to_string(rec.reason) << ',' << fmt17(rec.peak_norm) << ','
              << rec.steps << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for damped semilinear waves"};
    app.require_subcommand(1);

    std::string family = "constant", params = "";
    double horizon = 1e4, t_arg = 0.0, p = 2.0, eps = 1.0;
    int N = 1;

    // damping check / damping eval
    auto* damping = app.add_subcommand("damping", "damping-family calculus");
    damping->require_subcommand(1);
    auto* check = damping->add_subcommand("check", "assumption report");
    check->add_option("--family", family)->required();
    check->add_option("--params", params);
    check->add_option("--horizon", horizon);
    check->callback([&]() {
        DampingCalculus calc(parse_damping(family, params));
        const auto rep = calc.check_assumptions(horizon);
        auto line = [](const std::string& k, const std::string& v) {
            std::printf("%-18s %s\n", (k + ":").c_str(), v.c_str());
        };
        line("family", family);
        line("b_positive", rep.b_positive ? "true" : "false");
        line("b0_estimate", fmt17(rep.b0_estimate));
        line("b0_analytic", fmt17(rep.b0_analytic));
        line("b0_ok", rep.b0_ok ? "true" : "false");
        line("not_overdamping", rep.not_overdamping ? "true" : "false");
        line("gamma_estimate", rep.gamma_estimate
                                   ? fmt17(*rep.gamma_estimate)
                                   : std::string("n/a"));
        line("B0", fmt17(rep.B0));
        line("limit_2_4", fmt17(rep.limit_2_4));
        line("limit_5_3", fmt17(rep.limit_5_3));
    });

    std::string what = "b";
    auto* eval = damping->add_subcommand("eval", "evaluate b, B, Binv, Phi, B0");
    eval->add_option("--family", family)->required();
    eval->add_option("--params", params);
    eval->add_option("--what", what)
        ->check(CLI::IsMember({"b", "B", "Binv", "Phi", "B0"}))
        ->required();
    eval->add_option("--t", t_arg);
    eval->callback([&]() {
        DampingCalculus calc(parse_damping(family, params));
        double v = 0.0;
        if (what == "b") v = calc.b(t_arg);
        else if (what == "B") v = calc.eval_B(t_arg);
        else if (what == "Binv") v = calc.invert_B(t_arg);
        else if (what == "Phi") v = calc.eval_Phi(t_arg).phi;
        else v = calc.eval_B0();
        std::cout << fmt17(v) << '\n';
    });

    // verify-cutoff
    std::string R_list = "10,100,1000";
    auto* vc = app.add_subcommand("verify-cutoff",
                                  "measured cut-off constants per R");
    vc->add_option("--family", family)->required();
    vc->add_option("--params", params);
    vc->add_option("--R", R_list);
    vc->add_option("--p", p);
    vc->add_option("--N", N);
    vc->callback([&]() {
        DampingCalculus calc(parse_damping(family, params));
        std::printf("%-12s %-22s %-22s %-22s\n", "R", "C1", "C2", "C3");
        for (double R : parse_list(R_list)) {
            CutoffFamily fam(calc, R, p, N);
            const auto c = fam.verify_cutoff_bounds();
            std::printf("%-12g %-22.15g %-22.15g %-22.15g\n", R, c.C1, c.C2,
                        c.C3);
        }
    });

    // key-bound
    double delta = 1.0, C0 = 1.0, R1 = 1.0, theta = 1.0;
    auto* kb = app.add_subcommand("key-bound",
                                  "blowup-radius bound and ODE cross-check");
    kb->add_option("--delta", delta)->required();
    kb->add_option("--C0", C0)->required();
    kb->add_option("--R1", R1)->required();
    kb->add_option("--theta", theta)->required();
    kb->add_option("--p", p)->required();
    kb->callback([&]() {
        const double bound = key_upper_bound(delta, C0, R1, theta, p);
        const auto chk = check_key_lemma_ode(delta, C0, R1, theta, p);
        std::cout << "bound " << fmt17(bound) << '\n';
        std::cout << "ode_blowup_radius " << fmt17(chk.blowup_radius) << '\n';
        std::cout << "verdict " << (chk.ok ? "ok" : "violated") << '\n';
    });

    // solve
    double L = 40.0, h = 0.05, umax = 1e6, tmax = 200.0, width = 1.0;
    double cfl = 0.45, cadence = 0.0;
    std::string snapshots_dir, out_csv;
    auto* solve = app.add_subcommand("solve", "run until blowup or horizon");
    solve->set_help_flag("--help", "print help");
    solve->add_option("--family", family)->required();
    solve->add_option("--params", params);
    solve->add_option("--p", p)->required();
    solve->add_option("--N", N);
    solve->add_option("--eps", eps)->required();
    solve->add_option("--L", L);
    solve->add_option("--h", h);
    solve->add_option("--umax", umax);
    solve->add_option("--tmax", tmax);
    solve->add_option("--cfl", cfl);
    solve->add_option("--width", width);
    solve->add_option("--snapshots", snapshots_dir);
    solve->add_option("--cadence", cadence);
    solve->add_option("--out", out_csv);
    solve->callback([&]() {
        SolveConfig cfg;
        cfg.damping = parse_damping(family, params);
        cfg.p = p;
        cfg.eps = eps;
        cfg.N = N;
        cfg.L = L;
        cfg.h = h;
        cfg.cfl = cfl;
        cfg.U_max = umax;
        cfg.T_max = tmax;
        cfg.data_width = width;
        cfg.snapshot_cadence = cadence;
        const auto res = solve_until_blowup(cfg);
        if (!snapshots_dir.empty()) {
            std::filesystem::create_directories(snapshots_dir);
            int idx = 0;
            for (const auto& snap : res.snapshots) {
                char name[32];
                std::snprintf(name, sizeof(name), "snap_%04d.txt", idx++);
                write_snapshot(snapshots_dir + "/" + name, snap);
            }
        }
        if (!out_csv.empty()) append_record_csv(out_csv, res.record);
        print_record(res.record);
    });

    // scaled-solve
    double ds = 1e-4, Y = 12.0, k_grid = 0.05, s_end = 1.0;
    std::string energy_out;
    auto* ss = app.add_subcommand("scaled-solve",
                                  "evolve in scaling variables");
    ss->add_option("--family", family)->required();
    ss->add_option("--params", params);
    ss->add_option("--p", p)->required();
    ss->add_option("--N", N);
    ss->add_option("--eps", eps)->required();
    ss->add_option("--ds", ds);
    ss->add_option("--Y", Y);
    ss->add_option("--k", k_grid);
    ss->add_option("--s-end", s_end);
    ss->add_option("--width", width);
    ss->add_option("--energy-out", energy_out);
    ss->callback([&]() {
        DampingCalculus calc(parse_damping(family, params));
        Snapshot init;
        init.t = 0.0;
        init.h = k_grid;
        init.N = N;
        const size_t M = static_cast<size_t>(std::llround(Y / k_grid)) + 1;
        init.u.resize(M);
        init.v.assign(M, 0.0);
        for (size_t i = 0; i < M; ++i) {
            const double r = static_cast<double>(i) * k_grid;
            init.u[i] = eps * std::exp(-r * r / (width * width));
        }
        ScaledState st = to_scaled(init, calc, Y, k_grid);
        std::vector<ScaledState> series{st};
        const int n_steps = static_cast<int>(std::ceil(s_end / ds));
        const int keep = std::max(1, n_steps / 200);
        for (int n = 1; n <= n_steps; ++n) {
            st = step_scaled(st, calc, p, ds);
            if (n % keep == 0 || n == n_steps) series.push_back(st);
        }
        if (N == 1) {
            const auto reports = compute_energies_1d(series, calc, p);
            std::ostream* os = &std::cout;
            std::ofstream file;
            if (!energy_out.empty()) {
                file.open(energy_out);
                os = &file;
            }
            *os << "s,E0,E1,E2,E3,E4,E5,alpha,dalpha,M,mean_f,mean_g,"
                   "residual\n";
            for (const auto& r : reports) {
                *os << fmt17(r.s) << ',' << fmt17(r.E0) << ',' << fmt17(r.E1)
                    << ',' << fmt17(r.E2) << ',' << fmt17(r.E3) << ','
                    << fmt17(r.E4) << ',' << fmt17(r.E5) << ','
                    << fmt17(r.alpha) << ',' << fmt17(r.dalpha_ds) << ','
                    << fmt17(r.M) << ',' << fmt17(r.mean_f) << ','
                    << fmt17(r.mean_g) << ',' << fmt17(r.identity_residual)
                    << '\n';
            }
        } else {
            std::cout << "s_end " << fmt17(st.s) << " max|v| "
                      << fmt17(*std::max_element(st.v.begin(), st.v.end()))
                      << '\n';
        }
    });

    // compare-frames
    auto* cfr = app.add_subcommand(
        "compare-frames", "direct vs scaled-frame relative L2 discrepancy");
    cfr->add_option("--family", family)->required();
    cfr->add_option("--params", params);
    cfr->add_option("--p", p)->required();
    cfr->add_option("--eps", eps)->required();
    cfr->add_option("--N", N);
    cfr->add_option("--s-end", s_end);
    cfr->callback([&]() {
        DampingCalculus calc(parse_damping(family, params));
        SolveConfig cfg;
        cfg.damping = parse_damping(family, params);
        cfg.p = p;
        cfg.eps = eps;
        cfg.N = N;
        cfg.L = 30.0;
        cfg.h = 0.025;
        cfg.T_max = calc.invert_B(std::expm1(s_end));
        cfg.snapshot_cadence = cfg.T_max;
        const auto res = solve_until_blowup(cfg);
        const Snapshot& direct = res.snapshots.back();

        Snapshot init = res.snapshots.front();
        const double Yd = 12.0, kd = 0.05;
        ScaledState st = to_scaled(init, calc, Yd, kd);
        const double dss = 2.5e-4;
        while (st.s < s_end - 1e-12) {
            st = step_scaled(st, calc, p, std::min(dss, s_end - st.s));
        }
        const Snapshot back = from_scaled(st, calc, direct.h,
                                          0.8 * Yd * std::exp(0.5 * s_end));
        double num = 0.0, den = 0.0;
        const size_t M = std::min(direct.u.size(), back.u.size());
        for (size_t i = 0; i < M; ++i) {
            const double d = direct.u[i] - back.u[i];
            num += d * d;
            den += direct.u[i] * direct.u[i];
        }
        std::cout << "relative_l2 " << fmt17(std::sqrt(num / den)) << '\n';
    });

    // heat-lower-bound
    std::string eps_list_arg = "1.0";
    auto* hlb = app.add_subcommand("heat-lower-bound",
                                   "super-solution lifespan lower bound");
    hlb->set_help_flag("--help", "print help");
    hlb->add_option("--p", p)->required();
    hlb->add_option("--N", N);
    hlb->add_option("--eps-list", eps_list_arg)->required();
    hlb->add_option("--L", L);
    hlb->add_option("--h", h);
    hlb->add_option("--width", width);
    hlb->callback([&]() {
        const size_t M = static_cast<size_t>(std::llround(L / h)) + 1;
        std::vector<double> f(M);
        for (size_t i = 0; i < M; ++i) {
            const double r = static_cast<double>(i) * h;
            f[i] = std::exp(-r * r / (width * width));
        }
        std::cout << "eps,t_eps,log_t_eps,T_heat,verdict\n";
        for (double e : parse_list(eps_list_arg)) {
            HeatLowerBound lb(f, e, p, N, h);
            HeatConfig hc;
            hc.p = p;
            hc.eps = e;
            hc.N = N;
            hc.L = L;
            hc.h = h;
            hc.data_width = width;
            hc.T_max = std::min(
                1e4, 2.0 * std::exp(std::min(lb.log_t_eps(), 9.0)));
            const auto rec = heat_solve_until_blowup(hc);
            const bool blew = rec.reason == TerminationReason::Threshold;
            const double T_heat = blew
                                      ? rec.T_num
                                      : std::numeric_limits<double>::infinity();
            const bool ok = T_heat >= lb.t_eps();
            std::cout << fmt17(e) << ',' << fmt17(lb.t_eps()) << ','
                      << fmt17(lb.log_t_eps()) << ',' << fmt17(T_heat) << ','
                      << (ok ? "ok" : "violated") << '\n';
        }
    });

    // sweep
    std::string plan_path;
    auto* sweep = app.add_subcommand("sweep", "run an epsilon sweep plan");
    sweep->add_option("--plan", plan_path)->required();
    sweep->callback([&]() {
        const auto plan = parse_plan_file(plan_path);
        const auto records = run_sweep(plan);
        write_records_csv(std::cout, records);
    });

    // fit
    std::string csv_path, model = "power";
    bool use_B_time = false;
    auto* fit = app.add_subcommand("fit", "regress lifespan records");
    fit->add_option("--csv", csv_path)->required();
    fit->add_option("--model", model)
        ->check(CLI::IsMember({"power", "critical"}));
    fit->add_flag("--b-time", use_B_time, "fit log B(T) instead of log T");
    fit->callback([&]() {
        std::ifstream is(csv_path);
        if (!is) throw std::runtime_error("cannot open " + csv_path);
        const auto records = read_records_csv(is);
        if (records.empty()) throw std::runtime_error("no records in csv");
        SweepPlan plan;
        plan.damping = spec_from_label(records.front().label);
        plan.N = records.front().N;
        plan.p = records.front().p;
        const auto result =
            model == "power" ? fit_subcritical(records, plan, use_B_time)
                             : fit_critical(records, plan);
        write_fit_csv(std::cout, result);
    });

    try {
        CLI11_PARSE(app, argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
