#include "dwlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dwlab {

namespace {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

TerminationReason reason_from_string(const std::string& s) {
    if (s == "threshold") return TerminationReason::Threshold;
    if (s == "step_collapse") return TerminationReason::StepCollapse;
    if (s == "horizon") return TerminationReason::Horizon;
    throw std::runtime_error("unknown termination reason: " + s);
}

struct LinFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

LinFit least_squares(const std::vector<double>& x,
                     const std::vector<double>& y) {
    const size_t n = x.size();
    if (n < 2) throw std::invalid_argument("least_squares: need >= 2 points");
    double sx = 0, sy = 0;
    for (size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0, syy = 0;
    for (size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return f;
}

double kappa_exponent(double p, int N) {
    return 1.0 / (1.0 / (p - 1.0) - 0.5 * N);
}

bool is_fujita_critical(double p, int N) {
    return std::abs(p - (1.0 + 2.0 / N)) < 1e-12;
}

std::vector<LifespanRecord> threshold_only(
    const std::vector<LifespanRecord>& records) {
    std::vector<LifespanRecord> out;
    for (const auto& r : records) {
        if (r.reason == TerminationReason::Threshold) out.push_back(r);
    }
    if (out.size() < 2) {
        throw std::runtime_error("fit: fewer than 2 threshold records");
    }
    return out;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

std::vector<LifespanRecord> run_sweep(const SweepPlan& plan) {
    if (plan.eps_list.empty()) {
        throw std::invalid_argument("run_sweep: empty eps list");
    }
    for (size_t i = 1; i < plan.eps_list.size(); ++i) {
        if (!(plan.eps_list[i] < plan.eps_list[i - 1])) {
            throw std::invalid_argument(
                "run_sweep: eps list must be strictly decreasing");
        }
    }
    DampingCalculus calc(plan.damping);
    const double support = 6.0 * plan.data_width;
    const double p = plan.p;
    const int N = plan.N;
    const double kappa = kappa_exponent(p, N);
    const bool critical = is_fujita_critical(p, N);

    auto run_one = [&](double eps, double L) {
        SolveConfig cfg;
        cfg.damping = plan.damping;
        cfg.p = p;
        cfg.eps = eps;
        cfg.N = N;
        cfg.L = L;
        cfg.h = std::min(plan.h_max, L / plan.grid_divisor);
        cfg.cfl = plan.cfl;
        cfg.U_max = plan.umax;
        cfg.T_max = plan.tmax;
        cfg.data_width = plan.data_width;
        return solve_until_blowup(cfg).record;
    };

    // pilot at the largest eps calibrates the lifespan constant, which
    // then sizes the domain for the smaller-eps runs
    const double eps0 = plan.eps_list.front();
    LifespanRecord pilot = run_one(eps0, support + 1.2 * plan.tmax + 2.0);
    double C_cal = 1.0;
    if (pilot.reason == TerminationReason::Threshold) {
        C_cal = critical ? std::log1p(pilot.B_of_T) * std::pow(eps0, p - 1.0)
                         : pilot.B_of_T * std::pow(eps0, kappa);
        C_cal = std::max(C_cal, 1e-6);
    }

    auto domain_for = [&](double eps) {
        double T_guess = plan.tmax;
        const auto pred = calc.predicted_lifespan(p, N, eps, 2.0 * C_cal);
        if (!pred.overflow) T_guess = std::min(pred.t, plan.tmax);
        return support + 1.2 * T_guess + 2.0;
    };

    const size_t n = plan.eps_list.size();
    std::vector<LifespanRecord> records(n);
    records[0] = pilot;
    const int workers =
        std::max(1, std::min<int>(plan.parallelism,
                                  static_cast<int>(n > 0 ? n - 1 : 0)));
    if (workers <= 1) {
        for (size_t i = 1; i < n; ++i) {
            records[i] =
                run_one(plan.eps_list[i], domain_for(plan.eps_list[i]));
        }
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{1};
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (size_t i = next.fetch_add(1); i < n;
                     i = next.fetch_add(1)) {
                    records[i] = run_one(plan.eps_list[i],
                                         domain_for(plan.eps_list[i]));
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    if (!plan.out.empty()) {
        std::ofstream os(plan.out);
        if (!os) throw std::runtime_error("cannot open " + plan.out);
        write_records_csv(os, records);
    }
    return records;
}

FitResult fit_subcritical(const std::vector<LifespanRecord>& records,
                          const SweepPlan& plan, bool use_B_time) {
    const auto recs = threshold_only(records);
    std::vector<double> x, y;
    for (const auto& r : recs) {
        x.push_back(std::log(r.eps));
        y.push_back(std::log(use_B_time ? r.B_of_T : r.T_num));
    }
    const auto f = least_squares(x, y);

    FitResult out;
    out.model = FitResult::Model::Power;
    out.slope = f.slope;
    out.intercept = f.intercept;
    out.r_squared = f.r2;
    const double kappa = kappa_exponent(plan.p, plan.N);
    if (use_B_time) {
        out.predicted_slope = -kappa;
    } else {
        switch (plan.damping.family) {
            case DampingFamily::Constant:
                out.predicted_slope = -kappa;
                break;
            case DampingFamily::PowerLaw:
                out.predicted_slope = -kappa / (1.0 + plan.damping.beta);
                break;
            case DampingFamily::ScaleInvariant:
                out.predicted_slope = -kappa / 2.0;
                break;
            case DampingFamily::LogTower:
                out.predicted_slope = std::nan("");
                break;
        }
    }
    out.relative_error =
        std::isfinite(out.predicted_slope)
            ? std::abs(out.slope - out.predicted_slope) /
                  std::abs(out.predicted_slope)
            : std::nan("");
    return out;
}

FitResult fit_critical(const std::vector<LifespanRecord>& records,
                       const SweepPlan& plan) {
    const auto recs = threshold_only(records);
    std::vector<double> x, y;
    for (const auto& r : recs) {
        x.push_back(std::pow(r.eps, -(plan.p - 1.0)));
        y.push_back(std::log1p(r.B_of_T));
    }
    const auto f = least_squares(x, y);
    FitResult out;
    out.model = FitResult::Model::Critical;
    out.slope = f.slope;
    out.intercept = f.intercept;
    out.r_squared = f.r2;
    out.predicted_slope = 0.0;  // the model asserts linearity, slope > 0
    out.relative_error = 0.0;
    return out;
}

double critical_curvature(const std::vector<LifespanRecord>& records) {
    const auto recs = threshold_only(records);
    const size_t n = recs.size();
    if (n < 3) throw std::invalid_argument("curvature: need >= 3 records");
    // quadratic least squares via the 3x3 normal equations
    double S[5] = {0, 0, 0, 0, 0};
    double T0 = 0, T1 = 0, T2 = 0;
    for (const auto& r : recs) {
        const double x = std::log(r.eps);
        // log B (not log(B+1)): the +1 would make even a pure power law
        // look convex, masking the signal we are after.
        const double y = std::log(r.B_of_T);
        double xp = 1.0;
        for (int k = 0; k <= 4; ++k) {
            S[k] += xp;
            if (k <= 2) {
                if (k == 0) T0 += y;
                if (k == 1) T1 += y * x;
                if (k == 2) T2 += y * x * x;
            }
            xp *= x;
        }
    }
    double A[3][4] = {{S[0], S[1], S[2], T0},
                      {S[1], S[2], S[3], T1},
                      {S[2], S[3], S[4], T2}};
    for (int c = 0; c < 3; ++c) {
        int piv = c;
        for (int r = c + 1; r < 3; ++r) {
            if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
        }
        std::swap(A[c], A[piv]);
        for (int r = 0; r < 3; ++r) {
            if (r == c) continue;
            const double m = A[r][c] / A[c][c];
            for (int k = c; k < 4; ++k) A[r][k] -= m * A[c][k];
        }
    }
    return A[2][3] / A[2][2];  // coefficient of x^2
}

UniversalityReport universality_check(
    const std::vector<std::vector<LifespanRecord>>& record_sets,
    const SweepPlan& plan) {
    UniversalityReport rep;
    rep.predicted_slope = -kappa_exponent(plan.p, plan.N);
    std::vector<double> included;
    for (const auto& recs : record_sets) {
        const auto thr = threshold_only(recs);
        std::vector<double> x, y;
        for (const auto& r : thr) {
            x.push_back(std::log(r.eps));
            y.push_back(std::log(r.B_of_T));
        }
        const auto f = least_squares(x, y);
        UniversalityEntry e;
        e.label = thr.front().label;
        e.slope = f.slope;
        e.r_squared = f.r2;
        e.excluded = e.label.rfind("scaleinv", 0) == 0;
        if (!e.excluded) included.push_back(f.slope);
        rep.entries.push_back(e);
    }
    for (double s : included) {
        rep.max_rel_dev =
            std::max(rep.max_rel_dev, std::abs(s - rep.predicted_slope) /
                                          std::abs(rep.predicted_slope));
    }
    for (size_t i = 0; i < included.size(); ++i) {
        for (size_t j = i + 1; j < included.size(); ++j) {
            rep.max_pairwise_dev = std::max(
                rep.max_pairwise_dev,
                std::abs(included[i] - included[j]) /
                    std::max(std::abs(included[i]), std::abs(included[j])));
        }
    }
    rep.ok = rep.max_rel_dev <= 0.15 && rep.max_pairwise_dev <= 0.15;
    return rep;
}

void write_records_csv(std::ostream& os,
                       const std::vector<LifespanRecord>& records) {
    os << "label,N,p,beta_or_params,eps,T_num,B_of_T,reason,peak_norm,steps\n";
    for (const auto& r : records) {
        os << r.label << ',' << r.N << ',' << fmt17(r.p) << ',' << r.params
           << ',' << fmt17(r.eps) << ',' << fmt17(r.T_num) << ','
           << fmt17(r.B_of_T) << ',' << to_string(r.reason) << ','
           << fmt17(r.peak_norm) << ',' << r.steps << '\n';
    }
}

std::vector<LifespanRecord> read_records_csv(std::istream& is) {
    std::vector<LifespanRecord> out;
    std::string line;
    if (!std::getline(is, line)) return out;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        std::vector<std::string> cell;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) cell.push_back(tok);
        if (cell.size() != 10) {
            throw std::runtime_error("records csv: bad row: " + line);
        }
        LifespanRecord r;
        r.label = cell[0];
        r.N = std::stoi(cell[1]);
        r.p = std::stod(cell[2]);
        r.params = cell[3];
        r.eps = std::stod(cell[4]);
        r.T_num = std::stod(cell[5]);
        r.B_of_T = std::stod(cell[6]);
        r.reason = reason_from_string(cell[7]);
        r.peak_norm = std::stod(cell[8]);
        r.steps = std::stol(cell[9]);
        out.push_back(r);
    }
    return out;
}

void write_fit_csv(std::ostream& os, const FitResult& fit) {
    os << "model,slope,intercept,r_squared,predicted_slope,relative_error\n";
    os << (fit.model == FitResult::Model::Power ? "power" : "critical") << ','
       << fmt17(fit.slope) << ',' << fmt17(fit.intercept) << ','
       << fmt17(fit.r_squared) << ',' << fmt17(fit.predicted_slope) << ','
       << fmt17(fit.relative_error) << '\n';
}

DampingSpec parse_damping(const std::string& family,
                          const std::string& params) {
    // "key=value[,key=value]" pairs; a bare number is taken as the
    // family's single parameter
    double value = std::nan("");
    std::stringstream ss(params);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        const auto eq = tok.find('=');
        const std::string key =
            eq == std::string::npos ? "" : trim(tok.substr(0, eq));
        const std::string val =
            eq == std::string::npos ? tok : trim(tok.substr(eq + 1));
        if (!key.empty() && key != "c" && key != "beta" && key != "mu" &&
            key != "n") {
            throw std::runtime_error("unknown damping parameter: " + key);
        }
        value = std::stod(val);
    }
    const bool has = std::isfinite(value);
    if (family == "constant") {
        return DampingSpec::constant(has ? value : 1.0);
    }
    if (family == "powerlaw") {
        if (!has) throw std::runtime_error("powerlaw requires beta");
        return DampingSpec::power_law(value);
    }
    if (family == "scaleinv") {
        if (!has) throw std::runtime_error("scaleinv requires mu");
        return DampingSpec::scale_invariant(value);
    }
    if (family == "logtower") {
        return DampingSpec::log_tower(
            has ? static_cast<int>(std::llround(value)) : 1);
    }
    throw std::runtime_error("unknown damping family: " + family);
}

SweepPlan parse_plan_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open plan file " + path);
    SweepPlan plan;
    std::string family, params, line;
    bool have_family = false, have_p = false, have_eps = false;
    while (std::getline(is, line)) {
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("plan: expected key=value, got: " + line);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "family") {
            family = val;
            have_family = true;
        } else if (key == "params") {
            params = val;
        } else if (key == "N") {
            plan.N = std::stoi(val);
        } else if (key == "p") {
            plan.p = std::stod(val);
            have_p = true;
        } else if (key == "eps_list") {
            std::stringstream ss(val);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                tok = trim(tok);
                if (!tok.empty()) plan.eps_list.push_back(std::stod(tok));
            }
            have_eps = true;
        } else if (key == "tmax") {
            plan.tmax = std::stod(val);
        } else if (key == "umax") {
            plan.umax = std::stod(val);
        } else if (key == "cfl") {
            plan.cfl = std::stod(val);
        } else if (key == "h_max") {
            plan.h_max = std::stod(val);
        } else if (key == "grid_divisor") {
            plan.grid_divisor = std::stoi(val);
        } else if (key == "width") {
            plan.data_width = std::stod(val);
        } else if (key == "parallelism") {
            plan.parallelism = std::stoi(val);
        } else if (key == "out") {
            plan.out = val;
        } else {
            throw std::runtime_error("plan: unknown key: " + key);
        }
    }
    if (!have_family || !have_p || !have_eps) {
        throw std::runtime_error("plan: family, p, eps_list are required");
    }
    plan.damping = parse_damping(family, params);
    return plan;
}

}  // namespace dwlab
