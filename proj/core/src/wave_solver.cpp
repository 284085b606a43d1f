#include "dwlab/wave_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dwlab/cutoff.hpp"

namespace dwlab {

std::string to_string(TerminationReason r) {
    switch (r) {
        case TerminationReason::Threshold: return "threshold";
        case TerminationReason::StepCollapse: return "step_collapse";
        case TerminationReason::Horizon: return "horizon";
    }
    return "?";
}

std::vector<double> radial_laplacian(const std::vector<double>& f, int N,
                                     double h) {
    const size_t M = f.size();
    std::vector<double> out(M, 0.0);
    if (M < 3) return out;
    const double ih2 = 1.0 / (h * h);
    // r = 0: ghost reflection u_{-1} = u_1 gives N * u_rr limit.
    out[0] = 2.0 * N * (f[1] - f[0]) * ih2;
    for (size_t i = 1; i + 1 < M; ++i) {
        const double r = static_cast<double>(i) * h;
        out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * ih2 +
                 (N - 1) * (f[i + 1] - f[i - 1]) / (2.0 * h * r);
    }
    return out;
}

namespace {

double nonlinearity(double u, double p) {
    const double a = std::abs(u);
    if (p == 2.0) return a * a;
    if (p == 3.0) return a * a * a;
    if (p == 4.0) return a * a * a * a;
    return std::pow(a, p);
}

std::vector<double> rhs_fields(const std::vector<double>& u, int N, double h,
                               double p, double t, const Forcing& forcing) {
    auto lap = radial_laplacian(u, N, h);
    for (size_t i = 0; i + 1 < u.size(); ++i) {
        lap[i] += nonlinearity(u[i], p);
        if (forcing) lap[i] += forcing(static_cast<double>(i) * h, t);
    }
    lap.back() = 0.0;  // Dirichlet
    return lap;
}

bool all_finite(const std::vector<double>& f) {
    for (double x : f) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

}  // namespace

WaveState step(const WaveState& state, const DampingCalculus& calc, double p,
               double dt, const Forcing& forcing) {
    const size_t M = state.u.size();
    WaveState next;
    next.h = state.h;
    next.N = state.N;
    next.dt = dt;
    next.t = state.t + dt;
    next.u.assign(M, 0.0);

    const auto rhs = rhs_fields(state.u, state.N, state.h, p, state.t, forcing);
    const double b_now = calc.b(state.t);

    const bool bootstrap = state.u_prev.empty() || state.dt != dt;
    if (bootstrap) {
        // Taylor start from (u, v): u_tt = rhs - b v.
        for (size_t i = 0; i + 1 < M; ++i) {
            next.u[i] = state.u[i] + dt * state.v[i] +
                        0.5 * dt * dt * (rhs[i] - b_now * state.v[i]);
        }
    } else {
        const double theta = 0.5 * b_now * dt;
        for (size_t i = 0; i + 1 < M; ++i) {
            next.u[i] = (2.0 * state.u[i] - (1.0 - theta) * state.u_prev[i] +
                         dt * dt * rhs[i]) /
                        (1.0 + theta);
        }
    }
    next.u_prev = state.u;
    next.v.assign(M, 0.0);
    if (bootstrap) {
        for (size_t i = 0; i + 1 < M; ++i) {
            next.v[i] = state.v[i] + dt * (rhs[i] - b_now * state.v[i]);
        }
    } else {
        // second-order one-sided difference at the new level
        for (size_t i = 0; i + 1 < M; ++i) {
            next.v[i] = (3.0 * next.u[i] - 4.0 * state.u[i] +
                         state.u_prev[i]) /
                        (2.0 * dt);
        }
    }
    return next;
}

bool check_sign_condition(const std::vector<double>& f,
                          const std::vector<double>& g, int N, double h,
                          double B0) {
    double sf = 0.0, sg = 0.0;
    for (size_t i = 0; i < f.size(); ++i) {
        const double w = std::pow(static_cast<double>(i) * h, N - 1);
        const double trap = (i == 0 || i + 1 == f.size()) ? 0.5 : 1.0;
        sf += trap * w * f[i];
        if (i < g.size()) sg += trap * w * g[i];
    }
    return (sf + B0 * sg) * h * unit_sphere_area(N) > 0.0;
}

SolveResult solve_until_blowup(const SolveConfig& config) {
    const DampingCalculus calc(config.damping);
    const size_t M = static_cast<size_t>(std::llround(config.L / config.h)) + 1;

    WaveState st;
    st.h = config.h;
    st.N = config.N;
    st.t = 0.0;
    st.u.resize(M);
    st.v.assign(M, 0.0);
    const double w2 = config.data_width * config.data_width;
    for (size_t i = 0; i < M; ++i) {
        const double r = static_cast<double>(i) * config.h;
        st.u[i] = config.eps * std::exp(-r * r / w2);
    }
    st.u.back() = 0.0;

    SolveResult out;
    out.record.label = config.damping.label;
    out.record.N = config.N;
    out.record.p = config.p;
    out.record.eps = config.eps;
    out.record.params = config.damping.label;

    auto snap = [&](const WaveState& s) {
        if (!out.snapshots.empty() && out.snapshots.back().t == s.t) return;
        out.snapshots.push_back({s.t, s.h, s.N, s.u, s.v});
    };
    snap(st);

    const double dt0 = config.cfl * config.h;
    double dt = dt0;
    double next_snapshot = config.snapshot_cadence;
    long steps = 0;
    double peak = config.eps;
    const size_t guard_idx = M >= 3 ? M - 3 : 0;

    auto peak_of = [](const std::vector<double>& u) {
        double m = 0.0;
        for (double x : u) m = std::max(m, std::abs(x));
        return m;
    };

    while (st.t < config.T_max) {
        WaveState next = step(st, calc, config.p, dt);
        ++steps;
        if (!all_finite(next.u)) {
            dt *= 0.5;
            if (dt < config.dt_min) {
                out.record.reason = TerminationReason::StepCollapse;
                out.record.T_num = st.t;
                out.record.peak_norm = peak;
                break;
            }
            st.u_prev.clear();  // force Taylor restart at the new dt
            continue;
        }
        peak = std::max(peak, peak_of(next.u));
        if (peak_of(next.u) >= config.U_max) {
            // One bisection level in dt for the crossing time.
            WaveState half = step(st, calc, config.p, 0.5 * dt);
            double T = (peak_of(half.u) >= config.U_max) ? st.t + 0.5 * dt
                                                         : st.t + dt;
            out.record.reason = TerminationReason::Threshold;
            out.record.T_num = T;
            out.record.peak_norm = peak_of(next.u);
            snap(next);
            break;
        }
        for (size_t i = guard_idx; i < M; ++i) {
            if (std::abs(next.u[i]) > 1e-12) {
                throw std::runtime_error(
                    "solve_until_blowup: support reached the outer boundary, "
                    "domain too small");
            }
        }
        st = std::move(next);
        if (config.snapshot_cadence > 0.0 && st.t >= next_snapshot) {
            snap(st);
            next_snapshot += config.snapshot_cadence;
        }
        if (st.t >= config.T_max) {
            out.record.reason = TerminationReason::Horizon;
            out.record.T_num = config.T_max;
            out.record.peak_norm = peak;
            snap(st);
            break;
        }
    }
    if (out.record.T_num == 0.0 && out.record.reason == TerminationReason::Horizon) {
        out.record.T_num = config.T_max;
        out.record.peak_norm = peak;
    }
    out.record.steps = steps;
    out.record.B_of_T = calc.eval_B(out.record.T_num);
    return out;
}

double convergence_order(const DampingSpec& damping, double p, int N,
                         double h0, int levels, double T) {
    const DampingCalculus calc(damping);
    const double L = 8.0;

    // Manufactured solution u = exp(-t) exp(-r^2):
    //   F = u_tt - Lap u + b u_t - |u|^p
    //     = u + (2N - 4 r^2) u - b(t) u - u^p.
    auto forcing = [&](double r, double t) {
        const double u = std::exp(-t) * std::exp(-r * r);
        return u + (2.0 * N - 4.0 * r * r) * u - calc.b(t) * u -
               std::pow(u, p);
    };

    std::vector<double> errs;
    double h = h0;
    for (int lev = 0; lev < levels; ++lev, h *= 0.5) {
        const size_t M = static_cast<size_t>(std::llround(L / h)) + 1;
        WaveState st;
        st.h = h;
        st.N = N;
        st.u.resize(M);
        st.v.resize(M);
        for (size_t i = 0; i < M; ++i) {
            const double r = static_cast<double>(i) * h;
            st.u[i] = std::exp(-r * r);
            st.v[i] = -std::exp(-r * r);
        }
        st.u.back() = 0.0;
        st.v.back() = 0.0;
        const long ns = static_cast<long>(std::ceil(T / (0.25 * h)));
        const double dt = T / ns;
        for (long n = 0; n < ns; ++n) {
            st = step(st, calc, p, dt, forcing);
        }
        double e2 = 0.0;
        for (size_t i = 0; i < M; ++i) {
            const double r = static_cast<double>(i) * h;
            const double ue = std::exp(-T) * std::exp(-r * r);
            const double d = st.u[i] - ue;
            e2 += d * d * h;
        }
        errs.push_back(std::sqrt(e2));
    }
    double order = 0.0;
    for (size_t i = 1; i < errs.size(); ++i) {
        order += std::log2(errs[i - 1] / errs[i]);
    }
    return order / (errs.size() - 1);
}

}  // namespace dwlab
