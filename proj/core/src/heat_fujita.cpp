#include "dwlab/heat_fujita.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "dwlab/cutoff.hpp"
#include "dwlab/quadrature.hpp"

namespace dwlab {

namespace {

double interp_radial(const std::vector<double>& f, double h, double x) {
    const double r = std::abs(x);
    const double u = r / h;
    long i = static_cast<long>(std::floor(u));
    const double t = u - i;
    auto get = [&](long j) -> double {
        if (j < 0) j = -j;
        if (j >= static_cast<long>(f.size())) return 0.0;
        return f[static_cast<size_t>(j)];
    };
    const double fm = get(i - 1), f0 = get(i), f1 = get(i + 1), f2 = get(i + 2);
    const double wm = -t * (t - 1.0) * (t - 2.0) / 6.0;
    const double w0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    const double w1 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    const double w2 = (t + 1.0) * t * (t - 1.0) / 6.0;
    return wm * fm + w0 * f0 + w1 * f1 + w2 * f2;
}

// exp(-a) * int_0^pi exp(a cos th) sin^{N-2} th dth.  Equals
// sqrt(pi) Gamma(nu + 1/2) (2/a)^nu exp(-a) I_nu(a) with nu = (N-2)/2.
double angular_factor(double a, int N) {
    const double nu = 0.5 * (N - 2);
    if (a < 1e-12) {
        return integrate_adaptive(
            [&](double th) { return std::pow(std::sin(th), N - 2); }, 0.0,
            M_PI, 1e-12);
    }
    if (a <= 30.0) {
        return std::sqrt(M_PI) * std::tgamma(nu + 0.5) *
               std::pow(2.0 / a, nu) * std::exp(-a) * std::cyl_bessel_i(nu, a);
    }
    // uniform asymptotic expansion of exp(-a) I_nu(a)
    const double m = 4.0 * nu * nu;
    const double s1 = (m - 1.0) / (8.0 * a);
    const double s2 = (m - 1.0) * (m - 9.0) / (128.0 * a * a);
    const double s3 =
        (m - 1.0) * (m - 9.0) * (m - 25.0) / (3072.0 * a * a * a);
    return std::sqrt(M_PI) * std::tgamma(nu + 0.5) * std::pow(2.0 / a, nu) *
           (1.0 - s1 + s2 - s3) / std::sqrt(2.0 * M_PI * a);
}

// (e^{t Lap} f)(r) for the radial field f on [0, L], L = (M-1) h.
double semigroup_at(const std::vector<double>& f, double t, int N, double h,
                    double r) {
    if (t <= 0.0) return interp_radial(f, h, r);
    const double L = (static_cast<double>(f.size()) - 1.0) * h;
    const double W = 12.0 * std::sqrt(t);
    if (N == 1) {
        const double a = std::max(-L, r - W), b = std::min(L, r + W);
        const double pre = 1.0 / std::sqrt(4.0 * M_PI * t);
        return pre * integrate_adaptive(
                         [&](double xi) {
                             const double d = r - xi;
                             return std::exp(-d * d / (4.0 * t)) *
                                    interp_radial(f, h, xi);
                         },
                         a, b, 1e-9);
    }
    const double a = std::max(0.0, r - W), b = std::min(L, r + W);
    const double pre =
        std::pow(4.0 * M_PI * t, -0.5 * N) * unit_sphere_area(N - 1);
    return pre * integrate_adaptive(
                     [&](double rho) {
                         const double d = r - rho;
                         return interp_radial(f, h, rho) *
                                std::pow(rho, N - 1) *
                                std::exp(-d * d / (4.0 * t)) *
                                angular_factor(r * rho / (2.0 * t), N);
                     },
                     a, b, 1e-8);
}

double radial_mass(const std::vector<double>& f, int N, double h) {
    double acc = 0.0;
    for (size_t i = 0; i < f.size(); ++i) {
        const double trap = (i == 0 || i + 1 == f.size()) ? 0.5 : 1.0;
        const double r = static_cast<double>(i) * h;
        acc += trap * f[i] * (N == 1 ? 1.0 : std::pow(r, N - 1));
    }
    acc *= h;
    return N == 1 ? 2.0 * acc : unit_sphere_area(N) * acc;
}

}  // namespace

std::vector<double> heat_semigroup_field(const std::vector<double>& f,
                                         double eps, double t, int N,
                                         double h) {
    std::vector<double> out(f.size());
    for (size_t i = 0; i < f.size(); ++i) {
        out[i] = eps * semigroup_at(f, t, N, h, static_cast<double>(i) * h);
    }
    return out;
}

double heat_semigroup_sup(const std::vector<double>& f, double eps, double t,
                          int N, double h) {
    // coarse radial probe; r = 0 carries the sup for bump-like data
    const size_t M = f.size();
    const size_t stride = std::max<size_t>(1, M / 64);
    double sup = 0.0;
    for (size_t i = 0; i < M; i += stride) {
        sup = std::max(sup, std::abs(semigroup_at(f, t, N, h,
                                                  static_cast<double>(i) * h)));
    }
    return eps * sup;
}

HeatLowerBound::HeatLowerBound(const std::vector<double>& f, double eps,
                               double p, int N, double grid_h)
    : p_(p), N_(N), q_(0.5 * N * (p - 1.0)) {
    if (p <= 1.0) throw std::invalid_argument("HeatLowerBound: p > 1 required");
    const double L = (static_cast<double>(f.size()) - 1.0) * grid_h;
    // direct quadrature is trustworthy while the kernel window fits
    t_switch_ = (L / 16.0) * (L / 16.0);

    const int n_nodes = 160;
    t_nodes_.resize(n_nodes + 1);
    std::vector<double> supvals(n_nodes + 1);
    t_nodes_[0] = 0.0;
    supvals[0] = eps * *std::max_element(f.begin(), f.end());
    const double t0 = 1e-6 * t_switch_;
    for (int i = 1; i <= n_nodes; ++i) {
        t_nodes_[i] =
            t0 * std::pow(t_switch_ / t0, (i - 1.0) / (n_nodes - 1.0));
        supvals[i] = heat_semigroup_sup(f, eps, t_nodes_[i], N, grid_h);
    }
    cum_.assign(n_nodes + 1, 0.0);
    for (int i = 1; i <= n_nodes; ++i) {
        cum_[i] = cum_[i - 1] +
                  0.5 * (t_nodes_[i] - t_nodes_[i - 1]) *
                      (std::pow(supvals[i], p - 1.0) +
                       std::pow(supvals[i - 1], p - 1.0));
    }
    // calibrate the t^{-N/2} tail so sup(t) is continuous at the switch
    tail_amp_ = supvals.back() * std::pow(t_switch_, 0.5 * N);
    // consistency guard against the exact asymptotic amplitude
    const double exact_amp =
        eps * std::pow(4.0 * M_PI, -0.5 * N) * radial_mass(f, N, grid_h);
    if (exact_amp > 0.0 &&
        std::abs(tail_amp_ - exact_amp) > 0.2 * exact_amp) {
        throw std::runtime_error(
            "HeatLowerBound: tail amplitude mismatch, domain too small");
    }

    const double A = std::pow(tail_amp_, p - 1.0);
    const double target = 1.0 / (p - 1.0);
    const double Cs = cum_.back();
    const double ts = t_switch_;
    if (Cs >= target) {
        // crossing inside the direct range
        log_t_eps_ = std::log(t_for_cum(target));
        t_eps_ = std::exp(log_t_eps_);
        return;
    }
    const double rem = target - Cs;
    if (std::abs(q_ - 1.0) < 1e-12) {
        log_t_eps_ = std::log(ts) + rem / A;
        t_eps_ = std::exp(log_t_eps_);  // may overflow to +inf, that is fine
        return;
    }
    const double X = std::pow(ts, 1.0 - q_) + (1.0 - q_) * rem / A;
    if (q_ > 1.0 && X <= 0.0) {
        // total integral never reaches the target: global existence
        t_eps_ = std::numeric_limits<double>::infinity();
        log_t_eps_ = std::numeric_limits<double>::infinity();
        return;
    }
    log_t_eps_ = std::log(X) / (1.0 - q_);
    t_eps_ = std::exp(log_t_eps_);
}

double HeatLowerBound::t_for_cum(double target) const {
    size_t i = 1;
    while (i < cum_.size() && cum_[i] < target) ++i;
    if (i >= cum_.size()) return t_nodes_.back();
    const double c0 = cum_[i - 1], c1 = cum_[i];
    const double t0 = t_nodes_[i - 1], t1 = t_nodes_[i];
    const double frac = (target - c0) / std::max(c1 - c0, 1e-300);
    return t0 + frac * (t1 - t0);
}

double HeatLowerBound::integral_to(double t) const {
    if (t <= 0.0) return 0.0;
    if (t <= t_switch_) {
        size_t i = 1;
        while (i < t_nodes_.size() && t_nodes_[i] < t) ++i;
        if (i >= t_nodes_.size()) return cum_.back();
        const double t0 = t_nodes_[i - 1], t1 = t_nodes_[i];
        const double frac = (t - t0) / std::max(t1 - t0, 1e-300);
        return cum_[i - 1] + frac * (cum_[i] - cum_[i - 1]);
    }
    const double A = std::pow(tail_amp_, p_ - 1.0);
    const double ts = t_switch_;
    double tail;
    if (std::abs(q_ - 1.0) < 1e-12) {
        tail = A * std::log(t / ts);
    } else {
        tail = A * (std::pow(t, 1.0 - q_) - std::pow(ts, 1.0 - q_)) /
               (1.0 - q_);
    }
    return cum_.back() + tail;
}

double HeatLowerBound::h_of(double t) const {
    return 1.0 - (p_ - 1.0) * integral_to(t);
}

LifespanRecord heat_solve_until_blowup(const HeatConfig& config) {
    const size_t M = static_cast<size_t>(std::llround(config.L / config.h)) + 1;
    std::vector<double> u(M);
    for (size_t i = 0; i < M; ++i) {
        const double r = static_cast<double>(i) * config.h;
        u[i] = config.eps *
               std::exp(-r * r / (config.data_width * config.data_width));
    }
    u.back() = 0.0;

    const double p = config.p;
    const int N = config.N;
    const double h = config.h;
    const double dt = 0.2 * h * h;
    auto rhs = [&](const std::vector<double>& w) {
        std::vector<double> out = radial_laplacian(w, N, h);
        for (size_t i = 0; i + 1 < M; ++i) {
            out[i] += std::pow(std::abs(w[i]), p);
        }
        out.back() = 0.0;
        return out;
    };

    LifespanRecord rec;
    rec.label = "heat";
    rec.N = N;
    rec.p = p;
    rec.params = "heat";
    rec.eps = config.eps;
    rec.reason = TerminationReason::Horizon;

    double t = 0.0;
    long steps = 0;
    double peak = config.eps;
    std::vector<double> k1, k2, k3, k4, tmp(M);
    while (t < config.T_max) {
        k1 = rhs(u);
        for (size_t i = 0; i < M; ++i) tmp[i] = u[i] + 0.5 * dt * k1[i];
        k2 = rhs(tmp);
        for (size_t i = 0; i < M; ++i) tmp[i] = u[i] + 0.5 * dt * k2[i];
        k3 = rhs(tmp);
        for (size_t i = 0; i < M; ++i) tmp[i] = u[i] + dt * k3[i];
        k4 = rhs(tmp);
        double unorm = 0.0;
        for (size_t i = 0; i < M; ++i) {
            u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            unorm = std::max(unorm, std::abs(u[i]));
        }
        t += dt;
        ++steps;
        peak = std::max(peak, unorm);
        if (!std::isfinite(unorm) || unorm >= config.U_max) {
            rec.reason = TerminationReason::Threshold;
            break;
        }
    }
    rec.T_num = t;
    rec.B_of_T = t;  // undamped problem, B is the identity here
    rec.peak_norm = peak;
    rec.steps = steps;
    return rec;
}

double supersolution_residual(const std::vector<double>& f, double eps,
                              double p, int N, double grid_h, int n_samples,
                              unsigned seed) {
    HeatLowerBound lb(f, eps, p, N, grid_h);
    const double L = (static_cast<double>(f.size()) - 1.0) * grid_h;
    const double t_hi =
        std::min({0.9 * std::exp(std::min(lb.log_t_eps(), 700.0)),
                  (L / 16.0) * (L / 16.0), 1e6});

    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, 0.5 * L);
    std::uniform_real_distribution<double> ut(0.0, 1.0);

    auto v = [&](double r, double t) {
        return eps * semigroup_at(f, t, N, grid_h, r);
    };

    double worst = std::numeric_limits<double>::infinity();
    for (int n = 0; n < n_samples; ++n) {
        const double r = ux(rng);
        const double t = 1e-3 + ut(rng) * (t_hi - 1e-3);
        const double sup = heat_semigroup_sup(f, eps, t, N, grid_h);
        const double ht = lb.h_of(t);
        if (ht <= 1e-6) continue;
        const double vv = v(r, t);
        // residual of (d/dt - Lap) U - U^p with U = h^{-1/(p-1)} v:
        // exact value h^{-p/(p-1)} (sup^{p-1} v - v^p), since
        // (d/dt - Lap) v = 0 and h' = -(p-1) sup^{p-1}
        const double res = std::pow(ht, -p / (p - 1.0)) *
                           (std::pow(sup, p - 1.0) * vv -
                            std::pow(std::abs(vv), p));
        worst = std::min(worst, res);
    }
    return worst;
}

}  // namespace dwlab
