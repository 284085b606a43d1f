#include "dwlab/damping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "dwlab/quadrature.hpp"

namespace dwlab {

namespace {

constexpr double kOverflowGuard = 1e300;
constexpr double kExpArgMax = 709.0;  // log(DBL_MAX) minus slack

// l_1..l_{n+1} and their derivatives at t.
struct TowerLevels {
    std::vector<double> l;
    std::vector<double> dl;
};

TowerLevels tower_levels(int n, double t) {
    TowerLevels out;
    out.l.resize(static_cast<size_t>(n) + 1);
    out.dl.resize(static_cast<size_t>(n) + 1);
    out.l[0] = 1.0 + t;
    out.dl[0] = 1.0;
    for (int k = 1; k <= n; ++k) {
        out.l[k] = 1.0 + std::log(out.l[k - 1]);
        out.dl[k] = out.dl[k - 1] / out.l[k - 1];
    }
    return out;
}

double linfit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

DampingSpec DampingSpec::constant(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("Constant damping requires c > 0");
    DampingSpec s;
    s.family = DampingFamily::Constant;
    s.c = c;
    s.label = "constant(" + std::to_string(c) + ")";
    return s;
}

DampingSpec DampingSpec::power_law(double beta) {
    DampingSpec s;
    s.family = DampingFamily::PowerLaw;
    s.beta = beta;
    s.label = "powerlaw(" + std::to_string(beta) + ")";
    return s;
}

DampingSpec DampingSpec::scale_invariant(double mu) {
    if (!(mu > 0.0)) throw std::invalid_argument("ScaleInvariant requires mu > 0");
    DampingSpec s;
    s.family = DampingFamily::ScaleInvariant;
    s.mu = mu;
    s.label = "scaleinv(" + std::to_string(mu) + ")";
    return s;
}

DampingSpec DampingSpec::log_tower(int n) {
    if (n < 1) throw std::invalid_argument("LogTower requires n >= 1");
    DampingSpec s;
    s.family = DampingFamily::LogTower;
    s.tower_n = n;
    s.label = "logtower(" + std::to_string(n) + ")";
    return s;
}

DampingCalculus::DampingCalculus(DampingSpec spec, double quad_tol,
                                 double trunc_exponent)
    : spec_(std::move(spec)), quad_tol_(quad_tol), trunc_exponent_(trunc_exponent) {
    if (analytic_b0() < 1.0) {
        b0_cache_ = phi_integral(0.0);
    }
}

DampingCalculus::Coefficient DampingCalculus::eval_coefficient(double t) const {
    if (t < 0.0) throw std::domain_error("eval_coefficient: t < 0");
    switch (spec_.family) {
        case DampingFamily::Constant:
            return {spec_.c, 0.0};
        case DampingFamily::PowerLaw: {
            const double b = std::pow(1.0 + t, -spec_.beta);
            return {b, -spec_.beta * b / (1.0 + t)};
        }
        case DampingFamily::ScaleInvariant: {
            const double b = spec_.mu / (1.0 + t);
            return {b, -b / (1.0 + t)};
        }
        case DampingFamily::LogTower: {
            const auto lv = tower_levels(spec_.tower_n, t);
            double b = 1.0;
            double logsum = 0.0;  // b'/b = sum l_k'/l_k
            for (int k = 0; k < spec_.tower_n; ++k) {
                b *= lv.l[k];
                logsum += lv.dl[k] / lv.l[k];
            }
            return {b, b * logsum};
        }
    }
    throw std::logic_error("unreachable");
}

double DampingCalculus::eval_B(double t) const {
    if (t < 0.0) throw std::domain_error("eval_B: t < 0");
    switch (spec_.family) {
        case DampingFamily::Constant:
            return t / spec_.c;
        case DampingFamily::PowerLaw: {
            const double bp1 = 1.0 + spec_.beta;
            if (std::abs(bp1) < 1e-14) return std::log1p(t);
            return (std::pow(1.0 + t, bp1) - 1.0) / bp1;
        }
        case DampingFamily::ScaleInvariant:
            return (t + 0.5 * t * t) / spec_.mu;
        case DampingFamily::LogTower: {
            // d/dt l_{n+1} = 1/b, so B = l_{n+1} - 1.
            const auto lv = tower_levels(spec_.tower_n, t);
            return lv.l[spec_.tower_n] - 1.0;
        }
    }
    throw std::logic_error("unreachable");
}

double DampingCalculus::int_b(double t1, double t2) const {
    return int_b_from(t1, t2 - t1);
}

double DampingCalculus::int_b_from(double t1, double d) const {
    // Written so short intervals at large t do not cancel: naive
    // antiderivative differences A(t2) - A(t1) lose all precision when
    // d << t1, which is exactly the regime of the Phi integrand.
    switch (spec_.family) {
        case DampingFamily::Constant:
            return spec_.c * d;
        case DampingFamily::PowerLaw: {
            const double e = 1.0 - spec_.beta;
            const double x1 = 1.0 + t1;
            if (std::abs(e) < 1e-14) return std::log1p(d / x1);
            return std::pow(x1, e) * std::expm1(e * std::log1p(d / x1)) / e;
        }
        case DampingFamily::ScaleInvariant:
            return spec_.mu * std::log1p(d / (1.0 + t1));
        case DampingFamily::LogTower: {
            if (spec_.tower_n == 1) {
                // int (1+s) ds = d (1 + t1 + d/2)
                return d * (1.0 + t1 + 0.5 * d);
            }
            if (spec_.tower_n == 2) {
                // int x (1 + log x) dx, x = 1+t; difference regrouped
                // around log(x2/x1) = log1p(d/x1).
                const double x1 = 1.0 + t1;
                const double x2 = x1 + d;
                const double lr = std::log1p(d / x1);
                return 0.25 * (d * (x1 + x2) * (1.0 + 2.0 * std::log(x1)) +
                               2.0 * x2 * x2 * lr);
            }
            return integrate_adaptive(
                [this, t1](double u) { return b(t1 + u); }, 0.0, d, quad_tol_);
        }
    }
    throw std::logic_error("unreachable");
}

double DampingCalculus::invert_B(double s) const {
    auto t = try_invert_B(s);
    if (!t) {
        throw BInversionError("invert_B: target exceeds the overflow guard t <= 1e300",
                              kOverflowGuard);
    }
    return *t;
}

std::optional<double> DampingCalculus::try_invert_B(double s) const {
    if (s < 0.0) throw std::domain_error("invert_B: s < 0");
    if (s == 0.0) return 0.0;
    if (!std::isfinite(s)) return std::nullopt;

    if (spec_.family == DampingFamily::LogTower) {
        // l_{n+1}(t) = 1 + s unwinds through iterated exponentials.
        double c = 1.0 + s;
        for (int k = spec_.tower_n; k >= 1; --k) {
            if (c - 1.0 > kExpArgMax) return std::nullopt;
            c = std::exp(c - 1.0);
        }
        if (c - 1.0 > kOverflowGuard) return std::nullopt;
        return c - 1.0;
    }

    // Bracket by doubling, then safeguarded Newton (B' = 1/b).
    double lo = 0.0, hi = 1.0;
    while (eval_B(hi) < s) {
        lo = hi;
        hi *= 2.0;
        if (hi > kOverflowGuard) return std::nullopt;
    }
    double t = 0.5 * (lo + hi);
    const double tol = quad_tol_ * (1.0 + s);
    for (int it = 0; it < 200; ++it) {
        const double r = eval_B(t) - s;
        if (std::abs(r) <= tol) return t;
        if (r > 0.0) hi = t; else lo = t;
        const double step = r * b(t);  // Newton: dt = -r / B'(t)
        double tn = t - step;
        if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
        t = tn;
    }
    return t;
}

double DampingCalculus::eval_B0() const {
    if (!b0_cache_) {
        throw std::domain_error(
            "eval_B0: assumption b0 < 1 fails for this family, B0 diverges");
    }
    return *b0_cache_;
}

double DampingCalculus::phi_integral(double t) const {
    if (spec_.family == DampingFamily::Constant) return 1.0 / spec_.c;
    // Phi(t) = int_0^inf exp(-int_t^{t+r} b) dr, truncated where the
    // inner integral reaches trunc_exponent_.
    double r_hi = 1.0;
    while (int_b_from(t, r_hi) < trunc_exponent_) {
        r_hi *= 2.0;
        if (r_hi > kOverflowGuard) {
            throw std::runtime_error(
                "eval_Phi: integrand has not decayed at the truncation guard");
        }
    }
    // Tighten the truncation point so the quadrature interval is not
    // dominated by the dead exponential tail.
    double r_lo = 0.5 * r_hi;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (r_lo + r_hi);
        if (int_b_from(t, mid) < trunc_exponent_) r_lo = mid; else r_hi = mid;
    }
    const double r_trunc = r_hi;
    return integrate_adaptive(
        [this, t](double r) { return std::exp(-int_b_from(t, r)); }, 0.0, r_trunc,
        quad_tol_);
}

DampingCalculus::PhiValue DampingCalculus::eval_Phi(double t) const {
    if (t < 0.0) throw std::domain_error("eval_Phi: t < 0");
    const double phi = phi_integral(t);
    return {phi, b(t) * phi - 1.0};
}

double DampingCalculus::analytic_b0() const {
    switch (spec_.family) {
        case DampingFamily::Constant:
            return 0.0;
        case DampingFamily::PowerLaw:
            if (spec_.beta < 1.0) return 0.0;
            if (spec_.beta == 1.0) return 1.0;
            return std::numeric_limits<double>::infinity();
        case DampingFamily::ScaleInvariant:
            return 1.0 / spec_.mu;
        case DampingFamily::LogTower:
            return 0.0;
    }
    throw std::logic_error("unreachable");
}

bool DampingCalculus::analytic_not_overdamping() const {
    switch (spec_.family) {
        case DampingFamily::Constant:
            return true;
        case DampingFamily::PowerLaw:
            return spec_.beta >= -1.0;
        case DampingFamily::ScaleInvariant:
            return true;
        case DampingFamily::LogTower:
            return true;  // B = l_{n+1} - 1 -> infinity
    }
    throw std::logic_error("unreachable");
}

AssumptionReport DampingCalculus::check_assumptions(double horizon) const {
    if (!(horizon > 0.0)) throw std::domain_error("check_assumptions: horizon <= 0");
    AssumptionReport rep;
    rep.b_positive = true;  // all built-in families, parameters validated

    auto ratio = [this](double t) {
        const auto c = eval_coefficient(t);
        return std::abs(c.b_prime) / (c.b * c.b);
    };

    // Sampled sup of |b'|/b^2 on [horizon/2, horizon], log-spaced.
    const int ns = 64;
    double sup = 0.0;
    for (int i = 0; i < ns; ++i) {
        const double t = 0.5 * horizon * std::pow(2.0, double(i) / (ns - 1));
        sup = std::max(sup, ratio(t));
    }
    rep.b0_estimate = sup;
    rep.b0_analytic = analytic_b0();
    rep.b0_ok = rep.b0_analytic < 1.0;
    rep.not_overdamping = analytic_not_overdamping();

    // Decay-rate fit of log(|b'|/b^2) against log(1+t) on [1, horizon].
    std::vector<double> xs, ys;
    bool all_tiny = true;
    for (int i = 0; i < ns; ++i) {
        const double t = std::pow(horizon, double(i) / (ns - 1));
        const double r = ratio(t);
        if (r > 1e-14) all_tiny = false;
        if (r > 0.0) {
            xs.push_back(std::log1p(t));
            ys.push_back(std::log(r));
        }
    }
    if (!all_tiny && xs.size() >= 2) {
        const double slope = linfit_slope(xs, ys);
        if (slope < -1e-6) rep.gamma_estimate = -slope;
    }

    // Cross-check the analytic verdict against the sampled evidence.
    if (std::isfinite(rep.b0_analytic)) {
        const double tol = 0.05 * (1.0 + rep.b0_analytic);
        if (rep.b0_estimate > rep.b0_analytic + tol) {
            throw std::logic_error(
                "check_assumptions: sampled |b'|/b^2 contradicts the analytic b0");
        }
    }

    if (rep.b0_ok) rep.B0 = eval_B0();
    const auto ch = eval_coefficient(horizon);
    const double ib = int_b(0.0, horizon);
    rep.limit_2_4 = (ib > kExpArgMax) ? 0.0 : std::exp(-ib) / ch.b;
    rep.limit_5_3 = 1.0 / (ch.b * ch.b * (eval_B(horizon) + 1.0));
    return rep;
}

LifespanPrediction DampingCalculus::predicted_lifespan(double p, int N,
                                                       double eps,
                                                       double C) const {
    if (!(p > 1.0)) throw std::invalid_argument("predicted_lifespan: p <= 1");
    if (!(C > 0.0) || !(eps > 0.0)) {
        throw std::invalid_argument("predicted_lifespan: eps, C must be positive");
    }
    const double fujita = 1.0 + 2.0 / N;
    const double inf = std::numeric_limits<double>::infinity();
    double B_target;
    if (std::abs(p - fujita) < 1e-12) {
        const double arg = C * std::pow(eps, -(p - 1.0));
        B_target = (arg > kExpArgMax) ? inf : std::exp(arg);
    } else if (p < fujita) {
        const double q = 1.0 / (p - 1.0) - 0.5 * N;
        B_target = C * std::pow(eps, -1.0 / q);
    } else {
        return {inf, false};
    }
    if (!std::isfinite(B_target)) return {inf, true};
    const auto t = try_invert_B(B_target);
    if (!t) return {inf, true};
    return {*t, false};
}

}  // namespace dwlab
