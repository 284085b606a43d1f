#include "dwlab/cutoff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dwlab {

namespace profile {

// Quintic smoothstep on (1/2, 1): with tau = 2s - 1,
// eta = 1 - (10 tau^3 - 15 tau^4 + 6 tau^5).

double eta(double s) {
    if (s <= 0.5) return 1.0;
    if (s >= 1.0) return 0.0;
    const double tau = 2.0 * s - 1.0;
    return 1.0 - tau * tau * tau * (10.0 + tau * (-15.0 + 6.0 * tau));
}

double eta_prime(double s) {
    if (s <= 0.5 || s >= 1.0) return 0.0;
    const double tau = 2.0 * s - 1.0;
    const double omt = 1.0 - tau;
    return -60.0 * tau * tau * omt * omt;
}

double eta_second(double s) {
    if (s <= 0.5 || s >= 1.0) return 0.0;
    const double tau = 2.0 * s - 1.0;
    return -240.0 * tau * (1.0 - tau) * (1.0 - 2.0 * tau);
}

double eta_star(double s) { return s < 0.5 ? 0.0 : eta(s); }

}  // namespace profile

double unit_sphere_area(int N) {
    return 2.0 * std::pow(M_PI, 0.5 * N) / std::tgamma(0.5 * N);
}

namespace {

constexpr double kTimeGuard = 1e12;  // Phi-cache horizon cap

// Hermite cubic on [0, h] with endpoint values/derivatives.
double hermite(double f0, double d0, double f1, double d1, double h, double x) {
    const double u = x / h;
    const double u2 = u * u;
    const double u3 = u2 * u;
    return f0 * (2 * u3 - 3 * u2 + 1) + d0 * h * (u3 - 2 * u2 + u) +
           f1 * (-2 * u3 + 3 * u2) + d1 * h * (u3 - u2);
}

// Integral of the same cubic from 0 to x.
double hermite_integral(double f0, double d0, double f1, double d1, double h,
                        double x) {
    const double u = x / h;
    const double u2 = u * u;
    const double u3 = u2 * u;
    const double u4 = u2 * u2;
    return h * (f0 * (0.5 * u4 - u3 + u) + d0 * h * (0.25 * u4 - 2.0 / 3.0 * u3 + 0.5 * u2) +
                f1 * (-0.5 * u4 + u3) + d1 * h * (0.25 * u4 - u3 / 3.0));
}

}  // namespace

CutoffFamily::CutoffFamily(const DampingCalculus& calc, double R, double p,
                           int N)
    : calc_(&calc), R_(R), p_(p), p_conj_(p / (p - 1.0)), N_(N) {
    if (!(p > 1.0)) throw std::invalid_argument("CutoffFamily: p <= 1");
    if (!(R > 0.0)) throw std::invalid_argument("CutoffFamily: R <= 0");

    // Geometric node layout; Phi varies on a log-time scale.
    const double t_first = 1e-3;
    const double ratio = std::pow(10.0, 1.0 / 400.0);
    t_nodes_.push_back(0.0);
    double t = t_first;
    while (true) {
        t_nodes_.push_back(t);
        if (t > kTimeGuard) break;
        t *= ratio;
    }

    // Evaluate Phi node by node; a running trapezoid of int Phi decides
    // where the cache may stop.
    phi_nodes_.reserve(t_nodes_.size());
    double acc = 0.0;
    for (size_t i = 0; i < t_nodes_.size(); ++i) {
        phi_nodes_.push_back(calc.eval_Phi(t_nodes_[i]).phi);
        if (i > 0) {
            acc += 0.5 * (t_nodes_[i] - t_nodes_[i - 1]) *
                   (phi_nodes_[i] + phi_nodes_[i - 1]);
        }
        if (1.0 + acc >= R * 1.05) break;
    }
    t_nodes_.resize(phi_nodes_.size());

    // Node derivatives come from finite differences of the cached Phi
    // values, not from the identity b Phi - 1: at large t that identity
    // turns the relative quadrature noise of Phi into O(1) absolute
    // noise in the derivative, which the Hermite pieces then amplify
    // by h^2 (the cumulative integral turns garbage).
    const size_t n = t_nodes_.size();
    dphi_nodes_.resize(n);
    auto fd_slope = [&](size_t i, size_t j) {
        return (phi_nodes_[j] - phi_nodes_[i]) / (t_nodes_[j] - t_nodes_[i]);
    };
    dphi_nodes_[0] = calc.eval_Phi(0.0).phi_prime;
    for (size_t i = 1; i + 1 < n; ++i) {
        const double h1 = t_nodes_[i] - t_nodes_[i - 1];
        const double h2 = t_nodes_[i + 1] - t_nodes_[i];
        dphi_nodes_[i] =
            (h1 * fd_slope(i, i + 1) + h2 * fd_slope(i - 1, i)) / (h1 + h2);
    }
    if (n > 1) dphi_nodes_[n - 1] = fd_slope(n - 2, n - 1);

    iphi_nodes_.assign(n, 0.0);
    for (size_t i = 1; i < n; ++i) {
        const double h = t_nodes_[i] - t_nodes_[i - 1];
        iphi_nodes_[i] =
            iphi_nodes_[i - 1] +
            hermite_integral(phi_nodes_[i - 1], dphi_nodes_[i - 1],
                             phi_nodes_[i], dphi_nodes_[i], h, h);
    }
}

size_t CutoffFamily::segment_of(double t) const {
    if (t < 0.0) throw std::domain_error("CutoffFamily: t < 0");
    if (t > t_nodes_.back()) {
        throw std::domain_error("CutoffFamily: t beyond the Phi-cache horizon");
    }
    const auto it = std::upper_bound(t_nodes_.begin(), t_nodes_.end(), t);
    size_t i = static_cast<size_t>(it - t_nodes_.begin());
    if (i == 0) i = 1;
    if (i >= t_nodes_.size()) i = t_nodes_.size() - 1;
    return i - 1;
}

double CutoffFamily::phi(double t) const {
    const size_t i = segment_of(t);
    const double h = t_nodes_[i + 1] - t_nodes_[i];
    return hermite(phi_nodes_[i], dphi_nodes_[i], phi_nodes_[i + 1],
                   dphi_nodes_[i + 1], h, t - t_nodes_[i]);
}

double CutoffFamily::phi_prime(double t) const {
    return calc_->b(t) * phi(t) - 1.0;
}

double CutoffFamily::int_phi(double t) const {
    const size_t i = segment_of(t);
    const double h = t_nodes_[i + 1] - t_nodes_[i];
    return iphi_nodes_[i] + hermite_integral(phi_nodes_[i], dphi_nodes_[i],
                                             phi_nodes_[i + 1],
                                             dphi_nodes_[i + 1], h,
                                             t - t_nodes_[i]);
}

double CutoffFamily::s_R(double x_norm, double t) const {
    return (1.0 + x_norm * x_norm + int_phi(t)) / R_;
}

CutoffEval CutoffFamily::eval_cutoff(double x_norm, double t) const {
    const double s = s_R(x_norm, t);
    CutoffEval out{};
    const double e = profile::eta(s);
    const double es = profile::eta_star(s);
    const double q = 2.0 * p_conj_;
    out.psi = std::pow(e, q);
    out.psi_star = std::pow(es, q);
    if (e <= 0.0 || s <= 0.5) {
        // Flat regions: all derivatives vanish.
        out.dt_psi = out.lap_psi = out.dtt_psi = 0.0;
        return out;
    }
    const double ep = profile::eta_prime(s);
    const double epp = profile::eta_second(s);
    const double Phi = phi(t);
    const double dPhi = calc_->b(t) * Phi - 1.0;
    const double ds_dt = Phi / R_;
    const double ds_dtt = dPhi / R_;
    const double grad_sq = 4.0 * x_norm * x_norm / (R_ * R_);
    const double lap_s = 2.0 * N_ / R_;
    const double em2 = std::pow(e, q - 2.0);
    const double em1 = em2 * e;
    out.dt_psi = q * em1 * ep * ds_dt;
    out.lap_psi = q * ((q - 1.0) * em2 * ep * ep * grad_sq +
                       em1 * (epp * grad_sq + ep * lap_s));
    out.dtt_psi = q * ((q - 1.0) * em2 * ep * ep * ds_dt * ds_dt +
                       em1 * (epp * ds_dt * ds_dt + ep * ds_dtt));
    return out;
}

double CutoffFamily::eval_tR() const {
    if (!(R_ > 1.0)) throw std::domain_error("eval_tR: requires R > 1");
    const double target = R_ - 1.0;
    if (iphi_nodes_.back() < target) {
        throw std::runtime_error("eval_tR: Phi-cache horizon does not reach R");
    }
    return invert_int_phi(target);
}

double CutoffFamily::invert_int_phi(double target) const {
    double lo = 0.0, hi = t_nodes_.back();
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (int_phi(mid) < target) lo = mid; else hi = mid;
        if (hi - lo <= 1e-14 * (1.0 + hi)) break;
    }
    return 0.5 * (lo + hi);
}

CutoffConstants CutoffFamily::verify_cutoff_bounds(int grid_n,
                                                   int quasi_n) const {
    const double I_max = std::min(R_ - 1.0, iphi_nodes_.back());
    double C1 = 0.0, C2 = 0.0, C3 = 0.0;

    auto visit = [&](double I, double x_sq) {
        const double t = invert_int_phi(I);
        const double x = std::sqrt(x_sq);
        const auto ev = eval_cutoff(x, t);
        if (ev.psi_star <= 1e-250) return;  // 0/0 support exclusion
        const double denom = std::pow(ev.psi_star, 1.0 / p_) / R_;
        const double Phi = phi(t);
        C1 = std::max(C1, std::abs(ev.dt_psi) / (denom * Phi));
        C2 = std::max(C2, std::abs(ev.lap_psi) / denom);
        // The second time derivative is a sum of a (Phi/R)^2 piece and
        // a Phi'/R piece whose relative weight changes with R, so no
        // single mixed normalization is R-stable.  Measure the smallest
        // constant covering each piece against its own envelope; this
        // is the constant of the chain-rule display, while the bound
        // Phi^2/R <= max{B0^2, 2 sup|Phi'|} is checked separately by
        // max_phi_sq_over_R.
        // Recompute the two pieces from the chain rule rather than
        // subtracting one from ev.dtt_psi: at large t the Phi' piece
        // dominates and the subtraction residue, divided by the tiny
        // Phi^2 envelope, would swamp the measurement.
        const double s = s_R(x, t);
        const double q = 2.0 * p_conj_;
        const double e = profile::eta(s);
        if (e <= 0.0 || s <= 0.5) return;
        const double ep = profile::eta_prime(s);
        const double epp = profile::eta_second(s);
        const double em2 = std::pow(e, q - 2.0);
        const double em1 = em2 * e;
        const double dPhi = phi_prime(t);
        const double ds_dt = Phi / R_;
        const double term1 =
            q * ((q - 1.0) * em2 * ep * ep + em1 * epp) * ds_dt * ds_dt;
        const double term2 = q * em1 * ep * dPhi / R_;
        const double phi2R = Phi * Phi / R_;
        if (phi2R > 0.0) {
            C3 = std::max(C3, std::abs(term1) / (denom * phi2R));
        }
        if (std::abs(dPhi) > 1e-14) {
            C3 = std::max(C3, std::abs(term2) / (denom * std::abs(dPhi)));
        }
    };

    for (int i = 0; i < grid_n; ++i) {
        const double I = I_max * i / (grid_n - 1.0);
        const double x_sq_max = std::max(0.0, R_ - 1.0 - I);
        for (int j = 0; j < grid_n; ++j) {
            visit(I, x_sq_max * j / (grid_n - 1.0));
        }
    }
    // Quasi-random interior points (2-D Halton).
    auto halton = [](int idx, int base) {
        double f = 1.0, r = 0.0;
        while (idx > 0) {
            f /= base;
            r += f * (idx % base);
            idx /= base;
        }
        return r;
    };
    for (int i = 1; i <= quasi_n; ++i) {
        const double I = I_max * halton(i, 2);
        visit(I, std::max(0.0, R_ - 1.0 - I) * halton(i, 3));
    }

    if (C1 > 1e6 || C2 > 1e6 || C3 > 1e6) {
        throw std::runtime_error(
            "verify_cutoff_bounds: unbounded ratio, profile or formula bug");
    }
    return {C1, C2, C3};
}

double CutoffFamily::max_phi_sq_over_R(int grid_n) const {
    const double I_max = std::min(R_ - 1.0, iphi_nodes_.back());
    double m = 0.0;
    for (int i = 0; i < grid_n; ++i) {
        const double I = I_max * i / (grid_n - 1.0);
        const double ph = phi(invert_int_phi(I));
        m = std::max(m, ph * ph / R_);
    }
    return m;
}

FunctionalSides CutoffFamily::evaluate_blowup_functional(
    const std::vector<Snapshot>& series) const {
    if (series.empty()) throw std::invalid_argument("empty snapshot series");
    const double t_R = eval_tR();
    if (series.back().t < t_R) {
        throw std::runtime_error(
            "evaluate_blowup_functional: snapshot series ends before t_R");
    }

    const double area = unit_sphere_area(N_);

    // c0 * eps = (1/2) int (u(0) + B0 v(0)) dx
    const Snapshot& init = series.front();
    const double B0 = calc_->eval_B0();
    double c0_eps = 0.0;
    for (size_t i = 0; i < init.u.size(); ++i) {
        const double r = static_cast<double>(i) * init.h;
        const double w = (init.u[i] + B0 * init.v[i]) * std::pow(r, N_ - 1);
        c0_eps += (i == 0 || i + 1 == init.u.size()) ? 0.5 * w : w;
    }
    c0_eps *= 0.5 * init.h * area;

    // Space-time integrals of |u|^p Phi psi_R and |u|^p Phi psi_R*.
    std::vector<double> ts, as, bs;
    for (const auto& snap : series) {
        if (snap.t > t_R + 1e-12) break;
        const double Phi = phi(snap.t);
        double a = 0.0, b = 0.0;
        for (size_t i = 0; i < snap.u.size(); ++i) {
            const double r = static_cast<double>(i) * snap.h;
            if (s_R(r, snap.t) >= 1.0) continue;
            const auto ev = eval_cutoff(r, snap.t);
            const double w = std::pow(std::abs(snap.u[i]), p_) * Phi *
                             std::pow(r, N_ - 1);
            const double trap = (i == 0 || i + 1 == snap.u.size()) ? 0.5 : 1.0;
            a += trap * w * ev.psi;
            b += trap * w * ev.psi_star;
        }
        ts.push_back(snap.t);
        as.push_back(a * snap.h * area);
        bs.push_back(b * snap.h * area);
    }
    if (ts.size() < 2) {
        throw std::runtime_error("evaluate_blowup_functional: too few snapshots");
    }
    double lhs_int = 0.0, star_int = 0.0;
    for (size_t i = 1; i < ts.size(); ++i) {
        const double dt = ts[i] - ts[i - 1];
        lhs_int += 0.5 * dt * (as[i] + as[i - 1]);
        star_int += 0.5 * dt * (bs[i] + bs[i - 1]);
    }

    // C5 from the measured constants; Phi' and b*Phi sampled on [0, t_R].
    const auto cc = verify_cutoff_bounds(200, 2000);
    double sup_dphi = 0.0, B2 = 0.0;
    for (int i = 0; i <= 256; ++i) {
        const double t = t_R * i / 256.0;
        sup_dphi = std::max(sup_dphi, std::abs(phi_prime(t)));
        B2 = std::max(B2, calc_->b(t) * phi(t));
    }
    const double C4 = 2.0 * cc.C1 * sup_dphi + cc.C3 + cc.C2 + B2 * cc.C1;
    const double exponent = (1.0 + 0.5 * N_) / p_conj_ - 1.0;
    const double rhs = C4 * std::pow(area, 1.0 / p_conj_) *
                       std::pow(R_, exponent) * std::pow(star_int, 1.0 / p_);

    return {c0_eps + lhs_int, rhs, c0_eps, t_R};
}

double key_upper_bound(double delta, double C0, double R1, double theta,
                       double p) {
    if (!(p > 1.0) || !(delta > 0.0) || !(C0 > 0.0) || !(R1 > 0.0) ||
        theta < 0.0) {
        throw std::invalid_argument("key_upper_bound: invalid parameters");
    }
    const double log2 = std::log(2.0);
    const double dpow = std::pow(delta, -(p - 1.0));
    if (theta > 0.0) {
        const double e = (p - 1.0) * theta;
        return std::pow(std::pow(R1, e) + log2 * std::pow(C0, p) * theta * dpow,
                        1.0 / e);
    }
    const double arg = std::log(R1) + log2 / (p - 1.0) * std::pow(C0, p) * dpow;
    return arg > 709.0 ? std::numeric_limits<double>::infinity() : std::exp(arg);
}

KeyLemmaCheck check_key_lemma_ode(double delta, double C0, double R1,
                                  double theta, double p) {
    const double bound = key_upper_bound(delta, C0, R1, theta, p);
    // Extremal ODE consistent with the closed-form bound:
    //   Y' = C0^{-p} R^{theta(p-1)-1} (delta + Y/log 2)^p,  Y(R1) = 0.
    const double a = 1.0 / std::log(2.0);
    const double Kp = std::pow(C0, -p);
    auto rhs = [&](double R, double Y) {
        return Kp * std::pow(R, theta * (p - 1.0) - 1.0) *
               std::pow(delta + a * Y, p);
    };
    double R = R1, Y = 0.0;
    for (long it = 0; it < 2000000; ++it) {
        const double f = rhs(R, Y);
        // limit the per-step growth of (delta + aY) to ~1%
        double dR = 0.01 * (delta + a * Y) / (a * f);
        dR = std::min(dR, 0.05 * R);
        if (dR < 1e-10 * R || a * Y > 1e9 * delta) break;
        const double k1 = rhs(R, Y);
        const double k2 = rhs(R + 0.5 * dR, Y + 0.5 * dR * k1);
        const double k3 = rhs(R + 0.5 * dR, Y + 0.5 * dR * k2);
        const double k4 = rhs(R + dR, Y + dR * k3);
        const double dY = dR / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        if (!std::isfinite(dY) || !std::isfinite(Y + dY)) break;
        Y += dY;
        R += dR;
        if (R > 1e12 * bound) {
            throw std::runtime_error("check_key_lemma_ode: no blowup detected");
        }
    }
    return {R, bound, R <= 1.01 * bound};
}

}  // namespace dwlab
