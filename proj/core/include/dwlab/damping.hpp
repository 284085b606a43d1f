#pragma once

// Damping-coefficient calculus for the families
//   Constant(c):        b(t) = c
//   PowerLaw(beta):     b(t) = (1+t)^{-beta}
//   ScaleInvariant(mu): b(t) = mu/(1+t)
//   LogTower(n):        b(t) = prod_{k=1}^n l_k(t),
//                       l_1 = 1+t, l_{k+1} = 1 + log(l_k)
// with the derived quantities B, B^{-1}, B0, Phi and analytic
// assumption checking.

#include <optional>
#include <stdexcept>
#include <string>

namespace dwlab {

enum class DampingFamily { Constant, PowerLaw, ScaleInvariant, LogTower };

struct DampingSpec {
    DampingFamily family = DampingFamily::Constant;
    double beta = 0.0;  // PowerLaw
    double mu = 2.0;    // ScaleInvariant, mu > 0
    int tower_n = 1;    // LogTower, n >= 1
    double c = 1.0;     // Constant, c > 0
    std::string label;

    static DampingSpec constant(double c);
    static DampingSpec power_law(double beta);
    static DampingSpec scale_invariant(double mu);
    static DampingSpec log_tower(int n);
};

struct AssumptionReport {
    bool b_positive = false;
    double b0_estimate = 0.0;   // sampled sup of |b'|/b^2 near the horizon
    double b0_analytic = 0.0;   // per-family limsup value
    bool b0_ok = false;         // b0 < 1
    bool not_overdamping = false;  // 1/b not integrable
    std::optional<double> gamma_estimate;  // decay rate of |b'|/b^2
    double B0 = 0.0;
    double limit_2_4 = 0.0;  // (1/b) exp(-int_0^t b) at the horizon
    double limit_5_3 = 0.0;  // 1/(b^2 (B+1)) at the horizon
};

struct LifespanPrediction {
    double t = 0.0;  // +inf for the supercritical case
    bool overflow = false;
};

class BInversionError : public std::runtime_error {
  public:
    BInversionError(const std::string& msg, double guard)
        : std::runtime_error(msg), guard_value(guard) {}
    double guard_value;
};

class DampingCalculus {
  public:
    explicit DampingCalculus(DampingSpec spec, double quad_tol = 1e-10,
                             double trunc_exponent = 40.0);

    const DampingSpec& spec() const { return spec_; }
    double quad_tol() const { return quad_tol_; }

    // b(t) and b'(t), closed form per family.
    struct Coefficient {
        double b;
        double b_prime;
    };
    Coefficient eval_coefficient(double t) const;
    double b(double t) const { return eval_coefficient(t).b; }

    // B(t) = int_0^t 1/b, closed form per family.
    double eval_B(double t) const;

    // int_{t1}^{t2} b, closed form where available, else quadrature.
    double int_b(double t1, double t2) const;

    // int_{t1}^{t1+dr} b with dr passed directly: forming t1 + dr first
    // quantizes dr to the ulp of t1, which wrecks the Phi integrand
    // whose decay scale 1/b can sit far below that.
    double int_b_from(double t1, double dr) const;

    // B^{-1}(s): bracketing + bisection/Newton hybrid; iterated
    // exponentials for LogTower.  Throws BInversionError past the
    // overflow guard (t <= 1e300).
    double invert_B(double s) const;
    std::optional<double> try_invert_B(double s) const;

    // B0 = int_0^inf exp(-int_0^s b) ds, cached at construction when
    // the analytic b0 admits it.
    double eval_B0() const;

    // Phi(t) = int_t^inf exp(-int_t^s b) ds and Phi'(t) = b Phi - 1.
    struct PhiValue {
        double phi;
        double phi_prime;
    };
    PhiValue eval_Phi(double t) const;

    AssumptionReport check_assumptions(double horizon = 1e4) const;

    // Closed-form lifespan bound: B^{-1} of the B(T) upper bound.
    LifespanPrediction predicted_lifespan(double p, int N, double eps,
                                          double C) const;

    double analytic_b0() const;
    bool analytic_not_overdamping() const;

  private:
    DampingSpec spec_;
    double quad_tol_;
    double trunc_exponent_;
    std::optional<double> b0_cache_;

    double phi_integral(double t) const;
};

}  // namespace dwlab
