#pragma once

// Rescaled test-function family psi_R built from a C^2 quintic
// smoothstep profile, the numeric verification of its derivative
// bounds, the implicit key upper bound, and the blowup functional
// evaluated on solver snapshots.

#include <cmath>
#include <vector>

#include "dwlab/damping.hpp"
#include "dwlab/wave_solver.hpp"

namespace dwlab {

// Profile eta: 1 on [0,1/2], quintic smoothstep down to 0 at 1.
namespace profile {
double eta(double s);
double eta_prime(double s);
double eta_second(double s);
double eta_star(double s);
}  // namespace profile

double unit_sphere_area(int N);

struct CutoffEval {
    double psi;
    double psi_star;
    double dt_psi;
    double lap_psi;
    double dtt_psi;
};

struct CutoffConstants {
    double C1;  // |dt psi|   <= C1 R^{-1} Phi(t) [psi*]^{1/p}
    double C2;  // |lap psi|  <= C2 R^{-1} [psi*]^{1/p}
    double C3;  // |dtt psi|  <= C3 R^{-1} (Phi^2/R + |Phi'|) [psi*]^{1/p},
                // term-wise (each chain-rule piece against its envelope)
};

struct FunctionalSides {
    double lhs;
    double rhs;
    double c0_eps;  // (1/2) int (u(0) + B0 v(0)) dx
    double t_R;
};

class CutoffFamily {
  public:
    // Caches Phi and its antiderivative on [0, t_horizon] where the
    // horizon covers 1 + int Phi = R or hits an internal time guard.
    CutoffFamily(const DampingCalculus& calc, double R, double p, int N);

    double R() const { return R_; }
    double p() const { return p_; }
    int N() const { return N_; }
    const DampingCalculus& calc() const { return *calc_; }

    double phi(double t) const;
    double phi_prime(double t) const;
    double int_phi(double t) const;  // int_0^t Phi
    double cache_horizon() const { return t_nodes_.back(); }

    double s_R(double x_norm, double t) const;
    CutoffEval eval_cutoff(double x_norm, double t) const;

    // Root of 1 + int_0^t Phi = R; requires R > 1.
    double eval_tR() const;

    // Smallest constants over a dense sample of P(R).
    CutoffConstants verify_cutoff_bounds(int grid_n = 400,
                                         int quasi_n = 10000) const;

    // Max over the sampled P(R) of Phi(t)^2 / R (support bound for the key estimate).
    double max_phi_sq_over_R(int grid_n = 400) const;

    // Both sides of the test-function inequality on a snapshot series
    // covering [0, t_R].
    FunctionalSides evaluate_blowup_functional(
        const std::vector<Snapshot>& series) const;

  private:
    const DampingCalculus* calc_;
    double R_;
    double p_;
    double p_conj_;  // p' = p/(p-1)
    int N_;

    // Geometric Phi cache with exact derivatives (Phi' = b Phi - 1).
    std::vector<double> t_nodes_;
    std::vector<double> phi_nodes_;
    std::vector<double> dphi_nodes_;
    std::vector<double> iphi_nodes_;  // cumulative int Phi at nodes

    size_t segment_of(double t) const;
    double invert_int_phi(double target) const;
};

// Key comparison bound for the terminal scale.
double key_upper_bound(double delta, double C0, double R1, double theta,
                       double p);

struct KeyLemmaCheck {
    double blowup_radius;
    double bound;
    bool ok;  // blowup_radius <= 1.01 * bound
};

// Integrates the extremal comparison ODE and checks it against
// key_upper_bound.
KeyLemmaCheck check_key_lemma_ode(double delta, double C0, double R1,
                                  double theta, double p);

}  // namespace dwlab
