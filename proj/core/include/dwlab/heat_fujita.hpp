#pragma once

// Fujita heat problem u_t - Lap u = |u|^p: semigroup quadrature, the
// explicit super-solution with h(t), the lifespan lower bound t_eps,
// and an RK4 heat solver for empirical comparison.

#include <vector>

#include "dwlab/wave_solver.hpp"

namespace dwlab {

// e^{t Lap} applied to the radial field eps*f via Gaussian-kernel
// quadrature; f sampled at r_i = i h on [0, L].
std::vector<double> heat_semigroup_field(const std::vector<double>& f,
                                         double eps, double t, int N,
                                         double h);
double heat_semigroup_sup(const std::vector<double>& f, double eps, double t,
                          int N, double h);

class HeatLowerBound {
  public:
    // h(t) = 1 - (p-1) int_0^t sup^{p-1}; direct kernel quadrature up
    // to a domain-limited switch time, exact t^{-N/2} tail beyond it.
    HeatLowerBound(const std::vector<double>& f, double eps, double p, int N,
                   double grid_h);

    double h_of(double t) const;
    double t_eps() const { return t_eps_; }      // +inf when global
    double log_t_eps() const { return log_t_eps_; }

  private:
    double p_;
    int N_;
    double q_;         // N (p-1) / 2, the tail decay exponent
    double t_switch_;
    double tail_amp_;  // sup(t) ~ tail_amp * t^{-N/2} past t_switch
    std::vector<double> t_nodes_;
    std::vector<double> cum_;  // cumulative int of sup^{p-1}
    double t_eps_;
    double log_t_eps_;

    double integral_to(double t) const;
    double t_for_cum(double target) const;
};

struct HeatConfig {
    double p = 2.0;
    double eps = 1.0;
    int N = 1;
    double L = 40.0;
    double h = 0.05;
    double U_max = 1e6;
    double T_max = 200.0;
    double data_width = 1.0;
};

LifespanRecord heat_solve_until_blowup(const HeatConfig& config);

// min over random (x,t) samples of (dt - Lap)U - U^p for the
// super-solution U = h^{-1/(p-1)} e^{t Lap} f_eps; must be >= -tol.
double supersolution_residual(const std::vector<double>& f, double eps,
                              double p, int N, double grid_h, int n_samples,
                              unsigned seed = 12345);

}  // namespace dwlab
