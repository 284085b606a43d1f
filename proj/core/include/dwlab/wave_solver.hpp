#pragma once

// Radially symmetric method-of-lines solver for
//   u_tt - Lap u + b(t) u_t = |u|^p
// with leapfrog time stepping, implicitly averaged damping, and
// threshold-based blowup detection.

#include <functional>
#include <string>
#include <vector>

#include "dwlab/damping.hpp"

namespace dwlab {

struct Snapshot {
    double t = 0.0;
    double h = 0.0;
    int N = 1;
    std::vector<double> u;  // u(r_i), r_i = i h
    std::vector<double> v;  // du/dt(r_i)
};

struct WaveState {
    std::vector<double> u;
    std::vector<double> u_prev;  // empty before the first step
    std::vector<double> v;
    double t = 0.0;
    double h = 0.0;
    double dt = 0.0;  // spacing used for the u_prev level
    int N = 1;
};

struct SolveConfig {
    DampingSpec damping;
    double p = 2.0;
    double eps = 1.0;
    int N = 1;
    double L = 40.0;
    double h = 0.05;
    double cfl = 0.45;
    double U_max = 1e6;
    double dt_min = 1e-12;
    double T_max = 200.0;
    double snapshot_cadence = 0.0;  // 0: initial + final only
    double data_width = 1.0;        // f = exp(-r^2/w^2), g = 0
};

enum class TerminationReason { Threshold, StepCollapse, Horizon };
std::string to_string(TerminationReason r);

struct LifespanRecord {
    std::string label;
    int N = 1;
    double p = 0.0;
    std::string params;
    double eps = 0.0;
    double T_num = 0.0;
    double B_of_T = 0.0;
    TerminationReason reason = TerminationReason::Horizon;
    double peak_norm = 0.0;
    long steps = 0;
};

struct SolveResult {
    LifespanRecord record;
    std::vector<Snapshot> snapshots;
};

// Lap u in radial symmetry; interior u_rr + (N-1)/r u_r, L'Hopital
// limit N u_rr at r = 0.  The Dirichlet end (last entry) stays 0.
std::vector<double> radial_laplacian(const std::vector<double>& f, int N,
                                     double h);

using Forcing = std::function<double(double r, double t)>;

// One leapfrog step; bootstraps with a Taylor start when u_prev is
// empty or the step size changed.
WaveState step(const WaveState& state, const DampingCalculus& calc, double p,
               double dt, const Forcing& forcing = nullptr);

// Sign hypothesis int f + B0 int g > 0 (radial integrals).
bool check_sign_condition(const std::vector<double>& f,
                          const std::vector<double>& g, int N, double h,
                          double B0);

SolveResult solve_until_blowup(const SolveConfig& config);

// Observed L2 order under h-halving against the manufactured solution
// u = exp(-t) exp(-r^2) of the correspondingly forced equation.
double convergence_order(const DampingSpec& damping, double p, int N,
                         double h0 = 0.1, int levels = 3, double T = 1.0);

}  // namespace dwlab
