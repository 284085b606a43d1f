#pragma once

// Scaling-variables frame: y = (B(t)+1)^{-1/2} x, s = log(B(t)+1),
// the first-order (v,w) system, the alpha-decomposition against the
// Gaussian, and the N=1 energy functionals with the monitor M(s).

#include <vector>

#include "dwlab/damping.hpp"
#include "dwlab/wave_solver.hpp"

namespace dwlab {

struct ScaledState {
    int N = 1;          // N = 1: grid on [-Y, Y]; N >= 2: radial [0, Y]
    double Y = 0.0;
    double k = 0.0;     // grid spacing
    double s = 0.0;
    std::vector<double> v;
    std::vector<double> w;

    double y_at(size_t i) const {
        return N == 1 ? -Y + static_cast<double>(i) * k
                      : static_cast<double>(i) * k;
    }
    size_t size() const { return v.size(); }
};

struct AlphaDecomposition {
    double alpha = 0.0;
    double dalpha_ds = 0.0;
    std::vector<double> f;  // v - alpha phi0
    std::vector<double> g;  // w - dalpha phi0 - alpha psi0
    double mean_f = 0.0;
    double mean_g = 0.0;
};

struct EnergyReport {
    double s = 0.0;
    double E0 = 0, E1 = 0, E2 = 0, E3 = 0, E4 = 0, E5 = 0;
    double alpha = 0.0;
    double dalpha_ds = 0.0;
    double M = 0.0;  // running sup of the weighted first-order norms
    double mean_f = 0.0;
    double mean_g = 0.0;
    double identity_residual = 0.0;  // logged, not asserted
    double nonlin_int = 0.0;         // int |v|^p dy
    double norm_bracket = 0.0;       // ||f||_{H^{1,1}}^2 + mu ||g||^2 + ...
};

double gaussian_phi0(double y, int N);  // (4 pi)^{-N/2} exp(-|y|^2/4)
double gaussian_psi0(double y, int N);  // Lap phi0

ScaledState to_scaled(const Snapshot& state, const DampingCalculus& calc,
                      double Y, double k);
Snapshot from_scaled(const ScaledState& scaled, const DampingCalculus& calc,
                     double h, double L);

// One step of the (v,w) system; the "+w" relaxation term is implicit.
ScaledState step_scaled(const ScaledState& scaled, const DampingCalculus& calc,
                        double p, double ds);

AlphaDecomposition decompose_alpha(const ScaledState& scaled);

std::vector<EnergyReport> compute_energies_1d(
    const std::vector<ScaledState>& series, const DampingCalculus& calc,
    double p);

// Discrete residual of the alpha ODE, normalized by its largest term.
std::vector<double> check_alpha_ode(const std::vector<EnergyReport>& series,
                                    const DampingCalculus& calc, double p,
                                    int N);

}  // namespace dwlab
