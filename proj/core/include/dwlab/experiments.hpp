#pragma once

// Sweep orchestration over epsilon, scaling-law regression against the
// closed-form lifespan exponents, B-time universality, and CSV I/O.

#include <iosfwd>
#include <string>
#include <vector>

#include "dwlab/damping.hpp"
#include "dwlab/wave_solver.hpp"

namespace dwlab {

struct SweepPlan {
    DampingSpec damping;
    int N = 1;
    double p = 2.0;
    std::vector<double> eps_list;  // strictly decreasing
    double tmax = 200.0;
    double umax = 1e6;
    double cfl = 0.45;
    double h_max = 0.05;
    int grid_divisor = 4000;
    double data_width = 1.0;
    int parallelism = 1;
    std::string out;
};

struct FitResult {
    enum class Model { Power, Critical };
    Model model = Model::Power;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double predicted_slope = 0.0;
    double relative_error = 0.0;
};

struct UniversalityEntry {
    std::string label;
    double slope = 0.0;
    double r_squared = 0.0;
    bool excluded = false;  // no sharp lower bound (scale-invariant)
};

struct UniversalityReport {
    std::vector<UniversalityEntry> entries;
    double predicted_slope = 0.0;
    double max_rel_dev = 0.0;       // vs predicted, over included entries
    double max_pairwise_dev = 0.0;  // relative, over included pairs
    bool ok = false;                // both within 15%
};

std::vector<LifespanRecord> run_sweep(const SweepPlan& plan);

// log T (or log B(T)) against log eps; threshold records only.
FitResult fit_subcritical(const std::vector<LifespanRecord>& records,
                          const SweepPlan& plan, bool use_B_time);

// log(B(T)+1) against eps^{-(p-1)} at the Fujita exponent.
FitResult fit_critical(const std::vector<LifespanRecord>& records,
                       const SweepPlan& plan);

// Quadratic coefficient of log B(T) vs log eps; positive curvature
// means B(T) outgrows every fixed power of 1/eps on the window.
double critical_curvature(const std::vector<LifespanRecord>& records);

UniversalityReport universality_check(
    const std::vector<std::vector<LifespanRecord>>& record_sets,
    const SweepPlan& plan);

void write_records_csv(std::ostream& os,
                       const std::vector<LifespanRecord>& records);
std::vector<LifespanRecord> read_records_csv(std::istream& is);
void write_fit_csv(std::ostream& os, const FitResult& fit);

// Line-oriented key=value plan file (family, params, N, p, eps_list,
// tmax, out; optional umax, cfl, width).
SweepPlan parse_plan_file(const std::string& path);
DampingSpec parse_damping(const std::string& family, const std::string& params);

}  // namespace dwlab
