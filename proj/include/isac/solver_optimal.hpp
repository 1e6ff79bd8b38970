#pragma once

#include "isac/errors.hpp"
#include "isac/fisher.hpp"

#include <utility>

namespace isac {

struct CapacityResult {
    double r_max = 0.0;
    Eigen::MatrixXcd w_c;  // communication-optimal covariance (eigenmode water-filling)
};

/// MIMO channel capacity under the sum power budget, via reduced SVD of H and
/// water-filling over the squared singular values.
CapacityResult capacity_waterfilling(const Eigen::MatrixXcd& h, double power, double noise);

/// Rate target is attainable iff it does not exceed the channel capacity.
bool check_feasibility(double rbar, double r_max);

struct BarrierOptions {
    double tau0 = 1.0;           // initial path parameter
    double tau_growth = 5.0;     // geometric schedule (barrier weight shrinks x0.2)
    double gap_rel = 1e-8;       // stop when constraints/tau <= gap_rel*|t| + gap_abs
    double gap_abs = 1e-10;
    double newton_tol = 1e-15;   // squared Newton decrement threshold
    int max_newton = 120;        // per centering step
    int max_outer = 64;
};

struct OptimalSolveResult {
    Eigen::MatrixXcd w;
    double t_star = 0.0;       // auxiliary objective of (P3)
    double pcrb_value = 0.0;
    double pcrb_upper_value = 0.0;
    double rate_value = 0.0;
    double mu_p = 0.0;         // power multiplier
    double mu_r = 0.0;         // rate multiplier
    cxd z2{0.0, 0.0};          // off-diagonal of the 2x2 LMI multiplier [1, z2; z2*, |z2|^2]
    double kkt_residual = 0.0; // scaled stationarity/complementarity residual
    int rank_w = 0;
    int iterations = 0;        // total Newton steps
};

/// Optimal covariance from the convex reformulation: maximize t subject to the
/// 2x2 Schur LMI, rate(W) >= rbar, tr(W) <= P, W PSD, solved by a primal
/// log-barrier path-following method over (t, W).
OptimalSolveResult solve_p3(const SensingMatrices& m, const Eigen::MatrixXcd& h,
                            const TargetEnvironment& env, const SystemConfig& cfg, double rbar,
                            const BarrierOptions& opts = {});

/// (rank above tol * max eigenvalue, eigenvalues descending)
std::pair<int, Eigen::VectorXd> rank_diagnostics(const Eigen::MatrixXcd& w, double tol = 1e-6);

}  // namespace isac
