#pragma once

#include "isac/errors.hpp"
#include "isac/fisher.hpp"

#include <optional>

namespace isac {

/// Dual variables of the upper-bound problem (P4): beta prices the rate
/// constraint, mu the power constraint. Boundedness requires mu above the
/// largest eigenvalue of A1.
struct DualPoint {
    double beta = 1.0;
    double mu = 0.0;
};

/// Rank-one maximizer of tr(A1 W) under the power budget alone:
/// P s1 s1^H with s1 the top eigenvector of A1.
Eigen::MatrixXcd sensing_only_upper(const SensingMatrices& m, double power);

/// Q = (mu/beta) I - (1/beta) A1, positive definite for mu > lambda_1(A1).
Eigen::MatrixXcd build_q(const DualPoint& dual, const SensingMatrices& m);

/// Lagrangian maximizer for fixed duals: W = Q^{-1/2} V~ L~ V~^H Q^{-1/2},
/// where H Q^{-1/2} = U~ G~^{1/2} V~^H and L~ has entries (1/ln2 - noise/g_i)^+.
Eigen::MatrixXcd inner_solution(const DualPoint& dual, const SensingMatrices& m,
                                const Eigen::MatrixXcd& h, double noise);

struct SuboptimalSolveResult {
    Eigen::MatrixXcd w;
    double pcrb_value = 0.0;
    double pcrb_upper_value = 0.0;
    double rate_value = 0.0;
    DualPoint dual;
    double duality_gap = 0.0;  // dual objective minus primal tr(A1 W), >= 0
    bool sensing_only = false; // rate constraint inactive branch
    int rank_w = 0;
    int iterations = 0;        // ellipsoid + polish steps
};

struct EllipsoidOptions {
    double radius_tol = 1e-7;   // relative ellipsoid radius stopping threshold
    double slack_tol = 1e-5;    // complementary-slackness stopping threshold
    int max_iterations = 5000;
    std::optional<DualPoint> warm_start;  // try a Newton polish here first
};

/// Semi-closed-form minimizer of the PCRB upper bound under rate and power
/// constraints: sensing-only branch when feasible, otherwise an ellipsoid
/// search over (beta, mu) with subgradient (rate(W) - rbar, P - tr(W)),
/// followed by a dual Newton polish.
SuboptimalSolveResult solve_p4(const SensingMatrices& m, const Eigen::MatrixXcd& h,
                               const TargetEnvironment& env, const SystemConfig& cfg,
                               double rbar, const EllipsoidOptions& opts = {});

/// Nu = 1 special case: rank-one solution P s~ s~^H with s~ the top
/// eigenvector of A1 + eta* h h^H, eta* from bisection on the rate equality.
/// h_t is the length-Nt user channel vector (H = h_t^H).
Eigen::MatrixXcd solve_p4_miso(const SensingMatrices& m, const Eigen::VectorXcd& h_t,
                               const SystemConfig& cfg, double rbar);

}  // namespace isac
