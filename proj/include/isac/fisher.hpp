#pragma once

#include "isac/model.hpp"
#include "isac/numerics.hpp"

namespace isac {

/// Prior-averaged observation kernels and the prior Fisher scalar.
///   a1 = int ||db(theta)||^2 a a^H p dtheta
///   a2 = Nr int da da^H p dtheta
///   a3 = Nr int da a^H p dtheta
///   a4 = Nr int a a^H p dtheta
///   fp11 = sum_k p_k / sigma_k^2 - rho
struct SensingMatrices {
    Eigen::MatrixXcd a1, a2, a3, a4;
    double rho = 0.0;
    double fp11 = 0.0;
};

SensingMatrices compute_sensing_matrices(const GaussianMixture& prior, const SystemConfig& cfg,
                                         const QuadratureSpec& quad = {});

/// Validates Hermitian-ness, PSD-ness (to slack) and the trace budget of a
/// transmit covariance candidate. Throws std::invalid_argument on violation.
void validate_covariance(const Eigen::MatrixXcd& w, double power_budget,
                         double slack = 1e-8);

/// Exact posterior bound 1 / (fp11 + 2 snr (tr((A1+A2)W) - |tr(A3 W)|^2 / tr(A4 W))).
/// W = 0 returns the prior-only limit 1/fp11; that limit with fp11 = 0 throws.
double pcrb(const Eigen::MatrixXcd& w, const SensingMatrices& m, const TargetEnvironment& env);

/// Same bound computed directly from the three trace values.
double pcrb_from_traces(double tr_a12w, cxd tr_a3w, double tr_a4w, double fp11,
                        double snr_factor);

/// Tractable upper bound 1 / (fp11 + 2 snr tr(A1 W)).
double pcrb_upper(const Eigen::MatrixXcd& w, const SensingMatrices& m,
                  const TargetEnvironment& env);

/// Deterministic-parameter bound for a given angle realization.
double crb_point(double theta, const Eigen::MatrixXcd& w, const TargetEnvironment& env,
                 const SystemConfig& cfg);

/// Expectation of crb_point over the prior.
double crb_expected(const Eigen::MatrixXcd& w, const GaussianMixture& prior,
                    const TargetEnvironment& env, const SystemConfig& cfg,
                    const QuadratureSpec& quad = {});

/// log2 det(I + H W H^H / noise), bits/s/Hz.
double rate(const Eigen::MatrixXcd& w, const Eigen::MatrixXcd& h, double noise);

/// Radiated power a(theta)^H W a(theta) over a grid of angles.
Eigen::VectorXd beampattern(const Eigen::MatrixXcd& w, const Eigen::VectorXd& theta_grid,
                            const SystemConfig& cfg);

}  // namespace isac
