#pragma once

#include "isac/solver_suboptimal.hpp"

#include <random>

namespace isac {

/// Genie-aided baseline: transmit design for a known (exact or perturbed)
/// target angle.
struct BenchmarkSpec {
    enum class Mode { exact, inexact };
    Mode mode = Mode::exact;
    double theta_known = 0.0;
    double perturb_variance = 0.0;  // sigma_e^2, zero in exact mode

    void validate() const;
};

/// Point evaluations replacing the prior-averaged kernels: A1 = ||db||^2 aa^H,
/// A2 = Nr da da^H, A3 = Nr da a^H, A4 = Nr aa^H, no prior term (fp11 = 0).
SensingMatrices point_mass_matrices(double theta, const SystemConfig& cfg);

/// Minimizes the point CRB at the known (or perturbed) angle under the same
/// rate/power constraints, reusing the upper-bound solver with point-mass A1.
Eigen::MatrixXcd solve_known_angle(const BenchmarkSpec& spec, const Eigen::MatrixXcd& h,
                                   const SystemConfig& cfg, const TargetEnvironment& env,
                                   double rbar, std::mt19937_64& rng);

/// Long-term MSE lower bound of a genie-aided scheme: crb_point at the true
/// angle, averaged over the true prior by quadrature, with the design at each
/// node computed from the scheme's (exact or perturbed) angle knowledge.
/// Inexact mode averages `draws` perturbed designs per node.
double benchmark_expected_crb(const BenchmarkSpec& spec, const Eigen::MatrixXcd& h,
                              const SystemConfig& cfg, const TargetEnvironment& env,
                              const GaussianMixture& prior, double rbar,
                              const QuadratureSpec& quad, int draws, std::uint64_t seed);

}  // namespace isac
