#pragma once

#include "isac/fisher.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace isac {

/// Columns i.i.d. zero-mean circular complex Gaussian with covariance W.
Eigen::MatrixXcd gen_signals(const Eigen::MatrixXcd& w, int symbols, std::mt19937_64& rng);

struct EchoObservation {
    Eigen::MatrixXcd y;  // Nr x L received echoes
    Eigen::MatrixXcd x;  // Nt x L transmitted block
    double theta_truth = 0.0;
    cxd alpha_truth{0.0, 0.0};
};

/// Y = alpha b(theta) a(theta)^H X + N, noise entries CN(0, sigma_s^2).
EchoObservation gen_echo(const Eigen::MatrixXcd& x, double theta, const TargetEnvironment& env,
                         const SystemConfig& cfg, std::mt19937_64& rng);

/// Closed-form likelihood maximizer over the reflection coefficient for a
/// fixed angle: tr(X^H a b^H Y) / (||b||^2 a^H X X^H a).
cxd profile_alpha(const Eigen::MatrixXcd& y, const Eigen::MatrixXcd& x, double theta,
                  const SystemConfig& cfg);

struct GridSpec {
    int points = 2048;          // uniform grid over [-pi/2, pi/2)
    double refine_tol = 1e-5;   // golden-section bracket width, radians
};

/// argmax over theta of the alpha-profiled log-likelihood plus the log prior,
/// grid search then golden-section refinement. Ties break to the smaller angle.
double map_estimate(const EchoObservation& obs, const GaussianMixture& prior,
                    const SystemConfig& cfg, const GridSpec& grid = {});

/// As map_estimate without the prior term.
double mle_estimate(const EchoObservation& obs, const SystemConfig& cfg,
                    const GridSpec& grid = {});

enum class Estimator { map, mle };

struct TrialBatch {
    int trials = 0;
    std::uint64_t seed = 0;
    double mse = 0.0;
    std::vector<double> estimates;
    std::vector<double> truths;
};

/// Per trial: draw theta from the prior, generate a signal block from the
/// design covariance, synthesize the echo, estimate, and accumulate squared
/// error. Each trial owns a random stream split from the batch seed, so the
/// result does not depend on how trials are scheduled.
TrialBatch monte_carlo_mse(const Eigen::MatrixXcd& design, Estimator estimator,
                           const TargetEnvironment& env, const GaussianMixture& prior,
                           const SystemConfig& cfg, int trials, std::uint64_t seed,
                           const GridSpec& grid = {});

}  // namespace isac
