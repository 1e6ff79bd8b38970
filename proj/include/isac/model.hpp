#pragma once

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <vector>

namespace isac {

using cxd = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kAngleLo = -kPi / 2.0;
inline constexpr double kAngleHi = kPi / 2.0;

/// Array geometry and power budget. Angles are radians, powers linear watts;
/// dB conversion happens only at the config boundary (cli module).
struct SystemConfig {
    int n_tx = 1;       // transmit antennas Nt
    int n_rx = 1;       // co-located receive antennas Nr
    int n_user = 1;     // user antennas Nu
    int symbols = 1;    // sensing symbol count L
    double power_w = 1.0;
    double noise_comm_w = 1.0;   // sigma_c^2
    double noise_sense_w = 1.0;  // sigma_s^2
    double spacing_over_lambda = 0.5;
    double bs_height_m = 0.0;
    double target_range_m = 1.0;

    // cos(phi) = sqrt(r^2 - hB^2) / r for the common target elevation angle
    double cos_phi() const;
    void validate() const;
};

struct GmComponent {
    double weight = 1.0;
    double mean = 0.0;       // radians, in [-pi/2, pi/2)
    double variance = 1.0;
};

/// Gaussian-mixture prior on the target azimuth angle. Weights must sum to
/// one; out-of-tolerance weights are rejected rather than renormalized.
struct GaussianMixture {
    std::vector<GmComponent> components;
    void validate() const;
};

double gm_log_pdf(double theta, const GaussianMixture& prior);
double gm_pdf(double theta, const GaussianMixture& prior);

/// Draws an angle from the prior, rejection-resampling outside [-pi/2, pi/2).
double gm_sample(const GaussianMixture& prior, std::mt19937_64& rng);

/// Overall round-trip reflection coefficient alpha = beta0/r^2 * psi and the
/// derived receive-SNR dial |alpha|^2 L / sigma_s^2.
struct TargetEnvironment {
    cxd alpha{1.0, 0.0};
    double snr_factor = 1.0;  // |alpha|^2 * L / sigma_s^2
};

/// Builds the environment from the normalized receive SNR
/// P |alpha|^2 L / sigma_s^2 given as a linear ratio. Phase is a convention.
TargetEnvironment make_environment(const SystemConfig& cfg, double snr_linear,
                                   double alpha_phase = 0.0);

Eigen::VectorXcd steering_tx(double theta, const SystemConfig& cfg);
Eigen::VectorXcd steering_rx(double theta, const SystemConfig& cfg);
Eigen::VectorXcd steering_tx_deriv(double theta, const SystemConfig& cfg);
Eigen::VectorXcd steering_rx_deriv(double theta, const SystemConfig& cfg);

/// Generic ULA response: entry n (1-based) is
/// exp(-j pi (d/lambda) (N - 2n + 1) cos_phi sin(theta)).
Eigen::VectorXcd ula_steering(double theta, int n_elements, double cos_phi,
                              double spacing_over_lambda);
Eigen::VectorXcd ula_steering_deriv(double theta, int n_elements, double cos_phi,
                                    double spacing_over_lambda);

/// Rician geometry of the BS-user link. All gains linear.
struct UserGeometry {
    double rician_k = 1.0;     // K_c
    double beta0 = 1.0;        // reference path gain at 1 m
    double pathloss_exp = 2.0; // alpha_c
    double range_m = 1.0;      // r_U
    double height_m = 0.0;     // h_U
    double azimuth = 0.0;      // theta_U
};

/// H = sqrt(beta_c/(K_c+1)) (sqrt(K_c) b_U(theta_U) a(theta_U)^H + H_NLoS),
/// H_NLoS i.i.d. CN(0,1), beta_c = beta0 / r_U^alpha_c.
Eigen::MatrixXcd rician_channel(const SystemConfig& cfg, const UserGeometry& user,
                                std::mt19937_64& rng);

}  // namespace isac
