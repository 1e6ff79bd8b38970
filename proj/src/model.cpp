#include "isac/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace isac {

double SystemConfig::cos_phi() const {
    if (bs_height_m > target_range_m)
        throw std::invalid_argument("SystemConfig: BS height exceeds target range");
    const double r = target_range_m;
    return std::sqrt(r * r - bs_height_m * bs_height_m) / r;
}

void SystemConfig::validate() const {
    if (n_tx < 1 || n_rx < 1 || n_user < 1 || symbols < 1)
        throw std::invalid_argument("SystemConfig: antenna/symbol counts must be positive");
    if (!(power_w > 0.0) || !(noise_comm_w > 0.0) || !(noise_sense_w > 0.0))
        throw std::invalid_argument("SystemConfig: powers must be strictly positive");
    if (!(spacing_over_lambda > 0.0))
        throw std::invalid_argument("SystemConfig: spacing must be positive");
    if (bs_height_m < 0.0 || !(target_range_m > 0.0))
        throw std::invalid_argument("SystemConfig: bad geometry");
    (void)cos_phi();  // rejects hB > r
}

void GaussianMixture::validate() const {
    if (components.empty())
        throw std::invalid_argument("GaussianMixture: needs at least one component");
    double total = 0.0;
    for (const auto& c : components) {
        if (c.weight < 0.0 || c.weight > 1.0)
            throw std::invalid_argument("GaussianMixture: weight outside [0,1]");
        if (!(c.variance > 0.0))
            throw std::invalid_argument("GaussianMixture: variance must be positive");
        if (c.mean < kAngleLo || c.mean >= kAngleHi)
            throw std::invalid_argument("GaussianMixture: mean outside [-pi/2, pi/2)");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("GaussianMixture: weights must sum to 1 within 1e-12");
}

double gm_log_pdf(double theta, const GaussianMixture& prior) {
    // log-sum-exp over components; stable for variances down to 1e-4 scale
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(prior.components.size());
    for (std::size_t k = 0; k < prior.components.size(); ++k) {
        const auto& c = prior.components[k];
        const double d = theta - c.mean;
        terms[k] = std::log(c.weight) - 0.5 * std::log(2.0 * kPi * c.variance) -
                   0.5 * d * d / c.variance;
        max_term = std::max(max_term, terms[k]);
    }
    if (!std::isfinite(max_term)) return max_term;  // all weights zero-mass here
    double acc = 0.0;
    for (double t : terms) acc += std::exp(t - max_term);
    return max_term + std::log(acc);
}

double gm_pdf(double theta, const GaussianMixture& prior) {
    return std::exp(gm_log_pdf(theta, prior));
}

double gm_sample(const GaussianMixture& prior, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int attempt = 0; attempt < 100000; ++attempt) {
        double u = unit(rng);
        std::size_t pick = prior.components.size() - 1;
        double cdf = 0.0;
        for (std::size_t k = 0; k < prior.components.size(); ++k) {
            cdf += prior.components[k].weight;
            if (u <= cdf) {
                pick = k;
                break;
            }
        }
        const auto& c = prior.components[pick];
        const double theta = c.mean + std::sqrt(c.variance) * gauss(rng);
        if (theta >= kAngleLo && theta < kAngleHi) return theta;
    }
    throw std::runtime_error("gm_sample: rejection sampling failed to hit the domain");
}

TargetEnvironment make_environment(const SystemConfig& cfg, double snr_linear,
                                   double alpha_phase) {
    if (!(snr_linear > 0.0))
        throw std::invalid_argument("make_environment: SNR must be positive");
    const double mag =
        std::sqrt(snr_linear * cfg.noise_sense_w / (cfg.power_w * cfg.symbols));
    TargetEnvironment env;
    env.alpha = std::polar(mag, alpha_phase);
    env.snr_factor = mag * mag * cfg.symbols / cfg.noise_sense_w;
    return env;
}

Eigen::VectorXcd ula_steering(double theta, int n_elements, double cos_phi,
                              double spacing_over_lambda) {
    Eigen::VectorXcd v(n_elements);
    const double base = kPi * spacing_over_lambda * cos_phi * std::sin(theta);
    for (int n = 1; n <= n_elements; ++n)
        v[n - 1] = std::polar(1.0, -base * (n_elements - 2 * n + 1));
    return v;
}

Eigen::VectorXcd ula_steering_deriv(double theta, int n_elements, double cos_phi,
                                    double spacing_over_lambda) {
    Eigen::VectorXcd v = ula_steering(theta, n_elements, cos_phi, spacing_over_lambda);
    const double base = kPi * spacing_over_lambda * cos_phi * std::cos(theta);
    for (int n = 1; n <= n_elements; ++n)
        v[n - 1] *= cxd(0.0, -base * (n_elements - 2 * n + 1));
    return v;
}

Eigen::VectorXcd steering_tx(double theta, const SystemConfig& cfg) {
    return ula_steering(theta, cfg.n_tx, cfg.cos_phi(), cfg.spacing_over_lambda);
}

Eigen::VectorXcd steering_rx(double theta, const SystemConfig& cfg) {
    return ula_steering(theta, cfg.n_rx, cfg.cos_phi(), cfg.spacing_over_lambda);
}

Eigen::VectorXcd steering_tx_deriv(double theta, const SystemConfig& cfg) {
    return ula_steering_deriv(theta, cfg.n_tx, cfg.cos_phi(), cfg.spacing_over_lambda);
}

Eigen::VectorXcd steering_rx_deriv(double theta, const SystemConfig& cfg) {
    return ula_steering_deriv(theta, cfg.n_rx, cfg.cos_phi(), cfg.spacing_over_lambda);
}

Eigen::MatrixXcd rician_channel(const SystemConfig& cfg, const UserGeometry& user,
                                std::mt19937_64& rng) {
    if (user.range_m < std::abs(user.height_m - cfg.bs_height_m))
        throw std::invalid_argument("rician_channel: user range below height separation");
    if (!(user.beta0 > 0.0) || !(user.rician_k >= 0.0))
        throw std::invalid_argument("rician_channel: bad channel gains");

    const double dh = user.height_m - cfg.bs_height_m;
    const double cos_phi_u = std::sqrt(user.range_m * user.range_m - dh * dh) / user.range_m;
    const double beta_c = user.beta0 / std::pow(user.range_m, user.pathloss_exp);

    const Eigen::VectorXcd a_u =
        ula_steering(user.azimuth, cfg.n_tx, cos_phi_u, cfg.spacing_over_lambda);
    const Eigen::VectorXcd b_u =
        ula_steering(user.azimuth, cfg.n_user, cos_phi_u, cfg.spacing_over_lambda);
    const Eigen::MatrixXcd h_los = b_u * a_u.adjoint();

    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd h_nlos(cfg.n_user, cfg.n_tx);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < cfg.n_user; ++i)
        for (int j = 0; j < cfg.n_tx; ++j) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            h_nlos(i, j) = cxd(re * inv_sqrt2, im * inv_sqrt2);
        }

    const double scale = std::sqrt(beta_c / (user.rician_k + 1.0));
    return scale * (std::sqrt(user.rician_k) * h_los + h_nlos);
}

}  // namespace isac
