#include "isac/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace isac {

namespace {

// Integrand of the rho correction in the prior Fisher information: a ratio of
// mixture terms, evaluated as scaled exponentials about the max-density
// component so the tails stay finite.
double rho_integrand(double theta, const GaussianMixture& prior) {
    const std::size_t k_count = prior.components.size();
    std::vector<double> log_term(k_count);
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < k_count; ++k) {
        const auto& c = prior.components[k];
        const double d = theta - c.mean;
        log_term[k] = std::log(c.weight) - 0.5 * std::log(2.0 * kPi * c.variance) -
                      0.5 * d * d / c.variance;
        m = std::max(m, log_term[k]);
    }
    if (!std::isfinite(m)) return 0.0;
    double num = 0.0;
    for (std::size_t k1 = 0; k1 < k_count; ++k1)
        for (std::size_t k2 = 0; k2 < k_count; ++k2) {
            const double g = (theta - prior.components[k1].mean) / prior.components[k1].variance -
                             (theta - prior.components[k2].mean) / prior.components[k2].variance;
            num += std::exp(log_term[k1] + log_term[k2] - 2.0 * m) * g * g;
        }
    double den = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) den += std::exp(log_term[k] - m);
    return std::exp(m) * num / (2.0 * den);
}

}  // namespace

SensingMatrices compute_sensing_matrices(const GaussianMixture& prior, const SystemConfig& cfg,
                                         const QuadratureSpec& quad) {
    prior.validate();
    cfg.validate();
    const double cphi = cfg.cos_phi();
    const double d = cfg.spacing_over_lambda;
    const int nt = cfg.n_tx;
    const double nr = cfg.n_rx;

    SensingMatrices m;
    m.a1 = integrate_matrix(
        [&](double theta) -> Eigen::MatrixXcd {
            const Eigen::VectorXcd a = ula_steering(theta, nt, cphi, d);
            const Eigen::VectorXcd db = ula_steering_deriv(theta, cfg.n_rx, cphi, d);
            return (db.squaredNorm() * gm_pdf(theta, prior)) * (a * a.adjoint());
        },
        kAngleLo, kAngleHi, quad);
    m.a2 = integrate_matrix(
        [&](double theta) -> Eigen::MatrixXcd {
            const Eigen::VectorXcd da = ula_steering_deriv(theta, nt, cphi, d);
            return (nr * gm_pdf(theta, prior)) * (da * da.adjoint());
        },
        kAngleLo, kAngleHi, quad);
    m.a3 = integrate_matrix(
        [&](double theta) -> Eigen::MatrixXcd {
            const Eigen::VectorXcd a = ula_steering(theta, nt, cphi, d);
            const Eigen::VectorXcd da = ula_steering_deriv(theta, nt, cphi, d);
            return (nr * gm_pdf(theta, prior)) * (da * a.adjoint());
        },
        kAngleLo, kAngleHi, quad);
    m.a4 = integrate_matrix(
        [&](double theta) -> Eigen::MatrixXcd {
            const Eigen::VectorXcd a = ula_steering(theta, nt, cphi, d);
            return (nr * gm_pdf(theta, prior)) * (a * a.adjoint());
        },
        kAngleLo, kAngleHi, quad);
    m.rho = integrate_scalar([&](double theta) { return rho_integrand(theta, prior); },
                             kAngleLo, kAngleHi, quad);

    double inv_var_sum = 0.0;
    for (const auto& c : prior.components) inv_var_sum += c.weight / c.variance;
    const double raw = inv_var_sum - m.rho;
    if (raw < -1e-9 * std::max(1.0, inv_var_sum))
        throw AccuracyError("compute_sensing_matrices: negative prior Fisher information",
                            inv_var_sum, m.rho);
    m.fp11 = std::max(raw, 0.0);
    return m;
}

void validate_covariance(const Eigen::MatrixXcd& w, double power_budget, double slack) {
    if (w.rows() != w.cols()) throw std::invalid_argument("covariance: not square");
    const double scale = std::max(1.0, w.norm());
    if ((w - w.adjoint()).norm() > 1e-10 * scale)
        throw std::invalid_argument("covariance: not Hermitian");
    const HermitianEvd evd = hermitian_evd(w);
    const double max_eig = std::max(evd.eigenvalues[0], 0.0);
    if (evd.eigenvalues[evd.eigenvalues.size() - 1] < -1e-9 * std::max(1.0, max_eig))
        throw std::invalid_argument("covariance: not positive semidefinite");
    if (power_budget > 0.0 && w.real().trace() > power_budget + slack)
        throw std::invalid_argument("covariance: trace exceeds the power budget");
}

double pcrb_from_traces(double tr_a12w, cxd tr_a3w, double tr_a4w, double fp11,
                        double snr_factor) {
    if (tr_a4w <= 0.0) {
        // no-observation limit: only the prior contributes
        if (fp11 > 0.0) return 1.0 / fp11;
        throw std::domain_error("pcrb: zero covariance and zero prior information");
    }
    const double schur = tr_a12w - std::norm(tr_a3w) / tr_a4w;
    const double denom = fp11 + 2.0 * snr_factor * schur;
    if (!(denom > 0.0)) throw std::domain_error("pcrb: non-positive Fisher information");
    return 1.0 / denom;
}

double pcrb(const Eigen::MatrixXcd& w, const SensingMatrices& m, const TargetEnvironment& env) {
    const double t12 = ((m.a1 + m.a2) * w).trace().real();
    const cxd t3 = (m.a3 * w).trace();
    const double t4 = (m.a4 * w).trace().real();
    return pcrb_from_traces(t12, t3, t4, m.fp11, env.snr_factor);
}

double pcrb_upper(const Eigen::MatrixXcd& w, const SensingMatrices& m,
                  const TargetEnvironment& env) {
    const double t1 = (m.a1 * w).trace().real();
    const double denom = m.fp11 + 2.0 * env.snr_factor * t1;
    if (!(denom > 0.0)) throw std::domain_error("pcrb_upper: non-positive information");
    return 1.0 / denom;
}

double crb_point(double theta, const Eigen::MatrixXcd& w, const TargetEnvironment& env,
                 const SystemConfig& cfg) {
    const Eigen::VectorXcd a = steering_tx(theta, cfg);
    const Eigen::VectorXcd db = steering_rx_deriv(theta, cfg);
    const double power_toward = (a.adjoint() * w * a)(0, 0).real();
    const double denom = 2.0 * env.snr_factor * db.squaredNorm() * power_toward;
    if (!(denom > 0.0))
        throw std::domain_error("crb_point: no radiated power toward the target angle");
    return 1.0 / denom;
}

double crb_expected(const Eigen::MatrixXcd& w, const GaussianMixture& prior,
                    const TargetEnvironment& env, const SystemConfig& cfg,
                    const QuadratureSpec& quad) {
    return integrate_scalar(
        [&](double theta) {
            return crb_point(theta, w, env, cfg) * gm_pdf(theta, prior);
        },
        kAngleLo, kAngleHi, quad);
}

double rate(const Eigen::MatrixXcd& w, const Eigen::MatrixXcd& h, double noise) {
    const Eigen::MatrixXcd s = h * w * h.adjoint() / noise;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (s + s.adjoint()));
    double bits = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
        bits += std::log2(1.0 + std::max(es.eigenvalues()[i], -0.5));
    return bits;
}

Eigen::VectorXd beampattern(const Eigen::MatrixXcd& w, const Eigen::VectorXd& theta_grid,
                            const SystemConfig& cfg) {
    Eigen::VectorXd out(theta_grid.size());
    for (Eigen::Index i = 0; i < theta_grid.size(); ++i) {
        const Eigen::VectorXcd a = steering_tx(theta_grid[i], cfg);
        out[i] = (a.adjoint() * w * a)(0, 0).real();
    }
    return out;
}

}  // namespace isac
