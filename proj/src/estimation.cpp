#include "isac/estimation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace isac {

namespace {

// PSD square root with tiny negative eigenvalues clipped to zero.
Eigen::MatrixXcd psd_sqrt(const Eigen::MatrixXcd& w) {
    const HermitianEvd evd = hermitian_evd(w);
    Eigen::VectorXd s(evd.eigenvalues.size());
    for (Eigen::Index i = 0; i < s.size(); ++i)
        s[i] = std::sqrt(std::max(evd.eigenvalues[i], 0.0));
    return evd.eigenvectors * s.asDiagonal() * evd.eigenvectors.adjoint();
}

// Concentrated objective pieces shared by the grid search and refinement.
struct LikelihoodContext {
    Eigen::MatrixXcd yxh;   // Y X^H, Nr x Nt
    Eigen::MatrixXcd gram;  // X X^H, Nt x Nt
    const SystemConfig* cfg = nullptr;
    double inv_noise = 1.0;

    // alpha-profiled log-likelihood up to theta-independent terms:
    // |b^H Y X^H a|^2 / (||b||^2 a^H X X^H a) / sigma_s^2
    double log_likelihood(double theta) const {
        const Eigen::VectorXcd a = steering_tx(theta, *cfg);
        const Eigen::VectorXcd b = steering_rx(theta, *cfg);
        const double excitation = (a.adjoint() * gram * a)(0, 0).real();
        if (excitation <= 1e-300) return 0.0;  // flat likelihood (e.g. X = 0)
        const cxd c = (b.adjoint() * yxh * a)(0, 0);
        return std::norm(c) / (b.squaredNorm() * excitation) * inv_noise;
    }
};

double golden_section_max(const std::function<double(double)>& f, double lo, double hi,
                          double tol) {
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 > f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

double grid_argmax(const std::function<double(double)>& score, const GridSpec& grid) {
    const double step = (kAngleHi - kAngleLo) / grid.points;
    int best_idx = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < grid.points; ++i) {
        const double theta = kAngleLo + i * step;
        const double s = score(theta);
        if (s > best) {  // strict: ties break toward the smaller angle
            best = s;
            best_idx = i;
        }
    }
    const double lo = kAngleLo + std::max(best_idx - 1, 0) * step;
    const double hi =
        std::min(kAngleLo + (best_idx + 1) * step, std::nextafter(kAngleHi, 0.0));
    const double refined = golden_section_max(score, lo, hi, grid.refine_tol);
    // flat or tied scores keep the grid optimum (lower-edge tie-break)
    const double coarse = kAngleLo + best_idx * step;
    return score(refined) > score(coarse) ? refined : coarse;
}

}  // namespace

Eigen::MatrixXcd gen_signals(const Eigen::MatrixXcd& w, int symbols, std::mt19937_64& rng) {
    if (symbols < 1) throw std::invalid_argument("gen_signals: symbols must be >= 1");
    const int nt = static_cast<int>(w.rows());
    if (w.norm() == 0.0) return Eigen::MatrixXcd::Zero(nt, symbols);
    const Eigen::MatrixXcd root = psd_sqrt(w);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd z(nt, symbols);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < symbols; ++j)
        for (int i = 0; i < nt; ++i) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            z(i, j) = cxd(re * inv_sqrt2, im * inv_sqrt2);
        }
    return root * z;
}

EchoObservation gen_echo(const Eigen::MatrixXcd& x, double theta, const TargetEnvironment& env,
                         const SystemConfig& cfg, std::mt19937_64& rng) {
    if (theta < kAngleLo || theta >= kAngleHi)
        throw std::invalid_argument("gen_echo: angle outside [-pi/2, pi/2)");
    const Eigen::VectorXcd a = steering_tx(theta, cfg);
    const Eigen::VectorXcd b = steering_rx(theta, cfg);
    EchoObservation obs;
    obs.x = x;
    obs.theta_truth = theta;
    obs.alpha_truth = env.alpha;
    obs.y = env.alpha * b * (a.adjoint() * x);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double sigma = std::sqrt(cfg.noise_sense_w / 2.0);
    for (Eigen::Index j = 0; j < obs.y.cols(); ++j)
        for (Eigen::Index i = 0; i < obs.y.rows(); ++i) {
            const double re = gauss(rng);
            const double im = gauss(rng);
            obs.y(i, j) += cxd(re * sigma, im * sigma);
        }
    return obs;
}

cxd profile_alpha(const Eigen::MatrixXcd& y, const Eigen::MatrixXcd& x, double theta,
                  const SystemConfig& cfg) {
    const Eigen::VectorXcd a = steering_tx(theta, cfg);
    const Eigen::VectorXcd b = steering_rx(theta, cfg);
    const double excitation = (a.adjoint() * (x * x.adjoint()) * a)(0, 0).real();
    if (!(excitation > 0.0))
        throw std::invalid_argument("profile_alpha: no excitation along a(theta)");
    const cxd num = (b.adjoint() * (y * x.adjoint()) * a)(0, 0);
    return num / (b.squaredNorm() * excitation);
}

double map_estimate(const EchoObservation& obs, const GaussianMixture& prior,
                    const SystemConfig& cfg, const GridSpec& grid) {
    LikelihoodContext ctx{obs.y * obs.x.adjoint(), obs.x * obs.x.adjoint(), &cfg,
                          1.0 / cfg.noise_sense_w};
    return grid_argmax(
        [&](double theta) { return ctx.log_likelihood(theta) + gm_log_pdf(theta, prior); },
        grid);
}

double mle_estimate(const EchoObservation& obs, const SystemConfig& cfg,
                    const GridSpec& grid) {
    LikelihoodContext ctx{obs.y * obs.x.adjoint(), obs.x * obs.x.adjoint(), &cfg,
                          1.0 / cfg.noise_sense_w};
    return grid_argmax([&](double theta) { return ctx.log_likelihood(theta); }, grid);
}

TrialBatch monte_carlo_mse(const Eigen::MatrixXcd& design, Estimator estimator,
                           const TargetEnvironment& env, const GaussianMixture& prior,
                           const SystemConfig& cfg, int trials, std::uint64_t seed,
                           const GridSpec& grid) {
    if (trials < 1) throw std::invalid_argument("monte_carlo_mse: trials must be >= 1");
    prior.validate();

    TrialBatch batch;
    batch.trials = trials;
    batch.seed = seed;
    batch.estimates.assign(trials, 0.0);
    batch.truths.assign(trials, 0.0);

    const auto run_trial = [&](int t) {
        std::mt19937_64 rng(split_seed(seed, static_cast<std::uint64_t>(t)));
        const double theta = gm_sample(prior, rng);
        const Eigen::MatrixXcd x = gen_signals(design, cfg.symbols, rng);
        const EchoObservation obs = gen_echo(x, theta, env, cfg, rng);
        batch.truths[t] = theta;
        batch.estimates[t] = estimator == Estimator::map
                                 ? map_estimate(obs, prior, cfg, grid)
                                 : mle_estimate(obs, cfg, grid);
    };

    const unsigned workers =
        std::max(1u, std::min(std::thread::hardware_concurrency(), 8u));
    if (workers == 1 || trials < 8) {
        for (int t = 0; t < trials; ++t) run_trial(t);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (unsigned k = 0; k < workers; ++k)
            pool.emplace_back([&] {
                for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1))
                    run_trial(t);
            });
        for (auto& th : pool) th.join();
    }

    double acc = 0.0;
    for (int t = 0; t < trials; ++t) {
        const double err = batch.estimates[t] - batch.truths[t];
        acc += err * err;
    }
    batch.mse = acc / trials;
    return batch;
}

}  // namespace isac
