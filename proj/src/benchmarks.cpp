#include "isac/benchmarks.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace isac {

void BenchmarkSpec::validate() const {
    if (theta_known < kAngleLo || theta_known >= kAngleHi)
        throw std::invalid_argument("BenchmarkSpec: angle outside [-pi/2, pi/2)");
    if (perturb_variance < 0.0)
        throw std::invalid_argument("BenchmarkSpec: negative perturbation variance");
    if (mode == Mode::exact && perturb_variance != 0.0)
        throw std::invalid_argument("BenchmarkSpec: exact mode requires zero variance");
}

SensingMatrices point_mass_matrices(double theta, const SystemConfig& cfg) {
    if (theta < kAngleLo || theta >= kAngleHi)
        throw std::invalid_argument("point_mass_matrices: angle outside [-pi/2, pi/2)");
    const Eigen::VectorXcd a = steering_tx(theta, cfg);
    const Eigen::VectorXcd da = steering_tx_deriv(theta, cfg);
    const Eigen::VectorXcd db = steering_rx_deriv(theta, cfg);
    const double nr = cfg.n_rx;

    SensingMatrices m;
    m.a1 = db.squaredNorm() * (a * a.adjoint());
    m.a2 = nr * (da * da.adjoint());
    m.a3 = nr * (da * a.adjoint());
    m.a4 = nr * (a * a.adjoint());
    m.rho = 0.0;
    m.fp11 = 0.0;  // no prior information in the genie-aided schemes
    return m;
}

Eigen::MatrixXcd solve_known_angle(const BenchmarkSpec& spec, const Eigen::MatrixXcd& h,
                                   const SystemConfig& cfg, const TargetEnvironment& env,
                                   double rbar, std::mt19937_64& rng) {
    spec.validate();
    double design_angle = spec.theta_known;
    if (spec.mode == BenchmarkSpec::Mode::inexact && spec.perturb_variance > 0.0) {
        std::normal_distribution<double> gauss(0.0, std::sqrt(spec.perturb_variance));
        design_angle = spec.theta_known + gauss(rng);
        // keep the perturbed pointing angle inside the array's unambiguous range
        design_angle = std::clamp(design_angle, kAngleLo, std::nextafter(kAngleHi, 0.0));
    }
    const SensingMatrices pm = point_mass_matrices(design_angle, cfg);
    // Minimizing the point CRB is maximizing tr(A1 W) for the point-mass A1.
    const SuboptimalSolveResult res = solve_p4(pm, h, env, cfg, rbar);
    return res.w;
}

double benchmark_expected_crb(const BenchmarkSpec& spec, const Eigen::MatrixXcd& h,
                              const SystemConfig& cfg, const TargetEnvironment& env,
                              const GaussianMixture& prior, double rbar,
                              const QuadratureSpec& quad, int draws, std::uint64_t seed) {
    spec.validate();
    if (draws < 1) throw std::invalid_argument("benchmark_expected_crb: draws must be >= 1");

    EllipsoidOptions opts;  // warm-started across nearby nodes
    const bool inexact = spec.mode == BenchmarkSpec::Mode::inexact;

    const auto crb_at = [&](double theta_true, std::mt19937_64& node_rng) {
        double acc = 0.0;
        const int n_designs = inexact ? draws : 1;
        for (int d = 0; d < n_designs; ++d) {
            double design_angle = theta_true;
            if (inexact && spec.perturb_variance > 0.0) {
                std::normal_distribution<double> gauss(0.0, std::sqrt(spec.perturb_variance));
                design_angle = theta_true + gauss(node_rng);
                design_angle =
                    std::clamp(design_angle, kAngleLo, std::nextafter(kAngleHi, 0.0));
            }
            const SensingMatrices pm = point_mass_matrices(design_angle, cfg);
            SuboptimalSolveResult res;
            try {
                res = solve_p4(pm, h, env, cfg, rbar, opts);
            } catch (const SolverError&) {
                EllipsoidOptions cold;
                res = solve_p4(pm, h, env, cfg, rbar, cold);
            }
            if (!res.sensing_only) opts.warm_start = res.dual;
            acc += crb_point(theta_true, res.w, env, cfg);
        }
        return acc / n_designs;
    };

    // Fixed-rule evaluation: the inexact-mode integrand carries Monte Carlo
    // noise, so refinement-based convergence checks do not apply. Each node
    // owns a split random stream keyed by its index.
    std::vector<double> x, w;
    gauss_legendre(quad.nodes_per_panel, x, w);
    const double width = (kAngleHi - kAngleLo) / quad.panels;
    double acc = 0.0;
    std::uint64_t node_index = 0;
    for (int p = 0; p < quad.panels; ++p) {
        const double center = kAngleLo + (p + 0.5) * width;
        for (std::size_t k = 0; k < x.size(); ++k, ++node_index) {
            const double theta = center + 0.5 * width * x[k];
            std::mt19937_64 node_rng(split_seed(seed, node_index));
            acc += (0.5 * width * w[k]) * crb_at(theta, node_rng) * gm_pdf(theta, prior);
        }
    }
    return acc;
}

}  // namespace isac
