#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "isac/benchmarks.hpp"
#include "isac/solver_optimal.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace isac;

namespace {

struct Fixture {
    SystemConfig cfg = test::small_system();
    GaussianMixture prior = test::small_prior();
    TargetEnvironment env;
    Eigen::MatrixXcd h;
    CapacityResult cap;
    Fixture() {
        env = make_environment(cfg, 0.5);
        std::mt19937_64 rng(2027);
        h = test::random_channel(cfg.n_user, cfg.n_tx, 0.15, rng);
        cap = capacity_waterfilling(h, cfg.power_w, cfg.noise_comm_w);
    }
};

}  // namespace

TEST_CASE("point-mass kernels: closed-form structure") {
    Fixture fx;
    const double theta = -0.52;
    const SensingMatrices m = point_mass_matrices(theta, fx.cfg);
    const double db2 = steering_rx_deriv(theta, fx.cfg).squaredNorm();
    CHECK(m.a1.real().trace() == doctest::Approx(db2 * fx.cfg.n_tx).epsilon(1e-12));
    CHECK(rank_diagnostics(m.a1).first == 1);
    CHECK(m.fp11 == 0.0);
    CHECK(m.rho == 0.0);
}

TEST_CASE("point-mass kernels are the narrow-prior limit") {
    Fixture fx;
    const double theta = 0.33;
    GaussianMixture prior;
    prior.components = {{1.0, theta, 1e-8}};
    QuadratureSpec quad;
    quad.panels = 1024;
    quad.nodes_per_panel = 16;
    quad.rel_tol = 1e-7;
    quad.max_refinements = 8;
    const SensingMatrices narrow = compute_sensing_matrices(prior, fx.cfg, quad);
    const SensingMatrices point = point_mass_matrices(theta, fx.cfg);
    CHECK((narrow.a1 - point.a1).norm() <= 1e-4 * point.a1.norm());
    CHECK((narrow.a2 - point.a2).norm() <= 1e-4 * point.a2.norm());
    CHECK((narrow.a3 - point.a3).norm() <= 1e-4 * point.a3.norm());
    CHECK((narrow.a4 - point.a4).norm() <= 1e-4 * point.a4.norm());
}

TEST_CASE("exact-mode design without a rate constraint is the matched beamformer") {
    Fixture fx;
    const double theta = -0.52;
    BenchmarkSpec spec;
    spec.mode = BenchmarkSpec::Mode::exact;
    spec.theta_known = theta;
    std::mt19937_64 rng(4);
    const Eigen::MatrixXcd w = solve_known_angle(spec, fx.h, fx.cfg, fx.env, 0.0, rng);
    const Eigen::VectorXcd a = steering_tx(theta, fx.cfg);
    const Eigen::MatrixXcd expect =
        (fx.cfg.power_w / fx.cfg.n_tx) * (a * a.adjoint());
    CHECK((w - expect).norm() < 1e-8 * expect.norm());
}

TEST_CASE("inexact mode with zero variance reduces to exact mode") {
    Fixture fx;
    BenchmarkSpec exact;
    exact.mode = BenchmarkSpec::Mode::exact;
    exact.theta_known = 0.4;
    BenchmarkSpec inexact;
    inexact.mode = BenchmarkSpec::Mode::inexact;
    inexact.theta_known = 0.4;
    inexact.perturb_variance = 0.0;
    std::mt19937_64 rng_a(9), rng_b(9);
    const double rbar = 0.5 * fx.cap.r_max;
    const Eigen::MatrixXcd wa = solve_known_angle(exact, fx.h, fx.cfg, fx.env, rbar, rng_a);
    const Eigen::MatrixXcd wb =
        solve_known_angle(inexact, fx.h, fx.cfg, fx.env, rbar, rng_b);
    CHECK((wa - wb).norm() < 1e-12);
}

TEST_CASE("benchmark spec validation") {
    BenchmarkSpec bad;
    bad.mode = BenchmarkSpec::Mode::exact;
    bad.perturb_variance = 0.1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.mode = BenchmarkSpec::Mode::inexact;
    bad.theta_known = 2.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("exact-mode design minimizes the point CRB among random candidates") {
    Fixture fx;
    const double theta = 0.7;
    BenchmarkSpec spec;
    spec.mode = BenchmarkSpec::Mode::exact;
    spec.theta_known = theta;
    std::mt19937_64 rng(40);
    const Eigen::MatrixXcd w = solve_known_angle(spec, fx.h, fx.cfg, fx.env, 0.0, rng);
    const double best = crb_point(theta, w, fx.env, fx.cfg);
    for (int i = 0; i < 1000; ++i) {
        const Eigen::MatrixXcd cand = test::random_psd(fx.cfg.n_tx, fx.cfg.power_w, rng);
        CHECK(best <= crb_point(theta, cand, fx.env, fx.cfg) * (1.0 + 1e-9));
    }
}

TEST_CASE("expected CRB degrades as the known angle gets noisier") {
    Fixture fx;
    const double rbar = 0.3 * fx.cap.r_max;
    QuadratureSpec quad;
    quad.panels = 12;
    quad.nodes_per_panel = 8;

    BenchmarkSpec exact;
    exact.mode = BenchmarkSpec::Mode::exact;
    const double base = benchmark_expected_crb(exact, fx.h, fx.cfg, fx.env, fx.prior, rbar,
                                               quad, 1, 5);
    double last = base;
    for (double var : {1e-3, 1e-2, 1e-1}) {
        BenchmarkSpec spec;
        spec.mode = BenchmarkSpec::Mode::inexact;
        spec.perturb_variance = var;
        const double crb = benchmark_expected_crb(spec, fx.h, fx.cfg, fx.env, fx.prior,
                                                  rbar, quad, 8, 5);
        CHECK(crb > last * 0.98);  // statistical slack on a monotone trend
        last = crb;
    }
    CHECK(last > 1.5 * base);
}

TEST_CASE("inexact benchmark sits strictly above the exact one at a moderate rate") {
    Fixture fx;
    const double rbar = 0.6 * fx.cap.r_max;
    QuadratureSpec quad;
    quad.panels = 12;
    quad.nodes_per_panel = 8;
    BenchmarkSpec b1;
    b1.mode = BenchmarkSpec::Mode::exact;
    BenchmarkSpec b2;
    b2.mode = BenchmarkSpec::Mode::inexact;
    b2.perturb_variance = 0.0316227766016838;
    const double crb1 =
        benchmark_expected_crb(b1, fx.h, fx.cfg, fx.env, fx.prior, rbar, quad, 1, 11);
    const double crb2 =
        benchmark_expected_crb(b2, fx.h, fx.cfg, fx.env, fx.prior, rbar, quad, 6, 11);
    CHECK(crb2 > crb1);
}
