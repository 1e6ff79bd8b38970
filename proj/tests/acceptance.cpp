// Acceptance suite: one criterion per invocation (--only N) or all in
// sequence. Prints one PASS/FAIL line per criterion and exits nonzero on any
// failure.

#include "isac/benchmarks.hpp"
#include "isac/estimation.hpp"
#include "isac/experiment.hpp"
#include "isac/solver_optimal.hpp"
#include "isac/solver_suboptimal.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

using namespace isac;

namespace {

struct Harness {
    int checks = 0;
    int failed = 0;
    std::ostringstream detail;

    void expect(bool ok, const std::string& what) {
        ++checks;
        if (!ok) {
            ++failed;
            if (detail.tellp() > 0) detail << "; ";
            detail << what;
        }
    }
};

Eigen::MatrixXcd random_psd_full(int n, double trace, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) g(i, j) = cxd(gauss(rng), gauss(rng));
    Eigen::MatrixXcd w = g * g.adjoint();
    w *= trace / w.real().trace();
    return 0.5 * (w + w.adjoint());
}

Eigen::MatrixXcd random_psd_anyrank(int n, double trace, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int k = 1 + static_cast<int>(rng() % n);
    Eigen::MatrixXcd g(n, k);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) g(i, j) = cxd(gauss(rng), gauss(rng));
    Eigen::MatrixXcd w = g * g.adjoint();
    w *= trace / w.real().trace();
    return 0.5 * (w + w.adjoint());
}

struct Scenario {
    ExperimentConfig cfg;
    TargetEnvironment env;
    SensingMatrices m;
    Eigen::MatrixXcd h;
    CapacityResult cap;
};

Scenario& default_state() {
    static Scenario s = [] {
        Scenario sc;
        sc.cfg = default_scenario();
        sc.env = sc.cfg.environment();
        sc.m = compute_sensing_matrices(sc.cfg.prior, sc.cfg.system);
        std::mt19937_64 rng(sc.cfg.channel.seed);
        sc.h = rician_channel(sc.cfg.system, sc.cfg.channel.geometry, rng);
        sc.cap = capacity_waterfilling(sc.h, sc.cfg.system.power_w,
                                       sc.cfg.system.noise_comm_w);
        return sc;
    }();
    return s;
}

// 1. Bound chain on the default scenario over random full-power designs.
void criterion_bound_chain(Harness& h) {
    Scenario& s = default_state();
    QuadratureSpec quad;
    quad.panels = 128;
    quad.rel_tol = 1e-8;
    quad.max_refinements = 6;
    std::mt19937_64 rng(1001);
    for (int i = 0; i < 200; ++i) {
        const Eigen::MatrixXcd w =
            random_psd_full(s.cfg.system.n_tx, s.cfg.system.power_w, rng);
        const double exact = pcrb(w, s.m, s.env);
        const double upper = pcrb_upper(w, s.m, s.env);
        const double expected = crb_expected(w, s.cfg.prior, s.env, s.cfg.system, quad);
        h.expect(upper - exact >= -1e-10 * upper, "pcrb_upper < pcrb at draw " + std::to_string(i));
        h.expect(expected - upper >= -1e-10 * expected,
                 "crb_expected < pcrb_upper at draw " + std::to_string(i));
    }
}

// 2. The cross-term inequality behind the upper bound.
void criterion_schur_inequality(Harness& h) {
    Scenario& s = default_state();
    std::mt19937_64 rng(1002);
    for (int i = 0; i < 1000; ++i) {
        const Eigen::MatrixXcd w =
            random_psd_anyrank(s.cfg.system.n_tx, s.cfg.system.power_w, rng);
        const double t2 = ((s.m.a2 * w).trace()).real();
        const double t4 = ((s.m.a4 * w).trace()).real();
        const double t3 = std::norm((s.m.a3 * w).trace());
        h.expect(t2 * t4 - t3 >= -1e-10 * (t2 * t4 + t3),
                 "inequality violated at draw " + std::to_string(i));
    }
}

// 3. Closed-form bound equals the inverse of the explicitly assembled 3x3 FIM.
void criterion_fim_oracle(Harness& h) {
    Scenario& s = default_state();
    const TargetEnvironment env = make_environment(s.cfg.system, s.cfg.snr_linear, 0.7);
    const double c = 2.0 * s.cfg.system.symbols / s.cfg.system.noise_sense_w;
    std::mt19937_64 rng(1003);
    for (int i = 0; i < 50; ++i) {
        const Eigen::MatrixXcd w =
            random_psd_anyrank(s.cfg.system.n_tx, s.cfg.system.power_w, rng);
        const double j_tt =
            c * std::norm(env.alpha) * (((s.m.a1 + s.m.a2) * w).trace()).real() + s.m.fp11;
        const cxd z = (s.m.a3 * w).trace();
        const double j_aa = c * ((s.m.a4 * w).trace()).real();
        const double w1 = c * (std::conj(env.alpha) * z).real();
        const double w2 = c * (cxd(0.0, 1.0) * std::conj(env.alpha) * z).real();
        Eigen::Matrix3d f;
        f << j_tt, w1, w2, w1, j_aa, 0.0, w2, 0.0, j_aa;
        const double oracle = f.inverse()(0, 0);
        const double direct = pcrb(w, s.m, env);
        h.expect(std::abs(direct - oracle) <= 1e-9 * std::abs(oracle),
                 "oracle mismatch at draw " + std::to_string(i));
    }
}

// 4. Single-component prior Fisher information.
void criterion_prior_fisher(Harness& h) {
    Scenario& s = default_state();
    GaussianMixture prior;
    prior.components = {{1.0, 0.3, 1e-2}};
    const SensingMatrices m = compute_sensing_matrices(prior, s.cfg.system);
    h.expect(std::abs(m.fp11 - 100.0) <= 1e-6 * 100.0,
             "fp11 = " + std::to_string(m.fp11) + " != 100");
}

// 5. Capacity against an independent active-set enumeration; boundary rule.
void criterion_capacity(Harness& h) {
    std::mt19937_64 rng(1005);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXcd ch(4, 6);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 6; ++j) ch(i, j) = cxd(gauss(rng), gauss(rng));
        const double power = 1.3, noise = 0.2;
        const CapacityResult cap = capacity_waterfilling(ch, power, noise);

        const ReducedSvd svd = reduced_svd(ch);
        double best = 0.0;
        const int t = 4;
        for (int mask = 1; mask < (1 << t); ++mask) {
            double inv_sum = 0.0;
            int k = 0;
            for (int i = 0; i < t; ++i)
                if (mask & (1 << i)) {
                    inv_sum += noise / (svd.singular_values[i] * svd.singular_values[i]);
                    ++k;
                }
            const double nu = (power + inv_sum) / k;
            bool ok = true;
            double sum_rate = 0.0;
            for (int i = 0; i < t; ++i) {
                const double gain = svd.singular_values[i] * svd.singular_values[i];
                const double level = nu - noise / gain;
                if (mask & (1 << i)) {
                    if (level < -1e-12) ok = false;
                    sum_rate += std::log2(1.0 + std::max(level, 0.0) * gain / noise);
                } else if (level > 1e-12) {
                    ok = false;
                }
            }
            if (ok) best = std::max(best, sum_rate);
        }
        h.expect(std::abs(cap.r_max - best) <= 1e-6 * std::max(1.0, best),
                 "capacity mismatch at trial " + std::to_string(trial));
        h.expect(check_feasibility(cap.r_max, cap.r_max), "boundary rejected");
        h.expect(!check_feasibility(cap.r_max + 1e-3, cap.r_max),
                 "above-boundary accepted");
    }
}

// 6. Optimal solver contracts on the reference scenario.
void criterion_optimal_solver(Harness& h) {
    Scenario& s = default_state();
    const double rbar = s.cfg.rate_target;
    const OptimalSolveResult res = solve_p3(s.m, s.h, s.env, s.cfg.system, rbar);
    h.expect(res.kkt_residual <= 1e-6,
             "kkt residual " + std::to_string(res.kkt_residual));
    const double schur = (((s.m.a1 + s.m.a2) * res.w).trace()).real() -
                         std::norm((s.m.a3 * res.w).trace()) /
                             (((s.m.a4 * res.w).trace()).real());
    h.expect(std::abs(res.t_star - schur) <= 1e-7 * std::abs(schur), "t* != P2 objective");
    h.expect(res.rate_value >= rbar - 1e-6, "rate shortfall");
    h.expect(res.w.real().trace() <= s.cfg.system.power_w + 1e-8, "power overdraw");
    const int rank_h = rank_diagnostics(s.h.adjoint() * s.h).first;
    h.expect(res.rank_w <= rank_h, "rank(W) > rank(H) with active rate constraint");

    const OptimalSolveResult free = solve_p3(s.m, s.h, s.env, s.cfg.system, 0.0);
    h.expect(free.rank_w == 1, "sensing-optimal solution not rank one");
    std::mt19937_64 rng(1006);
    std::normal_distribution<double> gauss(0.0, 1.0);
    bool beaten = false;
    for (int i = 0; i < 10000 && !beaten; ++i) {
        Eigen::VectorXcd v(s.cfg.system.n_tx);
        for (int k = 0; k < s.cfg.system.n_tx; ++k) v[k] = cxd(gauss(rng), gauss(rng));
        v.normalize();
        const Eigen::MatrixXcd cand = s.cfg.system.power_w * (v * v.adjoint());
        if (free.pcrb_value > pcrb(cand, s.m, s.env) * (1.0 + 1e-9)) beaten = true;
    }
    h.expect(!beaten, "a random rank-one candidate beat the sensing-optimal design");
}

// 7. Scalar-transmitter closed form.
void criterion_single_antenna(Harness& h) {
    Scenario& s = default_state();
    SystemConfig cfg = s.cfg.system;
    cfg.n_tx = 1;
    const SensingMatrices m = compute_sensing_matrices(s.cfg.prior, cfg);
    std::mt19937_64 rng(1007);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd ch(cfg.n_user, 1);
    for (int i = 0; i < cfg.n_user; ++i)
        ch(i, 0) = 1e-6 * cxd(gauss(rng), gauss(rng));
    const double r_max = capacity_waterfilling(ch, cfg.power_w, cfg.noise_comm_w).r_max;
    for (double frac : {0.0, 0.4, 0.8, 1.0}) {
        const OptimalSolveResult res = solve_p3(m, ch, s.env, cfg, frac * r_max);
        h.expect(std::abs(res.w(0, 0).real() - cfg.power_w) <= 1e-9,
                 "W != P at fraction " + std::to_string(frac));
    }
}

// 8. Suboptimal tracks optimal closely; optimal for the upper bound.
void criterion_suboptimal_vs_optimal(Harness& h) {
    Scenario& s = default_state();
    for (double rbar : {5.0, 5.5, 6.0, 6.5}) {
        const OptimalSolveResult opt = solve_p3(s.m, s.h, s.env, s.cfg.system, rbar);
        const SuboptimalSolveResult sub = solve_p4(s.m, s.h, s.env, s.cfg.system, rbar);
        const double ratio = sub.pcrb_value / opt.pcrb_value;
        h.expect(ratio <= 1.10, "pcrb ratio " + std::to_string(ratio) + " at rbar " +
                                    std::to_string(rbar));
        h.expect(sub.pcrb_upper_value <= opt.pcrb_upper_value + 1e-7,
                 "upper-bound optimality lost at rbar " + std::to_string(rbar));
    }
}

// 9. Rate-PCRB trade-off monotonicity for both solvers.
void criterion_tradeoff_monotone(Harness& h) {
    Scenario& s = default_state();
    double last_opt = -1.0, last_sub = -1.0;
    for (int i = 0; i < 8; ++i) {
        const double rbar = 0.95 * s.cap.r_max * i / 7.0;
        const double p_opt = solve_p3(s.m, s.h, s.env, s.cfg.system, rbar).pcrb_value;
        const double p_sub = solve_p4(s.m, s.h, s.env, s.cfg.system, rbar).pcrb_value;
        h.expect(p_opt >= last_opt - 1e-8, "optimal pcrb decreased at point " +
                                               std::to_string(i));
        h.expect(p_sub >= last_sub - 1e-8, "suboptimal pcrb decreased at point " +
                                               std::to_string(i));
        last_opt = p_opt;
        last_sub = p_sub;
    }
}

// 10. MISO special case agrees with the general dual solver.
void criterion_miso(Harness& h) {
    Scenario& s = default_state();
    SystemConfig cfg = s.cfg.system;
    cfg.n_user = 1;
    const SensingMatrices m = compute_sensing_matrices(s.cfg.prior, cfg);
    std::mt19937_64 rng(1010);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::MatrixXcd ch(1, cfg.n_tx);
        for (int j = 0; j < cfg.n_tx; ++j)
            ch(0, j) = 1e-6 * cxd(gauss(rng), gauss(rng));
        const double r_max = capacity_waterfilling(ch, cfg.power_w, cfg.noise_comm_w).r_max;
        const double rbar = 0.8 * r_max;
        const Eigen::VectorXcd h_t = ch.row(0).adjoint();
        const Eigen::MatrixXcd w_miso = solve_p4_miso(m, h_t, cfg, rbar);
        const SuboptimalSolveResult general = solve_p4(m, ch, s.env, cfg, rbar);
        const double u_miso = pcrb_upper(w_miso, m, s.env);
        h.expect(std::abs(u_miso - general.pcrb_upper_value) <= 1e-6 * u_miso,
                 "MISO mismatch at trial " + std::to_string(trial));
    }
}

// 11. Monte Carlo MSE respects the bound and improves with SNR.
void criterion_monte_carlo(Harness& h) {
    Scenario& s = default_state();
    const Eigen::MatrixXcd design =
        solve_p3(s.m, s.h, s.env, s.cfg.system, s.cfg.rate_target).w;

    const TrialBatch base = monte_carlo_mse(design, Estimator::map, s.env, s.cfg.prior,
                                            s.cfg.system, 500, 77);
    const double bound = pcrb(design, s.m, s.env);
    h.expect(base.mse >= 0.85 * bound, "MSE " + std::to_string(base.mse) +
                                           " below 0.85 * pcrb " + std::to_string(bound));

    int inversions = 0;
    double last = std::numeric_limits<double>::infinity();
    for (double snr_db : {-10.0, -5.0, 0.0, 5.0, 10.0}) {
        const TargetEnvironment env =
            make_environment(s.cfg.system, std::pow(10.0, snr_db / 10.0));
        const TrialBatch b = monte_carlo_mse(design, Estimator::map, env, s.cfg.prior,
                                             s.cfg.system, 500, 177);
        if (b.mse > last) ++inversions;
        last = b.mse;
    }
    h.expect(inversions <= 1,
             "MSE not monotone in SNR (" + std::to_string(inversions) + " inversions)");
}

// 12. Prior exploitation beats genie designs where it should.
void criterion_prior_gain(Harness& h) {
    Scenario& s = default_state();
    QuadratureSpec quad;
    quad.panels = 32;
    quad.nodes_per_panel = 8;
    BenchmarkSpec b1;
    b1.mode = BenchmarkSpec::Mode::exact;
    BenchmarkSpec b2;
    b2.mode = BenchmarkSpec::Mode::inexact;
    b2.perturb_variance = std::pow(10.0, -1.5);

    const double rbar_high = 0.98 * s.cap.r_max;
    const double crb1_high = benchmark_expected_crb(b1, s.h, s.cfg.system, s.env,
                                                    s.cfg.prior, rbar_high, quad, 1, 99);
    const double pcrb_high =
        solve_p3(s.m, s.h, s.env, s.cfg.system, rbar_high).pcrb_value;
    h.expect(crb1_high > pcrb_high,
             "exact-location benchmark (" + std::to_string(crb1_high) +
                 ") not above the proposed design (" + std::to_string(pcrb_high) +
                 ") at high rate");

    for (double rbar : {5.0, 5.5, 6.0, 6.5}) {
        const double crb1 = benchmark_expected_crb(b1, s.h, s.cfg.system, s.env,
                                                   s.cfg.prior, rbar, quad, 1, 99);
        const double crb2 = benchmark_expected_crb(b2, s.h, s.cfg.system, s.env,
                                                   s.cfg.prior, rbar, quad, 6, 99);
        h.expect(crb2 > crb1, "inexact benchmark not above exact at rbar " +
                                  std::to_string(rbar));
    }
}

// 13. Byte-identical outputs for identical seeds.
void criterion_determinism(Harness& h) {
    ExperimentConfig cfg = default_scenario();
    cfg.montecarlo.trials = 16;
    std::ostringstream log;
    const auto slurp = [](const std::string& p) {
        std::ifstream in(p, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };

    RunOverrides a, b;
    a.out_path = "acceptance_mc_a.csv";
    b.out_path = "acceptance_mc_b.csv";
    const std::string pa = run_command("montecarlo", cfg, a, log);
    const std::string pb = run_command("montecarlo", cfg, b, log);
    h.expect(slurp(pa) == slurp(pb), "montecarlo outputs differ between runs");
    std::remove(pa.c_str());
    std::remove(pb.c_str());

    RunOverrides fa, fb;
    fa.out_path = "acceptance_feas_a.csv";
    fb.out_path = "acceptance_feas_b.csv";
    const std::string qa = run_command("feasibility", cfg, fa, log);
    const std::string qb = run_command("feasibility", cfg, fb, log);
    h.expect(slurp(qa) == slurp(qb), "feasibility outputs differ between runs");
    std::remove(qa.c_str());
    std::remove(qb.c_str());
}

struct Entry {
    int id;
    const char* name;
    void (*run)(Harness&);
    double runtime_cap_s;  // 0 = uncapped
};

const Entry kCriteria[] = {
    {1, "bound-chain", criterion_bound_chain, 30.0},
    {2, "schur-inequality", criterion_schur_inequality, 10.0},
    {3, "fim-oracle", criterion_fim_oracle, 10.0},
    {4, "prior-fisher", criterion_prior_fisher, 0.0},
    {5, "capacity-waterfilling", criterion_capacity, 0.0},
    {6, "optimal-solver", criterion_optimal_solver, 120.0},
    {7, "single-antenna", criterion_single_antenna, 0.0},
    {8, "suboptimal-vs-optimal", criterion_suboptimal_vs_optimal, 300.0},
    {9, "tradeoff-monotone", criterion_tradeoff_monotone, 0.0},
    {10, "miso-consistency", criterion_miso, 0.0},
    {11, "monte-carlo-bound", criterion_monte_carlo, 600.0},
    {12, "prior-exploitation", criterion_prior_gain, 0.0},
    {13, "determinism", criterion_determinism, 0.0},
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i + 1 < argc + 1; ++i) {
        if (i + 1 < argc && std::strcmp(argv[i], "--only") == 0) only = std::atoi(argv[i + 1]);
    }

    int failures = 0;
    for (const Entry& entry : kCriteria) {
        if (only != 0 && entry.id != only) continue;
        Harness h;
        const auto start = std::chrono::steady_clock::now();
        try {
            entry.run(h);
        } catch (const std::exception& e) {
            h.expect(false, std::string("exception: ") + e.what());
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                .count();
        if (entry.runtime_cap_s > 0.0 && elapsed > entry.runtime_cap_s)
            h.expect(false, "runtime " + std::to_string(elapsed) + "s over the " +
                                std::to_string(entry.runtime_cap_s) + "s cap");
        char line[512];
        if (h.failed == 0) {
            std::snprintf(line, sizeof(line), "PASS criterion-%02d %-24s (%d checks, %.1f s)",
                          entry.id, entry.name, h.checks, elapsed);
            std::puts(line);
        } else {
            std::snprintf(line, sizeof(line), "FAIL criterion-%02d %-24s (%d/%d checks): %s",
                          entry.id, entry.name, h.failed, h.checks,
                          h.detail.str().c_str());
            std::puts(line);
            ++failures;
        }
    }
    return failures == 0 ? 0 : 1;
}
