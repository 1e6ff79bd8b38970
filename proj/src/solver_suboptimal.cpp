#include "isac/solver_suboptimal.hpp"

#include "isac/solver_optimal.hpp"

#include <algorithm>
#include <cmath>

namespace isac {

namespace {

double top_eigenvalue(const Eigen::MatrixXcd& a) { return hermitian_evd(a).eigenvalues[0]; }

struct InnerEval {
    Eigen::MatrixXcd w;
    double rate_value = 0.0;
    double trace = 0.0;
    double lagrangian = 0.0;  // dual objective g(beta, mu)
};

InnerEval eval_duals(const DualPoint& dual, const Eigen::MatrixXcd& a1,
                     const Eigen::MatrixXcd& h, double noise, double power, double rbar) {
    InnerEval ev;
    SensingMatrices tmp;
    tmp.a1 = a1;
    ev.w = inner_solution(dual, tmp, h, noise);
    ev.rate_value = rate(ev.w, h, noise);
    ev.trace = ev.w.real().trace();
    ev.lagrangian = (a1 * ev.w).trace().real() + dual.beta * (ev.rate_value - rbar) -
                    dual.mu * (ev.trace - power);
    return ev;
}

// Enforce hard feasibility with minimal objective loss: scale onto the power
// budget, blend toward the capacity point if the rate still falls short, then
// push back out to the power boundary when that helps tr(A1 W).
Eigen::MatrixXcd polish_feasible(Eigen::MatrixXcd w, const Eigen::MatrixXcd& a1,
                                 const Eigen::MatrixXcd& h, double noise, double power,
                                 double rbar, const Eigen::MatrixXcd& w_cap) {
    double tr = w.real().trace();
    if (tr > power) {
        w *= power / tr;
        tr = power;
    }
    if (rbar > 0.0 && rate(w, h, noise) < rbar) {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < 80; ++it) {
            const double mid = 0.5 * (lo + hi);
            const Eigen::MatrixXcd cand = (1.0 - mid) * w + mid * w_cap;
            if (rate(cand, h, noise) >= rbar)
                hi = mid;
            else
                lo = mid;
        }
        w = (1.0 - hi) * w + hi * w_cap;
        tr = w.real().trace();
    }
    if (tr > 0.0 && tr < power && (a1 * w).trace().real() > 0.0) w *= power / tr;
    return 0.5 * (w + w.adjoint());
}

}  // namespace

Eigen::MatrixXcd sensing_only_upper(const SensingMatrices& m, double power) {
    if (m.a1.norm() == 0.0)
        throw std::invalid_argument("sensing_only_upper: A1 is degenerate (zero)");
    const HermitianEvd evd = hermitian_evd(m.a1);
    const Eigen::VectorXcd s1 = evd.eigenvectors.col(0);
    Eigen::MatrixXcd w = power * (s1 * s1.adjoint());
    return 0.5 * (w + w.adjoint());
}

Eigen::MatrixXcd build_q(const DualPoint& dual, const SensingMatrices& m) {
    if (!(dual.beta > 0.0)) throw std::invalid_argument("build_q: beta must be positive");
    const double lambda1 = top_eigenvalue(m.a1);
    if (!(dual.mu > lambda1))
        throw std::invalid_argument("build_q: mu must exceed the top eigenvalue of A1");
    const int n = static_cast<int>(m.a1.rows());
    return (dual.mu / dual.beta) * Eigen::MatrixXcd::Identity(n, n) - m.a1 / dual.beta;
}

Eigen::MatrixXcd inner_solution(const DualPoint& dual, const SensingMatrices& m,
                                const Eigen::MatrixXcd& h, double noise) {
    const Eigen::MatrixXcd q_inv_sqrt = psd_inv_sqrt(build_q(dual, m));
    const ReducedSvd svd = reduced_svd(h * q_inv_sqrt);
    const double smax = svd.singular_values[0];
    int t_rank = 0;
    for (Eigen::Index i = 0; i < svd.singular_values.size(); ++i)
        if (svd.singular_values[i] > 1e-12 * smax) ++t_rank;
    const int n = static_cast<int>(h.cols());
    if (t_rank == 0) return Eigen::MatrixXcd::Zero(n, n);

    Eigen::VectorXd lam(t_rank);
    const double level = 1.0 / std::log(2.0);
    for (int i = 0; i < t_rank; ++i) {
        const double gain = svd.singular_values[i] * svd.singular_values[i];
        lam[i] = std::max(level - noise / gain, 0.0);
    }
    const Eigen::MatrixXcd v = svd.v.leftCols(t_rank);
    Eigen::MatrixXcd w = q_inv_sqrt * v * lam.asDiagonal() * v.adjoint() * q_inv_sqrt;
    return 0.5 * (w + w.adjoint());
}

SuboptimalSolveResult solve_p4(const SensingMatrices& m, const Eigen::MatrixXcd& h,
                               const TargetEnvironment& env, const SystemConfig& cfg,
                               double rbar, const EllipsoidOptions& opts) {
    const double power = cfg.power_w;
    const double noise = cfg.noise_comm_w;
    const CapacityResult cap = capacity_waterfilling(h, power, noise);
    if (!check_feasibility(rbar, cap.r_max))
        throw InfeasibleError("solve_p4: rate target exceeds channel capacity (r_max = " +
                                  std::to_string(cap.r_max) + ")",
                              rbar, cap.r_max);

    SuboptimalSolveResult res;
    const Eigen::MatrixXcd w_s = sensing_only_upper(m, power);
    const double rate_s = rate(w_s, h, noise);
    if (rate_s >= rbar) {
        res.w = w_s;
        res.sensing_only = true;
        res.dual = DualPoint{0.0, top_eigenvalue(m.a1)};
        res.pcrb_value = pcrb(res.w, m, env);
        res.pcrb_upper_value = pcrb_upper(res.w, m, env);
        res.rate_value = rate_s;
        res.rank_w = rank_diagnostics(res.w).first;
        return res;
    }

    // The dual search runs on the lambda1-normalized objective tr(A1 W / l1),
    // which has the same maximizer; duals scale back by l1. This keeps the
    // ellipsoid geometry independent of the magnitude of A1.
    const double lambda1 = top_eigenvalue(m.a1);
    const Eigen::MatrixXcd a1n = m.a1 / lambda1;
    const double mu_floor = 1.0 + 1e-9;
    const double beta_floor = 1e-12;
    const auto slack_ok = [&](const InnerEval& ev) {
        return std::abs(ev.rate_value - rbar) <= opts.slack_tol * std::max(1.0, rbar) &&
               std::abs(power - ev.trace) <= opts.slack_tol * power;
    };

    int iterations = 0;
    DualPoint best{1.0, 3.0};
    double best_g = std::numeric_limits<double>::infinity();
    bool have_best = false;

    // Damped Newton on the complementary-slackness residuals; also serves as
    // the cheap warm-start path.
    auto newton_polish = [&](DualPoint z) -> std::optional<DualPoint> {
        for (int it = 0; it < 60; ++it) {
            ++iterations;
            if (!(z.beta > beta_floor) || !(z.mu > mu_floor)) return std::nullopt;
            const InnerEval ev = eval_duals(z, a1n, h, noise, power, rbar);
            const Eigen::Vector2d f(ev.rate_value - rbar, power - ev.trace);
            if (std::abs(f[0]) <= 1e-11 * std::max(1.0, rbar) &&
                std::abs(f[1]) <= 1e-13 * power)
                return z;
            const double hb = std::max(1e-9 * std::abs(z.beta), 1e-14);
            const double hm = std::max(1e-9 * std::abs(z.mu), 1e-14);
            const InnerEval evb = eval_duals({z.beta + hb, z.mu}, a1n, h, noise, power, rbar);
            const InnerEval evm = eval_duals({z.beta, z.mu + hm}, a1n, h, noise, power, rbar);
            Eigen::Matrix2d jac;
            jac(0, 0) = (evb.rate_value - ev.rate_value) / hb;
            jac(0, 1) = (evm.rate_value - ev.rate_value) / hm;
            jac(1, 0) = -(evb.trace - ev.trace) / hb;
            jac(1, 1) = -(evm.trace - ev.trace) / hm;
            if (!(std::abs(jac.determinant()) > 1e-30)) return std::nullopt;
            Eigen::Vector2d step = jac.colPivHouseholderQr().solve(-f);
            double damp = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 40; ++ls) {
                DualPoint cand{z.beta + damp * step[0], z.mu + damp * step[1]};
                if (cand.beta > beta_floor && cand.mu > mu_floor) {
                    const InnerEval evc = eval_duals(cand, a1n, h, noise, power, rbar);
                    const Eigen::Vector2d fc(evc.rate_value - rbar, power - evc.trace);
                    if (fc.norm() < f.norm()) {
                        z = cand;
                        moved = true;
                        break;
                    }
                }
                damp *= 0.5;
            }
            if (!moved) return std::nullopt;
        }
        return std::nullopt;
    };

    std::optional<DualPoint> polished;
    if (opts.warm_start && opts.warm_start->beta > 0.0)
        polished = newton_polish(
            DualPoint{opts.warm_start->beta / lambda1, opts.warm_start->mu / lambda1});

    if (!polished) {
        // Ellipsoid over the normalized (beta, mu); feasibility cuts keep mu
        // above the normalized top eigenvalue (= 1).
        Eigen::Vector2d z(1.0, 3.0);
        Eigen::Matrix2d shape = Eigen::Matrix2d::Zero();
        shape(0, 0) = 1e12;
        const double mu_span = 1e6 + 1.0;
        shape(1, 1) = mu_span * mu_span;

        for (int it = 0; it < opts.max_iterations; ++it) {
            ++iterations;
            Eigen::Vector2d cut;
            if (z[0] <= beta_floor) {
                cut = Eigen::Vector2d(-1.0, 0.0);
            } else if (z[1] <= mu_floor) {
                cut = Eigen::Vector2d(0.0, -1.0);
            } else {
                const InnerEval ev = eval_duals({z[0], z[1]}, a1n, h, noise, power, rbar);
                if (ev.lagrangian < best_g) {
                    best_g = ev.lagrangian;
                    best = DualPoint{z[0], z[1]};
                    have_best = true;
                }
                if (slack_ok(ev)) {
                    best = DualPoint{z[0], z[1]};
                    have_best = true;
                    break;
                }
                cut = Eigen::Vector2d(ev.rate_value - rbar, power - ev.trace);
            }
            const double denom = std::sqrt(cut.dot(shape * cut));
            if (!(denom > 0.0)) break;
            const Eigen::Vector2d sn = shape * cut / denom;
            z -= sn / 3.0;                       // n = 2: 1/(n+1)
            shape = (4.0 / 3.0) * (shape - (2.0 / 3.0) * sn * sn.transpose());
            shape = 0.5 * (shape + shape.transpose());
            const double radius = std::sqrt(std::max(shape(0, 0), shape(1, 1)));
            if (radius <= opts.radius_tol * std::max(1.0, z.norm())) break;
        }
        if (!have_best)
            throw SolverError("solve_p4: ellipsoid found no usable dual point", best_g);
        polished = newton_polish(best);
    }

    const DualPoint final_dual = polished ? *polished : best;
    InnerEval ev = eval_duals(final_dual, a1n, h, noise, power, rbar);
    res.w = polish_feasible(ev.w, m.a1, h, noise, power, rbar, cap.w_c);
    res.dual = DualPoint{final_dual.beta * lambda1, final_dual.mu * lambda1};
    res.duality_gap = lambda1 * (ev.lagrangian - (a1n * res.w).trace().real());
    res.pcrb_value = pcrb(res.w, m, env);
    res.pcrb_upper_value = pcrb_upper(res.w, m, env);
    res.rate_value = rate(res.w, h, noise);
    res.rank_w = rank_diagnostics(res.w).first;
    res.iterations = iterations;

    if (!polished && std::abs(ev.rate_value - rbar) > 1e-3 * std::max(1.0, rbar) &&
        std::abs(power - ev.trace) > 1e-3 * power)
        throw SolverError("solve_p4: ellipsoid stagnated away from the KKT point",
                          std::abs(ev.rate_value - rbar));
    return res;
}

Eigen::MatrixXcd solve_p4_miso(const SensingMatrices& m, const Eigen::VectorXcd& h_t,
                               const SystemConfig& cfg, double rbar) {
    const double power = cfg.power_w;
    const double noise = cfg.noise_comm_w;
    const double h_norm2 = h_t.squaredNorm();
    if (!(h_norm2 > 0.0)) throw std::invalid_argument("solve_p4_miso: zero channel");
    const double r_max = std::log2(1.0 + power * h_norm2 / noise);
    if (rbar > r_max)
        throw InfeasibleError("solve_p4_miso: rate target exceeds capacity", rbar, r_max);

    const auto rank_one_for = [&](double eta) -> Eigen::MatrixXcd {
        const Eigen::MatrixXcd mat = m.a1 + eta * (h_t * h_t.adjoint());
        const HermitianEvd evd = hermitian_evd(mat);
        const Eigen::VectorXcd s = evd.eigenvectors.col(0);
        Eigen::MatrixXcd w = power * (s * s.adjoint());
        return 0.5 * (w + w.adjoint());
    };
    const double rate_needed = (std::pow(2.0, rbar) - 1.0) * noise;
    const auto surplus = [&](double eta) {
        const Eigen::MatrixXcd w = rank_one_for(eta);
        return (h_t.adjoint() * w * h_t)(0, 0).real() - rate_needed;
    };

    if (surplus(0.0) >= 0.0) return rank_one_for(0.0);  // sensing-only already feasible

    const double lambda1 = hermitian_evd(m.a1).eigenvalues[0];
    double lo = 0.0;
    double hi = std::max(lambda1 / h_norm2, 1.0);
    int guard = 0;
    while (surplus(hi) < 0.0 && guard++ < 200) hi *= 2.0;
    if (surplus(hi) < 0.0)
        throw SolverError("solve_p4_miso: bisection failed to bracket the rate equality",
                          surplus(hi));
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (surplus(mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return rank_one_for(hi);
}

}  // namespace isac
