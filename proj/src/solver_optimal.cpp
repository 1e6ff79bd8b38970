#include "isac/solver_optimal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace isac {

namespace {

// Real coordinates for an n x n Hermitian matrix: n diagonal entries, then
// (re, im) pairs for each i < j. Each coordinate's basis matrix is stored as
// up to two elementary dyads c * e_i e_j^T.
struct HermitianParam {
    struct Term {
        int i, j;
        cxd c;
    };
    int n = 0;
    int dim = 0;
    std::vector<std::array<Term, 2>> terms;
    std::vector<int> n_terms;

    explicit HermitianParam(int n_) : n(n_), dim(n_ * n_) {
        terms.resize(dim);
        n_terms.resize(dim);
        int idx = 0;
        for (int i = 0; i < n; ++i, ++idx) {
            terms[idx][0] = {i, i, cxd(1.0, 0.0)};
            n_terms[idx] = 1;
        }
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                terms[idx][0] = {i, j, cxd(1.0, 0.0)};
                terms[idx][1] = {j, i, cxd(1.0, 0.0)};
                n_terms[idx] = 2;
                ++idx;
                terms[idx][0] = {i, j, cxd(0.0, 1.0)};
                terms[idx][1] = {j, i, cxd(0.0, -1.0)};
                n_terms[idx] = 2;
                ++idx;
            }
    }

    Eigen::VectorXd pack(const Eigen::MatrixXcd& w) const {
        Eigen::VectorXd v(dim);
        int idx = 0;
        for (int i = 0; i < n; ++i) v[idx++] = w(i, i).real();
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                v[idx++] = w(i, j).real();
                v[idx++] = w(i, j).imag();
            }
        return v;
    }

    Eigen::MatrixXcd unpack(const Eigen::VectorXd& v) const {
        Eigen::MatrixXcd w(n, n);
        int idx = 0;
        for (int i = 0; i < n; ++i) w(i, i) = v[idx++];
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                const double re = v[idx++];
                const double im = v[idx++];
                w(i, j) = cxd(re, im);
                w(j, i) = cxd(re, -im);
            }
        return w;
    }

    // coordinates of x -> tr(G E_x) for Hermitian G (the gradient map)
    Eigen::VectorXd grad_vec(const Eigen::MatrixXcd& g) const {
        Eigen::VectorXd v(dim);
        int idx = 0;
        for (int i = 0; i < n; ++i) v[idx++] = g(i, i).real();
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) {
                v[idx++] = 2.0 * g(i, j).real();
                v[idx++] = 2.0 * g(i, j).imag();
            }
        return v;
    }

    // coordinates of x -> tr(C E_x) for a general (non-Hermitian) C
    Eigen::VectorXcd lin_vec(const Eigen::MatrixXcd& c) const {
        Eigen::VectorXcd v(dim);
        for (int x = 0; x < dim; ++x) {
            cxd acc(0.0, 0.0);
            for (int t = 0; t < n_terms[x]; ++t) {
                const Term& tm = terms[x][t];
                acc += tm.c * c(tm.j, tm.i);
            }
            v[x] = acc;
        }
        return v;
    }

    // Q[x, y] = Re tr(S E_x T E_y) for Hermitian S, T (symmetric PSD form)
    Eigen::MatrixXd quad_form(const Eigen::MatrixXcd& s, const Eigen::MatrixXcd& t) const {
        Eigen::MatrixXd q(dim, dim);
        for (int x = 0; x < dim; ++x)
            for (int y = x; y < dim; ++y) {
                cxd acc(0.0, 0.0);
                for (int a = 0; a < n_terms[x]; ++a)
                    for (int b = 0; b < n_terms[y]; ++b) {
                        const Term& ta = terms[x][a];
                        const Term& tb = terms[y][b];
                        acc += ta.c * tb.c * t(ta.j, tb.i) * s(tb.j, ta.i);
                    }
                q(x, y) = acc.real();
                q(y, x) = acc.real();
            }
        return q;
    }
};

struct Slacks {
    bool feasible = false;
    Eigen::MatrixXcd w;
    Eigen::MatrixXcd w_inv;
    double b11 = 0.0, b22 = 0.0;
    cxd b12{0.0, 0.0};
    double b_det = 0.0;
    double power_slack = 0.0;
    double rate_value = 0.0;
    double rate_slack = 0.0;
};

// Scaled problem data for the barrier solve.
struct P3Data {
    HermitianParam par;
    Eigen::MatrixXcd a12, a3, a4;  // divided by the sensing scale
    Eigen::MatrixXcd h;
    double noise = 1.0;
    double power = 1.0;
    double rbar = 0.0;
    bool rate_active = true;  // rbar > 0

    Eigen::VectorXd v_a12, v_a4;
    Eigen::VectorXcd v_a3;

    explicit P3Data(int n) : par(n) {}

    Slacks eval(double t, const Eigen::VectorXd& wv) const {
        Slacks s;
        s.w = par.unpack(wv);
        Eigen::LLT<Eigen::MatrixXcd> llt(s.w);
        if (llt.info() != Eigen::Success) return s;
        s.b11 = ((a12 * s.w).trace()).real() - t;
        s.b12 = (a3 * s.w).trace();
        s.b22 = ((a4 * s.w).trace()).real();
        s.b_det = s.b11 * s.b22 - std::norm(s.b12);
        if (!(s.b11 > 0.0) || !(s.b22 > 0.0) || !(s.b_det > 0.0)) return s;
        s.power_slack = power - s.w.real().trace();
        if (!(s.power_slack > 0.0)) return s;
        s.rate_value = rate(s.w, h, noise);
        s.rate_slack = s.rate_value - rbar;
        if (rate_active && !(s.rate_slack > 0.0)) return s;
        s.w_inv = llt.solve(Eigen::MatrixXcd::Identity(par.n, par.n));
        s.w_inv = 0.5 * (s.w_inv + s.w_inv.adjoint());
        s.feasible = true;
        return s;
    }

    double barrier(const Slacks& s) const {
        double phi = -std::log(s.b_det);
        Eigen::LLT<Eigen::MatrixXcd> llt(s.w);
        double logdet_w = 0.0;
        for (int i = 0; i < par.n; ++i)
            logdet_w += 2.0 * std::log(llt.matrixL()(i, i).real());
        phi -= logdet_w;
        phi -= std::log(s.power_slack);
        if (rate_active) phi -= std::log(s.rate_slack);
        return phi;
    }
};

Eigen::MatrixXcd rate_gradient_matrix(const Eigen::MatrixXcd& w, const Eigen::MatrixXcd& h,
                                      double noise) {
    // K = H^H M^{-1} H / noise with M = I + H W H^H / noise; grad(rate) = K/ln2.
    const int nu = static_cast<int>(h.rows());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(nu, nu) + h * w * h.adjoint() / noise;
    m = 0.5 * (m + m.adjoint());
    Eigen::LLT<Eigen::MatrixXcd> llt(m);
    Eigen::MatrixXcd k = h.adjoint() * llt.solve(h) / noise;
    return 0.5 * (k + k.adjoint());
}

}  // namespace

CapacityResult capacity_waterfilling(const Eigen::MatrixXcd& h, double power, double noise) {
    if (h.size() == 0 || h.norm() == 0.0)
        throw std::invalid_argument("capacity_waterfilling: zero channel");
    const ReducedSvd svd = reduced_svd(h);
    // numerical rank of the channel
    const double smax = svd.singular_values[0];
    int t_rank = 0;
    for (Eigen::Index i = 0; i < svd.singular_values.size(); ++i)
        if (svd.singular_values[i] > 1e-6 * smax) ++t_rank;
    if (t_rank == 0) throw std::invalid_argument("capacity_waterfilling: zero channel");

    Eigen::VectorXd gains(t_rank);
    for (int i = 0; i < t_rank; ++i)
        gains[i] = svd.singular_values[i] * svd.singular_values[i];
    const Eigen::VectorXd alloc = water_filling(gains, power, noise);

    CapacityResult out;
    out.r_max = 0.0;
    for (int i = 0; i < t_rank; ++i)
        out.r_max += std::log2(1.0 + alloc[i] * gains[i] / noise);
    const Eigen::MatrixXcd v = svd.v.leftCols(t_rank);
    out.w_c = v * alloc.asDiagonal() * v.adjoint();
    out.w_c = 0.5 * (out.w_c + out.w_c.adjoint());
    return out;
}

bool check_feasibility(double rbar, double r_max) { return rbar <= r_max; }

std::pair<int, Eigen::VectorXd> rank_diagnostics(const Eigen::MatrixXcd& w, double tol) {
    const HermitianEvd evd = hermitian_evd(w);
    return {numerical_rank(evd.eigenvalues, tol), evd.eigenvalues};
}

OptimalSolveResult solve_p3(const SensingMatrices& m, const Eigen::MatrixXcd& h,
                            const TargetEnvironment& env, const SystemConfig& cfg, double rbar,
                            const BarrierOptions& opts) {
    const int nt = cfg.n_tx;
    const double power = cfg.power_w;
    const double noise = cfg.noise_comm_w;

    const CapacityResult cap = capacity_waterfilling(h, power, noise);
    if (!check_feasibility(rbar, cap.r_max))
        throw InfeasibleError("solve_p3: rate target exceeds channel capacity (r_max = " +
                                  std::to_string(cap.r_max) + ")",
                              rbar, cap.r_max);

    OptimalSolveResult res;

    // Nt = 1: the objective is monotonically increasing and the rate
    // monotonically increasing in the scalar W, so full power is optimal.
    if (nt == 1) {
        res.w = Eigen::MatrixXcd::Constant(1, 1, cxd(power, 0.0));
        res.t_star = ((m.a1 + m.a2) * res.w).trace().real() -
                     std::norm((m.a3 * res.w).trace()) / ((m.a4 * res.w).trace()).real();
        res.pcrb_value = pcrb(res.w, m, env);
        res.pcrb_upper_value = pcrb_upper(res.w, m, env);
        res.rate_value = rate(res.w, h, noise);
        res.rank_w = 1;
        return res;
    }

    // rbar at capacity: the feasible set collapses to the water-filling point.
    const double cap_margin = 1e-9 * std::max(1.0, cap.r_max);
    if (rbar >= cap.r_max - cap_margin) {
        res.w = cap.w_c;
        res.t_star = ((m.a1 + m.a2) * res.w).trace().real() -
                     std::norm((m.a3 * res.w).trace()) / ((m.a4 * res.w).trace()).real();
        res.pcrb_value = pcrb(res.w, m, env);
        res.pcrb_upper_value = pcrb_upper(res.w, m, env);
        res.rate_value = rate(res.w, h, noise);
        res.rank_w = rank_diagnostics(res.w).first;
        return res;
    }

    // Scale the sensing matrices so the LMI entries are O(P).
    const double sensing_scale = hermitian_evd(m.a1 + m.a2).eigenvalues[0];
    if (!(sensing_scale > 0.0))
        throw SolverError("solve_p3: degenerate sensing matrices", 0.0);

    P3Data data(nt);
    data.a12 = (m.a1 + m.a2) / sensing_scale;
    data.a3 = m.a3 / sensing_scale;
    data.a4 = m.a4 / sensing_scale;
    data.h = h;
    data.noise = noise;
    data.power = power;
    data.rbar = rbar;
    data.rate_active = rbar > 0.0;
    data.v_a12 = data.par.grad_vec(data.a12);
    data.v_a4 = data.par.grad_vec(data.a4);
    data.v_a3 = data.par.lin_vec(data.a3);

    const int dim = data.par.dim + 1;  // coordinate 0 is the auxiliary t
    const int n_constraints = 2 + nt + 1 + (data.rate_active ? 1 : 0);

    // Strictly feasible start: blend the isotropic point toward the capacity
    // point until the rate constraint holds with margin.
    const double shrink = [&] {
        const double margin = cap.r_max - rbar;
        const int t_rank = std::max(1, rank_diagnostics(cap.w_c).first);
        double delta = 1.0 - std::pow(2.0, -0.25 * margin / t_rank);
        return std::clamp(delta, 1e-9, 1e-3);
    }();
    Eigen::MatrixXcd w0;
    {
        const Eigen::MatrixXcd iso =
            (power / nt) * Eigen::MatrixXcd::Identity(nt, nt) * (1.0 - shrink);
        const Eigen::MatrixXcd wc = cap.w_c * (1.0 - shrink);
        double gamma = 0.5;
        w0 = (1.0 - gamma) * iso + gamma * wc;
        for (int it = 0; it < 60 && data.rate_active &&
                         rate(w0, h, noise) <= rbar + 0.25 * (cap.r_max - rbar) * shrink;
             ++it) {
            gamma = 0.5 * (1.0 + gamma);
            w0 = (1.0 - gamma) * iso + gamma * wc;
        }
    }
    Eigen::VectorXd wv = data.par.pack(w0);
    double schur0;
    {
        const double b11 = (data.a12 * w0).trace().real();
        const cxd b12 = (data.a3 * w0).trace();
        const double b22 = (data.a4 * w0).trace().real();
        schur0 = b11 - std::norm(b12) / b22;
    }
    double t = schur0 - std::max(0.1 * std::abs(schur0), 1e-3 * power);
    {
        const Slacks s0 = data.eval(t, wv);
        if (!s0.feasible) throw SolverError("solve_p3: failed to find an interior point", 0.0);
    }

    double tau = opts.tau0;
    int total_newton = 0;
    Eigen::VectorXd grad(dim);
    Eigen::MatrixXd hess(dim, dim);
    Slacks cur = data.eval(t, wv);

    for (int outer = 0; outer < opts.max_outer; ++outer) {
        // center at the current tau
        for (int inner = 0; inner < opts.max_newton; ++inner) {
            ++total_newton;
            // 2x2 LMI barrier pieces
            const double inv_det = 1.0 / cur.b_det;
            // B^{-1} = [b22, -b12; -b12*, b11] / det
            const cxd binv11(cur.b22 * inv_det, 0.0);
            const cxd binv12 = -cur.b12 * inv_det;
            const cxd binv21 = std::conj(binv12);
            const cxd binv22(cur.b11 * inv_det, 0.0);

            // M_x = B^{-1} dB_x for every coordinate (t first)
            const int wdim = data.par.dim;
            Eigen::VectorXcd m11(wdim + 1), m12(wdim + 1), m21(wdim + 1), m22(wdim + 1);
            m11[0] = -binv11;
            m12[0] = cxd(0.0, 0.0);
            m21[0] = -binv21;
            m22[0] = cxd(0.0, 0.0);
            for (int x = 0; x < wdim; ++x) {
                const double d11 = data.v_a12[x];
                const cxd d12 = data.v_a3[x];  // dB entries: [d11, conj? ] see below
                const cxd d21 = std::conj(d12);
                const double d22 = data.v_a4[x];
                m11[x + 1] = binv11 * d11 + binv12 * d21;
                m12[x + 1] = binv11 * d12 + binv12 * d22;
                m21[x + 1] = binv21 * d11 + binv22 * d21;
                m22[x + 1] = binv21 * d12 + binv22 * d22;
            }

            grad.setZero();
            hess.setZero();
            for (int x = 0; x < dim; ++x) grad[x] = -(m11[x] + m22[x]).real();
            grad[0] += -tau;  // objective -tau * t
            for (int x = 0; x < dim; ++x)
                for (int y = x; y < dim; ++y) {
                    const double v = (m11[x] * m11[y] + m12[x] * m21[y] + m21[x] * m12[y] +
                                      m22[x] * m22[y])
                                         .real();
                    hess(x, y) += v;
                    hess(y, x) = hess(x, y);
                }

            // -log det W
            const Eigen::VectorXd gw = data.par.grad_vec(cur.w_inv);
            grad.tail(wdim) -= gw;
            hess.bottomRightCorner(wdim, wdim) += data.par.quad_form(cur.w_inv, cur.w_inv);

            // -log(P - tr W)
            const Eigen::VectorXd vi =
                data.par.grad_vec(Eigen::MatrixXcd::Identity(nt, nt));
            grad.tail(wdim) += vi / cur.power_slack;
            hess.bottomRightCorner(wdim, wdim) +=
                (vi * vi.transpose()) / (cur.power_slack * cur.power_slack);

            // -log(rate - rbar)
            if (data.rate_active) {
                const Eigen::MatrixXcd k = rate_gradient_matrix(cur.w, h, noise);
                const Eigen::MatrixXcd gr = k / std::log(2.0);
                const Eigen::VectorXd u = data.par.grad_vec(gr);
                grad.tail(wdim) -= u / cur.rate_slack;
                hess.bottomRightCorner(wdim, wdim) +=
                    (u * u.transpose()) / (cur.rate_slack * cur.rate_slack);
                hess.bottomRightCorner(wdim, wdim) +=
                    data.par.quad_form(k, k) / (std::log(2.0) * cur.rate_slack);
            }

            // Newton step, Jacobi-scaled: the t block carries tau^2-sized
            // curvature while the W block stays O(1), so equilibrate first.
            const Eigen::VectorXd dscale =
                hess.diagonal().cwiseMax(1e-300).cwiseSqrt();
            Eigen::MatrixXd hs =
                hess.array() / (dscale * dscale.transpose()).array();
            const Eigen::VectorXd gs = grad.cwiseQuotient(dscale);
            Eigen::LDLT<Eigen::MatrixXd> ldlt(hs);
            Eigen::VectorXd step_s = -ldlt.solve(gs);
            double decrement2 = -gs.dot(step_s);
            if (!(decrement2 > 0.0) || ldlt.info() != Eigen::Success) {
                hs.diagonal().array() += 1e-12;
                ldlt.compute(hs);
                step_s = -ldlt.solve(gs);
                decrement2 = -gs.dot(step_s);
                if (!(decrement2 > 0.0))
                    throw SolverError("solve_p3: Newton step failed", decrement2);
            }
            const Eigen::VectorXd step = step_s.cwiseQuotient(dscale);
            if (decrement2 * 0.5 <= opts.newton_tol) break;

            const double f0 = -tau * t + data.barrier(cur);
            double alpha = 1.0;
            bool moved = false;
            for (int ls = 0; ls < 60; ++ls) {
                const double t_new = t + alpha * step[0];
                const Eigen::VectorXd wv_new = wv + alpha * step.tail(data.par.dim);
                const Slacks cand = data.eval(t_new, wv_new);
                if (cand.feasible) {
                    const double f_new = -tau * t_new + data.barrier(cand);
                    if (f_new <= f0 - 1e-4 * alpha * decrement2) {
                        t = t_new;
                        wv = wv_new;
                        cur = cand;
                        moved = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if (!moved) break;  // at numerical floor for this tau
        }
        if (static_cast<double>(n_constraints) / tau <=
            opts.gap_rel * std::abs(t) + opts.gap_abs)
            break;
        tau *= opts.tau_growth;
        if (outer + 1 == opts.max_outer)
            throw SolverError("solve_p3: barrier did not reach the target gap",
                              static_cast<double>(n_constraints) / tau);
    }

    // duals from the final central point (scaled problem)
    const double inv_det = 1.0 / cur.b_det;
    const cxd zb11(cur.b22 * inv_det / tau, 0.0);
    const cxd zb12 = -cur.b12 * inv_det / tau;
    const double z1 = zb11.real();
    const cxd z2 = zb12 / z1;  // normalized so the (1,1) multiplier is one
    const double mu_p_scaled = 1.0 / (tau * cur.power_slack);
    const double mu_r_scaled = data.rate_active ? 1.0 / (tau * cur.rate_slack) : 0.0;

    // stationarity residual of the scaled Lagrangian
    Eigen::MatrixXcd d_mat = data.a12 + z2 * data.a3.adjoint() + std::conj(z2) * data.a3 +
                             std::norm(z2) * data.a4;
    Eigen::MatrixXcd stat = d_mat + cur.w_inv / tau -
                            mu_p_scaled * Eigen::MatrixXcd::Identity(nt, nt);
    if (data.rate_active)
        stat += mu_r_scaled * rate_gradient_matrix(cur.w, h, noise) / std::log(2.0);
    const double t_scale = std::max(1.0, std::abs(t));
    double kkt = stat.norm() / std::max(1.0, d_mat.norm());
    kkt = std::max(kkt, std::abs(1.0 - z1));
    kkt = std::max(kkt, (2.0 / tau) / t_scale);                      // tr(Z_B B)
    kkt = std::max(kkt, (static_cast<double>(nt) / tau) / t_scale);  // tr(Z_W W)
    kkt = std::max(kkt, mu_p_scaled * cur.power_slack / t_scale);
    if (data.rate_active) kkt = std::max(kkt, mu_r_scaled * cur.rate_slack / t_scale);

    res.w = cur.w;
    res.t_star = t * sensing_scale;
    res.pcrb_value = pcrb(res.w, m, env);
    res.pcrb_upper_value = pcrb_upper(res.w, m, env);
    res.rate_value = cur.rate_value;
    res.mu_p = mu_p_scaled * sensing_scale;
    res.mu_r = mu_r_scaled * sensing_scale;
    res.z2 = z2;
    res.kkt_residual = kkt;
    res.rank_w = rank_diagnostics(res.w).first;
    res.iterations = total_newton;
    return res;
}

}  // namespace isac
