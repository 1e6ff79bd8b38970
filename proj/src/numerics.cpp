#include "isac/numerics.hpp"

#include <algorithm>
#include <numeric>

namespace isac {

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 2) throw std::invalid_argument("gauss_legendre: order must be >= 2");
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            // Legendre recurrence for P_n(x) and its derivative
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
}

double integrate_scalar(const std::function<double(double)>& f, double lo, double hi,
                        const QuadratureSpec& spec) {
    return integrate(f, lo, hi, spec);
}

std::complex<double> integrate_complex(const std::function<std::complex<double>(double)>& f,
                                       double lo, double hi, const QuadratureSpec& spec) {
    return integrate(f, lo, hi, spec);
}

Eigen::MatrixXcd integrate_matrix(const std::function<Eigen::MatrixXcd(double)>& f, double lo,
                                  double hi, const QuadratureSpec& spec) {
    return integrate(f, lo, hi, spec);
}

HermitianEvd hermitian_evd(const Eigen::MatrixXcd& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("hermitian_evd: not square");
    const double asym = (m - m.adjoint()).norm();
    if (asym > 1e-10 * std::max(1.0, m.norm()))
        throw std::invalid_argument("hermitian_evd: input not Hermitian");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (m + m.adjoint()));
    if (es.info() != Eigen::Success)
        throw std::runtime_error("hermitian_evd: eigensolver failed");
    const Eigen::Index n = m.rows();
    HermitianEvd out;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.eigenvalues[i] = es.eigenvalues()[n - 1 - i];  // descending
        out.eigenvectors.col(i) = es.eigenvectors().col(n - 1 - i);
    }
    return out;
}

ReducedSvd reduced_svd(const Eigen::MatrixXcd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    ReducedSvd out;
    out.u = svd.matrixU();
    out.singular_values = svd.singularValues();
    out.v = svd.matrixV();
    return out;
}

Eigen::MatrixXcd psd_inv_sqrt(const Eigen::MatrixXcd& m) {
    const HermitianEvd evd = hermitian_evd(m);
    const double max_eig = evd.eigenvalues[0];
    const double min_eig = evd.eigenvalues[evd.eigenvalues.size() - 1];
    if (!(max_eig > 0.0) || min_eig <= 1e-12 * max_eig)
        throw std::invalid_argument("psd_inv_sqrt: input not strictly positive definite");
    Eigen::VectorXd inv_sqrt = evd.eigenvalues.array().sqrt().inverse();
    return evd.eigenvectors * inv_sqrt.asDiagonal() * evd.eigenvectors.adjoint();
}

Eigen::VectorXd water_filling(const Eigen::VectorXd& gains, double budget, double noise) {
    const Eigen::Index n = gains.size();
    if (n == 0) throw std::invalid_argument("water_filling: empty gains");
    if (!(budget > 0.0) || !(noise > 0.0))
        throw std::invalid_argument("water_filling: budget and noise must be positive");
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(gains[i] > 0.0))
            throw std::invalid_argument("water_filling: gains must be positive");

    const auto allocated = [&](double nu) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) s += std::max(nu - noise / gains[i], 0.0);
        return s;
    };
    double lo = 0.0;
    double hi = budget + noise / gains.minCoeff();  // allocates >= budget
    for (int it = 0; it < 200 && (allocated(hi) - budget) > 1e-10; ++it) hi *= 2.0;
    for (int it = 0; it < 300; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (allocated(mid) < budget)
            lo = mid;
        else
            hi = mid;
        if (std::abs(allocated(0.5 * (lo + hi)) - budget) <= 1e-12 * std::max(1.0, budget))
            break;
    }
    const double nu = 0.5 * (lo + hi);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = std::max(nu - noise / gains[i], 0.0);
    // spread the residual over active levels so the sum hits the budget exactly
    const double resid = budget - v.sum();
    int active = 0;
    for (Eigen::Index i = 0; i < n; ++i) active += v[i] > 0.0 ? 1 : 0;
    if (active > 0) {
        const double bump = resid / active;
        for (Eigen::Index i = 0; i < n; ++i)
            if (v[i] > 0.0) v[i] = std::max(v[i] + bump, 0.0);
    }
    return v;
}

std::uint64_t split_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

int numerical_rank(const Eigen::VectorXd& eigenvalues, double tol) {
    if (eigenvalues.size() == 0) return 0;
    const double max_abs = eigenvalues.cwiseAbs().maxCoeff();
    if (max_abs == 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
        if (std::abs(eigenvalues[i]) > tol * max_abs) ++r;
    return r;
}

}  // namespace isac
