#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace isac {

/// Composite Gauss-Legendre rule with doubling-based refinement.
struct QuadratureSpec {
    int panels = 64;
    int nodes_per_panel = 16;
    double rel_tol = 1e-9;
    int max_refinements = 1;  // panel-count doublings allowed past the initial grid
};

/// Refinement hit the panel cap without meeting rel_tol. Carries the norms of
/// the last two estimates.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& msg, double coarse, double fine)
        : std::runtime_error(msg), coarse_estimate(coarse), fine_estimate(fine) {}
    double coarse_estimate;
    double fine_estimate;
};

/// Gauss-Legendre nodes and weights on [-1, 1], Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

namespace detail {
inline double integ_norm(double v) { return std::abs(v); }
inline double integ_norm(const std::complex<double>& v) { return std::abs(v); }
inline double integ_norm(const Eigen::MatrixXcd& v) { return v.norm(); }

template <class F>
auto panel_sum(F&& f, double lo, double hi, int panels, const std::vector<double>& x,
               const std::vector<double>& w, double& max_node_norm) -> decltype(f(lo)) {
    const double h = (hi - lo) / panels;
    auto acc = decltype(f(lo))(0.0 * f(lo));
    for (int p = 0; p < panels; ++p) {
        const double c = lo + (p + 0.5) * h;
        for (std::size_t k = 0; k < x.size(); ++k) {
            auto v = f(c + 0.5 * h * x[k]);
            max_node_norm = std::max(max_node_norm, integ_norm(v));
            acc += (0.5 * h * w[k]) * v;
        }
    }
    return acc;
}
}  // namespace detail

/// Composite Gauss-Legendre integration of a scalar- or matrix-valued
/// integrand over [lo, hi]. The panel count doubles until two successive
/// estimates agree to rel_tol (plus a roundoff floor tied to the integrand
/// scale) or the refinement cap is hit, in which case AccuracyError carries
/// both estimates.
template <class F>
auto integrate(F&& f, double lo, double hi, const QuadratureSpec& spec = {})
    -> decltype(f(lo)) {
    if (!(hi > lo)) throw std::invalid_argument("integrate: empty domain");
    if (spec.panels < 1 || spec.nodes_per_panel < 2 || spec.max_refinements < 1 ||
        spec.rel_tol <= 0.0)
        throw std::invalid_argument("integrate: bad quadrature spec");
    std::vector<double> x, w;
    gauss_legendre(spec.nodes_per_panel, x, w);

    double scale = 0.0;
    int panels = spec.panels;
    auto coarse = detail::panel_sum(f, lo, hi, panels, x, w, scale);
    for (int r = 0; r < spec.max_refinements; ++r) {
        panels *= 2;
        auto fine = detail::panel_sum(f, lo, hi, panels, x, w, scale);
        const double diff = detail::integ_norm(decltype(fine)(fine - coarse));
        const double floor = 1e-14 * scale * (hi - lo);
        if (diff <= spec.rel_tol * detail::integ_norm(fine) + floor) return fine;
        if (r + 1 == spec.max_refinements)
            throw AccuracyError(
                "integrate: no convergence at panel cap " + std::to_string(panels) +
                    " (last diff " + std::to_string(diff) + ")",
                detail::integ_norm(coarse), detail::integ_norm(fine));
        coarse = fine;
    }
    return coarse;  // unreachable; max_refinements >= 1
}

double integrate_scalar(const std::function<double(double)>& f, double lo, double hi,
                        const QuadratureSpec& spec = {});
std::complex<double> integrate_complex(const std::function<std::complex<double>(double)>& f,
                                       double lo, double hi, const QuadratureSpec& spec = {});
Eigen::MatrixXcd integrate_matrix(const std::function<Eigen::MatrixXcd(double)>& f, double lo,
                                  double hi, const QuadratureSpec& spec = {});

struct HermitianEvd {
    Eigen::VectorXd eigenvalues;   // descending
    Eigen::MatrixXcd eigenvectors; // columns aligned with eigenvalues
};

/// Dense Hermitian eigendecomposition; input checked Hermitian to 1e-10.
HermitianEvd hermitian_evd(const Eigen::MatrixXcd& m);

struct ReducedSvd {
    Eigen::MatrixXcd u;
    Eigen::VectorXd singular_values;  // descending
    Eigen::MatrixXcd v;
};

ReducedSvd reduced_svd(const Eigen::MatrixXcd& m);

/// M^{-1/2} for Hermitian positive definite M (min eig > 1e-12 * max eig).
Eigen::MatrixXcd psd_inv_sqrt(const Eigen::MatrixXcd& m);

/// Water-filling allocations v_i = (nu - noise/h_i)^+ with sum(v) = budget,
/// nu located by bisection to 1e-10 absolute on the power residual.
/// Allocations are returned in the order of the input gains.
Eigen::VectorXd water_filling(const Eigen::VectorXd& gains, double budget, double noise);

/// Count of eigenvalues above tol * max |eigenvalue|.
int numerical_rank(const Eigen::VectorXd& eigenvalues, double tol = 1e-6);

/// SplitMix64-style stream split: deterministic child seed for (base, index).
/// Workers drawing from split streams give results independent of scheduling.
std::uint64_t split_seed(std::uint64_t base, std::uint64_t index);

}  // namespace isac
