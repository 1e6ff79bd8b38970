#pragma once

#include "isac/model.hpp"

#include <Eigen/Dense>
#include <random>

namespace isac::test {

// Random PSD matrix with the given trace; rank spans 1..n across draws.
inline Eigen::MatrixXcd random_psd(int n, double trace, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> rank_pick(1, n);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int k = rank_pick(rng);
    Eigen::MatrixXcd g(n, k);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) g(i, j) = cxd(gauss(rng), gauss(rng));
    Eigen::MatrixXcd w = g * g.adjoint();
    w *= trace / w.real().trace();
    return 0.5 * (w + w.adjoint());
}

inline Eigen::MatrixXcd random_hermitian(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = cxd(gauss(rng), gauss(rng));
    return 0.5 * (a + a.adjoint());
}

inline Eigen::VectorXcd random_unit(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) v[i] = cxd(gauss(rng), gauss(rng));
    return v / v.norm();
}

inline Eigen::MatrixXcd random_channel(int rows, int cols, double entry_scale,
                                       std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXcd h(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            h(i, j) = entry_scale * cxd(gauss(rng), gauss(rng));
    return h;
}

// Small but nontrivial test scenario solving fast: Nt=4, Nr=5, Nu=2, K=2.
inline SystemConfig small_system() {
    SystemConfig cfg;
    cfg.n_tx = 4;
    cfg.n_rx = 5;
    cfg.n_user = 2;
    cfg.symbols = 16;
    cfg.power_w = 1.0;
    cfg.noise_comm_w = 1e-2;
    cfg.noise_sense_w = 1e-2;
    cfg.spacing_over_lambda = 0.5;
    cfg.bs_height_m = 10.0;
    cfg.target_range_m = 50.0;
    return cfg;
}

inline GaussianMixture small_prior() {
    GaussianMixture prior;
    prior.components = {{0.6, -0.5, 1e-2}, {0.4, 0.7, 1e-2}};
    return prior;
}

}  // namespace isac::test
