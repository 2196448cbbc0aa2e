#pragma once

// Reference computations written independently of the library code paths.

#include "toeplab/symbol.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace oracle {

using cplx = std::complex<double>;

inline toeplab::Symbol random_real_symbol(std::mt19937_64& rng, int bw) {
    std::normal_distribution<double> nd;
    std::vector<std::pair<toeplab::MultiIndex, cplx>> e;
    e.push_back({{0}, cplx(nd(rng), 0.0)});
    for (int k = 1; k <= bw; ++k) {
        const cplx c(nd(rng), nd(rng));
        e.push_back({{k}, c});
        e.push_back({{-k}, std::conj(c)});
    }
    return toeplab::Symbol::from_coefficients(e, 1);
}

// Fourier coefficient by trapezoid quadrature of f on M points.
template <class F>
cplx fourier_coeff(F f, int m, int M = 256) {
    cplx s = 0;
    for (int j = 0; j < M; ++j) {
        const double th = 2.0 * M_PI * j / M;
        s += f(th) * std::polar(1.0, -m * th);
    }
    return s / double(M);
}

// Dense Toeplitz matrix with (n, k) entry c(n - k), 0-based.
template <class C>
Eigen::MatrixXcd toeplitz(C c, int N) {
    Eigen::MatrixXcd T(N, N);
    for (int n = 0; n < N; ++n)
        for (int k = 0; k < N; ++k) T(n, k) = c(n - k);
    return T;
}

// Sturm count: eigenvalues of the symmetric tridiagonal (diag a, offdiag b) below x.
inline int sturm_below(const std::vector<double>& a, const std::vector<double>& b, double x) {
    int count = 0;
    double q = a[0] - x;
    if (q < 0) ++count;
    for (std::size_t i = 1; i < a.size(); ++i) {
        if (q == 0) q = 1e-300;
        q = a[i] - x - b[i - 1] * b[i - 1] / q;
        if (q < 0) ++count;
    }
    return count;
}

// Largest eigenvalue of T_{2cos} + beta e_1 e_1^T at truncation N, by bisection on the Sturm count.
inline double rank1_top_eigenvalue(double beta, int N) {
    std::vector<double> a(N, 0.0), b(N - 1, 1.0);
    a[0] = beta;
    double lo = -3.0, hi = 3.0 + std::fabs(beta) + 1.0 / std::max(std::fabs(beta), 1e-3);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (sturm_below(a, b, mid) >= N) hi = mid; else lo = mid;
    }
    return 0.5 * (lo + hi);
}

// sqrt(1 + sum n^2 J_n(2t)^2): ||psi(t)||_X for psi(0) = e_0 under the lattice L_{2cos}.
inline double free_lattice_xnorm(double t) {
    double s = 1.0;
    for (int n = 1; n < 4 * int(t) + 60; ++n) {
        const double j = std::cyl_bessel_j(double(n), 2.0 * t);
        s += 2.0 * double(n) * n * j * j;
    }
    return std::sqrt(s);
}

}  // namespace oracle
