#include "toeplab/error.hpp"
#include "toeplab/spectra.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace toeplab {

double lanczos_norm(const std::function<Vector(const Vector&)>& apply,
                    const std::function<Vector(const Vector&)>& apply_adj, long dim, int max_iter, double rtol) {
    if (dim == 0) return 0.0;
    const int m = static_cast<int>(std::min<long>(max_iter, dim));
    std::vector<Vector> basis;
    std::vector<double> alpha, beta;
    Vector v(dim);
    for (long i = 0; i < dim; ++i) v[i] = cplx(1.0 + 0.5 * std::sin(1.0 + i), 0.25 * std::cos(3.0 * i));
    v.normalize();
    double prev = -1.0, est = 0.0;
    for (int it = 0; it < m; ++it) {
        basis.push_back(v);
        Vector w = apply_adj(apply(v));
        const double a = v.dot(w).real();
        alpha.push_back(a);
        for (const Vector& q : basis) w -= q.dot(w) * q;
        for (const Vector& q : basis) w -= q.dot(w) * q;
        const double b = w.norm();

        const int k = static_cast<int>(alpha.size());
        Eigen::MatrixXd T = Eigen::MatrixXd::Zero(k, k);
        for (int i = 0; i < k; ++i) {
            T(i, i) = alpha[i];
            if (i + 1 < k) T(i, i + 1) = T(i + 1, i) = beta[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
        est = es.eigenvalues()[k - 1];
        if (prev >= 0 && std::fabs(est - prev) <= rtol * std::fabs(est)) break;
        prev = est;
        if (b <= 1e-14 * std::max(1.0, std::fabs(est))) break;
        beta.push_back(b);
        v = w / b;
    }
    return std::sqrt(std::max(0.0, est));
}

namespace {

// A^* B, with real GEMMs when either factor has zero imaginary part.
Matrix adjoint_times(const Matrix& A, const Matrix& B) {
    const bool a_real = A.imag().isZero(0.0), b_real = B.imag().isZero(0.0);
    if (b_real) {
        const Eigen::MatrixXd Br = B.real();
        Matrix out(A.cols(), B.cols());
        out.real() = A.real().transpose() * Br;
        if (!a_real) out.imag() = -(A.imag().transpose() * Br);
        else out.imag().setZero();
        return out;
    }
    if (a_real) {
        const Eigen::MatrixXd At = A.real().transpose();
        Matrix out(A.cols(), B.cols());
        out.real() = At * B.real();
        out.imag() = At * B.imag();
        return out;
    }
    return A.adjoint() * B;
}

}  // namespace

LapProfile lap_probe(const OperatorMatrix& H, const OperatorMatrix& A, double lambda, const std::vector<double>& etas) {
    if (!A.hermitian()) throw Error("lap_probe requires a Hermitian conjugate operator");
    if (!(H.space() == A.space())) throw Error("lap_probe: space mismatch");
    return lap_probe(eigh(H), eigh(A), lambda, etas);
}

LapProfile lap_probe(const SpectralData& sdH, const SpectralData& sdA, double lambda, const std::vector<double>& etas) {
    for (double e : etas)
        if (!(e > 0.0)) throw Error("lap_probe requires eta > 0");
    const long n = sdH.eigenvectors.rows();

    // In the eigenbasis of A the weighted resolvent is diag(wa) W diag(1/(z - l)) W^* diag(wa), W = V_A^* V_H.
    Eigen::VectorXd wa(sdA.eigenvalues.size());
    for (long i = 0; i < wa.size(); ++i) wa[i] = 1.0 / std::sqrt(1.0 + sdA.eigenvalues[i] * sdA.eigenvalues[i]);
    const Matrix G = wa.cast<cplx>().asDiagonal() * adjoint_times(sdA.eigenvectors, sdH.eigenvectors);

    LapProfile prof;
    prof.lambda = lambda;
    {
        const double width = sdH.eigenvalues[n - 1] - sdH.eigenvalues[0];
        const double win = 0.05 * width;
        std::vector<double> near;
        for (long i = 0; i < n; ++i) {
            const double l = sdH.eigenvalues[i];
            if (std::fabs(l - lambda) > win) continue;
            if (boundary_leakage(sdH.space, sdH.eigenvectors.col(i)) >= kLeakageThreshold) near.push_back(l);
        }
        if (near.size() >= 2) prof.floor = 10.0 * (near.back() - near.front()) / double(near.size() - 1);
    }

    for (double eta : etas) {
        const cplx z(lambda, eta);
        Vector d(n);
        for (long i = 0; i < n; ++i) d[i] = 1.0 / (z - sdH.eigenvalues[i]);
        auto apply = [&](const Vector& x) -> Vector { return G * d.cwiseProduct(G.adjoint() * x); };
        auto apply_adj = [&](const Vector& x) -> Vector { return G * d.conjugate().cwiseProduct(G.adjoint() * x); };
        LapPoint p;
        p.eta = eta;
        p.norm = lanczos_norm(apply, apply_adj, n);
        p.above_floor = eta >= prof.floor;
        prof.points.push_back(p);
    }
    return prof;
}

namespace {

void above_floor_logs(const LapProfile& p, std::vector<double>& x, std::vector<double>& y) {
    for (const auto& q : p.points)
        if (q.above_floor && q.norm > 0) {
            x.push_back(std::log10(q.eta));
            y.push_back(std::log10(q.norm));
        }
}

}  // namespace

double lap_slope(const LapProfile& p) {
    std::vector<double> x, y;
    above_floor_logs(p, x, y);
    if (x.size() < 2) return 0.0;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(x.size());
    my /= double(x.size());
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    return sxx > 0 ? sxy / sxx : 0.0;
}

double lap_variation_per_decade(const LapProfile& p) {
    std::vector<double> x, y;
    above_floor_logs(p, x, y);
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double decades = std::fabs(x[i + 1] - x[i]);
        if (decades <= 0) continue;
        const double rel = std::fabs(std::pow(10.0, y[i + 1] - y[i]) - 1.0);
        worst = std::max(worst, std::pow(1.0 + rel, 1.0 / decades) - 1.0);
    }
    return worst;
}

}  // namespace toeplab
