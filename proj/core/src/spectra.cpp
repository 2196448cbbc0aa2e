#include "toeplab/spectra.hpp"

#include "toeplab/error.hpp"
#include "toeplab/parallel.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace toeplab {

namespace {

bool is_tridiagonal(const Matrix& M) {
    const long n = M.rows();
    for (long c = 0; c < n; ++c)
        for (long r = 0; r < n; ++r)
            if (std::abs(r - c) > 1 && M(r, c) != cplx(0.0)) return false;
    return true;
}

}  // namespace

SpectralData eigh(const OperatorMatrix& H) {
    if (!H.hermitian()) throw Error("eigh requires a Hermitian operator (" + H.label() + ")");
    const Matrix& M = H.data();
    SpectralData sd;
    sd.space = H.space();
    sd.source_label = H.label();
    if (M.imag().cwiseAbs().maxCoeff() == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M.real());
        sd.eigenvalues = es.eigenvalues();
        sd.eigenvectors = es.eigenvectors().cast<cplx>();
    } else if (is_tridiagonal(M)) {
        // A Hermitian tridiagonal matrix is diagonally unitarily equivalent to a real symmetric one.
        const long n = M.rows();
        Vector phase(n);
        phase[0] = 1.0;
        for (long k = 0; k + 1 < n; ++k) {
            const cplx h = M(k + 1, k);
            phase[k + 1] = std::abs(h) > 0 ? phase[k] * h / std::abs(h) : phase[k];
        }
        Eigen::MatrixXd R = Eigen::MatrixXd::Zero(n, n);
        for (long k = 0; k < n; ++k) {
            R(k, k) = M(k, k).real();
            if (k + 1 < n) R(k + 1, k) = R(k, k + 1) = std::abs(M(k + 1, k));
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R);
        sd.eigenvalues = es.eigenvalues();
        sd.eigenvectors = phase.asDiagonal() * es.eigenvectors().cast<cplx>();
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> es(M);
        sd.eigenvalues = es.eigenvalues();
        sd.eigenvectors = es.eigenvectors();
    }
    return sd;
}

std::vector<bool> edge_mask(const Space& space, double fraction) {
    const long dim = space.dim();
    const int shell = std::max(1, static_cast<int>(std::ceil(fraction * space.N)));
    std::vector<bool> mask(dim);
    for (long i = 0; i < dim; ++i) mask[i] = space.edge_distance(i) < shell;
    return mask;
}

double boundary_leakage(const Space& space, const Vector& v, double fraction) {
    const auto mask = edge_mask(space, fraction);
    double m = 0.0, total = 0.0;
    for (long i = 0; i < v.size(); ++i) {
        const double w = std::norm(v[i]);
        total += w;
        if (mask[i]) m += w;
    }
    return total > 0 ? m / total : 0.0;
}

double Bump::operator()(double x) const {
    const double lo = support.lo, hi = support.hi;
    if (x < lo || x > hi) return 0.0;
    const double w = 0.5 * (1.0 - plateau) * (hi - lo);
    if (w <= 0.0) return 1.0;
    auto step = [](double t) { return t * t * t * (10.0 + t * (-15.0 + 6.0 * t)); };
    if (x < lo + w) return step((x - lo) / w);
    if (x > hi - w) return step((hi - x) / w);
    return 1.0;
}

OperatorMatrix spectral_projector(const SpectralData& sd, Interval lambda) {
    const long n = sd.eigenvectors.rows();
    std::vector<long> idx;
    for (long i = 0; i < sd.eigenvalues.size(); ++i)
        if (lambda.contains(sd.eigenvalues[i])) idx.push_back(i);
    Matrix Vs(n, static_cast<long>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) Vs.col(j) = sd.eigenvectors.col(idx[j]);
    Matrix P = Vs * Vs.adjoint();
    return {sd.space, std::move(P), "E_Lambda(" + sd.source_label + ")"};
}

OperatorMatrix smoothed_function(const SpectralData& sd, const std::function<double(double)>& phi) {
    Eigen::VectorXd w(sd.eigenvalues.size());
    for (long i = 0; i < w.size(); ++i) w[i] = phi(sd.eigenvalues[i]);
    Matrix P = sd.eigenvectors * w.cast<cplx>().asDiagonal() * sd.eigenvectors.adjoint();
    return {sd.space, std::move(P), "Phi(" + sd.source_label + ")"};
}

EigenvalueCountReport count_eigenvalues(const HamiltonianBuilder& builder, Interval lambda,
                                        const std::vector<int>& ladder, const std::vector<double>& thresholds,
                                        int threads) {
    EigenvalueCountReport rep;
    rep.lambda = lambda;
    rep.ladder = ladder;
    rep.counts.assign(ladder.size(), 0);
    rep.eigenvalues.assign(ladder.size(), {});
    rep.distance_to_thresholds = std::numeric_limits<double>::infinity();
    for (double t : thresholds) {
        const double d = t < lambda.lo ? lambda.lo - t : t > lambda.hi ? t - lambda.hi : 0.0;
        rep.distance_to_thresholds = std::min(rep.distance_to_thresholds, d);
    }
    rep.threshold_warning = rep.distance_to_thresholds <= 0.0;

    auto rung = [&](std::size_t i) {
        const SpectralData sd = eigh(builder(ladder[i]));
        std::vector<double> found;
        for (long k = 0; k < sd.eigenvalues.size(); ++k) {
            if (!lambda.contains(sd.eigenvalues[k])) continue;
            if (boundary_leakage(sd.space, sd.eigenvectors.col(k)) < kLeakageThreshold)
                found.push_back(sd.eigenvalues[k]);
        }
        rep.counts[i] = static_cast<int>(found.size());
        rep.eigenvalues[i] = std::move(found);
    };
    parallel_for(ladder.size(), threads, rung);

    const std::size_t L = ladder.size();
    if (L >= 3 && rep.counts[L - 1] == rep.counts[L - 2] && rep.counts[L - 2] == rep.counts[L - 3])
        rep.stabilized_count = rep.counts[L - 1];
    if (L > 0) {
        const auto& ev = rep.eigenvalues[L - 1];
        for (std::size_t i = 0; i < ev.size();) {
            std::size_t j = i + 1;
            while (j < ev.size() && ev[j] - ev[j - 1] < 1e-8) ++j;
            rep.multiplicities.push_back(static_cast<int>(j - i));
            i = j;
        }
    }
    return rep;
}

double virial_check(const SpectralData& sd, const OperatorMatrix& C, double leakage_filter) {
    if (!(sd.space == C.space())) throw Error("virial_check: space mismatch");
    const Matrix CV = C.data() * sd.eigenvectors;
    double m = 0.0;
    for (long k = 0; k < sd.eigenvectors.cols(); ++k) {
        if (leakage_filter < 1.0 && boundary_leakage(sd.space, sd.eigenvectors.col(k)) >= leakage_filter) continue;
        m = std::max(m, std::abs(sd.eigenvectors.col(k).dot(CV.col(k))));
    }
    return m;
}

}  // namespace toeplab
