#include "toeplab/error.hpp"
#include "toeplab/spectra.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace toeplab {

std::string to_string(MourreVerdict v) {
    switch (v) {
        case MourreVerdict::Certified: return "certified";
        case MourreVerdict::BoundaryContaminated: return "boundary-contaminated";
        case MourreVerdict::Failed: return "failed";
    }
    return "?";
}

namespace {

// Sites whose position lies in the middle `fraction` of the half-line, or within fraction*N of the box center.
std::vector<long> interior_sites(const Space& sp, double fraction) {
    std::vector<long> out;
    const long dim = sp.dim();
    if (sp.is_half_line()) {
        const double lo = 0.5 * (1.0 - fraction) * sp.N, hi = 0.5 * (1.0 + fraction) * sp.N;
        for (long i = 0; i < dim; ++i)
            if (i + 1 > lo && i + 1 <= hi) out.push_back(i);
    } else {
        for (long i = 0; i < dim; ++i)
            if (sp.N - sp.edge_distance(i) <= fraction * sp.N) out.push_back(i);
    }
    return out;
}

constexpr double kProbeCutoff = 1e-2;

}  // namespace

MourreReport mourre_verify(const OperatorMatrix& H, const OperatorMatrix& C, Interval lambda,
                           const MourreConstants& constants, double interior_fraction, double tol_fraction) {
    return mourre_verify(eigh(H), C, lambda, constants, interior_fraction, tol_fraction);
}

MourreReport mourre_verify(const SpectralData& sd, const OperatorMatrix& C, Interval lambda,
                           const MourreConstants& constants, double interior_fraction, double tol_fraction) {
    if (!C.hermitian()) throw Error("mourre_verify requires a Hermitian commutator");
    if (!(sd.space == C.space())) throw Error("mourre_verify: space mismatch");
    if (!(interior_fraction > 0.0 && interior_fraction <= 1.0)) throw Error("interior_fraction must lie in (0, 1]");

    MourreReport rep;
    rep.lambda = lambda;
    rep.constants = constants;
    rep.N = sd.space.N;
    rep.interior_fraction = interior_fraction;
    rep.tol = tol_fraction * constants.c;

    const Bump phi{lambda, 0.5};
    std::vector<long> band;
    for (long i = 0; i < sd.eigenvalues.size(); ++i)
        if (phi(sd.eigenvalues[i]) > 0.0) band.push_back(i);
    if (band.empty()) {
        rep.verdict = MourreVerdict::Failed;
        rep.note = "no eigenvalue of the truncation inside the interval";
        return rep;
    }
    const long n = sd.eigenvectors.rows(), k = static_cast<long>(band.size());
    Matrix Vk(n, k);
    Eigen::VectorXd w(k);
    for (long j = 0; j < k; ++j) {
        Vk.col(j) = sd.eigenvectors.col(band[j]);
        w[j] = phi(sd.eigenvalues[band[j]]);
    }

    const Matrix CVk = C.data() * Vk;
    {
        const Matrix P = Vk.adjoint() * CVk;
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (P + P.adjoint()), Eigen::EigenvaluesOnly);
        rep.lambda_min_projected = es.eigenvalues()[0];
    }

    // span{Phi(H) e_j : j interior} = Vk * range(diag(w) Vk^* E)
    Matrix Q;
    for (double frac : {interior_fraction, 1.0}) {
        const auto sites = interior_sites(sd.space, frac);
        Matrix W(k, static_cast<long>(sites.size()));
        for (std::size_t j = 0; j < sites.size(); ++j) W.col(j) = w.cwiseProduct(Vk.row(sites[j]).adjoint());
        const Matrix G = W * W.adjoint();
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (G + G.adjoint()));
        const double top = es.eigenvalues().maxCoeff();
        std::vector<long> keep;
        for (long j = 0; j < k; ++j)
            if (top > 0 && es.eigenvalues()[j] > kProbeCutoff * kProbeCutoff * top) keep.push_back(j);
        if (!keep.empty()) {
            Matrix Y(k, static_cast<long>(keep.size()));
            for (std::size_t j = 0; j < keep.size(); ++j) Y.col(j) = es.eigenvectors().col(keep[j]);
            Q = Y;
            if (frac != interior_fraction) rep.note = "probe set enlarged to all sites";
            break;
        }
    }
    if (Q.size() == 0) {
        rep.verdict = MourreVerdict::BoundaryContaminated;
        rep.note = "rank-deficient probe span";
        return rep;
    }
    rep.n_test_vectors = static_cast<int>(Q.cols());

    // Rayleigh quotients of C on the test subspace Vk * Q.
    const Matrix R = Q.adjoint() * (Vk.adjoint() * CVk) * Q;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (R + R.adjoint()), Eigen::EigenvaluesOnly);
    rep.lambda_min_interior = es.eigenvalues()[0];
    rep.lambda_max_interior = es.eigenvalues()[es.eigenvalues().size() - 1];

    const Matrix basis = Vk * Q;
    const auto mask = edge_mask(sd.space);
    for (long j = 0; j < basis.cols(); ++j) {
        double edge = 0.0;
        for (long i = 0; i < n; ++i)
            if (mask[i]) edge += std::norm(basis(i, j));
        rep.boundary_leakage = std::max(rep.boundary_leakage, edge / basis.col(j).squaredNorm());
    }

    if (constants.c <= 1e-9) {
        rep.verdict = MourreVerdict::Failed;
        if (rep.note.empty()) rep.note = "c vanishes: no strict estimate on this interval";
    } else if (rep.boundary_leakage >= kLeakageThreshold) {
        rep.verdict = MourreVerdict::BoundaryContaminated;
    } else if (rep.lambda_min_interior >= constants.c - rep.tol) {
        rep.verdict = MourreVerdict::Certified;
    } else {
        rep.verdict = MourreVerdict::Failed;
    }
    return rep;
}

}  // namespace toeplab
