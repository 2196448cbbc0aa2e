#include "detail.hpp"
#include "toeplab/error.hpp"
#include "toeplab/operator.hpp"

#include <algorithm>
#include <cmath>

namespace toeplab {

namespace {

Matrix diag_position(int N) {
    Matrix X = Matrix::Zero(N, N);
    for (int n = 0; n < N; ++n) X(n, n) = double(n + 1);
    return X;
}

double block_max(const Matrix& D, int r0, int c0, int rows, int cols) {
    if (rows <= 0 || cols <= 0) return 0.0;
    return D.block(r0, c0, rows, cols).cwiseAbs().maxCoeff();
}

}  // namespace

DefectReport defect_report(const std::string& identity, const Matrix& D, int trim) {
    const int N = static_cast<int>(D.rows());
    const int inner = std::max(0, N - trim);
    DefectReport r;
    r.identity = identity;
    r.interior_size = trim;
    r.interior_max = block_max(D, 0, 0, inner, inner);
    r.boundary_max = std::max(block_max(D, inner, 0, N - inner, N), block_max(D, 0, inner, inner, N - inner));
    return r;
}

DefectReport sarason_defect(const Symbol& f, const Symbol& g, int N) {
    if (f.dim() != 1 || g.dim() != 1) throw Error("sarason_defect requires one-dimensional symbols");
    const Matrix Tf = detail::toeplitz_raw(f, N);
    const Matrix Tg = detail::toeplitz_raw(g, N);
    const Matrix Tfg = detail::toeplitz_raw(multiply(f, g), N);
    Matrix D = Tf * Tg - Tfg + hankel_correction(f, g, N);
    return defect_report("sarason", D, f.max_bandwidth() + g.max_bandwidth());
}

DefectReport position_commutator_defect(const Symbol& h, int N) {
    if (h.dim() != 1) throw Error("position_commutator_defect requires a one-dimensional symbol");
    const Matrix X = diag_position(N);
    const Matrix T = detail::toeplitz_raw(h, N);
    Matrix D = X * T - T * X + cplx(0, 1) * detail::toeplitz_raw(derivative(h), N);
    return defect_report("position-commutator", D, h.max_bandwidth());
}

OperatorMatrix commutator_formula_rhs(const Symbol& f, const Symbol& g, int N) {
    if (!f.is_real() || !g.is_real()) throw Error("commutator_formula_rhs requires real-valued symbols");
    if (f.dim() != 1 || g.dim() != 1) throw Error("commutator_formula_rhs requires one-dimensional symbols");
    const Symbol fp = derivative(f);
    const int pad = f.max_bandwidth() + g.max_bandwidth() + 2;
    auto build = [&](int M) {
        const Matrix Tg = detail::toeplitz_raw(g, M);
        const Matrix Tf = detail::toeplitz_raw(f, M);
        const Matrix Tfp = detail::toeplitz_raw(fp, M);
        const Matrix X = diag_position(M);
        const Matrix K = Tg * Tf - Tf * Tg;
        Matrix R = 0.5 * (Tg * Tfp + Tfp * Tg) + cplx(0, 0.5) * (K * X + X * K);
        return R;
    };
    return compress(build, N, pad, "commutator_formula_rhs");
}

DefectReport formula_defect(const Symbol& f, const Symbol& g, int N) {
    const OperatorMatrix rhs = commutator_formula_rhs(f, g, N);
    const Space sp = Space::half_line(N);
    const OperatorMatrix A = conjugate_operator(g, sp);
    const OperatorMatrix T = toeplitz_matrix(f, N);
    Matrix D = rhs.data() - icommutator(A, T).data();
    return defect_report("commutator-formula", D, f.max_bandwidth() + g.max_bandwidth());
}

OperatorMatrix commutator_position_sandwich(const Symbol& a, const Symbol& b, int N) {
    const int pad = a.max_bandwidth() + b.max_bandwidth() + 2;
    auto build = [&](int M) {
        const Matrix Ta = detail::toeplitz_raw(a, M);
        const Matrix Tb = detail::toeplitz_raw(b, M);
        const Matrix X = diag_position(M);
        const Matrix K = Ta * Tb - Tb * Ta;
        Matrix R = K * X + X * K;
        return R;
    };
    return compress(build, N, pad, "[Ta,Tb]X+X[Ta,Tb]");
}

HolderCheck holder_bound_check(const Symbol& f, const Symbol& g, const Weight& Phi, const Weight& Psi, int p, int q,
                               double alpha) {
    if (alpha <= 1.0) throw Error("holder_bound_check requires alpha > 1");
    if (p < 1 || q < 1) throw Error("holder_bound_check indices are 1-based");
    const double beta = alpha / (alpha - 1.0);
    const int M = std::max(p, q) + f.max_bandwidth() + g.max_bandwidth() + 2;
    const Matrix prod = detail::hankel_raw(f, M).adjoint() * detail::hankel_raw(g, M);
    HolderCheck out;
    out.lhs = std::abs(Phi(p) * Psi(q) * prod(p - 1, q - 1));
    double sf = 0.0, sg = 0.0;
    for (const auto& [a, c] : f.coeffs())
        if (a[0] >= p) sf += std::pow(std::abs(c), alpha);
    for (const auto& [a, c] : g.coeffs())
        if (a[0] >= q) sg += std::pow(std::abs(c), beta);
    out.rhs = std::fabs(Phi(p)) * std::fabs(Psi(q)) * std::pow(sf, 1.0 / alpha) * std::pow(sg, 1.0 / beta);
    return out;
}

}  // namespace toeplab
