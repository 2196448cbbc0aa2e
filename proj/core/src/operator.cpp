#include "toeplab/operator.hpp"

#include "detail.hpp"
#include "toeplab/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace toeplab {

long Space::dim() const {
    if (is_half_line()) return N;
    long s = 1;
    for (int j = 0; j < d; ++j) s *= 2L * N + 1;
    return s;
}

std::vector<int> Space::coords(long index) const {
    if (is_half_line()) return {int(index) + 1};
    std::vector<int> c(d);
    const long side = 2L * N + 1;
    for (int j = d - 1; j >= 0; --j) {
        c[j] = int(index % side) - N;
        index /= side;
    }
    return c;
}

long Space::index_of(const std::vector<int>& c) const {
    if (is_half_line()) return c[0] - 1;
    const long side = 2L * N + 1;
    long idx = 0;
    for (int j = 0; j < d; ++j) idx = idx * side + (c[j] + N);
    return idx;
}

int Space::edge_distance(long index) const {
    if (is_half_line()) return N - int(index + 1);
    int m = 0;
    for (int x : coords(index)) m = std::max(m, std::abs(x));
    return N - m;
}

std::string Space::describe() const {
    if (is_half_line()) return "halfline:" + std::to_string(N);
    return "lattice:" + std::to_string(d) + ":" + std::to_string(N);
}

OperatorMatrix::OperatorMatrix(Space space, Matrix data, std::string label)
    : space_(space), data_(std::move(data)), label_(std::move(label)) {
    if (data_.rows() != data_.cols() || data_.rows() != space_.dim())
        throw Error("operator matrix shape does not match its space " + space_.describe());
    const double scale = data_.size() ? data_.cwiseAbs().maxCoeff() : 0.0;
    const double asym = data_.size() ? (data_ - data_.adjoint()).cwiseAbs().maxCoeff() : 0.0;
    hermitian_ = asym <= 1e-13 * scale;
    if (hermitian_ && asym > 0.0) data_ = (0.5 * (data_ + data_.adjoint())).eval();
}

namespace {

Matrix toeplitz_data(const Symbol& f, int N) {
    Matrix M = Matrix::Zero(N, N);
    for (const auto& [a, c] : f.coeffs()) {
        const int m = a[0];
        for (int n = std::max(0, m); n < N && n - m < N; ++n) M(n, n - m) = c;
    }
    return M;
}

Matrix hankel_data(const Symbol& f, int N) {
    Matrix M = Matrix::Zero(N, N);
    for (const auto& [a, c] : f.coeffs()) {
        const int m = a[0];
        if (m < 1) continue;
        // 1-based n + k - 1 = m, i.e. 0-based n + k = m - 1
        for (int n = 0; n <= m - 1 && n < N; ++n) {
            const int k = m - 1 - n;
            if (k < N) M(n, k) = c;
        }
    }
    return M;
}

Matrix laurent_data(const Symbol& f, const Space& sp, Boundary boundary) {
    const long dim = sp.dim();
    const int side = 2 * sp.N + 1;
    Matrix M = Matrix::Zero(dim, dim);
    for (long row = 0; row < dim; ++row) {
        const auto beta = sp.coords(row);
        for (const auto& [a, c] : f.coeffs()) {
            std::vector<int> col(sp.d);
            bool inside = true;
            for (int j = 0; j < sp.d; ++j) {
                int x = beta[j] - a[j];
                if (boundary == Boundary::Periodic) {
                    x = ((x + sp.N) % side + side) % side - sp.N;
                } else if (std::abs(x) > sp.N) {
                    inside = false;
                    break;
                }
                col[j] = x;
            }
            if (inside) M(row, sp.index_of(col)) += c;
        }
    }
    return M;
}

void require_d1(const Symbol& f, const char* what) {
    if (f.dim() != 1) throw Error(std::string(what) + " requires a one-dimensional symbol");
}

}  // namespace

OperatorMatrix toeplitz_matrix(const Symbol& f, int N) {
    require_d1(f, "toeplitz_matrix");
    if (N < 1) throw Error("toeplitz_matrix requires N >= 1");
    return {Space::half_line(N), toeplitz_data(f, N), "T_f"};
}

OperatorMatrix laurent_matrix(const Symbol& f, int N, Boundary boundary) {
    if (N < 0) throw Error("laurent_matrix requires N >= 0");
    const Space sp = Space::lattice(f.dim(), N);
    if (boundary == Boundary::Periodic) {
        for (int b : f.bandwidth())
            if (2 * N + 1 <= 2 * b + 1)
                throw Error("periodic box of side " + std::to_string(2 * N + 1) + " too small for bandwidth " +
                            std::to_string(b));
    }
    return {sp, laurent_data(f, sp, boundary), boundary == Boundary::Periodic ? "L_f(periodic)" : "L_f"};
}

OperatorMatrix hankel_matrix(const Symbol& f, int N) {
    require_d1(f, "hankel_matrix");
    if (N < 1) throw Error("hankel_matrix requires N >= 1");
    return {Space::half_line(N), hankel_data(f, N), "H_f"};
}

OperatorMatrix position_matrix(const Space& space, int axis) {
    if (axis < 0 || axis >= space.d) throw Error("position axis out of range");
    const long dim = space.dim();
    Matrix M = Matrix::Zero(dim, dim);
    for (long i = 0; i < dim; ++i) M(i, i) = double(space.coords(i)[axis]);
    return {space, std::move(M), space.is_half_line() ? "X" : "X_" + std::to_string(axis + 1)};
}

OperatorMatrix conjugate_operator(const Symbol& g, const Space& space) {
    if (!space.is_half_line()) return conjugate_operator(std::vector<Symbol>{g}, space);
    if (!g.is_real()) throw Error("conjugate_operator requires a real-valued symbol");
    require_d1(g, "conjugate_operator");
    const int N = space.N;
    Matrix T = toeplitz_data(g, N);
    // (T X + X T)/2 has entries (n + k)/2 * T(n,k) with 1-based n, k
    for (int n = 0; n < N; ++n)
        for (int k = 0; k < N; ++k) T(n, k) *= 0.5 * double(n + k + 2);
    return {space, std::move(T), "A_g"};
}

OperatorMatrix conjugate_operator(const std::vector<Symbol>& g, const Space& space, Boundary boundary) {
    if (space.is_half_line()) {
        if (g.size() != 1) throw Error("half-line conjugate operator takes one symbol");
        return conjugate_operator(g[0], space);
    }
    if (static_cast<int>(g.size()) != space.d) throw Error("lattice conjugate operator needs one symbol per axis");
    const long dim = space.dim();
    Matrix acc = Matrix::Zero(dim, dim);
    for (int j = 0; j < space.d; ++j) {
        if (!g[j].is_real()) throw Error("conjugate_operator requires real-valued symbols");
        if (g[j].dim() != space.d) throw Error("conjugate_operator: symbol dimension mismatch");
        Matrix L = laurent_data(g[j], space, boundary);
        std::vector<double> x(dim);
        for (long i = 0; i < dim; ++i) x[i] = space.coords(i)[j];
        for (long c = 0; c < dim; ++c)
            for (long r = 0; r < dim; ++r)
                if (L(r, c) != cplx(0.0)) acc(r, c) += 0.5 * (x[r] + x[c]) * L(r, c);
    }
    return {space, std::move(acc), "A_g(lattice)"};
}

OperatorMatrix commutator(const OperatorMatrix& A, const OperatorMatrix& B) {
    if (!(A.space() == B.space())) throw Error("commutator: space mismatch");
    Matrix C = A.data() * B.data() - B.data() * A.data();
    return {A.space(), std::move(C), "[" + A.label() + "," + B.label() + "]"};
}

OperatorMatrix icommutator(const OperatorMatrix& A, const OperatorMatrix& B) {
    if (!(A.space() == B.space())) throw Error("commutator: space mismatch");
    Matrix C = cplx(0, 1) * (A.data() * B.data() - B.data() * A.data());
    return {A.space(), std::move(C), "i[" + A.label() + "," + B.label() + "]"};
}

OperatorMatrix sum(const OperatorMatrix& A, const OperatorMatrix& B, const std::string& label) {
    if (!(A.space() == B.space())) throw Error("sum: space mismatch");
    return {A.space(), A.data() + B.data(), label.empty() ? A.label() + "+" + B.label() : label};
}

OperatorMatrix compress(const std::function<Matrix(int)>& build, int N, int pad, const std::string& label) {
    Matrix big = build(N + pad);
    return {Space::half_line(N), big.topLeftCorner(N, N), label};
}

Matrix hankel_correction(const Symbol& f, const Symbol& g, int N) {
    require_d1(f, "hankel_correction");
    require_d1(g, "hankel_correction");
    const int M = std::max(N, f.max_bandwidth() + g.max_bandwidth() + 1);
    Matrix prod = hankel_data(f, M) * hankel_data(reflect(g), M);
    return prod.topLeftCorner(N, N);
}

Matrix hankel_product_displayed(const Symbol& f, const Symbol& g, int N) {
    const int M = std::max(N, f.max_bandwidth() + g.max_bandwidth() + 1);
    Matrix prod = hankel_data(conjugate(f), M).adjoint() * hankel_data(g, M);
    return prod.topLeftCorner(N, N);
}

double operator_norm(const Matrix& M) {
    if (M.size() == 0) return 0.0;
    Eigen::BDCSVD<Matrix> svd(M);
    return svd.singularValues()(0);
}

std::vector<double> singular_decay(const Matrix& M, int k) {
    if (k > std::min(M.rows(), M.cols())) throw Error("singular_decay: k exceeds dimension");
    Eigen::BDCSVD<Matrix> svd(M);
    const auto& s = svd.singularValues();
    return std::vector<double>(s.data(), s.data() + k);
}

std::vector<double> singular_decay(const OperatorMatrix& M, int k) { return singular_decay(M.data(), k); }

namespace detail {
Matrix toeplitz_raw(const Symbol& f, int N) { return toeplitz_data(f, N); }
Matrix hankel_raw(const Symbol& f, int N) { return hankel_data(f, N); }
Matrix laurent_raw(const Symbol& f, const Space& sp, Boundary b) { return laurent_data(f, sp, b); }
Matrix position_raw(const Space& sp, int axis) { return position_matrix(sp, axis).data(); }
}  // namespace detail

}  // namespace toeplab
