#pragma once

#include "toeplab/symbol.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace toeplab {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

struct Space {
    enum class Kind { HalfLine, Lattice };
    Kind kind = Kind::HalfLine;
    int d = 1;
    int N = 1;

    static Space half_line(int N) { return {Kind::HalfLine, 1, N}; }
    static Space lattice(int d, int N) { return {Kind::Lattice, d, N}; }

    bool is_half_line() const { return kind == Kind::HalfLine; }
    // N on the half-line, (2N+1)^d on a lattice box.
    long dim() const;
    // Coordinates of a basis index: n in 1..N on the half-line, alpha in {-N..N}^d (row-major) on a box.
    std::vector<int> coords(long index) const;
    long index_of(const std::vector<int>& coords) const;
    // Distance of a site to the truncation edge (N-edge on the half-line, box shell on lattices).
    int edge_distance(long index) const;
    bool operator==(const Space&) const = default;
    std::string describe() const;
};

enum class Boundary { Truncate, Periodic };

class OperatorMatrix {
public:
    OperatorMatrix(Space space, Matrix data, std::string label);

    const Space& space() const { return space_; }
    const Matrix& data() const { return data_; }
    bool hermitian() const { return hermitian_; }
    const std::string& label() const { return label_; }
    long dim() const { return data_.rows(); }

private:
    Space space_;
    Matrix data_;
    bool hermitian_ = false;
    std::string label_;
};

OperatorMatrix toeplitz_matrix(const Symbol& f, int N);
OperatorMatrix laurent_matrix(const Symbol& f, int N, Boundary boundary = Boundary::Truncate);
OperatorMatrix hankel_matrix(const Symbol& f, int N);
OperatorMatrix position_matrix(const Space& space, int axis = 0);
// A_g = (T_g X + X T_g)/2 on the half-line; on a box g lists one symbol per axis.
OperatorMatrix conjugate_operator(const Symbol& g, const Space& space);
OperatorMatrix conjugate_operator(const std::vector<Symbol>& g, const Space& space,
                                  Boundary boundary = Boundary::Truncate);
OperatorMatrix commutator(const OperatorMatrix& A, const OperatorMatrix& B);
// i[A,B], Hermitian when A and B are.
OperatorMatrix icommutator(const OperatorMatrix& A, const OperatorMatrix& B);
OperatorMatrix sum(const OperatorMatrix& A, const OperatorMatrix& B, const std::string& label = "");

// Exact N x N compression of an operator built from banded pieces: build at N + pad, keep the top-left block.
OperatorMatrix compress(const std::function<Matrix(int)>& build, int N, int pad, const std::string& label);

// P_N (T_{fg} - T_f T_g) P_N, the Hankel-product correction at the 1-edge.
Matrix hankel_correction(const Symbol& f, const Symbol& g, int N);
// The product H_{conj f}^* H_g with the displayed Hankel convention, for comparison.
Matrix hankel_product_displayed(const Symbol& f, const Symbol& g, int N);

struct DefectReport {
    std::string identity;
    double interior_max = 0.0;
    double boundary_max = 0.0;
    int interior_size = 0;
};

DefectReport defect_report(const std::string& identity, const Matrix& D, int trim);

DefectReport sarason_defect(const Symbol& f, const Symbol& g, int N);
// [X, T_h] + i T_{h'} at truncation.
DefectReport position_commutator_defect(const Symbol& h, int N);
// (T_g T_{f'} + T_{f'} T_g)/2 + (i/2)([T_g,T_f] X + X [T_g,T_f]), compressed from the infinite operator.
OperatorMatrix commutator_formula_rhs(const Symbol& f, const Symbol& g, int N);
// formula RHS minus i[A_g^(N), T_f^(N)].
DefectReport formula_defect(const Symbol& f, const Symbol& g, int N);
// [T_a, T_b] X + X [T_a, T_b], compressed.
OperatorMatrix commutator_position_sandwich(const Symbol& a, const Symbol& b, int N);

std::vector<double> singular_decay(const OperatorMatrix& M, int k);
std::vector<double> singular_decay(const Matrix& M, int k);

using Weight = std::function<double(double)>;
struct HolderCheck {
    double lhs = 0.0;
    double rhs = 0.0;
};
HolderCheck holder_bound_check(const Symbol& f, const Symbol& g, const Weight& Phi, const Weight& Psi, int p, int q,
                               double alpha);

double operator_norm(const Matrix& M);

// Binary export: 32-byte header (magic TMLB, u32 version, u32 space tag, u32 d, u64 N, u64 dim), then
// column-major float64 (re, im) pairs.
void export_binary(const OperatorMatrix& M, const std::string& path);
OperatorMatrix import_binary(const std::string& path, const std::string& label = "imported");
void export_csv(const OperatorMatrix& M, const std::string& path, double threshold = 1e-14);

}  // namespace toeplab
