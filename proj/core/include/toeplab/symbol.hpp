#pragma once

#include <complex>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace toeplab {

using cplx = std::complex<double>;
using MultiIndex = std::vector<int>;

// Band-limited function on the d-torus held by its Fourier coefficients:
//   f(theta) = sum_alpha c_alpha exp(i alpha . theta)
class Symbol {
public:
    Symbol() : Symbol(1) {}
    explicit Symbol(int dim);

    static Symbol from_coefficients(const std::vector<std::pair<MultiIndex, cplx>>& entries, int dim);
    static Symbol constant(double value, int dim = 1);

    int dim() const { return dim_; }
    const std::map<MultiIndex, cplx>& coeffs() const { return coeffs_; }
    cplx coeff(const MultiIndex& alpha) const;
    cplx coeff(int n) const { return coeff(MultiIndex{n}); }

    std::vector<int> bandwidth() const;
    int max_bandwidth() const;
    bool is_real() const { return real_; }
    bool is_constant() const;
    bool is_zero() const { return coeffs_.empty(); }

    cplx operator()(std::span<const double> theta) const;
    cplx operator()(double theta) const;
    double real_at(std::span<const double> theta) const { return (*this)(theta).real(); }

    // sum |alpha|^k |c_alpha|, a bound on every k-th order derivative.
    double derivative_bound(int k) const;
    double sup_bound() const { return derivative_bound(0); }

    // Internal constructor for derived symbols; real_tol is the realness tolerance.
    Symbol(int dim, std::map<MultiIndex, cplx> coeffs, double real_tol);

private:
    void finalize(double real_tol);

    int dim_;
    std::map<MultiIndex, cplx> coeffs_;
    bool real_ = true;
};

inline constexpr double kPruneThreshold = 1e-14;

using TorusFunction = std::function<cplx(std::span<const double>)>;

Symbol sample_fourier(const TorusFunction& evaluator, std::vector<int> bandwidth, std::vector<int> grid,
                      double prune = kPruneThreshold);
Symbol derivative(const Symbol& s, int axis = 0);
Symbol multiply(const Symbol& a, const Symbol& b);
Symbol add(const Symbol& a, const Symbol& b);
Symbol scale(const Symbol& a, cplx factor);
// conj(f(theta)), coefficients c'_alpha = conj(c_{-alpha}).
Symbol conjugate(const Symbol& a);
// f(-theta), coefficients c'_alpha = c_{-alpha}.
Symbol reflect(const Symbol& a);
std::vector<Symbol> gradient(const Symbol& s);
// sum_j (d_j f)^2 for real f.
Symbol grad_norm_sq(const Symbol& s);

std::string to_text(const Symbol& s);
Symbol from_text(const std::string& text);

struct CriticalSet {
    std::vector<std::vector<double>> points;
    std::vector<bool> degenerate;
    double resolution = 0.0;
    double tol = 0.0;
    bool is_exhaustive = false;
};

CriticalSet critical_set(const Symbol& s, int initial_grid = 0, double tol = 1e-10);
std::vector<double> thresholds(const Symbol& s, const CriticalSet& k);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    double width() const { return hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }
};

struct EnlargementRow {
    double margin = 0.0;  // absolute enlargement on each side
    double c = 0.0;
    double C = 0.0;
};

struct MourreConstants {
    Interval lambda;
    double c = 0.0;
    double C = 0.0;
    double c_sharp = 0.0;
    double C_flat = 0.0;
    double preimage_measure = 0.0;
    std::vector<EnlargementRow> table;
};

inline const std::vector<double> kDefaultEnlargements{0.1, 0.05, 0.02, 0.01};

MourreConstants mourre_constants(const Symbol& f, const Symbol& g, Interval lambda, int grid = 0,
                                 const std::vector<double>& enlargements = kDefaultEnlargements);

}  // namespace toeplab
