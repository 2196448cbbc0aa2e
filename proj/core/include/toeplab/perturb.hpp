#pragma once

#include "toeplab/operator.hpp"

#include <string>
#include <vector>

namespace toeplab {

struct SequenceSpec {
    enum class Kind { Power, LogPower, Oscillatory, DyadicSteps, Explicit, Sparse };

    Kind kind = Kind::Power;
    double p = 1.0;
    std::vector<double> values;   // Explicit: gamma_1, gamma_2, ...; Sparse: values at support
    std::vector<long> support;    // Sparse only, 1-based
    long horizon = 0;             // largest index materialized; 0 means unbounded

    static SequenceSpec power(double p) { return {Kind::Power, p, {}, {}, 0}; }
    // 1 / log(n + 2)^p
    static SequenceSpec log_power(double p) { return {Kind::LogPower, p, {}, {}, 0}; }
    // (-1)^n / n^p
    static SequenceSpec oscillatory(double p) { return {Kind::Oscillatory, p, {}, {}, 0}; }
    // gamma_n = sum_{k >= n} s_k / k^(p+1) with s_k = (-1)^floor(log2 k): sign-alternating dyadic blocks
    static SequenceSpec dyadic_steps(double p) { return {Kind::DyadicSteps, p, {}, {}, 0}; }
    static SequenceSpec explicit_values(std::vector<double> v);
    static SequenceSpec sparse(std::vector<long> support, std::vector<double> values);

    static SequenceSpec parse(const std::string& text);
    std::string describe() const;

    // gamma_1 .. gamma_n
    std::vector<double> materialize(long n) const;
};

OperatorMatrix diagonal_potential(const SequenceSpec& spec, int N);
// Diagonal potential on a lattice box evaluated at 1 + max_j |alpha_j|.
OperatorMatrix diagonal_potential(const SequenceSpec& spec, const Space& space);

double seminorm_q(const SequenceSpec& spec, int k, long N);

enum class Condition { S, M, L, H, Gsah };
enum class Verdict { Converges, Diverges, Inconclusive };

std::string to_string(Condition c);
std::string to_string(Verdict v);
Condition parse_condition(const std::string& s);

struct TailFit {
    double exponent = 0.0;
    double r2 = 0.0;
    Verdict verdict = Verdict::Inconclusive;
    std::string rule;
};

struct AdmissibilityReport {
    Condition condition = Condition::S;
    double s = 0.0;  // gsah weight exponent
    double a = 1.0, b = 2.0;
    double r_max = 0.0;
    double r_max_used = 0.0;
    bool horizon_shrunk = false;
    double integral_estimate = 0.0;
    double tail_exponent = 0.0;
    double r2 = 0.0;
    Verdict verdict = Verdict::Inconclusive;
    std::string rule;
    // M and L side conditions
    double q_value = 0.0;
    bool q_stable = true;
    bool limit_ok = true;
    Verdict integral_verdict = Verdict::Inconclusive;
    std::vector<double> r, integrand;
};

inline constexpr double kVerdictMargin = 0.05;
inline constexpr double kMinR2 = 0.99;

std::vector<double> log_grid(double r_max, int per_decade = 40);
TailFit classify_tail(const std::vector<double>& r, const std::vector<double>& integrand, double r_max,
                      double min_r_max = 1e3);
bool limit_vanishes(const std::vector<double>& gamma);

AdmissibilityReport admissibility_check(const SequenceSpec& spec, Condition condition, double a = 1.0,
                                        double b = 2.0, double r_max = 1e4);

OperatorMatrix finite_rank(const std::vector<Vector>& vectors, const std::vector<double>& betas, int N);

AdmissibilityReport gsah_probe(const OperatorMatrix& V, double s, double a = 1.0, double b = 2.0,
                               double r_max = 1e4, int per_decade = 40);

Vector unit_vector(long dim, long index);

}  // namespace toeplab
