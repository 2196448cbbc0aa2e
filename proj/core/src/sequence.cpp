#include "toeplab/error.hpp"
#include "toeplab/perturb.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace toeplab {

namespace {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_double(const std::string& s) {
    std::size_t used = 0;
    double v;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw Error("not a number: '" + s + "'");
    }
    if (used != s.size()) throw Error("not a number: '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    return out;
}

double dyadic_sign(unsigned long k) { return (std::bit_width(k) - 1) % 2 == 0 ? 1.0 : -1.0; }

// sum_{k >= 2^J} s_k k^{-(p+1)}, one block per power of two, each block by the midpoint integral rule.
double dyadic_remainder(int J, double p) {
    double total = 0.0;
    for (int j = J; j < J + 200; ++j) {
        const double lo = std::ldexp(1.0, j) - 0.5, hi = std::ldexp(1.0, j + 1) - 0.5;
        const double block = (std::pow(lo, -p) - std::pow(hi, -p)) / p;
        total += (j % 2 == 0 ? 1.0 : -1.0) * block;
        if (block < 1e-300) break;
    }
    return total;
}

}  // namespace

SequenceSpec SequenceSpec::explicit_values(std::vector<double> v) {
    SequenceSpec s;
    s.kind = Kind::Explicit;
    s.values = std::move(v);
    return s;
}

SequenceSpec SequenceSpec::sparse(std::vector<long> support, std::vector<double> values) {
    if (support.size() != values.size()) throw Error("sparse sequence: support and values differ in length");
    for (long n : support)
        if (n < 1) throw Error("sparse sequence: support indices are 1-based");
    SequenceSpec s;
    s.kind = Kind::Sparse;
    s.support = std::move(support);
    s.values = std::move(values);
    return s;
}

SequenceSpec SequenceSpec::parse(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw Error("sequence spec needs kind:params, got '" + text + "'");
    const std::string kind = text.substr(0, colon), arg = text.substr(colon + 1);
    if (kind == "power") return power(parse_double(arg));
    if (kind == "log_power") return log_power(parse_double(arg));
    if (kind == "oscillatory") return oscillatory(parse_double(arg));
    if (kind == "dyadic_steps") return dyadic_steps(parse_double(arg));
    if (kind == "explicit") {
        std::vector<double> v;
        for (const auto& t : split(arg, ',')) v.push_back(parse_double(t));
        if (v.empty()) throw Error("explicit sequence is empty");
        return explicit_values(std::move(v));
    }
    if (kind == "sparse") {
        std::vector<long> sup;
        std::vector<double> val;
        for (const auto& t : split(arg, ';')) {
            const auto eq = t.find('=');
            if (eq == std::string::npos) throw Error("sparse entries are index=value, got '" + t + "'");
            sup.push_back(static_cast<long>(parse_double(t.substr(0, eq))));
            val.push_back(parse_double(t.substr(eq + 1)));
        }
        return sparse(std::move(sup), std::move(val));
    }
    throw Error("unknown sequence kind '" + kind + "'");
}

std::string SequenceSpec::describe() const {
    switch (kind) {
        case Kind::Power: return "power:" + fmt(p);
        case Kind::LogPower: return "log_power:" + fmt(p);
        case Kind::Oscillatory: return "oscillatory:" + fmt(p);
        case Kind::DyadicSteps: return "dyadic_steps:" + fmt(p);
        case Kind::Explicit: {
            std::string s = "explicit:";
            for (std::size_t i = 0; i < values.size(); ++i) s += (i ? "," : "") + fmt(values[i]);
            return s;
        }
        case Kind::Sparse: {
            std::string s = "sparse:";
            for (std::size_t i = 0; i < values.size(); ++i)
                s += (i ? ";" : "") + std::to_string(support[i]) + "=" + fmt(values[i]);
            return s;
        }
    }
    return "?";
}

std::vector<double> SequenceSpec::materialize(long n) const {
    if (horizon > 0 && n > horizon)
        throw Error("sequence requested up to " + std::to_string(n) + " beyond its horizon " +
                    std::to_string(horizon));
    std::vector<double> g(static_cast<std::size_t>(std::max(0L, n)), 0.0);
    switch (kind) {
        case Kind::Power:
            for (long i = 1; i <= n; ++i) g[i - 1] = std::pow(double(i), -p);
            break;
        case Kind::LogPower:
            for (long i = 1; i <= n; ++i) g[i - 1] = std::pow(std::log(double(i) + 2.0), -p);
            break;
        case Kind::Oscillatory:
            for (long i = 1; i <= n; ++i) g[i - 1] = (i % 2 ? -1.0 : 1.0) * std::pow(double(i), -p);
            break;
        case Kind::DyadicSteps: {
            if (p <= 0) throw Error("dyadic_steps requires p > 0");
            const int J = std::bit_width(static_cast<unsigned long>(std::max(1L, n))) + 6;
            const unsigned long K = 1UL << J;
            double acc = dyadic_remainder(J, p);
            for (unsigned long k = K - 1; k >= 1; --k) {
                acc += dyadic_sign(k) * std::pow(double(k), -(p + 1.0));
                if (static_cast<long>(k) <= n) g[k - 1] = acc;
            }
            break;
        }
        case Kind::Explicit:
            for (long i = 1; i <= n && i <= static_cast<long>(values.size()); ++i) g[i - 1] = values[i - 1];
            break;
        case Kind::Sparse:
            for (std::size_t i = 0; i < support.size(); ++i)
                if (support[i] <= n) g[support[i] - 1] += values[i];
            break;
    }
    for (double x : g)
        if (!std::isfinite(x)) throw Error("sequence " + describe() + " produced a non-finite value");
    return g;
}

OperatorMatrix diagonal_potential(const SequenceSpec& spec, int N) {
    const auto v = spec.materialize(N);
    Matrix M = Matrix::Zero(N, N);
    for (int i = 0; i < N; ++i) M(i, i) = v[i];
    return {Space::half_line(N), std::move(M), "V[" + spec.describe() + "]"};
}

OperatorMatrix diagonal_potential(const SequenceSpec& spec, const Space& space) {
    if (space.is_half_line()) return diagonal_potential(spec, space.N);
    const auto v = spec.materialize(space.N + 1);
    const long dim = space.dim();
    Matrix M = Matrix::Zero(dim, dim);
    for (long i = 0; i < dim; ++i) {
        int r = 0;
        for (int x : space.coords(i)) r = std::max(r, std::abs(x));
        M(i, i) = v[r];
    }
    return {space, std::move(M), "V[" + spec.describe() + "]"};
}

double seminorm_q(const SequenceSpec& spec, int k, long N) {
    if (k < 0 || k > 3) throw Error("seminorm_q supports 0 <= k <= 3");
    std::vector<double> d = spec.materialize(N + k);
    double q = 0.0;
    for (long i = 0; i < N; ++i) q = std::max(q, std::fabs(d[i]));
    for (int j = 1; j <= k; ++j) {
        // d <- Delta d, (Delta d)_n = d_n - d_{n+1}
        for (std::size_t i = 0; i + 1 < d.size(); ++i) d[i] = d[i] - d[i + 1];
        d.pop_back();
        double m = 0.0;
        for (long i = 0; i < N; ++i) m = std::max(m, std::pow(double(i + 1), j) * std::fabs(d[i]));
        q += m;
    }
    return q;
}

OperatorMatrix finite_rank(const std::vector<Vector>& vectors, const std::vector<double>& betas, int N) {
    if (vectors.size() != betas.size()) throw Error("finite_rank: vectors and betas differ in length");
    Matrix M = Matrix::Zero(N, N);
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        if (vectors[i].size() != N) throw Error("finite_rank: vector length does not match N");
        M.noalias() += betas[i] * vectors[i] * vectors[i].adjoint();
    }
    Matrix S = 0.5 * (M + M.adjoint());
    return {Space::half_line(N), std::move(S), "V_beta"};
}

Vector unit_vector(long dim, long index) {
    if (index < 0 || index >= dim) throw Error("unit vector index out of range");
    Vector v = Vector::Zero(dim);
    v[index] = 1.0;
    return v;
}

}  // namespace toeplab
