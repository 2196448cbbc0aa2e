#include "toeplab/symbol.hpp"

#include "toeplab/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace toeplab {

namespace {

std::string index_str(const MultiIndex& a) {
    std::string s = "(";
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (j) s += ",";
        s += std::to_string(a[j]);
    }
    return s + ")";
}

MultiIndex negated(const MultiIndex& a) {
    MultiIndex b(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) b[j] = -a[j];
    return b;
}

// Force c_{-a} = conj(c_a) exactly, keeping the lexicographically larger index as reference.
std::map<MultiIndex, cplx> hermitize(const std::map<MultiIndex, cplx>& in) {
    std::map<MultiIndex, cplx> out;
    for (const auto& [a, c] : in) {
        MultiIndex b = negated(a);
        if (a == b) {
            out[a] = cplx(c.real(), 0.0);
        } else if (a > b) {
            auto it = in.find(b);
            cplx cb = it == in.end() ? cplx(0.0) : it->second;
            cplx avg = 0.5 * (c + std::conj(cb));
            out[a] = avg;
            out[b] = std::conj(avg);
        } else if (in.find(b) == in.end()) {
            out[a] = 0.5 * c;
            out[b] = std::conj(0.5 * c);
        }
    }
    return out;
}

std::map<MultiIndex, cplx> pruned(std::map<MultiIndex, cplx> m, double threshold) {
    for (auto it = m.begin(); it != m.end();) {
        if (std::abs(it->second) <= threshold)
            it = m.erase(it);
        else
            ++it;
    }
    return m;
}

constexpr double kDerivedRealTol = 1e-12;

}  // namespace

Symbol::Symbol(int dim) : dim_(dim) {
    if (dim < 1) throw Error("symbol dimension must be >= 1");
}

Symbol::Symbol(int dim, std::map<MultiIndex, cplx> coeffs, double real_tol)
    : dim_(dim), coeffs_(std::move(coeffs)) {
    if (dim < 1) throw Error("symbol dimension must be >= 1");
    finalize(real_tol);
}

void Symbol::finalize(double real_tol) {
    double scale = 0.0;
    for (const auto& [a, c] : coeffs_) scale = std::max(scale, std::abs(c));
    const double tol = real_tol * std::max(1.0, scale);
    real_ = true;
    for (const auto& [a, c] : coeffs_) {
        cplx partner = coeff(negated(a));
        if (std::abs(partner - std::conj(c)) > tol) {
            real_ = false;
            break;
        }
    }
}

Symbol Symbol::from_coefficients(const std::vector<std::pair<MultiIndex, cplx>>& entries, int dim) {
    if (dim < 1) throw Error("symbol dimension must be >= 1");
    std::map<MultiIndex, cplx> m;
    for (const auto& [a, c] : entries) {
        if (static_cast<int>(a.size()) != dim)
            throw Error("multi-index " + index_str(a) + " does not have dimension " + std::to_string(dim));
        if (m.count(a)) throw Error("duplicate coefficient index " + index_str(a));
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw Error("non-finite coefficient at " + index_str(a));
        if (c != cplx(0.0)) m[a] = c;
    }
    return Symbol(dim, std::move(m), 0.0);
}

Symbol Symbol::constant(double value, int dim) {
    if (value == 0.0) return Symbol(dim);
    return from_coefficients({{MultiIndex(dim, 0), cplx(value)}}, dim);
}

cplx Symbol::coeff(const MultiIndex& alpha) const {
    auto it = coeffs_.find(alpha);
    return it == coeffs_.end() ? cplx(0.0) : it->second;
}

std::vector<int> Symbol::bandwidth() const {
    std::vector<int> bw(dim_, 0);
    for (const auto& [a, c] : coeffs_)
        for (int j = 0; j < dim_; ++j) bw[j] = std::max(bw[j], std::abs(a[j]));
    return bw;
}

int Symbol::max_bandwidth() const {
    auto bw = bandwidth();
    return *std::max_element(bw.begin(), bw.end());
}

bool Symbol::is_constant() const {
    for (const auto& [a, c] : coeffs_)
        for (int x : a)
            if (x != 0) return false;
    return true;
}

cplx Symbol::operator()(std::span<const double> theta) const {
    if (static_cast<int>(theta.size()) != dim_) throw Error("evaluation point has wrong dimension");
    cplx sum = 0.0;
    for (const auto& [a, c] : coeffs_) {
        double phase = 0.0;
        for (int j = 0; j < dim_; ++j) phase += a[j] * theta[j];
        sum += c * cplx(std::cos(phase), std::sin(phase));
    }
    return sum;
}

cplx Symbol::operator()(double theta) const {
    return (*this)(std::span<const double>(&theta, 1));
}

double Symbol::derivative_bound(int k) const {
    double s = 0.0;
    for (const auto& [a, c] : coeffs_) {
        double n2 = 0.0;
        for (int x : a) n2 += double(x) * x;
        s += std::pow(std::sqrt(n2), k) * std::abs(c);
    }
    return s;
}

Symbol sample_fourier(const TorusFunction& evaluator, std::vector<int> bandwidth, std::vector<int> grid,
                      double prune) {
    const int d = static_cast<int>(bandwidth.size());
    if (d < 1 || grid.size() != bandwidth.size()) throw Error("bandwidth and grid must have the same dimension");
    std::size_t total = 1;
    for (int j = 0; j < d; ++j) {
        if (bandwidth[j] < 0) throw Error("negative bandwidth");
        if (grid[j] < 4 * bandwidth[j] + 4)
            throw Error("grid " + std::to_string(grid[j]) + " on axis " + std::to_string(j) +
                        " violates the oversampling guard 4*bandwidth+4");
        total *= static_cast<std::size_t>(grid[j]);
    }
    const double two_pi = 2.0 * std::numbers::pi;

    std::vector<cplx> values(total);
    std::vector<int> m(d, 0);
    std::vector<double> theta(d);
    for (std::size_t flat = 0; flat < total; ++flat) {
        for (int j = 0; j < d; ++j) theta[j] = two_pi * m[j] / grid[j];
        cplx v = evaluator(theta);
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            std::ostringstream os;
            os << "non-finite evaluator output at grid point (";
            for (int j = 0; j < d; ++j) os << (j ? "," : "") << theta[j];
            os << ")";
            throw Error(os.str());
        }
        values[flat] = v;
        for (int j = d - 1; j >= 0; --j) {
            if (++m[j] < grid[j]) break;
            m[j] = 0;
        }
    }

    // Separable transform, one axis at a time: axis j maps grid[j] samples to 2*bw[j]+1 modes.
    std::vector<int> shape(grid.begin(), grid.end());
    std::vector<cplx> cur = std::move(values);
    for (int j = 0; j < d; ++j) {
        const int G = grid[j], B = bandwidth[j], K = 2 * B + 1;
        std::size_t outer = 1, inner = 1;
        for (int i = 0; i < j; ++i) outer *= shape[i];
        for (int i = j + 1; i < d; ++i) inner *= shape[i];
        std::vector<cplx> table(static_cast<std::size_t>(K) * G);
        for (int k = 0; k < K; ++k)
            for (int g = 0; g < G; ++g) {
                // exact phase reduction keeps the table symmetric under k -> -k
                long r = (static_cast<long>(k - B) * g) % G;
                if (r < 0) r += G;
                double ph = -two_pi * double(r) / G;
                table[static_cast<std::size_t>(k) * G + g] = cplx(std::cos(ph), std::sin(ph)) / double(G);
            }
        std::vector<cplx> next(outer * K * inner, cplx(0.0));
        for (std::size_t o = 0; o < outer; ++o)
            for (int k = 0; k < K; ++k)
                for (int g = 0; g < G; ++g) {
                    const cplx w = table[static_cast<std::size_t>(k) * G + g];
                    const cplx* src = &cur[(o * G + g) * inner];
                    cplx* dst = &next[(o * K + k) * inner];
                    for (std::size_t i = 0; i < inner; ++i) dst[i] += w * src[i];
                }
        cur = std::move(next);
        shape[j] = K;
    }

    std::map<MultiIndex, cplx> coeffs;
    std::vector<int> k(d, 0);
    for (std::size_t flat = 0; flat < cur.size(); ++flat) {
        if (std::abs(cur[flat]) > prune) {
            MultiIndex a(d);
            for (int j = 0; j < d; ++j) a[j] = k[j] - bandwidth[j];
            coeffs[a] = cur[flat];
        }
        for (int j = d - 1; j >= 0; --j) {
            if (++k[j] < shape[j]) break;
            k[j] = 0;
        }
    }
    return Symbol(d, std::move(coeffs), kDerivedRealTol);
}

Symbol derivative(const Symbol& s, int axis) {
    if (axis < 0 || axis >= s.dim()) throw Error("derivative axis out of range");
    std::map<MultiIndex, cplx> m;
    for (const auto& [a, c] : s.coeffs())
        if (a[axis] != 0) m[a] = cplx(0.0, double(a[axis])) * c;
    return Symbol(s.dim(), std::move(m), s.is_real() ? 0.0 : kDerivedRealTol);
}

Symbol multiply(const Symbol& a, const Symbol& b) {
    if (a.dim() != b.dim()) throw Error("multiply: dimension mismatch");
    const int d = a.dim();
    std::map<MultiIndex, cplx> m;
    for (const auto& [x, cx] : a.coeffs())
        for (const auto& [y, cy] : b.coeffs()) {
            MultiIndex z(d);
            for (int j = 0; j < d; ++j) z[j] = x[j] + y[j];
            m[z] += cx * cy;
        }
    if (a.is_real() && b.is_real()) m = hermitize(m);
    return Symbol(d, pruned(std::move(m), 0.0), a.is_real() && b.is_real() ? 0.0 : kDerivedRealTol);
}

Symbol add(const Symbol& a, const Symbol& b) {
    if (a.dim() != b.dim()) throw Error("add: dimension mismatch");
    std::map<MultiIndex, cplx> m = a.coeffs();
    for (const auto& [x, c] : b.coeffs()) m[x] += c;
    bool real = a.is_real() && b.is_real();
    if (real) m = hermitize(m);
    return Symbol(a.dim(), pruned(std::move(m), 0.0), real ? 0.0 : kDerivedRealTol);
}

Symbol scale(const Symbol& a, cplx factor) {
    std::map<MultiIndex, cplx> m;
    for (const auto& [x, c] : a.coeffs()) m[x] = c * factor;
    bool real = a.is_real() && factor.imag() == 0.0;
    return Symbol(a.dim(), pruned(std::move(m), 0.0), real ? 0.0 : kDerivedRealTol);
}

Symbol conjugate(const Symbol& a) {
    std::map<MultiIndex, cplx> m;
    for (const auto& [x, c] : a.coeffs()) m[negated(x)] = std::conj(c);
    return Symbol(a.dim(), std::move(m), a.is_real() ? 0.0 : kDerivedRealTol);
}

Symbol reflect(const Symbol& a) {
    std::map<MultiIndex, cplx> m;
    for (const auto& [x, c] : a.coeffs()) m[negated(x)] = c;
    return Symbol(a.dim(), std::move(m), a.is_real() ? 0.0 : kDerivedRealTol);
}

std::vector<Symbol> gradient(const Symbol& s) {
    std::vector<Symbol> g;
    for (int j = 0; j < s.dim(); ++j) g.push_back(derivative(s, j));
    return g;
}

Symbol grad_norm_sq(const Symbol& s) {
    Symbol acc(s.dim());
    for (const Symbol& gj : gradient(s)) acc = add(acc, multiply(gj, gj));
    return acc;
}

std::string to_text(const Symbol& s) {
    std::string out = "dim=" + std::to_string(s.dim()) + "\n";
    char buf[96];
    for (const auto& [a, c] : s.coeffs()) {
        for (int x : a) out += std::to_string(x) + " ";
        std::snprintf(buf, sizeof buf, "%.17g %.17g\n", c.real(), c.imag());
        out += buf;
    }
    return out;
}

Symbol from_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int dim = 0;
    std::vector<std::pair<MultiIndex, cplx>> entries;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (dim == 0) {
            if (line.rfind("dim=", 0) != 0) throw Error("symbol text must start with dim=<d>");
            dim = std::stoi(line.substr(4));
            if (dim < 1) throw Error("symbol dimension must be >= 1");
            continue;
        }
        std::istringstream ls(line);
        MultiIndex a(dim);
        for (int j = 0; j < dim; ++j)
            if (!(ls >> a[j])) throw Error("malformed symbol line: " + line);
        std::string re, im;
        if (!(ls >> re >> im)) throw Error("malformed symbol line: " + line);
        entries.emplace_back(a, cplx(std::strtod(re.c_str(), nullptr), std::strtod(im.c_str(), nullptr)));
    }
    if (dim == 0) throw Error("empty symbol text");
    return Symbol::from_coefficients(entries, dim);
}

}  // namespace toeplab
