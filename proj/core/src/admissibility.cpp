#include "toeplab/error.hpp"
#include "toeplab/perturb.hpp"
#include "toeplab/spectra.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace toeplab {

std::string to_string(Condition c) {
    switch (c) {
        case Condition::S: return "S";
        case Condition::M: return "M";
        case Condition::L: return "L";
        case Condition::H: return "H";
        case Condition::Gsah: return "gsah";
    }
    return "?";
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Converges: return "converges";
        case Verdict::Diverges: return "diverges";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

Condition parse_condition(const std::string& s) {
    if (s == "S") return Condition::S;
    if (s == "M") return Condition::M;
    if (s == "L") return Condition::L;
    if (s == "H") return Condition::H;
    if (s == "gsah") return Condition::Gsah;
    throw Error("unknown admissibility condition '" + s + "' (expected S, M, L, H or gsah)");
}

std::vector<double> log_grid(double r_max, int per_decade) {
    const int n = std::max(2, static_cast<int>(std::ceil(std::log10(r_max) * per_decade)) + 1);
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) r[i] = std::pow(r_max, double(i) / (n - 1));
    r.back() = r_max;
    return r;
}

namespace {

struct LineFit {
    double slope = 0.0, intercept = 0.0, r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = double(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit f;
    f.slope = sxx > 0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    double sse = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        sse += e * e;
    }
    f.r2 = syy > 0 ? 1.0 - sse / syy : 1.0;
    return f;
}

// integral over [r_0, r_k] of the integrand, trapezoid in log r
std::vector<double> cumulative(const std::vector<double>& r, const std::vector<double>& I) {
    std::vector<double> c(r.size(), 0.0);
    for (std::size_t i = 1; i < r.size(); ++i) {
        const double dl = std::log(r[i] / r[i - 1]);
        c[i] = c[i - 1] + 0.5 * dl * (I[i] * r[i] + I[i - 1] * r[i - 1]);
    }
    return c;
}

double window_sup(const std::vector<double>& v, double lo, double hi) {
    // v is 1-based data stored 0-based; window over integers n with lo <= n <= hi
    const long a = std::max(1L, static_cast<long>(std::ceil(lo - 1e-12)));
    const long b = std::min(static_cast<long>(v.size()), static_cast<long>(std::floor(hi + 1e-12)));
    double m = 0.0;
    for (long n = a; n <= b; ++n) m = std::max(m, std::fabs(v[n - 1]));
    return m;
}

double window_l2(const std::vector<double>& v, double lo, double hi) {
    const long a = std::max(1L, static_cast<long>(std::ceil(lo - 1e-12)));
    const long b = std::min(static_cast<long>(v.size()), static_cast<long>(std::floor(hi + 1e-12)));
    double s = 0.0;
    for (long n = a; n <= b; ++n) s += v[n - 1] * v[n - 1];
    return std::sqrt(s);
}

bool q_stable(const SequenceSpec& spec, int k, long N, double& q) {
    q = seminorm_q(spec, k, N);
    const double q_small = seminorm_q(spec, k, std::max(10L, N / 10));
    return std::fabs(q - q_small) <= 1e-3 * std::max(1.0, std::fabs(q));
}

}  // namespace

TailFit classify_tail(const std::vector<double>& r, const std::vector<double>& integrand, double r_max,
                      double min_r_max) {
    TailFit t;
    const double r_lo = std::sqrt(r_max);
    std::vector<double> lx, ly, tr;
    bool any_tail = false;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] < r_lo) continue;
        any_tail = true;
        tr.push_back(r[i]);
        if (integrand[i] > 0.0) {
            lx.push_back(std::log(r[i]));
            ly.push_back(std::log(integrand[i]));
        }
    }
    if (any_tail && lx.empty()) {
        t.exponent = -std::numeric_limits<double>::infinity();
        t.r2 = 1.0;
        t.verdict = Verdict::Converges;
        t.rule = "vanishing tail";
        return t;
    }
    if (r_max < min_r_max || lx.size() < 5) {
        t.rule = "horizon too small for a stable fit";
        return t;
    }
    const LineFit f = fit_line(lx, ly);
    t.exponent = f.slope;
    t.r2 = f.r2;
    if (f.r2 < kMinR2) {
        t.rule = "poor power-law fit";
        return t;
    }
    if (f.slope < -1.0 - kVerdictMargin) {
        t.verdict = Verdict::Converges;
        t.rule = "tail exponent";
    } else if (f.slope >= -1.0 + kVerdictMargin) {
        t.verdict = Verdict::Diverges;
        t.rule = "tail exponent";
    } else {
        // Borderline exponent near -1: the integral then diverges iff it keeps growing like log r.
        std::vector<double> I_tail, r_tail, lr;
        for (std::size_t i = 0; i < r.size(); ++i)
            if (r[i] >= r_lo) {
                r_tail.push_back(r[i]);
                I_tail.push_back(integrand[i]);
                lr.push_back(std::log(r[i]));
            }
        const std::vector<double> c = cumulative(r_tail, I_tail);
        const LineFit g = fit_line(lr, c);
        const double scale = c.back() > 0 ? c.back() : 1.0;
        if (g.r2 >= kMinR2 && g.slope * (lr.back() - lr.front()) > 0.1 * scale) {
            t.verdict = Verdict::Diverges;
            t.rule = "logarithmic growth";
        } else {
            t.rule = "borderline exponent";
        }
    }
    return t;
}

bool limit_vanishes(const std::vector<double>& gamma) {
    const std::size_t n = gamma.size();
    if (n < 16) return false;
    double tail = 0.0;
    for (std::size_t i = n / 2; i < n; ++i) tail = std::max(tail, std::fabs(gamma[i]));
    if (tail < 1e-6) return true;
    // Otherwise require a strictly decreasing dyadic sup-envelope over the upper half of the blocks.
    std::vector<double> env;
    for (std::size_t lo = 1; 2 * lo - 1 <= n; lo *= 2) {
        double m = 0.0;
        for (std::size_t i = lo; i < 2 * lo && i <= n; ++i) m = std::max(m, std::fabs(gamma[i - 1]));
        env.push_back(m);
    }
    if (env.size() < 4) return false;
    for (std::size_t j = env.size() / 2; j + 1 < env.size(); ++j)
        if (!(env[j + 1] < env[j])) return false;
    return env.back() < env.front() || env.front() == 0.0;
}

AdmissibilityReport admissibility_check(const SequenceSpec& spec, Condition condition, double a, double b,
                                        double r_max) {
    if (!(a > 0 && a < b)) throw Error("admissibility window requires 0 < a < b");
    if (condition == Condition::Gsah) throw Error("use gsah_probe for the gsah condition");
    AdmissibilityReport rep;
    rep.condition = condition;
    rep.a = a;
    rep.b = b;
    rep.r_max = rep.r_max_used = r_max;
    const long horizon = static_cast<long>(std::ceil(b * r_max)) + 3;
    const std::vector<double> g = spec.materialize(horizon);

    std::vector<double> probe;
    switch (condition) {
        case Condition::S:
        case Condition::H:
            probe = g;
            break;
        case Condition::M:
            probe.resize(g.size() - 1);
            for (std::size_t i = 0; i + 1 < g.size(); ++i) probe[i] = g[i + 1] - g[i];
            break;
        case Condition::L:
            probe.resize(g.size() - 2);
            for (std::size_t i = 0; i + 2 < g.size(); ++i) {
                const double n = double(i + 1);
                probe[i] = n * n * (g[i] - 2.0 * g[i + 1] + g[i + 2]);
            }
            break;
        default:
            break;
    }

    rep.r = log_grid(r_max);
    rep.integrand.resize(rep.r.size());
    for (std::size_t i = 0; i < rep.r.size(); ++i) {
        const double r = rep.r[i];
        double v = condition == Condition::H ? window_l2(probe, a * r, b * r) : window_sup(probe, a * r, b * r);
        // L has no integral of its own; dr/r weighting turns the q_2 top term into an integrability proxy.
        if (condition == Condition::L) v /= r;
        rep.integrand[i] = v;
    }
    const auto c = cumulative(rep.r, rep.integrand);
    rep.integral_estimate = c.back();
    const TailFit t = classify_tail(rep.r, rep.integrand, r_max);
    rep.tail_exponent = t.exponent;
    rep.r2 = t.r2;
    rep.integral_verdict = t.verdict;
    rep.verdict = t.verdict;
    rep.rule = t.rule;

    if (condition == Condition::M || condition == Condition::L) {
        const int k = condition == Condition::M ? 1 : 2;
        rep.q_stable = q_stable(spec, k, horizon - 3, rep.q_value);
        rep.limit_ok = limit_vanishes(g);
        if (t.verdict == Verdict::Converges && rep.q_stable && rep.limit_ok) {
            rep.verdict = Verdict::Converges;
        } else if (t.verdict == Verdict::Diverges || !rep.q_stable) {
            rep.verdict = Verdict::Diverges;
            if (!rep.q_stable) rep.rule = "q" + std::to_string(k) + " not stabilized";
        } else {
            rep.verdict = Verdict::Inconclusive;
            if (!rep.limit_ok) rep.rule = "limit not resolved";
        }
    }
    return rep;
}

AdmissibilityReport gsah_probe(const OperatorMatrix& V, double s, double a, double b, double r_max, int per_decade) {
    if (!V.space().is_half_line()) throw Error("gsah_probe requires a half-line operator");
    if (!(s >= 0.0 && s < 2.0)) throw Error("gsah_probe requires 0 <= s < 2");
    if (!(a > 0 && a < b)) throw Error("gsah window requires 0 < a < b");
    const long N = V.dim();
    AdmissibilityReport rep;
    rep.condition = Condition::Gsah;
    rep.s = s;
    rep.a = a;
    rep.b = b;
    rep.r_max = r_max;
    rep.r_max_used = std::min(r_max, double(N) / b);
    rep.horizon_shrunk = rep.r_max_used < r_max;

    const Matrix& D = V.data();
    const bool diagonal = (D - Matrix(D.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
    Matrix Y;  // V = Y U^* with U an isometry, so ||chi V|| = ||chi Y||
    if (!diagonal) {
        if (!V.hermitian()) {
            Y = D;
        } else {
            const SpectralData es = eigh(V);
            const double top = es.eigenvalues.cwiseAbs().maxCoeff();
            std::vector<long> keep;
            for (long i = 0; i < N; ++i)
                if (std::fabs(es.eigenvalues[i]) > 1e-14 * top) keep.push_back(i);
            Y.resize(N, static_cast<long>(keep.size()));
            for (std::size_t j = 0; j < keep.size(); ++j)
                Y.col(j) = es.eigenvectors.col(keep[j]) * es.eigenvalues[keep[j]];
        }
    }

    rep.r = log_grid(rep.r_max_used, per_decade);
    rep.integrand.resize(rep.r.size());
    for (std::size_t i = 0; i < rep.r.size(); ++i) {
        const double r = rep.r[i];
        const long lo = std::max(1L, static_cast<long>(std::ceil(a * r - 1e-12)));
        const long hi = std::min(N, static_cast<long>(std::floor(b * r + 1e-12)));
        double nrm = 0.0;
        if (hi >= lo) {
            if (diagonal) {
                for (long n = lo; n <= hi; ++n) nrm = std::max(nrm, std::abs(D(n - 1, n - 1)));
            } else if (Y.cols() > 0) {
                const Matrix rows = Y.middleRows(lo - 1, hi - lo + 1);
                const Matrix gram = rows.adjoint() * rows;
                Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
                nrm = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
            }
        }
        rep.integrand[i] = std::pow(r, s - 1.0) * nrm;
    }
    rep.integral_estimate = cumulative(rep.r, rep.integrand).back();
    const TailFit t = classify_tail(rep.r, rep.integrand, rep.r_max_used, 1e2);
    rep.tail_exponent = t.exponent;
    rep.r2 = t.r2;
    rep.verdict = rep.integral_verdict = t.verdict;
    rep.rule = t.rule;
    return rep;
}

}  // namespace toeplab
