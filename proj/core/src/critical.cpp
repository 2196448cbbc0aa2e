#include "toeplab/error.hpp"
#include "toeplab/symbol.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>

namespace toeplab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double x) {
    double y = std::fmod(x, kTwoPi);
    if (y < 0) y += kTwoPi;
    if (y >= kTwoPi) y = 0.0;
    return y;
}

double torus_gap(double a, double b) {
    double g = std::fabs(wrap(a) - wrap(b));
    return std::min(g, kTwoPi - g);
}

double torus_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        double g = torus_gap(a[j], b[j]);
        s += g * g;
    }
    return std::sqrt(s);
}

struct Calculus {
    int d;
    std::vector<Symbol> grad;
    std::vector<std::vector<Symbol>> hess;

    explicit Calculus(const Symbol& s) : d(s.dim()) {
        grad = gradient(s);
        hess.resize(d);
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) hess[j].push_back(derivative(grad[j], k));
    }
    Eigen::VectorXd g(const std::vector<double>& x) const {
        Eigen::VectorXd v(d);
        for (int j = 0; j < d; ++j) v[j] = grad[j](x).real();
        return v;
    }
    Eigen::MatrixXd h(const std::vector<double>& x) const {
        Eigen::MatrixXd m(d, d);
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) m(j, k) = hess[j][k](x).real();
        return m;
    }
    double sigma_min(const std::vector<double>& x) const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h(x), Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().minCoeff();
    }
};

struct Cell {
    std::vector<double> center;
    double half = 0.0;
    int depth = 0;
};

struct Found {
    std::vector<double> p;
    double radius;  // gradient has no other zero inside this ball
    bool degenerate;
};

bool newton(const Calculus& cal, std::vector<double>& x, double tol) {
    Eigen::VectorXd gx = cal.g(x);
    double gn = gx.norm();
    for (int it = 0; it < 80 && gn > tol; ++it) {
        Eigen::MatrixXd H = cal.h(x);
        Eigen::VectorXd step = H.completeOrthogonalDecomposition().solve(-gx);
        if (!step.allFinite() || step.norm() == 0.0) return false;
        if (step.norm() > 0.5) step *= 0.5 / step.norm();
        double t = 1.0;
        bool moved = false;
        for (int bt = 0; bt < 30; ++bt) {
            std::vector<double> y = x;
            for (int j = 0; j < cal.d; ++j) y[j] += t * step[j];
            Eigen::VectorXd gy = cal.g(y);
            if (gy.norm() < gn) {
                x = y;
                gx = gy;
                gn = gy.norm();
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) break;
    }
    return gn <= tol;
}

bool bisect_1d(const Calculus& cal, double a, double b, double tol, double& root) {
    auto fp = [&](double t) { return cal.grad[0](t).real(); };
    double fa = fp(a), fb = fp(b);
    if (fa == 0.0) { root = a; return true; }
    if (fb == 0.0) { root = b; return true; }
    if ((fa > 0) == (fb > 0)) return false;
    for (int it = 0; it < 200 && b - a > 1e-16; ++it) {
        double m = 0.5 * (a + b), fm = fp(m);
        if (fm == 0.0) { a = b = m; break; }
        if ((fm > 0) == (fa > 0)) { a = m; fa = fm; } else { b = m; }
    }
    root = 0.5 * (a + b);
    std::vector<double> x{root};
    if (std::fabs(fp(root)) > tol) newton(cal, x, tol);
    root = x[0];
    return std::fabs(fp(root)) <= tol;
}

}  // namespace

CriticalSet critical_set(const Symbol& s, int initial_grid, double tol) {
    if (!s.is_real()) throw Error("critical_set requires a real-valued symbol");
    if (s.is_constant()) throw Error("constant symbol has no Mourre theory");
    const int d = s.dim();
    if (initial_grid <= 0) initial_grid = std::max(32, 16 * s.max_bandwidth());
    const Calculus cal(s);
    const double L2 = s.derivative_bound(2);
    const double L3 = s.derivative_bound(3);
    const double resolution = kTwoPi / initial_grid;
    const int max_depth = 8;

    std::vector<Found> found;
    auto covered = [&](const Cell& c) {
        for (const Found& f : found) {
            double far = 0.0;
            for (int j = 0; j < d; ++j) {
                double g = torus_gap(c.center[j], f.p[j]) + c.half;
                far += g * g;
            }
            if (std::sqrt(far) < f.radius) return true;
        }
        return false;
    };
    auto record = [&](std::vector<double> x) {
        for (double& v : x) v = wrap(v);
        for (const Found& f : found)
            if (torus_distance(f.p, x) <= resolution / 2) return;
        double smin = cal.sigma_min(x);
        bool degenerate = smin <= 1e-8 * std::max(L2, 1.0);
        double radius = (degenerate || L3 == 0.0) ? 0.0 : smin / L3;
        found.push_back({std::move(x), radius, degenerate});
    };

    std::deque<Cell> queue;
    {
        std::vector<int> m(d, 0);
        const std::size_t total = static_cast<std::size_t>(std::pow(initial_grid, d));
        for (std::size_t flat = 0; flat < total; ++flat) {
            Cell c;
            c.half = resolution / 2;
            for (int j = 0; j < d; ++j) c.center.push_back((m[j] + 0.5) * resolution);
            queue.push_back(std::move(c));
            for (int j = d - 1; j >= 0; --j) {
                if (++m[j] < initial_grid) break;
                m[j] = 0;
            }
        }
    }

    bool exhaustive = true;
    const double sqrt_d = std::sqrt(double(d));
    while (!queue.empty()) {
        Cell c = std::move(queue.front());
        queue.pop_front();
        if (cal.g(c.center).norm() > L2 * c.half * sqrt_d) continue;
        if (covered(c)) continue;

        std::vector<double> x = c.center;
        bool ok = false;
        if (d == 1) {
            double root;
            ok = bisect_1d(cal, c.center[0] - c.half, c.center[0] + c.half, tol, root);
            if (ok) x[0] = root;
        }
        if (!ok) ok = newton(cal, x, tol);
        if (ok) record(x);
        if (covered(c)) continue;

        if (c.depth >= max_depth) {
            exhaustive = false;
            continue;
        }
        const int children = 1 << d;
        for (int k = 0; k < children; ++k) {
            Cell ch;
            ch.half = c.half / 2;
            ch.depth = c.depth + 1;
            for (int j = 0; j < d; ++j) ch.center.push_back(c.center[j] + ((k >> j) & 1 ? ch.half : -ch.half));
            queue.push_back(std::move(ch));
        }
    }

    std::sort(found.begin(), found.end(), [](const Found& a, const Found& b) { return a.p < b.p; });
    CriticalSet out;
    out.resolution = resolution;
    out.tol = tol;
    out.is_exhaustive = exhaustive;
    for (Found& f : found) {
        out.points.push_back(std::move(f.p));
        out.degenerate.push_back(f.degenerate);
    }
    return out;
}

std::vector<double> thresholds(const Symbol& s, const CriticalSet& k) {
    std::vector<double> v;
    for (const auto& p : k.points) v.push_back(s(p).real());
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double x : v)
        if (out.empty() || std::fabs(x - out.back()) > 1e-9) out.push_back(x);
    return out;
}

namespace {

struct GridSample {
    int d;
    int n;
    std::vector<double> f, g;
    const Symbol* fs;
    const Symbol* gs;

    std::vector<double> point(std::size_t flat) const {
        std::vector<double> x(d);
        for (int j = d - 1; j >= 0; --j) {
            x[j] = kTwoPi * double(flat % n) / n;
            flat /= n;
        }
        return x;
    }
};

struct Extremes {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::size_t inside = 0;
    bool any() const { return lo <= hi; }
};

// Min/max of g over grid points with f in [a,b], plus points where f crosses a or b along grid edges.
Extremes extremes(const GridSample& gs, double a, double b) {
    Extremes e;
    const std::size_t total = gs.f.size();
    std::vector<std::size_t> stride(gs.d, 1);
    for (int j = gs.d - 2; j >= 0; --j) stride[j] = stride[j + 1] * gs.n;
    for (std::size_t i = 0; i < total; ++i) {
        const double fi = gs.f[i];
        if (fi >= a && fi <= b) {
            e.lo = std::min(e.lo, gs.g[i]);
            e.hi = std::max(e.hi, gs.g[i]);
            ++e.inside;
        }
        for (int j = 0; j < gs.d; ++j) {
            const std::size_t coord = (i / stride[j]) % gs.n;
            const std::size_t nb = coord + 1 < std::size_t(gs.n) ? i + stride[j] : i - coord * stride[j];
            const double fn = gs.f[nb];
            for (double level : {a, b}) {
                if ((fi - level) * (fn - level) >= 0.0) continue;
                std::vector<double> x0 = gs.point(i);
                double t0 = 0.0, t1 = kTwoPi / gs.n;
                double v0 = fi - level;
                std::vector<double> x = x0;
                for (int it = 0; it < 60; ++it) {
                    double tm = 0.5 * (t0 + t1);
                    x[j] = x0[j] + tm;
                    double vm = gs.fs->real_at(x) - level;
                    if ((vm > 0) == (v0 > 0)) { t0 = tm; v0 = vm; } else { t1 = tm; }
                }
                x[j] = x0[j] + 0.5 * (t0 + t1);
                double gv = gs.gs->real_at(x);
                e.lo = std::min(e.lo, gv);
                e.hi = std::max(e.hi, gv);
            }
        }
    }
    return e;
}

}  // namespace

MourreConstants mourre_constants(const Symbol& f, const Symbol& g, Interval lambda, int grid,
                                 const std::vector<double>& enlargements) {
    if (!f.is_real() || !g.is_real()) throw Error("mourre_constants requires real-valued symbols");
    if (f.dim() != g.dim()) throw Error("mourre_constants: dimension mismatch");
    if (lambda.hi < lambda.lo) throw Error("interval with hi < lo");
    const int d = f.dim();
    if (grid <= 0) grid = d == 1 ? 4096 : d == 2 ? 512 : 64;

    GridSample gs{d, grid, {}, {}, &f, &g};
    std::size_t total = 1;
    for (int j = 0; j < d; ++j) total *= grid;
    gs.f.resize(total);
    gs.g.resize(total);
    double fmin = std::numeric_limits<double>::infinity(), fmax = -fmin;
    for (std::size_t i = 0; i < total; ++i) {
        auto x = gs.point(i);
        gs.f[i] = f.real_at(x);
        gs.g[i] = g.real_at(x);
        fmin = std::min(fmin, gs.f[i]);
        fmax = std::max(fmax, gs.f[i]);
    }

    Extremes base = extremes(gs, lambda.lo, lambda.hi);
    if (!base.any()) throw Error("Λ ∩ Ran f = ∅");

    MourreConstants mc;
    mc.lambda = lambda;
    mc.c = std::max(0.0, base.lo);
    mc.C = std::max(mc.c, base.hi);
    mc.preimage_measure = double(base.inside) / double(total);

    const double width = lambda.width() > 0 ? lambda.width() : (fmax - fmin);
    std::vector<double> margins = enlargements;
    std::sort(margins.begin(), margins.end(), std::greater<>());
    mc.c_sharp = 0.0;
    mc.C_flat = mc.C;
    for (double m : margins) {
        const double delta = m * width;
        Extremes e = extremes(gs, lambda.lo - delta, lambda.hi + delta);
        EnlargementRow row{delta, std::clamp(e.lo, 0.0, mc.c), std::max(e.hi, mc.C)};
        mc.table.push_back(row);
    }
    if (!mc.table.empty()) {
        mc.c_sharp = mc.table.back().c;
        mc.C_flat = mc.table.back().C;
    } else {
        mc.c_sharp = mc.c;
    }
    return mc;
}

}  // namespace toeplab
