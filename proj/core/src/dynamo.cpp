#include "toeplab/dynamo.hpp"

#include "toeplab/error.hpp"

#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace toeplab {

namespace {

using Sparse = Eigen::SparseMatrix<cplx>;

class Propagator {
public:
    Propagator(const SpectralData& sd, const Vector& phi) {
        const Vector a = sd.eigenvectors.adjoint() * phi;
        const double amax = a.cwiseAbs().maxCoeff();
        std::vector<long> keep;
        for (long i = 0; i < a.size(); ++i)
            if (std::abs(a[i]) > 1e-15 * amax) keep.push_back(i);
        const long k = static_cast<long>(keep.size());
        V_.resize(sd.eigenvectors.rows(), k);
        lam_.resize(k);
        a_.resize(k);
        for (long j = 0; j < k; ++j) {
            V_.col(j) = sd.eigenvectors.col(keep[j]);
            lam_[j] = sd.eigenvalues[keep[j]];
            a_[j] = a[keep[j]];
        }
    }

    // Columns exp(iHt) phi for the given times.
    Matrix block(const double* t, long count) const {
        Matrix P(a_.size(), count);
        for (long c = 0; c < count; ++c)
            for (long j = 0; j < a_.size(); ++j) {
                const double ph = lam_[j] * t[c];
                P(j, c) = a_[j] * cplx(std::cos(ph), std::sin(ph));
            }
        return V_ * P;
    }

private:
    Matrix V_;
    Eigen::VectorXd lam_;
    Vector a_;
};

void require_ascending(const std::vector<double>& times) {
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] >= times[i - 1])) throw Error("time list not ascending");
}

Vector normalized(const Vector& phi, bool* renormalized) {
    const double n = phi.norm();
    if (n == 0.0) throw Error("initial state is zero");
    const bool off = std::fabs(n - 1.0) > 1e-12;
    if (renormalized) *renormalized = off;
    return off ? Vector(phi / n) : phi;
}

Sparse to_sparse(const Matrix& M) { return M.sparseView(cplx(0.0), 0.0); }

std::vector<Eigen::VectorXd> coordinates(const Space& sp) {
    std::vector<Eigen::VectorXd> xs(sp.d, Eigen::VectorXd(sp.dim()));
    for (long i = 0; i < sp.dim(); ++i) {
        const auto c = sp.coords(i);
        for (int j = 0; j < sp.d; ++j) xs[j][i] = c[j];
    }
    return xs;
}

}  // namespace

std::vector<double> linspace(double a, double b, int n) {
    if (n < 1) throw Error("linspace needs at least one point");
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? a : a + (b - a) * double(i) / double(n - 1);
    if (n > 1) v.back() = b;
    return v;
}

std::vector<Vector> evolve(const SpectralData& sd, const Vector& phi, const std::vector<double>& times,
                           bool* renormalized) {
    require_ascending(times);
    const Vector phi0 = normalized(phi, renormalized);
    const Propagator prop(sd, phi0);
    std::vector<Vector> out;
    const long chunk = 256;
    for (std::size_t s = 0; s < times.size(); s += chunk) {
        const long cnt = std::min<long>(chunk, static_cast<long>(times.size() - s));
        const Matrix B = prop.block(times.data() + s, cnt);
        for (long c = 0; c < cnt; ++c) out.push_back(times[s + c] == 0.0 ? phi0 : Vector(B.col(c)));
    }
    return out;
}

double max_velocity(const Symbol& f) {
    if (f.is_constant()) return 0.0;
    const int d = f.dim();
    const int grid = d == 1 ? 4096 : d == 2 ? 256 : 32;
    const auto grad = gradient(f);
    std::size_t total = 1;
    for (int j = 0; j < d; ++j) total *= grid;
    double vmax = 0.0;
    std::vector<double> x(d);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t r = flat;
        for (int j = d - 1; j >= 0; --j) {
            x[j] = 2.0 * std::numbers::pi * double(r % grid) / grid;
            r /= grid;
        }
        double s = 0.0;
        for (const auto& g : grad) s += std::norm(g(x));
        vmax = std::max(vmax, std::sqrt(s));
    }
    return vmax;
}

GuardResult lightcone_guard(const Symbol& f, int support_radius, const Space& space, double t_max) {
    GuardResult g;
    g.velocity = max_velocity(f);
    g.distance = double(space.N - support_radius);
    if (g.velocity > 0.0) g.max_safe_t = std::max(0.0, 0.8 * g.distance / g.velocity);
    g.ok = std::fabs(t_max) * g.velocity <= 0.8 * g.distance;
    return g;
}

int support_radius(const Space& space, const Vector& phi, double tail) {
    const double total = phi.squaredNorm();
    std::vector<double> shell(space.N + 1, 0.0);
    for (long i = 0; i < phi.size(); ++i) {
        const int r = space.N - space.edge_distance(i);
        shell[r] += std::norm(phi[i]);
    }
    double outside = total;
    for (int r = 0; r <= space.N; ++r) {
        outside -= shell[r];
        if (shell[r] > 0 || r == 0) {
            if (outside <= tail * tail * total) return r;
        }
    }
    return space.N;
}

RateFit fit_rate(const std::vector<double>& times, const std::vector<double>& x_norms, FitWindow w) {
    double tmax = 0.0;
    for (double t : times) tmax = std::max(tmax, std::fabs(t));
    auto slope = [&](double lo, double hi, double* se, int* count) {
        double sx = 0, sy = 0;
        int n = 0;
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double t = std::fabs(times[i]);
            if (t >= lo * tmax - 1e-12 && t <= hi * tmax + 1e-12) {
                sx += t;
                sy += x_norms[i];
                ++n;
            }
        }
        if (count) *count = n;
        if (n < 2) return 0.0;
        const double mx = sx / n, my = sy / n;
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double t = std::fabs(times[i]);
            if (t >= lo * tmax - 1e-12 && t <= hi * tmax + 1e-12) {
                sxx += (t - mx) * (t - mx);
                sxy += (t - mx) * (x_norms[i] - my);
            }
        }
        const double b = sxx > 0 ? sxy / sxx : 0.0;
        if (se) {
            double sse = 0;
            for (std::size_t i = 0; i < times.size(); ++i) {
                const double t = std::fabs(times[i]);
                if (t >= lo * tmax - 1e-12 && t <= hi * tmax + 1e-12) {
                    const double e = x_norms[i] - (my + b * (t - mx));
                    sse += e * e;
                }
            }
            *se = (n > 2 && sxx > 0) ? std::sqrt(sse / (n - 2) / sxx) : 0.0;
        }
        return b;
    };
    RateFit r;
    r.rate = slope(w.lo, w.hi, &r.stderr_, &r.samples);
    r.rate_early = slope(std::max(0.0, w.lo - 0.1), w.hi, nullptr, nullptr);
    r.rate_late = slope(std::min(w.hi, w.lo + 0.1), w.hi, nullptr, nullptr);
    return r;
}

PropagationTrace propagation_trace(const Symbol& f, const OperatorMatrix& H, const Vector& phi,
                                   const std::vector<double>& times, const TraceOptions& opt) {
    return propagation_trace(f, eigh(H), H, phi, times, opt);
}

PropagationTrace propagation_trace(const Symbol& f, const SpectralData& sd, const OperatorMatrix& H, const Vector& phi,
                                   const std::vector<double>& times, const TraceOptions& opt) {
    require_ascending(times);
    if (times.empty()) throw Error("propagation_trace needs at least one time");
    const Space& sp = H.space();
    if (f.dim() != sp.d) throw Error("propagation_trace: symbol dimension does not match the space");
    PropagationTrace tr;
    tr.times = times;
    const Vector phi0 = normalized(phi, &tr.renormalized);

    double t_abs = 0.0;
    for (double t : times) t_abs = std::max(t_abs, std::fabs(t));
    tr.guard = lightcone_guard(f, support_radius(sp, phi0, opt.guard_tail), sp, t_abs);
    if (!tr.guard.ok) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "light-cone guard violated: t_max=%g exceeds max_safe_t=%.6g", t_abs,
                      tr.guard.max_safe_t);
        throw GuardError(buf, tr.guard.max_safe_t);
    }
    tr.lightcone_ok = true;

    // Knots: user times plus 0, each gap split into an even number of Simpson steps.
    std::vector<double> knots = times;
    knots.push_back(0.0);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    const double v = tr.guard.velocity;
    const double h = v > 0 ? std::min(opt.step_cap, opt.step_cap / v) : opt.step_cap;
    std::vector<double> grid{knots[0]};
    std::vector<std::size_t> knot_at{0};
    for (std::size_t i = 1; i < knots.size(); ++i) {
        const double gap = knots[i] - knots[i - 1];
        const long m = 2 * std::max(1L, static_cast<long>(std::ceil(gap / (2 * h))));
        for (long s = 1; s < m; ++s) grid.push_back(knots[i - 1] + gap * double(s) / double(m));
        grid.push_back(knots[i]);
        knot_at.push_back(grid.size() - 1);
    }

    const auto xs = coordinates(sp);
    const Sparse Hs = to_sparse(H.data());
    std::vector<Sparse> B(sp.d), D(sp.d);
    const auto grad = gradient(f);
    for (int j = 0; j < sp.d; ++j) {
        // i[X_j, H] has entries i (x_r - x_c) H_rc
        Sparse b = Hs;
        for (int k = 0; k < b.outerSize(); ++k)
            for (Sparse::InnerIterator it(b, k); it; ++it)
                it.valueRef() *= cplx(0.0, xs[j][it.row()] - xs[j][it.col()]);
        b.prune(cplx(0.0), 0.0);
        B[j] = b;
        if (opt.cesaro)
            D[j] = to_sparse(sp.is_half_line() ? toeplitz_matrix(grad[j], sp.N).data()
                                               : laurent_matrix(grad[j], sp.N, Boundary::Truncate).data());
    }

    const Propagator prop(sd, phi0);
    std::vector<double> f_virial(grid.size()), f_ces(grid.size(), 0.0), xsq(grid.size()), nrm(grid.size()),
        energy(grid.size(), 0.0);
    std::vector<bool> is_knot(grid.size(), false);
    for (std::size_t k : knot_at) is_knot[k] = true;
    const long chunk = 256;
    for (std::size_t s = 0; s < grid.size(); s += chunk) {
        const long cnt = std::min<long>(chunk, static_cast<long>(grid.size() - s));
        const Matrix Psi = prop.block(grid.data() + s, cnt);
        for (int j = 0; j < sp.d; ++j) {
            const Matrix XPsi = xs[j].cast<cplx>().asDiagonal() * Psi;
            const Matrix BPsi = B[j] * Psi;
            for (long c = 0; c < cnt; ++c) {
                f_virial[s + c] += 2.0 * BPsi.col(c).dot(XPsi.col(c)).real();
                xsq[s + c] += XPsi.col(c).squaredNorm();
            }
            if (opt.cesaro) {
                const Matrix DPsi = D[j] * Psi;
                for (long c = 0; c < cnt; ++c) f_ces[s + c] += DPsi.col(c).squaredNorm();
            }
        }
        for (long c = 0; c < cnt; ++c) {
            nrm[s + c] = Psi.col(c).norm();
            if (is_knot[s + c]) energy[s + c] = Psi.col(c).dot(Hs * Psi.col(c)).real();
        }
    }

    // Composite Simpson between consecutive knots, accumulated from the first knot.
    auto integrate = [&](const std::vector<double>& y) {
        std::vector<double> cum(knots.size(), 0.0);
        for (std::size_t i = 1; i < knots.size(); ++i) {
            const std::size_t a = knot_at[i - 1], b = knot_at[i];
            const double step = (grid[b] - grid[a]) / double(b - a);
            double s = y[a] + y[b];
            for (std::size_t k = a + 1; k < b; ++k) s += ((k - a) % 2 ? 4.0 : 2.0) * y[k];
            cum[i] = cum[i - 1] + s * step / 3.0;
        }
        return cum;
    };
    const auto cum_v = integrate(f_virial);
    const auto cum_c = integrate(f_ces);
    const std::size_t zero = static_cast<std::size_t>(std::find(knots.begin(), knots.end(), 0.0) - knots.begin());
    const double xsq0 = xsq[knot_at[zero]];
    const double e0 = energy[knot_at[zero]];

    double lhs_scale = 1.0 + xsq0, worst = 0.0;
    for (double t : times) {
        const std::size_t ki = static_cast<std::size_t>(std::lower_bound(knots.begin(), knots.end(), t) - knots.begin());
        const std::size_t g = knot_at[ki];
        const double xn = std::sqrt(nrm[g] * nrm[g] + xsq[g]);
        tr.x_norms.push_back(xn);
        tr.rate_running.push_back(t != 0.0 ? xn / std::fabs(t) : 0.0);
        tr.cesaro.push_back(t != 0.0 ? (cum_c[ki] - cum_c[zero]) / t : 0.0);
        const double lhs = xsq[g] - xsq0, rhs = cum_v[ki] - cum_v[zero];
        tr.xnorm_identity_lhs.push_back(lhs);
        tr.xnorm_identity_rhs.push_back(rhs);
        lhs_scale = std::max(lhs_scale, std::fabs(lhs));
        worst = std::max(worst, std::fabs(lhs - rhs));
        tr.norm_drift = std::max(tr.norm_drift, std::fabs(nrm[g] - 1.0));
        tr.energy_drift = std::max(tr.energy_drift, std::fabs(energy[g] - e0));
    }
    tr.xnorm_identity_error = worst / lhs_scale;
    tr.rate_fit = fit_rate(times, tr.x_norms, opt.window);
    return tr;
}

BandRate band_filtered_rate(const Symbol& f, const SpectralData& sd, const OperatorMatrix& H, Interval lambda,
                            const Vector& seed, const std::vector<double>& times, const MourreConstants& constants,
                            const TraceOptions& opt) {
    const Bump phi{lambda, 0.5};
    Eigen::VectorXd w(sd.eigenvalues.size());
    for (long i = 0; i < w.size(); ++i) w[i] = phi(sd.eigenvalues[i]);
    const Vector filtered = sd.eigenvectors * (w.cast<cplx>().asDiagonal() * (sd.eigenvectors.adjoint() * seed));
    BandRate br;
    br.filtered_norm = filtered.norm();
    if (br.filtered_norm < 1e-6) throw GuardError("empty band: ||Phi(H) phi|| < 1e-6");
    br.trace = propagation_trace(f, sd, H, filtered / br.filtered_norm, times, opt);
    br.rate = br.trace.rate_fit.rate;
    br.rate_stderr = br.trace.rate_fit.stderr_;
    br.sqrt_c = std::sqrt(constants.c);
    br.sqrt_C = std::sqrt(constants.C);
    br.sqrt_c_sharp = std::sqrt(constants.c_sharp);
    br.sqrt_C_flat = std::sqrt(constants.C_flat);
    const double tol = 0.1 * br.sqrt_C;
    br.inside = br.rate >= br.sqrt_c - tol && br.rate <= br.sqrt_C + tol;
    return br;
}

HeisenbergResult heisenberg_limit(const Symbol& f, const SpectralData& sd, const Vector& phi, const OperatorMatrix& A,
                                  const std::vector<double>& times, Boundary boundary) {
    require_ascending(times);
    const Space& sp = sd.space;
    if (sp.is_half_line()) throw Error("heisenberg_limit acts on a lattice box");
    const Vector phi0 = normalized(phi, nullptr);
    double t_abs = 0.0;
    for (double t : times) {
        if (t == 0.0) throw Error("heisenberg_limit needs nonzero times");
        t_abs = std::max(t_abs, std::fabs(t));
    }
    if (boundary == Boundary::Truncate) {
        const GuardResult g = lightcone_guard(f, support_radius(sp, phi0), sp, t_abs);
        if (!g.ok) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "light-cone guard violated: t_max=%g exceeds max_safe_t=%.6g", t_abs,
                          g.max_safe_t);
            throw GuardError(buf, g.max_safe_t);
        }
    }
    const Vector target = laurent_matrix(grad_norm_sq(f), sp.N, boundary).data() * phi0;
    const Vector Aphi = A.data() * phi0;
    HeisenbergResult res;
    res.times = times;
    res.target_norm = target.norm();
    const Matrix& V = sd.eigenvectors;
    for (double t : times) {
        Vector c = V.adjoint() * phi0;
        for (long i = 0; i < c.size(); ++i) c[i] *= std::polar(1.0, sd.eigenvalues[i] * t);
        const Vector psi = V * c;
        Vector d = V.adjoint() * (A.data() * psi);
        for (long i = 0; i < d.size(); ++i) d[i] *= std::polar(1.0, -sd.eigenvalues[i] * t);
        const Vector back = V * d;
        res.residuals.push_back(((back - Aphi) / t - target).norm());
    }
    return res;
}

}  // namespace toeplab
