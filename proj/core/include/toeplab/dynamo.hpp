#pragma once

#include "toeplab/operator.hpp"
#include "toeplab/spectra.hpp"
#include "toeplab/symbol.hpp"

#include <limits>
#include <string>
#include <vector>

namespace toeplab {

// psi(t) = exp(iHt) phi for each t, from the eigendecomposition. Times must be ascending.
// A non-normalized phi is normalized first and *renormalized is set.
std::vector<Vector> evolve(const SpectralData& sd, const Vector& phi, const std::vector<double>& times,
                           bool* renormalized = nullptr);

struct GuardResult {
    bool ok = true;
    double max_safe_t = std::numeric_limits<double>::infinity();
    double velocity = 0.0;
    double distance = 0.0;
};

// ok iff t_max * max|grad f| <= 0.8 * (distance from the support of phi to the truncation edge).
GuardResult lightcone_guard(const Symbol& f, int support_radius, const Space& space, double t_max);
// n_max on the half-line (1-based), box radius on a lattice; mass outside is below tail^2 * ||phi||^2.
int support_radius(const Space& space, const Vector& phi, double tail = 1e-6);
double max_velocity(const Symbol& f);

struct FitWindow {
    double lo = 0.5;
    double hi = 1.0;
};

struct RateFit {
    double rate = 0.0;
    double stderr_ = 0.0;
    double rate_early = 0.0;  // window start moved earlier by 0.1 t_max
    double rate_late = 0.0;   // window start moved later by 0.1 t_max
    int samples = 0;
};

struct PropagationTrace {
    std::vector<double> times;
    std::vector<double> x_norms;
    std::vector<double> cesaro;        // (1/t) int_0^t ||f'(H-part) psi(s)||^2 ds, 0 at t = 0
    std::vector<double> rate_running;  // ||psi(t)||_X / |t|
    RateFit rate_fit;
    bool lightcone_ok = true;
    GuardResult guard;
    // ||X psi(t)||^2 - ||X phi||^2 versus 2 int_0^t Re <i[X,H] psi, X psi> ds;
    // the error is relative to max(max |lhs|, ||phi||_X^2)
    std::vector<double> xnorm_identity_lhs, xnorm_identity_rhs;
    double xnorm_identity_error = 0.0;
    double norm_drift = 0.0;
    double energy_drift = 0.0;
    bool renormalized = false;
};

struct TraceOptions {
    FitWindow window;
    bool cesaro = true;
    double step_cap = 0.05;      // Simpson step <= min(step_cap, step_cap / max|f'|)
    double guard_tail = 1e-6;    // support radius of phi for the light-cone guard
};

// H must be built on the space of f's operator (T_f on the half-line, L_f on a box, plus any perturbation).
PropagationTrace propagation_trace(const Symbol& f, const OperatorMatrix& H, const Vector& phi,
                                   const std::vector<double>& times, const TraceOptions& opt = {});
PropagationTrace propagation_trace(const Symbol& f, const SpectralData& sd, const OperatorMatrix& H, const Vector& phi,
                                   const std::vector<double>& times, const TraceOptions& opt = {});

RateFit fit_rate(const std::vector<double>& times, const std::vector<double>& x_norms, FitWindow w);

struct BandRate {
    double rate = 0.0;
    double rate_stderr = 0.0;
    double filtered_norm = 0.0;  // ||Phi(H) phi|| before renormalization
    double sqrt_c = 0.0, sqrt_C = 0.0, sqrt_c_sharp = 0.0, sqrt_C_flat = 0.0;
    bool inside = false;  // sqrt(c) - tol <= rate <= sqrt(C) + tol with tol = 0.1 sqrt(C)
    PropagationTrace trace;
};

BandRate band_filtered_rate(const Symbol& f, const SpectralData& sd, const OperatorMatrix& H, Interval lambda,
                            const Vector& seed, const std::vector<double>& times, const MourreConstants& constants,
                            const TraceOptions& opt = {});

struct HeisenbergResult {
    std::vector<double> times;
    std::vector<double> residuals;
    double target_norm = 0.0;
};

// ||(1/t)(e^{-iHt} A e^{iHt} - A) phi - L_{|grad f|^2} phi|| for H = L_f on a box.
HeisenbergResult heisenberg_limit(const Symbol& f, const SpectralData& sd, const Vector& phi, const OperatorMatrix& A,
                                  const std::vector<double>& times, Boundary boundary = Boundary::Truncate);

std::vector<double> linspace(double a, double b, int n);

}  // namespace toeplab
