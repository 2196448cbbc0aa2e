#pragma once

#include "toeplab/operator.hpp"
#include "toeplab/symbol.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace toeplab {

struct SpectralData {
    Space space;
    Eigen::VectorXd eigenvalues;  // ascending
    Matrix eigenvectors;          // orthonormal columns
    std::string source_label;
};

SpectralData eigh(const OperatorMatrix& H);

// Mass of v on the outer `fraction` of sites: last fraction*N sites on the half-line, the box shell on lattices.
double boundary_leakage(const Space& space, const Vector& v, double fraction = 0.1);
std::vector<bool> edge_mask(const Space& space, double fraction = 0.1);

inline constexpr double kLeakageThreshold = 0.01;

// C^2 bump: 1 on the central plateau, quintic smoothstep edges, 0 outside the support.
struct Bump {
    Interval support;
    double plateau = 0.5;
    double operator()(double x) const;
};

OperatorMatrix spectral_projector(const SpectralData& sd, Interval lambda);
OperatorMatrix smoothed_function(const SpectralData& sd, const std::function<double(double)>& phi);

struct EigenvalueCountReport {
    Interval lambda;
    std::vector<int> ladder;
    std::vector<int> counts;
    std::vector<std::vector<double>> eigenvalues;  // counted eigenvalues per rung
    std::optional<int> stabilized_count;
    std::vector<int> multiplicities;  // at the largest rung
    double distance_to_thresholds = 0.0;
    bool threshold_warning = false;
};

using HamiltonianBuilder = std::function<OperatorMatrix(int N)>;

EigenvalueCountReport count_eigenvalues(const HamiltonianBuilder& builder, Interval lambda,
                                        const std::vector<int>& ladder, const std::vector<double>& thresholds,
                                        int threads = 1);

// max |<v, C v>| over eigenvectors whose boundary leakage is below `leakage_filter` (1 keeps all).
double virial_check(const SpectralData& sd, const OperatorMatrix& C, double leakage_filter = 1.0);

enum class MourreVerdict { Certified, BoundaryContaminated, Failed };
std::string to_string(MourreVerdict v);

struct MourreReport {
    Interval lambda;
    MourreConstants constants;
    int N = 0;
    double lambda_min_projected = 0.0;
    double lambda_min_interior = 0.0;
    double lambda_max_interior = 0.0;
    int n_test_vectors = 0;
    double boundary_leakage = 0.0;
    double interior_fraction = 0.5;
    double tol = 0.0;
    MourreVerdict verdict = MourreVerdict::Failed;
    std::string note;
};

inline constexpr double kMourreTolFraction = 0.15;

MourreReport mourre_verify(const OperatorMatrix& H, const OperatorMatrix& C, Interval lambda,
                           const MourreConstants& constants, double interior_fraction = 0.5,
                           double tol_fraction = kMourreTolFraction);
MourreReport mourre_verify(const SpectralData& sd, const OperatorMatrix& C, Interval lambda,
                           const MourreConstants& constants, double interior_fraction = 0.5,
                           double tol_fraction = kMourreTolFraction);

struct LapPoint {
    double eta = 0.0;
    double norm = 0.0;
    bool above_floor = true;
};

struct LapProfile {
    double lambda = 0.0;
    double floor = 0.0;
    std::vector<LapPoint> points;
};

LapProfile lap_probe(const OperatorMatrix& H, const OperatorMatrix& A, double lambda, const std::vector<double>& etas);
LapProfile lap_probe(const SpectralData& sdH, const SpectralData& sdA, double lambda, const std::vector<double>& etas);

// Log-log slope of the profile over the points above the floor.
double lap_slope(const LapProfile& p);
// Relative change of the norm per decade of eta over the points above the floor.
double lap_variation_per_decade(const LapProfile& p);

// Largest singular value of a matrix-free operator by Lanczos on M^* M.
double lanczos_norm(const std::function<Vector(const Vector&)>& apply, const std::function<Vector(const Vector&)>& apply_adj,
                    long dim, int max_iter = 200, double rtol = 1e-12);

}  // namespace toeplab
