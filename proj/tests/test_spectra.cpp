#include "helpers.hpp"
#include "oracles.hpp"

#include "toeplab/error.hpp"
#include "toeplab/perturb.hpp"
#include "toeplab/spectra.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace toeplab;
using testing_helpers::cos_sum;
using testing_helpers::two_cos;

namespace {

double max_abs(const Matrix& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }

OperatorMatrix rank1_model(double beta, int N) {
    return sum(toeplitz_matrix(two_cos(), N), finite_rank({unit_vector(N, 0)}, {beta}, N));
}

// i[A_{f'}, H] for H = T_f + V, formula part plus the exact commutator with V.
OperatorMatrix mourre_commutator(const Symbol& f, const OperatorMatrix& V) {
    const int N = static_cast<int>(V.dim());
    const auto A = conjugate_operator(derivative(f), Space::half_line(N));
    return sum(commutator_formula_rhs(f, derivative(f), N), icommutator(A, V));
}

}  // namespace

TEST_CASE("eigh") {
    const auto sd = eigh(toeplitz_matrix(two_cos(), 3));
    CHECK(sd.eigenvalues[0] == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-14));
    CHECK(std::fabs(sd.eigenvalues[1]) < 1e-14);
    CHECK(sd.eigenvalues[2] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    const auto id = eigh(toeplitz_matrix(Symbol::constant(1.0), 6));
    for (long i = 0; i < 6; ++i) CHECK(id.eigenvalues[i] == doctest::Approx(1.0));

    const auto big = eigh(toeplitz_matrix(two_cos(), 200));
    CHECK(big.eigenvalues[0] > -2.0);
    CHECK(big.eigenvalues[199] < 2.0);
    CHECK(big.eigenvalues[199] > 2.0 - 3e-4);
    CHECK(big.eigenvalues[0] < -2.0 + 3e-4);

    const OperatorMatrix bad(Space::half_line(2), (Matrix(2, 2) << 0, 1, 0, 0).finished(), "nilpotent");
    CHECK_THROWS_AS(eigh(bad), Error);
}

TEST_CASE("eigh invariants on real, tridiagonal-complex and dense complex inputs") {
    std::mt19937_64 rng(31);
    const int N = 60;
    const Symbol g = oracle::random_real_symbol(rng, 3);
    const std::vector<OperatorMatrix> inputs{
        toeplitz_matrix(g, N),
        conjugate_operator(derivative(two_cos()), Space::half_line(N)),
        conjugate_operator(g, Space::half_line(N)),
        laurent_matrix(testing_helpers::laplacian(2), 4),
    };
    for (const auto& H : inputs) {
        const auto sd = eigh(H);
        const double scale = operator_norm(H.data());
        const Matrix R = H.data() * sd.eigenvectors - sd.eigenvectors * sd.eigenvalues.cast<cplx>().asDiagonal();
        CHECK(R.colwise().norm().maxCoeff() < 1e-10 * scale);
        const long n = sd.eigenvectors.cols();
        CHECK(max_abs(sd.eigenvectors.adjoint() * sd.eigenvectors - Matrix::Identity(n, n)) < 1e-11);
        for (long i = 1; i < n; ++i) CHECK(sd.eigenvalues[i] >= sd.eigenvalues[i - 1]);
    }
}

TEST_CASE("spectral projectors") {
    const auto sd = eigh(toeplitz_matrix(two_cos(), 3));
    CHECK(max_abs(spectral_projector(sd, {-5, 5}).data() - Matrix::Identity(3, 3)) < 1e-14);
    CHECK(max_abs(spectral_projector(sd, {-9, -5}).data()) == 0.0);
    const Matrix P = spectral_projector(sd, {-0.5, 0.5}).data();
    Vector v(3);
    v << 1, 0, -1;
    v /= std::sqrt(2.0);
    CHECK(max_abs(P - v * v.adjoint()) < 1e-14);

    const auto sd2 = eigh(rank1_model(2.0, 80));
    const Matrix E1 = spectral_projector(sd2, {-1, 0.5}).data(), E2 = spectral_projector(sd2, {0.6, 3}).data();
    CHECK(max_abs(E1 * E1 - E1) < 1e-11);
    CHECK(max_abs(E1 - E1.adjoint()) < 1e-11);
    CHECK(max_abs(E1 * E2) < 1e-11);
}

TEST_CASE("bump and smoothed functions") {
    const Bump b{{-1.0, 1.0}, 0.5};
    CHECK(b(0.0) == 1.0);
    CHECK(b(0.5) == 1.0);
    CHECK(b(-1.0) == 0.0);
    CHECK(b(1.2) == 0.0);
    CHECK(b(0.75) == doctest::Approx(0.5));
    // C^1 at the plateau edge: one-sided difference quotients match
    const double h = 1e-6;
    CHECK(std::fabs((b(0.5 + h) - b(0.5)) / h) < 1e-4);

    const auto sd = eigh(rank1_model(2.0, 40));
    CHECK(max_abs(smoothed_function(sd, [](double) { return 1.0; }).data() - Matrix::Identity(40, 40)) < 1e-12);
    const Matrix Phi = smoothed_function(sd, b).data();
    const Matrix Phi2 = smoothed_function(sd, [&](double x) { return b(x) * b(x); }).data();
    CHECK(max_abs(Phi * Phi - Phi2) < 1e-12);

    const auto sd3 = eigh(toeplitz_matrix(two_cos(), 3));
    const Bump nb{{-0.5, 0.5}, 0.5};
    CHECK(max_abs(smoothed_function(sd3, nb).data() - nb(0.0) * spectral_projector(sd3, {-0.5, 0.5}).data()) < 1e-14);
}

TEST_CASE("eigenvalue counting for the rank-one model") {
    const auto thr = std::vector<double>{-2.0, 2.0};
    auto build = [](double beta) { return [beta](int N) { return rank1_model(beta, N); }; };
    const auto r = count_eigenvalues(build(2.0), {2.1, 3.0}, {100, 200, 300, 400}, thr, 2);
    REQUIRE(r.stabilized_count.has_value());
    CHECK(*r.stabilized_count == 1);
    CHECK(std::fabs(r.eigenvalues.back()[0] - 2.5) < 1e-6);
    CHECK(std::fabs(r.eigenvalues.back()[0] - oracle::rank1_top_eigenvalue(2.0, 400)) < 1e-10);
    CHECK(r.multiplicities == std::vector<int>{1});
    CHECK(r.distance_to_thresholds == doctest::Approx(0.1));
    CHECK_FALSE(r.threshold_warning);

    const auto r0 = count_eigenvalues(build(0.5), {2.05, 3.0}, {100, 200, 400}, thr);
    REQUIRE(r0.stabilized_count.has_value());
    CHECK(*r0.stabilized_count == 0);

    const auto free = count_eigenvalues([](int N) { return toeplitz_matrix(two_cos(), N); }, {-1.0, 1.0},
                                        {100, 200, 400}, thr);
    REQUIRE(free.stabilized_count.has_value());
    CHECK(*free.stabilized_count == 0);

    CHECK(count_eigenvalues(build(2.0), {1.5, 3.0}, {50, 100, 150}, thr).threshold_warning);
}

TEST_CASE("ladder results do not depend on the thread count") {
    auto build = [](int N) { return rank1_model(-3.0, N); };
    const auto a = count_eigenvalues(build, {-4.0, -2.2}, {60, 90, 120, 150}, {-2.0, 2.0}, 1);
    const auto b = count_eigenvalues(build, {-4.0, -2.2}, {60, 90, 120, 150}, {-2.0, 2.0}, 3);
    CHECK(a.counts == b.counts);
    CHECK(a.eigenvalues == b.eigenvalues);
}

TEST_CASE("virial identities") {
    const int N = 400;
    const auto H = rank1_model(2.0, N);
    const auto sd = eigh(H);
    const auto A = conjugate_operator(derivative(two_cos()), Space::half_line(N));
    const auto C = icommutator(A, H);
    CHECK(virial_check(sd, C) < 1e-12 * operator_norm(C.data()));

    // the bound state sees the full commutator i[A, T_f + V] with the formula right-hand side for T_f
    const auto Cf = mourre_commutator(two_cos(), finite_rank({unit_vector(N, 0)}, {2.0}, N));
    Vector bound = sd.eigenvectors.col(N - 1);
    REQUIRE(sd.eigenvalues[N - 1] == doctest::Approx(2.5));
    CHECK(std::abs(bound.dot(Cf.data() * bound)) < 1e-8);
}

TEST_CASE("Mourre certificate for free and perturbed 2cos") {
    const Symbol f = two_cos();
    const Interval lam{-1.0, 1.0};
    const auto mc = mourre_constants(f, grad_norm_sq(f), lam);
    const int N = 256;
    const auto V = diagonal_potential(SequenceSpec::power(2), N);
    for (const auto& H : {toeplitz_matrix(f, N), sum(toeplitz_matrix(f, N), V)}) {
        const auto C = mourre_commutator(f, OperatorMatrix(Space::half_line(N), H.data() - toeplitz_matrix(f, N).data(), "V"));
        const auto rep = mourre_verify(H, C, lam, mc);
        CHECK(rep.verdict == MourreVerdict::Certified);
        CHECK(rep.lambda_min_interior >= mc.c - 0.1 * mc.c);
        CHECK(rep.boundary_leakage < kLeakageThreshold);
        CHECK(rep.lambda_min_interior <= rep.lambda_max_interior);
        CHECK(rep.lambda_max_interior <= mc.C_flat + rep.tol);
        CHECK(rep.n_test_vectors > 0);
    }
}

TEST_CASE("Mourre certificate degenerates at the threshold") {
    const Symbol f = two_cos();
    const Interval lam{1.8, 2.0};
    const auto mc = mourre_constants(f, grad_norm_sq(f), lam);
    CHECK(mc.c < 1e-6);
    const int N = 256;
    const auto rep = mourre_verify(toeplitz_matrix(f, N), commutator_formula_rhs(f, derivative(f), N), lam, mc);
    CHECK(rep.verdict == MourreVerdict::Failed);
    CHECK(rep.lambda_min_interior < 0.8);
}

TEST_CASE("LAP probe in the resolvent set is flat") {
    const int N = 200;
    const auto H = toeplitz_matrix(two_cos(), N);
    const auto A = conjugate_operator(derivative(two_cos()), Space::half_line(N));
    const auto p = lap_probe(H, A, 5.0, {1e-1, 1e-2, 1e-3, 1e-4});
    // eta -> 0 limit computed directly from the real resolvent
    const auto sdA = eigh(A);
    Eigen::VectorXd w(N);
    for (int i = 0; i < N; ++i) w[i] = 1 / std::sqrt(1 + sdA.eigenvalues[i] * sdA.eigenvalues[i]);
    const Matrix Ainv = sdA.eigenvectors * w.cast<cplx>().asDiagonal() * sdA.eigenvectors.adjoint();
    const Matrix R = (5.0 * Matrix::Identity(N, N) - H.data()).inverse();
    const double ref = operator_norm(Ainv * R * Ainv);
    CHECK(p.points.back().norm == doctest::Approx(ref).epsilon(1e-6));
    CHECK(lap_variation_per_decade(p) < 1e-3);
    CHECK_THROWS_AS(lap_probe(H, A, 0.0, {0.1, 0.0}), Error);
}

TEST_CASE("LAP probe plateau at N=1024 and monotone growth") {
    const int N = 1024;
    const auto sdH = eigh(toeplitz_matrix(two_cos(), N));
    const auto sdA = eigh(conjugate_operator(derivative(two_cos()), Space::half_line(N)));
    const auto p = lap_probe(sdH, sdA, 0.0, {1e-1, std::pow(10, -1.5), 1e-2, std::pow(10, -2.5)});
    double lo = 1e300, hi = 0;
    for (const auto& q : p.points) {
        lo = std::min(lo, q.norm);
        hi = std::max(hi, q.norm);
    }
    CHECK(hi / lo - 1.0 < 0.10);
    for (std::size_t i = 1; i < p.points.size(); ++i)
        if (p.points[i].above_floor) CHECK(p.points[i].norm >= p.points[i - 1].norm * (1 - 1e-12));
    CHECK(p.floor > 0.0);
}

TEST_CASE("LAP probe diverges like 1/eta at a bound state") {
    const int N = 400;
    const auto sdH = eigh(rank1_model(2.0, N));
    const auto sdA = eigh(conjugate_operator(derivative(two_cos()), Space::half_line(N)));
    const auto p = lap_probe(sdH, sdA, 2.5, {1e-2, 1e-3, 1e-4, 1e-5});
    CHECK(lap_slope(p) == doctest::Approx(-1.0).epsilon(0.05));
    for (std::size_t i = 1; i < p.points.size(); ++i) CHECK(p.points[i].norm > p.points[i - 1].norm);
}

TEST_CASE("Lanczos norm matches a dense SVD") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> nd;
    Matrix M(50, 50);
    for (long i = 0; i < M.size(); ++i) M.data()[i] = cplx(nd(rng), nd(rng));
    const double n = lanczos_norm([&](const Vector& x) -> Vector { return M * x; },
                                  [&](const Vector& x) -> Vector { return M.adjoint() * x; }, 50);
    CHECK(n == doctest::Approx(operator_norm(M)).epsilon(1e-10));
}

TEST_CASE("bulk spectra of T_f and T_f + V agree") {
    const int N = 400;
    const auto a = eigh(toeplitz_matrix(two_cos(), N)).eigenvalues;
    const auto b = eigh(sum(toeplitz_matrix(two_cos(), N), diagonal_potential(SequenceSpec::power(2), N))).eigenvalues;
    std::vector<double> xa, xb;
    for (long i = 0; i < N; ++i) {
        if (std::fabs(a[i]) <= 1.5) xa.push_back(a[i]);
        if (std::fabs(b[i]) <= 1.5) xb.push_back(b[i]);
    }
    double ks = 0;
    for (double x = -1.5; x <= 1.5; x += 1e-3) {
        const double fa = double(std::upper_bound(xa.begin(), xa.end(), x) - xa.begin()) / xa.size();
        const double fb = double(std::upper_bound(xb.begin(), xb.end(), x) - xb.begin()) / xb.size();
        ks = std::max(ks, std::fabs(fa - fb));
    }
    CHECK(ks < 0.02);
}

TEST_CASE("boundary leakage") {
    const Space hl = Space::half_line(100);
    CHECK(boundary_leakage(hl, unit_vector(100, 0)) == 0.0);
    CHECK(boundary_leakage(hl, unit_vector(100, 95)) == 1.0);
    const Space box = Space::lattice(2, 10);
    CHECK(boundary_leakage(box, unit_vector(box.dim(), box.index_of({0, 0}))) == 0.0);
    CHECK(boundary_leakage(box, unit_vector(box.dim(), box.index_of({10, 3}))) == 1.0);
}
