#include "helpers.hpp"
#include "oracles.hpp"

#include "toeplab/error.hpp"
#include "toeplab/symbol.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace toeplab;
using testing_helpers::cos_sum;
using testing_helpers::laplacian;
using testing_helpers::two_cos;

namespace {

constexpr double pi = std::numbers::pi;

double torus_dist(double a, double b) {
    const double d = std::fmod(std::fabs(a - b), 2 * pi);
    return std::min(d, 2 * pi - d);
}

bool contains_point(const CriticalSet& k, double theta, double tol = 1e-8) {
    for (const auto& p : k.points)
        if (torus_dist(p[0], theta) < tol) return true;
    return false;
}

}  // namespace

TEST_CASE("from_coefficients builds 2cos as a real symbol") {
    const Symbol f = two_cos();
    CHECK(f.is_real());
    CHECK(f.dim() == 1);
    CHECK(f.max_bandwidth() == 1);
    for (double th : {0.0, 0.3, 1.7, 4.0}) CHECK(std::abs(f(th) - 2 * std::cos(th)) < 1e-14);
}

TEST_CASE("empty and constant symbols") {
    const Symbol z = Symbol::from_coefficients({}, 1);
    CHECK(z.is_zero());
    CHECK(z(1.234) == cplx(0.0));
    const Symbol one = Symbol::from_coefficients({{{0}, 1.0}}, 1);
    CHECK(one.is_constant());
    CHECK(one(2.0) == cplx(1.0));
}

TEST_CASE("duplicate index is rejected") {
    CHECK_THROWS_AS(Symbol::from_coefficients({{{1}, 1.0}, {{1}, 2.0}}, 1), Error);
    try {
        Symbol::from_coefficients({{{3}, 1.0}, {{3}, 2.0}}, 1);
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find('3') != std::string::npos);
    }
}

TEST_CASE("complex coefficients break realness") {
    CHECK_FALSE(Symbol::from_coefficients({{{1}, cplx(0, 1)}}, 1).is_real());
    CHECK(Symbol::from_coefficients({{{1}, cplx(0, 1)}, {{-1}, cplx(0, -1)}}, 1).is_real());
}

TEST_CASE("sample_fourier recovers trigonometric polynomials") {
    const Symbol f = sample_fourier([](std::span<const double> t) { return cplx(2 * std::cos(t[0])); }, {2}, {16});
    CHECK(f.coeffs().size() == 2);
    CHECK(std::abs(f.coeff(1) - 1.0) < 1e-14);
    CHECK(std::abs(f.coeff(-1) - 1.0) < 1e-14);
    CHECK(f.is_real());

    const Symbol l2 = sample_fourier(
        [](std::span<const double> t) { return cplx(2 * std::cos(t[0]) + 2 * std::cos(t[1])); }, {2, 2}, {16, 16});
    CHECK(l2.coeffs().size() == 4);
    for (auto a : {MultiIndex{1, 0}, MultiIndex{-1, 0}, MultiIndex{0, 1}, MultiIndex{0, -1}})
        CHECK(std::abs(l2.coeff(a) - 1.0) < 1e-14);
}

TEST_CASE("sample_fourier of exp(cos) matches a dense quadrature oracle") {
    auto ev = [](double t) { return cplx(std::exp(std::cos(t))); };
    const Symbol f = sample_fourier([&](std::span<const double> t) { return ev(t[0]); }, {12}, {64});
    for (int m : {0, 1, 5, 12}) {
        const cplx ref = oracle::fourier_coeff(ev, m, 1000000);
        CHECK(std::abs(f.coeff(m) - ref) < 1e-10);
    }
    CHECK(std::abs(f.coeff(0) - std::cyl_bessel_i(0.0, 1.0)) < 1e-10);
    // conjugate symmetry of a real evaluator
    for (const auto& [a, c] : f.coeffs()) CHECK(std::abs(f.coeff(MultiIndex{-a[0]}) - std::conj(c)) < 1e-12);
}

TEST_CASE("sample_fourier guards") {
    auto ev = [](std::span<const double> t) { return cplx(std::cos(t[0])); };
    CHECK_THROWS_AS(sample_fourier(ev, {4}, {16}), Error);
    auto bad = [](std::span<const double> t) { return cplx(t[0] > 3.0 ? std::nan("") : 1.0); };
    try {
        sample_fourier(bad, {1}, {8});
        FAIL("expected rejection");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("non-finite") != std::string::npos);
    }
}

TEST_CASE("derivative") {
    const Symbol d = derivative(two_cos());
    CHECK(std::abs(d.coeff(1) - cplx(0, 1)) < 1e-15);
    CHECK(std::abs(d.coeff(-1) - cplx(0, -1)) < 1e-15);
    CHECK(d.is_real());
    for (int j = 0; j < 8; ++j) {
        const double th = 0.7 * j + 0.1, h = 1e-5;
        const double fd = (2 * std::cos(th + h) - 2 * std::cos(th - h)) / (2 * h);
        CHECK(std::abs(d(th).real() - fd) < 1e-8);
    }
    CHECK(derivative(Symbol::constant(3.0)).is_zero());
    const Symbol dd = derivative(d);
    for (double th : {0.0, 1.0, 2.5}) CHECK(std::abs(dd(th) + 2 * std::cos(th)) < 1e-14);
}

TEST_CASE("derivative agrees with finite differences on a random symbol") {
    std::mt19937_64 rng(11);
    const Symbol f = oracle::random_real_symbol(rng, 5);
    const Symbol d = derivative(f);
    std::uniform_real_distribution<double> u(0, 2 * pi);
    for (int j = 0; j < 16; ++j) {
        const double th = u(rng), h = 1e-4;
        const double fd = (f(th + h) - f(th - h)).real() / (2 * h);
        CHECK(std::abs(d(th).real() - fd) < 1e-6);
    }
}

TEST_CASE("multiply") {
    const Symbol sq = multiply(two_cos(), two_cos());
    CHECK(sq.coeffs().size() == 3);
    CHECK(std::abs(sq.coeff(0) - 2.0) < 1e-15);
    CHECK(std::abs(sq.coeff(2) - 1.0) < 1e-15);
    CHECK(std::abs(sq.coeff(-2) - 1.0) < 1e-15);
    std::mt19937_64 rng(3);
    const Symbol s = oracle::random_real_symbol(rng, 3);
    const Symbol s1 = multiply(s, Symbol::constant(1.0));
    CHECK(s1.coeffs() == s.coeffs());
    const Symbol two_sin = scale(derivative(two_cos()), -1.0);
    const Symbol p = multiply(two_cos(), two_sin);
    for (int j = 0; j < 32; ++j) {
        const double th = 2 * pi * j / 32;
        CHECK(std::abs(p(th) - 2 * std::sin(2 * th)) < 1e-14);
    }
}

TEST_CASE("critical sets") {
    const auto k1 = critical_set(two_cos());
    CHECK(k1.points.size() == 2);
    CHECK(contains_point(k1, 0.0));
    CHECK(contains_point(k1, pi));
    CHECK(k1.is_exhaustive);

    const auto k2 = critical_set(laplacian(2));
    CHECK(k2.points.size() == 4);
    for (const auto& p : k2.points)
        for (double x : p) CHECK((torus_dist(x, 0.0) < 1e-8 || torus_dist(x, pi) < 1e-8));

    const Symbol f = cos_sum({{1, 1.0}, {2, 0.5}});
    const auto k3 = critical_set(f);
    CHECK(k3.points.size() == 4);
    for (double t : {0.0, pi, 2 * pi / 3, 4 * pi / 3}) CHECK(contains_point(k3, t));
    // each point is a zero of the gradient and points are separated
    for (const auto& p : k3.points) CHECK(std::abs(derivative(f)(p[0])) <= k3.tol);
    for (std::size_t i = 0; i < k3.points.size(); ++i)
        for (std::size_t j = i + 1; j < k3.points.size(); ++j)
            CHECK(torus_dist(k3.points[i][0], k3.points[j][0]) > k3.resolution / 2);

    CHECK_THROWS_WITH_AS(critical_set(Symbol::constant(1.0)), "constant symbol has no Mourre theory", Error);
}

TEST_CASE("critical set of 2cos+cos2 agrees with a bisection oracle on the factored gradient") {
    // f' = -2 sin(theta) (1 + 2 cos(theta))
    auto gp = [](double t) { return -2 * std::sin(t) * (1 + 2 * std::cos(t)); };
    std::vector<double> roots;
    const int M = 4000;
    for (int i = 0; i < M; ++i) {
        double a = 2 * pi * i / M, b = 2 * pi * (i + 1) / M;
        if (gp(a) == 0.0) {
            roots.push_back(a);
            continue;
        }
        if (gp(a) * gp(b) < 0) {
            for (int it = 0; it < 100; ++it) {
                const double m = 0.5 * (a + b);
                (gp(a) * gp(m) <= 0 ? b : a) = m;
            }
            roots.push_back(0.5 * (a + b));
        }
    }
    const auto k = critical_set(cos_sum({{1, 1.0}, {2, 0.5}}));
    REQUIRE(roots.size() == k.points.size());
    for (double r : roots) CHECK(contains_point(k, r, 1e-9));
}

TEST_CASE("thresholds") {
    const Symbol f = two_cos();
    const auto t = thresholds(f, critical_set(f));
    REQUIRE(t.size() == 2);
    CHECK(t[0] == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(t[1] == doctest::Approx(2.0).epsilon(1e-12));

    const Symbol l2 = laplacian(2);
    const auto t2 = thresholds(l2, critical_set(l2));
    REQUIRE(t2.size() == 3);
    CHECK(std::fabs(t2[0] + 4) < 1e-9);
    CHECK(std::fabs(t2[1]) < 1e-9);
    CHECK(std::fabs(t2[2] - 4) < 1e-9);

    const Symbol g = cos_sum({{1, 1.0}, {2, 0.5}});
    const auto t3 = thresholds(g, critical_set(g));
    REQUIRE(t3.size() == 3);
    CHECK(std::fabs(t3[0] + 1.5) < 1e-9);
    CHECK(std::fabs(t3[1] + 1.0) < 1e-9);
    CHECK(std::fabs(t3[2] - 3.0) < 1e-9);
}

TEST_CASE("thresholds lie in the sampled range") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 5; ++trial) {
        const Symbol f = oracle::random_real_symbol(rng, 4);
        double lo = 1e300, hi = -1e300;
        for (int j = 0; j < 4096; ++j) {
            const double v = f(2 * pi * j / 4096).real();
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        // grid extremes miss the true ones by at most max|f''| h^2 / 8
        const double h = 2 * pi / 4096, slack = f.derivative_bound(2) * h * h / 8 + 1e-12;
        for (double t : thresholds(f, critical_set(f))) {
            CHECK(t >= lo - slack);
            CHECK(t <= hi + slack);
        }
    }
}

TEST_CASE("Mourre constants for 2cos with g = |f'|^2") {
    const Symbol f = two_cos();
    const Symbol g = grad_norm_sq(f);
    const auto mc = mourre_constants(f, g, {-1.0, 1.0});
    CHECK(mc.c == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(mc.C == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(mc.c_sharp <= mc.c);
    CHECK(mc.C <= mc.C_flat);
    CHECK(mc.table.size() == kDefaultEnlargements.size());

    CHECK(mourre_constants(f, g, {-2.0, 2.0}).c < 1e-9);

    const auto pt = mourre_constants(f, g, {0.0, 0.0});
    CHECK(pt.c == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(pt.C == doctest::Approx(4.0).epsilon(1e-9));

    CHECK_THROWS_WITH_AS(mourre_constants(f, g, {3.0, 4.0}), "Λ ∩ Ran f = ∅", Error);
}

TEST_CASE("Mourre constant is positive away from thresholds") {
    const Symbol f = two_cos();
    const Symbol g = grad_norm_sq(f);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(-1.95, 1.95);
    for (int i = 0; i < 20; ++i) {
        double a = u(rng), b = u(rng);
        if (a > b) std::swap(a, b);
        const auto mc = mourre_constants(f, g, {a, b});
        const double m = std::max(a * a, b * b);
        CHECK(mc.c > 0.0);
        CHECK(mc.c == doctest::Approx(4.0 - m).epsilon(1e-6));
        CHECK(mc.c_sharp <= mc.c);
        CHECK(mc.c <= mc.C);
        CHECK(mc.C <= mc.C_flat);
    }
}

TEST_CASE("text serialization round-trips exactly") {
    std::mt19937_64 rng(23);
    const Symbol f = oracle::random_real_symbol(rng, 4);
    const Symbol back = from_text(to_text(f));
    CHECK(back.coeffs() == f.coeffs());
    CHECK(back.is_real() == f.is_real());
    const Symbol l2 = laplacian(2);
    CHECK(from_text(to_text(l2)).coeffs() == l2.coeffs());
    CHECK(to_text(l2).rfind("dim=2", 0) == 0);
}
