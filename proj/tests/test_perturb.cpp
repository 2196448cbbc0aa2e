#include "toeplab/error.hpp"
#include "toeplab/perturb.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <bit>
#include <cmath>

using namespace toeplab;

namespace {

Eigen::VectorXd eigs(const Matrix& M) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

int numerical_rank(const Matrix& M, double tol = 1e-10) {
    const auto ev = eigs(M);
    int r = 0;
    for (long i = 0; i < ev.size(); ++i) r += std::fabs(ev[i]) > tol;
    return r;
}

}  // namespace

TEST_CASE("sequence parsing and materialization") {
    const auto p = SequenceSpec::parse("power:2").materialize(4);
    CHECK(p == std::vector<double>{1.0, 0.25, 1.0 / 9, 1.0 / 16});
    const auto o = SequenceSpec::parse("oscillatory:1").materialize(4);
    CHECK(o == std::vector<double>{-1.0, 0.5, -1.0 / 3, 0.25});
    const auto e = SequenceSpec::parse("explicit:0.5,-0.25").materialize(4);
    CHECK(e == std::vector<double>{0.5, -0.25, 0.0, 0.0});
    const auto s = SequenceSpec::parse("sparse:2=1.5;4=-1").materialize(5);
    CHECK(s == std::vector<double>{0.0, 1.5, 0.0, -1.0, 0.0});
    const auto l = SequenceSpec::parse("log_power:1").materialize(3);
    CHECK(l[0] == doctest::Approx(1.0 / std::log(3.0)));
    CHECK(l[2] == doctest::Approx(1.0 / std::log(5.0)));
    CHECK_THROWS_AS(SequenceSpec::parse("bogus:1"), Error);
    CHECK_THROWS_AS(SequenceSpec::parse("power:x"), Error);
    for (const char* t : {"power:2", "log_power:1", "oscillatory:1", "dyadic_steps:1", "explicit:1,2"})
        CHECK(SequenceSpec::parse(SequenceSpec::parse(t).describe()).materialize(8) ==
              SequenceSpec::parse(t).materialize(8));
}

TEST_CASE("dyadic step sequence matches a direct tail sum") {
    const auto g = SequenceSpec::dyadic_steps(1).materialize(64);
    // sum to the end of a dyadic block; the alternating remainder is below 1e-8
    const long K = (1L << 26) - 1;
    for (int n : {1, 5, 17, 64}) {
        long double s = 0;
        for (long k = K; k >= n; --k)
            s += ((std::bit_width(std::size_t(k)) - 1) % 2 ? -1.0L : 1.0L) / ((long double)k * k);
        CHECK(std::fabs(g[n - 1] - double(s)) < 2e-8);
    }
}

TEST_CASE("diagonal potentials") {
    const auto V = diagonal_potential(SequenceSpec::power(2), 4);
    CHECK(V.hermitian());
    for (int i = 0; i < 4; ++i) CHECK(V.data()(i, i).real() == doctest::Approx(1.0 / ((i + 1.0) * (i + 1.0))));
    CHECK(V.data()(0, 1) == cplx(0.0));

    const auto B = diagonal_potential(SequenceSpec::explicit_values({2.0}), 5);
    CHECK(B.data()(0, 0) == cplx(2.0));
    CHECK(B.data().cwiseAbs().sum() == 2.0);

    const auto O = diagonal_potential(SequenceSpec::oscillatory(1), 4);
    CHECK(O.data()(0, 0).real() == -1.0);
    CHECK(O.data()(1, 1).real() == 0.5);
    CHECK(O.data()(2, 2).real() == doctest::Approx(-1.0 / 3));
    CHECK(O.data()(3, 3).real() == 0.25);

    SequenceSpec shallow = SequenceSpec::power(1);
    shallow.horizon = 3;
    CHECK_THROWS_AS(diagonal_potential(shallow, 4), Error);

    const Space box = Space::lattice(2, 2);
    const auto W = diagonal_potential(SequenceSpec::power(2), box);
    CHECK(W.data()(box.index_of({0, 0}), box.index_of({0, 0})).real() == 1.0);
    CHECK(W.data()(box.index_of({2, -1}), box.index_of({2, -1})).real() == doctest::Approx(1.0 / 9));
}

TEST_CASE("seminorm q") {
    CHECK(seminorm_q(SequenceSpec::power(1), 0, 100000) == doctest::Approx(1.0));
    CHECK(std::fabs(seminorm_q(SequenceSpec::power(1), 1, 100000) - 1.5) < 1e-6);
    const auto c = SequenceSpec::explicit_values(std::vector<double>(200, -0.7));
    for (int k = 0; k <= 3; ++k) CHECK(seminorm_q(c, k, 100) == doctest::Approx(0.7));
    const double a = seminorm_q(SequenceSpec::log_power(1), 2, 10000);
    const double b = seminorm_q(SequenceSpec::log_power(1), 2, 100000);
    CHECK(std::fabs(a - b) / b < 5e-4);
    for (const auto& s : {SequenceSpec::power(2), SequenceSpec::oscillatory(1), SequenceSpec::log_power(1),
                          SequenceSpec::dyadic_steps(1)}) {
        const double q0 = seminorm_q(s, 0, 1000), q1 = seminorm_q(s, 1, 1000), q2 = seminorm_q(s, 2, 1000);
        CHECK(q0 <= q1);
        CHECK(q1 <= q2);
    }
}

TEST_CASE("admissibility examples") {
    auto r = admissibility_check(SequenceSpec::power(2), Condition::S);
    CHECK(r.verdict == Verdict::Converges);
    CHECK(r.tail_exponent == doctest::Approx(-2.0).epsilon(0.01));
    r = admissibility_check(SequenceSpec::power(1), Condition::S);
    CHECK(r.verdict == Verdict::Diverges);
    r = admissibility_check(SequenceSpec::power(2), Condition::H);
    CHECK(r.verdict == Verdict::Converges);
    CHECK(r.tail_exponent == doctest::Approx(-1.5).epsilon(0.01));
    r = admissibility_check(SequenceSpec::power(1), Condition::H);
    CHECK(r.verdict == Verdict::Diverges);
    CHECK(r.tail_exponent == doctest::Approx(-0.5).epsilon(0.02));
    r = admissibility_check(SequenceSpec::log_power(1), Condition::L);
    CHECK(r.verdict == Verdict::Converges);
    CHECK(r.limit_ok);
    CHECK(r.q_stable);
    r = admissibility_check(SequenceSpec::dyadic_steps(1), Condition::M);
    CHECK(r.verdict == Verdict::Converges);
    CHECK(r.tail_exponent == doctest::Approx(-2.0).epsilon(0.02));
    r = admissibility_check(SequenceSpec::oscillatory(1), Condition::S);
    CHECK(r.verdict == Verdict::Diverges);
}

TEST_CASE("admissibility verdict rules") {
    CHECK(admissibility_check(SequenceSpec::power(2), Condition::S, 1, 2, 100).verdict == Verdict::Inconclusive);
    CHECK_THROWS_AS(admissibility_check(SequenceSpec::power(2), Condition::S, 2, 1), Error);
    CHECK(admissibility_check(SequenceSpec::sparse({3}, {1.0}), Condition::S).verdict == Verdict::Converges);
    // borderline exponent resolved by logarithmic growth of the cumulative integral
    const auto r = admissibility_check(SequenceSpec::power(1), Condition::S);
    CHECK(std::fabs(r.tail_exponent + 1.0) < kVerdictMargin);
    CHECK(r.r2 >= kMinR2);
}

TEST_CASE("verdicts are stable under doubling r_max") {
    for (const auto& [spec, cond] : std::vector<std::pair<SequenceSpec, Condition>>{
             {SequenceSpec::power(2), Condition::S},
             {SequenceSpec::power(1), Condition::S},
             {SequenceSpec::power(2), Condition::H},
             {SequenceSpec::power(1), Condition::H},
             {SequenceSpec::log_power(1), Condition::L}}) {
        const auto a = admissibility_check(spec, cond, 1, 2, 1e4);
        const auto b = admissibility_check(spec, cond, 1, 2, 2e4);
        if (a.verdict != Verdict::Inconclusive && b.verdict != Verdict::Inconclusive) CHECK(a.verdict == b.verdict);
    }
}

TEST_CASE("limit check") {
    CHECK(limit_vanishes(SequenceSpec::power(1).materialize(4096)));
    CHECK(limit_vanishes(SequenceSpec::log_power(1).materialize(4096)));
    CHECK_FALSE(limit_vanishes(std::vector<double>(4096, 0.3)));
}

TEST_CASE("finite rank perturbations") {
    const int N = 30;
    const auto V = finite_rank({unit_vector(N, 0)}, {2.0}, N);
    CHECK(V.data()(0, 0) == cplx(2.0));
    CHECK(V.data().cwiseAbs().sum() == 2.0);

    Vector psi(N);
    for (int n = 0; n < N; ++n) psi[n] = 1.0 / ((n + 1.0) * (n + 1.0));
    psi.normalize();
    const auto P = finite_rank({psi}, {1.0}, N);
    CHECK(P.data().trace().real() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(numerical_rank(P.data()) == 1);
    CHECK((P.data() - P.data().adjoint()).cwiseAbs().maxCoeff() == 0.0);

    Vector u = Vector::Zero(N), w = Vector::Zero(N);
    u[0] = u[1] = 1 / std::sqrt(2.0);
    w[0] = 1 / std::sqrt(2.0);
    w[1] = -1 / std::sqrt(2.0);
    const auto ev = eigs(finite_rank({u, w}, {1.0, -1.0}, N).data());
    CHECK(ev[0] == doctest::Approx(-1.0));
    CHECK(ev[N - 1] == doctest::Approx(1.0));
    CHECK(numerical_rank(finite_rank({u, w}, {1.0, -1.0}, N).data()) == 2);
    CHECK_THROWS_AS(finite_rank({u}, {1.0, 2.0}, N), Error);
    CHECK_THROWS_AS(finite_rank({Vector::Zero(N - 1)}, {1.0}, N), Error);
}

TEST_CASE("gsah probe") {
    const int N = 2048;
    const auto V = diagonal_potential(SequenceSpec::power(2), N);
    auto r = gsah_probe(V, 1.0);
    CHECK(r.horizon_shrunk);
    CHECK(r.r_max_used == doctest::Approx(1024.0));
    CHECK(r.verdict == Verdict::Converges);
    CHECK(r.tail_exponent == doctest::Approx(-2.0).epsilon(0.02));

    const auto I = OperatorMatrix(Space::half_line(N), Matrix::Identity(N, N), "1");
    CHECK(gsah_probe(I, 1.0).verdict == Verdict::Diverges);

    const auto B = finite_rank({unit_vector(N, 0)}, {2.0}, N);
    r = gsah_probe(B, 1.5);
    CHECK(r.verdict == Verdict::Converges);
    for (std::size_t i = 0; i < r.r.size(); ++i)
        if (r.r[i] > 1.0) CHECK(r.integrand[i] == 0.0);

    // a dense (non-diagonal) operator takes the general path
    const int M = 1024;
    Vector psi(M);
    for (int n = 0; n < M; ++n) psi[n] = std::pow(n + 1.0, -3.0);
    const auto F = finite_rank({psi}, {1.0}, M);
    CHECK(gsah_probe(F, 1.0).verdict == Verdict::Converges);
    CHECK_THROWS_AS(gsah_probe(V, 2.5), Error);
}

TEST_CASE("power potentials passing S steeply also pass the gsah probe") {
    for (double p : {1.5, 2.0, 3.0}) {
        const auto s = admissibility_check(SequenceSpec::power(p), Condition::S);
        REQUIRE(s.verdict == Verdict::Converges);
        if (s.tail_exponent < -1.5) {
            const auto g = gsah_probe(diagonal_potential(SequenceSpec::power(p), 2048), 1.0);
            CHECK(g.verdict == Verdict::Converges);
        }
    }
}
