#include <doctest.h>

#include "oracles.hpp"
#include "ssmshrink/lqo.hpp"

using namespace ssmshrink;

TEST_CASE("recursive simulation matches the Volterra form and a dense state update")
{
    Rng rng(11);
    for (int trial = 0; trial < 20; ++trial)
    {
        const int n = 1 + trial % 8, m = 1 + trial % 3, L = 5 + 3 * trial;
        const auto s = oracle::random_lqo(rng, n, m, m, 1 + trial % 2);
        const ComplexSignal u = complex_normal_matrix(rng, m, L, 1.0);
        const auto y = simulate_recursive(s, u, Horizon(L));
        CHECK(oracle::rel_diff(y, simulate_convolution(s, u, Horizon(L))) < 1e-10);
        CHECK(oracle::rel_diff(y, oracle::simulate_dense(s, u, L)) < 1e-12);
    }
}

TEST_CASE("real input overload equals the complex one")
{
    Rng rng(3);
    const auto s = oracle::random_lqo(rng, 4, 2, 2, 1);
    const RealSignal u = oracle::random_signal(rng, 2, 10);
    CHECK(simulate_recursive(s, u, Horizon(10)) ==
          simulate_recursive(s, ComplexSignal(u.cast<cplx>()), Horizon(10)));
}

TEST_CASE("assembled M acting on x kron conj(x) gives the quadratic outputs")
{
    Rng rng(5);
    const auto s = oracle::random_lqo(rng, 5, 2, 3, 2);
    const CMatrix M = assemble_M(s.U());
    REQUIRE(M.rows() == 3);
    REQUIRE(M.cols() == 25);
    const CVector x = complex_normal_matrix(rng, 5, 1, 1.0);
    CVector kx(25);
    for (int i = 0; i < 5; ++i)
        for (int k = 0; k < 5; ++k)
            kx(i * 5 + k) = x(i) * std::conj(x(k));
    const CVector q = M * kx;
    for (int j = 0; j < 3; ++j)
    {
        CHECK(std::abs(q(j) - x.dot(s.M(j) * x)) < 1e-12);
        CHECK(std::abs(q(j).imag()) < 1e-12);
    }
}

TEST_CASE("quadratic kernel contracts with conj(u) kron v")
{
    Rng rng(8);
    const auto s = oracle::random_lqo(rng, 4, 2, 2, 1);
    const auto h2 = kernel_h2(s, Horizon(4));
    const auto X = oracle::impulse_states(s, 4);
    const CVector u = complex_normal_matrix(rng, 2, 1, 1.0);
    const CVector v = complex_normal_matrix(rng, 2, 1, 1.0);
    CVector w(4);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            w(a * 2 + b) = std::conj(u(a)) * v(b);
    const CVector got = h2[1][3] * w;
    for (int j = 0; j < 2; ++j)
    {
        const cplx want = (X[1] * u).dot(s.M(j) * (X[3] * v));
        CHECK(std::abs(got(j) - want) < 1e-12);
    }
}

TEST_CASE("h2_L norm and error match brute-force kernel sums")
{
    Rng rng(21);
    for (int trial = 0; trial < 10; ++trial)
    {
        const int n = 2 + trial % 7, m = 1 + trial % 3, L = 4 + 6 * trial;
        const auto s = oracle::random_lqo(rng, n, m, m, 1);
        const auto sh = oracle::random_lqo(rng, 1 + trial % 4, m, m, 1);
        const auto e0 = oracle::kernel_energy_difference(s, nullptr, L);
        const auto k = kernel_norms_sq(s, Horizon(L));
        CHECK(oracle::rel_diff(k.linear, e0.linear) < 1e-9);
        CHECK(oracle::rel_diff(k.quadratic, e0.quadratic) < 1e-9);
        CHECK(oracle::rel_diff(h2l_norm_sq(s, Horizon(L)), e0.linear + e0.quadratic) < 1e-9);
        const auto e = oracle::kernel_energy_difference(s, &sh, L);
        CHECK(oracle::rel_diff(h2l_error_sq(s, sh, Horizon(L)), e.linear + e.quadratic) < 1e-9);
    }
}

TEST_CASE("error against itself is zero and against the zero system is the norm")
{
    Rng rng(2);
    const auto s = oracle::random_lqo(rng, 6, 2, 2, 1);
    CHECK(h2l_error_sq(s, s, Horizon(32)) <= 1e-12);
    const auto z = LqoSystem::zero(3, 2, 2, 1);
    CHECK(h2l_error_sq(s, z, Horizon(32)) ==
          doctest::Approx(h2l_norm_sq(s, Horizon(32))).epsilon(1e-12));
}

TEST_CASE("error is invariant under a diagonal unitary change of reduced coordinates")
{
    Rng rng(9);
    const auto s = oracle::random_lqo(rng, 6, 2, 2, 1);
    const auto sh = oracle::random_lqo(rng, 3, 2, 2, 1);
    CVector d(3);
    for (int i = 0; i < 3; ++i)
        d(i) = std::polar(1.0, 0.7 * (i + 1));
    std::vector<CMatrix> U;
    for (const auto& Uj : sh.U())
        U.push_back(Uj * d.asDiagonal());
    const LqoSystem rot(sh.lambda(), d.conjugate().asDiagonal() * sh.B(), sh.C() * d.asDiagonal(), U);
    CHECK(h2l_error_sq(s, rot, Horizon(16)) ==
          doctest::Approx(h2l_error_sq(s, sh, Horizon(16))).epsilon(1e-12));
}

TEST_CASE("S5 block maps to an LQO system with squared-magnitude outputs")
{
    Rng rng(4);
    const CVector lambda = uniform_disk_vector(rng, 5, 0.9);
    const CMatrix B = complex_normal_matrix(rng, 5, 3, 1.0);
    const CMatrix Cs = complex_normal_matrix(rng, 3, 5, 1.0);
    const auto s = s5_to_lqo(lambda, B, Cs);
    const ComplexSignal u = complex_normal_matrix(rng, 3, 8, 1.0);
    const auto y = simulate_recursive(s, u, Horizon(8));
    CVector x = CVector::Zero(5);
    for (int k = 0; k < 8; ++k)
    {
        x = lambda.cwiseProduct(x) + B * u.col(k);
        const CVector cx = Cs * x;
        for (int j = 0; j < 3; ++j)
            CHECK(std::abs(y(j, k) - std::norm(cx(j))) < 1e-10);
    }
    CHECK_THROWS_AS(s5_to_lqo(lambda, B, complex_normal_matrix(rng, 2, 5, 1.0)), ShapeError);
}

TEST_CASE("constructor rejects bad shapes and unstable modes")
{
    const CMatrix B = CMatrix::Ones(2, 1);
    const CMatrix C = CMatrix::Ones(1, 2);
    const std::vector<CMatrix> U{CMatrix::Ones(1, 2)};
    CVector lambda(2);
    lambda << 0.5, cplx(0.0, 0.9);
    CHECK_NOTHROW(LqoSystem(lambda, B, C, U));
    CHECK_THROWS_AS(LqoSystem(lambda, CMatrix::Ones(3, 1), C, U), ShapeError);
    CHECK_THROWS_AS(LqoSystem(lambda, B, CMatrix::Ones(1, 3), U), ShapeError);
    CHECK_THROWS_AS(LqoSystem(lambda, B, C, {}), ShapeError);
    CHECK_THROWS_AS(LqoSystem(lambda, B, C, {CMatrix::Ones(1, 3)}), ShapeError);
    lambda(1) = 1.0;
    CHECK_THROWS_AS(LqoSystem(lambda, B, C, U), StabilityError);
    lambda(1) = std::nan("");
    CHECK_THROWS(LqoSystem(lambda, B, C, U));
    CHECK_THROWS_AS(Horizon(0), DomainError);
    Rng rng(1);
    const auto s = oracle::random_lqo(rng, 2, 1, 1, 1);
    CHECK_THROWS_AS(simulate_recursive(s, ComplexSignal(ComplexSignal::Zero(2, 4)), Horizon(4)), ShapeError);
    CHECK_THROWS_AS(simulate_recursive(s, ComplexSignal(ComplexSignal::Zero(1, 3)), Horizon(4)), ShapeError);
}

TEST_CASE("error terms clamp only round-off")
{
    H2ErrorTerms t;
    t.value = -1e-12;
    t.scale = 1.0;
    CHECK(t.clamped() == 0.0);
    t.value = -1e-6;
    CHECK_THROWS_AS(t.clamped(), NumericalError);
    t.value = 2.0;
    CHECK(t.clamped() == 2.0);
}
