#include <doctest.h>

#include "oracles.hpp"
#include "ssmshrink/dssm.hpp"
#include "ssmshrink/reduce.hpp"

using namespace ssmshrink;

TEST_CASE("T* closed form matches the literal sum")
{
    Rng rng(1);
    for (int trial = 0; trial < 20; ++trial)
    {
        const int r = 1 + trial % 5, L = 1 + 3 * trial;
        CVector lh = uniform_disk_vector(rng, r, 0.95);
        if (r > 1)
            lh(1) = lh(0);
        if (r > 2)
            lh(2) = lh(0) * 1.01;
        const CMatrix X = complex_normal_matrix(rng, r, r, 1.0);
        const CMatrix lit = oracle::t_star_literal(lh, X, L);
        CHECK((t_star_diag(lh, X, Horizon(L)) - lit).norm() <= 1e-12 * (1.0 + lit.norm()));
    }
    CHECK_THROWS_AS(t_star_diag(CVector::Ones(2), CMatrix::Ones(2, 3), Horizon(3)), ShapeError);
}

TEST_CASE("analytic gradients match central differences")
{
    Rng rng(2);
    for (int trial = 0; trial < 4; ++trial)
    {
        std::vector<LqoSystem> fulls, roms;
        const int xi = 1 + trial % 2;
        for (int i = 0; i < xi; ++i)
        {
            fulls.push_back(oracle::random_lqo(rng, 6, 2, 2, 1));
            roms.push_back(oracle::random_lqo(rng, 3, 2, 2, 1));
        }
        std::vector<double> gains(xi, 1.0);
        gains[0] = 2.5;
        for (const auto& e : finite_difference_check(fulls, roms, gains, Horizon(16), 1e-6))
        {
            INFO("layer " << e.layer << " block " << e.block);
            CHECK(e.rel_error <= 1e-5);
        }
    }
}

TEST_CASE("sign-flipped C gradient is detected")
{
    Rng rng(3);
    const std::vector<LqoSystem> fulls{oracle::random_lqo(rng, 6, 2, 2, 1)};
    const std::vector<LqoSystem> roms{oracle::random_lqo(rng, 3, 2, 2, 1)};
    GradientOptions o;
    o.flip_c_cross_sign = true;
    double worst = 0.0;
    for (const auto& e : finite_difference_check(fulls, roms, {1.0}, Horizon(16), 1e-6, o))
        if (e.block == "C")
            worst = std::max(worst, e.rel_error);
    CHECK(worst > 0.1);
}

TEST_CASE("exact match has zero gradient")
{
    Rng rng(4);
    const std::vector<LqoSystem> fulls{oracle::random_lqo(rng, 4, 2, 2, 1)};
    const auto ev = grad_objective(fulls, fulls, {3.0}, Horizon(16));
    CHECK(ev.value == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
    CHECK(std::sqrt(ev.grads[0].squared_norm()) <= 1e-8);
    const auto pg = grad_phi(fulls[0], fulls[0], Horizon(16));
    CHECK(pg.dB.norm() + pg.dC.norm() + pg.dA.norm() <= 1e-10);
}

TEST_CASE("objective is invariant under diagonal unitary rescaling")
{
    Rng rng(5);
    const std::vector<LqoSystem> fulls{oracle::random_lqo(rng, 6, 2, 2, 1)};
    const auto sh = oracle::random_lqo(rng, 3, 2, 2, 1);
    CVector d(3);
    d << std::polar(1.0, 0.3), std::polar(1.0, -1.1), std::polar(1.0, 2.0);
    std::vector<CMatrix> U;
    for (const auto& Uj : sh.U())
        U.push_back(Uj * d.asDiagonal());
    const LqoSystem rot(sh.lambda(), d.conjugate().asDiagonal() * sh.B(), sh.C() * d.asDiagonal(), U);
    CHECK(objective_f(fulls, {rot}, {1.7}, Horizon(16)) ==
          doctest::Approx(objective_f(fulls, {sh}, {1.7}, Horizon(16))).epsilon(1e-12));
}

TEST_CASE("parallel gradient evaluation equals the sequential one")
{
    Rng rng(6);
    std::vector<LqoSystem> fulls, roms;
    for (int i = 0; i < 3; ++i)
    {
        fulls.push_back(oracle::random_lqo(rng, 5, 2, 2, 1));
        roms.push_back(oracle::random_lqo(rng, 2, 2, 2, 1));
    }
    const std::vector<double> g{1.0, 0.5, 0.25};
    const auto a = grad_objective(fulls, roms, g, Horizon(12), {}, 1);
    const auto b = grad_objective(fulls, roms, g, Horizon(12), {}, 3);
    CHECK(a.value == b.value);
    for (int i = 0; i < 3; ++i)
        CHECK(a.grads[i].dB == b.grads[i].dB);
}

TEST_CASE("descent contract")
{
    Rng rng(7);
    std::vector<LqoSystem> fulls, init;
    for (int i = 0; i < 2; ++i)
    {
        fulls.push_back(oracle::random_lqo(rng, 10, 3, 3, 1));
        init.push_back(init_mode_dominance(fulls.back(), 3));
    }
    ReductionConfig cfg;
    cfg.ranks = {3, 3};
    cfg.horizon = 32;
    cfg.max_iters = 15;
    const auto res = reduce_gradient_descent(fulls, init, {1.0, 0.4}, cfg);
    const auto& rows = res.report.rows;
    REQUIRE(rows.size() >= 2);
    CHECK(res.report.reason == Termination::max_iters);
    CHECK(rows.size() == 16);
    for (std::size_t k = 1; k < rows.size(); ++k)
    {
        CHECK(rows[k].objective < rows[k - 1].objective);
        CHECK(rows[k - 1].step_scales[1] > 0.0);
    }
    CHECK(res.report.final_objective < res.report.initial_objective);
    for (const auto& r : res.roms)
        CHECK(is_stable(r.lambda(), cfg.stability_margin));
    CHECK(res.report.final_objective ==
          doctest::Approx(objective_f(fulls, res.roms, {1.0, 0.4}, Horizon(32))).epsilon(1e-12));
}

TEST_CASE("full-rank initialization is already optimal")
{
    Rng rng(8);
    const std::vector<LqoSystem> fulls{oracle::random_lqo(rng, 5, 2, 2, 1)};
    const auto init = init_mode_dominance(fulls[0], 5);
    ReductionConfig cfg;
    cfg.horizon = 16;
    const auto res = reduce_gradient_descent(fulls, {init}, {1.0}, cfg);
    CHECK(res.report.initial_objective == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
    CHECK(res.report.reason == Termination::converged);
    CHECK(res.report.rows.size() == 1);
}

TEST_CASE("mode dominance keeps the heaviest modes")
{
    CVector lambda(3);
    lambda << 0.1, 0.9, 0.5;
    CMatrix B = CMatrix::Ones(3, 1);
    CMatrix C = CMatrix::Ones(1, 3);
    const LqoSystem s(lambda, B, C, {CMatrix::Ones(1, 3)});
    const auto r = init_mode_dominance(s, 2);
    CHECK(r.lambda()(0) == cplx(0.9));
    CHECK(r.lambda()(1) == cplx(0.5));
    CHECK_THROWS_AS(init_mode_dominance(s, 4), DomainError);
    CHECK_THROWS_AS(init_mode_dominance(s, 0), DomainError);
}

TEST_CASE("random initialization lies inside the shrunken disk")
{
    for (std::uint64_t seed = 0; seed < 30; ++seed)
    {
        const auto r = init_random_stable(4, 2, 2, 1, seed);
        CHECK(r.lambda().cwiseAbs().maxCoeff() <= 0.95 - kStabilityMargin);
        const std::vector<LqoSystem> f{init_random_stable(8, 2, 2, 1, seed + 100)};
        CHECK(std::isfinite(objective_f(f, {r}, {1.0}, Horizon(32))));
    }
    CHECK(init_random_stable(3, 1, 1, 1, 5).B() == init_random_stable(3, 1, 1, 1, 5).B());
}

TEST_CASE("configuration and input validation")
{
    ReductionConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.rho = 1.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg.rho = 0.5;
    cfg.eta_init[2] = 0.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);

    Rng rng(9);
    const std::vector<LqoSystem> fulls{oracle::random_lqo(rng, 4, 2, 2, 1)};
    const std::vector<LqoSystem> roms{oracle::random_lqo(rng, 2, 2, 2, 1)};
    CHECK_THROWS_AS(objective_f(fulls, roms, {1.0, 1.0}, Horizon(4)), ShapeError);
    ReductionConfig ok;
    ok.ranks = {3};
    CHECK_THROWS_AS(reduce_gradient_descent(fulls, roms, {1.0}, ok), ShapeError);
    CHECK_THROWS_AS(finite_difference_check(fulls, roms, {1.0}, Horizon(4), 1e-2), DomainError);
    CHECK(to_string(Termination::stalled) == "stalled");
}

TEST_CASE("mode-dominance starts no worse than random on most seeds")
{
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed)
    {
        SynthOptions o;
        o.layers = 3;
        o.state_dim = 16;
        o.width = 4;
        o.seed = seed;
        const auto model = synth_random_dssm(o);
        const auto fulls = model.systems();
        std::vector<LqoSystem> md, rnd;
        for (int i = 0; i < 3; ++i)
        {
            md.push_back(init_mode_dominance(fulls[i], 4));
            rnd.push_back(init_random_stable(4, 4, 4, 1, seed * 10 + i));
        }
        const std::vector<double> w{1.0, 1.0, 1.0};
        if (objective_f(fulls, md, w, Horizon(64)) <= objective_f(fulls, rnd, w, Horizon(64)))
            ++wins;
    }
    CHECK(wins >= 16);
}
