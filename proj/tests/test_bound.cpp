#include <doctest.h>

#include "oracles.hpp"
#include "ssmshrink/bound.hpp"
#include "ssmshrink/reduce.hpp"

using namespace ssmshrink;

namespace
{

DeepSsm reduce_randomly(Rng& rng, const DeepSsm& full, int r)
{
    std::vector<LqoSystem> roms;
    for (const auto& l : full.layers())
        roms.push_back(oracle::random_lqo(rng, r, full.width(), full.width(), 1));
    return build_reduced_dssm(full, roms);
}

} // namespace

TEST_CASE("gains accumulate downstream")
{
    const std::vector<double> g{2.0, 3.0, 5.0};
    const auto G = accumulated_gains(g, 1.5);
    CHECK(G[2] == doctest::Approx(1.5));
    CHECK(G[1] == doctest::Approx(1.5 * 1.5 * 5.0));
    CHECK(G[0] == doctest::Approx(1.5 * 1.5 * 1.5 * 3.0 * 5.0));
}

TEST_CASE("layer gain from kernel norms")
{
    Rng rng(1);
    const auto s = oracle::random_lqo(rng, 4, 2, 2, 1);
    const auto e = oracle::kernel_energy_difference(s, nullptr, 10);
    const double want = 1.0 + std::sqrt(10.0) * (std::sqrt(e.linear) + 2.0 * 3.0 * std::sqrt(e.quadratic));
    CHECK(layer_gain_gtilde(s, Horizon(10), 3.0) == doctest::Approx(want).epsilon(1e-10));
}

TEST_CASE("identical stacks give zero bound and zero error")
{
    Rng rng(2);
    const auto full = oracle::random_dssm(rng, 2, 5, 3, 1e-5);
    const RealSignal s = oracle::random_signal(rng, 3, 16);
    const auto rep = evaluate_bounds(full, full, s, Horizon(16));
    CHECK(rep.measured_error == 0.0);
    CHECK(rep.bound_value == doctest::Approx(0.0).scale(1.0).epsilon(1e-6));
}

TEST_CASE("corollary and theorem bounds dominate the measured error")
{
    Rng rng(3);
    for (int trial = 0; trial < 25; ++trial)
    {
        const int xi = 1 + trial % 3, n = 2 + trial % 7, m = 2 + trial % 3, L = 4 + 2 * trial;
        const auto full = oracle::random_dssm(rng, xi, n, m, std::pow(10.0, -(trial % 6)));
        const auto red = reduce_randomly(rng, full, 1 + trial % 4);
        const RealSignal s = oracle::random_signal(rng, m, L, 0.5);
        const auto rep = evaluate_bounds(full, red, s, Horizon(L));
        CHECK(rep.b_covers_inputs);
        CHECK(rep.measured_error <= rep.bound_value);
        CHECK(rep.measured_error <= rep.theorem_value);
        CHECK(rep.theorem_value <= rep.bound_value * (1.0 + 1e-12));
        CHECK(rep.measured_error == measured_output_error(full, red, s, Horizon(L)));
    }
}

TEST_CASE("explicit small b is flagged")
{
    Rng rng(4);
    const auto full = oracle::random_dssm(rng, 2, 4, 3, 1e-5);
    const RealSignal s = oracle::random_signal(rng, 3, 8);
    BoundOptions o;
    o.b = 1e-3;
    CHECK_FALSE(evaluate_bounds(full, reduce_randomly(rng, full, 2), s, Horizon(8), o).b_covers_inputs);
}

TEST_CASE("Kronecker difference inequality")
{
    Rng rng(5);
    for (int i = 0; i < 50; ++i)
    {
        const RealSignal u = oracle::random_signal(rng, 3, 12);
        const RealSignal uh = u + oracle::random_signal(rng, 3, 12, std::pow(10.0, -(i % 5)));
        const auto k = kron_inequality_check(u, uh, Horizon(12));
        CHECK(k.lhs <= k.rhs * (1.0 + 1e-12));
    }
}

TEST_CASE("layer recurrence bounds the measured per-layer error")
{
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial)
    {
        const auto full = oracle::random_dssm(rng, 3, 4, 3, 0.01);
        const auto red = reduce_randomly(rng, full, 2);
        const auto rows = layer_recurrence(full, red, oracle::random_signal(rng, 3, 12), Horizon(12));
        REQUIRE(rows.size() == 3);
        for (const auto& r : rows)
            CHECK(r.measured <= r.rhs * (1.0 + 1e-12));
    }
}

TEST_CASE("default input bound covers every reachable inner input")
{
    Rng rng(7);
    const auto full = oracle::random_dssm(rng, 3, 4, 3, 1e-5);
    const double b = apriori_inner_input_bound(full, Horizon(20));
    const auto tr = forward(full, oracle::random_signal(rng, 3, 20, 50.0), Horizon(20));
    for (int i = 1; i < 3; ++i)
        CHECK(signal_l2_norm(tr.inputs[i]) <= b);
}

TEST_CASE("reduction weights are normalized corollary gains")
{
    Rng rng(8);
    const auto full = oracle::random_dssm(rng, 3, 4, 3, 1e-5);
    const auto w = reduction_weights(full, Horizon(16), 2.0);
    const auto G = corollary_gains(full, Horizon(16), 2.0, lipschitz_upper(full));
    CHECK(w[0] == 1.0);
    CHECK(w[2] == doctest::Approx(G[2] / G[0]));
}
