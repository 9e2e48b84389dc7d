// Independent reference computations used only by the tests.
#ifndef SSMSHRINK_TESTS_ORACLES_HPP
#define SSMSHRINK_TESTS_ORACLES_HPP

#include <vector>

#include "ssmshrink/dssm.hpp"
#include "ssmshrink/lqo.hpp"
#include "ssmshrink/random.hpp"

namespace oracle
{

using namespace ssmshrink;

/// sum_{t<terms} diag(a)^t R diag(b)^t with dense matrix powers.
CMatrix gramian_series(const CVector& a, const CVector& b, const CMatrix& R, int terms);

/// Dense A^t B for t < L.
std::vector<CMatrix> impulse_states(const LqoSystem& s, int L);

/// sum_t |h1[t]|_F^2 and sum_{t1,t2} sum_j |(A^t1 B)^* M_j A^t2 B|_F^2 of
/// the difference kernels of two systems (pass nullptr for the zero system).
struct KernelEnergy
{
    double linear = 0.0;
    double quadratic = 0.0;
};
KernelEnergy kernel_energy_difference(const LqoSystem& s, const LqoSystem* shat, int L);

/// Literal sum_{k<L} (A^*)^k X (A^*)^{L-1-k}, A = diag(lambda_hat).
CMatrix t_star_literal(const CVector& lambda_hat, const CMatrix& X, int L);

/// y_k = C x_k + [x_k^* U_j^* U_j x_k] with a dense state matrix.
ComplexSignal simulate_dense(const LqoSystem& s, const ComplexSignal& u, int L);

/// Random stable LQO system, |lambda| <= radius.
LqoSystem random_lqo(Rng& rng, int n, int m, int p, int c, double radius = 0.95);

/// Random Deep SSM with the given per-layer state dimension.
DeepSsm random_dssm(Rng& rng, int xi, int n, int m, double eps);

RealSignal random_signal(Rng& rng, int m, int L, double scale = 1.0);

inline double rel_diff(double a, double b)
{
    const double d = std::max(std::abs(a), std::abs(b));
    return d == 0.0 ? 0.0 : std::abs(a - b) / d;
}

inline double rel_diff(const CMatrix& a, const CMatrix& b)
{
    const double d = std::max(a.norm(), b.norm());
    return d == 0.0 ? 0.0 : (a - b).norm() / d;
}

} // namespace oracle

#endif // SSMSHRINK_TESTS_ORACLES_HPP
