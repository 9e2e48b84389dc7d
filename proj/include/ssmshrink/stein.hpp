#ifndef SSMSHRINK_STEIN_HPP
#define SSMSHRINK_STEIN_HPP

#include "ssmshrink/common.hpp"
#include "ssmshrink/lqo.hpp"

namespace ssmshrink
{

/// Solves X = diag(a) X diag(b) + rhs elementwise, X_ij = rhs_ij / (1 - a_i b_j).
/// Throws NumericalError naming (i, j) when |a_i b_j| >= 1 - kStabilityMargin.
CMatrix solve_diag_stein(const CVector& a, const CVector& b, const CMatrix& rhs);

/// Finite-horizon variant: X = diag(a) X diag(b) + rhs - diag(a)^L rhs diag(b)^L,
/// i.e. X = sum_{t<L} diag(a)^t rhs diag(b)^t.
CMatrix solve_diag_stein_finite(const CVector& a, const CVector& b, const CMatrix& rhs,
                                Horizon L);

struct FiniteGramians
{
    CMatrix P;      ///< P_L,       n x n
    CMatrix Ptilde; ///< P~_L,      n x r
    CMatrix Phat;   ///< P^_L,      r x r
};

struct InfiniteGramians
{
    CMatrix Ptilde; ///< P~ = A P~ A^^* + B B^^*
    CMatrix Phat;   ///< P^ = A^ P^ A^^* + B^ B^^*
};

FiniteGramians finite_gramians(const LqoSystem& sys, const LqoSystem& rsys, Horizon L);
InfiniteGramians infinite_gramians(const LqoSystem& sys, const LqoSystem& rsys);

/// Every Stein/Sylvester solution the reduced-model gradients draw on, for a
/// full system (order n) and a reduced system (order r).
struct GramianSet
{
    CVector S_L;     ///< lambda^L
    CVector Shat_L;  ///< lambda_hat^L
    CMatrix P_L;     ///< n x n
    CMatrix Ptilde_L;
    CMatrix Phat_L;
    CMatrix Ytilde_L; ///< n x r, Y~ = A^* Y~ A^ + C^* C^ - S^* C^* C^ S^
    CMatrix Yhat_L;   ///< r x r
    CMatrix Ztilde_L; ///< n x r, quadratic-channel analogue of Y~_L
    CMatrix Zhat_L;
    CMatrix Zbar_L;   ///< infinite-horizon Z~ with P~_L in the right-hand side
    CMatrix Zbar_r_L;
    CMatrix Ptilde_inf;
    CMatrix Phat_inf;
};

GramianSet compute_gramians(const LqoSystem& sys, const LqoSystem& rsys, Horizon L);

} // namespace ssmshrink

#endif // SSMSHRINK_STEIN_HPP
