#ifndef SSMSHRINK_LQO_HPP
#define SSMSHRINK_LQO_HPP

#include <vector>

#include "ssmshrink/common.hpp"

namespace ssmshrink
{

///
/// Discrete-time complex linear-quadratic-output system
///
///   x_k = diag(lambda) x_{k-1} + B u_k,
///   y_k = C x_k + [x_k^* M_j x_k]_{j=1..p},   M_j = U_j^* U_j,
///
/// with x_{-1} = 0. The quadratic channel equals M (x_k (x) conj(x_k)) with
/// M assembled by assemble_M; for real vectors this is the usual M (x (x) x).
///
/// Instances are immutable and always satisfy the shape and stability
/// invariants (|lambda_i| <= 1 - margin).
///
class LqoSystem
{
public:
    LqoSystem(CVector lambda, CMatrix B, CMatrix C, std::vector<CMatrix> U,
              double margin = kStabilityMargin);

    const CVector& lambda() const noexcept { return lambda_; }
    const CMatrix& B() const noexcept { return B_; }
    const CMatrix& C() const noexcept { return C_; }
    const std::vector<CMatrix>& U() const noexcept { return U_; }

    int state_dim() const noexcept { return static_cast<int>(lambda_.size()); }
    int input_dim() const noexcept { return static_cast<int>(B_.cols()); }
    int output_dim() const noexcept { return static_cast<int>(C_.rows()); }
    int quad_rank() const noexcept { return static_cast<int>(U_.front().rows()); }

    /// M_j = U_j^* U_j (n x n, Hermitian PSD).
    CMatrix M(int j) const { return U_[j].adjoint() * U_[j]; }
    std::vector<CMatrix> M_list() const;

    /// Conjugates all of (lambda, B, C, U).
    LqoSystem conjugated() const;

    /// The zero system of the given dimensions (lambda = 0, all matrices 0).
    static LqoSystem zero(int n, int m, int p, int c);

private:
    CVector lambda_;
    CMatrix B_;
    CMatrix C_;
    std::vector<CMatrix> U_;
};

/// h1[t] = C A^t B, p x m, t = 0..L-1.
using KernelH1 = std::vector<CMatrix>;

/// h2[t1][t2] is p x m^2; row j is the row-major flattening of the m x m
/// matrix (A^{t1} B)^* M_j (A^{t2} B), so that
///   h2[t1][t2] . (conj(u) (x) v) = [u^* H_j v]_j.
using KernelH2 = std::vector<std::vector<CMatrix>>;

/// Row j is vec(U_j^* U_j)^T with column-major vec.
CMatrix assemble_M(const std::vector<CMatrix>& U);

ComplexSignal simulate_recursive(const LqoSystem& sys, const ComplexSignal& u, Horizon L);
ComplexSignal simulate_recursive(const LqoSystem& sys, const RealSignal& u, Horizon L);

/// Volterra double-sum form; O(L^3) and intended as an oracle.
ComplexSignal simulate_convolution(const LqoSystem& sys, const ComplexSignal& u, Horizon L);

KernelH1 kernel_h1(const LqoSystem& sys, Horizon L);
KernelH2 kernel_h2(const LqoSystem& sys, Horizon L);

/// Squared l2_L norms of the two Volterra kernels from the Gramian traces.
struct KernelNormsSq
{
    double linear = 0.0;    ///< ||h1||^2 = tr(C P_L C^*)
    double quadratic = 0.0; ///< ||h2||^2 = sum_k tr(P_L M_k P_L M_k)
    double total() const noexcept { return linear + quadratic; }
};

KernelNormsSq kernel_norms_sq(const LqoSystem& sys, Horizon L);

/// ||S||^2_{h2_L}.
double h2l_norm_sq(const LqoSystem& sys, Horizon L);

/// Value of ||S - S_hat||^2_{h2_L} from the six-term trace expression,
/// together with the sum of the magnitudes of its terms (cancellation scale).
struct H2ErrorTerms
{
    double value = 0.0;
    double scale = 0.0;

    /// value, with negative round-off below 1e-10 * scale mapped to 0.
    /// Throws NumericalError for larger negative values.
    double clamped() const;
};

H2ErrorTerms h2l_error_terms(const LqoSystem& sys, const LqoSystem& rsys, Horizon L);

/// ||S - S_hat||^2_{h2_L}, clamped at zero for round-off.
double h2l_error_sq(const LqoSystem& sys, const LqoSystem& rsys, Horizon L);

/// S5 block x_k = A x_{k-1} + B u_k, y_k = |C_s5 x_k|^2 (coordinatewise) as an
/// LQO system with C = 0 and U_j = j-th row of C_s5.
LqoSystem s5_to_lqo(const CVector& lambda, const CMatrix& B, const CMatrix& C_s5);

} // namespace ssmshrink

#endif // SSMSHRINK_LQO_HPP
