#include "ssmshrink/stein.hpp"

#include <sstream>

namespace ssmshrink
{

namespace
{

void check_stein_shapes(const CVector& a, const CVector& b, const CMatrix& rhs)
{
    if (rhs.rows() != a.size() || rhs.cols() != b.size())
    {
        std::ostringstream os;
        os << "Stein right-hand side must be " << a.size() << " x " << b.size() << ", got "
           << rhs.rows() << " x " << rhs.cols();
        throw ShapeError(os.str());
    }
}

cplx checked_denominator(const CVector& a, const CVector& b, Eigen::Index i, Eigen::Index j)
{
    const cplx ab = a(i) * b(j);
    if (!(std::abs(ab) < 1.0 - kStabilityMargin))
    {
        std::ostringstream os;
        os << "near-singular Stein equation at (" << i << ", " << j << "): |a_i b_j| = "
           << std::abs(ab);
        throw NumericalError(os.str());
    }
    return 1.0 - ab;
}

CMatrix sum_of_products(const std::vector<CMatrix>& left, const CMatrix& mid,
                        const std::vector<CMatrix>& right)
{
    CMatrix out = CMatrix::Zero(left.front().rows(), right.front().cols());
    for (std::size_t k = 0; k < left.size(); ++k)
        out.noalias() += left[k] * mid * right[k];
    return out;
}

} // namespace

CMatrix solve_diag_stein(const CVector& a, const CVector& b, const CMatrix& rhs)
{
    check_stein_shapes(a, b, rhs);
    CMatrix X(rhs.rows(), rhs.cols());
    for (Eigen::Index j = 0; j < rhs.cols(); ++j)
        for (Eigen::Index i = 0; i < rhs.rows(); ++i)
            X(i, j) = rhs(i, j) / checked_denominator(a, b, i, j);
    return X;
}

CMatrix solve_diag_stein_finite(const CVector& a, const CVector& b, const CMatrix& rhs,
                                Horizon L)
{
    check_stein_shapes(a, b, rhs);
    const CVector aL = elementwise_pow(a, L.steps());
    const CVector bL = elementwise_pow(b, L.steps());
    CMatrix X(rhs.rows(), rhs.cols());
    for (Eigen::Index j = 0; j < rhs.cols(); ++j)
        for (Eigen::Index i = 0; i < rhs.rows(); ++i)
            X(i, j) = rhs(i, j) * (1.0 - aL(i) * bL(j)) / checked_denominator(a, b, i, j);
    return X;
}

FiniteGramians finite_gramians(const LqoSystem& sys, const LqoSystem& rsys, Horizon L)
{
    const CVector& lam = sys.lambda();
    const CVector& lamh = rsys.lambda();
    FiniteGramians G;
    G.P = solve_diag_stein_finite(lam, lam.conjugate(), sys.B() * sys.B().adjoint(), L);
    G.Ptilde = solve_diag_stein_finite(lam, lamh.conjugate(), sys.B() * rsys.B().adjoint(), L);
    G.Phat = solve_diag_stein_finite(lamh, lamh.conjugate(), rsys.B() * rsys.B().adjoint(), L);
    return G;
}

InfiniteGramians infinite_gramians(const LqoSystem& sys, const LqoSystem& rsys)
{
    const CVector& lam = sys.lambda();
    const CVector& lamh = rsys.lambda();
    InfiniteGramians G;
    G.Ptilde = solve_diag_stein(lam, lamh.conjugate(), sys.B() * rsys.B().adjoint());
    G.Phat = solve_diag_stein(lamh, lamh.conjugate(), rsys.B() * rsys.B().adjoint());
    return G;
}

GramianSet compute_gramians(const LqoSystem& sys, const LqoSystem& rsys, Horizon L)
{
    if (sys.input_dim() != rsys.input_dim() || sys.output_dim() != rsys.output_dim())
        throw ShapeError("full and reduced systems must share input and output dimensions");

    const CVector& lam = sys.lambda();
    const CVector& lamh = rsys.lambda();
    const CVector lam_c = lam.conjugate();
    const CVector lamh_c = lamh.conjugate();
    const auto M = sys.M_list();
    const auto Mh = rsys.M_list();

    GramianSet G;
    G.S_L = elementwise_pow(lam, L.steps());
    G.Shat_L = elementwise_pow(lamh, L.steps());

    const auto fin = finite_gramians(sys, rsys, L);
    G.P_L = fin.P;
    G.Ptilde_L = fin.Ptilde;
    G.Phat_L = fin.Phat;

    G.Ytilde_L = solve_diag_stein_finite(lam_c, lamh, sys.C().adjoint() * rsys.C(), L);
    G.Yhat_L = solve_diag_stein_finite(lamh_c, lamh, rsys.C().adjoint() * rsys.C(), L);

    const CMatrix quad_cross = sum_of_products(M, G.Ptilde_L, Mh);
    const CMatrix quad_red = sum_of_products(Mh, G.Phat_L, Mh);
    G.Ztilde_L = solve_diag_stein_finite(lam_c, lamh, quad_cross, L);
    G.Zhat_L = solve_diag_stein_finite(lamh_c, lamh, quad_red, L);
    G.Zbar_L = solve_diag_stein(lam_c, lamh, quad_cross);
    G.Zbar_r_L = solve_diag_stein(lamh_c, lamh, quad_red);

    const auto inf = infinite_gramians(sys, rsys);
    G.Ptilde_inf = inf.Ptilde;
    G.Phat_inf = inf.Phat;
    return G;
}

} // namespace ssmshrink
