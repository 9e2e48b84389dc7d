#include "ssmshrink/lqo.hpp"

#include <sstream>
#include <utility>

#include "ssmshrink/stein.hpp"

namespace ssmshrink
{

namespace
{

bool all_finite(const CMatrix& X)
{
    return X.allFinite();
}

std::string shape_str(const CMatrix& X)
{
    std::ostringstream os;
    os << X.rows() << "x" << X.cols();
    return os.str();
}

double re_trace_product(const CMatrix& X, const CMatrix& Y)
{
    // Re tr(X Y) without forming the product.
    return (X.transpose().cwiseProduct(Y)).sum().real();
}

} // namespace

LqoSystem::LqoSystem(CVector lambda, CMatrix B, CMatrix C, std::vector<CMatrix> U,
                     double margin)
    : lambda_(std::move(lambda)), B_(std::move(B)), C_(std::move(C)), U_(std::move(U))
{
    const auto n = lambda_.size();
    if (n < 1)
        throw ShapeError("LQO system needs at least one state");
    if (B_.rows() != n || B_.cols() < 1)
        throw ShapeError("B must be n x m with n = " + std::to_string(n) + ", got " +
                         shape_str(B_));
    if (C_.cols() != n || C_.rows() < 1)
        throw ShapeError("C must be p x n with n = " + std::to_string(n) + ", got " +
                         shape_str(C_));
    if (static_cast<Eigen::Index>(U_.size()) != C_.rows())
        throw ShapeError("expected p = " + std::to_string(C_.rows()) +
                         " quadratic factors U_j, got " + std::to_string(U_.size()));
    const auto c = U_.front().rows();
    if (c < 1)
        throw ShapeError("quadratic rank c must be positive");
    for (std::size_t j = 0; j < U_.size(); ++j)
    {
        if (U_[j].rows() != c || U_[j].cols() != n)
            throw ShapeError("U_" + std::to_string(j) + " must be " + std::to_string(c) + "x" +
                             std::to_string(n) + ", got " + shape_str(U_[j]));
        if (!all_finite(U_[j]))
            throw DomainError("non-finite entry in U_" + std::to_string(j));
    }
    if (!lambda_.allFinite() || !all_finite(B_) || !all_finite(C_))
        throw DomainError("non-finite entry in LQO system");
    for (Eigen::Index i = 0; i < n; ++i)
    {
        if (!(std::abs(lambda_(i)) <= 1.0 - margin))
        {
            std::ostringstream os;
            os << "unstable mode " << i << ": |lambda| = " << std::abs(lambda_(i))
               << " exceeds 1 - " << margin;
            throw StabilityError(os.str());
        }
    }
}

std::vector<CMatrix> LqoSystem::M_list() const
{
    std::vector<CMatrix> out;
    out.reserve(U_.size());
    for (const auto& Uj : U_)
        out.push_back(Uj.adjoint() * Uj);
    return out;
}

LqoSystem LqoSystem::conjugated() const
{
    std::vector<CMatrix> U;
    U.reserve(U_.size());
    for (const auto& Uj : U_)
        U.push_back(Uj.conjugate());
    return LqoSystem(lambda_.conjugate(), B_.conjugate(), C_.conjugate(), std::move(U));
}

LqoSystem LqoSystem::zero(int n, int m, int p, int c)
{
    return LqoSystem(CVector::Zero(n), CMatrix::Zero(n, m), CMatrix::Zero(p, n),
                     std::vector<CMatrix>(p, CMatrix::Zero(c, n)));
}

CMatrix assemble_M(const std::vector<CMatrix>& U)
{
    if (U.empty())
        throw ShapeError("assemble_M needs at least one U_j");
    const auto n = U.front().cols();
    CMatrix M(static_cast<Eigen::Index>(U.size()), n * n);
    for (std::size_t j = 0; j < U.size(); ++j)
    {
        if (U[j].cols() != n || U[j].rows() != U.front().rows())
            throw ShapeError("inconsistent U_j shapes in assemble_M");
        const CMatrix Mj = U[j].adjoint() * U[j];
        // column-major storage is exactly vec()
        M.row(static_cast<Eigen::Index>(j)) =
            Eigen::Map<const CVector>(Mj.data(), n * n).transpose();
    }
    return M;
}

namespace
{

void check_input(const LqoSystem& sys, Eigen::Index rows, Eigen::Index cols, Horizon L)
{
    if (rows != sys.input_dim() || cols != L.steps())
    {
        std::ostringstream os;
        os << "input signal must be " << sys.input_dim() << " x " << L.steps() << ", got "
           << rows << " x " << cols;
        throw ShapeError(os.str());
    }
}

} // namespace

ComplexSignal simulate_recursive(const LqoSystem& sys, const ComplexSignal& u, Horizon L)
{
    check_input(sys, u.rows(), u.cols(), L);
    const int p = sys.output_dim();
    ComplexSignal y(p, L.steps());
    CVector x = CVector::Zero(sys.state_dim());
    for (int k = 0; k < L.steps(); ++k)
    {
        x = sys.lambda().cwiseProduct(x) + sys.B() * u.col(k);
        y.col(k) = sys.C() * x;
        for (int j = 0; j < p; ++j)
            y(j, k) += (sys.U()[j] * x).squaredNorm();
    }
    return y;
}

ComplexSignal simulate_recursive(const LqoSystem& sys, const RealSignal& u, Horizon L)
{
    return simulate_recursive(sys, ComplexSignal(u.cast<cplx>()), L);
}

ComplexSignal simulate_convolution(const LqoSystem& sys, const ComplexSignal& u, Horizon L)
{
    check_input(sys, u.rows(), u.cols(), L);
    const auto h1 = kernel_h1(sys, L);
    const auto h2 = kernel_h2(sys, L);
    const int m = sys.input_dim();
    ComplexSignal y = ComplexSignal::Zero(sys.output_dim(), L.steps());
    CVector w(m * m);
    for (int k = 0; k < L.steps(); ++k)
    {
        for (int t = 0; t <= k; ++t)
            y.col(k) += h1[t] * u.col(k - t);
        for (int t1 = 0; t1 <= k; ++t1)
        {
            for (int t2 = 0; t2 <= k; ++t2)
            {
                const auto a = u.col(k - t1);
                const auto b = u.col(k - t2);
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < m; ++j)
                        w(i * m + j) = std::conj(a(i)) * b(j);
                y.col(k) += h2[t1][t2] * w;
            }
        }
    }
    return y;
}

namespace
{

/// A^t B for t = 0..L-1.
std::vector<CMatrix> impulse_states(const LqoSystem& sys, Horizon L)
{
    std::vector<CMatrix> X;
    X.reserve(L.steps());
    X.push_back(sys.B());
    for (int t = 1; t < L.steps(); ++t)
        X.push_back(sys.lambda().asDiagonal() * X.back());
    return X;
}

} // namespace

KernelH1 kernel_h1(const LqoSystem& sys, Horizon L)
{
    KernelH1 h1;
    h1.reserve(L.steps());
    for (const auto& X : impulse_states(sys, L))
        h1.push_back(sys.C() * X);
    return h1;
}

KernelH2 kernel_h2(const LqoSystem& sys, Horizon L)
{
    const auto X = impulse_states(sys, L);
    const auto M = sys.M_list();
    const int p = sys.output_dim();
    const int m = sys.input_dim();
    const int T = L.steps();

    // MX[j][t] = M_j A^t B
    std::vector<std::vector<CMatrix>> MX(p, std::vector<CMatrix>(T));
    for (int j = 0; j < p; ++j)
        for (int t = 0; t < T; ++t)
            MX[j][t] = M[j] * X[t];

    KernelH2 h2(T, std::vector<CMatrix>(T, CMatrix(p, m * m)));
    for (int t1 = 0; t1 < T; ++t1)
    {
        const CMatrix Xa = X[t1].adjoint();
        for (int t2 = 0; t2 < T; ++t2)
        {
            for (int j = 0; j < p; ++j)
            {
                const CMatrix H = Xa * MX[j][t2];
                for (int a = 0; a < m; ++a)
                    for (int b = 0; b < m; ++b)
                        h2[t1][t2](j, a * m + b) = H(a, b);
            }
        }
    }
    return h2;
}

KernelNormsSq kernel_norms_sq(const LqoSystem& sys, Horizon L)
{
    const CMatrix P = solve_diag_stein_finite(sys.lambda(), sys.lambda().conjugate(),
                                              sys.B() * sys.B().adjoint(), L);
    KernelNormsSq out;
    out.linear = (sys.C() * P * sys.C().adjoint()).trace().real();
    for (const auto& Mk : sys.M_list())
    {
        const CMatrix PM = P * Mk;
        out.quadratic += re_trace_product(PM, PM);
    }
    out.linear = std::max(out.linear, 0.0);
    out.quadratic = std::max(out.quadratic, 0.0);
    return out;
}

double h2l_norm_sq(const LqoSystem& sys, Horizon L)
{
    return kernel_norms_sq(sys, L).total();
}

H2ErrorTerms h2l_error_terms(const LqoSystem& sys, const LqoSystem& rsys, Horizon L)
{
    if (sys.input_dim() != rsys.input_dim() || sys.output_dim() != rsys.output_dim())
        throw ShapeError("full and reduced systems must share input and output dimensions");

    const auto G = finite_gramians(sys, rsys, L);
    const auto M = sys.M_list();
    const auto Mh = rsys.M_list();
    const CMatrix& C = sys.C();
    const CMatrix& Ch = rsys.C();

    const double lin_full = (C * G.P * C.adjoint()).trace().real();
    const double lin_red = (Ch * G.Phat * Ch.adjoint()).trace().real();
    const double lin_cross = -2.0 * (C * G.Ptilde * Ch.adjoint()).trace().real();

    double quad_full = 0.0;
    double quad_red = 0.0;
    double quad_cross = 0.0;
    const CMatrix PtA = G.Ptilde.adjoint();
    for (std::size_t k = 0; k < M.size(); ++k)
    {
        const CMatrix PM = G.P * M[k];
        const CMatrix PhMh = G.Phat * Mh[k];
        quad_full += re_trace_product(PM, PM);
        quad_red += re_trace_product(PhMh, PhMh);
        quad_cross -= 2.0 * re_trace_product(PtA * M[k], G.Ptilde * Mh[k]);
    }

    H2ErrorTerms out;
    out.value = lin_full + lin_red + lin_cross + quad_full + quad_red + quad_cross;
    out.scale = std::abs(lin_full) + std::abs(lin_red) + std::abs(quad_full) + std::abs(quad_red);
    return out;
}

double H2ErrorTerms::clamped() const
{
    if (value >= 0.0)
        return value;
    if (-value <= 1e-10 * scale)
        return 0.0;
    std::ostringstream os;
    os << "h2_L error trace expression is negative beyond round-off: " << value << " (scale "
       << scale << ")";
    throw NumericalError(os.str());
}

double h2l_error_sq(const LqoSystem& sys, const LqoSystem& rsys, Horizon L)
{
    return h2l_error_terms(sys, rsys, L).clamped();
}

LqoSystem s5_to_lqo(const CVector& lambda, const CMatrix& B, const CMatrix& C_s5)
{
    if (C_s5.rows() != B.cols())
        throw ShapeError("S5 output map must have as many rows as inputs (p = m)");
    if (C_s5.cols() != lambda.size())
        throw ShapeError("S5 output map must have n columns");
    std::vector<CMatrix> U;
    U.reserve(C_s5.rows());
    for (Eigen::Index j = 0; j < C_s5.rows(); ++j)
        U.emplace_back(C_s5.row(j));
    return LqoSystem(lambda, B, CMatrix::Zero(C_s5.rows(), lambda.size()), std::move(U));
}

} // namespace ssmshrink
