#include "ssmshrink/layer_norm.hpp"

namespace ssmshrink
{

void LayerNormParams::validate() const
{
    if (gamma1.size() < 1 || gamma2.size() != gamma1.size())
        throw ShapeError("LayerNorm gamma1 and gamma2 must have the same positive length");
    if (!(eps > 0.0) || !std::isfinite(eps))
        throw DomainError("LayerNorm eps must be positive and finite");
    if (!gamma1.allFinite() || !gamma2.allFinite())
        throw DomainError("non-finite LayerNorm parameter");
}

RVector ln_apply(const RVector& z, const LayerNormParams& p)
{
    if (z.size() != p.gamma1.size())
        throw ShapeError("LayerNorm input width mismatch");
    const double m = static_cast<double>(z.size());
    const RVector c = z.array() - z.mean();
    const double sigma = std::sqrt(c.squaredNorm() / m + p.eps);
    return p.gamma1.cwiseProduct(c) / sigma + p.gamma2;
}

RealSignal ln_apply_signal(const RealSignal& z, const LayerNormParams& p)
{
    RealSignal out(z.rows(), z.cols());
    for (Eigen::Index k = 0; k < z.cols(); ++k)
        out.col(k) = ln_apply(z.col(k), p);
    return out;
}

RMatrix ln_jacobian(const RVector& z, const LayerNormParams& p)
{
    if (z.size() != p.gamma1.size())
        throw ShapeError("LayerNorm input width mismatch");
    const auto m = z.size();
    const double md = static_cast<double>(m);
    const RMatrix P = RMatrix::Identity(m, m) - RMatrix::Constant(m, m, 1.0 / md);
    const RVector c = P * z;
    const double sigma = std::sqrt(c.squaredNorm() / md + p.eps);
    const RMatrix inner =
        RMatrix::Identity(m, m) / sigma - c * c.transpose() / (sigma * sigma * sigma * md);
    return p.gamma1.asDiagonal() * inner * P;
}

LipschitzInterval ln_lipschitz_interval(const LayerNormParams& p, int m)
{
    if (m < 2)
        throw DomainError("LayerNorm Lipschitz interval needs m >= 2");
    if (!(p.eps > 0.0))
        throw DomainError("LayerNorm eps must be positive");
    const double hi = p.gamma1.cwiseAbs().maxCoeff() / std::sqrt(p.eps);
    return {hi * std::sqrt(1.0 - 1.0 / m), hi};
}

double ln_output_norm_bound(const LayerNormParams& p)
{
    // |c| / sigma <= sqrt(m) since sigma^2 >= |c|^2 / m.
    return p.gamma1.cwiseAbs().maxCoeff() * std::sqrt(static_cast<double>(p.width())) +
           p.gamma2.norm();
}

} // namespace ssmshrink
