#ifndef SSMSHRINK_LAYER_NORM_HPP
#define SSMSHRINK_LAYER_NORM_HPP

#include "ssmshrink/common.hpp"

namespace ssmshrink
{

/// LN(z) = gamma1 .* (z - mean(z)) / sigma + gamma2,
/// sigma = sqrt(|z - mean(z)|^2 / m + eps).
struct LayerNormParams
{
    RVector gamma1;
    RVector gamma2;
    double eps = 1e-5;

    int width() const noexcept { return static_cast<int>(gamma1.size()); }
    void validate() const;
};

RVector ln_apply(const RVector& z, const LayerNormParams& p);

/// Applies LN to every column of a signal.
RealSignal ln_apply_signal(const RealSignal& z, const LayerNormParams& p);

/// Closed-form Jacobian D (I/sigma - c c^T / (sigma^3 m)) P with c = P z.
RMatrix ln_jacobian(const RVector& z, const LayerNormParams& p);

struct LipschitzInterval
{
    double lo = 0.0;
    double hi = 0.0;
};

/// [||gamma1||_inf / sqrt(eps) * sqrt(1 - 1/m), ||gamma1||_inf / sqrt(eps)].
/// Requires m >= 2.
LipschitzInterval ln_lipschitz_interval(const LayerNormParams& p, int m);

/// Per-sample bound |LN(z)| <= ||gamma1||_inf sqrt(m) + ||gamma2||, valid for all z.
double ln_output_norm_bound(const LayerNormParams& p);

} // namespace ssmshrink

#endif // SSMSHRINK_LAYER_NORM_HPP
