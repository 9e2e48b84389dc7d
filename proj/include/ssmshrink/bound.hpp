#ifndef SSMSHRINK_BOUND_HPP
#define SSMSHRINK_BOUND_HPP

#include <optional>
#include <vector>

#include "ssmshrink/dssm.hpp"

namespace ssmshrink
{

/// sqrt(sum_k |x_k|^2)
double signal_l2_norm(const RealSignal& x);
/// max_k |x_k|
double signal_linf_norm(const RealSignal& x);

/// g~ = 1 + sqrt(L) (||h1|| + 2 b ||h2||), norms in l2_L.
double layer_gain_gtilde(const LqoSystem& sys, Horizon L, double b);

/// g = 1 + sqrt(L) (||h1|| + ||h2|| (u_norm + uhat_norm)).
double layer_gain_g(const LqoSystem& sys, Horizon L, double u_norm, double uhat_norm);

/// G_i = omega^(xi - i + 1) prod_{j > i} g_j  (i is 1-based in that formula).
std::vector<double> accumulated_gains(const std::vector<double>& layer_gains, double omega);

/// G~_i of the full model for a given b and omega.
std::vector<double> corollary_gains(const DeepSsm& full, Horizon L, double b, double omega);

/// Corollary gains G~_i divided by their maximum, used as layer weights of the
/// reduction objective. b defaults to apriori_inner_input_bound.
std::vector<double> reduction_weights(const DeepSsm& full, Horizon L,
                                      std::optional<double> b = std::nullopt);

/// Largest LayerNorm Lipschitz upper bound over the layers of all given models.
double lipschitz_upper(const DeepSsm& model);
double lipschitz_upper(const DeepSsm& a, const DeepSsm& b);

/// Bound on ||u^(j)||_{l2_L} for j >= 2 that holds for every input, from the
/// LayerNorm output bound of the preceding layers.
double apriori_inner_input_bound(const DeepSsm& model, Horizon L);

/// e_xi <= b sqrt(1 + b^2) sum_i G~_i ||S^(i) - S^^(i)||_{h2_L}.
double corollary_bound(const DeepSsm& full, const DeepSsm& reduced, Horizon L, double b,
                       double omega);

/// Input-dependent bound sum_i G_i ||S^(i) - S^^(i)|| |u^^(i)| sqrt(1 + |u^^(i)|^2).
double theorem_bound(const DeepSsm& full, const DeepSsm& reduced, const RealSignal& s_in,
                     Horizon L, double omega);

/// e_xi = max_k |s_out,k - s^_out,k|.
double measured_output_error(const DeepSsm& full, const DeepSsm& reduced,
                             const RealSignal& s_in, Horizon L);

struct KronCheck
{
    double lhs = 0.0; ///< ||u (x) u - u^ (x) u^||_{l2_L}
    double rhs = 0.0; ///< ||u - u^|| (||u|| + ||u^||)
};

KronCheck kron_inequality_check(const RealSignal& u, const RealSignal& uhat, Horizon L);

/// One step of the layer-to-layer error recurrence evaluated on traces.
struct RecurrenceRow
{
    double measured = 0.0;   ///< e_i
    double rhs = 0.0;        ///< Lip_i {(1 + kappa_i) e_{i-1} + E_i sqrt(1 + b^_i^2) b^_i}
    double kappa = 0.0;
    double lipschitz = 0.0;
};

std::vector<RecurrenceRow> layer_recurrence(const DeepSsm& full, const DeepSsm& reduced,
                                            const RealSignal& s_in, Horizon L);

struct LayerBoundTerms
{
    double h2l_error = 0.0; ///< ||S^(i) - S^^(i)||_{h2_L}
    double h1_norm = 0.0;   ///< ||h1^(i)||_{l2_L} of the full layer
    double h2_norm = 0.0;
    double gain_gtilde = 0.0;
    double gain_Gtilde = 0.0;
    double gain_g = 0.0;
    double gain_G = 0.0;
    double u_norm = 0.0;
    double uhat_norm = 0.0;
};

struct BoundReport
{
    std::vector<LayerBoundTerms> per_layer;
    double omega = 0.0;
    double b = 0.0;
    double max_input_norm = 0.0; ///< measured max of all |u^(j)|, |u^^(j)|
    bool b_covers_inputs = true;
    double bound_value = 0.0;   ///< corollary bound
    double theorem_value = 0.0; ///< input-dependent bound
    double measured_error = 0.0;
};

struct BoundOptions
{
    std::optional<double> b;     ///< default: measured max input norm
    std::optional<double> omega; ///< default: lipschitz_upper over both models
};

BoundReport evaluate_bounds(const DeepSsm& full, const DeepSsm& reduced, const RealSignal& s_in,
                            Horizon L, const BoundOptions& opts = {});

} // namespace ssmshrink

#endif // SSMSHRINK_BOUND_HPP
