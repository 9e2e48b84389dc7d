#ifndef SSMSHRINK_REDUCE_HPP
#define SSMSHRINK_REDUCE_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ssmshrink/lqo.hpp"
#include "ssmshrink/stein.hpp"

namespace ssmshrink
{

/// T*_{A^,L}(X) = sum_{j<L} (A^^*)^j X (A^^*)^{L-1-j} for A^ = diag(lambda_hat),
/// evaluated entrywise. X must be r x r.
CMatrix t_star_diag(const CVector& lambda_hat, const CMatrix& X, Horizon L);

/// Gradients of phi = ||S - S^||^2_{h2_L} with respect to the reduced
/// parameters, using <X, Y> = Re tr(X^* Y). dA is the full r x r gradient for
/// an unconstrained A^; dM[j] is taken before the M = U^* U chain rule.
struct PhiGradient
{
    double phi = 0.0;
    double scale = 0.0; ///< cancellation scale of phi (see H2ErrorTerms)
    CMatrix dA;
    CMatrix dB;
    CMatrix dC;
    std::vector<CMatrix> dM;
};

struct GradientOptions
{
    /// Reverses the sign of the C P~_L term in dC. Only for validating the
    /// finite-difference checker.
    bool flip_c_cross_sign = false;
};

PhiGradient grad_phi(const LqoSystem& sys, const LqoSystem& rsys, Horizon L,
                     const GradientOptions& opts = {});
PhiGradient grad_phi(const LqoSystem& sys, const LqoSystem& rsys, const GramianSet& G,
                     Horizon L, const GradientOptions& opts = {});

/// grad_U f = U (grad_M f + grad_M f^*) for M = U^* U.
CMatrix grad_u_from_m(const CMatrix& U, const CMatrix& dM);

/// Gradient with respect to (lambda^, B^, C^, U^_j) of one reduced layer.
struct GradientSet
{
    CVector dLambda;
    CMatrix dB;
    CMatrix dC;
    std::vector<CMatrix> dU;

    double squared_norm() const;
};

/// f = sum_i G~_i ||S^(i) - S^^(i)||_{h2_L}.
double objective_f(const std::vector<LqoSystem>& fulls, const std::vector<LqoSystem>& roms,
                   const std::vector<double>& gains, Horizon L);

struct ObjectiveEval
{
    double value = 0.0;
    std::vector<GradientSet> grads;
};

/// Objective together with its gradient. A layer whose phi is below 1e-14 times
/// its cancellation scale is treated as exactly matched and gets a zero gradient.
ObjectiveEval grad_objective(const std::vector<LqoSystem>& fulls,
                             const std::vector<LqoSystem>& roms,
                             const std::vector<double>& gains, Horizon L,
                             const GradientOptions& opts = {}, int threads = 1);

struct IterationRecord;

struct ReductionConfig
{
    std::vector<int> ranks;
    int horizon = 64;
    std::array<double, 4> eta_init{1.0, 1.0, 1.0, 1.0}; ///< (lambda, B, C, U)
    double c1 = 1e-4;
    double rho = 0.5;
    int max_iters = 20;
    double grad_tol = 1e-8;
    double stability_margin = kStabilityMargin;
    int max_backtracks = 60;
    int threads = 1;
    /// Called once per visited iterate with its report row and reduced systems.
    std::function<void(const IterationRecord&, const std::vector<LqoSystem>&)> observer;

    void validate() const;
};

struct IterationRecord
{
    int iter = 0;
    double objective = 0.0;
    double grad_norm = 0.0;
    int backtracks = 0;
    std::array<double, 4> step_scales{0.0, 0.0, 0.0, 0.0}; ///< eta / eta_init of the accepted step
};

enum class Termination
{
    converged,
    max_iters,
    stalled,
};

std::string to_string(Termination t);

struct ReductionReport
{
    std::vector<IterationRecord> rows;
    double initial_objective = 0.0;
    double final_objective = 0.0;
    Termination reason = Termination::max_iters;
};

struct ReductionResult
{
    std::vector<LqoSystem> roms;
    ReductionReport report;
};

/// Stability-guarded gradient descent with Armijo backtracking.
ReductionResult reduce_gradient_descent(const std::vector<LqoSystem>& fulls,
                                        const std::vector<LqoSystem>& init_roms,
                                        const std::vector<double>& gains,
                                        const ReductionConfig& config);

/// Keeps the r modes with the largest (|C e_i| + sum_j |U_j e_i|) |e_i^T B| / sqrt(1 - |lambda_i|^2).
LqoSystem init_mode_dominance(const LqoSystem& sys, int r);

/// lambda uniform in the disk of radius 0.95 - margin; B, C, U complex normal / sqrt(r).
LqoSystem init_random_stable(int r, int m, int p, int c, std::uint64_t seed);

struct BlockError
{
    int layer = 0;
    std::string block; ///< "lambda", "B", "C" or "U"
    double rel_error = 0.0;
    double abs_error = 0.0;
};

/// Central differences of f over every real and imaginary coordinate of every
/// reduced parameter, compared against grad_objective.
std::vector<BlockError> finite_difference_check(const std::vector<LqoSystem>& fulls,
                                                const std::vector<LqoSystem>& roms,
                                                const std::vector<double>& gains, Horizon L,
                                                double step,
                                                const GradientOptions& opts = {});

} // namespace ssmshrink

#endif // SSMSHRINK_REDUCE_HPP
