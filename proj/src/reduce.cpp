#include "ssmshrink/reduce.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "parallel.hpp"
#include "ssmshrink/random.hpp"

namespace ssmshrink
{

namespace
{

/// sum_{k<L} a^k b^(L-1-k)
cplx t_star_weight(cplx a, cplx b, int L)
{
    if (a == b)
        return static_cast<double>(L) * ipow(a, L - 1);
    const double gap = std::abs(a - b);
    if (gap < 0.1 * std::max(std::abs(a), std::abs(b)))
    {
        // divided difference would cancel; sum the series directly
        cplx sum{0.0, 0.0};
        cplx ak{1.0, 0.0};
        for (int k = 0; k < L; ++k)
        {
            sum += ak * ipow(b, L - 1 - k);
            ak *= a;
        }
        return sum;
    }
    return (ipow(a, L) - ipow(b, L)) / (a - b);
}

void check_layers(const std::vector<LqoSystem>& fulls, const std::vector<LqoSystem>& roms,
                  const std::vector<double>& gains)
{
    if (fulls.size() != roms.size() || fulls.size() != gains.size())
    {
        std::ostringstream os;
        os << "layer count mismatch: " << fulls.size() << " full, " << roms.size()
           << " reduced, " << gains.size() << " gains";
        throw ShapeError(os.str());
    }
    for (std::size_t i = 0; i < fulls.size(); ++i)
        if (fulls[i].input_dim() != roms[i].input_dim() ||
            fulls[i].output_dim() != roms[i].output_dim())
            throw ShapeError("layer " + std::to_string(i) +
                             ": reduced system must keep the input and output dimensions");
}

GradientSet zero_gradient(const LqoSystem& rsys)
{
    GradientSet g;
    g.dLambda = CVector::Zero(rsys.state_dim());
    g.dB = CMatrix::Zero(rsys.state_dim(), rsys.input_dim());
    g.dC = CMatrix::Zero(rsys.output_dim(), rsys.state_dim());
    for (const auto& Uj : rsys.U())
        g.dU.push_back(CMatrix::Zero(Uj.rows(), Uj.cols()));
    return g;
}

struct LayerEval
{
    double phi = 0.0;
    GradientSet grad;
};

LayerEval evaluate_layer(const LqoSystem& sys, const LqoSystem& rsys, double gain, Horizon L,
                         const GradientOptions& opts)
{
    const auto pg = grad_phi(sys, rsys, L, opts);
    LayerEval out;
    out.phi = pg.phi;
    if (!(pg.phi > 1e-14 * pg.scale))
    {
        out.grad = zero_gradient(rsys);
        return out;
    }
    const double factor = gain / (2.0 * std::sqrt(pg.phi));
    out.grad.dLambda = factor * pg.dA.diagonal();
    out.grad.dB = factor * pg.dB;
    out.grad.dC = factor * pg.dC;
    for (std::size_t j = 0; j < pg.dM.size(); ++j)
        out.grad.dU.push_back(factor * grad_u_from_m(rsys.U()[j], pg.dM[j]));
    return out;
}

} // namespace

CMatrix t_star_diag(const CVector& lambda_hat, const CMatrix& X, Horizon L)
{
    const auto r = lambda_hat.size();
    if (X.rows() != r || X.cols() != r)
        throw ShapeError("t_star_diag needs an r x r argument with r = " + std::to_string(r));
    const CVector a = lambda_hat.conjugate();
    CMatrix out(r, r);
    for (Eigen::Index j = 0; j < r; ++j)
        for (Eigen::Index i = 0; i < r; ++i)
            out(i, j) = X(i, j) * t_star_weight(a(i), a(j), L.steps());
    return out;
}

PhiGradient grad_phi(const LqoSystem& sys, const LqoSystem& rsys, Horizon L,
                     const GradientOptions& opts)
{
    return grad_phi(sys, rsys, compute_gramians(sys, rsys, L), L, opts);
}

PhiGradient grad_phi(const LqoSystem& sys, const LqoSystem& rsys, const GramianSet& G,
                     Horizon L, const GradientOptions& opts)
{
    const auto M = sys.M_list();
    const auto Mh = rsys.M_list();
    const CMatrix& B = sys.B();
    const CMatrix& C = sys.C();
    const CMatrix& Bh = rsys.B();
    const CMatrix& Ch = rsys.C();

    PhiGradient out;
    const auto terms = h2l_error_terms(sys, rsys, L);
    out.phi = terms.clamped();
    out.scale = terms.scale;

    // Adjoint weights of the reduced and cross Gramians over the horizon.
    const CMatrix W_hat = G.Yhat_L + 2.0 * G.Zhat_L;                 // r x r
    const CMatrix W_cross = (G.Ytilde_L + 2.0 * G.Ztilde_L).adjoint(); // r x n

    // Terms produced by differentiating A^^L inside the finite Gramians.
    CMatrix Q_hat = Ch.adjoint() * Ch;
    CMatrix Q_cross = Ch.adjoint() * C;
    const CMatrix PtA = G.Ptilde_L.adjoint();
    for (std::size_t k = 0; k < M.size(); ++k)
    {
        Q_hat.noalias() += 2.0 * Mh[k] * G.Phat_L * Mh[k];
        Q_cross.noalias() += 2.0 * Mh[k] * PtA * M[k];
    }
    const CMatrix V = Q_cross * G.S_L.asDiagonal() * G.Ptilde_inf -
                      Q_hat * G.Shat_L.asDiagonal() * G.Phat_inf;

    out.dA = 2.0 * (W_hat * rsys.lambda().asDiagonal() * G.Phat_inf -
                    W_cross * sys.lambda().asDiagonal() * G.Ptilde_inf +
                    t_star_diag(rsys.lambda(), V, L));
    out.dB = 2.0 * (W_hat * Bh - W_cross * B);
    const double c_sign = opts.flip_c_cross_sign ? 1.0 : -1.0;
    out.dC = 2.0 * (c_sign * C * G.Ptilde_L + Ch * G.Phat_L);
    out.dM.reserve(M.size());
    for (std::size_t k = 0; k < M.size(); ++k)
        out.dM.push_back(2.0 * (G.Phat_L * Mh[k] * G.Phat_L - PtA * M[k] * G.Ptilde_L));
    return out;
}

CMatrix grad_u_from_m(const CMatrix& U, const CMatrix& dM)
{
    if (dM.rows() != U.cols() || dM.cols() != U.cols())
        throw ShapeError("grad_u_from_m: dM must be square with U's column count");
    return U * (dM + dM.adjoint());
}

double GradientSet::squared_norm() const
{
    double s = dLambda.squaredNorm() + dB.squaredNorm() + dC.squaredNorm();
    for (const auto& d : dU)
        s += d.squaredNorm();
    return s;
}

double objective_f(const std::vector<LqoSystem>& fulls, const std::vector<LqoSystem>& roms,
                   const std::vector<double>& gains, Horizon L)
{
    check_layers(fulls, roms, gains);
    double f = 0.0;
    for (std::size_t i = 0; i < fulls.size(); ++i)
        f += gains[i] * std::sqrt(h2l_error_sq(fulls[i], roms[i], L));
    return f;
}

ObjectiveEval grad_objective(const std::vector<LqoSystem>& fulls,
                             const std::vector<LqoSystem>& roms,
                             const std::vector<double>& gains, Horizon L,
                             const GradientOptions& opts, int threads)
{
    check_layers(fulls, roms, gains);
    const int xi = static_cast<int>(fulls.size());
    std::vector<LayerEval> evals(xi);
    detail::parallel_for(xi, threads, [&](int i) {
        evals[i] = evaluate_layer(fulls[i], roms[i], gains[i], L, opts);
    });
    ObjectiveEval out;
    for (int i = 0; i < xi; ++i)
    {
        out.value += gains[i] * std::sqrt(evals[i].phi);
        out.grads.push_back(std::move(evals[i].grad));
    }
    return out;
}

void ReductionConfig::validate() const
{
    if (horizon < 1)
        throw DomainError("horizon must be >= 1");
    for (double e : eta_init)
        if (!(e > 0.0))
            throw DomainError("initial step sizes must be positive");
    if (!(c1 > 0.0 && c1 < 1.0))
        throw DomainError("Armijo constant c1 must lie in (0, 1)");
    if (!(rho > 0.0 && rho < 1.0))
        throw DomainError("backtracking factor rho must lie in (0, 1)");
    if (max_iters < 0)
        throw DomainError("max_iters must be >= 0");
    if (!(grad_tol >= 0.0))
        throw DomainError("grad_tol must be >= 0");
    if (!(stability_margin > 0.0 && stability_margin < 1.0))
        throw DomainError("stability margin must lie in (0, 1)");
    if (max_backtracks < 0)
        throw DomainError("max_backtracks must be >= 0");
    for (int r : ranks)
        if (r < 1)
            throw DomainError("ranks must be positive");
}

std::string to_string(Termination t)
{
    switch (t)
    {
    case Termination::converged:
        return "converged";
    case Termination::max_iters:
        return "max_iters";
    case Termination::stalled:
        return "stalled";
    }
    return "unknown";
}

namespace
{

std::vector<LqoSystem> propose(const std::vector<LqoSystem>& roms,
                               const std::vector<GradientSet>& grads,
                               const std::array<double, 4>& eta, double margin, bool& stable)
{
    std::vector<LqoSystem> out;
    out.reserve(roms.size());
    stable = true;
    for (std::size_t i = 0; i < roms.size(); ++i)
    {
        CVector lambda = roms[i].lambda() - eta[0] * grads[i].dLambda;
        if (!is_stable(lambda, margin))
        {
            stable = false;
            return {};
        }
        std::vector<CMatrix> U;
        U.reserve(roms[i].U().size());
        for (std::size_t j = 0; j < roms[i].U().size(); ++j)
            U.push_back(roms[i].U()[j] - eta[3] * grads[i].dU[j]);
        out.emplace_back(std::move(lambda), roms[i].B() - eta[1] * grads[i].dB,
                         roms[i].C() - eta[2] * grads[i].dC, std::move(U), margin);
    }
    return out;
}

} // namespace

ReductionResult reduce_gradient_descent(const std::vector<LqoSystem>& fulls,
                                        const std::vector<LqoSystem>& init_roms,
                                        const std::vector<double>& gains,
                                        const ReductionConfig& config)
{
    config.validate();
    check_layers(fulls, init_roms, gains);
    if (!config.ranks.empty())
    {
        if (config.ranks.size() != fulls.size())
            throw ShapeError("expected one rank per layer");
        for (std::size_t i = 0; i < fulls.size(); ++i)
            if (init_roms[i].state_dim() != config.ranks[i])
                throw ShapeError("initial reduced model of layer " + std::to_string(i) +
                                 " does not have the configured rank");
    }
    for (std::size_t i = 0; i < init_roms.size(); ++i)
        if (!is_stable(init_roms[i].lambda(), config.stability_margin))
            throw StabilityError("initial reduced model of layer " + std::to_string(i) +
                                 " violates the stability margin");

    const Horizon L(config.horizon);
    std::vector<LqoSystem> roms = init_roms;
    ReductionResult result;
    auto& rep = result.report;
    rep.reason = Termination::max_iters;

    auto record = [&](const IterationRecord& row) {
        rep.rows.push_back(row);
        if (config.observer)
            config.observer(row, roms);
    };

    for (int iter = 0;; ++iter)
    {
        const auto eval = grad_objective(fulls, roms, gains, L, {}, config.threads);
        double grad_sq = 0.0;
        double block_sq[4] = {0.0, 0.0, 0.0, 0.0};
        for (const auto& g : eval.grads)
        {
            block_sq[0] += g.dLambda.squaredNorm();
            block_sq[1] += g.dB.squaredNorm();
            block_sq[2] += g.dC.squaredNorm();
            for (const auto& d : g.dU)
                block_sq[3] += d.squaredNorm();
        }
        grad_sq = block_sq[0] + block_sq[1] + block_sq[2] + block_sq[3];

        IterationRecord row;
        row.iter = iter;
        row.objective = eval.value;
        row.grad_norm = std::sqrt(grad_sq);
        if (iter == 0)
            rep.initial_objective = eval.value;

        if (row.grad_norm <= config.grad_tol)
        {
            rep.reason = Termination::converged;
            record(row);
            break;
        }
        if (iter >= config.max_iters)
        {
            rep.reason = Termination::max_iters;
            record(row);
            break;
        }

        std::array<double, 4> eta = config.eta_init;
        bool accepted = false;
        std::vector<LqoSystem> candidate;
        while (row.backtracks <= config.max_backtracks)
        {
            bool stable = true;
            candidate = propose(roms, eval.grads, eta, config.stability_margin, stable);
            if (!stable)
            {
                eta[0] *= config.rho;
                ++row.backtracks;
                continue;
            }
            const double f_new = objective_f(fulls, candidate, gains, L);
            const double D = eta[0] * block_sq[0] + eta[1] * block_sq[1] +
                             eta[2] * block_sq[2] + eta[3] * block_sq[3];
            if (f_new <= eval.value - config.c1 * D)
            {
                accepted = true;
                break;
            }
            for (double& e : eta)
                e *= config.rho;
            ++row.backtracks;
        }

        if (!accepted)
        {
            rep.reason = Termination::stalled;
            record(row);
            break;
        }
        for (int k = 0; k < 4; ++k)
            row.step_scales[k] = eta[k] / config.eta_init[k];
        record(row);
        roms = std::move(candidate);
    }

    rep.final_objective = rep.rows.back().objective;
    result.roms = std::move(roms);
    return result;
}

LqoSystem init_mode_dominance(const LqoSystem& sys, int r)
{
    const int n = sys.state_dim();
    if (r < 1 || r > n)
        throw DomainError("mode-dominance rank must satisfy 1 <= r <= n = " + std::to_string(n));

    std::vector<double> score(n);
    for (int i = 0; i < n; ++i)
    {
        double out_weight = sys.C().col(i).norm();
        for (const auto& Uj : sys.U())
            out_weight += Uj.col(i).norm();
        const double mag = std::abs(sys.lambda()(i));
        score[i] = out_weight * sys.B().row(i).norm() / std::sqrt(1.0 - mag * mag);
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&score](int a, int b) { return score[a] > score[b]; });
    order.resize(r);

    CVector lambda(r);
    CMatrix B(r, sys.input_dim());
    CMatrix C(sys.output_dim(), r);
    std::vector<CMatrix> U(sys.U().size(), CMatrix(sys.quad_rank(), r));
    for (int k = 0; k < r; ++k)
    {
        const int i = order[k];
        lambda(k) = sys.lambda()(i);
        B.row(k) = sys.B().row(i);
        C.col(k) = sys.C().col(i);
        for (std::size_t j = 0; j < U.size(); ++j)
            U[j].col(k) = sys.U()[j].col(i);
    }
    return LqoSystem(std::move(lambda), std::move(B), std::move(C), std::move(U));
}

LqoSystem init_random_stable(int r, int m, int p, int c, std::uint64_t seed)
{
    if (r < 1 || m < 1 || p < 1 || c < 1)
        throw DomainError("init_random_stable: dimensions must be positive");
    Rng rng(seed);
    const double s = 1.0 / std::sqrt(static_cast<double>(r));
    CVector lambda = uniform_disk_vector(rng, r, 1.0 - kStabilityMargin - 0.05);
    CMatrix B = complex_normal_matrix(rng, r, m, s);
    CMatrix C = complex_normal_matrix(rng, p, r, s);
    std::vector<CMatrix> U;
    U.reserve(p);
    for (int j = 0; j < p; ++j)
        U.push_back(complex_normal_matrix(rng, c, r, s));
    return LqoSystem(std::move(lambda), std::move(B), std::move(C), std::move(U));
}

namespace
{

enum class Block
{
    lambda,
    B,
    C,
    U
};

/// Returns a copy of rsys with entry `idx` of the given block shifted by delta.
/// For U the index runs over U_0, U_1, ... in column-major order.
LqoSystem perturbed(const LqoSystem& rsys, Block block, Eigen::Index idx, cplx delta)
{
    CVector lambda = rsys.lambda();
    CMatrix B = rsys.B();
    CMatrix C = rsys.C();
    std::vector<CMatrix> U = rsys.U();
    switch (block)
    {
    case Block::lambda:
        lambda(idx) += delta;
        break;
    case Block::B:
        B.data()[idx] += delta;
        break;
    case Block::C:
        C.data()[idx] += delta;
        break;
    case Block::U:
    {
        const Eigen::Index per = U.front().size();
        U[idx / per].data()[idx % per] += delta;
        break;
    }
    }
    return LqoSystem(std::move(lambda), std::move(B), std::move(C), std::move(U), 0.0);
}

CVector flatten(const GradientSet& g, Block block)
{
    switch (block)
    {
    case Block::lambda:
        return g.dLambda;
    case Block::B:
        return Eigen::Map<const CVector>(g.dB.data(), g.dB.size());
    case Block::C:
        return Eigen::Map<const CVector>(g.dC.data(), g.dC.size());
    case Block::U:
    {
        const Eigen::Index per = g.dU.front().size();
        CVector out(per * static_cast<Eigen::Index>(g.dU.size()));
        for (std::size_t j = 0; j < g.dU.size(); ++j)
            out.segment(static_cast<Eigen::Index>(j) * per, per) =
                Eigen::Map<const CVector>(g.dU[j].data(), per);
        return out;
    }
    }
    return {};
}

const char* block_name(Block b)
{
    switch (b)
    {
    case Block::lambda:
        return "lambda";
    case Block::B:
        return "B";
    case Block::C:
        return "C";
    case Block::U:
        return "U";
    }
    return "?";
}

} // namespace

std::vector<BlockError> finite_difference_check(const std::vector<LqoSystem>& fulls,
                                                const std::vector<LqoSystem>& roms,
                                                const std::vector<double>& gains, Horizon L,
                                                double step, const GradientOptions& opts)
{
    if (!(step >= 1e-8 && step <= 1e-4))
        throw DomainError("finite-difference step must lie in [1e-8, 1e-4]");
    const auto analytic = grad_objective(fulls, roms, gains, L, opts);

    std::vector<BlockError> out;
    for (std::size_t i = 0; i < fulls.size(); ++i)
    {
        auto layer_term = [&](const LqoSystem& candidate) {
            return gains[i] * std::sqrt(h2l_error_sq(fulls[i], candidate, L));
        };
        for (Block block : {Block::lambda, Block::B, Block::C, Block::U})
        {
            const CVector a = flatten(analytic.grads[i], block);
            CVector fd(a.size());
            for (Eigen::Index k = 0; k < a.size(); ++k)
            {
                const double d_re = (layer_term(perturbed(roms[i], block, k, {step, 0.0})) -
                                     layer_term(perturbed(roms[i], block, k, {-step, 0.0}))) /
                                    (2.0 * step);
                const double d_im = (layer_term(perturbed(roms[i], block, k, {0.0, step})) -
                                     layer_term(perturbed(roms[i], block, k, {0.0, -step}))) /
                                    (2.0 * step);
                fd(k) = {d_re, d_im};
            }
            BlockError e;
            e.layer = static_cast<int>(i);
            e.block = block_name(block);
            e.abs_error = (a - fd).cwiseAbs().maxCoeff();
            const double denom = std::max(a.norm(), fd.norm());
            const double floor = 1e-8 * (1.0 + std::abs(gains[i]));
            e.rel_error = denom > floor ? (a - fd).norm() / denom : 0.0;
            out.push_back(e);
        }
    }
    return out;
}

} // namespace ssmshrink
