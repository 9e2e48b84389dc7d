#include "ssmshrink/bound.hpp"

#include <algorithm>

namespace ssmshrink
{

namespace
{

void check_pair(const DeepSsm& full, const DeepSsm& reduced)
{
    if (full.depth() != reduced.depth())
        throw ShapeError("full and reduced models have different depths (" +
                         std::to_string(full.depth()) + " vs " + std::to_string(reduced.depth()) +
                         ")");
    if (full.width() != reduced.width())
        throw ShapeError("full and reduced models have different widths");
}

double h2l_error(const LqoSystem& a, const LqoSystem& b, Horizon L)
{
    return std::sqrt(h2l_error_sq(a, b, L));
}

} // namespace

double signal_l2_norm(const RealSignal& x)
{
    return x.norm();
}

double signal_linf_norm(const RealSignal& x)
{
    if (x.cols() == 0)
        return 0.0;
    return x.colwise().norm().maxCoeff();
}

double layer_gain_gtilde(const LqoSystem& sys, Horizon L, double b)
{
    if (!(b >= 0.0))
        throw DomainError("b must be nonnegative");
    const auto k = kernel_norms_sq(sys, L);
    return 1.0 + L.sqrt_steps() * (std::sqrt(k.linear) + 2.0 * b * std::sqrt(k.quadratic));
}

double layer_gain_g(const LqoSystem& sys, Horizon L, double u_norm, double uhat_norm)
{
    const auto k = kernel_norms_sq(sys, L);
    return 1.0 + L.sqrt_steps() *
                     (std::sqrt(k.linear) + std::sqrt(k.quadratic) * (u_norm + uhat_norm));
}

std::vector<double> accumulated_gains(const std::vector<double>& layer_gains, double omega)
{
    const std::size_t xi = layer_gains.size();
    std::vector<double> G(xi);
    double tail = 1.0; // prod_{j > i} g_j
    for (std::size_t idx = xi; idx-- > 0;)
    {
        G[idx] = std::pow(omega, static_cast<double>(xi - idx)) * tail;
        tail *= layer_gains[idx];
    }
    return G;
}

std::vector<double> corollary_gains(const DeepSsm& full, Horizon L, double b, double omega)
{
    std::vector<double> g;
    g.reserve(full.depth());
    for (const auto& layer : full.layers())
        g.push_back(layer_gain_gtilde(layer.system, L, b));
    return accumulated_gains(g, omega);
}

double lipschitz_upper(const DeepSsm& model)
{
    double w = 0.0;
    for (const auto& layer : model.layers())
        w = std::max(w, ln_lipschitz_interval(layer.ln, std::max(2, layer.ln.width())).hi);
    return w;
}

double lipschitz_upper(const DeepSsm& a, const DeepSsm& b)
{
    return std::max(lipschitz_upper(a), lipschitz_upper(b));
}

double apriori_inner_input_bound(const DeepSsm& model, Horizon L)
{
    double b = 0.0;
    for (int i = 0; i + 1 < model.depth(); ++i)
        b = std::max(b, L.sqrt_steps() * ln_output_norm_bound(model.layer(i).ln));
    return b;
}

std::vector<double> reduction_weights(const DeepSsm& full, Horizon L, std::optional<double> b)
{
    auto G = corollary_gains(full, L, b ? *b : apriori_inner_input_bound(full, L),
                             lipschitz_upper(full));
    const double top = *std::max_element(G.begin(), G.end());
    for (double& g : G)
        g /= top;
    return G;
}

double corollary_bound(const DeepSsm& full, const DeepSsm& reduced, Horizon L, double b,
                       double omega)
{
    check_pair(full, reduced);
    const auto G = corollary_gains(full, L, b, omega);
    double sum = 0.0;
    for (int i = 0; i < full.depth(); ++i)
        sum += G[i] * h2l_error(full.layer(i).system, reduced.layer(i).system, L);
    return b * std::sqrt(1.0 + b * b) * sum;
}

double theorem_bound(const DeepSsm& full, const DeepSsm& reduced, const RealSignal& s_in,
                     Horizon L, double omega)
{
    check_pair(full, reduced);
    const auto tf = forward(full, s_in, L);
    const auto tr = forward(reduced, s_in, L);
    std::vector<double> g;
    for (int i = 0; i < full.depth(); ++i)
        g.push_back(layer_gain_g(full.layer(i).system, L, signal_l2_norm(tf.inputs[i]),
                                 signal_l2_norm(tr.inputs[i])));
    const auto G = accumulated_gains(g, omega);
    double sum = 0.0;
    for (int i = 0; i < full.depth(); ++i)
    {
        const double bh = signal_l2_norm(tr.inputs[i]);
        sum += G[i] * h2l_error(full.layer(i).system, reduced.layer(i).system, L) * bh *
               std::sqrt(1.0 + bh * bh);
    }
    return sum;
}

double measured_output_error(const DeepSsm& full, const DeepSsm& reduced,
                             const RealSignal& s_in, Horizon L)
{
    check_pair(full, reduced);
    const auto tf = forward(full, s_in, L);
    const auto tr = forward(reduced, s_in, L);
    return signal_linf_norm(tf.output - tr.output);
}

KronCheck kron_inequality_check(const RealSignal& u, const RealSignal& uhat, Horizon L)
{
    if (u.rows() != uhat.rows() || u.cols() != L.steps() || uhat.cols() != L.steps())
        throw ShapeError("kron_inequality_check needs two d x L signals");
    const auto d = u.rows();
    double lhs_sq = 0.0;
    RVector diff(d * d);
    for (int k = 0; k < L.steps(); ++k)
    {
        for (Eigen::Index i = 0; i < d; ++i)
            for (Eigen::Index j = 0; j < d; ++j)
                diff(i * d + j) = u(i, k) * u(j, k) - uhat(i, k) * uhat(j, k);
        lhs_sq += diff.squaredNorm();
    }
    KronCheck out;
    out.lhs = std::sqrt(lhs_sq);
    out.rhs = signal_l2_norm(u - uhat) * (signal_l2_norm(u) + signal_l2_norm(uhat));
    return out;
}

std::vector<RecurrenceRow> layer_recurrence(const DeepSsm& full, const DeepSsm& reduced,
                                            const RealSignal& s_in, Horizon L)
{
    check_pair(full, reduced);
    const auto tf = forward(full, s_in, L);
    const auto tr = forward(reduced, s_in, L);
    std::vector<RecurrenceRow> rows;
    double e_prev = 0.0;
    for (int i = 0; i < full.depth(); ++i)
    {
        const auto& sys = full.layer(i).system;
        const auto k = kernel_norms_sq(sys, L);
        const double beta = signal_l2_norm(tf.inputs[i]);
        const double beta_hat = signal_l2_norm(tr.inputs[i]);
        const double lip = std::max(
            ln_lipschitz_interval(full.layer(i).ln, std::max(2, full.width())).hi,
            ln_lipschitz_interval(reduced.layer(i).ln, std::max(2, full.width())).hi);

        RecurrenceRow row;
        row.kappa = L.sqrt_steps() * (std::sqrt(k.linear) + std::sqrt(k.quadratic) * (beta + beta_hat));
        row.lipschitz = lip;
        row.rhs = lip * ((1.0 + row.kappa) * e_prev +
                         h2l_error(sys, reduced.layer(i).system, L) *
                             std::sqrt(1.0 + beta_hat * beta_hat) * beta_hat);
        const RealSignal& next_full = (i + 1 < full.depth()) ? tf.inputs[i + 1] : tf.output;
        const RealSignal& next_red = (i + 1 < full.depth()) ? tr.inputs[i + 1] : tr.output;
        row.measured = signal_linf_norm(next_full - next_red);
        e_prev = row.measured;
        rows.push_back(row);
    }
    return rows;
}

BoundReport evaluate_bounds(const DeepSsm& full, const DeepSsm& reduced, const RealSignal& s_in,
                            Horizon L, const BoundOptions& opts)
{
    check_pair(full, reduced);
    const auto tf = forward(full, s_in, L);
    const auto tr = forward(reduced, s_in, L);

    BoundReport rep;
    for (int i = 0; i < full.depth(); ++i)
    {
        LayerBoundTerms t;
        t.u_norm = signal_l2_norm(tf.inputs[i]);
        t.uhat_norm = signal_l2_norm(tr.inputs[i]);
        rep.max_input_norm = std::max({rep.max_input_norm, t.u_norm, t.uhat_norm});
        rep.per_layer.push_back(t);
    }
    rep.omega = opts.omega.value_or(lipschitz_upper(full, reduced));
    rep.b = opts.b.value_or(rep.max_input_norm);
    rep.b_covers_inputs = rep.b >= rep.max_input_norm;

    std::vector<double> gt;
    std::vector<double> g;
    for (int i = 0; i < full.depth(); ++i)
    {
        auto& t = rep.per_layer[i];
        const auto& sys = full.layer(i).system;
        const auto k = kernel_norms_sq(sys, L);
        t.h1_norm = std::sqrt(k.linear);
        t.h2_norm = std::sqrt(k.quadratic);
        t.h2l_error = h2l_error(sys, reduced.layer(i).system, L);
        t.gain_gtilde = 1.0 + L.sqrt_steps() * (t.h1_norm + 2.0 * rep.b * t.h2_norm);
        t.gain_g = 1.0 + L.sqrt_steps() * (t.h1_norm + t.h2_norm * (t.u_norm + t.uhat_norm));
        gt.push_back(t.gain_gtilde);
        g.push_back(t.gain_g);
    }
    const auto Gt = accumulated_gains(gt, rep.omega);
    const auto G = accumulated_gains(g, rep.omega);
    double cor_sum = 0.0;
    for (int i = 0; i < full.depth(); ++i)
    {
        auto& t = rep.per_layer[i];
        t.gain_Gtilde = Gt[i];
        t.gain_G = G[i];
        cor_sum += Gt[i] * t.h2l_error;
        rep.theorem_value +=
            G[i] * t.h2l_error * t.uhat_norm * std::sqrt(1.0 + t.uhat_norm * t.uhat_norm);
    }
    rep.bound_value = rep.b * std::sqrt(1.0 + rep.b * rep.b) * cor_sum;
    rep.measured_error = signal_linf_norm(tf.output - tr.output);
    return rep;
}

} // namespace ssmshrink
