#include "ssmshrink/dssm.hpp"

#include <sstream>
#include <utility>

#include "ssmshrink/random.hpp"

namespace ssmshrink
{

DeepSsm::DeepSsm(std::vector<DssmLayer> layers) : layers_(std::move(layers))
{
    if (layers_.empty())
        throw ShapeError("Deep SSM needs at least one layer");
    const int m = layers_.front().system.input_dim();
    for (std::size_t i = 0; i < layers_.size(); ++i)
    {
        const auto& layer = layers_[i];
        if (layer.system.input_dim() != m || layer.system.output_dim() != m)
        {
            std::ostringstream os;
            os << "layer " << i << " must map width " << m << " to width " << m << ", got "
               << layer.system.input_dim() << " -> " << layer.system.output_dim();
            throw ShapeError(os.str());
        }
        layer.ln.validate();
        if (layer.ln.width() != m)
            throw ShapeError("layer " + std::to_string(i) + " LayerNorm width differs from " +
                             std::to_string(m));
    }
}

std::vector<LqoSystem> DeepSsm::systems() const
{
    std::vector<LqoSystem> out;
    out.reserve(layers_.size());
    for (const auto& layer : layers_)
        out.push_back(layer.system);
    return out;
}

ForwardTrace forward(const DeepSsm& model, const RealSignal& s_in, Horizon L)
{
    if (s_in.rows() != model.width() || s_in.cols() != L.steps())
    {
        std::ostringstream os;
        os << "input signal must be " << model.width() << " x " << L.steps() << ", got "
           << s_in.rows() << " x " << s_in.cols();
        throw ShapeError(os.str());
    }
    ForwardTrace trace;
    trace.inputs.reserve(model.depth());
    trace.outputs.reserve(model.depth());
    RealSignal u = s_in;
    for (const auto& layer : model.layers())
    {
        ComplexSignal y = simulate_recursive(layer.system, u, L);
        const RealSignal z = u + y.real();
        trace.inputs.push_back(std::move(u));
        trace.outputs.push_back(std::move(y));
        u = ln_apply_signal(z, layer.ln);
    }
    trace.output = std::move(u);
    return trace;
}

DeepSsm synth_random_dssm(const SynthOptions& opts)
{
    if (opts.layers < 1 || opts.state_dim < 1 || opts.width < 1 || opts.quad_rank < 1)
        throw DomainError("synth: layers, state dimension, width and quad rank must be positive");
    if (!(opts.ln_eps > 0.0))
        throw DomainError("synth: ln_eps must be positive");

    Rng rng(opts.seed);
    std::uniform_real_distribution<double> scale_dist(0.5, 1.5);
    std::normal_distribution<double> n01(0.0, 1.0);
    const int n = opts.state_dim;
    const int m = opts.width;
    const double s = 1.0 / std::sqrt(static_cast<double>(n));

    std::vector<DssmLayer> layers;
    layers.reserve(opts.layers);
    for (int i = 0; i < opts.layers; ++i)
    {
        CVector lambda = uniform_disk_vector(rng, n, 0.95);
        CMatrix B = complex_normal_matrix(rng, n, m, s);
        CMatrix C = complex_normal_matrix(rng, m, n, s);
        std::vector<CMatrix> U;
        U.reserve(m);
        for (int j = 0; j < m; ++j)
            U.push_back(complex_normal_matrix(rng, opts.quad_rank, n, s));

        LayerNormParams ln;
        ln.gamma1.resize(m);
        ln.gamma2.resize(m);
        for (int k = 0; k < m; ++k)
            ln.gamma1(k) = scale_dist(rng);
        for (int k = 0; k < m; ++k)
            ln.gamma2(k) = 0.1 * n01(rng);
        ln.eps = opts.ln_eps;

        layers.push_back({LqoSystem(std::move(lambda), std::move(B), std::move(C), std::move(U)),
                          std::move(ln)});
    }
    return DeepSsm(std::move(layers));
}

DeepSsm build_reduced_dssm(const DeepSsm& full, const std::vector<LqoSystem>& roms)
{
    if (static_cast<int>(roms.size()) != full.depth())
        throw ShapeError("expected " + std::to_string(full.depth()) + " reduced systems, got " +
                         std::to_string(roms.size()));
    std::vector<DssmLayer> layers;
    layers.reserve(roms.size());
    for (std::size_t i = 0; i < roms.size(); ++i)
        layers.push_back({roms[i], full.layer(i).ln});
    return DeepSsm(std::move(layers));
}

} // namespace ssmshrink
