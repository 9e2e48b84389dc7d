#ifndef SSMSHRINK_DSSM_HPP
#define SSMSHRINK_DSSM_HPP

#include <cstdint>
#include <vector>

#include "ssmshrink/layer_norm.hpp"
#include "ssmshrink/lqo.hpp"

namespace ssmshrink
{

struct DssmLayer
{
    LqoSystem system;
    LayerNormParams ln;
};

///
/// Stack of LQO layers, each followed by a real-part residual and LayerNorm:
///
///   z^(i) = u^(i) + Re(y^(i)),   u^(i+1) = LN_i(z^(i)).
///
/// All layers share the feature width m (= input and output dimension of
/// every LQO system); state dimensions may differ per layer.
///
class DeepSsm
{
public:
    explicit DeepSsm(std::vector<DssmLayer> layers);

    const std::vector<DssmLayer>& layers() const noexcept { return layers_; }
    const DssmLayer& layer(std::size_t i) const { return layers_.at(i); }
    int depth() const noexcept { return static_cast<int>(layers_.size()); }
    int width() const noexcept { return layers_.front().system.input_dim(); }

    std::vector<LqoSystem> systems() const;

private:
    std::vector<DssmLayer> layers_;
};

struct ForwardTrace
{
    std::vector<RealSignal> inputs;     ///< u^(i), i = 1..xi
    std::vector<ComplexSignal> outputs; ///< y^(i)
    RealSignal output;                  ///< s_out = u^(xi+1)
};

ForwardTrace forward(const DeepSsm& model, const RealSignal& s_in, Horizon L);

struct SynthOptions
{
    int layers = 2;
    int state_dim = 8;
    int width = 4;
    int quad_rank = 1;
    std::uint64_t seed = 0;
    double ln_eps = 1e-5;
};

/// Random stable Deep SSM; deterministic per seed.
DeepSsm synth_random_dssm(const SynthOptions& opts);

/// Replaces every layer's system, keeping the LayerNorm parameters.
DeepSsm build_reduced_dssm(const DeepSsm& full, const std::vector<LqoSystem>& roms);

} // namespace ssmshrink

#endif // SSMSHRINK_DSSM_HPP
