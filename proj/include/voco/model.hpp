#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "voco/archive.hpp"
#include "voco/geometry.hpp"
#include "voco/tensor.hpp"

namespace voco {

// Strided 3D conv encoder (3x3x3, stride 2, pad 1, tanh per stage),
// adaptive average pooling, and a linear projector ending in width C.
struct EncoderConfig {
    std::vector<int> channels_per_stage{8, 16, 32};
    std::vector<int> projector_dims{64, 64}; // widths, last entry is C
    Shape3 input_shape{16, 16, 16};
    std::uint64_t seed = 0;

    int num_stages() const { return static_cast<int>(channels_per_stage.size()); }
    int pooled_dim() const { return channels_per_stage.back(); }
    int feature_dim() const { return projector_dims.back(); } // C

    void validate() const;
    nlohmann::json to_json() const;
    static EncoderConfig from_json(const nlohmann::json& j);
};

struct Param {
    std::string name;
    Tensor value;
    Tensor grad;
};

// Stored activations of one forward pass, consumed by backward().
struct Trace {
    std::vector<Tensor> acts;                 // acts[0] input, acts[i] stage-i output (post-tanh)
    std::vector<double> z;                    // pooled features (pre-projection)
    std::vector<std::vector<double>> hidden;  // projector activations per layer (post-tanh except last)
};

struct Embedding {
    std::vector<double> z; // pooled backbone features
    std::vector<double> q; // projected features
};

struct BasisSet {
    std::vector<std::vector<double>> z;
    std::vector<std::vector<double>> q;
};

class Model {
public:
    explicit Model(EncoderConfig cfg);

    const EncoderConfig& config() const { return cfg_; }

    // Forward pieces. encode() expects a [1, X, Y, Z] tensor matching
    // config().input_shape and returns the last feature map.
    Tensor encode(const Tensor& input, Trace* tr = nullptr) const;
    std::vector<double> pool(const Tensor& fmap) const;
    std::vector<double> project(const std::vector<double>& z, Trace* tr = nullptr) const;

    // encode -> pool -> project on one shared parameter set.
    Embedding embed(const Volume& v, Trace* tr = nullptr) const;
    BasisSet embed_bases(const std::vector<Volume>& base_volumes,
                         std::vector<Trace>* traces = nullptr) const;

    // Accumulates dL/dq through the whole stack into parameter grads.
    void backward(const Trace& tr, const std::vector<double>& dq);

    void zero_grad();
    std::vector<Param>& params() { return params_; }
    const std::vector<Param>& params() const { return params_; }

    static Tensor volume_to_tensor(const Volume& v);

    void add_to_archive(Archive& a) const;
    static Model from_archive(const Archive& a);

private:
    struct ConvRef { int w, b; int in_ch, out_ch; };
    struct LinRef { int w, b; int in_dim, out_dim; };

    EncoderConfig cfg_;
    std::vector<Param> params_;
    std::vector<ConvRef> convs_;
    std::vector<LinRef> lins_;

    void build_params();
    void init_params();

    Tensor conv_forward(const ConvRef& c, const Tensor& in) const;
    void conv_backward(const ConvRef& c, const Tensor& in, const Tensor& gout,
                       Tensor* gin, Tensor& gw, Tensor& gb) const;

public:
    // Exposed for gradient-check tests on a single layer.
    Tensor debug_conv_forward(int stage, const Tensor& in) const { return conv_forward(convs_[stage], in); }
    void debug_conv_backward(int stage, const Tensor& in, const Tensor& gout,
                             Tensor* gin, Tensor& gw, Tensor& gb) const {
        conv_backward(convs_[stage], in, gout, gin, gw, gb);
    }
};

// Spatial output size of one stride-2 pad-1 kernel-3 stage.
inline int conv_out_dim(int in) { return (in - 1) / 2 + 1; }

} // namespace voco
