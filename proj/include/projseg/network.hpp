#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "projseg/ops.hpp"
#include "projseg/tensor.hpp"

namespace projseg {

enum class Variant { Ipn, IpnV2, IpnV2Plus };

Variant variant_from_string(const std::string& s);
std::string to_string(Variant v);

// Configuration of the 3D trunk: a chain of projection learning modules,
// each convs_per_plm x (conv3d + relu) followed by a height-only max pool.
struct IpnConfig {
    std::vector<int> plm_channels{16, 32, 64, 128};
    std::vector<int> plm_strides{2, 4, 4, 5};
    int convs_per_plm = 2;
    int num_classes = 2;
    int input_channels = 2;
    int skip_channels = 16;  // output channels of the full-height collapse on the first module

    int patch_height() const;  // product of plm_strides
    void validate() const;
};

struct PlanePerceptronConfig {
    int unet_depth = 3;
    int base_channels = 32;
    int penultimate_channels = 16;

    void validate() const;
};

struct GlobalNetConfig {
    int unet_depth = 2;
    int base_channels = 16;

    void validate() const;
};

// Ordered, named view over the trainable tensors of a network. The order is
// the construction order and defines the checkpoint layout.
struct NamedParam {
    std::string name;
    Param* param;
};

class ModelParams {
public:
    void add(std::string name, Param* p) { items_.push_back({std::move(name), p}); }
    std::size_t count() const { return items_.size(); }
    const NamedParam& item(std::size_t i) const { return items_[i]; }
    Param* find(const std::string& name) const;
    std::vector<std::string> names() const;
    void zero_grads() const;
    std::int64_t total_size() const;

private:
    std::vector<NamedParam> items_;
};

// He-style fan-in-scaled normal weights, zero biases; deterministic per seed.
void init_params(const ModelParams& params, std::uint64_t seed);

// ---- layers ----

struct Conv3dLayer {
    Param w, b;
    Conv3dLayer(int kl, int kw, int kh, int cin, int cout)
        : w(Tensor({kl, kw, kh, cin, cout})), b(Tensor({cout})) {}
};

struct Conv2dLayer {
    Param w, b;
    Conv2dLayer(int kl, int kw, int cin, int cout) : w(Tensor({kl, kw, cin, cout})), b(Tensor({cout})) {}
};

struct CollapseLayer {
    Param w, b;
    CollapseLayer(int h, int cin, int cout) : w(Tensor({1, 1, h, cin, cout})), b(Tensor({cout})) {}
};

// conv + relu twice
struct DoubleConv2d {
    Conv2dLayer a, b;
    DoubleConv2d(int cin, int cout) : a(3, 3, cin, cout), b(3, 3, cout, cout) {}

    struct Acts {
        Tensor in_a;  // conv a input
        Tensor ra;    // post relu a (conv b input)
        Tensor rb;    // post relu b (output)
    };
    Acts forward(const Tensor& x) const;
    Tensor backward(const Acts& acts, const Tensor& dout);  // accumulates grads, returns dinput
    void collect(ModelParams& out, const std::string& prefix);
};

// Standard symmetric U-shape: depth encoder levels with 2x max pools,
// a bottleneck, and nearest-neighbour upsampling with skip concatenation.
// Plane extents must be divisible by 2^depth.
class UNet2d {
public:
    UNet2d(int depth, int in_channels, int base_channels);

    struct Acts {
        std::vector<DoubleConv2d::Acts> enc;
        std::vector<Tensor> pooled;
        DoubleConv2d::Acts bottom;
        std::vector<Tensor> ups;   // per dec level
        std::vector<Tensor> cats;  // per dec level
        std::vector<DoubleConv2d::Acts> dec;
        const Tensor& output() const { return dec.front().rb; }
    };
    Acts forward(const Tensor& x) const;
    Tensor backward(const Acts& acts, const Tensor& dout);
    void collect(ModelParams& out, const std::string& prefix);

    int depth() const { return depth_; }
    int in_channels() const { return in_channels_; }
    int out_channels() const { return base_channels_; }

private:
    int depth_, in_channels_, base_channels_;
    std::vector<DoubleConv2d> enc_;
    DoubleConv2d bottom_;
    std::vector<DoubleConv2d> dec_;
};

// The 3D-to-2D patch network: the projection-learning trunk alone (IPN), or
// the trunk plus full-height skip collapse and plane-perceptron U-Net (IPN-V2).
class PatchNet {
public:
    PatchNet(IpnConfig cfg, PlanePerceptronConfig pcfg, bool with_perceptron);

    struct PlmActs {
        std::vector<Tensor> conv_in;
        std::vector<Tensor> relu_out;
        Tensor pool_out;
    };
    struct Acts {
        std::vector<PlmActs> plms;
        Tensor trunk2d;
        Tensor skip_src;  // first-module output as seen by the collapse (probe included)
        Tensor skip2d;
        Tensor concat2d;
        UNet2d::Acts unet;
        Tensor penultimate;  // input of the final 1x1 classifier
        Tensor logits;
    };

    // skip_probe, when given, is added to the skip path's view of the first
    // module output only; the trunk continues from the unperturbed tensor.
    Acts forward(const Tensor& patch, const Tensor* skip_probe = nullptr) const;
    Tensor backward(const Acts& acts, const Tensor& dlogits);

    ModelParams params();
    void zero_grads();

    bool with_perceptron() const { return v2_; }
    const IpnConfig& config() const { return cfg_; }
    const PlanePerceptronConfig& perceptron_config() const { return pcfg_; }
    int penultimate_channels() const;

private:
    IpnConfig cfg_;
    PlanePerceptronConfig pcfg_;
    bool v2_;
    std::vector<std::vector<Conv3dLayer>> plm_convs_;
    std::optional<CollapseLayer> skip_;
    std::optional<UNet2d> unet_;
    std::optional<Conv2dLayer> penult_conv_;
    Conv2dLayer classifier_;
};

// The global retraining network: a U-shape over spliced penultimate feature
// maps. Arbitrary plane extents are zero-padded up to the next multiple of
// 2^depth and the output cropped back.
class GlobalNet {
public:
    GlobalNet(GlobalNetConfig cfg, int in_channels, int num_classes);

    struct Acts {
        int orig_l = 0, orig_w = 0;
        Tensor padded;
        UNet2d::Acts unet;
        Tensor cropped;
        Tensor logits;
    };
    Acts forward(const Tensor& features) const;
    Tensor backward(const Acts& acts, const Tensor& dlogits);

    ModelParams params();
    void zero_grads();

    int in_channels() const { return in_channels_; }
    int num_classes() const { return num_classes_; }

private:
    GlobalNetConfig cfg_;
    int in_channels_, num_classes_;
    UNet2d unet_;
    Conv2dLayer classifier_;
};

// ---- spec-level entry points ----

Tensor ipn_forward(const PatchNet& net, const Tensor& patch);
// returns (logits, penultimate feature map)
std::pair<Tensor, Tensor> ipnv2_forward(const PatchNet& net, const Tensor& patch);
Tensor global_forward(const GlobalNet& net, const Tensor& features);

// Normalized Euclidean distance to the en-face centre: 0 at the centre,
// 1 at the corners.
Tensor build_distance_map(int L, int W);

}  // namespace projseg
