#include "projseg/network.hpp"

#include <cmath>

#include "projseg/rng.hpp"

namespace projseg {

Variant variant_from_string(const std::string& s) {
    if (s == "ipn") return Variant::Ipn;
    if (s == "ipnv2") return Variant::IpnV2;
    if (s == "ipnv2plus") return Variant::IpnV2Plus;
    fail("unknown variant '", s, "' (expected ipn, ipnv2 or ipnv2plus)");
}

std::string to_string(Variant v) {
    switch (v) {
        case Variant::Ipn: return "ipn";
        case Variant::IpnV2: return "ipnv2";
        case Variant::IpnV2Plus: return "ipnv2plus";
    }
    return "?";
}

int IpnConfig::patch_height() const {
    int h = 1;
    for (int s : plm_strides) h *= s;
    return h;
}

void IpnConfig::validate() const {
    check(!plm_channels.empty(), "ipn config needs at least one module");
    check(plm_channels.size() == plm_strides.size(), "ipn config: ", plm_channels.size(), " channel counts vs ",
          plm_strides.size(), " strides");
    for (int c : plm_channels) check(c >= 1, "ipn channel counts must be >= 1");
    for (int s : plm_strides) check(s >= 1, "ipn strides must be >= 1");
    check(convs_per_plm >= 1, "convs_per_plm must be >= 1");
    check(num_classes >= 2, "num_classes must be >= 2");
    check(input_channels >= 1, "input_channels must be >= 1");
    check(skip_channels >= 1, "skip_channels must be >= 1");
}

void PlanePerceptronConfig::validate() const {
    check(unet_depth >= 1, "plane perceptron depth must be >= 1");
    check(base_channels >= 1 && penultimate_channels >= 1, "plane perceptron channels must be >= 1");
}

void GlobalNetConfig::validate() const {
    check(unet_depth >= 1, "global net depth must be >= 1");
    check(base_channels >= 1, "global net base channels must be >= 1");
}

Param* ModelParams::find(const std::string& name) const {
    for (const NamedParam& np : items_)
        if (np.name == name) return np.param;
    return nullptr;
}

std::vector<std::string> ModelParams::names() const {
    std::vector<std::string> out;
    out.reserve(items_.size());
    for (const NamedParam& np : items_) out.push_back(np.name);
    return out;
}

void ModelParams::zero_grads() const {
    for (const NamedParam& np : items_) np.param->zero_grad();
}

std::int64_t ModelParams::total_size() const {
    std::int64_t n = 0;
    for (const NamedParam& np : items_) n += np.param->value.size();
    return n;
}

void init_params(const ModelParams& params, std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t i = 0; i < params.count(); ++i) {
        Param& p = *params.item(i).param;
        if (p.value.rank() == 1) {
            p.value.fill(0.0);  // biases
            continue;
        }
        std::int64_t fan_in = 1;
        for (int a = 0; a + 1 < p.value.rank(); ++a) fan_in *= p.value.dim(a);
        const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
        double* v = p.value.data();
        const std::int64_t n = p.value.size();
        for (std::int64_t j = 0; j < n; ++j) v[j] = rng.normal(0.0, sd);
    }
}

// ------------------------------------------------------------ DoubleConv2d

DoubleConv2d::Acts DoubleConv2d::forward(const Tensor& x) const {
    Acts acts;
    acts.in_a = x;
    acts.ra = relu(conv2d(x, a.w.value, a.b.value));
    acts.rb = relu(conv2d(acts.ra, b.w.value, b.b.value));
    return acts;
}

Tensor DoubleConv2d::backward(const Acts& acts, const Tensor& dout) {
    Tensor d = relu_backward(acts.rb, dout);
    Conv2dGrads gb = conv2d_backward(acts.ra, b.w.value, d);
    accumulate(b.w.grad, gb.dweights);
    accumulate(b.b.grad, gb.dbias);
    d = relu_backward(acts.ra, gb.dinput);
    Conv2dGrads ga = conv2d_backward(acts.in_a, a.w.value, d);
    accumulate(a.w.grad, ga.dweights);
    accumulate(a.b.grad, ga.dbias);
    return std::move(ga.dinput);
}

void DoubleConv2d::collect(ModelParams& out, const std::string& prefix) {
    out.add(prefix + ".a.weight", &a.w);
    out.add(prefix + ".a.bias", &a.b);
    out.add(prefix + ".b.weight", &b.w);
    out.add(prefix + ".b.bias", &b.b);
}

// ----------------------------------------------------------------- UNet2d

UNet2d::UNet2d(int depth, int in_channels, int base_channels)
    : depth_(depth), in_channels_(in_channels), base_channels_(base_channels), bottom_(1, 1) {
    check(depth >= 1, "unet depth must be >= 1");
    int ch = in_channels;
    for (int i = 0; i < depth; ++i) {
        const int ci = base_channels << i;
        enc_.emplace_back(ch, ci);
        ch = ci;
    }
    bottom_ = DoubleConv2d(ch, base_channels << depth);
    for (int i = 0; i < depth; ++i) {
        const int ci = base_channels << i;
        const int from_below = base_channels << (i + 1);
        dec_.emplace_back(from_below + ci, ci);
    }
}

UNet2d::Acts UNet2d::forward(const Tensor& x) const {
    const int L = x.dim(0), W = x.dim(1);
    const int mult = 1 << depth_;
    check(L % mult == 0 && W % mult == 0, "unet input plane ", L, "x", W, " not divisible by 2^depth = ", mult);
    check(x.dim(2) == in_channels_, "unet input channels ", x.dim(2), " != expected ", in_channels_);

    Acts acts;
    Tensor cur = x;
    for (int i = 0; i < depth_; ++i) {
        acts.enc.push_back(enc_[static_cast<std::size_t>(i)].forward(cur));
        acts.pooled.push_back(pool2d(acts.enc.back().rb));
        cur = acts.pooled.back();
    }
    acts.bottom = bottom_.forward(cur);
    cur = acts.bottom.rb;
    acts.ups.resize(static_cast<std::size_t>(depth_));
    acts.cats.resize(static_cast<std::size_t>(depth_));
    acts.dec.resize(static_cast<std::size_t>(depth_));
    for (int i = depth_ - 1; i >= 0; --i) {
        const auto ui = static_cast<std::size_t>(i);
        acts.ups[ui] = upsample2d(cur);
        acts.cats[ui] = concat_channels({acts.ups[ui], acts.enc[ui].rb});
        acts.dec[ui] = dec_[ui].forward(acts.cats[ui]);
        cur = acts.dec[ui].rb;
    }
    return acts;
}

Tensor UNet2d::backward(const Acts& acts, const Tensor& dout) {
    std::vector<Tensor> skip_grads(static_cast<std::size_t>(depth_));
    Tensor d = dout;
    for (int i = 0; i < depth_; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        d = dec_[ui].backward(acts.dec[ui], d);
        const int up_c = acts.ups[ui].dim(2);
        const int skip_c = acts.enc[ui].rb.dim(2);
        std::vector<Tensor> parts = concat_channels_backward({up_c, skip_c}, d);
        skip_grads[ui] = std::move(parts[1]);
        d = upsample2d_backward(parts[0]);
    }
    d = bottom_.backward(acts.bottom, d);
    for (int i = depth_ - 1; i >= 0; --i) {
        const auto ui = static_cast<std::size_t>(i);
        d = pool2d_backward(acts.enc[ui].rb, d);
        accumulate(d, skip_grads[ui]);
        d = enc_[ui].backward(acts.enc[ui], d);
    }
    return d;
}

void UNet2d::collect(ModelParams& out, const std::string& prefix) {
    for (int i = 0; i < depth_; ++i) enc_[static_cast<std::size_t>(i)].collect(out, prefix + ".enc" + std::to_string(i));
    bottom_.collect(out, prefix + ".bottom");
    for (int i = 0; i < depth_; ++i) dec_[static_cast<std::size_t>(i)].collect(out, prefix + ".dec" + std::to_string(i));
}

// --------------------------------------------------------------- PatchNet

PatchNet::PatchNet(IpnConfig cfg, PlanePerceptronConfig pcfg, bool with_perceptron)
    : cfg_(std::move(cfg)), pcfg_(pcfg), v2_(with_perceptron), classifier_(1, 1, 1, 1) {
    cfg_.validate();
    if (v2_) pcfg_.validate();

    const int modules = static_cast<int>(cfg_.plm_channels.size());
    int ch = cfg_.input_channels;
    for (int m = 0; m < modules; ++m) {
        std::vector<Conv3dLayer> convs;
        const int cm = cfg_.plm_channels[static_cast<std::size_t>(m)];
        for (int j = 0; j < cfg_.convs_per_plm; ++j) {
            convs.emplace_back(3, 3, 3, j == 0 ? ch : cm, cm);
        }
        ch = cm;
        plm_convs_.push_back(std::move(convs));
    }
    const int trunk_c = cfg_.plm_channels.back();
    if (v2_) {
        const int h1 = cfg_.patch_height() / cfg_.plm_strides.front();
        skip_.emplace(h1, cfg_.plm_channels.front(), cfg_.skip_channels);
        unet_.emplace(pcfg_.unet_depth, trunk_c + cfg_.skip_channels, pcfg_.base_channels);
        penult_conv_.emplace(3, 3, pcfg_.base_channels, pcfg_.penultimate_channels);
        classifier_ = Conv2dLayer(1, 1, pcfg_.penultimate_channels, cfg_.num_classes);
    } else {
        classifier_ = Conv2dLayer(1, 1, trunk_c, cfg_.num_classes);
    }
}

int PatchNet::penultimate_channels() const {
    return v2_ ? pcfg_.penultimate_channels : cfg_.plm_channels.back();
}

PatchNet::Acts PatchNet::forward(const Tensor& patch, const Tensor* skip_probe) const {
    check(patch.rank() == 4, "patch must be [l,w,h,c], got ", shape_str(patch.shape()));
    const int l = patch.dim(0), w = patch.dim(1), h = patch.dim(2);
    check(h == cfg_.patch_height(), "patch height ", h, " incompatible with stride product ",
          cfg_.patch_height());
    check(patch.dim(3) == cfg_.input_channels, "patch channels ", patch.dim(3), " != configured input_channels ",
          cfg_.input_channels);
    if (v2_) {
        const int mult = 1 << pcfg_.unet_depth;
        check(l % mult == 0 && w % mult == 0, "patch plane ", l, "x", w,
              " must be divisible by 2^unet_depth = ", mult);
    }

    Acts acts;
    Tensor cur = patch;
    for (std::size_t m = 0; m < plm_convs_.size(); ++m) {
        PlmActs pa;
        for (const Conv3dLayer& conv : plm_convs_[m]) {
            pa.conv_in.push_back(cur);
            cur = relu(conv3d(cur, conv.w.value, conv.b.value));
            pa.relu_out.push_back(cur);
        }
        cur = uni_pool_h(cur, cfg_.plm_strides[m]);
        pa.pool_out = cur;
        acts.plms.push_back(std::move(pa));
    }
    acts.trunk2d = cur.reshaped({l, w, cfg_.plm_channels.back()});

    if (v2_) {
        acts.skip_src = acts.plms.front().pool_out;
        if (skip_probe) {
            check(skip_probe->same_shape(acts.skip_src), "skip probe shape ", shape_str(skip_probe->shape()),
                  " != first module output ", shape_str(acts.skip_src.shape()));
            accumulate(acts.skip_src, *skip_probe);
        }
        acts.skip2d = collapse_conv(acts.skip_src, skip_->w.value, skip_->b.value);
        acts.concat2d = concat_channels({acts.trunk2d, acts.skip2d});
        acts.unet = unet_->forward(acts.concat2d);
        acts.penultimate = relu(conv2d(acts.unet.output(), penult_conv_->w.value, penult_conv_->b.value));
    } else {
        acts.penultimate = acts.trunk2d;
    }
    acts.logits = conv2d(acts.penultimate, classifier_.w.value, classifier_.b.value);
    return acts;
}

Tensor PatchNet::backward(const Acts& acts, const Tensor& dlogits) {
    Conv2dGrads gc = conv2d_backward(acts.penultimate, classifier_.w.value, dlogits);
    accumulate(classifier_.w.grad, gc.dweights);
    accumulate(classifier_.b.grad, gc.dbias);

    Tensor dtrunk2d;
    Tensor dskip_src;
    if (v2_) {
        Tensor d = relu_backward(acts.penultimate, gc.dinput);
        Conv2dGrads gp = conv2d_backward(acts.unet.output(), penult_conv_->w.value, d);
        accumulate(penult_conv_->w.grad, gp.dweights);
        accumulate(penult_conv_->b.grad, gp.dbias);
        d = unet_->backward(acts.unet, gp.dinput);
        std::vector<Tensor> parts =
            concat_channels_backward({cfg_.plm_channels.back(), cfg_.skip_channels}, d);
        dtrunk2d = std::move(parts[0]);
        CollapseGrads gs = collapse_conv_backward(acts.skip_src, skip_->w.value, parts[1]);
        accumulate(skip_->w.grad, gs.dweights);
        accumulate(skip_->b.grad, gs.dbias);
        dskip_src = std::move(gs.dinput);
    } else {
        dtrunk2d = std::move(gc.dinput);
    }

    const int l = acts.trunk2d.dim(0), w = acts.trunk2d.dim(1);
    Tensor d = dtrunk2d.reshaped({l, w, 1, cfg_.plm_channels.back()});
    for (int m = static_cast<int>(plm_convs_.size()) - 1; m >= 0; --m) {
        const auto um = static_cast<std::size_t>(m);
        if (m == 0 && v2_) accumulate(d, dskip_src);
        d = uni_pool_h_backward(acts.plms[um].relu_out.back(), cfg_.plm_strides[um], d);
        for (int j = cfg_.convs_per_plm - 1; j >= 0; --j) {
            const auto uj = static_cast<std::size_t>(j);
            d = relu_backward(acts.plms[um].relu_out[uj], d);
            Conv3dLayer& conv = plm_convs_[um][uj];
            Conv3dGrads g = conv3d_backward(acts.plms[um].conv_in[uj], conv.w.value, d);
            accumulate(conv.w.grad, g.dweights);
            accumulate(conv.b.grad, g.dbias);
            d = std::move(g.dinput);
        }
    }
    return d;
}

ModelParams PatchNet::params() {
    ModelParams out;
    for (std::size_t m = 0; m < plm_convs_.size(); ++m)
        for (std::size_t j = 0; j < plm_convs_[m].size(); ++j) {
            const std::string p = "plm" + std::to_string(m) + ".conv" + std::to_string(j);
            out.add(p + ".weight", &plm_convs_[m][j].w);
            out.add(p + ".bias", &plm_convs_[m][j].b);
        }
    if (v2_) {
        out.add("skip.weight", &skip_->w);
        out.add("skip.bias", &skip_->b);
        unet_->collect(out, "pp.unet");
        out.add("pp.penult.weight", &penult_conv_->w);
        out.add("pp.penult.bias", &penult_conv_->b);
    }
    out.add("classifier.weight", &classifier_.w);
    out.add("classifier.bias", &classifier_.b);
    return out;
}

void PatchNet::zero_grads() { params().zero_grads(); }

// --------------------------------------------------------------- GlobalNet

GlobalNet::GlobalNet(GlobalNetConfig cfg, int in_channels, int num_classes)
    : cfg_(cfg),
      in_channels_(in_channels),
      num_classes_(num_classes),
      unet_(cfg.unet_depth, in_channels, cfg.base_channels),
      classifier_(1, 1, cfg.base_channels, num_classes) {
    cfg_.validate();
    check(in_channels >= 1, "global net input channels must be >= 1");
    check(num_classes >= 2, "global net needs >= 2 classes");
}

static int next_multiple(int v, int m) { return ((v + m - 1) / m) * m; }

GlobalNet::Acts GlobalNet::forward(const Tensor& features) const {
    check(features.rank() == 3, "global net input must be [L,W,c], got ", shape_str(features.shape()));
    check(features.dim(2) == in_channels_, "global net channel mismatch: input has ", features.dim(2),
          " channels, configured for ", in_channels_);

    Acts acts;
    acts.orig_l = features.dim(0);
    acts.orig_w = features.dim(1);
    const int mult = 1 << cfg_.unet_depth;
    acts.padded = pad2d(features, next_multiple(acts.orig_l, mult), next_multiple(acts.orig_w, mult));
    acts.unet = unet_.forward(acts.padded);
    acts.cropped = crop2d(acts.unet.output(), acts.orig_l, acts.orig_w);
    acts.logits = conv2d(acts.cropped, classifier_.w.value, classifier_.b.value);
    return acts;
}

Tensor GlobalNet::backward(const Acts& acts, const Tensor& dlogits) {
    Conv2dGrads gc = conv2d_backward(acts.cropped, classifier_.w.value, dlogits);
    accumulate(classifier_.w.grad, gc.dweights);
    accumulate(classifier_.b.grad, gc.dbias);
    Tensor d = pad2d(gc.dinput, acts.padded.dim(0), acts.padded.dim(1));
    d = unet_.backward(acts.unet, d);
    return crop2d(d, acts.orig_l, acts.orig_w);
}

ModelParams GlobalNet::params() {
    ModelParams out;
    unet_.collect(out, "global.unet");
    out.add("global.classifier.weight", &classifier_.w);
    out.add("global.classifier.bias", &classifier_.b);
    return out;
}

void GlobalNet::zero_grads() { params().zero_grads(); }

// ------------------------------------------------------------ entry points

Tensor ipn_forward(const PatchNet& net, const Tensor& patch) { return net.forward(patch).logits; }

std::pair<Tensor, Tensor> ipnv2_forward(const PatchNet& net, const Tensor& patch) {
    check(net.with_perceptron(), "ipnv2_forward needs a network built with the plane perceptron");
    PatchNet::Acts acts = net.forward(patch);
    return {acts.logits, acts.penultimate};
}

Tensor global_forward(const GlobalNet& net, const Tensor& features) { return net.forward(features).logits; }

Tensor build_distance_map(int L, int W) {
    check(L >= 1 && W >= 1, "distance map extents must be >= 1");
    Tensor out({L, W});
    const double cx = (L - 1) / 2.0, cy = (W - 1) / 2.0;
    double corner = std::sqrt(cx * cx + cy * cy);
    if (corner == 0.0) corner = 1.0;  // 1x1 plane
    for (int x = 0; x < L; ++x)
        for (int y = 0; y < W; ++y) {
            const double dx = x - cx, dy = y - cy;
            out.at(x, y) = std::sqrt(dx * dx + dy * dy) / corner;
        }
    return out;
}

}  // namespace projseg
