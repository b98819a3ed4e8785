#include "projseg/gradcheck.hpp"

#include <cmath>
#include <memory>

#include "projseg/adam.hpp"
#include "projseg/network.hpp"
#include "projseg/ops.hpp"
#include "projseg/rng.hpp"

namespace projseg {

double grad_check_max_rel_error(const GradCheckCase& c, double fd_eps) {
    std::vector<Tensor> analytic = c.grads(c.inputs);
    check(analytic.size() == c.inputs.size(), "grad case '", c.name, "' returned ", analytic.size(),
          " gradients for ", c.inputs.size(), " inputs");

    std::vector<Tensor> work = c.inputs;
    double worst = 0.0;
    for (std::size_t t = 0; t < work.size(); ++t) {
        check(analytic[t].same_shape(work[t]), "grad case '", c.name, "' gradient ", t, " shape mismatch");
        const std::int64_t n = work[t].size();
        for (std::int64_t i = 0; i < n; ++i) {
            const double saved = work[t][i];
            work[t][i] = saved + fd_eps;
            const double fp = c.value(work);
            work[t][i] = saved - fd_eps;
            const double fm = c.value(work);
            work[t][i] = saved;
            const double numeric = (fp - fm) / (2.0 * fd_eps);
            const double a = analytic[t][i];
            const double denom = std::max({1.0, std::abs(a), std::abs(numeric)});
            worst = std::max(worst, std::abs(a - numeric) / denom);
        }
    }
    return worst;
}

namespace {

Tensor random_tensor(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(shape));
    for (std::int64_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
    return t;
}

// values with pairwise gaps >= 0.01 everywhere: safe for max pools under
// central differences, and far from the relu kink after any sign flip
Tensor separated_tensor(Rng& rng, Shape shape) {
    Tensor t(std::move(shape));
    const std::int64_t n = t.size();
    std::vector<std::int64_t> order(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    for (std::int64_t i = n - 1; i > 0; --i) {
        const std::int64_t j = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(i + 1)));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }
    for (std::int64_t i = 0; i < n; ++i)
        t[order[static_cast<std::size_t>(i)]] = 0.013 * static_cast<double>(i + 1) + rng.uniform(0.0, 0.003);
    return t;
}

// fixed random projection so any op output becomes a scalar objective
Tensor coeffs_like(Rng& rng, const Shape& shape) { return random_tensor(rng, shape); }

LabelMap random_labels(Rng& rng, int rows, int cols, int num_classes) {
    LabelMap lm(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) lm.at(r, c) = rng.range(0, num_classes - 1);
    return lm;
}

double dot(const Tensor& a, const Tensor& b) {
    double s = 0.0;
    for (std::int64_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

std::vector<GradCheckCase> op_grad_cases(std::uint64_t seed) {
    std::vector<GradCheckCase> cases;
    Rng rng(seed);

    {  // conv3d: input, weights and bias
        Tensor in = random_tensor(rng, {4, 4, 4, 2});
        Tensor w = random_tensor(rng, {3, 3, 3, 2, 3});
        Tensor b = random_tensor(rng, {3});
        Tensor c = coeffs_like(rng, {4, 4, 4, 3});
        cases.push_back(
            {"conv3d",
             {in, w, b},
             [c](const std::vector<Tensor>& x) { return dot(conv3d(x[0], x[1], x[2]), c); },
             [c](const std::vector<Tensor>& x) {
                 Conv3dGrads g = conv3d_backward(x[0], x[1], c);
                 return std::vector<Tensor>{g.dinput, g.dweights, g.dbias};
             }});
    }
    {  // conv3d on a single-channel cube (the smallest interesting case)
        Tensor in = random_tensor(rng, {3, 3, 3, 1});
        Tensor w = random_tensor(rng, {3, 3, 3, 1, 1});
        Tensor b = random_tensor(rng, {1});
        Tensor c = coeffs_like(rng, {3, 3, 3, 1});
        cases.push_back(
            {"conv3d_small",
             {in, w, b},
             [c](const std::vector<Tensor>& x) { return dot(conv3d(x[0], x[1], x[2]), c); },
             [c](const std::vector<Tensor>& x) {
                 Conv3dGrads g = conv3d_backward(x[0], x[1], c);
                 return std::vector<Tensor>{g.dinput, g.dweights, g.dbias};
             }});
    }
    {  // uni_pool_h away from ties
        Tensor in = separated_tensor(rng, {3, 3, 8, 2});
        Tensor c = coeffs_like(rng, {3, 3, 4, 2});
        cases.push_back({"uni_pool_h",
                         {in},
                         [c](const std::vector<Tensor>& x) { return dot(uni_pool_h(x[0], 2), c); },
                         [c](const std::vector<Tensor>& x) {
                             return std::vector<Tensor>{uni_pool_h_backward(x[0], 2, c)};
                         }});
    }
    {  // collapse_conv
        Tensor in = random_tensor(rng, {3, 4, 5, 2});
        Tensor w = random_tensor(rng, {1, 1, 5, 2, 3});
        Tensor b = random_tensor(rng, {3});
        Tensor c = coeffs_like(rng, {3, 4, 3});
        cases.push_back(
            {"collapse_conv",
             {in, w, b},
             [c](const std::vector<Tensor>& x) { return dot(collapse_conv(x[0], x[1], x[2]), c); },
             [c](const std::vector<Tensor>& x) {
                 CollapseGrads g = collapse_conv_backward(x[0], x[1], c);
                 return std::vector<Tensor>{g.dinput, g.dweights, g.dbias};
             }});
    }
    {  // conv2d, 3x3
        Tensor in = random_tensor(rng, {5, 4, 2});
        Tensor w = random_tensor(rng, {3, 3, 2, 3});
        Tensor b = random_tensor(rng, {3});
        Tensor c = coeffs_like(rng, {5, 4, 3});
        cases.push_back(
            {"conv2d",
             {in, w, b},
             [c](const std::vector<Tensor>& x) { return dot(conv2d(x[0], x[1], x[2]), c); },
             [c](const std::vector<Tensor>& x) {
                 Conv2dGrads g = conv2d_backward(x[0], x[1], c);
                 return std::vector<Tensor>{g.dinput, g.dweights, g.dbias};
             }});
    }
    {  // conv2d, 1x1 (classifier head form)
        Tensor in = random_tensor(rng, {4, 4, 3});
        Tensor w = random_tensor(rng, {1, 1, 3, 2});
        Tensor b = random_tensor(rng, {2});
        Tensor c = coeffs_like(rng, {4, 4, 2});
        cases.push_back(
            {"conv2d_1x1",
             {in, w, b},
             [c](const std::vector<Tensor>& x) { return dot(conv2d(x[0], x[1], x[2]), c); },
             [c](const std::vector<Tensor>& x) {
                 Conv2dGrads g = conv2d_backward(x[0], x[1], c);
                 return std::vector<Tensor>{g.dinput, g.dweights, g.dbias};
             }});
    }
    {  // pool2d away from ties
        Tensor in = separated_tensor(rng, {6, 4, 2});
        Tensor c = coeffs_like(rng, {3, 2, 2});
        cases.push_back({"pool2d",
                         {in},
                         [c](const std::vector<Tensor>& x) { return dot(pool2d(x[0]), c); },
                         [c](const std::vector<Tensor>& x) {
                             return std::vector<Tensor>{pool2d_backward(x[0], c)};
                         }});
    }
    {  // upsample2d
        Tensor in = random_tensor(rng, {3, 3, 2});
        Tensor c = coeffs_like(rng, {6, 6, 2});
        cases.push_back({"upsample2d",
                         {in},
                         [c](const std::vector<Tensor>& x) { return dot(upsample2d(x[0]), c); },
                         [c](const std::vector<Tensor>& x) {
                             return std::vector<Tensor>{upsample2d_backward(c)};
                         }});
    }
    {  // relu away from the kink
        Tensor in = separated_tensor(rng, {4, 4, 2});
        for (std::int64_t i = 0; i < in.size(); ++i)
            if (i % 2 == 0) in[i] = -in[i];
        Tensor c = coeffs_like(rng, {4, 4, 2});
        cases.push_back({"relu",
                         {in},
                         [c](const std::vector<Tensor>& x) { return dot(relu(x[0]), c); },
                         [c](const std::vector<Tensor>& x) {
                             return std::vector<Tensor>{relu_backward(relu(x[0]), c)};
                         }});
    }
    {  // concat of two feature maps
        Tensor a = random_tensor(rng, {4, 3, 2});
        Tensor b = random_tensor(rng, {4, 3, 3});
        Tensor c = coeffs_like(rng, {4, 3, 5});
        cases.push_back({"concat",
                         {a, b},
                         [c](const std::vector<Tensor>& x) { return dot(concat_channels({x[0], x[1]}), c); },
                         [c](const std::vector<Tensor>& x) {
                             std::vector<Tensor> parts = concat_channels_backward({2, 3}, c);
                             return parts;
                         }});
    }
    {  // resize_h_linear, downsampling
        Tensor in = random_tensor(rng, {3, 3, 10, 2});
        Tensor c = coeffs_like(rng, {3, 3, 4, 2});
        cases.push_back({"resize_h_linear",
                         {in},
                         [c](const std::vector<Tensor>& x) { return dot(resize_h_linear(x[0], 4), c); },
                         [c](const std::vector<Tensor>& x) {
                             return std::vector<Tensor>{resize_h_linear_backward(x[0], 4, c)};
                         }});
    }
    {  // softmax cross-entropy
        Tensor logits = random_tensor(rng, {4, 4, 3});
        LabelMap labels = random_labels(rng, 4, 4, 3);
        cases.push_back({"softmax_ce",
                         {logits},
                         [labels](const std::vector<Tensor>& x) { return softmax_ce(x[0], labels); },
                         [labels](const std::vector<Tensor>& x) {
                             return std::vector<Tensor>{softmax_ce_backward(x[0], labels)};
                         }});
    }
    {  // pad and crop round the unet boundary handling
        Tensor in = random_tensor(rng, {3, 5, 2});
        Tensor c = coeffs_like(rng, {4, 8, 2});
        cases.push_back({"pad2d",
                         {in},
                         [c](const std::vector<Tensor>& x) { return dot(pad2d(x[0], 4, 8), c); },
                         [c](const std::vector<Tensor>& x) {
                             return std::vector<Tensor>{crop2d(c, 3, 5)};
                         }});
    }
    return cases;
}

std::vector<GradCheckCase> network_grad_cases(std::uint64_t seed) {
    std::vector<GradCheckCase> cases;
    Rng rng(seed);

    IpnConfig cfg;
    cfg.plm_channels = {2, 2, 2};
    cfg.plm_strides = {2, 4, 5};  // h = 40
    cfg.convs_per_plm = 1;
    cfg.num_classes = 2;
    cfg.input_channels = 2;
    cfg.skip_channels = 2;
    PlanePerceptronConfig pcfg;
    pcfg.unet_depth = 2;
    pcfg.base_channels = 2;
    pcfg.penultimate_channels = 3;

    {  // IPN end to end: loss gradient w.r.t. the patch and the first conv weights
        auto net = std::make_shared<PatchNet>(cfg, pcfg, false);
        init_params(net->params(), seed + 1);
        Tensor patch = random_tensor(rng, {8, 8, 40, 2});
        LabelMap labels = random_labels(rng, 8, 8, 2);
        Param* w0 = net->params().find("plm0.conv0.weight");
        cases.push_back({"ipn_end_to_end",
                         {patch, w0->value},
                         [net, labels, w0](const std::vector<Tensor>& x) {
                             w0->value = x[1];
                             return softmax_ce(net->forward(x[0]).logits, labels);
                         },
                         [net, labels, w0](const std::vector<Tensor>& x) {
                             w0->value = x[1];
                             net->zero_grads();
                             PatchNet::Acts acts = net->forward(x[0]);
                             Tensor dpatch = net->backward(acts, softmax_ce_backward(acts.logits, labels));
                             return std::vector<Tensor>{dpatch, w0->grad};
                         }});
    }
    {  // IPN-V2 end to end, including skip collapse and plane perceptron
        auto net = std::make_shared<PatchNet>(cfg, pcfg, true);
        init_params(net->params(), seed + 2);
        Tensor patch = random_tensor(rng, {8, 8, 40, 2});
        LabelMap labels = random_labels(rng, 8, 8, 2);
        Param* w0 = net->params().find("plm0.conv0.weight");
        cases.push_back({"ipnv2_end_to_end",
                         {patch, w0->value},
                         [net, labels, w0](const std::vector<Tensor>& x) {
                             w0->value = x[1];
                             return softmax_ce(net->forward(x[0]).logits, labels);
                         },
                         [net, labels, w0](const std::vector<Tensor>& x) {
                             w0->value = x[1];
                             net->zero_grads();
                             PatchNet::Acts acts = net->forward(x[0]);
                             Tensor dpatch = net->backward(acts, softmax_ce_backward(acts.logits, labels));
                             return std::vector<Tensor>{dpatch, w0->grad};
                         }});
    }
    {  // global net on a toy spliced feature map (16x16x4), odd crop via 18x14
        GlobalNetConfig gcfg;
        gcfg.unet_depth = 2;
        gcfg.base_channels = 2;
        auto net = std::make_shared<GlobalNet>(gcfg, 4, 2);
        init_params(net->params(), seed + 3);
        Tensor feat = random_tensor(rng, {16, 16, 4});
        LabelMap labels = random_labels(rng, 16, 16, 2);
        Param* w0 = net->params().find("global.unet.enc0.a.weight");
        cases.push_back({"global_end_to_end",
                         {feat, w0->value},
                         [net, labels, w0](const std::vector<Tensor>& x) {
                             w0->value = x[1];
                             return softmax_ce(net->forward(x[0]).logits, labels);
                         },
                         [net, labels, w0](const std::vector<Tensor>& x) {
                             w0->value = x[1];
                             net->zero_grads();
                             GlobalNet::Acts acts = net->forward(x[0]);
                             Tensor dfeat = net->backward(acts, softmax_ce_backward(acts.logits, labels));
                             return std::vector<Tensor>{dfeat, w0->grad};
                         }});
    }
    {  // global net with pad-and-crop active (extents not divisible by 2^depth)
        GlobalNetConfig gcfg;
        gcfg.unet_depth = 2;
        gcfg.base_channels = 2;
        auto net = std::make_shared<GlobalNet>(gcfg, 3, 2);
        init_params(net->params(), seed + 4);
        Tensor feat = random_tensor(rng, {11, 13, 3});
        LabelMap labels = random_labels(rng, 11, 13, 2);
        cases.push_back({"global_pad_crop",
                         {feat},
                         [net, labels](const std::vector<Tensor>& x) {
                             return softmax_ce(net->forward(x[0]).logits, labels);
                         },
                         [net, labels](const std::vector<Tensor>& x) {
                             net->zero_grads();
                             GlobalNet::Acts acts = net->forward(x[0]);
                             Tensor dfeat = net->backward(acts, softmax_ce_backward(acts.logits, labels));
                             return std::vector<Tensor>{dfeat};
                         }});
    }
    return cases;
}

}  // namespace projseg
