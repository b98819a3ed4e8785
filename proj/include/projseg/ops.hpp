#pragma once

#include <vector>

#include "projseg/tensor.hpp"

namespace projseg {

// Every operation here is pure: outputs are freshly allocated, inputs are
// untouched, and accumulation order is fixed, so identical inputs give
// bitwise-identical results. Each forward has a closed-form backward taking
// the upstream gradient; backwards return gradients, they never mutate.

// ---- 3D ops (tensors are [l, w, h, c], channels last) ----

// same-padding stride-1 3D convolution; weights [kl,kw,kh,cin,cout] with odd
// kernel extents, bias [cout]
Tensor conv3d(const Tensor& input, const Tensor& weights, const Tensor& bias);

struct Conv3dGrads {
    Tensor dinput, dweights, dbias;
};
Conv3dGrads conv3d_backward(const Tensor& input, const Tensor& weights, const Tensor& upstream);

// max-pool along the height axis only, window = stride = k; k must divide h.
// Ties route the gradient to the lowest height index.
Tensor uni_pool_h(const Tensor& input, int stride);
Tensor uni_pool_h_backward(const Tensor& input, int stride, const Tensor& upstream);

// full-height 1x1xh convolution with stride h: collapses [l,w,h,cin] to
// [l,w,cout]; weights [1,1,h,cin,cout]
Tensor collapse_conv(const Tensor& input, const Tensor& weights, const Tensor& bias);

struct CollapseGrads {
    Tensor dinput, dweights, dbias;
};
CollapseGrads collapse_conv_backward(const Tensor& input, const Tensor& weights, const Tensor& upstream);

// linear resample along the height axis with endpoint alignment;
// new_h == 1 takes source index 0
Tensor resize_h_linear(const Tensor& input, int new_h);
Tensor resize_h_linear_backward(const Tensor& input, int new_h, const Tensor& upstream);

// ---- 2D ops (tensors are [l, w, c]) ----

// same-padding stride-1 2D convolution; weights [kl,kw,cin,cout], odd extents
Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias);

struct Conv2dGrads {
    Tensor dinput, dweights, dbias;
};
Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& weights, const Tensor& upstream);

// 2x2 max pool, stride 2; both plane extents must be even.
// Ties route the gradient to the lowest flattened window index.
Tensor pool2d(const Tensor& input);
Tensor pool2d_backward(const Tensor& input, const Tensor& upstream);

// 2x nearest-neighbour upsample
Tensor upsample2d(const Tensor& input);
Tensor upsample2d_backward(const Tensor& upstream);

// zero-pad the plane at the high ends to [new_l, new_w], and its inverse
Tensor pad2d(const Tensor& input, int new_l, int new_w);
Tensor crop2d(const Tensor& input, int new_l, int new_w);

// ---- elementwise / structural ----

Tensor relu(const Tensor& input);
// subgradient 0 at 0: gradient passes only where output > 0
Tensor relu_backward(const Tensor& output, const Tensor& upstream);

// concatenate along the last (channel) axis; leading extents must match
Tensor concat_channels(const std::vector<Tensor>& inputs);
std::vector<Tensor> concat_channels_backward(const std::vector<int>& channel_counts, const Tensor& upstream);

// ---- classification head ----

struct LabelMap {
    int rows = 0, cols = 0;
    std::vector<int> values;

    LabelMap() = default;
    LabelMap(int r, int c) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, 0) {}
    int at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
    int& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
};

// per-pixel softmax over the class axis (last axis of [l,w,K])
Tensor softmax(const Tensor& logits);

// mean per-pixel cross-entropy; labels must lie in [0, K)
double softmax_ce(const Tensor& logits, const LabelMap& labels);

// gradient w.r.t. logits: (softmax - onehot) / pixel count
Tensor softmax_ce_backward(const Tensor& logits, const LabelMap& labels);

}  // namespace projseg
