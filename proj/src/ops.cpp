#include "projseg/ops.hpp"

#include <algorithm>
#include <cmath>

namespace projseg {

namespace {

void check_rank(const Tensor& t, int rank, const char* what) {
    check(t.rank() == rank, what, " must have rank ", rank, ", got shape ", shape_str(t.shape()));
}

}  // namespace

// ---------------------------------------------------------------- conv3d

static void check_conv3d_shapes(const Tensor& input, const Tensor& weights, const Tensor* bias) {
    check_rank(input, 4, "conv3d input");
    check_rank(weights, 5, "conv3d weights");
    for (int a = 0; a < 3; ++a)
        check(weights.dim(a) % 2 == 1, "conv3d kernel extents must be odd, got ", shape_str(weights.shape()));
    check(input.dim(3) == weights.dim(3), "conv3d channel mismatch: input shape ", shape_str(input.shape()),
          " has ", input.dim(3), " channels but weights ", shape_str(weights.shape()), " expect ", weights.dim(3));
    if (bias) {
        check_rank(*bias, 1, "conv3d bias");
        check(bias->dim(0) == weights.dim(4), "conv3d bias extent ", bias->dim(0), " != cout ", weights.dim(4));
    }
}

Tensor conv3d(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    check_conv3d_shapes(input, weights, &bias);
    const int L = input.dim(0), W = input.dim(1), H = input.dim(2), Ci = input.dim(3);
    const int KL = weights.dim(0), KW = weights.dim(1), KH = weights.dim(2), Co = weights.dim(4);
    const int pl = KL / 2, pw = KW / 2, ph = KH / 2;

    Tensor out({L, W, H, Co});
    const double* in = input.data();
    const double* w = weights.data();
    double* o = out.data();

    for (int x = 0; x < L; ++x) {
        for (int y = 0; y < W; ++y) {
            for (int z = 0; z < H; ++z) {
                double* op = o + ((static_cast<std::int64_t>(x) * W + y) * H + z) * Co;
                for (int co = 0; co < Co; ++co) op[co] = bias[co];
                for (int kx = 0; kx < KL; ++kx) {
                    const int sx = x + kx - pl;
                    if (sx < 0 || sx >= L) continue;
                    for (int ky = 0; ky < KW; ++ky) {
                        const int sy = y + ky - pw;
                        if (sy < 0 || sy >= W) continue;
                        for (int kz = 0; kz < KH; ++kz) {
                            const int sz = z + kz - ph;
                            if (sz < 0 || sz >= H) continue;
                            const double* ip = in + ((static_cast<std::int64_t>(sx) * W + sy) * H + sz) * Ci;
                            const double* wp = w + ((static_cast<std::int64_t>(kx) * KW + ky) * KH + kz) * Ci * Co;
                            for (int ci = 0; ci < Ci; ++ci) {
                                const double v = ip[ci];
                                const double* wr = wp + static_cast<std::int64_t>(ci) * Co;
                                for (int co = 0; co < Co; ++co) op[co] += v * wr[co];
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

Conv3dGrads conv3d_backward(const Tensor& input, const Tensor& weights, const Tensor& upstream) {
    check_conv3d_shapes(input, weights, nullptr);
    const int L = input.dim(0), W = input.dim(1), H = input.dim(2), Ci = input.dim(3);
    const int KL = weights.dim(0), KW = weights.dim(1), KH = weights.dim(2), Co = weights.dim(4);
    const int pl = KL / 2, pw = KW / 2, ph = KH / 2;
    check(upstream.shape() == Shape({L, W, H, Co}), "conv3d upstream shape ", shape_str(upstream.shape()),
          " != ", shape_str(Shape({L, W, H, Co})));

    Conv3dGrads g{Tensor(input.shape()), Tensor(weights.shape()), Tensor({Co})};
    const double* in = input.data();
    const double* w = weights.data();
    const double* up = upstream.data();
    double* din = g.dinput.data();
    double* dw = g.dweights.data();
    double* db = g.dbias.data();

    for (int x = 0; x < L; ++x) {
        for (int y = 0; y < W; ++y) {
            for (int z = 0; z < H; ++z) {
                const double* upp = up + ((static_cast<std::int64_t>(x) * W + y) * H + z) * Co;
                for (int co = 0; co < Co; ++co) db[co] += upp[co];
                for (int kx = 0; kx < KL; ++kx) {
                    const int sx = x + kx - pl;
                    if (sx < 0 || sx >= L) continue;
                    for (int ky = 0; ky < KW; ++ky) {
                        const int sy = y + ky - pw;
                        if (sy < 0 || sy >= W) continue;
                        for (int kz = 0; kz < KH; ++kz) {
                            const int sz = z + kz - ph;
                            if (sz < 0 || sz >= H) continue;
                            const std::int64_t in_off = ((static_cast<std::int64_t>(sx) * W + sy) * H + sz) * Ci;
                            const std::int64_t w_off = ((static_cast<std::int64_t>(kx) * KW + ky) * KH + kz) * Ci * Co;
                            for (int ci = 0; ci < Ci; ++ci) {
                                const double v = in[in_off + ci];
                                const double* wr = w + w_off + static_cast<std::int64_t>(ci) * Co;
                                double* dwr = dw + w_off + static_cast<std::int64_t>(ci) * Co;
                                double acc = 0.0;
                                for (int co = 0; co < Co; ++co) {
                                    acc += wr[co] * upp[co];
                                    dwr[co] += v * upp[co];
                                }
                                din[in_off + ci] += acc;
                            }
                        }
                    }
                }
            }
        }
    }
    return g;
}

// ------------------------------------------------------------ uni_pool_h

Tensor uni_pool_h(const Tensor& input, int stride) {
    check_rank(input, 4, "uni_pool_h input");
    const int L = input.dim(0), W = input.dim(1), H = input.dim(2), C = input.dim(3);
    check(stride >= 1, "uni_pool_h stride must be >= 1, got ", stride);
    check(H % stride == 0, "uni_pool_h stride ", stride, " does not divide height ", H);
    const int Ho = H / stride;

    Tensor out({L, W, Ho, C});
    const double* in = input.data();
    double* o = out.data();
    for (int x = 0; x < L; ++x)
        for (int y = 0; y < W; ++y)
            for (int j = 0; j < Ho; ++j) {
                double* op = o + ((static_cast<std::int64_t>(x) * W + y) * Ho + j) * C;
                const double* ip = in + ((static_cast<std::int64_t>(x) * W + y) * H + static_cast<std::int64_t>(j) * stride) * C;
                for (int c = 0; c < C; ++c) op[c] = ip[c];
                for (int s = 1; s < stride; ++s) {
                    const double* sp = ip + static_cast<std::int64_t>(s) * C;
                    for (int c = 0; c < C; ++c)
                        if (sp[c] > op[c]) op[c] = sp[c];
                }
            }
    return out;
}

Tensor uni_pool_h_backward(const Tensor& input, int stride, const Tensor& upstream) {
    const int L = input.dim(0), W = input.dim(1), H = input.dim(2), C = input.dim(3);
    const int Ho = H / stride;
    check(upstream.shape() == Shape({L, W, Ho, C}), "uni_pool_h upstream shape ",
          shape_str(upstream.shape()), " != ", shape_str(Shape({L, W, Ho, C})));

    Tensor din(input.shape());
    const double* in = input.data();
    const double* up = upstream.data();
    double* d = din.data();
    for (int x = 0; x < L; ++x)
        for (int y = 0; y < W; ++y)
            for (int j = 0; j < Ho; ++j) {
                const double* upp = up + ((static_cast<std::int64_t>(x) * W + y) * Ho + j) * C;
                const std::int64_t base = ((static_cast<std::int64_t>(x) * W + y) * H + static_cast<std::int64_t>(j) * stride) * C;
                for (int c = 0; c < C; ++c) {
                    int arg = 0;
                    double best = in[base + c];
                    for (int s = 1; s < stride; ++s) {
                        const double v = in[base + static_cast<std::int64_t>(s) * C + c];
                        if (v > best) {  // strict: first index wins ties
                            best = v;
                            arg = s;
                        }
                    }
                    d[base + static_cast<std::int64_t>(arg) * C + c] += upp[c];
                }
            }
    return din;
}

// --------------------------------------------------------- collapse_conv

static void check_collapse_shapes(const Tensor& input, const Tensor& weights, const Tensor* bias) {
    check_rank(input, 4, "collapse_conv input");
    check_rank(weights, 5, "collapse_conv weights");
    check(weights.dim(0) == 1 && weights.dim(1) == 1, "collapse_conv weights must be [1,1,h,cin,cout], got ",
          shape_str(weights.shape()));
    check(weights.dim(2) == input.dim(2), "collapse_conv kernel height ", weights.dim(2),
          " != input height ", input.dim(2));
    check(weights.dim(3) == input.dim(3), "collapse_conv channel mismatch: input ", shape_str(input.shape()),
          " vs weights ", shape_str(weights.shape()));
    if (bias) {
        check_rank(*bias, 1, "collapse_conv bias");
        check(bias->dim(0) == weights.dim(4), "collapse_conv bias extent ", bias->dim(0), " != cout ",
              weights.dim(4));
    }
}

Tensor collapse_conv(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    check_collapse_shapes(input, weights, &bias);
    const int L = input.dim(0), W = input.dim(1), H = input.dim(2), Ci = input.dim(3);
    const int Co = weights.dim(4);

    Tensor out({L, W, Co});
    const double* in = input.data();
    const double* w = weights.data();
    double* o = out.data();
    const std::int64_t taps = static_cast<std::int64_t>(H) * Ci;
    for (int x = 0; x < L; ++x)
        for (int y = 0; y < W; ++y) {
            double* op = o + (static_cast<std::int64_t>(x) * W + y) * Co;
            for (int co = 0; co < Co; ++co) op[co] = bias[co];
            const double* ip = in + (static_cast<std::int64_t>(x) * W + y) * taps;
            for (std::int64_t t = 0; t < taps; ++t) {
                const double v = ip[t];
                const double* wr = w + t * Co;
                for (int co = 0; co < Co; ++co) op[co] += v * wr[co];
            }
        }
    return out;
}

CollapseGrads collapse_conv_backward(const Tensor& input, const Tensor& weights, const Tensor& upstream) {
    check_collapse_shapes(input, weights, nullptr);
    const int L = input.dim(0), W = input.dim(1), H = input.dim(2), Ci = input.dim(3);
    const int Co = weights.dim(4);
    check(upstream.shape() == Shape({L, W, Co}), "collapse_conv upstream shape ", shape_str(upstream.shape()),
          " != ", shape_str(Shape({L, W, Co})));

    CollapseGrads g{Tensor(input.shape()), Tensor(weights.shape()), Tensor({Co})};
    const double* in = input.data();
    const double* w = weights.data();
    const double* up = upstream.data();
    double* din = g.dinput.data();
    double* dw = g.dweights.data();
    double* db = g.dbias.data();
    const std::int64_t taps = static_cast<std::int64_t>(H) * Ci;
    for (int x = 0; x < L; ++x)
        for (int y = 0; y < W; ++y) {
            const double* upp = up + (static_cast<std::int64_t>(x) * W + y) * Co;
            for (int co = 0; co < Co; ++co) db[co] += upp[co];
            const double* ip = in + (static_cast<std::int64_t>(x) * W + y) * taps;
            double* dip = din + (static_cast<std::int64_t>(x) * W + y) * taps;
            for (std::int64_t t = 0; t < taps; ++t) {
                const double v = ip[t];
                const double* wr = w + t * Co;
                double* dwr = dw + t * Co;
                double acc = 0.0;
                for (int co = 0; co < Co; ++co) {
                    acc += wr[co] * upp[co];
                    dwr[co] += v * upp[co];
                }
                dip[t] += acc;
            }
        }
    return g;
}

// ------------------------------------------------------- resize_h_linear

Tensor resize_h_linear(const Tensor& input, int new_h) {
    check_rank(input, 4, "resize_h_linear input");
    check(new_h >= 1, "resize_h_linear new_h must be >= 1, got ", new_h);
    const int L = input.dim(0), W = input.dim(1), H = input.dim(2), C = input.dim(3);

    // endpoint-aligned source coordinate and weights per output sample
    std::vector<int> lo(static_cast<std::size_t>(new_h));
    std::vector<double> frac(static_cast<std::size_t>(new_h));
    for (int j = 0; j < new_h; ++j) {
        double s = (new_h == 1) ? 0.0
                                : static_cast<double>(j) * static_cast<double>(H - 1) / static_cast<double>(new_h - 1);
        int i = static_cast<int>(s);
        if (i > H - 2) i = H - 2;
        if (H == 1) i = 0;
        lo[static_cast<std::size_t>(j)] = i;
        frac[static_cast<std::size_t>(j)] = (H == 1) ? 0.0 : s - i;
    }

    Tensor out({L, W, new_h, C});
    const double* in = input.data();
    double* o = out.data();
    for (int x = 0; x < L; ++x)
        for (int y = 0; y < W; ++y) {
            const double* col = in + (static_cast<std::int64_t>(x) * W + y) * H * C;
            double* oc = o + (static_cast<std::int64_t>(x) * W + y) * new_h * C;
            for (int j = 0; j < new_h; ++j) {
                const int i = lo[static_cast<std::size_t>(j)];
                const double f = frac[static_cast<std::size_t>(j)];
                const double* a = col + static_cast<std::int64_t>(i) * C;
                const double* b = (H == 1) ? a : a + C;
                double* op = oc + static_cast<std::int64_t>(j) * C;
                for (int c = 0; c < C; ++c) op[c] = (1.0 - f) * a[c] + f * b[c];
            }
        }
    return out;
}

Tensor resize_h_linear_backward(const Tensor& input, int new_h, const Tensor& upstream) {
    const int L = input.dim(0), W = input.dim(1), H = input.dim(2), C = input.dim(3);
    check(upstream.shape() == Shape({L, W, new_h, C}), "resize_h_linear upstream shape ",
          shape_str(upstream.shape()), " != ", shape_str(Shape({L, W, new_h, C})));

    Tensor din(input.shape());
    const double* up = upstream.data();
    double* d = din.data();
    for (int x = 0; x < L; ++x)
        for (int y = 0; y < W; ++y) {
            double* col = d + (static_cast<std::int64_t>(x) * W + y) * H * C;
            const double* uc = up + (static_cast<std::int64_t>(x) * W + y) * new_h * C;
            for (int j = 0; j < new_h; ++j) {
                double s = (new_h == 1) ? 0.0
                                        : static_cast<double>(j) * static_cast<double>(H - 1) /
                                              static_cast<double>(new_h - 1);
                int i = static_cast<int>(s);
                if (i > H - 2) i = H - 2;
                if (H == 1) i = 0;
                const double f = (H == 1) ? 0.0 : s - i;
                const double* upp = uc + static_cast<std::int64_t>(j) * C;
                double* a = col + static_cast<std::int64_t>(i) * C;
                double* b = (H == 1) ? a : a + C;
                for (int c = 0; c < C; ++c) {
                    a[c] += (1.0 - f) * upp[c];
                    if (H > 1) b[c] += f * upp[c];
                }
            }
        }
    return din;
}

// ----------------------------------------------------------------- conv2d

static void check_conv2d_shapes(const Tensor& input, const Tensor& weights, const Tensor* bias) {
    check_rank(input, 3, "conv2d input");
    check_rank(weights, 4, "conv2d weights");
    for (int a = 0; a < 2; ++a)
        check(weights.dim(a) % 2 == 1, "conv2d kernel extents must be odd, got ", shape_str(weights.shape()));
    check(input.dim(2) == weights.dim(2), "conv2d channel mismatch: input shape ", shape_str(input.shape()),
          " has ", input.dim(2), " channels but weights ", shape_str(weights.shape()), " expect ", weights.dim(2));
    if (bias) {
        check_rank(*bias, 1, "conv2d bias");
        check(bias->dim(0) == weights.dim(3), "conv2d bias extent ", bias->dim(0), " != cout ", weights.dim(3));
    }
}

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    check_conv2d_shapes(input, weights, &bias);
    const int L = input.dim(0), W = input.dim(1), Ci = input.dim(2);
    const int KL = weights.dim(0), KW = weights.dim(1), Co = weights.dim(3);
    const int pl = KL / 2, pw = KW / 2;

    Tensor out({L, W, Co});
    const double* in = input.data();
    const double* w = weights.data();
    double* o = out.data();
    for (int x = 0; x < L; ++x)
        for (int y = 0; y < W; ++y) {
            double* op = o + (static_cast<std::int64_t>(x) * W + y) * Co;
            for (int co = 0; co < Co; ++co) op[co] = bias[co];
            for (int kx = 0; kx < KL; ++kx) {
                const int sx = x + kx - pl;
                if (sx < 0 || sx >= L) continue;
                for (int ky = 0; ky < KW; ++ky) {
                    const int sy = y + ky - pw;
                    if (sy < 0 || sy >= W) continue;
                    const double* ip = in + (static_cast<std::int64_t>(sx) * W + sy) * Ci;
                    const double* wp = w + (static_cast<std::int64_t>(kx) * KW + ky) * Ci * Co;
                    for (int ci = 0; ci < Ci; ++ci) {
                        const double v = ip[ci];
                        const double* wr = wp + static_cast<std::int64_t>(ci) * Co;
                        for (int co = 0; co < Co; ++co) op[co] += v * wr[co];
                    }
                }
            }
        }
    return out;
}

Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& weights, const Tensor& upstream) {
    check_conv2d_shapes(input, weights, nullptr);
    const int L = input.dim(0), W = input.dim(1), Ci = input.dim(2);
    const int KL = weights.dim(0), KW = weights.dim(1), Co = weights.dim(3);
    const int pl = KL / 2, pw = KW / 2;
    check(upstream.shape() == Shape({L, W, Co}), "conv2d upstream shape ", shape_str(upstream.shape()),
          " != ", shape_str(Shape({L, W, Co})));

    Conv2dGrads g{Tensor(input.shape()), Tensor(weights.shape()), Tensor({Co})};
    const double* in = input.data();
    const double* w = weights.data();
    const double* up = upstream.data();
    double* din = g.dinput.data();
    double* dw = g.dweights.data();
    double* db = g.dbias.data();
    for (int x = 0; x < L; ++x)
        for (int y = 0; y < W; ++y) {
            const double* upp = up + (static_cast<std::int64_t>(x) * W + y) * Co;
            for (int co = 0; co < Co; ++co) db[co] += upp[co];
            for (int kx = 0; kx < KL; ++kx) {
                const int sx = x + kx - pl;
                if (sx < 0 || sx >= L) continue;
                for (int ky = 0; ky < KW; ++ky) {
                    const int sy = y + ky - pw;
                    if (sy < 0 || sy >= W) continue;
                    const std::int64_t in_off = (static_cast<std::int64_t>(sx) * W + sy) * Ci;
                    const std::int64_t w_off = (static_cast<std::int64_t>(kx) * KW + ky) * Ci * Co;
                    for (int ci = 0; ci < Ci; ++ci) {
                        const double v = in[in_off + ci];
                        const double* wr = w + w_off + static_cast<std::int64_t>(ci) * Co;
                        double* dwr = dw + w_off + static_cast<std::int64_t>(ci) * Co;
                        double acc = 0.0;
                        for (int co = 0; co < Co; ++co) {
                            acc += wr[co] * upp[co];
                            dwr[co] += v * upp[co];
                        }
                        din[in_off + ci] += acc;
                    }
                }
            }
        }
    return g;
}

// ----------------------------------------------------------------- pool2d

Tensor pool2d(const Tensor& input) {
    check_rank(input, 3, "pool2d input");
    const int L = input.dim(0), W = input.dim(1), C = input.dim(2);
    check(L % 2 == 0 && W % 2 == 0, "pool2d requires even plane extents, got ", shape_str(input.shape()));
    const int Lo = L / 2, Wo = W / 2;

    Tensor out({Lo, Wo, C});
    const double* in = input.data();
    double* o = out.data();
    for (int x = 0; x < Lo; ++x)
        for (int y = 0; y < Wo; ++y) {
            double* op = o + (static_cast<std::int64_t>(x) * Wo + y) * C;
            for (int c = 0; c < C; ++c) {
                double best = in[((static_cast<std::int64_t>(2 * x) * W) + 2 * y) * C + c];
                for (int dx = 0; dx < 2; ++dx)
                    for (int dy = 0; dy < 2; ++dy) {
                        const double v = in[((static_cast<std::int64_t>(2 * x + dx) * W) + 2 * y + dy) * C + c];
                        if (v > best) best = v;
                    }
                op[c] = best;
            }
        }
    return out;
}

Tensor pool2d_backward(const Tensor& input, const Tensor& upstream) {
    const int L = input.dim(0), W = input.dim(1), C = input.dim(2);
    const int Lo = L / 2, Wo = W / 2;
    check(upstream.shape() == Shape({Lo, Wo, C}), "pool2d upstream shape ", shape_str(upstream.shape()),
          " != ", shape_str(Shape({Lo, Wo, C})));

    Tensor din(input.shape());
    const double* in = input.data();
    const double* up = upstream.data();
    double* d = din.data();
    for (int x = 0; x < Lo; ++x)
        for (int y = 0; y < Wo; ++y)
            for (int c = 0; c < C; ++c) {
                int ax = 0, ay = 0;
                double best = in[((static_cast<std::int64_t>(2 * x) * W) + 2 * y) * C + c];
                for (int dx = 0; dx < 2; ++dx)
                    for (int dy = 0; dy < 2; ++dy) {
                        const double v = in[((static_cast<std::int64_t>(2 * x + dx) * W) + 2 * y + dy) * C + c];
                        if (v > best) {
                            best = v;
                            ax = dx;
                            ay = dy;
                        }
                    }
                d[((static_cast<std::int64_t>(2 * x + ax) * W) + 2 * y + ay) * C + c] +=
                    up[(static_cast<std::int64_t>(x) * Wo + y) * C + c];
            }
    return din;
}

// ------------------------------------------------------------- upsample2d

Tensor upsample2d(const Tensor& input) {
    check_rank(input, 3, "upsample2d input");
    const int L = input.dim(0), W = input.dim(1), C = input.dim(2);
    Tensor out({2 * L, 2 * W, C});
    const double* in = input.data();
    double* o = out.data();
    for (int x = 0; x < 2 * L; ++x)
        for (int y = 0; y < 2 * W; ++y) {
            const double* ip = in + (static_cast<std::int64_t>(x / 2) * W + y / 2) * C;
            double* op = o + (static_cast<std::int64_t>(x) * 2 * W + y) * C;
            for (int c = 0; c < C; ++c) op[c] = ip[c];
        }
    return out;
}

Tensor upsample2d_backward(const Tensor& upstream) {
    check_rank(upstream, 3, "upsample2d upstream");
    const int Lu = upstream.dim(0), Wu = upstream.dim(1), C = upstream.dim(2);
    check(Lu % 2 == 0 && Wu % 2 == 0, "upsample2d upstream extents must be even, got ",
          shape_str(upstream.shape()));
    const int L = Lu / 2, W = Wu / 2;
    Tensor din({L, W, C});
    const double* up = upstream.data();
    double* d = din.data();
    for (int x = 0; x < Lu; ++x)
        for (int y = 0; y < Wu; ++y) {
            const double* upp = up + (static_cast<std::int64_t>(x) * Wu + y) * C;
            double* dp = d + (static_cast<std::int64_t>(x / 2) * W + y / 2) * C;
            for (int c = 0; c < C; ++c) dp[c] += upp[c];
        }
    return din;
}

// ------------------------------------------------------------ pad2d/crop2d

Tensor pad2d(const Tensor& input, int new_l, int new_w) {
    check_rank(input, 3, "pad2d input");
    const int L = input.dim(0), W = input.dim(1), C = input.dim(2);
    check(new_l >= L && new_w >= W, "pad2d target ", new_l, "x", new_w, " smaller than input ",
          shape_str(input.shape()));
    Tensor out({new_l, new_w, C});
    for (int x = 0; x < L; ++x) {
        const double* ip = input.data() + static_cast<std::int64_t>(x) * W * C;
        double* op = out.data() + static_cast<std::int64_t>(x) * new_w * C;
        std::copy(ip, ip + static_cast<std::int64_t>(W) * C, op);
    }
    return out;
}

Tensor crop2d(const Tensor& input, int new_l, int new_w) {
    check_rank(input, 3, "crop2d input");
    const int L = input.dim(0), W = input.dim(1), C = input.dim(2);
    check(new_l <= L && new_w <= W, "crop2d target ", new_l, "x", new_w, " larger than input ",
          shape_str(input.shape()));
    Tensor out({new_l, new_w, C});
    for (int x = 0; x < new_l; ++x) {
        const double* ip = input.data() + static_cast<std::int64_t>(x) * W * C;
        double* op = out.data() + static_cast<std::int64_t>(x) * new_w * C;
        std::copy(ip, ip + static_cast<std::int64_t>(new_w) * C, op);
    }
    return out;
}

// ------------------------------------------------------------------- relu

Tensor relu(const Tensor& input) {
    Tensor out(input.shape());
    const double* in = input.data();
    double* o = out.data();
    const std::int64_t n = input.size();
    for (std::int64_t i = 0; i < n; ++i) o[i] = in[i] > 0.0 ? in[i] : 0.0;
    return out;
}

Tensor relu_backward(const Tensor& output, const Tensor& upstream) {
    check(output.same_shape(upstream), "relu upstream shape ", shape_str(upstream.shape()), " != output shape ",
          shape_str(output.shape()));
    Tensor din(output.shape());
    const double* o = output.data();
    const double* up = upstream.data();
    double* d = din.data();
    const std::int64_t n = output.size();
    for (std::int64_t i = 0; i < n; ++i) d[i] = o[i] > 0.0 ? up[i] : 0.0;
    return din;
}

// ------------------------------------------------------------------ concat

Tensor concat_channels(const std::vector<Tensor>& inputs) {
    check(!inputs.empty(), "concat_channels needs at least one input");
    const Shape& first = inputs[0].shape();
    int total_c = 0;
    for (const Tensor& t : inputs) {
        check(t.rank() == inputs[0].rank(), "concat_channels rank mismatch: ", shape_str(t.shape()), " vs ",
              shape_str(first));
        for (int a = 0; a + 1 < t.rank(); ++a)
            check(t.dim(a) == inputs[0].dim(a), "concat_channels spatial mismatch: ", shape_str(t.shape()),
                  " vs ", shape_str(first));
        total_c += t.dim(t.rank() - 1);
    }
    Shape out_shape = first;
    out_shape.back() = total_c;
    Tensor out(out_shape);

    std::int64_t rows = 1;
    for (int a = 0; a + 1 < inputs[0].rank(); ++a) rows *= inputs[0].dim(a);
    double* o = out.data();
    for (std::int64_t r = 0; r < rows; ++r) {
        double* op = o + r * total_c;
        for (const Tensor& t : inputs) {
            const int c = t.dim(t.rank() - 1);
            const double* ip = t.data() + r * c;
            std::copy(ip, ip + c, op);
            op += c;
        }
    }
    return out;
}

std::vector<Tensor> concat_channels_backward(const std::vector<int>& channel_counts, const Tensor& upstream) {
    int total_c = 0;
    for (int c : channel_counts) total_c += c;
    check(upstream.dim(upstream.rank() - 1) == total_c, "concat upstream channels ",
          upstream.dim(upstream.rank() - 1), " != sum of parts ", total_c);

    std::vector<Tensor> grads;
    grads.reserve(channel_counts.size());
    Shape part_shape = upstream.shape();
    std::int64_t rows = 1;
    for (int a = 0; a + 1 < upstream.rank(); ++a) rows *= upstream.dim(a);
    int offset = 0;
    for (int c : channel_counts) {
        part_shape.back() = c;
        Tensor g(part_shape);
        for (std::int64_t r = 0; r < rows; ++r) {
            const double* up = upstream.data() + r * total_c + offset;
            std::copy(up, up + c, g.data() + r * c);
        }
        offset += c;
        grads.push_back(std::move(g));
    }
    return grads;
}

// ------------------------------------------------------------ softmax / CE

Tensor softmax(const Tensor& logits) {
    check_rank(logits, 3, "softmax logits");
    const int L = logits.dim(0), W = logits.dim(1), K = logits.dim(2);
    Tensor out(logits.shape());
    const double* in = logits.data();
    double* o = out.data();
    for (std::int64_t p = 0; p < static_cast<std::int64_t>(L) * W; ++p) {
        const double* lp = in + p * K;
        double* op = o + p * K;
        double m = lp[0];
        for (int k = 1; k < K; ++k) m = std::max(m, lp[k]);
        double sum = 0.0;
        for (int k = 0; k < K; ++k) {
            op[k] = std::exp(lp[k] - m);
            sum += op[k];
        }
        for (int k = 0; k < K; ++k) op[k] /= sum;
    }
    return out;
}

static void check_labels(const Tensor& logits, const LabelMap& labels) {
    const int L = logits.dim(0), W = logits.dim(1), K = logits.dim(2);
    check(K >= 2, "softmax_ce needs K >= 2 classes, got ", K);
    check(labels.rows == L && labels.cols == W, "label map ", labels.rows, "x", labels.cols,
          " does not match logits ", shape_str(logits.shape()));
    for (int x = 0; x < L; ++x)
        for (int y = 0; y < W; ++y) {
            const int v = labels.at(x, y);
            check(v >= 0 && v < K, "label ", v, " out of range [0,", K, ") at pixel (", x, ",", y, ")");
        }
}

double softmax_ce(const Tensor& logits, const LabelMap& labels) {
    check_rank(logits, 3, "softmax_ce logits");
    check_labels(logits, labels);
    const int L = logits.dim(0), W = logits.dim(1), K = logits.dim(2);
    const double* in = logits.data();
    double loss = 0.0;
    for (int x = 0; x < L; ++x)
        for (int y = 0; y < W; ++y) {
            const double* lp = in + (static_cast<std::int64_t>(x) * W + y) * K;
            double m = lp[0];
            for (int k = 1; k < K; ++k) m = std::max(m, lp[k]);
            double sum = 0.0;
            for (int k = 0; k < K; ++k) sum += std::exp(lp[k] - m);
            loss += std::log(sum) - (lp[labels.at(x, y)] - m);
        }
    return loss / (static_cast<double>(L) * W);
}

Tensor softmax_ce_backward(const Tensor& logits, const LabelMap& labels) {
    check_rank(logits, 3, "softmax_ce logits");
    check_labels(logits, labels);
    const int L = logits.dim(0), W = logits.dim(1), K = logits.dim(2);
    Tensor g = softmax(logits);
    const double inv_n = 1.0 / (static_cast<double>(L) * W);
    double* gp = g.data();
    for (int x = 0; x < L; ++x)
        for (int y = 0; y < W; ++y) {
            double* p = gp + (static_cast<std::int64_t>(x) * W + y) * K;
            p[labels.at(x, y)] -= 1.0;
            for (int k = 0; k < K; ++k) p[k] *= inv_n;
        }
    return g;
}

}  // namespace projseg
