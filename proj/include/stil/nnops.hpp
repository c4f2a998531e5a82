#pragma once

#include <utility>

#include "stil/rng.hpp"
#include "stil/tensor.hpp"

namespace stil::nnops {

struct Pad2 {
    int h = 0;
    int w = 0;
};

/// Same-shape padding for an odd kernel.
inline Pad2 same_pad(int kh, int kw) { return {(kh - 1) / 2, (kw - 1) / 2}; }

/// 2D convolution weights (C_out, C_in, k_h, k_w) plus a per-output-channel
/// bias. Kernel extents must be odd (1x1, 1x3, 3x1, 3x3 are the ones in use).
struct ConvKernel {
    Tensor weights;
    Tensor bias;

    static ConvKernel zeros(int c_out, int c_in, int kh, int kw);
    /// Weights uniform in +-sqrt(1/(C_in*k_h*k_w)), bias zero.
    static ConvKernel init(int c_out, int c_in, int kh, int kw, Rng& rng);
    void validate() const;
};

/// Length-3 kernel slid over the channel axis of (N, C) descriptors.
struct Conv1dKernel {
    Tensor weights; // (3)
    Tensor bias;    // (1)

    static Conv1dKernel zeros();
    static Conv1dKernel init(Rng& rng);
    /// Center tap 1, bias 0: conv1d_channels becomes the identity.
    static Conv1dKernel identity();
    void validate() const;
};

/// Cross-correlation (no kernel flip), zero padding, bias added per output
/// channel. x: (N, C_in, H, W) -> (N, C_out, H', W') with
/// H' = (H + 2*pad.h - k_h)/stride + 1 and likewise W'.
Tensor conv2d(const Tensor& x, const Tensor& weights, const Tensor& bias, Pad2 pad,
              int stride = 1);
inline Tensor conv2d(const Tensor& x, const ConvKernel& k, Pad2 pad, int stride = 1) {
    return conv2d(x, k.weights, k.bias, pad, stride);
}

/// 2x2 mean pooling with stride 2; H and W must be even.
Tensor avg_pool_2x2(const Tensor& x);

/// Half-pixel-center bilinear upsampling to (2h, 2w): source coordinate
/// (dst+0.5)/2 - 0.5 clamped to [0, src-1].
Tensor upsample_bilinear_2x(const Tensor& x);

Tensor sigmoid(const Tensor& x);
Tensor relu(const Tensor& x);

/// Mean over H, W: (N, C, H, W) -> (N, C).
Tensor gap_spatial(const Tensor& x);

/// Slides the length-3 kernel over the channel axis, zero-padded one each
/// side: (N, C) -> (N, C).
Tensor conv1d_channels(const Tensor& v, const Tensor& weights, const Tensor& bias);
inline Tensor conv1d_channels(const Tensor& v, const Conv1dKernel& k) {
    return conv1d_channels(v, k.weights, k.bias);
}

Tensor slice_channels(const Tensor& x, int begin, int end);
std::pair<Tensor, Tensor> split_channels(const Tensor& x);
Tensor concat_channels(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);

/// Per-(sample, channel) gate: out[n,c,h,w] = x[n,c,h,w] * w[n,c].
Tensor scale_channels(const Tensor& x, const Tensor& w);

/// Adjacent-slice difference along `time_axis`:
/// out[t] = conv_out[t+1] - x[t] for t < T-1, out[T-1] = 0.
/// conv_out and x must share the same shape.
Tensor time_shift_diff(const Tensor& conv_out, const Tensor& x, int time_axis);

} // namespace stil::nnops
