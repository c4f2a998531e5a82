#include "stil/nnops.hpp"

#include <cmath>
#include <stdexcept>

namespace stil::nnops {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void require_rank4(const Tensor& x, const char* who) {
    if (x.rank() != 4) {
        throw std::invalid_argument(std::string(who) + " expects a rank-4 tensor, got " +
                                    shape_string(x.dims()));
    }
}

} // namespace

ConvKernel ConvKernel::zeros(int c_out, int c_in, int kh, int kw) {
    ConvKernel k{Tensor::zeros({c_out, c_in, kh, kw}), Tensor::zeros({c_out})};
    k.validate();
    return k;
}

ConvKernel ConvKernel::init(int c_out, int c_in, int kh, int kw, Rng& rng) {
    ConvKernel k = zeros(c_out, c_in, kh, kw);
    const double bound = std::sqrt(1.0 / (static_cast<double>(c_in) * kh * kw));
    for (std::int64_t i = 0; i < k.weights.size(); ++i) {
        k.weights.data()[i] = rng.uniform(-bound, bound);
    }
    return k;
}

void ConvKernel::validate() const {
    require(weights.rank() == 4, "conv kernel weights must be rank 4");
    require(weights.dim(2) % 2 == 1 && weights.dim(3) % 2 == 1,
            "conv kernel extents must be odd");
    require(bias.rank() == 1 && bias.dim(0) == weights.dim(0),
            "conv bias length must equal C_out");
}

Conv1dKernel Conv1dKernel::zeros() { return {Tensor::zeros({3}), Tensor::zeros({1})}; }

Conv1dKernel Conv1dKernel::init(Rng& rng) {
    Conv1dKernel k = zeros();
    const double bound = std::sqrt(1.0 / 3.0);
    for (int i = 0; i < 3; ++i) k.weights.at(i) = rng.uniform(-bound, bound);
    return k;
}

Conv1dKernel Conv1dKernel::identity() {
    Conv1dKernel k = zeros();
    k.weights.at(1) = 1.0;
    return k;
}

void Conv1dKernel::validate() const {
    require(weights.rank() == 1 && weights.dim(0) == 3, "conv1d kernel must have length 3");
    require(bias.rank() == 1 && bias.dim(0) == 1, "conv1d bias must be a scalar");
}

Tensor conv2d(const Tensor& x, const Tensor& weights, const Tensor& bias, Pad2 pad, int stride) {
    require_rank4(x, "conv2d");
    require_rank4(weights, "conv2d weights");
    const int n = x.dim(0), c_in = x.dim(1), h = x.dim(2), w = x.dim(3);
    const int c_out = weights.dim(0), kh = weights.dim(2), kw = weights.dim(3);
    if (weights.dim(1) != c_in) {
        throw std::invalid_argument("conv2d channel mismatch: input has " + std::to_string(c_in) +
                                    ", kernel expects " + std::to_string(weights.dim(1)));
    }
    require(bias.rank() == 1 && bias.dim(0) == c_out, "conv2d bias length must equal C_out");
    require(pad.h >= 0 && pad.w >= 0 && stride >= 1, "conv2d pad/stride out of range");
    const int ho = (h + 2 * pad.h - kh) / stride + 1;
    const int wo = (w + 2 * pad.w - kw) / stride + 1;
    if (h + 2 * pad.h < kh || w + 2 * pad.w < kw) {
        throw std::invalid_argument("conv2d kernel larger than padded input");
    }

    Tensor out = Tensor::zeros({n, c_out, ho, wo});
    const double* xp = x.data();
    const double* wp = weights.data();
    const double* bp = bias.data();
    double* op = out.data();

    const std::int64_t x_cs = static_cast<std::int64_t>(h) * w;
    const std::int64_t x_ns = x_cs * c_in;
    const std::int64_t w_cs = static_cast<std::int64_t>(kh) * kw;
    const std::int64_t w_os = w_cs * c_in;
    const std::int64_t o_cs = static_cast<std::int64_t>(ho) * wo;
    const std::int64_t o_ns = o_cs * c_out;

    for (int in = 0; in < n; ++in) {
        for (int oc = 0; oc < c_out; ++oc) {
            const double b = bp[oc];
            for (int oy = 0; oy < ho; ++oy) {
                const int iy0 = oy * stride - pad.h;
                for (int ox = 0; ox < wo; ++ox) {
                    const int ix0 = ox * stride - pad.w;
                    double acc = b;
                    for (int ic = 0; ic < c_in; ++ic) {
                        const double* xc = xp + in * x_ns + ic * x_cs;
                        const double* wc = wp + oc * w_os + ic * w_cs;
                        const int ky_lo = iy0 < 0 ? -iy0 : 0;
                        const int ky_hi = iy0 + kh > h ? h - iy0 : kh;
                        for (int ky = ky_lo; ky < ky_hi; ++ky) {
                            const double* xrow = xc + static_cast<std::int64_t>(iy0 + ky) * w;
                            const double* wrow = wc + static_cast<std::int64_t>(ky) * kw;
                            const int kx_lo = ix0 < 0 ? -ix0 : 0;
                            const int kx_hi = ix0 + kw > w ? w - ix0 : kw;
                            for (int kx = kx_lo; kx < kx_hi; ++kx) {
                                acc += xrow[ix0 + kx] * wrow[kx];
                            }
                        }
                    }
                    op[in * o_ns + oc * o_cs + static_cast<std::int64_t>(oy) * wo + ox] = acc;
                }
            }
        }
    }
    return out;
}

Tensor avg_pool_2x2(const Tensor& x) {
    require_rank4(x, "avg_pool_2x2");
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    if (h % 2 != 0 || w % 2 != 0) {
        throw std::invalid_argument("avg_pool_2x2 requires even spatial dims, got " +
                                    shape_string(x.dims()));
    }
    Tensor out = Tensor::zeros({n, c, h / 2, w / 2});
    const double* xp = x.data();
    double* op = out.data();
    const std::int64_t plane = static_cast<std::int64_t>(h) * w;
    const std::int64_t oplane = plane / 4;
    for (std::int64_t nc = 0; nc < static_cast<std::int64_t>(n) * c; ++nc) {
        const double* src = xp + nc * plane;
        double* dst = op + nc * oplane;
        for (int oy = 0; oy < h / 2; ++oy) {
            const double* r0 = src + static_cast<std::int64_t>(2 * oy) * w;
            const double* r1 = r0 + w;
            for (int ox = 0; ox < w / 2; ++ox) {
                dst[static_cast<std::int64_t>(oy) * (w / 2) + ox] =
                    0.25 * (r0[2 * ox] + r0[2 * ox + 1] + r1[2 * ox] + r1[2 * ox + 1]);
            }
        }
    }
    return out;
}

namespace {

// per-destination-index bilinear taps for one axis of a 2x upsample
struct Tap {
    int lo;
    int hi;
    double w_lo;
    double w_hi;
};

std::vector<Tap> upsample_taps(int src) {
    std::vector<Tap> taps(static_cast<std::size_t>(2 * src));
    for (int d = 0; d < 2 * src; ++d) {
        double coord = (d + 0.5) / 2.0 - 0.5;
        if (coord < 0) coord = 0;
        if (coord > src - 1) coord = src - 1;
        const int lo = static_cast<int>(coord);
        const int hi = lo + 1 < src ? lo + 1 : lo;
        const double f = coord - lo;
        taps[static_cast<std::size_t>(d)] = {lo, hi, 1.0 - f, f};
    }
    return taps;
}

} // namespace

Tensor upsample_bilinear_2x(const Tensor& x) {
    require_rank4(x, "upsample_bilinear_2x");
    const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
    const auto ty = upsample_taps(h);
    const auto tx = upsample_taps(w);
    Tensor out = Tensor::zeros({n, c, 2 * h, 2 * w});
    const double* xp = x.data();
    double* op = out.data();
    const std::int64_t plane = static_cast<std::int64_t>(h) * w;
    const std::int64_t oplane = plane * 4;
    for (std::int64_t nc = 0; nc < static_cast<std::int64_t>(n) * c; ++nc) {
        const double* src = xp + nc * plane;
        double* dst = op + nc * oplane;
        for (int oy = 0; oy < 2 * h; ++oy) {
            const Tap& a = ty[static_cast<std::size_t>(oy)];
            const double* r_lo = src + static_cast<std::int64_t>(a.lo) * w;
            const double* r_hi = src + static_cast<std::int64_t>(a.hi) * w;
            for (int ox = 0; ox < 2 * w; ++ox) {
                const Tap& b = tx[static_cast<std::size_t>(ox)];
                dst[static_cast<std::int64_t>(oy) * 2 * w + ox] =
                    a.w_lo * (b.w_lo * r_lo[b.lo] + b.w_hi * r_lo[b.hi]) +
                    a.w_hi * (b.w_lo * r_hi[b.lo] + b.w_hi * r_hi[b.hi]);
            }
        }
    }
    return out;
}

Tensor sigmoid(const Tensor& x) {
    Tensor out = x.to_f64();
    for (std::int64_t i = 0; i < out.size(); ++i) {
        out.data()[i] = 1.0 / (1.0 + std::exp(-out.data()[i]));
    }
    return out;
}

Tensor relu(const Tensor& x) {
    Tensor out = x.to_f64();
    for (std::int64_t i = 0; i < out.size(); ++i) {
        if (out.data()[i] < 0) out.data()[i] = 0;
    }
    return out;
}

Tensor gap_spatial(const Tensor& x) {
    require_rank4(x, "gap_spatial");
    const int n = x.dim(0), c = x.dim(1);
    const std::int64_t plane = static_cast<std::int64_t>(x.dim(2)) * x.dim(3);
    Tensor out = Tensor::zeros({n, c});
    const double* xp = x.data();
    for (std::int64_t nc = 0; nc < static_cast<std::int64_t>(n) * c; ++nc) {
        double s = 0;
        const double* src = xp + nc * plane;
        for (std::int64_t i = 0; i < plane; ++i) s += src[i];
        out.data()[nc] = s / static_cast<double>(plane);
    }
    return out;
}

Tensor conv1d_channels(const Tensor& v, const Tensor& weights, const Tensor& bias) {
    require(v.rank() == 2, "conv1d_channels expects (N, C)");
    require(weights.rank() == 1 && weights.dim(0) == 3, "conv1d kernel must have length 3");
    const int n = v.dim(0), c = v.dim(1);
    const double w0 = weights.at(0), w1 = weights.at(1), w2 = weights.at(2);
    const double b = bias.at(0);
    Tensor out = Tensor::zeros({n, c});
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < c; ++j) {
            double acc = b + w1 * v.at(i, j);
            if (j > 0) acc += w0 * v.at(i, j - 1);
            if (j + 1 < c) acc += w2 * v.at(i, j + 1);
            out.at(i, j) = acc;
        }
    }
    return out;
}

Tensor slice_channels(const Tensor& x, int begin, int end) {
    require_rank4(x, "slice_channels");
    require(0 <= begin && begin < end && end <= x.dim(1), "slice_channels range out of bounds");
    const int n = x.dim(0), c = x.dim(1);
    const std::int64_t plane = static_cast<std::int64_t>(x.dim(2)) * x.dim(3);
    Tensor out = Tensor::zeros({n, end - begin, x.dim(2), x.dim(3)});
    for (int in = 0; in < n; ++in) {
        const double* src = x.data() + (static_cast<std::int64_t>(in) * c + begin) * plane;
        double* dst = out.data() + static_cast<std::int64_t>(in) * (end - begin) * plane;
        std::copy(src, src + static_cast<std::int64_t>(end - begin) * plane, dst);
    }
    return out;
}

std::pair<Tensor, Tensor> split_channels(const Tensor& x) {
    require_rank4(x, "split_channels");
    if (x.dim(1) % 2 != 0) {
        throw std::invalid_argument("split_channels requires an even channel count, got " +
                                    std::to_string(x.dim(1)));
    }
    const int half = x.dim(1) / 2;
    return {slice_channels(x, 0, half), slice_channels(x, half, x.dim(1))};
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    require_rank4(a, "concat_channels");
    require_rank4(b, "concat_channels");
    require(a.dim(0) == b.dim(0) && a.dim(2) == b.dim(2) && a.dim(3) == b.dim(3),
            "concat_channels non-channel dims must match");
    const int n = a.dim(0), ca = a.dim(1), cb = b.dim(1);
    const std::int64_t plane = static_cast<std::int64_t>(a.dim(2)) * a.dim(3);
    Tensor out = Tensor::zeros({n, ca + cb, a.dim(2), a.dim(3)});
    for (int in = 0; in < n; ++in) {
        double* dst = out.data() + static_cast<std::int64_t>(in) * (ca + cb) * plane;
        const double* pa = a.data() + static_cast<std::int64_t>(in) * ca * plane;
        const double* pb = b.data() + static_cast<std::int64_t>(in) * cb * plane;
        std::copy(pa, pa + ca * plane, dst);
        std::copy(pb, pb + cb * plane, dst + ca * plane);
    }
    return out;
}

namespace {

Tensor zip(const Tensor& a, const Tensor& b, double (*f)(double, double), const char* who) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(who) + " shape mismatch: " +
                                    shape_string(a.dims()) + " vs " + shape_string(b.dims()));
    }
    Tensor out = a.to_f64();
    for (std::int64_t i = 0; i < out.size(); ++i) out.data()[i] = f(a.data()[i], b.data()[i]);
    return out;
}

} // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return zip(a, b, [](double x, double y) { return x + y; }, "add");
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return zip(a, b, [](double x, double y) { return x - y; }, "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return zip(a, b, [](double x, double y) { return x * y; }, "mul");
}

Tensor scale(const Tensor& a, double c) {
    Tensor out = a.to_f64();
    for (std::int64_t i = 0; i < out.size(); ++i) out.data()[i] *= c;
    return out;
}

Tensor scale_channels(const Tensor& x, const Tensor& w) {
    require_rank4(x, "scale_channels");
    require(w.rank() == 2 && w.dim(0) == x.dim(0) && w.dim(1) == x.dim(1),
            "scale_channels weights must be (N, C)");
    Tensor out = x.to_f64();
    const std::int64_t plane = static_cast<std::int64_t>(x.dim(2)) * x.dim(3);
    for (std::int64_t nc = 0; nc < static_cast<std::int64_t>(x.dim(0)) * x.dim(1); ++nc) {
        const double g = w.data()[nc];
        double* dst = out.data() + nc * plane;
        for (std::int64_t i = 0; i < plane; ++i) dst[i] *= g;
    }
    return out;
}

Tensor time_shift_diff(const Tensor& conv_out, const Tensor& x, int time_axis) {
    if (!conv_out.same_shape(x)) {
        throw std::invalid_argument("time_shift_diff operands must share a shape");
    }
    require(time_axis >= 0 && time_axis < x.rank(), "time_shift_diff axis out of range");
    const int t_len = x.dim(time_axis);
    std::int64_t outer = 1, inner = 1;
    for (int i = 0; i < time_axis; ++i) outer *= x.dim(i);
    for (int i = time_axis + 1; i < x.rank(); ++i) inner *= x.dim(i);

    Tensor out = Tensor::zeros(x.dims());
    const double* cp = conv_out.data();
    const double* xp = x.data();
    double* op = out.data();
    for (std::int64_t o = 0; o < outer; ++o) {
        const std::int64_t base = o * t_len * inner;
        for (int t = 0; t + 1 < t_len; ++t) {
            const std::int64_t dst = base + static_cast<std::int64_t>(t) * inner;
            const std::int64_t src = dst + inner;
            for (std::int64_t i = 0; i < inner; ++i) op[dst + i] = cp[src + i] - xp[dst + i];
        }
        // the final slice has no successor; it stays a zero map
    }
    return out;
}

} // namespace stil::nnops
