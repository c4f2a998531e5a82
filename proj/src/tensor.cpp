#include "stil/tensor.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "tensor file format assumes a little-endian host");

namespace stil {

namespace {

constexpr char kMagic[4] = {'S', 'T', 'E', 'N'};
constexpr int kMaxRank = 4;

std::int64_t checked_size(const std::vector<int>& dims) {
    if (dims.empty() || dims.size() > kMaxRank) {
        throw std::invalid_argument("tensor rank must be 1..4, got " +
                                    std::to_string(dims.size()));
    }
    std::int64_t n = 1;
    for (int d : dims) {
        if (d < 1) {
            throw std::invalid_argument("tensor dims must be >= 1, got " + shape_string(dims));
        }
        n *= d;
    }
    return n;
}

double quantize_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

} // namespace

std::string shape_string(const std::vector<int>& dims) {
    std::string s = "(";
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(dims[i]);
    }
    return s + ")";
}

Tensor Tensor::zeros(const std::vector<int>& dims, DType dt) { return full(dims, 0.0, dt); }

Tensor Tensor::full(const std::vector<int>& dims, double value, DType dt) {
    const std::int64_t n = checked_size(dims);
    Tensor t;
    t.dims_ = dims;
    t.dtype_ = dt;
    t.data_.assign(static_cast<std::size_t>(n), dt == DType::f32 ? quantize_f32(value) : value);
    return t;
}

Tensor Tensor::from_data(const std::vector<int>& dims, std::vector<double> data, DType dt) {
    const std::int64_t n = checked_size(dims);
    if (static_cast<std::int64_t>(data.size()) != n) {
        throw std::invalid_argument("tensor data length " + std::to_string(data.size()) +
                                    " does not match shape " + shape_string(dims));
    }
    Tensor t;
    t.dims_ = dims;
    t.dtype_ = dt;
    t.data_ = std::move(data);
    if (dt == DType::f32) {
        for (double& v : t.data_) v = quantize_f32(v);
    }
    return t;
}

void Tensor::fill(double v) {
    const double q = dtype_ == DType::f32 ? quantize_f32(v) : v;
    for (double& x : data_) x = q;
}

std::vector<int> inverse_permutation(const std::vector<int>& axes) {
    std::vector<int> inv(axes.size());
    for (std::size_t i = 0; i < axes.size(); ++i) inv[static_cast<std::size_t>(axes[i])] = static_cast<int>(i);
    return inv;
}

Tensor Tensor::permuted(const std::vector<int>& axes) const {
    const int r = rank();
    if (static_cast<int>(axes.size()) != r) {
        throw std::invalid_argument("permutation length does not match rank");
    }
    std::vector<bool> seen(static_cast<std::size_t>(r), false);
    for (int a : axes) {
        if (a < 0 || a >= r || seen[static_cast<std::size_t>(a)]) {
            throw std::invalid_argument("invalid permutation");
        }
        seen[static_cast<std::size_t>(a)] = true;
    }

    std::vector<int> out_dims(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) out_dims[static_cast<std::size_t>(i)] = dims_[static_cast<std::size_t>(axes[static_cast<std::size_t>(i)])];
    Tensor out;
    out.dims_ = out_dims;
    out.dtype_ = dtype_;
    out.data_.resize(data_.size());

    // row-major strides of the source, gathered in output-axis order
    std::int64_t src_strides[kMaxRank];
    std::int64_t s = 1;
    for (int i = r - 1; i >= 0; --i) {
        src_strides[i] = s;
        s *= dims_[static_cast<std::size_t>(i)];
    }
    std::int64_t gather[kMaxRank];
    std::int64_t od[kMaxRank];
    for (int i = 0; i < kMaxRank; ++i) {
        gather[i] = i < r ? src_strides[axes[static_cast<std::size_t>(i)]] : 0;
        od[i] = i < r ? out_dims[static_cast<std::size_t>(i)] : 1;
    }

    std::size_t o = 0;
    for (std::int64_t i0 = 0; i0 < od[0]; ++i0)
        for (std::int64_t i1 = 0; i1 < od[1]; ++i1)
            for (std::int64_t i2 = 0; i2 < od[2]; ++i2)
                for (std::int64_t i3 = 0; i3 < od[3]; ++i3)
                    out.data_[o++] =
                        data_[static_cast<std::size_t>(i0 * gather[0] + i1 * gather[1] +
                                                       i2 * gather[2] + i3 * gather[3])];
    return out;
}

Tensor Tensor::to_f32() const {
    Tensor t = *this;
    t.dtype_ = DType::f32;
    for (double& v : t.data_) v = quantize_f32(v);
    return t;
}

Tensor Tensor::to_f64() const {
    Tensor t = *this;
    t.dtype_ = DType::f64;
    return t;
}

void Tensor::save(const std::filesystem::path& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for write: " + path.string());

    char header[8] = {};
    std::memcpy(header, kMagic, 4);
    header[4] = static_cast<char>(dtype_);
    header[5] = static_cast<char>(rank());
    f.write(header, sizeof header);
    for (int d : dims_) {
        const std::uint32_t u = static_cast<std::uint32_t>(d);
        f.write(reinterpret_cast<const char*>(&u), 4);
    }
    if (dtype_ == DType::f64) {
        f.write(reinterpret_cast<const char*>(data_.data()),
                static_cast<std::streamsize>(data_.size() * sizeof(double)));
    } else {
        std::vector<float> narrow(data_.size());
        for (std::size_t i = 0; i < data_.size(); ++i) narrow[i] = static_cast<float>(data_[i]);
        f.write(reinterpret_cast<const char*>(narrow.data()),
                static_cast<std::streamsize>(narrow.size() * sizeof(float)));
    }
    if (!f) throw std::runtime_error("write failed: " + path.string());
}

Tensor Tensor::load(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for read: " + path.string());

    char header[8];
    f.read(header, sizeof header);
    if (!f || std::memcmp(header, kMagic, 4) != 0) {
        throw std::runtime_error("bad magic in tensor file: " + path.string());
    }
    const auto dt_raw = static_cast<std::uint8_t>(header[4]);
    const int r = static_cast<std::uint8_t>(header[5]);
    if (dt_raw > 1) throw std::runtime_error("unknown dtype in tensor file: " + path.string());
    if (r < 1 || r > kMaxRank) {
        throw std::runtime_error("bad rank in tensor file: " + path.string());
    }
    std::vector<int> dims(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) {
        std::uint32_t u = 0;
        f.read(reinterpret_cast<char*>(&u), 4);
        dims[static_cast<std::size_t>(i)] = static_cast<int>(u);
    }
    if (!f) throw std::runtime_error("truncated tensor header: " + path.string());

    const std::int64_t n = checked_size(dims);
    std::vector<double> data(static_cast<std::size_t>(n));
    if (dt_raw == static_cast<std::uint8_t>(DType::f64)) {
        f.read(reinterpret_cast<char*>(data.data()),
               static_cast<std::streamsize>(data.size() * sizeof(double)));
    } else {
        std::vector<float> narrow(static_cast<std::size_t>(n));
        f.read(reinterpret_cast<char*>(narrow.data()),
               static_cast<std::streamsize>(narrow.size() * sizeof(float)));
        for (std::size_t i = 0; i < narrow.size(); ++i) data[i] = static_cast<double>(narrow[i]);
    }
    if (!f) throw std::runtime_error("truncated tensor payload: " + path.string());

    return from_data(dims, std::move(data), static_cast<DType>(dt_raw));
}

} // namespace stil
