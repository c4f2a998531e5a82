#pragma once

#include <cassert>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace stil {

enum class DType : std::uint8_t { f32 = 0, f64 = 1 };

/// Dense row-major real tensor, rank 1-4, every dim >= 1.
///
/// Values are held as doubles regardless of dtype; a tensor tagged f32 only
/// ever holds f32-representable values (constructors quantize), so the file
/// round-trip is bitwise for both dtypes.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(const std::vector<int>& dims, DType dt = DType::f64);
    static Tensor full(const std::vector<int>& dims, double value, DType dt = DType::f64);
    static Tensor from_data(const std::vector<int>& dims, std::vector<double> data,
                            DType dt = DType::f64);
    static Tensor scalar(double value) { return from_data({1}, {value}); }

    int rank() const { return static_cast<int>(dims_.size()); }
    const std::vector<int>& dims() const { return dims_; }
    int dim(int i) const { return dims_[static_cast<std::size_t>(i)]; }
    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }
    DType dtype() const { return dtype_; }
    bool same_shape(const Tensor& o) const { return dims_ == o.dims_; }

    const double* data() const { return data_.data(); }
    double* data() { return data_.data(); }
    std::span<const double> values() const { return {data_.data(), data_.size()}; }

    double& at(int i0) {
        assert(rank() == 1 && in_bounds(i0, 0));
        return data_[static_cast<std::size_t>(i0)];
    }
    double at(int i0) const { return const_cast<Tensor*>(this)->at(i0); }

    double& at(int i0, int i1) {
        assert(rank() == 2 && in_bounds(i0, 0) && in_bounds(i1, 1));
        return data_[static_cast<std::size_t>(i0) * dims_[1] + i1];
    }
    double at(int i0, int i1) const { return const_cast<Tensor*>(this)->at(i0, i1); }

    double& at(int i0, int i1, int i2) {
        assert(rank() == 3 && in_bounds(i0, 0) && in_bounds(i1, 1) && in_bounds(i2, 2));
        return data_[(static_cast<std::size_t>(i0) * dims_[1] + i1) * dims_[2] + i2];
    }
    double at(int i0, int i1, int i2) const { return const_cast<Tensor*>(this)->at(i0, i1, i2); }

    double& at(int i0, int i1, int i2, int i3) {
        assert(rank() == 4 && in_bounds(i0, 0) && in_bounds(i1, 1) && in_bounds(i2, 2) &&
               in_bounds(i3, 3));
        return data_[((static_cast<std::size_t>(i0) * dims_[1] + i1) * dims_[2] + i2) * dims_[3] +
                     i3];
    }
    double at(int i0, int i1, int i2, int i3) const {
        return const_cast<Tensor*>(this)->at(i0, i1, i2, i3);
    }

    void fill(double v);

    /// Explicit-copy axis permutation: out.dims[i] = dims[axes[i]],
    /// out(j0..) = in(j_{axes^-1(0)}..). Throws on invalid permutations.
    Tensor permuted(const std::vector<int>& axes) const;

    /// Copy with dtype tag f32; values are quantized through float.
    Tensor to_f32() const;
    Tensor to_f64() const;

    void save(const std::filesystem::path& path) const;
    static Tensor load(const std::filesystem::path& path);

    bool operator==(const Tensor& o) const {
        return dims_ == o.dims_ && dtype_ == o.dtype_ && data_ == o.data_;
    }

private:
    bool in_bounds(int i, int axis) const {
        return i >= 0 && i < dims_[static_cast<std::size_t>(axis)];
    }

    std::vector<int> dims_;
    std::vector<double> data_;
    DType dtype_ = DType::f64;
};

std::vector<int> inverse_permutation(const std::vector<int>& axes);

/// "(2, 3, 4)" rendering for error messages and manifests.
std::string shape_string(const std::vector<int>& dims);

} // namespace stil
