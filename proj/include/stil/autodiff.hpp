#pragma once

#include <functional>
#include <unordered_map>
#include <vector>

#include "stil/nnops.hpp"
#include "stil/tensor.hpp"

namespace stil::autodiff {

/// Handle to a value recorded on a Tape.
struct Value {
    std::int32_t id = -1;
    bool valid() const { return id >= 0; }
};

/// Records the forward computation and replays it in reverse. Each op pushes
/// one node whose pull closure routes the output adjoint into the inputs;
/// node order matches forward execution order, so a single reverse sweep is
/// the chain rule. Forward semantics are delegated to nnops so there is one
/// definition of each primitive.
///
/// A tape is confined to one step on one thread; independent tapes are
/// independent.
class Tape {
public:
    /// Register a leaf. requires_grad marks parameters/inputs whose gradient
    /// the caller intends to read back.
    Value input(Tensor t, bool requires_grad = false);

    Value conv2d(Value x, Value weights, Value bias, nnops::Pad2 pad, int stride = 1);
    Value avg_pool_2x2(Value x);
    Value upsample_bilinear_2x(Value x);
    Value sigmoid(Value x);
    Value relu(Value x);
    Value gap_spatial(Value x);
    Value conv1d_channels(Value v, Value weights, Value bias);
    Value slice_channels(Value x, int begin, int end);
    Value concat_channels(Value a, Value b);
    Value permute(Value x, std::vector<int> axes);
    Value add(Value a, Value b);
    Value sub(Value a, Value b);
    Value mul(Value a, Value b);
    Value scale(Value a, double c);
    Value scale_channels(Value x, Value w);
    Value time_shift_diff(Value conv_out, Value x, int time_axis);
    /// Mean over every axis but the channel axis: (N, C, H, W) -> (C).
    Value gap_all(Value x);
    /// Scalar head: dot(features, weights) + bias. feat/weights rank 1, bias (1).
    Value dot_bias(Value feat, Value weights, Value bias);
    Value sum_all(Value x);
    /// Binary cross-entropy on a scalar logit with probability clamped to
    /// [1e-7, 1-1e-7]; the clamp region has zero gradient.
    Value bce_with_logit(Value logit, double label);

    /// Reverse sweep from a scalar output; leaves d(out)/d(out) = 1.
    void backward(Value scalar_output);

    const Tensor& value(Value v) const;
    /// Gradient of the backward output w.r.t. this value. Zero tensor if the
    /// value does not influence the output.
    const Tensor& grad(Value v) const;
    bool requires_grad(Value v) const;
    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        std::function<void(Tape&)> pull; // empty for leaves
    };

    Value push(Tensor result, std::function<void(Tape&)> pull);
    Tensor& grad_buf(std::int32_t id);
    bool has_grad(std::int32_t id) const { return !grads_[static_cast<std::size_t>(id)].dims().empty(); }
    void check(Value v) const;

    std::vector<Tensor> vals_;
    std::vector<Tensor> grads_; // empty tensor = not yet touched
    std::vector<Node> nodes_;
    std::vector<bool> requires_grad_;
};

/// Registers parameter tensors on a tape once, keyed by address, so a tensor
/// used in several places maps to a single Value (adjoints then accumulate).
class Binder {
public:
    explicit Binder(Tape& tape, bool requires_grad = true)
        : tape_(&tape), requires_grad_(requires_grad) {}

    Value operator()(const Tensor& t);
    /// Pre-route a tensor to an existing Value (used by the gradient checker
    /// to substitute one parameter with a probe leaf).
    void preset(const Tensor* t, Value v) { memo_[t] = v; }
    Value lookup(const Tensor* t) const;

private:
    Tape* tape_;
    bool requires_grad_;
    std::unordered_map<const Tensor*, Value> memo_;
};

struct GradCheckReport {
    double max_rel_err = 0.0;
    bool pass = false;
};

/// Central-difference check of a scalar-valued tape function at `point`.
/// f builds the computation from the leaf it is handed. rel err per
/// coordinate is |a-n| / max(1, |a|, |n|).
GradCheckReport grad_check(const std::function<Value(Tape&, Value)>& f, const Tensor& point,
                           double step, double tol);

} // namespace stil::autodiff
