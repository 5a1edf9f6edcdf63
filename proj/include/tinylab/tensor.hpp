#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tinylab/real.hpp"

namespace tinylab {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_to_string(const Shape& shape);

struct TensorImpl {
    Shape shape;
    std::vector<Real> data;
    std::vector<Real> grad;  // empty until first written
    bool requires_grad = false;
    std::int64_t node_id = -1;  // position on the active tape, -1 for leaves

    Real* grad_buffer();  // allocates a zeroed buffer on first use
};

/// Shared handle to a dense row-major array that can take part in autodiff.
///
/// Copies of a Tensor alias the same storage. Use clone() for a deep copy.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, Real fill = Real(0));
    Tensor(Shape shape, std::vector<Real> values);

    /// Leaf tensor whose gradient is tracked (a trainable parameter).
    static Tensor parameter(Shape shape, std::vector<Real> values);
    static Tensor scalar(Real value);

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const { return impl_->shape; }
    std::size_t rank() const { return impl_->shape.size(); }
    std::size_t dim(std::size_t axis) const { return impl_->shape.at(axis); }
    std::size_t numel() const { return impl_->data.size(); }

    std::span<Real> data() { return impl_->data; }
    std::span<const Real> data() const { return impl_->data; }
    Real item() const;
    Real at(std::size_t flat_index) const { return impl_->data.at(flat_index); }

    bool has_grad() const { return !impl_->grad.empty(); }
    /// Gradient view; allocates zeros if no gradient has been written yet.
    std::span<Real> grad();
    std::span<const Real> grad() const;
    void zero_grad();

    bool requires_grad() const { return impl_->requires_grad; }
    void set_requires_grad(bool flag) { impl_->requires_grad = flag; }
    std::int64_t node_id() const { return impl_->node_id; }

    Tensor clone() const;
    bool all_finite() const;

    const std::shared_ptr<TensorImpl>& impl() const { return impl_; }

private:
    std::shared_ptr<TensorImpl> impl_;
};

/// Ordered record of differentiable operations executed while it is active.
///
/// Node ids are assigned in execution order, so replaying the backward rules
/// from the highest id down visits every node after all of its consumers.
class Tape {
public:
    using BackwardRule = std::function<void()>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    void record(const Tensor& output, BackwardRule rule);

    /// Seeds d(loss)/d(loss) = 1 and accumulates gradients into every
    /// reachable tensor that requires them. Throws on non-scalar loss or a
    /// loss that was not produced on this tape.
    void backward(const Tensor& loss);

    std::size_t size() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }

private:
    struct Node {
        std::shared_ptr<TensorImpl> output;
        BackwardRule rule;
    };
    std::vector<Node> nodes_;
};

/// Tape that ops record onto in the current thread, or nullptr.
Tape* active_tape();

/// Installs a tape as the thread's active tape for the scope's lifetime.
class TapeScope {
public:
    explicit TapeScope(Tape& tape);
    ~TapeScope();
    TapeScope(const TapeScope&) = delete;
    TapeScope& operator=(const TapeScope&) = delete;

private:
    Tape* previous_;
};

/// Runs backward on the active tape.
void backward(const Tensor& loss);

}  // namespace tinylab
