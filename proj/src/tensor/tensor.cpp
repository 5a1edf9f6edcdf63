#include "tinylab/tensor.hpp"

#include <cmath>
#include <sstream>

#include "tinylab/errors.hpp"

namespace tinylab {

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_to_string(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

Real* TensorImpl::grad_buffer() {
    if (grad.empty()) grad.assign(data.size(), Real(0));
    return grad.data();
}

namespace {

void check_shape(const Shape& shape) {
    if (shape.empty()) return;  // rank-0 scalar
    for (std::size_t d : shape) {
        if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_to_string(shape));
    }
}

}  // namespace

Tensor::Tensor(Shape shape, Real fill) : impl_(std::make_shared<TensorImpl>()) {
    check_shape(shape);
    impl_->data.assign(shape_numel(shape), fill);
    impl_->shape = std::move(shape);
}

Tensor::Tensor(Shape shape, std::vector<Real> values) : impl_(std::make_shared<TensorImpl>()) {
    check_shape(shape);
    if (values.size() != shape_numel(shape)) {
        throw DimensionError("tensor of shape " + shape_to_string(shape) + " needs " +
                             std::to_string(shape_numel(shape)) + " values, got " +
                             std::to_string(values.size()));
    }
    impl_->shape = std::move(shape);
    impl_->data = std::move(values);
}

Tensor Tensor::parameter(Shape shape, std::vector<Real> values) {
    Tensor t(std::move(shape), std::move(values));
    t.impl_->requires_grad = true;
    return t;
}

Tensor Tensor::scalar(Real value) { return Tensor(Shape{}, std::vector<Real>{value}); }

Real Tensor::item() const {
    if (numel() != 1) throw DimensionError("item() on tensor of shape " + shape_to_string(shape()));
    return impl_->data[0];
}

std::span<Real> Tensor::grad() {
    impl_->grad_buffer();
    return impl_->grad;
}

std::span<const Real> Tensor::grad() const {
    impl_->grad_buffer();
    return impl_->grad;
}

void Tensor::zero_grad() {
    if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), Real(0));
}

Tensor Tensor::clone() const {
    Tensor copy(impl_->shape, impl_->data);
    copy.impl_->requires_grad = impl_->requires_grad;
    return copy;
}

bool Tensor::all_finite() const {
    for (Real v : impl_->data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

// ---------------------------------------------------------------- tape

namespace {
thread_local Tape* g_active_tape = nullptr;
}

Tape* active_tape() { return g_active_tape; }

TapeScope::TapeScope(Tape& tape) : previous_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = previous_; }

void Tape::record(const Tensor& output, BackwardRule rule) {
    output.impl()->node_id = static_cast<std::int64_t>(nodes_.size());
    output.impl()->requires_grad = true;
    nodes_.push_back(Node{output.impl(), std::move(rule)});
}

void Tape::backward(const Tensor& loss) {
    if (!loss.defined() || loss.numel() != 1) {
        throw DimensionError("backward() needs a scalar loss, got shape " +
                             (loss.defined() ? shape_to_string(loss.shape()) : std::string("<undefined>")));
    }
    const std::int64_t id = loss.node_id();
    if (id < 0 || id >= static_cast<std::int64_t>(nodes_.size()) ||
        nodes_[static_cast<std::size_t>(id)].output != loss.impl()) {
        throw NumericError("backward() called on a loss that is not on this tape");
    }
    loss.impl()->grad_buffer()[0] += Real(1);
    for (std::int64_t i = id; i >= 0; --i) {
        Node& node = nodes_[static_cast<std::size_t>(i)];
        if (node.output->grad.empty()) continue;  // not reachable from loss
        node.rule();
    }
}

void backward(const Tensor& loss) {
    Tape* tape = active_tape();
    if (tape == nullptr) throw NumericError("backward() called with no active tape");
    tape->backward(loss);
}

}  // namespace tinylab
