#include <cmath>

#include "tinylab/errors.hpp"
#include "tinylab/training.hpp"

namespace tinylab {

void adam_step(std::span<NamedParameter> params, AdamState& state, const AdamOptions& options) {
    if (state.m.empty()) {
        for (const NamedParameter& p : params) {
            state.m.emplace_back(p.tensor.numel(), Real(0));
            state.v.emplace_back(p.tensor.numel(), Real(0));
        }
    }
    if (state.m.size() != params.size()) {
        throw DimensionError("adam_step: state tracks " + std::to_string(state.m.size()) + " parameters, got " +
                             std::to_string(params.size()));
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const auto correction1 = static_cast<Real>(1.0 - std::pow(static_cast<double>(options.beta1), t));
    const auto correction2 = static_cast<Real>(1.0 - std::pow(static_cast<double>(options.beta2), t));
    const Real b1 = options.beta1;
    const Real b2 = options.beta2;

    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor& tensor = params[i].tensor;
        auto& m = state.m[i];
        auto& v = state.v[i];
        if (m.size() != tensor.numel() || v.size() != tensor.numel()) {
            throw DimensionError("adam_step: state for '" + params[i].name + "' has " + std::to_string(m.size()) +
                                 " entries, parameter has " + std::to_string(tensor.numel()));
        }
        if (!tensor.has_grad()) continue;  // no gradient flowed: leave m, v and value untouched
        auto w = tensor.data();
        auto g = tensor.grad();
        for (std::size_t j = 0; j < w.size(); ++j) {
            m[j] = b1 * m[j] + (1 - b1) * g[j];
            v[j] = b2 * v[j] + (1 - b2) * g[j] * g[j];
            const Real m_hat = m[j] / correction1;
            const Real v_hat = v[j] / correction2;
            w[j] -= options.learning_rate * m_hat / (std::sqrt(v_hat) + options.eps);
        }
    }
}

}  // namespace tinylab
