#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tinylab/ops.hpp"

namespace tinylab {

enum class Arch { Linear, Mlp, Attention, Transformer };
enum class Positional { Learned, Rope };

const char* to_string(Arch arch);
Arch parse_arch(std::string_view text);
const char* to_string(Positional positional);
Positional parse_positional(std::string_view text);

/// Architecture descriptor. Defaults are the main character-level settings.
struct ModelConfig {
    Arch arch = Arch::Transformer;
    std::size_t context_length = 128;  // T
    std::size_t vocab_size = 65;       // V
    std::size_t d_model = 128;
    std::size_t mlp_hidden = 256;      // mlp: width of both hidden layers
    std::size_t heads = 4;             // attention / transformer
    std::size_t layers = 3;            // transformer only; attention is always one block
    std::size_t ff_width = 256;        // attention / transformer feed-forward inner width
    Real dropout = Real(0.1);
    Real attention_dropout = 0;        // on attention weights; off unless set
    Positional positional = Positional::Learned;

    /// Number of transformer blocks the architecture instantiates.
    std::size_t block_count() const;
    /// Throws ValueError describing the first violated constraint.
    void validate() const;

    /// Main configuration for each architecture: T = 128, d_model = 128, MLP
    /// hidden 256, 4 heads, single-block attention with a 512-wide
    /// feed-forward, 3-layer transformer with a 256-wide feed-forward.
    static ModelConfig preset(Arch arch, std::size_t vocab_size);

    bool operator==(const ModelConfig&) const = default;
};

struct NamedParameter {
    std::string name;
    Tensor tensor;
};

struct ForwardOptions {
    bool training = false;
    Rng* rng = nullptr;  // needed for dropout when training
};

/// Parameter set plus forward rule for one architecture.
class Model {
public:
    Model(const ModelConfig& config, std::uint64_t init_seed);

    const ModelConfig& config() const { return config_; }
    std::span<NamedParameter> parameters() { return params_; }
    std::span<const NamedParameter> parameters() const { return params_; }
    const Tensor& parameter(std::string_view name) const;

    /// Next-token logits [B, V] for B windows. `contexts` holds the windows
    /// back to back, B * T ids.
    Tensor forward(std::span<const TokenId> contexts, const ForwardOptions& options = {}) const;

    /// Residual stream [B, T, d_model] after each block (attention and
    /// transformer only), in eval mode.
    std::vector<Tensor> block_outputs(std::span<const TokenId> contexts) const;

    void zero_grad();
    /// Zeroes the output projection so every context predicts the uniform
    /// distribution.
    void zero_output_head();
    /// Deep copy of every parameter value.
    Model clone() const;
    /// Overwrites parameter values with those of a model of the same config.
    void assign_from(const Model& other);

private:
    Model() = default;
    Tensor& add_parameter(std::string name, Shape shape, Rng& rng, Real init_std);
    Tensor& add_constant_parameter(std::string name, Shape shape, Real value);
    std::size_t batch_size_of(std::span<const TokenId> contexts) const;
    Tensor transformer_stream(std::span<const TokenId> contexts, const ForwardOptions& options,
                              std::vector<Tensor>* collect) const;

    ModelConfig config_;
    std::vector<NamedParameter> params_;
};

/// Sum of parameter element counts.
std::size_t count_params(const Model& model);

}  // namespace tinylab
