#include "tinylab/model.hpp"

#include <algorithm>
#include <cmath>

#include "tinylab/errors.hpp"

namespace tinylab {

const char* to_string(Arch arch) {
    switch (arch) {
        case Arch::Linear: return "linear";
        case Arch::Mlp: return "mlp";
        case Arch::Attention: return "attention";
        case Arch::Transformer: return "transformer";
    }
    return "?";
}

Arch parse_arch(std::string_view text) {
    if (text == "linear") return Arch::Linear;
    if (text == "mlp") return Arch::Mlp;
    if (text == "attention") return Arch::Attention;
    if (text == "transformer") return Arch::Transformer;
    throw ValueError("unknown architecture '" + std::string(text) +
                     "' (expected linear, mlp, attention or transformer)");
}

const char* to_string(Positional positional) { return positional == Positional::Learned ? "learned" : "rope"; }

Positional parse_positional(std::string_view text) {
    if (text == "learned") return Positional::Learned;
    if (text == "rope") return Positional::Rope;
    throw ValueError("unknown positional encoding '" + std::string(text) + "' (expected learned or rope)");
}

std::size_t ModelConfig::block_count() const {
    switch (arch) {
        case Arch::Attention: return 1;
        case Arch::Transformer: return layers;
        default: return 0;
    }
}

void ModelConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ValueError("model config: " + msg); };
    if (context_length < 1) fail("context length T must be >= 1");
    if (vocab_size < 1) fail("vocab size must be >= 1");
    if (d_model < 1) fail("d_model must be >= 1");
    if (!(dropout >= 0 && dropout < 1)) fail("dropout must be in [0, 1)");
    if (!(attention_dropout >= 0 && attention_dropout < 1)) fail("attention dropout must be in [0, 1)");
    const bool attends = arch == Arch::Attention || arch == Arch::Transformer;
    if (arch == Arch::Mlp && mlp_hidden < 1) fail("mlp hidden width must be >= 1");
    if (attends) {
        if (heads < 1 || d_model % heads != 0) {
            fail(std::to_string(heads) + " heads do not divide d_model " + std::to_string(d_model));
        }
        if (ff_width < 1) fail("feed-forward width must be >= 1");
        if (arch == Arch::Transformer && layers < 1) fail("transformer needs at least one layer");
        if (positional == Positional::Rope && (d_model / heads) % 2 != 0) {
            fail("rope needs an even head dimension, got " + std::to_string(d_model / heads));
        }
    } else if (positional == Positional::Rope) {
        fail(std::string("rope positional encoding is only valid for attention/transformer, not ") + to_string(arch));
    }
}

ModelConfig ModelConfig::preset(Arch arch, std::size_t vocab_size) {
    ModelConfig c;
    c.arch = arch;
    c.vocab_size = vocab_size;
    if (arch == Arch::Attention) {
        c.layers = 1;
        c.ff_width = 512;
    }
    return c;
}

// ---------------------------------------------------------------- construction

namespace {

constexpr Real kInitStd = Real(0.02);

std::string block_prefix(std::size_t i) { return "blocks." + std::to_string(i) + "."; }

}  // namespace

Tensor& Model::add_parameter(std::string name, Shape shape, Rng& rng, Real init_std) {
    std::normal_distribution<double> normal(0.0, static_cast<double>(init_std));
    std::vector<Real> values(shape_numel(shape));
    for (Real& v : values) v = static_cast<Real>(normal(rng));
    params_.push_back({std::move(name), Tensor::parameter(std::move(shape), std::move(values))});
    return params_.back().tensor;
}

Tensor& Model::add_constant_parameter(std::string name, Shape shape, Real value) {
    std::vector<Real> values(shape_numel(shape), value);
    params_.push_back({std::move(name), Tensor::parameter(std::move(shape), std::move(values))});
    return params_.back().tensor;
}

Model::Model(const ModelConfig& config, std::uint64_t init_seed) : config_(config) {
    config_.validate();
    Rng rng(init_seed);
    const std::size_t T = config_.context_length;
    const std::size_t V = config_.vocab_size;
    const std::size_t d = config_.d_model;

    auto dense = [&](const std::string& name, std::size_t in, std::size_t out) {
        add_parameter(name + ".weight", {in, out}, rng, kInitStd);
        add_constant_parameter(name + ".bias", {out}, 0);
    };
    auto norm = [&](const std::string& name) {
        add_constant_parameter(name + ".gain", {d}, 1);
        add_constant_parameter(name + ".shift", {d}, 0);
    };

    add_parameter("tok_emb", {V, d}, rng, kInitStd);
    switch (config_.arch) {
        case Arch::Linear:
            dense("head", T * d, V);
            break;
        case Arch::Mlp:
            dense("fc1", T * d, config_.mlp_hidden);
            dense("fc2", config_.mlp_hidden, config_.mlp_hidden);
            dense("head", config_.mlp_hidden, V);
            break;
        case Arch::Attention:
        case Arch::Transformer:
            if (config_.positional == Positional::Learned) add_parameter("pos_emb", {T, d}, rng, kInitStd);
            for (std::size_t b = 0; b < config_.block_count(); ++b) {
                const std::string p = block_prefix(b);
                norm(p + "ln1");
                dense(p + "attn.q", d, d);
                dense(p + "attn.k", d, d);
                dense(p + "attn.v", d, d);
                dense(p + "attn.o", d, d);
                norm(p + "ln2");
                dense(p + "ff.in", d, config_.ff_width);
                dense(p + "ff.out", config_.ff_width, d);
            }
            norm("ln_f");
            dense("head", d, V);
            break;
    }
}

const Tensor& Model::parameter(std::string_view name) const {
    for (const NamedParameter& p : params_) {
        if (p.name == name) return p.tensor;
    }
    throw ValueError("model has no parameter named '" + std::string(name) + "'");
}

std::size_t Model::batch_size_of(std::span<const TokenId> contexts) const {
    const std::size_t T = config_.context_length;
    if (contexts.empty() || contexts.size() % T != 0) {
        throw DimensionError("forward: got " + std::to_string(contexts.size()) +
                             " context ids, expected a positive multiple of T = " + std::to_string(T));
    }
    return contexts.size() / T;
}

// ---------------------------------------------------------------- forward

namespace {

Tensor dense_apply(const Tensor& x, const Tensor& weight, const Tensor& bias) { return add(matmul(x, weight), bias); }

Tensor maybe_dropout(const Tensor& x, Real p, const ForwardOptions& options) {
    if (!options.training || p == Real(0)) return x;
    if (options.rng == nullptr) throw ValueError("training-mode forward with dropout needs an rng");
    return dropout(x, p, true, *options.rng);
}

}  // namespace

Tensor Model::transformer_stream(std::span<const TokenId> contexts, const ForwardOptions& options,
                                 std::vector<Tensor>* collect) const {
    const std::size_t B = batch_size_of(contexts);
    const std::size_t T = config_.context_length;
    const std::size_t d = config_.d_model;
    const bool rope = config_.positional == Positional::Rope;

    // Parameters are stored in construction order; walk them with a cursor.
    std::size_t at = 0;
    auto next = [&]() -> const Tensor& { return params_[at++].tensor; };

    Tensor x = reshape(embedding_lookup(next(), contexts), {B, T, d});
    if (!rope) x = add(x, next());

    AttentionOptions attn;
    attn.weight_dropout = config_.attention_dropout;
    attn.training = options.training;
    attn.rng = options.rng;

    for (std::size_t b = 0; b < config_.block_count(); ++b) {
        const Tensor& ln1_gain = next();
        const Tensor& ln1_shift = next();
        Tensor h = layer_norm(x, ln1_gain, ln1_shift);
        const Tensor& wq = next(); const Tensor& bq = next();
        const Tensor& wk = next(); const Tensor& bk = next();
        const Tensor& wv = next(); const Tensor& bv = next();
        const Tensor& wo = next(); const Tensor& bo = next();
        Tensor q = split_heads(dense_apply(h, wq, bq), config_.heads);
        Tensor k = split_heads(dense_apply(h, wk, bk), config_.heads);
        Tensor v = split_heads(dense_apply(h, wv, bv), config_.heads);
        if (rope) {
            q = rope_rotate(q);
            k = rope_rotate(k);
        }
        Tensor a = merge_heads(causal_attention(q, k, v, attn));
        x = add(x, maybe_dropout(dense_apply(a, wo, bo), config_.dropout, options));

        const Tensor& ln2_gain = next();
        const Tensor& ln2_shift = next();
        const Tensor& w1 = next(); const Tensor& b1 = next();
        const Tensor& w2 = next(); const Tensor& b2 = next();
        Tensor f = relu(dense_apply(layer_norm(x, ln2_gain, ln2_shift), w1, b1));
        x = add(x, maybe_dropout(dense_apply(f, w2, b2), config_.dropout, options));
        if (collect != nullptr) collect->push_back(x);
    }
    const Tensor& lnf_gain = next();
    const Tensor& lnf_shift = next();
    const Tensor& head_w = next();
    const Tensor& head_b = next();
    // Only the final position feeds the head; layer norm is per position so
    // normalizing after the slice is equivalent.
    Tensor last = layer_norm(last_position(x), lnf_gain, lnf_shift);
    return dense_apply(last, head_w, head_b);
}

Tensor Model::forward(std::span<const TokenId> contexts, const ForwardOptions& options) const {
    const std::size_t B = batch_size_of(contexts);
    const std::size_t T = config_.context_length;
    const std::size_t d = config_.d_model;
    switch (config_.arch) {
        case Arch::Linear: {
            Tensor x = reshape(embedding_lookup(params_[0].tensor, contexts), {B, T * d});
            return dense_apply(x, params_[1].tensor, params_[2].tensor);
        }
        case Arch::Mlp: {
            Tensor x = reshape(embedding_lookup(params_[0].tensor, contexts), {B, T * d});
            x = maybe_dropout(relu(dense_apply(x, params_[1].tensor, params_[2].tensor)), config_.dropout, options);
            x = maybe_dropout(relu(dense_apply(x, params_[3].tensor, params_[4].tensor)), config_.dropout, options);
            return dense_apply(x, params_[5].tensor, params_[6].tensor);
        }
        case Arch::Attention:
        case Arch::Transformer:
            return transformer_stream(contexts, options, nullptr);
    }
    throw ValueError("unreachable architecture");
}

std::vector<Tensor> Model::block_outputs(std::span<const TokenId> contexts) const {
    if (config_.block_count() == 0) {
        throw ValueError(std::string("block_outputs: ") + to_string(config_.arch) + " model has no blocks");
    }
    std::vector<Tensor> outputs;
    transformer_stream(contexts, ForwardOptions{}, &outputs);
    return outputs;
}

// ---------------------------------------------------------------- bookkeeping

void Model::zero_grad() {
    for (NamedParameter& p : params_) p.tensor.zero_grad();
}

void Model::zero_output_head() {
    for (NamedParameter& p : params_) {
        if (p.name == "head.weight" || p.name == "head.bias") {
            std::fill(p.tensor.data().begin(), p.tensor.data().end(), Real(0));
        }
    }
}

Model Model::clone() const {
    Model copy;
    copy.config_ = config_;
    copy.params_.reserve(params_.size());
    for (const NamedParameter& p : params_) copy.params_.push_back({p.name, p.tensor.clone()});
    return copy;
}

void Model::assign_from(const Model& other) {
    if (!(other.config_ == config_) || other.params_.size() != params_.size()) {
        throw ValueError("assign_from: model configurations differ");
    }
    for (std::size_t i = 0; i < params_.size(); ++i) {
        auto src = other.params_[i].tensor.data();
        std::copy(src.begin(), src.end(), params_[i].tensor.data().begin());
    }
}

std::size_t count_params(const Model& model) {
    std::size_t total = 0;
    for (const NamedParameter& p : model.parameters()) total += p.tensor.numel();
    return total;
}

}  // namespace tinylab
