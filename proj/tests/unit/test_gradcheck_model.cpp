// End-to-end gradient check of whole models against central differences.
// Linked against the 64-bit build.

#include <gtest/gtest.h>

#include "support/finite_diff.hpp"
#include "tinylab/model.hpp"

using namespace tinylab;
using tinylab::testing::check_gradients;

static_assert(kDoublePrecision, "gradient checks must run against tinylab_f64");

namespace {

double model_gradient_error(const ModelConfig& config, bool with_dropout) {
    Model model(config, 3);
    // Random biases and norm parameters so their gradients are exercised away
    // from the initialization point.
    Rng rng(17);
    std::normal_distribution<double> normal(0.0, 0.1);
    for (NamedParameter& p : model.parameters()) {
        for (Real& v : p.tensor.data()) v += static_cast<Real>(normal(rng));
    }
    const std::size_t B = 3;
    std::vector<TokenId> contexts(B * config.context_length);
    std::vector<TokenId> targets(B);
    for (std::size_t i = 0; i < contexts.size(); ++i) contexts[i] = static_cast<TokenId>((i * 3 + 1) % config.vocab_size);
    for (std::size_t i = 0; i < B; ++i) targets[i] = static_cast<TokenId>((i * 2 + 1) % config.vocab_size);

    std::vector<Tensor> inputs;
    for (NamedParameter& p : model.parameters()) inputs.push_back(p.tensor);
    auto loss = [&] {
        Rng drop(5);  // same masks on every evaluation
        return cross_entropy_logits(model.forward(contexts, ForwardOptions{with_dropout, &drop}), targets);
    };
    // A small step keeps central differences from straddling ReLU kinks, of
    // which a whole model has many; 64-bit arithmetic leaves plenty of room.
    return check_gradients(loss, inputs, 1e-6).max_relative_error;
}

ModelConfig toy(Arch arch) {
    ModelConfig c;
    c.arch = arch;
    c.vocab_size = 5;
    c.context_length = 4;
    c.d_model = 8;
    c.heads = 2;
    c.layers = 2;
    c.ff_width = 12;
    c.mlp_hidden = 6;
    c.dropout = 0;
    return c;
}

}  // namespace

TEST(GradCheckModel, TransformerTwoLayers) {
    EXPECT_LT(model_gradient_error(toy(Arch::Transformer), false), 1e-4);
}

TEST(GradCheckModel, TransformerWithDropout) {
    ModelConfig c = toy(Arch::Transformer);
    c.dropout = Real(0.1);
    c.attention_dropout = Real(0.1);
    EXPECT_LT(model_gradient_error(c, true), 1e-4);
}

TEST(GradCheckModel, RopeTransformer) {
    ModelConfig c = toy(Arch::Transformer);
    c.positional = Positional::Rope;
    EXPECT_LT(model_gradient_error(c, false), 1e-4);
}

TEST(GradCheckModel, LinearMlpAttention) {
    EXPECT_LT(model_gradient_error(toy(Arch::Linear), false), 1e-4);
    EXPECT_LT(model_gradient_error(toy(Arch::Mlp), false), 1e-4);
    EXPECT_LT(model_gradient_error(toy(Arch::Attention), false), 1e-4);
}
