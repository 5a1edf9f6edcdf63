#include <gtest/gtest.h>

#include <cmath>

#include "tinylab/errors.hpp"
#include "tinylab/generation.hpp"
#include "tinylab/training.hpp"

using namespace tinylab;

namespace {

double entropy(const std::vector<double>& p) {
    double h = 0;
    for (double v : p) {
        if (v > 0) h -= v * std::log(v);
    }
    return h;
}

ModelConfig tiny(Arch arch, std::size_t V, std::size_t T = 4) {
    ModelConfig c;
    c.arch = arch;
    c.vocab_size = V;
    c.context_length = T;
    c.d_model = 8;
    c.mlp_hidden = 16;
    c.heads = 2;
    c.layers = 1;
    c.ff_width = 16;
    return c;
}

}  // namespace

TEST(Sampling, MatchesSoftmaxFrequencies) {
    // softmax(0, ln 3) = (1/4, 3/4).
    const std::vector<Real> logits{0, static_cast<Real>(std::log(3.0))};
    Rng rng(42);
    const int draws = 20'000;
    int ones = 0;
    for (int i = 0; i < draws; ++i) ones += sample_next(logits, 1.0, rng);
    EXPECT_NEAR(static_cast<double>(ones) / draws, 0.75, 0.02);
}

TEST(Sampling, EntropyGrowsWithTemperature) {
    const std::vector<Real> logits{2.0f, -1.0f, 0.5f, 0.0f, 1.25f};
    double previous = 0;
    for (double t : {0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 16.0}) {
        const double h = entropy(sampling_distribution(logits, t));
        EXPECT_GT(h, previous) << "temperature " << t;
        previous = h;
    }
    EXPECT_LT(previous, std::log(5.0));
}

TEST(Sampling, TinyTemperatureIsArgmaxWithLowestIdOnTies) {
    Rng rng(1);
    EXPECT_EQ(sample_next(std::vector<Real>{0.1f, 3, -2, 3}, 1e-7, rng), 1);
    EXPECT_EQ(sample_next(std::vector<Real>{5, 5}, 1e-9, rng), 0);
}

TEST(Sampling, RejectsBadInputs) {
    EXPECT_THROW(sampling_distribution(std::vector<Real>{}, 1.0), ValueError);
    EXPECT_THROW(sampling_distribution(std::vector<Real>{1}, 0.0), ValueError);
    SamplerConfig s;
    s.temperature = 0;
    EXPECT_THROW(s.validate(), ValueError);
    s = SamplerConfig{};
    s.n_tokens = 0;
    EXPECT_THROW(s.validate(), ValueError);
}

TEST(Generate, ShortPromptsAreLeftPaddedWithIdZero) {
    Model m(tiny(Arch::Transformer, 5), 3);
    SamplerConfig s;
    s.n_tokens = 12;
    s.seed = 9;
    const std::vector<TokenId> short_prompt{3};
    const std::vector<TokenId> padded_prompt{0, 0, 0, 3};
    const auto a = generate_ids(m, short_prompt, s);
    const auto b = generate_ids(m, padded_prompt, s);
    ASSERT_EQ(a.size(), 13u);
    ASSERT_EQ(b.size(), 16u);
    EXPECT_TRUE(std::equal(a.begin() + 1, a.end(), b.begin() + 4));
}

TEST(Generate, SeedDeterminesOutput) {
    const Vocab vocab = build_char_vocab(std::vector<std::string>{"HAMLET: to be or not"});
    Model m(tiny(Arch::Mlp, vocab.size()), 2);
    SamplerConfig s;
    s.n_tokens = 40;
    const std::string a = generate(m, vocab, s);
    EXPECT_EQ(a, generate(m, vocab, s));
    s.seed = 2;
    EXPECT_NE(a, generate(m, vocab, s));
}

TEST(Generate, CharModeLengthAndPrefix) {
    const Vocab vocab = build_char_vocab(std::vector<std::string>{"HAMLET: to be or not"});
    Model m(tiny(Arch::Linear, vocab.size()), 2);
    SamplerConfig s;
    s.n_tokens = 25;
    const std::string out = generate(m, vocab, s);
    EXPECT_EQ(out.substr(0, 7), "HAMLET:");
    EXPECT_EQ(utf8_code_points(out).size(), 7u + 25u);
}

TEST(Generate, WordModeEmitsSpaceSeparatedTokens) {
    const Vocab vocab = build_word_vocab("the cat sat on the mat");
    Model m(tiny(Arch::Transformer, vocab.size()), 2);
    SamplerConfig s;
    s.n_tokens = 6;
    s.prompt = "the   cat";
    const std::string out = generate(m, vocab, s);
    const auto words = split_whitespace(out);
    ASSERT_EQ(words.size(), 8u);
    EXPECT_EQ(out.substr(0, 8), "the cat ");
}

TEST(Generate, Errors) {
    const Vocab vocab = build_char_vocab(std::vector<std::string>{"abc"});
    Model m(tiny(Arch::Linear, vocab.size()), 1);
    SamplerConfig s;
    s.prompt = "";
    EXPECT_THROW(generate(m, vocab, s), ValueError);
    s.prompt = "abz";
    EXPECT_THROW(generate(m, vocab, s), VocabError);
    Model wrong(tiny(Arch::Linear, 7), 1);
    s.prompt = "ab";
    EXPECT_THROW(generate(wrong, vocab, s), VocabError);
}

// A model trained to memorize "abab..." must continue the alternation when
// decoding greedily.
TEST(Generate, GreedyContinuesMemorizedAlternation) {
    std::string text;
    for (int i = 0; i < 1000; ++i) text += "ab";
    const Vocab vocab = build_char_vocab(std::vector<std::string>{text});
    const std::vector<TokenId> ids = encode(vocab, text);
    ModelConfig c = tiny(Arch::Linear, vocab.size());
    c.dropout = 0;
    Model m(c, 4);
    TrainConfig t;
    t.batch_size = 16;
    t.epochs = 3;
    t.train_cap = 512;
    t.val_cap = 64;
    t.test_cap = 64;
    t.adam.learning_rate = Real(1e-2);
    const TrainResult r = train(m, DataSplits{ids, ids, ids}, t);

    SamplerConfig s;
    s.prompt = "abab";
    s.n_tokens = 20;
    s.temperature = 1e-7;
    std::string expected = "abab";
    for (int i = 0; i < 10; ++i) expected += "ab";
    EXPECT_EQ(generate(r.best, vocab, s), expected);
}
