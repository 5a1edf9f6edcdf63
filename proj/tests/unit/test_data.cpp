#include <gtest/gtest.h>

#include <set>

#include "support/corpus.hpp"
#include "tinylab/errors.hpp"
#include "tinylab/vocab.hpp"
#include "tinylab/windows.hpp"

using namespace tinylab;

TEST(CharVocab, SortedByCodePoint) {
    const std::vector<std::string> texts{"ab", "bc"};
    Vocab v = build_char_vocab(texts);
    ASSERT_EQ(v.size(), 3u);
    EXPECT_EQ(*v.find("a"), 0);
    EXPECT_EQ(*v.find("b"), 1);
    EXPECT_EQ(*v.find("c"), 2);
    EXPECT_FALSE(v.unk_id());
}

TEST(CharVocab, UnionIsIdempotent) {
    const std::string text = "to be or not to be";
    const std::vector<std::string> once{text};
    const std::vector<std::string> thrice{text, text, text};
    EXPECT_EQ(build_char_vocab(once), build_char_vocab(thrice));
}

TEST(CharVocab, MultiByteCodePoints) {
    const std::vector<std::string> texts{"é a", "ß"};
    Vocab v = build_char_vocab(texts);
    EXPECT_EQ(v.size(), 4u);  // ' ', 'a', 'é', 'ß'
    EXPECT_EQ(v.token(0), " ");
    EXPECT_EQ(v.token(2), "ß");  // U+00DF < U+00E9
    EXPECT_EQ(v.token(3), "é");
    const auto ids = encode(v, "aßé");
    EXPECT_EQ(ids.size(), 3u);
    EXPECT_EQ(decode(v, ids), "aßé");
}

TEST(CharVocab, RoundTripAndUnknownCharacter) {
    const std::vector<std::string> texts{"HAMLET:\nTo be, or not to be"};
    Vocab v = build_char_vocab(texts);
    const std::string sample = "To be: HAMLET";
    EXPECT_EQ(decode(v, encode(v, sample)), sample);
    try {
        encode(v, "z");
        FAIL();
    } catch (const VocabError& e) {
        EXPECT_NE(std::string(e.what()).find("'z'"), std::string::npos);
    }
}

TEST(WordVocab, FirstOccurrenceOrderAndUnk) {
    Vocab plain = build_word_vocab("a b a", std::nullopt);
    EXPECT_EQ(plain.size(), 2u);
    EXPECT_EQ(*plain.find("a"), 0);
    EXPECT_EQ(*plain.find("b"), 1);
    EXPECT_THROW(encode(plain, "foo"), VocabError);

    Vocab with_unk = build_word_vocab("a b a");
    EXPECT_EQ(with_unk.size(), 3u);
    ASSERT_TRUE(with_unk.unk_id());
    EXPECT_EQ(encode(with_unk, "foo"), (std::vector<TokenId>{*with_unk.unk_id()}));

    Vocab present = build_word_vocab("x <unk> y");
    EXPECT_EQ(present.size(), 3u);
    EXPECT_EQ(*present.unk_id(), 1);

    EXPECT_THROW(build_word_vocab("  \n "), VocabError);
}

TEST(WordVocab, EncodeOneIdPerTokenAndJoinWithSpaces) {
    Vocab v = build_word_vocab("the cat sat on the mat");
    const auto ids = encode(v, "the  cat\nsat");
    EXPECT_EQ(ids.size(), 3u);
    EXPECT_EQ(decode(v, ids), "the cat sat");
}

TEST(WordVocab, RecountingEncodedTrainIdsReproducesV) {
    const std::string train = tinylab::testing::synthetic_play(200);
    Vocab v = build_word_vocab(train, std::nullopt);
    const auto ids = encode(v, train);
    EXPECT_EQ(std::set<TokenId>(ids.begin(), ids.end()).size(), v.size());
}

TEST(Windows, ExhaustiveWhenShort) {
    const std::size_t T = 4;
    std::vector<TokenId> ids{10, 11, 12, 13, 14, 15};  // T + 2
    WindowStream stream(ids, T, SplitSpec{Split::Val, 100, 7});
    ASSERT_EQ(stream.size(), 2u);
    auto first = stream.next();
    auto second = stream.next();
    EXPECT_FALSE(stream.next());
    EXPECT_EQ(first->target, ids[T]);
    EXPECT_EQ(second->target, ids[T + 1]);
    EXPECT_THROW(WindowStream(std::span<const TokenId>(ids).first(T), T, SplitSpec{}), ValueError);
}

TEST(Windows, SingleCapIsDeterministic) {
    std::vector<TokenId> ids(500);
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<TokenId>(i % 50);
    const SplitSpec spec{Split::Test, 1, 99};
    const auto a = window_starts(ids.size(), 8, spec);
    const auto b = window_starts(ids.size(), 8, spec);
    ASSERT_EQ(a.size(), 1u);
    EXPECT_EQ(a, b);
}

TEST(Windows, CapSamplesWithoutReplacementAndReconstructs) {
    const std::size_t T = 128;
    std::vector<TokenId> ids(1'000'000);
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<TokenId>((i * 7919) % 65);
    WindowStream stream(ids, T, SplitSpec{Split::Train, 50'000, 3});
    ASSERT_EQ(stream.size(), 50'000u);
    std::set<std::size_t> distinct(stream.starts().begin(), stream.starts().end());
    EXPECT_EQ(distinct.size(), 50'000u);
    for (std::size_t i = 0; i < stream.size(); i += 997) {
        const WindowExample ex = stream.at(i);
        ASSERT_LE(ex.start + T, ids.size() - 1);
        for (std::size_t j = 0; j < T; ++j) ASSERT_EQ(ex.context[j], ids[ex.start + j]);
        ASSERT_EQ(ex.target, ids[ex.start + T]);
    }
}

TEST(Windows, EvalStreamsFixedTrainResampledPerEpoch) {
    const std::size_t n = 20'000;
    const SplitSpec val{Split::Val, 1000, 5};
    EXPECT_EQ(window_starts(n, 16, val, 0), window_starts(n, 16, val, 3));

    SplitSpec train{Split::Train, 1000, 5};
    const auto e0 = window_starts(n, 16, train, 0);
    const auto e1 = window_starts(n, 16, train, 1);
    EXPECT_NE(e0, e1);
    EXPECT_EQ(e0, window_starts(n, 16, train, 0));

    train.resample_each_epoch = false;
    auto f0 = window_starts(n, 16, train, 0);
    auto f1 = window_starts(n, 16, train, 1);
    EXPECT_NE(f0, f1);  // order differs
    std::sort(f0.begin(), f0.end());
    std::sort(f1.begin(), f1.end());
    EXPECT_EQ(f0, f1);  // same subset
}

TEST(TinyShakespeare, VocabularyHas65Characters) {
    auto files = tinylab::testing::tiny_shakespeare_files();
    if (!files) GTEST_SKIP() << "TINYLAB_DATA_DIR/tinyshakespeare not present";
    std::vector<std::string> texts;
    for (const auto& f : *files) texts.push_back(read_text_file(f));
    Vocab v = build_char_vocab(texts);
    EXPECT_EQ(v.size(), 65u);
    const auto train_ids = encode(v, texts[0]);
    WindowStream stream(train_ids, 128, SplitSpec{Split::Train, 50'000, 1});
    EXPECT_EQ(stream.size(), 50'000u);
}
