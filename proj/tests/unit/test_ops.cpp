#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "support/finite_diff.hpp"
#include "tinylab/errors.hpp"
#include "tinylab/ops.hpp"

using namespace tinylab;
using tinylab::testing::random_values;

namespace {

std::vector<Real> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

}  // namespace

TEST(Matmul, IdentityAndProjector) {
    Tensor eye({2, 2}, {1, 0, 0, 1});
    Tensor m({2, 2}, {1, 2, 3, 4});
    EXPECT_EQ(values(matmul(eye, m)), (std::vector<Real>{1, 2, 3, 4}));

    Tensor proj({2, 2}, {1, 0, 0, 0});
    Tensor col({2, 1}, {5, 7});
    Tensor out = matmul(proj, col);
    EXPECT_EQ(out.shape(), (Shape{2, 1}));
    EXPECT_EQ(values(out), (std::vector<Real>{5, 0}));
}

TEST(Matmul, ShapeMismatchNamesBothShapes) {
    Tensor a({2, 3});
    Tensor b({2, 3});
    try {
        matmul(a, b);
        FAIL() << "expected DimensionError";
    } catch (const DimensionError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("[2x3]"), std::string::npos) << msg;
        EXPECT_NE(msg.find("and [2x3]"), std::string::npos) << msg;
    }
}

TEST(Embedding, GatherAndScatter) {
    Tensor table = Tensor::parameter({2, 2}, {1, 1, 2, 2});
    const std::vector<TokenId> ids{1, 0, 1};
    EXPECT_EQ(values(embedding_lookup(table, ids)), (std::vector<Real>{2, 2, 1, 1, 2, 2}));

    const std::vector<TokenId> zeros{0, 0, 0, 0};
    Tape tape;
    TapeScope scope(tape);
    Tensor out = embedding_lookup(table, zeros);
    EXPECT_EQ(values(out), (std::vector<Real>{1, 1, 1, 1, 1, 1, 1, 1}));
    tape.backward(sum(out));
    EXPECT_EQ((std::vector<Real>(table.grad().begin(), table.grad().end())), (std::vector<Real>{4, 4, 0, 0}));
}

TEST(Embedding, OutOfRangeIdIsVocabError) {
    Tensor table({3, 2});
    const std::vector<TokenId> ids{0, 3};
    try {
        embedding_lookup(table, ids);
        FAIL();
    } catch (const VocabError& e) {
        EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
    }
}

TEST(Elementwise, ReluFlattenBias) {
    EXPECT_EQ(values(relu(Tensor({3}, {-1, 0, 2}))), (std::vector<Real>{0, 0, 2}));

    Tensor x({2, 3}, {0, 1, 2, 3, 4, 5});
    Tensor flat = flatten(x);
    for (std::size_t t = 0; t < 2; ++t) {
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(flat.at(t * 3 + j), x.at(t * 3 + j));
    }

    Tensor sum_out = add(Tensor({2, 2}, {0, 0, 2, 2}), Tensor({2}, {1, 1}));
    EXPECT_EQ(values(sum_out), (std::vector<Real>{1, 1, 3, 3}));
    EXPECT_THROW(add(Tensor({2, 2}), Tensor({3})), DimensionError);
    EXPECT_THROW(reshape(Tensor({2, 2}), {3}), DimensionError);
}

TEST(Elementwise, ReluGradientIsZeroAtZero) {
    Tensor x = Tensor::parameter({3}, {-1, 0, 2});
    Tape tape;
    TapeScope scope(tape);
    tape.backward(sum(relu(x)));
    EXPECT_EQ((std::vector<Real>(x.grad().begin(), x.grad().end())), (std::vector<Real>{0, 0, 1}));
}

TEST(LayerNorm, ConstantRowMapsToZero) {
    Tensor x({1, 4}, {3, 3, 3, 3});
    Tensor out = layer_norm(x, Tensor({4}, 1), Tensor({4}, 0));
    for (Real v : out.data()) EXPECT_EQ(v, 0);
}

TEST(LayerNorm, NormalizedRowIsUnchanged) {
    Tensor out = layer_norm(Tensor({1, 2}, {1, -1}), Tensor({2}, 1), Tensor({2}, 0));
    EXPECT_NEAR(out.at(0), 1, 1e-4);
    EXPECT_NEAR(out.at(1), -1, 1e-4);
    EXPECT_THROW(layer_norm(Tensor({1, 3}), Tensor({2}, 1), Tensor({2}, 0)), DimensionError);
}

TEST(Softmax, RowsSumToOne) {
    Tensor x({5, 7}, random_values(35, 3, 4.0));
    Tensor y = softmax_rows(x);
    for (std::size_t r = 0; r < 5; ++r) {
        double total = 0;
        for (std::size_t j = 0; j < 7; ++j) total += y.at(r * 7 + j);
        EXPECT_NEAR(total, 1.0, 1e-6);
    }
}

TEST(CrossEntropy, UniformLogitsGiveLogV) {
    Tensor logits({3, 65}, Real(0.25));
    const std::vector<TokenId> targets{0, 17, 64};
    EXPECT_NEAR(cross_entropy_logits(logits, targets).item(), std::log(65.0), 1e-6);
    EXPECT_NEAR(std::log(65.0), 4.1744, 1e-4);
}

TEST(CrossEntropy, LargeLogitsAreStable) {
    Tensor logits({1, 2}, {1000, 0});
    const std::vector<TokenId> targets{0};
    const Real nll = cross_entropy_logits(logits, targets).item();
    EXPECT_TRUE(std::isfinite(nll));
    EXPECT_NEAR(nll, 0, 1e-6);
    const std::vector<TokenId> wrong{1};
    EXPECT_NEAR(cross_entropy_logits(logits, wrong).item(), 1000, 1e-2);
}

TEST(CrossEntropy, NonNegativeAndTargetChecked) {
    Tensor logits({4, 6}, random_values(24, 9, 3.0));
    const std::vector<TokenId> targets{0, 1, 2, 5};
    EXPECT_GE(cross_entropy_logits(logits, targets).item(), 0);
    const std::vector<TokenId> bad{0, 1, 2, 6};
    EXPECT_THROW(cross_entropy_logits(logits, bad), VocabError);
}

TEST(Dropout, IdentityCases) {
    Rng rng(1);
    Tensor x({4}, {1, 2, 3, 4});
    EXPECT_EQ(values(dropout(x, 0, true, rng)), values(x));
    EXPECT_EQ(values(dropout(x, Real(0.5), false, rng)), values(x));
    EXPECT_THROW(dropout(x, 1, true, rng), ValueError);
    EXPECT_THROW(dropout(x, Real(-0.1), true, rng), ValueError);
}

TEST(Dropout, LawOfLargeNumbers) {
    Rng rng(42);
    const std::size_t n = 100000;
    Tensor x({n}, Real(1));
    Tensor y = dropout(x, Real(0.1), true, rng);
    std::size_t zeros = 0;
    double mean = 0;
    for (Real v : y.data()) {
        zeros += v == 0;
        mean += v;
    }
    mean /= static_cast<double>(n);
    EXPECT_NEAR(static_cast<double>(zeros) / n, 0.1, 0.01);
    EXPECT_NEAR(mean, 1.0, 0.02);
}

TEST(Attention, SinglePositionReturnsValues) {
    Tensor q({1, 1, 4}, random_values(4, 1));
    Tensor k({1, 1, 4}, random_values(4, 2));
    Tensor v({1, 1, 4}, random_values(4, 3));
    EXPECT_EQ(values(causal_attention(q, k, v)), values(v));
}

TEST(Attention, IdenticalKeysGiveUniformPrefixAverage) {
    const std::size_t T = 5, d = 3;
    Tensor q({1, T, d}, random_values(T * d, 4));
    std::vector<Real> key_row = random_values(d, 5);
    std::vector<Real> keys;
    for (std::size_t t = 0; t < T; ++t) keys.insert(keys.end(), key_row.begin(), key_row.end());
    Tensor k({1, T, d}, keys);
    Tensor v({1, T, d}, random_values(T * d, 6));
    Tensor out = causal_attention(q, k, v);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t j = 0; j < d; ++j) {
            double avg = 0;
            for (std::size_t s = 0; s <= t; ++s) avg += v.at(s * d + j);
            avg /= static_cast<double>(t + 1);
            EXPECT_NEAR(out.at(t * d + j), avg, 1e-6);
        }
    }
}

TEST(Attention, ShapeMismatch) {
    EXPECT_THROW(causal_attention(Tensor({1, 2, 4}), Tensor({1, 2, 4}), Tensor({1, 3, 4})), DimensionError);
    EXPECT_THROW(split_heads(Tensor({1, 2, 6}), 4), DimensionError);
}

TEST(Rope, ZeroPositionIsIdentityAndNormIsPreserved) {
    const std::size_t T = 6, d = 8;
    Tensor x({2, T, d}, random_values(2 * T * d, 7));
    Tensor y = rope_rotate(x);
    for (std::size_t s = 0; s < 2; ++s) {
        for (std::size_t j = 0; j < d; ++j) EXPECT_EQ(y.at(s * T * d + j), x.at(s * T * d + j));
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t i = 0; i < d / 2; ++i) {
                const std::size_t at = (s * T + t) * d + 2 * i;
                const double before = std::hypot(x.at(at), x.at(at + 1));
                const double after = std::hypot(y.at(at), y.at(at + 1));
                EXPECT_NEAR(after, before, 1e-6);
            }
        }
    }
    EXPECT_THROW(rope_rotate(Tensor({1, 2, 3})), DimensionError);
}

// Brute-force re-derivation: rotate each vector by hand and compare the
// rotated dot product with one that only uses the offset t1 - t2.
TEST(Rope, DotProductDependsOnRelativeOffsetOnly) {
    const std::size_t T = 5, d = 4;
    const std::vector<Real> qv = random_values(d, 11);
    const std::vector<Real> kv = random_values(d, 12);
    std::vector<Real> qs, ks;
    for (std::size_t t = 0; t < T; ++t) {
        qs.insert(qs.end(), qv.begin(), qv.end());
        ks.insert(ks.end(), kv.begin(), kv.end());
    }
    Tensor qr = rope_rotate(Tensor({1, T, d}, qs));
    Tensor kr = rope_rotate(Tensor({1, T, d}, ks));
    for (std::size_t t1 = 0; t1 < T; ++t1) {
        for (std::size_t t2 = 0; t2 < T; ++t2) {
            double rotated = 0;
            for (std::size_t j = 0; j < d; ++j) rotated += qr.at(t1 * d + j) * kr.at(t2 * d + j);
            // sum_i |q_i||k_i| cos(phi_q - phi_k + (t1 - t2) theta_i) for pair i.
            double relative = 0;
            for (std::size_t i = 0; i < d / 2; ++i) {
                const double theta = std::pow(10000.0, -2.0 * i / d);
                const double offset = (static_cast<double>(t1) - static_cast<double>(t2)) * theta;
                const double q0 = qv[2 * i], q1 = qv[2 * i + 1], k0 = kv[2 * i], k1 = kv[2 * i + 1];
                relative += (q0 * k0 + q1 * k1) * std::cos(offset) + (q0 * k1 - q1 * k0) * std::sin(offset);
            }
            EXPECT_NEAR(rotated, relative, 1e-5) << "t1=" << t1 << " t2=" << t2;
        }
    }
}

TEST(Backward, SumSeedsOnesAndUnusedParameterUntouched) {
    Tensor x = Tensor::parameter({2, 3}, random_values(6, 1));
    Tensor unused = Tensor::parameter({3}, random_values(3, 2));
    unused.zero_grad();
    Tape tape;
    TapeScope scope(tape);
    tape.backward(sum(x));
    for (Real g : x.grad()) EXPECT_EQ(g, 1);
    for (Real g : unused.grad()) EXPECT_EQ(g, 0);
}

TEST(Backward, RejectsNonScalarAndForeignLoss) {
    Tensor x = Tensor::parameter({2}, {1, 2});
    Tape tape;
    TapeScope scope(tape);
    Tensor y = relu(x);
    EXPECT_THROW(tape.backward(y), DimensionError);
    Tape other;
    EXPECT_THROW(other.backward(sum(x)), NumericError);
}

TEST(Backward, TapeOrderIsTopological) {
    Tensor x = Tensor::parameter({2, 2}, random_values(4, 3));
    Tape tape;
    TapeScope scope(tape);
    Tensor a = relu(x);
    Tensor b = matmul(a, x);
    Tensor c = add(b, a);
    EXPECT_LT(a.node_id(), b.node_id());
    EXPECT_LT(b.node_id(), c.node_id());
    EXPECT_EQ(x.node_id(), -1);
}

TEST(Backward, NoRecordingWithoutTape) {
    Tensor x = Tensor::parameter({2}, {1, 2});
    Tensor y = relu(x);
    EXPECT_EQ(y.node_id(), -1);
    EXPECT_FALSE(y.requires_grad());
}
