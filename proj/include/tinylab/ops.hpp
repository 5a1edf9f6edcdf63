#pragma once

// Differentiable tensor operations.
//
// Each op computes its forward result eagerly. When a tape is active and an
// input requires gradients, the op records a backward rule that accumulates
// into the inputs' grad buffers.

#include <cstdint>
#include <random>
#include <span>

#include "tinylab/tensor.hpp"

namespace tinylab {

using TokenId = std::int32_t;
using Rng = std::mt19937_64;

inline constexpr Real kLayerNormEps = Real(1e-5);
inline constexpr Real kRopeBase = Real(10000);

/// [.., k] x [k, n] -> [.., n]. Leading dimensions of `a` are treated as rows.
Tensor matmul(const Tensor& a, const Tensor& b);

/// Row gather from a [V, d] table; output is [ids.size(), d].
Tensor embedding_lookup(const Tensor& table, std::span<const TokenId> ids);

/// Elementwise sum. `b` may match `a` exactly, or match a trailing block of
/// a's dimensions (bias vector, positional table), in which case it is
/// broadcast over the leading dimensions.
Tensor add(const Tensor& a, const Tensor& b);

Tensor relu(const Tensor& x);

/// Same data, new shape. Element order is unchanged.
Tensor reshape(const Tensor& x, Shape new_shape);
/// Collapses every dimension into one.
Tensor flatten(const Tensor& x);

/// Sum of all elements as a scalar.
Tensor sum(const Tensor& x);

/// Normalizes each row of the last dimension to zero mean and unit
/// (population) variance, then applies gain and shift.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift, Real eps = kLayerNormEps);

/// Max-subtracted softmax over the last dimension.
Tensor softmax_rows(const Tensor& x);

/// Mean negative log-likelihood in nats of `targets` under row-wise
/// softmax(logits). logits is [B, V].
Tensor cross_entropy_logits(const Tensor& logits, std::span<const TokenId> targets);

/// Per-row NLL without reduction, for evaluation (no tape).
std::vector<double> cross_entropy_rows(const Tensor& logits, std::span<const TokenId> targets);

/// Inverted dropout. Identity when !training or p == 0.
Tensor dropout(const Tensor& x, Real p, bool training, Rng& rng);

struct AttentionOptions {
    Real scale = Real(0);        // 0 means 1/sqrt(head_dim)
    Real weight_dropout = 0;     // dropout on attention weights, training only
    bool training = false;
    Rng* rng = nullptr;          // required when weight_dropout > 0 and training
};

/// Causal scaled dot-product attention over [.., T, d_h] inputs; position t
/// attends to positions 0..t. Leading dimensions index independent heads.
Tensor causal_attention(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionOptions& options = {});

/// Rotary position rotation over [.., T, d_h]: pair (2i, 2i+1) at position t
/// is rotated by angle t * base^(-2i/d_h).
Tensor rope_rotate(const Tensor& x, Real base = kRopeBase);

/// [B, T, H*d_h] -> [B, H, T, d_h].
Tensor split_heads(const Tensor& x, std::size_t heads);
/// [B, H, T, d_h] -> [B, T, H*d_h].
Tensor merge_heads(const Tensor& x);

/// [B, T, d] -> [B, d] taking position T-1.
Tensor last_position(const Tensor& x);

}  // namespace tinylab
