#pragma once

// Dense compute kernels behind the autodiff ops.
//
// Two implementations share one signature set:
//   kernels::serial  straightforward loops, the reference used by tests
//   kernels::omp     cache-friendly loops parallelized with OpenMP
// The unqualified kernels:: functions forward to kernels::omp.
//
// Work is split across threads by output row only, so every output element is
// produced by the same sequence of floating-point operations no matter how many
// threads run. Results are bit-identical for any thread count.

#include <cstddef>
#include <span>

#include "tinylab/real.hpp"

namespace tinylab::kernels {

/// Geometry of a batch of causal attention problems: `batch` independent
/// (head, sequence) slices, each T x head_dim.
struct AttentionDims {
    std::size_t batch = 0;
    std::size_t seq_len = 0;
    std::size_t head_dim = 0;
};

/// Masked scores use this instead of -inf so that (-inf) * 0 never appears.
inline constexpr Real kMaskValue = Real(-1e9);

// gemm_nn:  C[m x n] (+)= A[m x k] * B[k x n]
// gemm_nt:  C[m x n] (+)= A[m x k] * B[n x k]^T
// gemm_tn:  C[m x n] (+)= A[k x m]^T * B[k x n]
// attention_forward:  probs = softmax(mask(q k^T * scale)), out = (probs * keep) v.
//   `keep` is an optional batch x T x T multiplier (inverted-dropout mask on the
//   attention weights); pass an empty span for none.
// attention_backward: accumulates the gradients of attention_forward into dq, dk, dv.

namespace serial {
void gemm_nn(std::span<const Real> a, std::span<const Real> b, std::span<Real> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate);
void gemm_nt(std::span<const Real> a, std::span<const Real> b, std::span<Real> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate);
void gemm_tn(std::span<const Real> a, std::span<const Real> b, std::span<Real> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate);
void attention_forward(std::span<const Real> q, std::span<const Real> k, std::span<const Real> v,
                       std::span<const Real> keep, AttentionDims dims, Real scale, std::span<Real> probs,
                       std::span<Real> out);
void attention_backward(std::span<const Real> q, std::span<const Real> k, std::span<const Real> v,
                        std::span<const Real> keep, std::span<const Real> probs, std::span<const Real> dout,
                        AttentionDims dims, Real scale, std::span<Real> dq, std::span<Real> dk,
                        std::span<Real> dv);
}  // namespace serial

namespace omp {
void gemm_nn(std::span<const Real> a, std::span<const Real> b, std::span<Real> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate);
void gemm_nt(std::span<const Real> a, std::span<const Real> b, std::span<Real> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate);
void gemm_tn(std::span<const Real> a, std::span<const Real> b, std::span<Real> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate);
void attention_forward(std::span<const Real> q, std::span<const Real> k, std::span<const Real> v,
                       std::span<const Real> keep, AttentionDims dims, Real scale, std::span<Real> probs,
                       std::span<Real> out);
void attention_backward(std::span<const Real> q, std::span<const Real> k, std::span<const Real> v,
                        std::span<const Real> keep, std::span<const Real> probs, std::span<const Real> dout,
                        AttentionDims dims, Real scale, std::span<Real> dq, std::span<Real> dk,
                        std::span<Real> dv);

/// Threads the OpenMP kernels will use (1 when built without OpenMP).
int max_threads();
}  // namespace omp

using omp::attention_backward;
using omp::attention_forward;
using omp::gemm_nn;
using omp::gemm_nt;
using omp::gemm_tn;

}  // namespace tinylab::kernels
