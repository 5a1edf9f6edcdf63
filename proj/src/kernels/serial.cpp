// Reference kernels. Plain loops in the textbook order; the attention kernel
// builds the full dense masked score matrix. Tests compare kernels::omp
// against these.

#include <algorithm>
#include <cmath>
#include <vector>

#include "tinylab/kernels.hpp"

namespace tinylab::kernels::serial {

void gemm_nn(std::span<const Real> a, std::span<const Real> b, std::span<Real> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            Real sum = 0;
            for (std::size_t p = 0; p < k; ++p) sum += a[i * k + p] * b[p * n + j];
            c[i * n + j] = accumulate ? c[i * n + j] + sum : sum;
        }
    }
}

void gemm_nt(std::span<const Real> a, std::span<const Real> b, std::span<Real> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            Real sum = 0;
            for (std::size_t p = 0; p < k; ++p) sum += a[i * k + p] * b[j * k + p];
            c[i * n + j] = accumulate ? c[i * n + j] + sum : sum;
        }
    }
}

void gemm_tn(std::span<const Real> a, std::span<const Real> b, std::span<Real> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            Real sum = 0;
            for (std::size_t p = 0; p < k; ++p) sum += a[p * m + i] * b[p * n + j];
            c[i * n + j] = accumulate ? c[i * n + j] + sum : sum;
        }
    }
}

void attention_forward(std::span<const Real> q, std::span<const Real> k, std::span<const Real> v,
                       std::span<const Real> keep, AttentionDims dims, Real scale, std::span<Real> probs,
                       std::span<Real> out) {
    const std::size_t T = dims.seq_len;
    const std::size_t D = dims.head_dim;
    std::vector<Real> scores(T * T);
    for (std::size_t b = 0; b < dims.batch; ++b) {
        const std::size_t qkv = b * T * D;
        const std::size_t tt = b * T * T;
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t s = 0; s < T; ++s) {
                Real dot = 0;
                for (std::size_t d = 0; d < D; ++d) dot += q[qkv + t * D + d] * k[qkv + s * D + d];
                scores[t * T + s] = s > t ? kMaskValue : dot * scale;
            }
        }
        for (std::size_t t = 0; t < T; ++t) {
            Real row_max = scores[t * T];
            for (std::size_t s = 1; s < T; ++s) row_max = std::max(row_max, scores[t * T + s]);
            Real total = 0;
            for (std::size_t s = 0; s < T; ++s) {
                const Real e = std::exp(scores[t * T + s] - row_max);
                probs[tt + t * T + s] = e;
                total += e;
            }
            for (std::size_t s = 0; s < T; ++s) probs[tt + t * T + s] /= total;
        }
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t d = 0; d < D; ++d) {
                Real sum = 0;
                for (std::size_t s = 0; s < T; ++s) {
                    Real w = probs[tt + t * T + s];
                    if (!keep.empty()) w *= keep[tt + t * T + s];
                    sum += w * v[qkv + s * D + d];
                }
                out[qkv + t * D + d] = sum;
            }
        }
    }
}

void attention_backward(std::span<const Real> q, std::span<const Real> k, std::span<const Real> v,
                        std::span<const Real> keep, std::span<const Real> probs, std::span<const Real> dout,
                        AttentionDims dims, Real scale, std::span<Real> dq, std::span<Real> dk,
                        std::span<Real> dv) {
    const std::size_t T = dims.seq_len;
    const std::size_t D = dims.head_dim;
    std::vector<Real> dprobs(T * T);
    for (std::size_t b = 0; b < dims.batch; ++b) {
        const std::size_t qkv = b * T * D;
        const std::size_t tt = b * T * T;
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t s = 0; s < T; ++s) {
                const Real m = keep.empty() ? Real(1) : keep[tt + t * T + s];
                Real dot = 0;
                for (std::size_t d = 0; d < D; ++d) dot += dout[qkv + t * D + d] * v[qkv + s * D + d];
                dprobs[t * T + s] = dot * m;
                const Real w = probs[tt + t * T + s] * m;
                for (std::size_t d = 0; d < D; ++d) dv[qkv + s * D + d] += w * dout[qkv + t * D + d];
            }
        }
        for (std::size_t t = 0; t < T; ++t) {
            Real inner = 0;
            for (std::size_t s = 0; s < T; ++s) inner += probs[tt + t * T + s] * dprobs[t * T + s];
            for (std::size_t s = 0; s < T; ++s) {
                const Real dscore = probs[tt + t * T + s] * (dprobs[t * T + s] - inner) * scale;
                for (std::size_t d = 0; d < D; ++d) {
                    dq[qkv + t * D + d] += dscore * k[qkv + s * D + d];
                    dk[qkv + s * D + d] += dscore * q[qkv + t * D + d];
                }
            }
        }
    }
}

}  // namespace tinylab::kernels::serial
