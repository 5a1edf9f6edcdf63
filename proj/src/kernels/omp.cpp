#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tinylab/kernels.hpp"

namespace tinylab::kernels::omp {

namespace {

// Block sizes keep a kKBlock x kNBlock panel of B resident in L2 while every
// row of A streams past it.
constexpr std::size_t kRowBlock = 16;
constexpr std::size_t kKBlock = 256;
constexpr std::size_t kNBlock = 1024;

// Every C element accumulates its k products in ascending order, matching
// kernels::serial up to floating-point contraction.
void gemm_nn_blocked(const Real* a, const Real* b, Real* c, std::size_t m, std::size_t k, std::size_t n,
                     bool accumulate) {
    const auto row_blocks = static_cast<std::ptrdiff_t>((m + kRowBlock - 1) / kRowBlock);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t rb = 0; rb < row_blocks; ++rb) {
        const std::size_t i0 = static_cast<std::size_t>(rb) * kRowBlock;
        const std::size_t i1 = std::min(m, i0 + kRowBlock);
        if (!accumulate) std::fill(c + i0 * n, c + i1 * n, Real(0));
        for (std::size_t j0 = 0; j0 < n; j0 += kNBlock) {
            const std::size_t j1 = std::min(n, j0 + kNBlock);
            for (std::size_t p0 = 0; p0 < k; p0 += kKBlock) {
                const std::size_t p1 = std::min(k, p0 + kKBlock);
                for (std::size_t i = i0; i < i1; ++i) {
                    Real* __restrict crow = c + i * n;
                    for (std::size_t p = p0; p < p1; ++p) {
                        const Real av = a[i * k + p];
                        if (av == Real(0)) continue;
                        const Real* __restrict brow = b + p * n;
                        for (std::size_t j = j0; j < j1; ++j) crow[j] += av * brow[j];
                    }
                }
            }
        }
    }
}

void transpose(const Real* src, std::size_t rows, std::size_t cols, std::vector<Real>& dst) {
    dst.resize(rows * cols);
    constexpr std::size_t tile = 32;
    for (std::size_t r0 = 0; r0 < rows; r0 += tile) {
        for (std::size_t c0 = 0; c0 < cols; c0 += tile) {
            const std::size_t r1 = std::min(rows, r0 + tile);
            const std::size_t c1 = std::min(cols, c0 + tile);
            for (std::size_t r = r0; r < r1; ++r) {
                for (std::size_t col = c0; col < c1; ++col) dst[col * rows + r] = src[r * cols + col];
            }
        }
    }
}

}  // namespace

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void gemm_nn(std::span<const Real> a, std::span<const Real> b, std::span<Real> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate) {
    gemm_nn_blocked(a.data(), b.data(), c.data(), m, k, n, accumulate);
}

void gemm_nt(std::span<const Real> a, std::span<const Real> b, std::span<Real> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate) {
    thread_local std::vector<Real> bt;
    transpose(b.data(), n, k, bt);
    gemm_nn_blocked(a.data(), bt.data(), c.data(), m, k, n, accumulate);
}

void gemm_tn(std::span<const Real> a, std::span<const Real> b, std::span<Real> c, std::size_t m,
             std::size_t k, std::size_t n, bool accumulate) {
    thread_local std::vector<Real> at;
    transpose(a.data(), k, m, at);
    gemm_nn_blocked(at.data(), b.data(), c.data(), m, k, n, accumulate);
}

// Scores and dP rows are built from a transposed K (or V) so the inner loop
// runs over key positions and vectorizes; a dot product over d would not.
void attention_forward(std::span<const Real> q, std::span<const Real> k, std::span<const Real> v,
                       std::span<const Real> keep, AttentionDims dims, Real scale, std::span<Real> probs,
                       std::span<Real> out) {
    const std::size_t T = dims.seq_len;
    const std::size_t D = dims.head_dim;
    const bool masked_keep = !keep.empty();
#pragma omp parallel
    {
        std::vector<Real> kt;
#pragma omp for schedule(static)
        for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(dims.batch); ++bi) {
            const auto b = static_cast<std::size_t>(bi);
            const Real* qb = q.data() + b * T * D;
            const Real* vb = v.data() + b * T * D;
            Real* pb = probs.data() + b * T * T;
            Real* ob = out.data() + b * T * D;
            const Real* keepb = masked_keep ? keep.data() + b * T * T : nullptr;
            transpose(k.data() + b * T * D, T, D, kt);
            for (std::size_t t = 0; t < T; ++t) {
                Real* __restrict prow = pb + t * T;
                std::fill(prow, prow + T, Real(0));
                for (std::size_t d = 0; d < D; ++d) {
                    const Real qv = qb[t * D + d];
                    const Real* __restrict krow = kt.data() + d * T;
                    for (std::size_t s = 0; s <= t; ++s) prow[s] += qv * krow[s];
                }
                Real row_max = kMaskValue;
                for (std::size_t s = 0; s <= t; ++s) {
                    prow[s] *= scale;
                    row_max = std::max(row_max, prow[s]);
                }
                Real total = 0;
                for (std::size_t s = 0; s <= t; ++s) {
                    prow[s] = std::exp(prow[s] - row_max);
                    total += prow[s];
                }
                for (std::size_t s = 0; s <= t; ++s) prow[s] /= total;

                Real* __restrict orow = ob + t * D;
                std::fill(orow, orow + D, Real(0));
                for (std::size_t s = 0; s <= t; ++s) {
                    const Real w = masked_keep ? prow[s] * keepb[t * T + s] : prow[s];
                    const Real* __restrict vrow = vb + s * D;
                    for (std::size_t d = 0; d < D; ++d) orow[d] += w * vrow[d];
                }
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
    const bool masked_keep = !keep.empty();
#pragma omp parallel
    {
        std::vector<Real> vt;
        std::vector<Real> dprow(T);
#pragma omp for schedule(static)
        for (std::ptrdiff_t bi = 0; bi < static_cast<std::ptrdiff_t>(dims.batch); ++bi) {
            const auto b = static_cast<std::size_t>(bi);
            const std::size_t off = b * T * D;
            const Real* pb = probs.data() + b * T * T;
            const Real* keepb = masked_keep ? keep.data() + b * T * T : nullptr;
            transpose(v.data() + off, T, D, vt);
            for (std::size_t t = 0; t < T; ++t) {
                const Real* prow = pb + t * T;
                const Real* __restrict gout = dout.data() + off + t * D;
                Real* __restrict dp = dprow.data();
                std::fill(dp, dp + t + 1, Real(0));
                for (std::size_t d = 0; d < D; ++d) {
                    const Real g = gout[d];
                    const Real* __restrict vrow = vt.data() + d * T;
                    for (std::size_t s = 0; s <= t; ++s) dp[s] += g * vrow[s];
                }
                Real inner = 0;
                for (std::size_t s = 0; s <= t; ++s) {
                    const Real m = masked_keep ? keepb[t * T + s] : Real(1);
                    dp[s] *= m;
                    inner += prow[s] * dp[s];
                    const Real w = prow[s] * m;
                    Real* __restrict dvrow = dv.data() + off + s * D;
                    for (std::size_t d = 0; d < D; ++d) dvrow[d] += w * gout[d];
                }
                Real* __restrict dqrow = dq.data() + off + t * D;
                const Real* __restrict qrow = q.data() + off + t * D;
                for (std::size_t s = 0; s <= t; ++s) {
                    const Real dscore = prow[s] * (dp[s] - inner) * scale;
                    const Real* __restrict krow = k.data() + off + s * D;
                    Real* __restrict dkrow = dk.data() + off + s * D;
                    for (std::size_t d = 0; d < D; ++d) {
                        dqrow[d] += dscore * krow[d];
                        dkrow[d] += dscore * qrow[d];
                    }
                }
            }
        }
    }
}

}  // namespace tinylab::kernels::omp
