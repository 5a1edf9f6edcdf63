#include "tinylab/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string>

#include "tinylab/errors.hpp"
#include "tinylab/kernels.hpp"

namespace tinylab {

namespace {

bool needs_grad(std::initializer_list<const Tensor*> inputs) {
    if (active_tape() == nullptr) return false;
    return std::any_of(inputs.begin(), inputs.end(), [](const Tensor* t) { return t->requires_grad(); });
}

void require_defined(const Tensor& t, const char* op) {
    if (!t.defined()) throw ValueError(std::string(op) + ": undefined tensor");
}

// Shorthand used inside backward rules.
using ImplPtr = std::shared_ptr<TensorImpl>;

std::span<Real> grad_of(const ImplPtr& impl) { return {impl->grad_buffer(), impl->data.size()}; }

}  // namespace

// ---------------------------------------------------------------- matmul

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_defined(a, "matmul");
    require_defined(b, "matmul");
    if (a.rank() < 1 || b.rank() != 2 || a.shape().back() != b.dim(0)) {
        throw DimensionError("matmul: incompatible shapes " + shape_to_string(a.shape()) + " and " +
                             shape_to_string(b.shape()));
    }
    const std::size_t k = b.dim(0);
    const std::size_t n = b.dim(1);
    const std::size_t m = a.numel() / k;
    Shape out_shape(a.shape().begin(), a.shape().end() - 1);
    out_shape.push_back(n);
    Tensor out(std::move(out_shape));
    kernels::gemm_nn(a.data(), b.data(), out.data(), m, k, n, false);

    if (needs_grad({&a, &b})) {
        active_tape()->record(out, [ai = a.impl(), bi = b.impl(), oi = out.impl(), m, k, n] {
            std::span<const Real> g = oi->grad;
            if (ai->requires_grad) kernels::gemm_nt(g, bi->data, grad_of(ai), m, n, k, true);
            if (bi->requires_grad) kernels::gemm_tn(ai->data, g, grad_of(bi), k, m, n, true);
        });
    }
    return out;
}

// ---------------------------------------------------------------- embedding

Tensor embedding_lookup(const Tensor& table, std::span<const TokenId> ids) {
    require_defined(table, "embedding_lookup");
    if (table.rank() != 2) {
        throw DimensionError("embedding_lookup: table must be [V, d], got " + shape_to_string(table.shape()));
    }
    if (ids.empty()) throw DimensionError("embedding_lookup: empty id sequence");
    const std::size_t vocab = table.dim(0);
    const std::size_t width = table.dim(1);
    for (TokenId id : ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= vocab) {
            throw VocabError("embedding_lookup: token id " + std::to_string(id) + " out of range [0, " +
                             std::to_string(vocab) + ")");
        }
    }
    Tensor out(Shape{ids.size(), width});
    auto src = table.data();
    auto dst = out.data();
    for (std::size_t r = 0; r < ids.size(); ++r) {
        std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(ids[r]) * width), width,
                    dst.begin() + static_cast<std::ptrdiff_t>(r * width));
    }
    if (needs_grad({&table})) {
        std::vector<TokenId> saved(ids.begin(), ids.end());
        active_tape()->record(out, [ti = table.impl(), oi = out.impl(), saved = std::move(saved), width] {
            auto gt = grad_of(ti);
            const auto& g = oi->grad;
            for (std::size_t r = 0; r < saved.size(); ++r) {
                Real* row = gt.data() + static_cast<std::size_t>(saved[r]) * width;
                for (std::size_t j = 0; j < width; ++j) row[j] += g[r * width + j];
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------- elementwise

Tensor add(const Tensor& a, const Tensor& b) {
    require_defined(a, "add");
    require_defined(b, "add");
    const Shape& sa = a.shape();
    const Shape& sb = b.shape();
    const bool trailing = sb.size() <= sa.size() && std::equal(sb.rbegin(), sb.rend(), sa.rbegin());
    if (!trailing) {
        throw DimensionError("add: cannot broadcast " + shape_to_string(sb) + " onto " + shape_to_string(sa));
    }
    const std::size_t block = b.numel();
    const std::size_t reps = a.numel() / block;
    Tensor out(sa);
    auto x = a.data();
    auto y = b.data();
    auto z = out.data();
    for (std::size_t r = 0; r < reps; ++r) {
        for (std::size_t j = 0; j < block; ++j) z[r * block + j] = x[r * block + j] + y[j];
    }
    if (needs_grad({&a, &b})) {
        active_tape()->record(out, [ai = a.impl(), bi = b.impl(), oi = out.impl(), block, reps] {
            const auto& g = oi->grad;
            if (ai->requires_grad) {
                auto ga = grad_of(ai);
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
            }
            if (bi->requires_grad) {
                auto gb = grad_of(bi);
                for (std::size_t r = 0; r < reps; ++r) {
                    for (std::size_t j = 0; j < block; ++j) gb[j] += g[r * block + j];
                }
            }
        });
    }
    return out;
}

Tensor relu(const Tensor& x) {
    require_defined(x, "relu");
    Tensor out(x.shape());
    auto in = x.data();
    auto o = out.data();
    for (std::size_t i = 0; i < in.size(); ++i) o[i] = in[i] > Real(0) ? in[i] : Real(0);
    if (needs_grad({&x})) {
        active_tape()->record(out, [xi = x.impl(), oi = out.impl()] {
            auto gx = grad_of(xi);
            const auto& g = oi->grad;
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (xi->data[i] > Real(0)) gx[i] += g[i];
            }
        });
    }
    return out;
}

Tensor reshape(const Tensor& x, Shape new_shape) {
    require_defined(x, "reshape");
    if (shape_numel(new_shape) != x.numel()) {
        throw DimensionError("reshape: cannot view " + shape_to_string(x.shape()) + " as " +
                             shape_to_string(new_shape));
    }
    Tensor out(std::move(new_shape), std::vector<Real>(x.data().begin(), x.data().end()));
    if (needs_grad({&x})) {
        active_tape()->record(out, [xi = x.impl(), oi = out.impl()] {
            auto gx = grad_of(xi);
            const auto& g = oi->grad;
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
        });
    }
    return out;
}

Tensor flatten(const Tensor& x) { return reshape(x, Shape{x.numel()}); }

Tensor sum(const Tensor& x) {
    require_defined(x, "sum");
    double total = 0;
    for (Real v : x.data()) total += v;
    Tensor out = Tensor::scalar(static_cast<Real>(total));
    if (needs_grad({&x})) {
        active_tape()->record(out, [xi = x.impl(), oi = out.impl()] {
            auto gx = grad_of(xi);
            const Real g = oi->grad[0];
            for (Real& v : gx) v += g;
        });
    }
    return out;
}

// ---------------------------------------------------------------- layer norm

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift, Real eps) {
    require_defined(x, "layer_norm");
    const std::size_t d = x.rank() ? x.shape().back() : 0;
    if (gain.rank() != 1 || shift.rank() != 1 || gain.dim(0) != d || shift.dim(0) != d) {
        throw DimensionError("layer_norm: input " + shape_to_string(x.shape()) + " with gain " +
                             shape_to_string(gain.shape()) + " and shift " + shape_to_string(shift.shape()));
    }
    const std::size_t rows = x.numel() / d;
    Tensor out(x.shape());
    std::vector<Real> xhat(x.numel());
    std::vector<Real> rstd(rows);
    const Real* in = x.data().data();
    const Real* gv = gain.data().data();
    const Real* sv = shift.data().data();
    Real* o = out.data().data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ri = 0; ri < static_cast<std::ptrdiff_t>(rows); ++ri) {
        const auto r = static_cast<std::size_t>(ri);
        const Real* row = in + r * d;
        double mean = 0;
        for (std::size_t j = 0; j < d; ++j) mean += row[j];
        mean /= static_cast<double>(d);
        double var = 0;
        for (std::size_t j = 0; j < d; ++j) var += (row[j] - mean) * (row[j] - mean);
        var /= static_cast<double>(d);
        const double inv = 1.0 / std::sqrt(var + static_cast<double>(eps));
        rstd[r] = static_cast<Real>(inv);
        for (std::size_t j = 0; j < d; ++j) {
            const auto h = static_cast<Real>((row[j] - mean) * inv);
            xhat[r * d + j] = h;
            o[r * d + j] = h * gv[j] + sv[j];
        }
    }
    if (needs_grad({&x, &gain, &shift})) {
        active_tape()->record(out, [xi = x.impl(), gi = gain.impl(), si = shift.impl(), oi = out.impl(),
                                    xhat = std::move(xhat), rstd = std::move(rstd), rows, d] {
            const auto& g = oi->grad;
            if (gi->requires_grad || si->requires_grad) {
                auto gg = grad_of(gi);
                auto gs = grad_of(si);
                for (std::size_t r = 0; r < rows; ++r) {
                    for (std::size_t j = 0; j < d; ++j) {
                        gg[j] += g[r * d + j] * xhat[r * d + j];
                        gs[j] += g[r * d + j];
                    }
                }
            }
            if (!xi->requires_grad) return;
            Real* gx = grad_of(xi).data();
            const Real* gain_data = gi->data.data();
#pragma omp parallel for schedule(static)
            for (std::ptrdiff_t ri = 0; ri < static_cast<std::ptrdiff_t>(rows); ++ri) {
                const auto r = static_cast<std::size_t>(ri);
                double mean_dh = 0;
                double mean_dh_h = 0;
                for (std::size_t j = 0; j < d; ++j) {
                    const double dh = static_cast<double>(g[r * d + j]) * gain_data[j];
                    mean_dh += dh;
                    mean_dh_h += dh * xhat[r * d + j];
                }
                mean_dh /= static_cast<double>(d);
                mean_dh_h /= static_cast<double>(d);
                for (std::size_t j = 0; j < d; ++j) {
                    const double dh = static_cast<double>(g[r * d + j]) * gain_data[j];
                    gx[r * d + j] +=
                        static_cast<Real>(rstd[r] * (dh - mean_dh - xhat[r * d + j] * mean_dh_h));
                }
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------- softmax / loss

Tensor softmax_rows(const Tensor& x) {
    require_defined(x, "softmax_rows");
    const std::size_t d = x.shape().back();
    const std::size_t rows = x.numel() / d;
    Tensor out(x.shape());
    auto in = x.data();
    auto o = out.data();
    for (std::size_t r = 0; r < rows; ++r) {
        const Real mx = *std::max_element(in.begin() + static_cast<std::ptrdiff_t>(r * d),
                                          in.begin() + static_cast<std::ptrdiff_t>((r + 1) * d));
        double total = 0;
        for (std::size_t j = 0; j < d; ++j) total += std::exp(static_cast<double>(in[r * d + j] - mx));
        for (std::size_t j = 0; j < d; ++j) {
            o[r * d + j] = static_cast<Real>(std::exp(static_cast<double>(in[r * d + j] - mx)) / total);
        }
    }
    if (needs_grad({&x})) {
        active_tape()->record(out, [xi = x.impl(), oi = out.impl(), rows, d] {
            auto gx = grad_of(xi);
            const auto& g = oi->grad;
            const auto& y = oi->data;
            for (std::size_t r = 0; r < rows; ++r) {
                double inner = 0;
                for (std::size_t j = 0; j < d; ++j) inner += static_cast<double>(g[r * d + j]) * y[r * d + j];
                for (std::size_t j = 0; j < d; ++j) {
                    gx[r * d + j] += static_cast<Real>(y[r * d + j] * (g[r * d + j] - inner));
                }
            }
        });
    }
    return out;
}

namespace {

void check_logits(const Tensor& logits, std::span<const TokenId> targets) {
    if (logits.rank() != 2 || logits.dim(0) != targets.size()) {
        throw DimensionError("cross_entropy: logits " + shape_to_string(logits.shape()) + " vs " +
                             std::to_string(targets.size()) + " targets");
    }
    const std::size_t vocab = logits.dim(1);
    for (TokenId t : targets) {
        if (t < 0 || static_cast<std::size_t>(t) >= vocab) {
            throw VocabError("cross_entropy: target id " + std::to_string(t) + " out of range [0, " +
                             std::to_string(vocab) + ")");
        }
    }
}

// Writes softmax probabilities of row r into probs (if non-null) and returns
// -log p(target).
double row_nll(const Real* row, std::size_t vocab, TokenId target, Real* probs) {
    const Real mx = *std::max_element(row, row + vocab);
    double total = 0;
    for (std::size_t j = 0; j < vocab; ++j) total += std::exp(static_cast<double>(row[j]) - mx);
    const double log_total = std::log(total);
    if (probs != nullptr) {
        for (std::size_t j = 0; j < vocab; ++j) {
            probs[j] = static_cast<Real>(std::exp(static_cast<double>(row[j]) - mx - log_total));
        }
    }
    return log_total - (static_cast<double>(row[static_cast<std::size_t>(target)]) - mx);
}

}  // namespace

Tensor cross_entropy_logits(const Tensor& logits, std::span<const TokenId> targets) {
    require_defined(logits, "cross_entropy_logits");
    check_logits(logits, targets);
    const std::size_t batch = logits.dim(0);
    const std::size_t vocab = logits.dim(1);
    const bool track = needs_grad({&logits});
    std::vector<Real> probs(track ? logits.numel() : 0);
    double total = 0;
    for (std::size_t r = 0; r < batch; ++r) {
        total += row_nll(logits.data().data() + r * vocab, vocab, targets[r], track ? probs.data() + r * vocab : nullptr);
    }
    Tensor out = Tensor::scalar(static_cast<Real>(total / static_cast<double>(batch)));
    if (track) {
        std::vector<TokenId> saved(targets.begin(), targets.end());
        active_tape()->record(out, [li = logits.impl(), oi = out.impl(), probs = std::move(probs),
                                    saved = std::move(saved), batch, vocab] {
            auto gl = grad_of(li);
            const Real scale = oi->grad[0] / static_cast<Real>(batch);
            for (std::size_t r = 0; r < batch; ++r) {
                for (std::size_t j = 0; j < vocab; ++j) gl[r * vocab + j] += probs[r * vocab + j] * scale;
                gl[r * vocab + static_cast<std::size_t>(saved[r])] -= scale;
            }
        });
    }
    return out;
}

std::vector<double> cross_entropy_rows(const Tensor& logits, std::span<const TokenId> targets) {
    require_defined(logits, "cross_entropy_rows");
    check_logits(logits, targets);
    const std::size_t vocab = logits.dim(1);
    std::vector<double> nll(targets.size());
    for (std::size_t r = 0; r < targets.size(); ++r) {
        nll[r] = row_nll(logits.data().data() + r * vocab, vocab, targets[r], nullptr);
    }
    return nll;
}

// ---------------------------------------------------------------- dropout

namespace {

// Each 64-bit draw yields two 32-bit uniforms; an element is dropped when
// its uniform falls below p * 2^32.
void fill_keep_mask(std::vector<Real>& mask, Real p, Real keep_scale, Rng& rng) {
    const auto threshold = static_cast<std::uint64_t>(std::ldexp(static_cast<double>(p), 32));
    std::size_t i = 0;
    for (; i + 1 < mask.size(); i += 2) {
        const std::uint64_t bits = rng();
        mask[i] = (bits & 0xffffffffu) < threshold ? Real(0) : keep_scale;
        mask[i + 1] = (bits >> 32) < threshold ? Real(0) : keep_scale;
    }
    if (i < mask.size()) mask[i] = (rng() & 0xffffffffu) < threshold ? Real(0) : keep_scale;
}

}  // namespace

Tensor dropout(const Tensor& x, Real p, bool training, Rng& rng) {
    require_defined(x, "dropout");
    if (!(p >= Real(0) && p < Real(1))) {
        throw ValueError("dropout: probability must be in [0, 1), got " + std::to_string(p));
    }
    if (!training || p == Real(0)) return x;
    const Real keep_scale = Real(1) / (Real(1) - p);
    std::vector<Real> mask(x.numel());
    fill_keep_mask(mask, p, keep_scale, rng);
    Tensor out(x.shape());
    auto in = x.data();
    auto o = out.data();
    for (std::size_t i = 0; i < mask.size(); ++i) o[i] = in[i] * mask[i];
    if (needs_grad({&x})) {
        active_tape()->record(out, [xi = x.impl(), oi = out.impl(), mask = std::move(mask)] {
            auto gx = grad_of(xi);
            const auto& g = oi->grad;
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * mask[i];
        });
    }
    return out;
}

// ---------------------------------------------------------------- attention

Tensor causal_attention(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionOptions& options) {
    require_defined(q, "causal_attention");
    if (q.rank() < 2 || q.shape() != k.shape() || q.shape() != v.shape()) {
        throw DimensionError("causal_attention: q " + shape_to_string(q.shape()) + ", k " +
                             shape_to_string(k.shape()) + ", v " + shape_to_string(v.shape()));
    }
    kernels::AttentionDims dims;
    dims.head_dim = q.shape().back();
    dims.seq_len = q.shape()[q.rank() - 2];
    dims.batch = q.numel() / (dims.head_dim * dims.seq_len);
    const Real scale = options.scale > Real(0) ? options.scale
                                               : Real(1) / std::sqrt(static_cast<Real>(dims.head_dim));

    std::vector<Real> keep;
    const Real p = options.weight_dropout;
    if (!(p >= Real(0) && p < Real(1))) {
        throw ValueError("causal_attention: weight dropout must be in [0, 1), got " + std::to_string(p));
    }
    if (options.training && p > Real(0)) {
        if (options.rng == nullptr) throw ValueError("causal_attention: weight dropout needs an rng");
        keep.resize(dims.batch * dims.seq_len * dims.seq_len);
        fill_keep_mask(keep, p, Real(1) / (Real(1) - p), *options.rng);
    }

    std::vector<Real> probs(dims.batch * dims.seq_len * dims.seq_len);
    Tensor out(q.shape());
    kernels::attention_forward(q.data(), k.data(), v.data(), keep, dims, scale, probs, out.data());

    if (needs_grad({&q, &k, &v})) {
        active_tape()->record(out, [qi = q.impl(), ki = k.impl(), vi = v.impl(), oi = out.impl(),
                                    probs = std::move(probs), keep = std::move(keep), dims, scale] {
            // Inputs that do not need gradients get a throwaway buffer.
            std::vector<Real> sq, sk, sv;
            auto sink = [](const ImplPtr& impl, std::vector<Real>& scratch) -> std::span<Real> {
                if (impl->requires_grad) return grad_of(impl);
                scratch.assign(impl->data.size(), Real(0));
                return scratch;
            };
            kernels::attention_backward(qi->data, ki->data, vi->data, keep, probs, oi->grad, dims, scale,
                                        sink(qi, sq), sink(ki, sk), sink(vi, sv));
        });
    }
    return out;
}

// ---------------------------------------------------------------- rope

Tensor rope_rotate(const Tensor& x, Real base) {
    require_defined(x, "rope_rotate");
    if (x.rank() < 2) throw DimensionError("rope_rotate: expected [.., T, d_h], got " + shape_to_string(x.shape()));
    const std::size_t dh = x.shape().back();
    const std::size_t T = x.shape()[x.rank() - 2];
    if (dh % 2 != 0) throw DimensionError("rope_rotate: head dimension " + std::to_string(dh) + " is odd");
    const std::size_t half = dh / 2;
    const std::size_t slices = x.numel() / (T * dh);

    std::vector<Real> cosines(T * half);
    std::vector<Real> sines(T * half);
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t i = 0; i < half; ++i) {
            const double freq = std::pow(static_cast<double>(base), -2.0 * static_cast<double>(i) / static_cast<double>(dh));
            const double angle = static_cast<double>(t) * freq;
            cosines[t * half + i] = static_cast<Real>(std::cos(angle));
            sines[t * half + i] = static_cast<Real>(std::sin(angle));
        }
    }

    Tensor out(x.shape());
    auto in = x.data();
    auto o = out.data();
    for (std::size_t s = 0; s < slices; ++s) {
        for (std::size_t t = 0; t < T; ++t) {
            const std::size_t row = (s * T + t) * dh;
            for (std::size_t i = 0; i < half; ++i) {
                const Real c = cosines[t * half + i];
                const Real sn = sines[t * half + i];
                const Real x0 = in[row + 2 * i];
                const Real x1 = in[row + 2 * i + 1];
                o[row + 2 * i] = x0 * c - x1 * sn;
                o[row + 2 * i + 1] = x0 * sn + x1 * c;
            }
        }
    }
    if (needs_grad({&x})) {
        active_tape()->record(out, [xi = x.impl(), oi = out.impl(), cosines = std::move(cosines),
                                    sines = std::move(sines), slices, T, half, dh] {
            auto gx = grad_of(xi);
            const auto& g = oi->grad;
            for (std::size_t s = 0; s < slices; ++s) {
                for (std::size_t t = 0; t < T; ++t) {
                    const std::size_t row = (s * T + t) * dh;
                    for (std::size_t i = 0; i < half; ++i) {
                        const Real c = cosines[t * half + i];
                        const Real sn = sines[t * half + i];
                        const Real g0 = g[row + 2 * i];
                        const Real g1 = g[row + 2 * i + 1];
                        gx[row + 2 * i] += g0 * c + g1 * sn;
                        gx[row + 2 * i + 1] += g1 * c - g0 * sn;
                    }
                }
            }
        });
    }
    return out;
}

// ---------------------------------------------------------------- head layout

namespace {

// Copies between [B, T, H, dh] (src/dst "merged") and [B, H, T, dh] ("split").
void permute_heads(const Real* src, Real* dst, std::size_t B, std::size_t T, std::size_t H, std::size_t dh,
                   bool to_split, bool accumulate) {
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t h = 0; h < H; ++h) {
                const std::size_t merged = ((b * T + t) * H + h) * dh;
                const std::size_t split = ((b * H + h) * T + t) * dh;
                const Real* from = src + (to_split ? merged : split);
                Real* to = dst + (to_split ? split : merged);
                for (std::size_t e = 0; e < dh; ++e) to[e] = accumulate ? to[e] + from[e] : from[e];
            }
        }
    }
}

}  // namespace

Tensor split_heads(const Tensor& x, std::size_t heads) {
    require_defined(x, "split_heads");
    if (x.rank() != 3) throw DimensionError("split_heads: expected [B, T, d], got " + shape_to_string(x.shape()));
    const std::size_t B = x.dim(0), T = x.dim(1), d = x.dim(2);
    if (heads == 0 || d % heads != 0) {
        throw DimensionError("split_heads: " + std::to_string(heads) + " heads do not divide d_model " +
                             std::to_string(d));
    }
    const std::size_t dh = d / heads;
    Tensor out(Shape{B, heads, T, dh});
    permute_heads(x.data().data(), out.data().data(), B, T, heads, dh, true, false);
    if (needs_grad({&x})) {
        active_tape()->record(out, [xi = x.impl(), oi = out.impl(), B, T, heads, dh] {
            permute_heads(oi->grad.data(), grad_of(xi).data(), B, T, heads, dh, false, true);
        });
    }
    return out;
}

Tensor merge_heads(const Tensor& x) {
    require_defined(x, "merge_heads");
    if (x.rank() != 4) throw DimensionError("merge_heads: expected [B, H, T, d_h], got " + shape_to_string(x.shape()));
    const std::size_t B = x.dim(0), H = x.dim(1), T = x.dim(2), dh = x.dim(3);
    Tensor out(Shape{B, T, H * dh});
    permute_heads(x.data().data(), out.data().data(), B, T, H, dh, false, false);
    if (needs_grad({&x})) {
        active_tape()->record(out, [xi = x.impl(), oi = out.impl(), B, T, H, dh] {
            permute_heads(oi->grad.data(), grad_of(xi).data(), B, T, H, dh, true, true);
        });
    }
    return out;
}

Tensor last_position(const Tensor& x) {
    require_defined(x, "last_position");
    if (x.rank() != 3) throw DimensionError("last_position: expected [B, T, d], got " + shape_to_string(x.shape()));
    const std::size_t B = x.dim(0), T = x.dim(1), d = x.dim(2);
    Tensor out(Shape{B, d});
    auto in = x.data();
    auto o = out.data();
    for (std::size_t b = 0; b < B; ++b) {
        std::copy_n(in.begin() + static_cast<std::ptrdiff_t>((b * T + T - 1) * d), d,
                    o.begin() + static_cast<std::ptrdiff_t>(b * d));
    }
    if (needs_grad({&x})) {
        active_tape()->record(out, [xi = x.impl(), oi = out.impl(), B, T, d] {
            auto gx = grad_of(xi);
            const auto& g = oi->grad;
            for (std::size_t b = 0; b < B; ++b) {
                for (std::size_t j = 0; j < d; ++j) gx[(b * T + T - 1) * d + j] += g[b * d + j];
            }
        });
    }
    return out;
}

}  // namespace tinylab
