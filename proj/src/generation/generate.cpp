#include "tinylab/generation.hpp"

#include <algorithm>
#include <cmath>

#include "tinylab/errors.hpp"

namespace tinylab {

void SamplerConfig::validate() const {
    if (n_tokens < 1) throw ValueError("sampler: n_tokens must be >= 1");
    if (!(temperature > 0)) throw ValueError("sampler: temperature must be > 0");
}

std::vector<double> sampling_distribution(std::span<const Real> logits, double temperature) {
    if (logits.empty()) throw ValueError("sampling_distribution: empty logits");
    if (!(temperature > 0)) throw ValueError("sampling_distribution: temperature must be > 0");
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double total = 0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp((static_cast<double>(logits[i]) - mx) / temperature);
        total += p[i];
    }
    for (double& v : p) v /= total;
    return p;
}

TokenId sample_next(std::span<const Real> logits, double temperature, Rng& rng) {
    if (temperature < kGreedyTemperature) {
        return static_cast<TokenId>(std::max_element(logits.begin(), logits.end()) - logits.begin());
    }
    const std::vector<double> p = sampling_distribution(logits, temperature);
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double cumulative = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        cumulative += p[i];
        if (u < cumulative) return static_cast<TokenId>(i);
    }
    return static_cast<TokenId>(p.size() - 1);
}

std::vector<TokenId> generate_ids(const Model& model, std::span<const TokenId> prompt, const SamplerConfig& sampler) {
    sampler.validate();
    const std::size_t T = model.config().context_length;
    std::vector<TokenId> ids(prompt.begin(), prompt.end());
    std::vector<TokenId> window(T);
    Rng rng(sampler.seed);
    for (std::size_t step = 0; step < sampler.n_tokens; ++step) {
        const std::size_t have = std::min(T, ids.size());
        std::fill(window.begin(), window.end(), TokenId{0});
        std::copy(ids.end() - static_cast<std::ptrdiff_t>(have), ids.end(),
                  window.begin() + static_cast<std::ptrdiff_t>(T - have));
        const Tensor logits = model.forward(window);
        ids.push_back(sample_next(logits.data(), sampler.temperature, rng));
    }
    return ids;
}

std::string generate(const Model& model, const Vocab& vocab, const SamplerConfig& sampler) {
    sampler.validate();
    if (vocab.size() != model.config().vocab_size) {
        throw VocabError("generate: vocabulary has " + std::to_string(vocab.size()) + " tokens, model expects " +
                         std::to_string(model.config().vocab_size));
    }
    if (vocab.mode() == VocabMode::Char && sampler.prompt.empty()) {
        throw ValueError("generate: char-mode generation needs a non-empty prompt");
    }
    const std::vector<TokenId> prompt_ids = encode(vocab, sampler.prompt);
    const std::vector<TokenId> ids = generate_ids(model, prompt_ids, sampler);
    const std::span<const TokenId> fresh = std::span<const TokenId>(ids).subspan(prompt_ids.size());

    if (vocab.mode() == VocabMode::Char) return sampler.prompt + decode(vocab, fresh);
    std::string out;
    for (std::string_view word : split_whitespace(sampler.prompt)) {
        out += word;
        out += ' ';
    }
    out += decode(vocab, fresh);
    return out;
}

}  // namespace tinylab
