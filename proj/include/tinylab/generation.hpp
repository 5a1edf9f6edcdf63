#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tinylab/model.hpp"
#include "tinylab/vocab.hpp"

namespace tinylab {

struct SamplerConfig {
    std::size_t n_tokens = 100;
    double temperature = 1.0;
    std::uint64_t seed = 1;
    std::string prompt = "HAMLET:";

    void validate() const;
};

/// Below this temperature sampling becomes argmax.
inline constexpr double kGreedyTemperature = 1e-6;

/// softmax(logits / temperature) in double precision.
std::vector<double> sampling_distribution(std::span<const Real> logits, double temperature);

/// One draw from softmax(logits / temperature), or the argmax (lowest id on
/// ties) when temperature < kGreedyTemperature.
TokenId sample_next(std::span<const Real> logits, double temperature, Rng& rng);

/// Appends n_tokens sampled ids to the prompt ids. The model always sees
/// exactly T ids: the most recent T, left-padded with id 0 while fewer exist.
std::vector<TokenId> generate_ids(const Model& model, std::span<const TokenId> prompt, const SamplerConfig& sampler);

/// Text continuation of sampler.prompt: the prompt followed by n_tokens new
/// tokens (characters in char mode, space-separated words in word mode).
/// Word-mode prompts are whitespace-normalized.
std::string generate(const Model& model, const Vocab& vocab, const SamplerConfig& sampler);

}  // namespace tinylab
