#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "tinylab/model.hpp"
#include "tinylab/windows.hpp"

namespace tinylab {

struct AdamOptions {
    Real learning_rate = Real(3e-4);
    Real beta1 = Real(0.9);
    Real beta2 = Real(0.999);
    Real eps = Real(1e-8);

    bool operator==(const AdamOptions&) const = default;
};

/// Optimization recipe for one run.
struct TrainConfig {
    AdamOptions adam;
    std::size_t batch_size = 64;
    std::size_t epochs = 4;
    std::size_t train_cap = 50'000;
    std::size_t val_cap = 10'000;
    std::size_t test_cap = 10'000;
    std::optional<std::size_t> early_stop_patience;  // word-level runs only
    std::uint64_t seed = 1;
    std::uint64_t eval_seed = 1234;  // selects the fixed val/test windows
    bool resample_each_epoch = true;

    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

/// First- and second-moment buffers mirroring each parameter.
struct AdamState {
    std::vector<std::vector<Real>> m;
    std::vector<std::vector<Real>> v;
    std::uint64_t step = 0;
};

/// One bias-corrected Adam update from the parameters' current gradients.
/// Buffers are created on the first call. Gradients are left in place.
void adam_step(std::span<NamedParameter> params, AdamState& state, const AdamOptions& options);

/// Token ids of the three splits, encoded with the model's vocabulary.
struct DataSplits {
    std::vector<TokenId> train;
    std::vector<TokenId> val;
    std::vector<TokenId> test;
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double train_nll = 0;   // running mean over the epoch's batches
    double val_nll = 0;
};

struct RunReport {
    std::vector<EpochRecord> epochs;
    std::size_t best_epoch = 0;
    double best_val_nll = 0;
    double test_nll = 0;  // of the best checkpoint
    double seconds = 0;
    std::size_t positions_per_epoch = 0;
};

struct TrainResult {
    RunReport report;
    Model best;  // deep copy taken at best_epoch
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Trains `model` in place. Runs config.epochs passes, or fewer when
/// early_stop_patience consecutive epochs fail to improve validation NLL.
/// Throws NumericError on a non-finite training loss.
TrainResult train(Model& model, const DataSplits& data, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Fixed val/test stream as used during training.
WindowStream eval_stream(std::span<const TokenId> ids, std::size_t context_length, Split split,
                         const TrainConfig& config);

/// Mean NLL in nats of each window's target, eval mode. Independent of
/// batch_size up to float rounding of the logits.
double evaluate_nll(const Model& model, const WindowStream& stream, std::size_t batch_size = 64);

/// Packs windows [first, first+count) of a stream into contiguous contexts
/// and targets.
void gather_batch(const WindowStream& stream, std::size_t first, std::size_t count, std::vector<TokenId>& contexts,
                  std::vector<TokenId>& targets);

}  // namespace tinylab
