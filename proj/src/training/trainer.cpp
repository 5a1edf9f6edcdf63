#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "tinylab/errors.hpp"
#include "tinylab/training.hpp"

namespace tinylab {

void TrainConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ValueError("train config: " + msg); };
    if (!(adam.learning_rate > 0)) fail("learning rate must be > 0");
    if (!(adam.beta1 >= 0 && adam.beta1 < 1) || !(adam.beta2 >= 0 && adam.beta2 < 1)) fail("betas must be in [0, 1)");
    if (!(adam.eps > 0)) fail("adam eps must be > 0");
    if (batch_size < 1) fail("batch_size must be >= 1");
    if (epochs < 1) fail("epochs must be >= 1");
    if (train_cap < batch_size || val_cap < batch_size || test_cap < batch_size) {
        fail("position caps must be >= batch_size (" + std::to_string(batch_size) + ")");
    }
    if (early_stop_patience && *early_stop_patience < 1) fail("early_stop_patience must be >= 1");
}

void gather_batch(const WindowStream& stream, std::size_t first, std::size_t count, std::vector<TokenId>& contexts,
                  std::vector<TokenId>& targets) {
    const std::size_t T = stream.context_length();
    contexts.resize(count * T);
    targets.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const WindowExample ex = stream.at(first + i);
        std::copy(ex.context.begin(), ex.context.end(), contexts.begin() + static_cast<std::ptrdiff_t>(i * T));
        targets[i] = ex.target;
    }
}

WindowStream eval_stream(std::span<const TokenId> ids, std::size_t context_length, Split split,
                         const TrainConfig& config) {
    SplitSpec spec;
    spec.split = split;
    spec.max_positions = split == Split::Test ? config.test_cap : config.val_cap;
    spec.seed = config.eval_seed;
    return WindowStream(ids, context_length, spec);
}

double evaluate_nll(const Model& model, const WindowStream& stream, std::size_t batch_size) {
    if (stream.size() == 0) throw ValueError("evaluate_nll: empty window stream");
    if (batch_size < 1) throw ValueError("evaluate_nll: batch_size must be >= 1");
    if (stream.context_length() != model.config().context_length) {
        throw DimensionError("evaluate_nll: stream windows have length " + std::to_string(stream.context_length()) +
                             ", model expects T = " + std::to_string(model.config().context_length));
    }
    std::vector<TokenId> contexts;
    std::vector<TokenId> targets;
    double total = 0;
    for (std::size_t first = 0; first < stream.size(); first += batch_size) {
        const std::size_t count = std::min(batch_size, stream.size() - first);
        gather_batch(stream, first, count, contexts, targets);
        const Tensor logits = model.forward(contexts);
        for (double nll : cross_entropy_rows(logits, targets)) total += nll;
    }
    return total / static_cast<double>(stream.size());
}

TrainResult train(Model& model, const DataSplits& data, const TrainConfig& config, const EpochCallback& on_epoch) {
    config.validate();
    const auto started = std::chrono::steady_clock::now();
    const std::size_t T = model.config().context_length;

    const WindowStream val = eval_stream(data.val, T, Split::Val, config);
    const WindowStream test = eval_stream(data.test, T, Split::Test, config);

    SplitSpec train_spec;
    train_spec.split = Split::Train;
    train_spec.max_positions = config.train_cap;
    train_spec.seed = config.seed;
    train_spec.resample_each_epoch = config.resample_each_epoch;

    Rng dropout_rng(config.seed ^ 0xD1B54A32D192ED03ull);
    AdamState adam;
    RunReport report;
    report.best_val_nll = std::numeric_limits<double>::infinity();
    Model best = model.clone();
    std::size_t since_improvement = 0;

    std::vector<TokenId> contexts;
    std::vector<TokenId> targets;
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const WindowStream stream(data.train, T, train_spec, epoch - 1);
        report.positions_per_epoch = stream.size();
        double loss_sum = 0;
        std::size_t batches = 0;
        for (std::size_t first = 0; first < stream.size(); first += config.batch_size) {
            const std::size_t count = std::min(config.batch_size, stream.size() - first);
            gather_batch(stream, first, count, contexts, targets);
            Tape tape;
            TapeScope scope(tape);
            const Tensor logits = model.forward(contexts, ForwardOptions{true, &dropout_rng});
            const Tensor loss = cross_entropy_logits(logits, targets);
            const double value = loss.item();
            if (!std::isfinite(value)) {
                std::ostringstream msg;
                msg << "non-finite training loss " << value << " at epoch " << epoch << ", batch " << batches;
                throw NumericError(msg.str());
            }
            tape.backward(loss);
            adam_step(model.parameters(), adam, config.adam);
            model.zero_grad();
            loss_sum += value;
            ++batches;
        }

        EpochRecord record;
        record.epoch = epoch;
        record.train_nll = loss_sum / static_cast<double>(batches);
        record.val_nll = evaluate_nll(model, val, config.batch_size);
        report.epochs.push_back(record);
        if (on_epoch) on_epoch(record);

        if (record.val_nll < report.best_val_nll) {
            report.best_val_nll = record.val_nll;
            report.best_epoch = epoch;
            best.assign_from(model);
            since_improvement = 0;
        } else if (config.early_stop_patience && ++since_improvement >= *config.early_stop_patience) {
            break;
        }
    }

    report.test_nll = evaluate_nll(best, test, config.batch_size);
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return TrainResult{std::move(report), std::move(best)};
}

}  // namespace tinylab
