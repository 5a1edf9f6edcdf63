#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tinylab/ops.hpp"

namespace tinylab {

enum class Split { Train, Val, Test };

const char* to_string(Split split);
Split parse_split(std::string_view text);

/// Which split a stream reads, how many windows one pass may emit, and the
/// seed that picks them.
struct SplitSpec {
    Split split = Split::Train;
    std::size_t max_positions = 1;
    std::uint64_t seed = 0;
    /// Train only: draw a fresh subset every epoch (seed + epoch) instead of
    /// reusing the epoch-0 subset. Order is reshuffled per epoch either way.
    bool resample_each_epoch = true;
};

/// One next-token example: ids[start .. start+T) predicting ids[start+T].
struct WindowExample {
    std::span<const TokenId> context;
    TokenId target = 0;
    std::size_t start = 0;
};

/// Window start offsets for one pass over a sequence of `length` ids.
///
/// Candidates are 0 .. length-T-1. When there are more than
/// spec.max_positions, that many are sampled uniformly without replacement.
/// Val/test selections depend only on spec.seed and come back sorted, so the
/// evaluation set is the same for every model and epoch. Train selections are
/// shuffled with seed + epoch.
std::vector<std::size_t> window_starts(std::size_t length, std::size_t context_length, const SplitSpec& spec,
                                       std::size_t epoch = 0);

/// Iterator over the windows of one pass. Holds a view of `ids`, which must
/// outlive the stream.
class WindowStream {
public:
    WindowStream(std::span<const TokenId> ids, std::size_t context_length, const SplitSpec& spec,
                 std::size_t epoch = 0);

    std::size_t size() const { return starts_.size(); }
    std::size_t context_length() const { return context_length_; }
    const SplitSpec& spec() const { return spec_; }
    std::span<const std::size_t> starts() const { return starts_; }

    WindowExample at(std::size_t index) const;
    std::optional<WindowExample> next();
    void reset() { cursor_ = 0; }

private:
    std::span<const TokenId> ids_;
    std::size_t context_length_;
    SplitSpec spec_;
    std::vector<std::size_t> starts_;
    std::size_t cursor_ = 0;
};

/// Raw text of the three corpus splits.
struct CorpusText {
    std::string train;
    std::string val;
    std::string test;
};

std::string read_text_file(const std::string& path);

}  // namespace tinylab
