#include "tinylab/windows.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "tinylab/errors.hpp"

namespace tinylab {

const char* to_string(Split split) {
    switch (split) {
        case Split::Train: return "train";
        case Split::Val: return "val";
        case Split::Test: return "test";
    }
    return "?";
}

Split parse_split(std::string_view text) {
    if (text == "train") return Split::Train;
    if (text == "val" || text == "valid" || text == "validation") return Split::Val;
    if (text == "test") return Split::Test;
    throw ValueError("unknown split '" + std::string(text) + "' (expected train, val or test)");
}

std::vector<std::size_t> window_starts(std::size_t length, std::size_t context_length, const SplitSpec& spec,
                                       std::size_t epoch) {
    if (context_length == 0) throw ValueError("context length must be at least 1");
    if (length < context_length + 1) {
        throw ValueError("sequence of " + std::to_string(length) + " ids is too short for context length " +
                         std::to_string(context_length));
    }
    if (spec.max_positions < 1) throw ValueError("max_positions must be at least 1");

    const std::size_t candidates = length - context_length;
    const bool train = spec.split == Split::Train;
    std::vector<std::size_t> starts(candidates);
    std::iota(starts.begin(), starts.end(), std::size_t{0});

    const std::uint64_t select_seed = train && spec.resample_each_epoch ? spec.seed + epoch : spec.seed;
    if (candidates > spec.max_positions) {
        // Partial Fisher-Yates: the first max_positions slots end up a uniform
        // sample without replacement.
        Rng rng(select_seed);
        for (std::size_t i = 0; i < spec.max_positions; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, candidates - 1);
            std::swap(starts[i], starts[pick(rng)]);
        }
        starts.resize(spec.max_positions);
    }
    if (train) {
        Rng order(spec.seed + epoch + 0x5bd1e995ull);
        std::shuffle(starts.begin(), starts.end(), order);
    } else {
        std::sort(starts.begin(), starts.end());
    }
    return starts;
}

WindowStream::WindowStream(std::span<const TokenId> ids, std::size_t context_length, const SplitSpec& spec,
                           std::size_t epoch)
    : ids_(ids), context_length_(context_length), spec_(spec),
      starts_(window_starts(ids.size(), context_length, spec, epoch)) {}

WindowExample WindowStream::at(std::size_t index) const {
    const std::size_t s = starts_.at(index);
    return WindowExample{ids_.subspan(s, context_length_), ids_[s + context_length_], s};
}

std::optional<WindowExample> WindowStream::next() {
    if (cursor_ >= starts_.size()) return std::nullopt;
    return at(cursor_++);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace tinylab
