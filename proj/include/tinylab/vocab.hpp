#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tinylab/ops.hpp"

namespace tinylab {

enum class VocabMode { Char, Word };

const char* to_string(VocabMode mode);
VocabMode parse_vocab_mode(std::string_view text);

/// Bijective token <-> id map with contiguous ids [0, V).
///
/// In char mode a token is one UTF-8 encoded code point. In word mode a
/// token is a whitespace-delimited word and an optional unknown-token id
/// absorbs out-of-vocabulary words.
class Vocab {
public:
    Vocab() = default;
    Vocab(VocabMode mode, std::vector<std::string> tokens, std::optional<TokenId> unk_id = std::nullopt);

    VocabMode mode() const { return mode_; }
    std::size_t size() const { return id_to_token_.size(); }
    std::optional<TokenId> unk_id() const { return unk_id_; }

    std::optional<TokenId> find(std::string_view token) const;
    const std::string& token(TokenId id) const;
    std::span<const std::string> tokens() const { return id_to_token_; }

    bool operator==(const Vocab& other) const {
        return mode_ == other.mode_ && id_to_token_ == other.id_to_token_ && unk_id_ == other.unk_id_;
    }

private:
    VocabMode mode_ = VocabMode::Char;
    std::vector<std::string> id_to_token_;
    std::unordered_map<std::string, TokenId> token_to_id_;
    std::optional<TokenId> unk_id_;
};

/// Splits UTF-8 text into one string per code point. Throws VocabError on
/// malformed sequences.
std::vector<std::string> utf8_code_points(std::string_view text);
std::vector<std::string_view> split_whitespace(std::string_view text);

/// Vocabulary over every distinct code point in any of `texts`, ids sorted by
/// code point.
Vocab build_char_vocab(std::span<const std::string> texts);

/// One id per distinct whitespace token of the training text, in order of
/// first occurrence. When `unk_token` is given it becomes the unknown id:
/// its existing id if the corpus contains it, otherwise a new final id.
Vocab build_word_vocab(std::string_view train_text, std::optional<std::string> unk_token = "<unk>");

/// Char mode: one id per code point; unknown characters are an error.
/// Word mode: one id per whitespace token; unknown words map to unk_id.
std::vector<TokenId> encode(const Vocab& vocab, std::string_view text);

/// Char mode concatenates tokens, word mode joins them with single spaces.
std::string decode(const Vocab& vocab, std::span<const TokenId> ids);

}  // namespace tinylab
