#include "tinylab/vocab.hpp"

#include <algorithm>
#include <set>

#include "tinylab/errors.hpp"

namespace tinylab {

const char* to_string(VocabMode mode) { return mode == VocabMode::Char ? "char" : "word"; }

VocabMode parse_vocab_mode(std::string_view text) {
    if (text == "char") return VocabMode::Char;
    if (text == "word") return VocabMode::Word;
    throw ValueError("unknown vocabulary mode '" + std::string(text) + "' (expected char or word)");
}

Vocab::Vocab(VocabMode mode, std::vector<std::string> tokens, std::optional<TokenId> unk_id)
    : mode_(mode), id_to_token_(std::move(tokens)), unk_id_(unk_id) {
    token_to_id_.reserve(id_to_token_.size());
    for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
        auto [it, inserted] = token_to_id_.emplace(id_to_token_[i], static_cast<TokenId>(i));
        if (!inserted) throw VocabError("duplicate vocabulary token '" + id_to_token_[i] + "'");
    }
    if (unk_id_ && (*unk_id_ < 0 || static_cast<std::size_t>(*unk_id_) >= id_to_token_.size())) {
        throw VocabError("unknown-token id " + std::to_string(*unk_id_) + " outside vocabulary");
    }
}

std::optional<TokenId> Vocab::find(std::string_view token) const {
    auto it = token_to_id_.find(std::string(token));
    if (it == token_to_id_.end()) return std::nullopt;
    return it->second;
}

const std::string& Vocab::token(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
        throw VocabError("token id " + std::to_string(id) + " out of range [0, " + std::to_string(size()) + ")");
    }
    return id_to_token_[static_cast<std::size_t>(id)];
}

std::vector<std::string> utf8_code_points(std::string_view text) {
    std::vector<std::string> out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const auto lead = static_cast<unsigned char>(text[i]);
        std::size_t len = 1;
        if (lead >= 0xF0) len = 4;
        else if (lead >= 0xE0) len = 3;
        else if (lead >= 0xC0) len = 2;
        else if (lead >= 0x80) throw VocabError("malformed UTF-8 at byte " + std::to_string(i));
        if (i + len > text.size()) throw VocabError("truncated UTF-8 sequence at byte " + std::to_string(i));
        out.emplace_back(text.substr(i, len));
        i += len;
    }
    return out;
}

std::vector<std::string_view> split_whitespace(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    auto is_space = [](char c) { return c == ' ' || c == '\n' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; };
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        const std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        if (i > start) out.push_back(text.substr(start, i - start));
    }
    return out;
}

Vocab build_char_vocab(std::span<const std::string> texts) {
    // Byte-wise ordering of UTF-8 strings is code point ordering.
    std::set<std::string> distinct;
    for (const std::string& text : texts) {
        for (std::string& cp : utf8_code_points(text)) distinct.insert(std::move(cp));
    }
    if (distinct.empty()) throw VocabError("cannot build a character vocabulary from empty text");
    return Vocab(VocabMode::Char, std::vector<std::string>(distinct.begin(), distinct.end()));
}

Vocab build_word_vocab(std::string_view train_text, std::optional<std::string> unk_token) {
    std::vector<std::string> tokens;
    std::unordered_map<std::string_view, TokenId> seen;
    for (std::string_view word : split_whitespace(train_text)) {
        if (seen.emplace(word, static_cast<TokenId>(tokens.size())).second) tokens.emplace_back(word);
    }
    if (tokens.empty()) throw VocabError("cannot build a word vocabulary from an empty corpus");
    std::optional<TokenId> unk_id;
    if (unk_token) {
        auto it = seen.find(*unk_token);
        if (it != seen.end()) {
            unk_id = it->second;
        } else {
            unk_id = static_cast<TokenId>(tokens.size());
            tokens.push_back(*unk_token);
        }
    }
    return Vocab(VocabMode::Word, std::move(tokens), unk_id);
}

std::vector<TokenId> encode(const Vocab& vocab, std::string_view text) {
    std::vector<TokenId> ids;
    if (vocab.mode() == VocabMode::Char) {
        const auto points = utf8_code_points(text);
        ids.reserve(points.size());
        for (const std::string& cp : points) {
            auto id = vocab.find(cp);
            if (!id) throw VocabError("character '" + cp + "' is not in the vocabulary");
            ids.push_back(*id);
        }
        return ids;
    }
    for (std::string_view word : split_whitespace(text)) {
        auto id = vocab.find(word);
        if (!id) {
            if (!vocab.unk_id()) throw VocabError("word '" + std::string(word) + "' is not in the vocabulary");
            id = vocab.unk_id();
        }
        ids.push_back(*id);
    }
    return ids;
}

std::string decode(const Vocab& vocab, std::span<const TokenId> ids) {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (vocab.mode() == VocabMode::Word && i > 0) out.push_back(' ');
        out += vocab.token(ids[i]);
    }
    return out;
}

}  // namespace tinylab
