#pragma once

// Locating the optional real corpora under $TINYLAB_DATA_DIR, and a small
// synthetic text for tests that only need something to train on.

#include <array>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

#include "tinylab/windows.hpp"

namespace tinylab::testing {

inline std::optional<std::filesystem::path> data_dir() {
    const char* env = std::getenv("TINYLAB_DATA_DIR");
    if (env == nullptr || *env == '\0') return std::nullopt;
    return std::filesystem::path(env);
}

/// Paths of a three-split corpus if all three files exist.
inline std::optional<std::array<std::string, 3>> corpus_files(const std::string& subdir, const std::string& train,
                                                             const std::string& val, const std::string& test) {
    auto root = data_dir();
    if (!root) return std::nullopt;
    std::array<std::string, 3> files{(*root / subdir / train).string(), (*root / subdir / val).string(),
                                     (*root / subdir / test).string()};
    for (const auto& f : files) {
        if (!std::filesystem::exists(f)) return std::nullopt;
    }
    return files;
}

inline std::optional<std::array<std::string, 3>> tiny_shakespeare_files() {
    return corpus_files("tinyshakespeare", "train.txt", "val.txt", "test.txt");
}

/// Deterministic pseudo-English with speaker lines, a few thousand chars.
inline std::string synthetic_play(std::size_t lines, unsigned seed = 1) {
    static const char* words[] = {"the", "king", "and", "queen", "shall", "speak", "of", "my", "lord",
                                  "love", "thee", "what", "is", "this", "night", "good", "sir", "come"};
    static const char* speakers[] = {"HAMLET", "KING", "QUEEN", "GHOST"};
    std::string out;
    std::uint64_t state = seed * 2654435761ull + 1;
    auto next = [&state](std::size_t n) {
        state = state * 6364136223846793005ull + 1442695040888963407ull;
        return static_cast<std::size_t>((state >> 33) % n);
    };
    for (std::size_t l = 0; l < lines; ++l) {
        out += speakers[next(4)];
        out += ":\n";
        const std::size_t len = 3 + next(6);
        for (std::size_t w = 0; w < len; ++w) {
            if (w) out += ' ';
            out += words[next(18)];
        }
        out += ".\n\n";
    }
    return out;
}

}  // namespace tinylab::testing
