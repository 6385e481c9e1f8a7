#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cyclefeed/errors.hpp"
#include "cyclefeed/unicode.hpp"

// Shared data model of the adaptation pipeline. All types are immutable
// values; they can be copied and shared between threads freely.

namespace cyclefeed {

// One input item. `observation` stands in for the audio signal: for the
// reference backends it is the corrupted character sequence itself, for a
// real system it would be an opaque handle to an audio feature file.
// `gold_transcript` exists only on pre-training data; in-domain fine-tuning
// items carry audio and translation but no transcript.
struct Utterance {
    std::string id;
    std::string observation;
    std::optional<std::string> gold_transcript;
    std::string reference_translation;

    bool operator==(const Utterance&) const = default;
};

using Token = std::string;
using TokenSequence = std::vector<std::string>;

// One ranked transcription hypothesis. `model_score` is log-domain, higher
// is better.
struct Hypothesis {
    std::string text;
    double model_score = 0.0;
    int rank = 0;

    bool operator==(const Hypothesis&) const = default;
};

struct KBestList {
    std::string utterance_id;
    std::vector<Hypothesis> hypotheses;

    bool operator==(const KBestList&) const = default;
};

// Checks the k-best invariants: 1..k entries, ranks 0..n-1, scores
// non-increasing, hypothesis texts pairwise distinct.
inline void validate_kbest(const KBestList& kbest, int k) {
    const auto& hs = kbest.hypotheses;
    detail::require(!hs.empty(), "KBestList: must hold at least one hypothesis");
    detail::require(static_cast<int>(hs.size()) <= k, "KBestList: more than k hypotheses");
    for (size_t i = 0; i < hs.size(); ++i) {
        detail::require(hs[i].rank == static_cast<int>(i), "KBestList: ranks must be 0..n-1");
        if (i > 0) {
            detail::require(hs[i - 1].model_score >= hs[i].model_score,
                            "KBestList: model_score must be non-increasing with rank");
            for (size_t j = 0; j < i; ++j)
                detail::require(hs[j].text != hs[i].text, "KBestList: duplicate hypothesis text");
        }
    }
}

// Digit-to-word table used when rewriting standalone digit sequences to
// their spoken form, one word per digit.
using DigitTable = std::array<std::string_view, 10>;

inline const DigitTable& german_digit_table() {
    static const DigitTable table = {"null",   "eins", "zwei",   "drei", "vier",
                                     "fünf", "sechs", "sieben", "acht", "neun"};
    return table;
}

// Lowercases, strips punctuation, collapses whitespace and spells out
// standalone digit sequences digit by digit. Idempotent. Empty input yields
// empty output.
inline std::string normalize_source_text(std::string_view raw, const DigitTable& digits) {
    const std::u32string cps = decode_utf8(raw);
    std::vector<std::u32string> tokens;
    std::u32string cur;
    for (char32_t cp : cps) {
        if (is_whitespace(cp)) {
            if (!cur.empty()) {
                tokens.push_back(std::move(cur));
                cur.clear();
            }
        } else if (!is_punctuation(cp)) {
            cur.push_back(to_lower(cp));
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));

    std::string out;
    bool first = true;
    auto emit = [&](std::u32string_view tok) {
        if (!first) out.push_back(' ');
        first = false;
        for (char32_t cp : tok) append_utf8(out, cp);
    };
    for (const auto& tok : tokens) {
        const bool all_digits = std::all_of(tok.begin(), tok.end(), is_ascii_digit);
        if (all_digits) {
            for (char32_t d : tok) {
                const auto& word = digits[d - U'0'];
                if (!first) out.push_back(' ');
                first = false;
                out.append(word);
            }
        } else {
            emit(tok);
        }
    }
    return out;
}

inline std::string normalize_source_text(std::string_view raw) {
    return normalize_source_text(raw, german_digit_table());
}

// True when `text` is in the whitespace form the normalizer produces:
// single ASCII spaces between tokens, none at the edges.
inline bool is_space_normalized(std::string_view text) {
    if (text.empty()) return true;
    if (text.front() == ' ' || text.back() == ' ') return false;
    for (size_t i = 1; i < text.size(); ++i)
        if (text[i] == ' ' && text[i - 1] == ' ') return false;
    return true;
}

// Splits normalized text on single spaces. Precondition: the input is
// space-normalized; violations surface as precondition_violation.
inline TokenSequence tokenize(std::string_view text) {
    detail::require(is_space_normalized(text), "tokenize: input is not space-normalized");
    TokenSequence tokens;
    size_t start = 0;
    while (start < text.size()) {
        size_t end = text.find(' ', start);
        if (end == std::string_view::npos) end = text.size();
        tokens.emplace_back(text.substr(start, end - start));
        start = end + 1;
    }
    return tokens;
}

inline std::string join_tokens(const TokenSequence& tokens) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) out.push_back(' ');
        out += tokens[i];
    }
    return out;
}

}  // namespace cyclefeed
