#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cyclefeed/core.hpp"
#include "cyclefeed/errors.hpp"
#include "cyclefeed/unicode.hpp"

namespace cyclefeed {

// Character n-gram F-score configuration. beta weights recall over
// precision; whitespace is removed from both sides before n-gram
// extraction when strip_whitespace is set (the metric's standard setup).
struct ChrfParams {
    int max_ngram_order = 6;
    double beta = 2.0;
    bool strip_whitespace = true;
};

// Carrier for one evaluation row: corpus BLEU in [0,100], mean sentence
// ChrF in [0,1], corpus WER (present only when the corpus has gold
// transcripts) and the number of scored sentences.
struct MetricsReport {
    double bleu = 0.0;
    double chrf = 0.0;
    std::optional<double> wer;
    int n_sentences = 0;
};

namespace detail {

inline std::u32string chrf_prepare(std::string_view text, bool strip_whitespace) {
    std::u32string cps = decode_utf8(text);
    if (!strip_whitespace) return cps;
    std::u32string out;
    out.reserve(cps.size());
    for (char32_t cp : cps)
        if (!is_whitespace(cp)) out.push_back(cp);
    return out;
}

inline std::map<std::u32string, long> ngram_counts(const std::u32string& s, int order) {
    std::map<std::u32string, long> counts;
    if (static_cast<int>(s.size()) >= order)
        for (size_t i = 0; i + order <= s.size(); ++i) ++counts[s.substr(i, order)];
    return counts;
}

}  // namespace detail

// Sentence-level ChrF: uniform means of clipped character n-gram precision
// and recall over orders 1..n, combined as (1+b^2)PR / (b^2 P + R).
// Orders where the reference has no n-grams are excluded from the means.
// Two empty strings score 1; an empty hypothesis against a non-empty
// reference scores 0.
inline double sentence_chrf(std::string_view hypothesis, std::string_view reference,
                            const ChrfParams& params = {}) {
    detail::require(params.max_ngram_order >= 1, "ChrfParams: max_ngram_order must be >= 1");
    detail::require(params.beta > 0.0, "ChrfParams: beta must be positive");

    const std::u32string hyp = detail::chrf_prepare(hypothesis, params.strip_whitespace);
    const std::u32string ref = detail::chrf_prepare(reference, params.strip_whitespace);
    if (ref.empty())
        return hyp.empty() ? 1.0 : 0.0;  // trivial match / nothing to recall

    double precision_sum = 0.0, recall_sum = 0.0;
    int included_orders = 0;
    for (int order = 1; order <= params.max_ngram_order; ++order) {
        const long ref_total = std::max<long>(0, static_cast<long>(ref.size()) - order + 1);
        if (ref_total == 0) continue;
        const long hyp_total = std::max<long>(0, static_cast<long>(hyp.size()) - order + 1);
        const auto hyp_counts = detail::ngram_counts(hyp, order);
        const auto ref_counts = detail::ngram_counts(ref, order);
        long clipped = 0;
        for (const auto& [gram, n] : hyp_counts) {
            const auto it = ref_counts.find(gram);
            if (it != ref_counts.end()) clipped += std::min(n, it->second);
        }
        precision_sum += hyp_total > 0 ? static_cast<double>(clipped) / hyp_total : 0.0;
        recall_sum += static_cast<double>(clipped) / ref_total;
        ++included_orders;
    }
    const double chrp = precision_sum / included_orders;
    const double chrr = recall_sum / included_orders;
    const double b2 = params.beta * params.beta;
    const double denom = b2 * chrp + chrr;
    if (denom == 0.0) return 0.0;
    return (1.0 + b2) * chrp * chrr / denom;
}

// Corpus BLEU: geometric mean of corpus-level clipped n-gram precisions for
// n=1..4 times the brevity penalty exp(min(0, 1 - r/c)), scaled to [0,100].
// No smoothing; an order with no hypothesis n-grams counts as precision 1
// only when the references have none either, else 0.
inline double corpus_bleu(const std::vector<TokenSequence>& hypotheses,
                          const std::vector<TokenSequence>& references) {
    if (hypotheses.size() != references.size())
        throw input_error("corpus_bleu: hypothesis/reference count mismatch");
    if (hypotheses.empty()) throw input_error("corpus_bleu: empty corpus");

    constexpr int kMaxOrder = 4;
    long hyp_len_total = 0, ref_len_total = 0;
    double log_precision_sum = 0.0;
    std::vector<double> precisions;
    for (int order = 1; order <= kMaxOrder; ++order) {
        long matched = 0, hyp_total = 0, ref_total = 0;
        for (size_t s = 0; s < hypotheses.size(); ++s) {
            const auto& hyp = hypotheses[s];
            const auto& ref = references[s];
            if (order == 1) {
                hyp_len_total += static_cast<long>(hyp.size());
                ref_len_total += static_cast<long>(ref.size());
            }
            hyp_total += std::max<long>(0, static_cast<long>(hyp.size()) - order + 1);
            ref_total += std::max<long>(0, static_cast<long>(ref.size()) - order + 1);
            std::map<std::vector<std::string>, long> hyp_counts, ref_counts;
            for (size_t i = 0; i + order <= hyp.size(); ++i)
                ++hyp_counts[std::vector<std::string>(hyp.begin() + i, hyp.begin() + i + order)];
            for (size_t i = 0; i + order <= ref.size(); ++i)
                ++ref_counts[std::vector<std::string>(ref.begin() + i, ref.begin() + i + order)];
            for (const auto& [gram, n] : hyp_counts) {
                const auto it = ref_counts.find(gram);
                if (it != ref_counts.end()) matched += std::min(n, it->second);
            }
        }
        double p;
        if (hyp_total == 0)
            p = ref_total == 0 ? 1.0 : 0.0;
        else
            p = static_cast<double>(matched) / hyp_total;
        if (p == 0.0) return 0.0;
        precisions.push_back(p);
        log_precision_sum += std::log(p);
    }

    double brevity;
    if (hyp_len_total == 0)
        brevity = ref_len_total == 0 ? 1.0 : 0.0;
    else
        brevity = std::exp(std::min(0.0, 1.0 - static_cast<double>(ref_len_total) / hyp_len_total));
    return 100.0 * brevity * std::exp(log_precision_sum / kMaxOrder);
}

// Word error rate: unit-cost token edit distance divided by reference
// length. The reference must be non-empty.
inline double wer(const TokenSequence& hypothesis, const TokenSequence& reference) {
    if (reference.empty()) throw input_error("wer: empty reference");
    const size_t n = hypothesis.size(), m = reference.size();
    std::vector<int> row(m + 1);
    for (size_t j = 0; j <= m; ++j) row[j] = static_cast<int>(j);
    for (size_t i = 1; i <= n; ++i) {
        int diag = row[0];
        row[0] = static_cast<int>(i);
        for (size_t j = 1; j <= m; ++j) {
            const int sub = diag + (hypothesis[i - 1] == reference[j - 1] ? 0 : 1);
            diag = row[j];
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
        }
    }
    return static_cast<double>(row[m]) / static_cast<double>(m);
}

}  // namespace cyclefeed
