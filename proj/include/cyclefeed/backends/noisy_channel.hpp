#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cyclefeed/backends/char_lm.hpp"
#include "cyclefeed/backends/error_model.hpp"
#include "cyclefeed/core.hpp"
#include "cyclefeed/errors.hpp"

// Monotone left-to-right beam search over the edit lattice between the
// observation and a candidate clean text. A path consumes observation
// characters one by one; between consumptions it may emit candidate
// characters that the channel deleted. Path score is
//   log P_lm(candidate) + log P_err(observation | candidate)
// where P_err follows the best single alignment. States are candidate
// prefixes (kept in a trie, so distinct states are distinct texts) paired
// with the number of observation characters consumed.

namespace cyclefeed {

struct DecodeConfig {
    int beam_width = 12;  // <= 0 means unlimited (exhaustive within the length cap)
    int k = 8;
    int max_candidate_extra = 2;  // candidate length cap: |observation| + extra
};

// Deterministic ordering for scored candidates: score descending, then,
// within runs of near-equal scores (gap <= eps), text ascending. Applied by
// the decoder and by any reimplementation that must match it.
template <class Entry, class ScoreOf, class TextOf>
void sort_candidates_canonical(std::vector<Entry>& entries, ScoreOf score_of, TextOf text_of,
                               double eps = 1e-10) {
    std::sort(entries.begin(), entries.end(), [&](const Entry& a, const Entry& b) {
        if (score_of(a) != score_of(b)) return score_of(a) > score_of(b);
        return text_of(a) < text_of(b);
    });
    size_t run_start = 0;
    for (size_t i = 1; i <= entries.size(); ++i) {
        if (i == entries.size() || score_of(entries[run_start]) - score_of(entries[i]) > eps) {
            if (i - run_start > 1)
                std::sort(entries.begin() + run_start, entries.begin() + i,
                          [&](const Entry& a, const Entry& b) { return text_of(a) < text_of(b); });
            run_start = i;
        }
    }
}

inline KBestList noisy_channel_decode(std::string_view observation, const ErrorModel& error_model,
                                      const CharLm& lm, const DecodeConfig& cfg,
                                      std::string utterance_id = {}) {
    detail::require(cfg.k >= 1, "noisy_channel_decode: k must be >= 1");
    detail::require(cfg.beam_width <= 0 || cfg.k <= cfg.beam_width,
                    "noisy_channel_decode: k must not exceed beam_width");
    detail::require(cfg.max_candidate_extra >= 0,
                    "noisy_channel_decode: max_candidate_extra must be >= 0");

    const double rate = error_model.insertion_rate();
    const double log_consume = std::log(1.0 - rate);
    const double log_insert_rate = std::log(rate);

    KBestList result;
    result.utterance_id = std::move(utterance_id);

    if (observation.empty()) {
        Hypothesis h;
        h.text = "";
        h.model_score = log_consume + lm.log_prob(lm.initial_context(), lm.eos_outcome());
        h.rank = 0;
        result.hypotheses.push_back(std::move(h));
        return result;
    }

    const std::u32string obs = decode_utf8(observation);
    const int max_len = static_cast<int>(obs.size()) + cfg.max_candidate_extra;

    // Emission alphabet: every language-model character, with its channel row.
    struct EmitChar {
        char32_t cp;
        int32_t lm_symbol;
        int em_clean_idx;
    };
    std::vector<EmitChar> emit_chars;
    emit_chars.reserve(lm.alphabet().size());
    for (char32_t cp : lm.alphabet())
        emit_chars.push_back({cp, lm.char_symbol(cp), error_model.clean_index(cp)});

    struct Node {
        int32_t parent;
        int32_t depth;
        char32_t ch;
        int em_clean_idx;
        CharLm::Context ctx;  // context *after* this node's character
    };
    std::vector<Node> nodes;
    nodes.push_back({-1, 0, 0, -1, lm.initial_context()});
    std::unordered_map<uint64_t, int32_t> children;  // (node, emit index) -> child node
    const auto child_of = [&](int32_t node, size_t emit_idx) {
        const uint64_t key = static_cast<uint64_t>(node) * emit_chars.size() + emit_idx;
        const auto it = children.find(key);
        if (it != children.end()) return it->second;
        const EmitChar& ec = emit_chars[emit_idx];
        Node n;
        n.parent = node;
        n.depth = nodes[node].depth + 1;
        n.ch = ec.cp;
        n.em_clean_idx = ec.em_clean_idx;
        n.ctx = lm.advance(nodes[node].ctx, ec.lm_symbol);
        nodes.push_back(n);
        const int32_t id = static_cast<int32_t>(nodes.size()) - 1;
        children.emplace(key, id);
        return id;
    };
    const auto text_of_node = [&](int32_t node) {
        std::u32string rev;
        for (int32_t cur = node; cur > 0; cur = nodes[cur].parent) rev.push_back(nodes[cur].ch);
        std::reverse(rev.begin(), rev.end());
        return encode_utf8(rev);
    };

    using Level = std::unordered_map<int32_t, double>;  // node -> best score
    const auto merge_max = [](Level& level, int32_t node, double score) {
        const auto [it, inserted] = level.emplace(node, score);
        if (!inserted && score > it->second) it->second = score;
    };
    const auto top_states = [&](const Level& level, size_t limit) {
        std::vector<std::pair<int32_t, double>> states(level.begin(), level.end());
        std::sort(states.begin(), states.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (states.size() > limit) states.resize(limit);
        return states;
    };
    const size_t beam =
        cfg.beam_width <= 0 ? std::numeric_limits<size_t>::max() : static_cast<size_t>(cfg.beam_width);

    Level current;
    current.emplace(0, 0.0);

    for (size_t j = 0; j <= obs.size(); ++j) {
        // Deletion closure: extend candidates without consuming observation
        // characters, shallowest first so chains of deletions compose.
        std::vector<std::vector<std::pair<int32_t, double>>> by_depth(max_len + 1);
        for (const auto& [node, score] : current)
            by_depth[nodes[node].depth].push_back({node, score});
        for (int d = 0; d < max_len; ++d) {
            auto& sources = by_depth[d];
            if (sources.empty()) continue;
            if (sources.size() > beam) {
                std::sort(sources.begin(), sources.end(), [](const auto& a, const auto& b) {
                    if (a.second != b.second) return a.second > b.second;
                    return a.first < b.first;
                });
                sources.resize(beam);
            }
            for (const auto& [node, score] : sources) {
                for (size_t e = 0; e < emit_chars.size(); ++e) {
                    const double edge = log_consume +
                                        std::log(error_model.delete_prob(emit_chars[e].em_clean_idx)) +
                                        lm.log_prob(nodes[node].ctx, emit_chars[e].lm_symbol);
                    const int32_t child = child_of(node, e);
                    const double cand = score + edge;
                    merge_max(current, child, cand);
                    // propagate to the depth bucket so deeper deletions chain
                    auto& bucket = by_depth[d + 1];
                    bool found = false;
                    for (auto& entry : bucket)
                        if (entry.first == child) {
                            entry.second = std::max(entry.second, cand);
                            found = true;
                            break;
                        }
                    if (!found) bucket.push_back({child, cand});
                }
            }
        }

        const auto pruned = top_states(current, beam);

        if (j == obs.size()) {
            // Final scoring: stop the channel and close the language model.
            std::vector<std::pair<double, std::string>> finals;
            finals.reserve(pruned.size());
            for (const auto& [node, score] : pruned) {
                const double f =
                    score + log_consume + lm.log_prob(nodes[node].ctx, lm.eos_outcome());
                finals.push_back({f, text_of_node(node)});
            }
            sort_candidates_canonical(
                finals, [](const auto& e) { return e.first; },
                [](const auto& e) -> const std::string& { return e.second; });
            const size_t n = std::min<size_t>(cfg.k, finals.size());
            for (size_t i = 0; i < n; ++i) {
                Hypothesis h;
                h.text = std::move(finals[i].second);
                h.model_score = finals[i].first;
                h.rank = static_cast<int>(i);
                result.hypotheses.push_back(std::move(h));
            }
            return result;
        }

        const char32_t o = obs[j];
        const int o_idx = error_model.obs_index(o);
        const double log_ins = log_insert_rate + std::log(error_model.insert_prob(o_idx));
        Level next;
        for (const auto& [node, score] : pruned) {
            merge_max(next, node, score + log_ins);  // observation char is spurious
            if (nodes[node].depth < max_len) {
                for (size_t e = 0; e < emit_chars.size(); ++e) {
                    const double edge =
                        log_consume +
                        std::log(error_model.emit_prob(emit_chars[e].em_clean_idx, o_idx)) +
                        lm.log_prob(nodes[node].ctx, emit_chars[e].lm_symbol);
                    merge_max(next, child_of(node, e), score + edge);
                }
            }
        }
        current = std::move(next);
    }
    return result;  // unreachable
}

inline KBestList noisy_channel_decode(std::string_view observation, const ErrorModel& error_model,
                                      const CharLm& lm, int beam_width, int k,
                                      std::string utterance_id = {}) {
    DecodeConfig cfg;
    cfg.beam_width = beam_width;
    cfg.k = k;
    return noisy_channel_decode(observation, error_model, lm, cfg, std::move(utterance_id));
}

}  // namespace cyclefeed
