#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cyclefeed/core.hpp"
#include "cyclefeed/errors.hpp"
#include "cyclefeed/metrics.hpp"

// Turns k-best transcriptions plus their translations into weighted
// fine-tuning datasets. Translation quality against the reference is the
// only signal: it selects and weights data for both the MT and the ASR
// side. The transcription threshold is stricter because transcription
// targets are less forgiving of errors than translation inputs.

namespace cyclefeed {

// One transcription hypothesis with the ChrF of its translation against
// the reference translation.
struct ScoredCandidate {
    std::string utterance_id;
    int hypothesis_rank = 0;
    std::string transcription;
    std::string translation;
    double chrf = 0.0;
};

enum class RecordOrigin { MT_ADAPT, ASR_ADAPT };

inline std::string_view to_string(RecordOrigin origin) {
    return origin == RecordOrigin::MT_ADAPT ? "MT_ADAPT" : "ASR_ADAPT";
}

inline RecordOrigin record_origin_from_string(std::string_view s) {
    if (s == "MT_ADAPT") return RecordOrigin::MT_ADAPT;
    if (s == "ASR_ADAPT") return RecordOrigin::ASR_ADAPT;
    throw input_error("unknown record origin: " + std::string(s));
}

// A weighted training pair. For MT_ADAPT the input is a selected
// transcription and the target is the reference translation; for ASR_ADAPT
// the input identifies the observation and the target is a selected
// transcription.
struct FineTuneRecord {
    std::string input_text;
    std::string target_text;
    double weight = 1.0;
    std::string utterance_id;
    RecordOrigin origin = RecordOrigin::MT_ADAPT;

    bool operator==(const FineTuneRecord&) const = default;
};

struct SelectionConfig {
    int k = 8;
    double mt_threshold = 0.4;
    double asr_threshold = 0.6;
    double weight_exponent = 1.0;
    ChrfParams chrf_params;
};

// One utterance with its k-best transcriptions and their translations,
// aligned index by index.
struct SelectionInput {
    Utterance utterance;
    KBestList kbest;
    std::vector<std::string> translations;
};

// Iteration statistics produced alongside a fine-tune set.
struct SelectionStats {
    int n_records = 0;
    int n_utterances_selected = 0;
    double mean_selected_chrf = 0.0;
};

// Scores each hypothesis by the ChrF of its translation against the
// reference translation. Output is sorted by ChrF descending, ties broken
// by original hypothesis rank ascending.
inline std::vector<ScoredCandidate> score_candidates(const KBestList& kbest,
                                                     const std::vector<std::string>& translations,
                                                     std::string_view reference,
                                                     const ChrfParams& params = {}) {
    if (translations.size() != kbest.hypotheses.size())
        throw input_error("score_candidates: translation count does not match hypothesis count");
    std::vector<ScoredCandidate> scored;
    scored.reserve(kbest.hypotheses.size());
    for (size_t i = 0; i < kbest.hypotheses.size(); ++i) {
        ScoredCandidate c;
        c.utterance_id = kbest.utterance_id;
        c.hypothesis_rank = kbest.hypotheses[i].rank;
        c.transcription = kbest.hypotheses[i].text;
        c.translation = translations[i];
        c.chrf = sentence_chrf(translations[i], reference, params);
        scored.push_back(std::move(c));
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.chrf != b.chrf) return a.chrf > b.chrf;
        return a.hypothesis_rank < b.hypothesis_rank;
    });
    return scored;
}

// Hypothesis ranks of all candidates with chrf >= threshold, in the order
// of the given list. May be empty: the utterance is skipped this iteration.
inline std::vector<int> select_indices(const std::vector<ScoredCandidate>& scored,
                                       double threshold) {
    detail::require(!scored.empty(), "select_indices: scored list must be non-empty");
    std::vector<int> ranks;
    for (const auto& c : scored)
        if (c.chrf >= threshold) ranks.push_back(c.hypothesis_rank);
    return ranks;
}

// Normalized power-law weights w_i = chrf_i^alpha / sum_j chrf_j^alpha.
// Monotone in chrf for alpha > 0; weights sum to 1 per utterance.
inline std::vector<double> compute_weights(const std::vector<double>& selected_chrf,
                                           double alpha) {
    detail::require(!selected_chrf.empty(), "compute_weights: empty selection");
    double total = 0.0;
    std::vector<double> weights;
    weights.reserve(selected_chrf.size());
    for (double v : selected_chrf) {
        if (v <= 0.0) throw input_error("compute_weights: chrf values must be positive");
        detail::require(v <= 1.0, "compute_weights: chrf values must be <= 1");
        const double w = std::pow(v, alpha);
        weights.push_back(w);
        total += w;
    }
    for (double& w : weights) w /= total;
    return weights;
}

namespace detail {

template <class MakeRecord>
std::vector<FineTuneRecord> build_finetune_set(const std::vector<SelectionInput>& batch,
                                               const SelectionConfig& cfg, double threshold,
                                               MakeRecord make_record, SelectionStats* stats) {
    std::vector<FineTuneRecord> records;
    SelectionStats local;
    double chrf_sum = 0.0;
    for (const auto& item : batch) {
        validate_kbest(item.kbest, cfg.k);
        const auto scored =
            score_candidates(item.kbest, item.translations, item.utterance.reference_translation,
                             cfg.chrf_params);
        std::vector<const ScoredCandidate*> selected;
        std::vector<double> chrf_values;
        for (const auto& c : scored) {
            if (c.chrf >= threshold) {
                selected.push_back(&c);
                chrf_values.push_back(c.chrf);
            }
        }
        if (selected.empty()) continue;
        const auto weights = compute_weights(chrf_values, cfg.weight_exponent);
        for (size_t i = 0; i < selected.size(); ++i) {
            records.push_back(make_record(item.utterance, *selected[i], weights[i]));
            chrf_sum += selected[i]->chrf;
        }
        ++local.n_utterances_selected;
    }
    local.n_records = static_cast<int>(records.size());
    local.mean_selected_chrf = records.empty() ? 0.0 : chrf_sum / records.size();
    if (stats) *stats = local;
    return records;
}

}  // namespace detail

// MT adaptation data: one record per selected hypothesis, transcription as
// input and the reference translation as target.
inline std::vector<FineTuneRecord> build_mt_finetune_set(const std::vector<SelectionInput>& batch,
                                                         const SelectionConfig& cfg,
                                                         SelectionStats* stats = nullptr) {
    return detail::build_finetune_set(
        batch, cfg, cfg.mt_threshold,
        [](const Utterance& utt, const ScoredCandidate& c, double weight) {
            FineTuneRecord r;
            r.input_text = c.transcription;
            r.target_text = utt.reference_translation;
            r.weight = weight;
            r.utterance_id = utt.id;
            r.origin = RecordOrigin::MT_ADAPT;
            return r;
        },
        stats);
}

// ASR self-training data: the observation reference as input and the
// selected transcription as target. Scores are the same translation-side
// ChrF values as for MT adaptation; only the threshold differs. Gold
// transcripts are never consulted.
inline std::vector<FineTuneRecord> build_asr_finetune_set(const std::vector<SelectionInput>& batch,
                                                          const SelectionConfig& cfg,
                                                          SelectionStats* stats = nullptr) {
    return detail::build_finetune_set(
        batch, cfg, cfg.asr_threshold,
        [](const Utterance& utt, const ScoredCandidate& c, double weight) {
            FineTuneRecord r;
            r.input_text = utt.observation;
            r.target_text = c.transcription;
            r.weight = weight;
            r.utterance_id = utt.id;
            r.origin = RecordOrigin::ASR_ADAPT;
            return r;
        },
        stats);
}

// Audit-trail serialization: one JSON object per line, corpus-style plus
// `weight` and `origin`.
inline nlohmann::json record_to_json(const FineTuneRecord& r) {
    nlohmann::json j;
    j["id"] = r.utterance_id;
    j["input_text"] = r.input_text;
    j["target_text"] = r.target_text;
    j["weight"] = r.weight;
    j["origin"] = std::string(to_string(r.origin));
    return j;
}

inline FineTuneRecord record_from_json(const nlohmann::json& j) {
    FineTuneRecord r;
    try {
        r.utterance_id = j.at("id").get<std::string>();
        r.input_text = j.at("input_text").get<std::string>();
        r.target_text = j.at("target_text").get<std::string>();
        r.weight = j.at("weight").get<double>();
        r.origin = record_origin_from_string(j.at("origin").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("fine-tune record: ") + e.what());
    }
    if (r.weight <= 0.0) throw input_error("fine-tune record: weight must be positive");
    return r;
}

inline void write_records(const std::filesystem::path& path,
                          const std::vector<FineTuneRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw input_error("cannot open record file for writing: " + path.string());
    for (const auto& r : records) out << record_to_json(r).dump() << '\n';
}

inline std::vector<FineTuneRecord> read_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open record file: " + path.string());
    std::vector<FineTuneRecord> records;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw input_error("record file: invalid JSON line");
        records.push_back(record_from_json(j));
    }
    return records;
}

}  // namespace cyclefeed
