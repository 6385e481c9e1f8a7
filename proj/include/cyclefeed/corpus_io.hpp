#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "cyclefeed/core.hpp"
#include "cyclefeed/errors.hpp"

// Corpus files: one JSON object per line with fields `id`, `observation`,
// `gold_transcript` (nullable) and `reference_translation`. UTF-8, LF line
// endings.

namespace cyclefeed {

struct CorpusReadOptions {
    // Fine-tuning, dev and test corpora must carry a reference translation
    // on every item; pre-training corpora need not.
    bool require_translations = false;
};

inline nlohmann::json utterance_to_json(const Utterance& u) {
    nlohmann::json j;
    j["id"] = u.id;
    j["observation"] = u.observation;
    if (u.gold_transcript)
        j["gold_transcript"] = *u.gold_transcript;
    else
        j["gold_transcript"] = nullptr;
    j["reference_translation"] = u.reference_translation;
    return j;
}

inline Utterance utterance_from_json(const nlohmann::json& j) {
    Utterance u;
    try {
        u.id = j.at("id").get<std::string>();
        u.observation = j.at("observation").get<std::string>();
        const auto& gt = j.at("gold_transcript");
        if (!gt.is_null()) u.gold_transcript = gt.get<std::string>();
        u.reference_translation = j.at("reference_translation").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw input_error(std::string("corpus record: ") + e.what());
    }
    return u;
}

inline std::vector<Utterance> read_corpus(std::istream& in, const CorpusReadOptions& opts = {}) {
    std::vector<Utterance> corpus;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw input_error("corpus line " + std::to_string(line_no) + ": invalid JSON");
        Utterance u = utterance_from_json(j);
        if (!seen_ids.insert(u.id).second)
            throw input_error("corpus line " + std::to_string(line_no) + ": duplicate id '" + u.id + "'");
        if (opts.require_translations && u.reference_translation.empty())
            throw input_error("corpus line " + std::to_string(line_no) + ": empty reference_translation");
        corpus.push_back(std::move(u));
    }
    return corpus;
}

inline std::vector<Utterance> read_corpus(const std::filesystem::path& path,
                                          const CorpusReadOptions& opts = {}) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open corpus file: " + path.string());
    return read_corpus(in, opts);
}

inline void write_corpus(std::ostream& out, const std::vector<Utterance>& corpus) {
    for (const auto& u : corpus) out << utterance_to_json(u).dump() << '\n';
}

inline void write_corpus(const std::filesystem::path& path, const std::vector<Utterance>& corpus) {
    std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
    if (!out) throw input_error("cannot open corpus file for writing: " + path.string());
    write_corpus(out, corpus);
}

}  // namespace cyclefeed
