#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cyclefeed/backends/snapshot.hpp"
#include "cyclefeed/errors.hpp"
#include "cyclefeed/selection.hpp"
#include "cyclefeed/unicode.hpp"

// Character channel model P(observation | clean text). Per clean character
// the outcome is a categorical over {emit o, delete, emit-unknown}; a
// separate categorical with rate lambda_ins governs spurious insertions.
// All distributions carry add-lambda smoothing, so every outcome keeps
// positive probability and rows sum to one exactly up to rounding.

namespace cyclefeed {

// Weighted edit-operation counts over fixed clean/observed alphabets.
// Alignments are canonical minimum edit scripts; co-optimal steps prefer
// match > substitute > delete > insert.
struct EditCounts {
    std::vector<char32_t> clean_alphabet;  // sorted
    std::vector<char32_t> obs_alphabet;    // sorted
    std::vector<double> sub;               // clean x obs, row-major
    std::vector<double> del;               // per clean char
    std::vector<double> sub_unknown;       // per clean char, observed char outside alphabet
    std::vector<double> ins;               // per observed char
    double ins_unknown = 0.0;
    double n_consumed = 0.0;  // matches + substitutions + deletions
    double n_inserted = 0.0;
    double n_stops = 0.0;  // one per aligned pair, weight-scaled
    double n_dropped_clean = 0.0;  // events on clean chars outside the alphabet

    EditCounts(std::vector<char32_t> clean, std::vector<char32_t> obs)
        : clean_alphabet(std::move(clean)),
          obs_alphabet(std::move(obs)),
          sub(clean_alphabet.size() * obs_alphabet.size(), 0.0),
          del(clean_alphabet.size(), 0.0),
          sub_unknown(clean_alphabet.size(), 0.0),
          ins(obs_alphabet.size(), 0.0) {}
};

namespace detail {

inline int alphabet_index(const std::vector<char32_t>& alphabet, char32_t cp) {
    const auto it = std::lower_bound(alphabet.begin(), alphabet.end(), cp);
    if (it == alphabet.end() || *it != cp) return -1;
    return static_cast<int>(it - alphabet.begin());
}

inline std::vector<char32_t> sorted_unique_chars(const std::vector<std::u32string>& texts) {
    std::vector<char32_t> chars;
    for (const auto& t : texts) chars.insert(chars.end(), t.begin(), t.end());
    std::sort(chars.begin(), chars.end());
    chars.erase(std::unique(chars.begin(), chars.end()), chars.end());
    return chars;
}

}  // namespace detail

// Accumulates weighted edit counts for one (observation, clean) pair.
inline void align_and_count(std::u32string_view observation, std::u32string_view clean,
                            double weight, EditCounts& counts) {
    const size_t n = clean.size(), m = observation.size();
    std::vector<int> dp((n + 1) * (m + 1));
    const auto at = [&](size_t i, size_t j) -> int& { return dp[i * (m + 1) + j]; };
    for (size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<int>(i);
    for (size_t j = 0; j <= m; ++j) at(0, j) = static_cast<int>(j);
    for (size_t i = 1; i <= n; ++i)
        for (size_t j = 1; j <= m; ++j)
            at(i, j) = std::min({at(i - 1, j - 1) + (clean[i - 1] == observation[j - 1] ? 0 : 1),
                                 at(i - 1, j) + 1, at(i, j - 1) + 1});

    const auto count_emit = [&](char32_t c, char32_t o) {
        const int ci = detail::alphabet_index(counts.clean_alphabet, c);
        if (ci < 0) {
            counts.n_dropped_clean += weight;
            return;
        }
        const int oi = detail::alphabet_index(counts.obs_alphabet, o);
        if (oi < 0)
            counts.sub_unknown[ci] += weight;
        else
            counts.sub[ci * counts.obs_alphabet.size() + oi] += weight;
        counts.n_consumed += weight;
    };

    size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 && clean[i - 1] == observation[j - 1] &&
            at(i, j) == at(i - 1, j - 1)) {
            count_emit(clean[i - 1], observation[j - 1]);
            --i, --j;
        } else if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + 1) {
            count_emit(clean[i - 1], observation[j - 1]);
            --i, --j;
        } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
            const int ci = detail::alphabet_index(counts.clean_alphabet, clean[i - 1]);
            if (ci < 0)
                counts.n_dropped_clean += weight;
            else {
                counts.del[ci] += weight;
                counts.n_consumed += weight;
            }
            --i;
        } else {
            const int oi = detail::alphabet_index(counts.obs_alphabet, observation[j - 1]);
            if (oi < 0)
                counts.ins_unknown += weight;
            else
                counts.ins[oi] += weight;
            counts.n_inserted += weight;
            --j;
        }
    }
    counts.n_stops += weight;
}

class ErrorModel {
public:
    ErrorModel() = default;

    static ErrorModel estimate(const EditCounts& counts, double lambda) {
        detail::require(lambda > 0.0, "ErrorModel: smoothing constant must be positive");
        ErrorModel m;
        m.clean_alphabet_ = counts.clean_alphabet;
        m.obs_alphabet_ = counts.obs_alphabet;
        m.lambda_ = lambda;
        const size_t c_n = m.clean_alphabet_.size(), o_n = m.obs_alphabet_.size();
        m.sub_.assign(c_n * o_n, 0.0);
        m.del_.assign(c_n, 0.0);
        m.sub_unknown_.assign(c_n, 0.0);
        m.ins_.assign(o_n, 0.0);
        for (size_t ci = 0; ci < c_n; ++ci) {
            double row_total = counts.del[ci] + counts.sub_unknown[ci];
            for (size_t oi = 0; oi < o_n; ++oi) row_total += counts.sub[ci * o_n + oi];
            // outcomes: every observed char, deletion, and the unknown bucket
            const double denom = row_total + lambda * static_cast<double>(o_n + 2);
            for (size_t oi = 0; oi < o_n; ++oi)
                m.sub_[ci * o_n + oi] = (counts.sub[ci * o_n + oi] + lambda) / denom;
            m.del_[ci] = (counts.del[ci] + lambda) / denom;
            m.sub_unknown_[ci] = (counts.sub_unknown[ci] + lambda) / denom;
        }
        double ins_total = counts.ins_unknown;
        for (double v : counts.ins) ins_total += v;
        const double ins_denom = ins_total + lambda * static_cast<double>(o_n + 1);
        for (size_t oi = 0; oi < o_n; ++oi) m.ins_[oi] = (counts.ins[oi] + lambda) / ins_denom;
        m.ins_unknown_ = (counts.ins_unknown + lambda) / ins_denom;
        m.insertion_rate_ = (counts.n_inserted + lambda) /
                            (counts.n_inserted + counts.n_consumed + counts.n_stops + 2.0 * lambda);
        return m;
    }

    // Maximum-likelihood training from (observation, clean) pairs; the
    // alphabets are read off the data.
    static ErrorModel train(const std::vector<std::pair<std::string, std::string>>& pairs,
                            double lambda) {
        if (pairs.empty()) throw input_error("ErrorModel::train: empty corpus");
        std::vector<std::u32string> obs_texts, clean_texts;
        for (const auto& [obs, clean] : pairs) {
            obs_texts.push_back(decode_utf8(obs));
            clean_texts.push_back(decode_utf8(clean));
        }
        EditCounts counts(detail::sorted_unique_chars(clean_texts),
                          detail::sorted_unique_chars(obs_texts));
        for (size_t i = 0; i < pairs.size(); ++i)
            align_and_count(obs_texts[i], clean_texts[i], 1.0, counts);
        return estimate(counts, lambda);
    }

    // Near-noiseless channel over one alphabet: identity emissions dominate.
    static ErrorModel near_identity(const std::vector<char32_t>& alphabet, double noise_mass) {
        detail::require(noise_mass > 0.0 && noise_mass < 0.5, "near_identity: bad noise mass");
        std::vector<char32_t> sorted = alphabet;
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        ErrorModel m;
        m.clean_alphabet_ = sorted;
        m.obs_alphabet_ = sorted;
        m.lambda_ = noise_mass;
        const size_t n = sorted.size();
        const double eps = noise_mass / static_cast<double>(n + 1);
        m.sub_.assign(n * n, eps);
        m.del_.assign(n, eps);
        m.sub_unknown_.assign(n, eps);
        for (size_t i = 0; i < n; ++i) m.sub_[i * n + i] = 1.0 - noise_mass - eps;
        m.ins_.assign(n, 1.0 / static_cast<double>(n + 1));
        m.ins_unknown_ = 1.0 / static_cast<double>(n + 1);
        m.insertion_rate_ = 1e-4;
        return m;
    }

    // new = rho * prior + (1 - rho) * fresh, entrywise. Alphabets must match.
    static ErrorModel interpolate(const ErrorModel& prior, const ErrorModel& fresh, double rho) {
        detail::require(rho >= 0.0 && rho <= 1.0, "ErrorModel::interpolate: rho out of range");
        if (prior.clean_alphabet_ != fresh.clean_alphabet_ ||
            prior.obs_alphabet_ != fresh.obs_alphabet_)
            throw input_error("ErrorModel::interpolate: alphabet mismatch");
        ErrorModel m = prior;
        const auto mix = [rho](double a, double b) { return rho * a + (1.0 - rho) * b; };
        for (size_t i = 0; i < m.sub_.size(); ++i) m.sub_[i] = mix(prior.sub_[i], fresh.sub_[i]);
        for (size_t i = 0; i < m.del_.size(); ++i) m.del_[i] = mix(prior.del_[i], fresh.del_[i]);
        for (size_t i = 0; i < m.sub_unknown_.size(); ++i)
            m.sub_unknown_[i] = mix(prior.sub_unknown_[i], fresh.sub_unknown_[i]);
        for (size_t i = 0; i < m.ins_.size(); ++i) m.ins_[i] = mix(prior.ins_[i], fresh.ins_[i]);
        m.ins_unknown_ = mix(prior.ins_unknown_, fresh.ins_unknown_);
        m.insertion_rate_ = mix(prior.insertion_rate_, fresh.insertion_rate_);
        return m;
    }

    const std::vector<char32_t>& clean_alphabet() const { return clean_alphabet_; }
    const std::vector<char32_t>& obs_alphabet() const { return obs_alphabet_; }
    double lambda() const { return lambda_; }

    int clean_index(char32_t cp) const { return detail::alphabet_index(clean_alphabet_, cp); }
    int obs_index(char32_t cp) const { return detail::alphabet_index(obs_alphabet_, cp); }

    // P(observed | clean); clean_idx -1 selects the uniform unknown-row,
    // obs_idx -1 the per-row unknown bucket.
    double emit_prob(int clean_idx, int obs_idx) const {
        if (clean_idx < 0) return unknown_row_prob();
        if (obs_idx < 0) return sub_unknown_[clean_idx];
        return sub_[clean_idx * obs_alphabet_.size() + obs_idx];
    }
    double delete_prob(int clean_idx) const {
        return clean_idx < 0 ? unknown_row_prob() : del_[clean_idx];
    }
    double insert_prob(int obs_idx) const { return obs_idx < 0 ? ins_unknown_ : ins_[obs_idx]; }
    double insertion_rate() const { return insertion_rate_; }

    // Distribution checks: every per-character row and the insertion
    // distribution sum to 1 within tolerance, all entries positive.
    void validate(double tol = 1e-9) const {
        const size_t o_n = obs_alphabet_.size();
        for (size_t ci = 0; ci < clean_alphabet_.size(); ++ci) {
            double total = del_[ci] + sub_unknown_[ci];
            for (size_t oi = 0; oi < o_n; ++oi) {
                detail::require(sub_[ci * o_n + oi] > 0.0, "ErrorModel: non-positive probability");
                total += sub_[ci * o_n + oi];
            }
            detail::require(std::abs(total - 1.0) <= tol, "ErrorModel: row does not sum to 1");
        }
        double ins_total = ins_unknown_;
        for (double v : ins_) ins_total += v;
        detail::require(std::abs(ins_total - 1.0) <= tol,
                        "ErrorModel: insertion distribution does not sum to 1");
        detail::require(insertion_rate_ > 0.0 && insertion_rate_ < 1.0,
                        "ErrorModel: insertion rate out of range");
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["clean_alphabet"] = encode_utf8(std::u32string(clean_alphabet_.begin(), clean_alphabet_.end()));
        j["obs_alphabet"] = encode_utf8(std::u32string(obs_alphabet_.begin(), obs_alphabet_.end()));
        j["sub"] = sub_;
        j["del"] = del_;
        j["sub_unknown"] = sub_unknown_;
        j["ins"] = ins_;
        j["ins_unknown"] = ins_unknown_;
        j["insertion_rate"] = insertion_rate_;
        j["lambda"] = lambda_;
        return j;
    }

    static ErrorModel from_json(const nlohmann::json& j) {
        ErrorModel m;
        try {
            const auto clean = decode_utf8(j.at("clean_alphabet").get<std::string>());
            const auto obs = decode_utf8(j.at("obs_alphabet").get<std::string>());
            m.clean_alphabet_.assign(clean.begin(), clean.end());
            m.obs_alphabet_.assign(obs.begin(), obs.end());
            m.sub_ = j.at("sub").get<std::vector<double>>();
            m.del_ = j.at("del").get<std::vector<double>>();
            m.sub_unknown_ = j.at("sub_unknown").get<std::vector<double>>();
            m.ins_ = j.at("ins").get<std::vector<double>>();
            m.ins_unknown_ = j.at("ins_unknown").get<double>();
            m.insertion_rate_ = j.at("insertion_rate").get<double>();
            m.lambda_ = j.at("lambda").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw input_error(std::string("ErrorModel snapshot: ") + e.what());
        }
        if (m.sub_.size() != m.clean_alphabet_.size() * m.obs_alphabet_.size() ||
            m.del_.size() != m.clean_alphabet_.size() ||
            m.sub_unknown_.size() != m.clean_alphabet_.size() ||
            m.ins_.size() != m.obs_alphabet_.size())
            throw input_error("ErrorModel snapshot: inconsistent table sizes");
        return m;
    }

    bool operator==(const ErrorModel&) const = default;

private:
    double unknown_row_prob() const {
        return 1.0 / static_cast<double>(obs_alphabet_.size() + 2);
    }

    std::vector<char32_t> clean_alphabet_, obs_alphabet_;
    std::vector<double> sub_, del_, sub_unknown_, ins_;
    double ins_unknown_ = 1.0;
    double insertion_rate_ = 1e-4;
    double lambda_ = 0.1;
};

// Weighted maximum-likelihood re-estimation from self-training records:
// aligns each observation to its selected transcription, accumulates
// weight-scaled edit counts, smooths, and interpolates with the prior at
// ratio rho. Alphabets stay frozen to the prior's.
inline ErrorModel reestimate_error_model(
    const ErrorModel& prior, std::span<const FineTuneRecord> records,
    const std::function<std::optional<std::string>(const std::string&)>& resolve, double lambda,
    double rho = 0.5) {
    if (records.empty()) throw input_error("reestimate_error_model: no records");
    EditCounts counts(prior.clean_alphabet(), prior.obs_alphabet());
    for (const auto& r : records) {
        detail::require(r.origin == RecordOrigin::ASR_ADAPT,
                        "reestimate_error_model: records must be ASR_ADAPT");
        detail::require(r.weight > 0.0, "reestimate_error_model: weights must be positive");
        const auto obs = resolve(r.utterance_id);
        if (!obs)
            throw input_error("reestimate_error_model: unresolvable utterance id '" +
                              r.utterance_id + "'");
        align_and_count(decode_utf8(*obs), decode_utf8(r.target_text), r.weight, counts);
    }
    return ErrorModel::interpolate(prior, ErrorModel::estimate(counts, lambda), rho);
}

}  // namespace cyclefeed
