#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cyclefeed/backends/error_model.hpp"
#include "cyclefeed/errors.hpp"
#include "cyclefeed/unicode.hpp"

// Character n-gram language model with add-lambda smoothing. Contexts
// never seen in training back off to the next lower order. Counts are kept
// (as weighted doubles) rather than probabilities so models can be blended
// during self-training updates.

namespace cyclefeed {

inline constexpr int kMaxLmOrder = 4;

class CharLm {
public:
    // Fixed-width context, most recent symbol last, BOS-padded.
    using Context = std::array<int32_t, kMaxLmOrder - 1>;

    CharLm() = default;

    struct WeightedText {
        std::u32string text;
        double weight = 1.0;
    };

    static CharLm train(const std::vector<std::string>& texts, int order = 3,
                        double lambda = 0.1) {
        std::vector<WeightedText> wt;
        std::vector<std::u32string> decoded;
        for (const auto& t : texts) decoded.push_back(decode_utf8(t));
        for (auto& d : decoded) wt.push_back({d, 1.0});
        return train_with_alphabet(wt, detail::sorted_unique_chars(decoded), order, lambda);
    }

    static CharLm train_with_alphabet(const std::vector<WeightedText>& texts,
                                      std::vector<char32_t> alphabet, int order, double lambda) {
        detail::require(order >= 1 && order <= kMaxLmOrder, "CharLm: order must be in 1..4");
        detail::require(lambda > 0.0, "CharLm: lambda must be positive");
        CharLm lm;
        lm.order_ = order;
        lm.lambda_ = lambda;
        lm.alphabet_ = std::move(alphabet);
        lm.init_tables();
        for (const auto& [text, weight] : texts) lm.add_text(text, weight);
        return lm;
    }

    // Count-space blend: the update corpus is rescaled to the prior's total
    // event mass, then new = rho * prior + (1 - rho) * scaled update. Keeps
    // pre-training influence regardless of update corpus size.
    static CharLm blend(const CharLm& prior, const CharLm& update, double rho) {
        detail::require(rho >= 0.0 && rho <= 1.0, "CharLm::blend: rho out of range");
        if (prior.alphabet_ != update.alphabet_ || prior.order_ != update.order_)
            throw input_error("CharLm::blend: model shapes do not match");
        CharLm lm = prior;
        const double scale =
            update.total_events_ > 0.0 ? prior.total_events_ / update.total_events_ : 0.0;
        for (int k = 0; k < lm.order_; ++k) {
            for (size_t i = 0; i < lm.counts_[k].size(); ++i)
                lm.counts_[k][i] =
                    rho * prior.counts_[k][i] + (1.0 - rho) * scale * update.counts_[k][i];
            for (size_t i = 0; i < lm.totals_[k].size(); ++i)
                lm.totals_[k][i] =
                    rho * prior.totals_[k][i] + (1.0 - rho) * scale * update.totals_[k][i];
        }
        lm.total_events_ = rho * prior.total_events_ + (1.0 - rho) * scale * update.total_events_;
        return lm;
    }

    int order() const { return order_; }
    double lambda() const { return lambda_; }
    const std::vector<char32_t>& alphabet() const { return alphabet_; }
    double total_events() const { return total_events_; }

    int32_t char_symbol(char32_t cp) const {
        return detail::alphabet_index(alphabet_, cp);  // -1 when unknown
    }
    int32_t bos_symbol() const { return static_cast<int32_t>(alphabet_.size()); }
    int32_t eos_outcome() const { return static_cast<int32_t>(alphabet_.size()); }
    int32_t unk_outcome() const { return static_cast<int32_t>(alphabet_.size()) + 1; }

    Context initial_context() const {
        Context ctx;
        ctx.fill(bos_symbol());
        return ctx;
    }

    Context advance(Context ctx, int32_t symbol) const {
        for (size_t i = 0; i + 1 < ctx.size(); ++i) ctx[i] = ctx[i + 1];
        ctx.back() = symbol;
        return ctx;
    }

    // log P(outcome | context): longest context level whose counts exist,
    // backing off past contexts containing unknown symbols.
    double log_prob(const Context& ctx, int32_t outcome) const {
        const int32_t out = (outcome < 0) ? unk_outcome() : outcome;
        for (int k = order_ - 1; k >= 1; --k) {
            bool indexable = true;
            size_t idx = 0;
            for (int p = 0; p < k; ++p) {
                const int32_t sym = ctx[ctx.size() - k + p];
                if (sym < 0) {
                    indexable = false;
                    break;
                }
                idx = idx * (alphabet_.size() + 1) + static_cast<size_t>(sym);
            }
            if (!indexable || totals_[k][idx] <= 0.0) continue;
            return std::log((counts_[k][idx * n_outcomes() + out] + lambda_) /
                            (totals_[k][idx] + lambda_ * n_outcomes()));
        }
        return std::log((counts_[0][out] + lambda_) / (totals_[0][0] + lambda_ * n_outcomes()));
    }

    // Whole-sequence score including the end-of-string event.
    double sequence_log_prob(std::string_view text) const {
        const std::u32string cps = decode_utf8(text);
        Context ctx = initial_context();
        double score = 0.0;
        for (char32_t cp : cps) {
            const int32_t sym = char_symbol(cp);
            score += log_prob(ctx, sym);
            ctx = advance(ctx, sym);
        }
        return score + log_prob(ctx, eos_outcome());
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["order"] = order_;
        j["lambda"] = lambda_;
        j["alphabet"] = encode_utf8(std::u32string(alphabet_.begin(), alphabet_.end()));
        j["counts"] = counts_;
        j["totals"] = totals_;
        j["total_events"] = total_events_;
        return j;
    }

    static CharLm from_json(const nlohmann::json& j) {
        CharLm lm;
        try {
            lm.order_ = j.at("order").get<int>();
            lm.lambda_ = j.at("lambda").get<double>();
            const auto chars = decode_utf8(j.at("alphabet").get<std::string>());
            lm.alphabet_.assign(chars.begin(), chars.end());
            lm.counts_ = j.at("counts").get<std::vector<std::vector<double>>>();
            lm.totals_ = j.at("totals").get<std::vector<std::vector<double>>>();
            lm.total_events_ = j.at("total_events").get<double>();
        } catch (const nlohmann::json::exception& e) {
            throw input_error(std::string("CharLm snapshot: ") + e.what());
        }
        if (lm.order_ < 1 || lm.order_ > kMaxLmOrder ||
            lm.counts_.size() != static_cast<size_t>(lm.order_) ||
            lm.totals_.size() != static_cast<size_t>(lm.order_))
            throw input_error("CharLm snapshot: inconsistent tables");
        return lm;
    }

    bool operator==(const CharLm&) const = default;

private:
    size_t n_outcomes() const { return alphabet_.size() + 2; }  // chars + EOS + UNK

    void init_tables() {
        counts_.assign(order_, {});
        totals_.assign(order_, {});
        size_t n_contexts = 1;
        for (int k = 0; k < order_; ++k) {
            counts_[k].assign(n_contexts * n_outcomes(), 0.0);
            totals_[k].assign(n_contexts, 0.0);
            n_contexts *= alphabet_.size() + 1;
        }
    }

    void add_text(const std::u32string& text, double weight) {
        Context ctx = initial_context();
        for (size_t t = 0; t <= text.size(); ++t) {
            const int32_t out =
                t < text.size() ? char_symbol(text[t]) : eos_outcome();
            const int32_t stored = out < 0 ? unk_outcome() : out;
            for (int k = 0; k < order_; ++k) {
                bool indexable = true;
                size_t idx = 0;
                for (int p = 0; p < k; ++p) {
                    const int32_t sym = ctx[ctx.size() - k + p];
                    if (sym < 0) {
                        indexable = false;
                        break;
                    }
                    idx = idx * (alphabet_.size() + 1) + static_cast<size_t>(sym);
                }
                if (!indexable) continue;
                counts_[k][idx * n_outcomes() + stored] += weight;
                totals_[k][idx] += weight;
            }
            total_events_ += weight;
            if (t < text.size()) ctx = advance(ctx, out);
        }
    }

    int order_ = 3;
    double lambda_ = 0.1;
    std::vector<char32_t> alphabet_;
    std::vector<std::vector<double>> counts_;  // per context length 0..order-1
    std::vector<std::vector<double>> totals_;
    double total_events_ = 0.0;
};

}  // namespace cyclefeed
