#pragma once

#include <span>
#include <string>
#include <string_view>

#include "cyclefeed/backends/snapshot.hpp"
#include "cyclefeed/core.hpp"
#include "cyclefeed/selection.hpp"

// Abstract ASR/MT contract the adaptation loop runs against. Inference
// calls (transcribe_kbest, translate) are deterministic given model state
// and read-only, so they may run concurrently; fine_tune mutates state and
// requires exclusive access (single writer, no concurrent readers).

namespace cyclefeed {

class AsrBackend {
public:
    virtual ~AsrBackend() = default;

    // Up to k distinct transcription hypotheses, scores non-increasing.
    virtual KBestList transcribe_kbest(const Utterance& utterance, int k) const = 0;

    // Weighted self-training update from ASR_ADAPT records. An empty record
    // set is a no-op.
    virtual void fine_tune(std::span<const FineTuneRecord> records) = 0;

    virtual SnapshotBlob snapshot() const = 0;
    virtual void restore(const SnapshotBlob& blob) = 0;
    virtual std::string kind() const = 0;
};

class MtBackend {
public:
    virtual ~MtBackend() = default;

    virtual std::string translate(std::string_view source) const = 0;

    // Weighted update from MT_ADAPT records. An empty record set is a no-op.
    virtual void fine_tune(std::span<const FineTuneRecord> records) = 0;

    virtual SnapshotBlob snapshot() const = 0;
    virtual void restore(const SnapshotBlob& blob) = 0;
    virtual std::string kind() const = 0;
};

}  // namespace cyclefeed
