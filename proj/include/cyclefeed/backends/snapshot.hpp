#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "cyclefeed/errors.hpp"
#include "cyclefeed/rng.hpp"

// Snapshot blobs are canonical JSON: sorted object keys (nlohmann's default
// object is an ordered map) and shortest round-trip number formatting, so
// two snapshots of the same state are byte-identical.

namespace cyclefeed {

using SnapshotBlob = std::string;

inline constexpr int kSnapshotFormatVersion = 1;

inline SnapshotBlob make_snapshot(std::string_view backend_kind, nlohmann::json payload) {
    nlohmann::json j;
    j["backend_kind"] = std::string(backend_kind);
    j["format_version"] = kSnapshotFormatVersion;
    j["payload"] = std::move(payload);
    return j.dump();
}

// Parses a blob and checks the kind/version header. Malformed blobs and
// blobs from a different backend type are input errors.
inline nlohmann::json parse_snapshot(const SnapshotBlob& blob, std::string_view expected_kind) {
    nlohmann::json j = nlohmann::json::parse(blob, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw input_error("snapshot: malformed blob");
    if (!j.contains("backend_kind") || !j.contains("format_version") || !j.contains("payload"))
        throw input_error("snapshot: missing header fields");
    const auto kind = j["backend_kind"].get<std::string>();
    if (kind != expected_kind)
        throw input_error("snapshot: backend kind mismatch (blob is '" + kind + "', expected '" +
                          std::string(expected_kind) + "')");
    if (j["format_version"].get<int>() != kSnapshotFormatVersion)
        throw input_error("snapshot: unsupported format version");
    return j["payload"];
}

inline uint64_t snapshot_hash(const SnapshotBlob& blob) { return fnv1a64(blob); }

}  // namespace cyclefeed
