#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace archilens {

struct ImageRecord {
    std::string id;
    std::string group;
    std::string uri;
    std::string content_hash;  // 64 lowercase hex chars
};

struct DatasetManifest {
    // Group name -> records, in file order within each group.
    std::map<std::string, std::vector<ImageRecord>> groups;
    std::map<std::string, std::string> metadata;

    std::size_t record_count() const;
};

struct GroupSample {
    std::string group;
    std::vector<ImageRecord> records;
    std::uint64_t seed = 0;
    std::size_t requested_n = 0;
};

enum class PairMode { OrderedNoSelf, Unordered, OrderedWithSelf };

PairMode pair_mode_from_string(const std::string& name);
std::string to_string(PairMode mode);

/// Parse and validate a manifest file. Format: first line
/// `archdiff-manifest v1`; records are `id<TAB>group<TAB>uri<TAB>sha256`;
/// `#` starts a comment; `#!` comments of the form `#! key=value` populate
/// metadata. Throws MalformedManifest / DuplicateId / EmptyGroup.
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Seeded sample without replacement (splitmix64 + partial Fisher-Yates over
/// the group's file order). Undersized groups return every record. Pure in
/// (manifest order, group, n, seed).
GroupSample sample_group(const DatasetManifest& manifest, const std::string& group,
                         std::size_t n, std::uint64_t seed);

/// All group pairs in lexicographic order for the given mode.
std::vector<std::pair<std::string, std::string>> enumerate_pairs(const DatasetManifest& manifest,
                                                                 PairMode mode);

}  // namespace archilens
