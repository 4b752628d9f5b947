#include "archilens/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "archilens/errors.hpp"
#include "archilens/rng.hpp"

namespace archilens {

namespace {

constexpr const char* kHeader = "archdiff-manifest v1";

bool is_lower_hex64(const std::string& s) {
    if (s.size() != 64) return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    });
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::string::size_type start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
}

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

std::size_t DatasetManifest::record_count() const {
    std::size_t n = 0;
    for (const auto& [_, records] : groups) n += records.size();
    return n;
}

PairMode pair_mode_from_string(const std::string& name) {
    if (name == "ordered-no-self") return PairMode::OrderedNoSelf;
    if (name == "unordered") return PairMode::Unordered;
    if (name == "ordered-with-self") return PairMode::OrderedWithSelf;
    throw DomainError("unknown pair mode: " + name);
}

std::string to_string(PairMode mode) {
    switch (mode) {
        case PairMode::OrderedNoSelf: return "ordered-no-self";
        case PairMode::Unordered: return "unordered";
        case PairMode::OrderedWithSelf: return "ordered-with-self";
    }
    throw DomainError("invalid pair mode value");
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MalformedManifest("cannot open manifest: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw MalformedManifest("empty manifest: " + path.string());
    strip_cr(line);
    if (line != kHeader) {
        throw MalformedManifest("bad header line \"" + line + "\" (expected \"" + kHeader + "\")");
    }

    DatasetManifest manifest;
    std::set<std::string> seen_ids;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (line.empty()) continue;
        if (line.front() == '#') {
            // `#! key=value` lines carry manifest metadata.
            if (line.size() > 2 && line[1] == '!') {
                const auto eq = line.find('=', 2);
                if (eq != std::string::npos) {
                    std::string key = line.substr(2, eq - 2);
                    std::string value = line.substr(eq + 1);
                    const auto first = key.find_first_not_of(' ');
                    const auto last = key.find_last_not_of(' ');
                    if (first != std::string::npos) key = key.substr(first, last - first + 1);
                    if (!key.empty()) manifest.metadata[key] = value;
                }
            }
            continue;
        }

        const auto fields = split_tabs(line);
        if (fields.size() != 4) {
            throw MalformedManifest("line " + std::to_string(lineno) + ": expected 4 tab-separated fields, got " +
                                    std::to_string(fields.size()));
        }
        ImageRecord rec{fields[0], fields[1], fields[2], fields[3]};
        if (rec.id.empty()) {
            throw MalformedManifest("line " + std::to_string(lineno) + ": empty id");
        }
        if (rec.group.empty()) {
            throw EmptyGroup("line " + std::to_string(lineno) + ": record \"" + rec.id +
                             "\" has empty group");
        }
        if (!is_lower_hex64(rec.content_hash)) {
            throw MalformedManifest("line " + std::to_string(lineno) + ": record \"" + rec.id +
                                    "\" content hash is not 64 lowercase hex chars");
        }
        if (!seen_ids.insert(rec.id).second) {
            throw DuplicateId("duplicate record id \"" + rec.id + "\" at line " +
                              std::to_string(lineno));
        }
        manifest.groups[rec.group].push_back(std::move(rec));
    }
    return manifest;
}

GroupSample sample_group(const DatasetManifest& manifest, const std::string& group,
                         std::size_t n, std::uint64_t seed) {
    const auto it = manifest.groups.find(group);
    if (it == manifest.groups.end()) throw UnknownGroup("no such group: " + group);
    if (n < 1) throw DomainError("sample size must be >= 1");
    const auto& pool = it->second;

    GroupSample sample;
    sample.group = group;
    sample.seed = seed;
    sample.requested_n = n;

    if (pool.size() <= n) {
        sample.records = pool;  // undersized group: take everything, file order
        return sample;
    }

    // Partial Fisher-Yates over index positions: the first n swapped slots
    // are a uniform sample without replacement.
    std::vector<std::size_t> idx(pool.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    SplitMix64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
        std::swap(idx[i], idx[j]);
    }
    sample.records.reserve(n);
    for (std::size_t i = 0; i < n; ++i) sample.records.push_back(pool[idx[i]]);
    return sample;
}

std::vector<std::pair<std::string, std::string>> enumerate_pairs(const DatasetManifest& manifest,
                                                                 PairMode mode) {
    if (manifest.groups.size() < 2) throw DomainError("pair enumeration needs >= 2 groups");
    std::vector<std::string> names;
    names.reserve(manifest.groups.size());
    for (const auto& [name, _] : manifest.groups) names.push_back(name);
    // std::map iteration is already lexicographic.

    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& a : names) {
        for (const auto& b : names) {
            switch (mode) {
                case PairMode::OrderedNoSelf:
                    if (a != b) pairs.emplace_back(a, b);
                    break;
                case PairMode::Unordered:
                    if (a < b) pairs.emplace_back(a, b);
                    break;
                case PairMode::OrderedWithSelf:
                    pairs.emplace_back(a, b);
                    break;
            }
        }
    }
    return pairs;
}

}  // namespace archilens
