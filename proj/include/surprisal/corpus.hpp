#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "surprisal/util.hpp"

namespace surprisal {

using NodeId = std::int32_t;

enum class Kind { content, context };

inline std::string_view kind_name(Kind k) {
    return k == Kind::content ? "content" : "context";
}

inline Kind kind_from_name(std::string_view s) {
    if (s == "content") return Kind::content;
    if (s == "context") return Kind::context;
    fail("unknown kind: " + std::string(s));
}

/// One paper or patent. Content codes are ontology terms; context codes are
/// the venues cited in its references.
struct CorpusRecord {
    std::string record_id;
    int year = 0;
    std::vector<std::string> content_codes; // sorted, distinct
    std::vector<std::string> context_codes; // sorted, distinct
    std::string venue;
    std::vector<std::string> authors;
    long long citations = 0;
};

namespace detail {

inline std::vector<std::string> sorted_unique(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

} // namespace detail

/// Parses JSON Lines. Fields: id, year, content; optional: context, venue,
/// authors, citations. Lines starting with '#' carry artifact metadata and
/// are skipped. Errors carry the 1-based line number.
inline std::vector<CorpusRecord> parse_corpus(std::istream& in) {
    std::vector<CorpusRecord> records;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    long long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        if (line[first] == '#') continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            fail("line " + std::to_string(line_no) + ": malformed JSON");
        auto where = [&] { return "line " + std::to_string(line_no) + ": "; };
        auto require = [&](const char* field) -> const nlohmann::json& {
            auto it = j.find(field);
            if (it == j.end())
                fail(where() + "missing required field '" + field + "'");
            return *it;
        };
        CorpusRecord r;
        try {
            r.record_id = require("id").get<std::string>();
            r.year = require("year").get<int>();
            r.content_codes =
                require("content").get<std::vector<std::string>>();
            if (j.contains("context"))
                r.context_codes = j["context"].get<std::vector<std::string>>();
            if (j.contains("venue")) r.venue = j["venue"].get<std::string>();
            if (j.contains("authors"))
                r.authors = j["authors"].get<std::vector<std::string>>();
            if (j.contains("citations"))
                r.citations = j["citations"].get<long long>();
        } catch (const nlohmann::json::exception& e) {
            fail(where() + e.what());
        }
        if (r.record_id.empty()) fail(where() + "empty record id");
        if (!seen_ids.insert(r.record_id).second)
            fail(where() + "duplicate record id '" + r.record_id + "'");
        r.content_codes = detail::sorted_unique(std::move(r.content_codes));
        r.context_codes = detail::sorted_unique(std::move(r.context_codes));
        if (r.content_codes.empty())
            fail(where() + "field 'content' must be nonempty");
        if (r.citations < 0) fail(where() + "negative citations");
        records.push_back(std::move(r));
    }
    return records;
}

inline nlohmann::json record_to_json(const CorpusRecord& r) {
    return nlohmann::json{{"id", r.record_id},       {"year", r.year},
                          {"content", r.content_codes},
                          {"context", r.context_codes},
                          {"venue", r.venue},        {"authors", r.authors},
                          {"citations", r.citations}};
}

/// Bijection string code <-> dense NodeId, ids contiguous from 0.
class NodeRegistry {
  public:
    NodeRegistry() = default;
    explicit NodeRegistry(Kind kind) : kind_(kind) {}

    /// Builds with ids assigned in the order given. build_hypergraph passes
    /// codes sorted, which makes the assignment canonical; tests may pass a
    /// permuted order to exercise relabeling.
    NodeRegistry(Kind kind, std::vector<std::string> codes) : kind_(kind) {
        codes_ = std::move(codes);
        for (std::size_t i = 0; i < codes_.size(); ++i) {
            if (!ids_.emplace(codes_[i], static_cast<NodeId>(i)).second)
                fail("NodeRegistry: duplicate code '" + codes_[i] + "'");
        }
    }

    Kind kind() const { return kind_; }
    NodeId size() const { return static_cast<NodeId>(codes_.size()); }

    const std::string& code(NodeId id) const {
        if (id < 0 || id >= size()) fail("NodeRegistry: id out of range");
        return codes_[static_cast<std::size_t>(id)];
    }

    NodeId id(const std::string& code) const {
        auto it = ids_.find(code);
        if (it == ids_.end()) fail("unknown code '" + code + "'");
        return it->second;
    }

    bool contains(const std::string& code) const { return ids_.count(code) > 0; }

    const std::vector<std::string>& codes() const { return codes_; }

    /// Order-sensitive digest of (kind, id -> code); checkpoints store it so
    /// a model is never evaluated against a foreign registry.
    std::string digest() const {
        std::uint64_t h = fnv1a64(kind_name(kind_));
        for (const auto& c : codes_) {
            h = fnv1a64(c, h);
            h = fnv1a64("\n", h);
        }
        return hex64(h);
    }

    bool operator==(const NodeRegistry& o) const {
        return kind_ == o.kind_ && codes_ == o.codes_;
    }

  private:
    Kind kind_ = Kind::content;
    std::vector<std::string> codes_;
    std::unordered_map<std::string, NodeId> ids_;
};

/// A node combination realized by at least one record; multiplicity is the
/// count of records realizing exactly this node set in a year.
struct Hyperedge {
    std::vector<NodeId> nodes; // ascending, distinct
    long long multiplicity = 1;

    bool operator==(const Hyperedge& o) const = default;
};

struct NodeVecHash {
    std::size_t operator()(const std::vector<NodeId>& v) const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (NodeId n : v) {
            h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(n));
            h *= 0x100000001b3ull;
        }
        return static_cast<std::size_t>(h);
    }
};

/// One year of hyperedges plus a membership index.
class Slice {
  public:
    void add(std::vector<NodeId> nodes, long long multiplicity) {
        auto it = index_.find(nodes);
        if (it != index_.end()) {
            edges_[it->second].multiplicity += multiplicity;
        } else {
            index_.emplace(nodes, edges_.size());
            edges_.push_back(Hyperedge{std::move(nodes), multiplicity});
        }
    }

    bool contains(const std::vector<NodeId>& nodes) const {
        return index_.count(nodes) > 0;
    }

    long long multiplicity(const std::vector<NodeId>& nodes) const {
        auto it = index_.find(nodes);
        return it == index_.end() ? 0 : edges_[it->second].multiplicity;
    }

    const std::vector<Hyperedge>& edges() const { return edges_; }
    bool empty() const { return edges_.empty(); }

    long long total_multiplicity() const {
        long long s = 0;
        for (const auto& e : edges_) s += e.multiplicity;
        return s;
    }

    /// Reorders edges by ascending node sequence; snapshots and training use
    /// this order so outputs do not depend on insertion order.
    void canonicalize() {
        std::sort(edges_.begin(), edges_.end(),
                  [](const Hyperedge& a, const Hyperedge& b) {
                      return a.nodes < b.nodes;
                  });
        index_.clear();
        for (std::size_t i = 0; i < edges_.size(); ++i)
            index_.emplace(edges_[i].nodes, i);
    }

    bool operator==(const Slice& o) const { return edges_ == o.edges_; }

  private:
    std::vector<Hyperedge> edges_;
    std::unordered_map<std::vector<NodeId>, std::size_t, NodeVecHash> index_;
};

/// Yearly hypergraphs over a shared registry. Immutable once built; safe for
/// concurrent readers.
struct TemporalHypergraph {
    NodeRegistry registry;
    std::map<int, Slice> slices;          // one entry per year in range
    std::map<int, long long> skipped;     // records with empty code set
    int year_lo = 0;
    int year_hi = 0;
    int max_edge_size = 0;

    const Slice& slice(int year) const {
        auto it = slices.find(year);
        if (it == slices.end())
            fail("no slice for year " + std::to_string(year));
        return it->second;
    }

    bool operator==(const TemporalHypergraph& o) const {
        return registry == o.registry && slices == o.slices &&
               skipped == o.skipped && year_lo == o.year_lo &&
               year_hi == o.year_hi && max_edge_size == o.max_edge_size;
    }
};

/// Materializes the yearly hypergraph for one kind. The registry covers the
/// union of codes over all years in range (plus publishing venues for the
/// context kind, so venue embeddings exist for analytics); codes are sorted,
/// which makes the result independent of record order.
inline TemporalHypergraph build_hypergraph(std::span<const CorpusRecord> records,
                                           Kind kind, int year_lo, int year_hi) {
    if (year_lo > year_hi) fail("build_hypergraph: empty year range");
    std::set<std::string> codes;
    for (const auto& r : records) {
        if (r.year < year_lo || r.year > year_hi) continue;
        const auto& cs =
            kind == Kind::content ? r.content_codes : r.context_codes;
        codes.insert(cs.begin(), cs.end());
        if (kind == Kind::context && !r.venue.empty()) codes.insert(r.venue);
    }
    TemporalHypergraph g;
    g.registry = NodeRegistry(kind, {codes.begin(), codes.end()});
    g.year_lo = year_lo;
    g.year_hi = year_hi;
    for (int y = year_lo; y <= year_hi; ++y) {
        g.slices[y];
        g.skipped[y] = 0;
    }
    for (const auto& r : records) {
        if (r.year < year_lo || r.year > year_hi) continue;
        const auto& cs =
            kind == Kind::content ? r.content_codes : r.context_codes;
        if (cs.empty()) {
            ++g.skipped[r.year];
            continue;
        }
        std::vector<NodeId> nodes;
        nodes.reserve(cs.size());
        for (const auto& c : cs) nodes.push_back(g.registry.id(c));
        std::sort(nodes.begin(), nodes.end());
        g.max_edge_size =
            std::max(g.max_edge_size, static_cast<int>(nodes.size()));
        g.slices[r.year].add(std::move(nodes), 1);
    }
    for (auto& [year, slice] : g.slices) slice.canonicalize();
    return g;
}

// ---- snapshot format -------------------------------------------------------

inline constexpr int kSnapshotFormatVersion = 1;

/// Snapshot JSON: registry as the id-ordered code list, slices keyed by year
/// with edges as [nodes..., multiplicity] arrays.
inline nlohmann::json snapshot_to_json(const TemporalHypergraph& g) {
    nlohmann::json slices = nlohmann::json::object();
    for (const auto& [year, slice] : g.slices) {
        nlohmann::json edges = nlohmann::json::array();
        for (const auto& e : slice.edges()) {
            nlohmann::json row = nlohmann::json::array();
            for (NodeId n : e.nodes) row.push_back(n);
            row.push_back(e.multiplicity);
            edges.push_back(std::move(row));
        }
        slices[std::to_string(year)] = std::move(edges);
    }
    nlohmann::json skipped = nlohmann::json::object();
    for (const auto& [year, count] : g.skipped)
        skipped[std::to_string(year)] = count;
    return nlohmann::json{{"format_version", kSnapshotFormatVersion},
                          {"kind", kind_name(g.registry.kind())},
                          {"registry", g.registry.codes()},
                          {"registry_digest", g.registry.digest()},
                          {"years", {g.year_lo, g.year_hi}},
                          {"max_edge_size", g.max_edge_size},
                          {"skipped", std::move(skipped)},
                          {"slices", std::move(slices)}};
}

inline TemporalHypergraph snapshot_from_json(const nlohmann::json& j) {
    if (!j.contains("format_version") ||
        j["format_version"].get<int>() != kSnapshotFormatVersion)
        fail("snapshot: unsupported format version");
    TemporalHypergraph g;
    g.registry = NodeRegistry(kind_from_name(j.at("kind").get<std::string>()),
                              j.at("registry").get<std::vector<std::string>>());
    g.year_lo = j.at("years").at(0).get<int>();
    g.year_hi = j.at("years").at(1).get<int>();
    g.max_edge_size = j.at("max_edge_size").get<int>();
    for (int y = g.year_lo; y <= g.year_hi; ++y) {
        g.slices[y];
        g.skipped[y] = 0;
    }
    if (j.contains("skipped"))
        for (const auto& [k, v] : j["skipped"].items())
            g.skipped[std::stoi(k)] = v.get<long long>();
    for (const auto& [k, edges] : j.at("slices").items()) {
        int year = std::stoi(k);
        if (year < g.year_lo || year > g.year_hi)
            fail("snapshot: slice year outside range");
        Slice& slice = g.slices[year];
        for (const auto& row : edges) {
            if (!row.is_array() || row.size() < 2)
                fail("snapshot: bad edge row");
            std::vector<NodeId> nodes;
            for (std::size_t i = 0; i + 1 < row.size(); ++i) {
                NodeId n = row[i].get<NodeId>();
                if (n < 0 || n >= g.registry.size())
                    fail("snapshot: node id out of range");
                nodes.push_back(n);
            }
            if (!std::is_sorted(nodes.begin(), nodes.end()) ||
                std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end())
                fail("snapshot: edge nodes must be sorted and distinct");
            long long mult = row.back().get<long long>();
            if (mult < 1) fail("snapshot: multiplicity must be positive");
            if (static_cast<int>(nodes.size()) > g.max_edge_size)
                fail("snapshot: edge larger than max_edge_size");
            slice.add(std::move(nodes), mult);
        }
        slice.canonicalize();
    }
    return g;
}

} // namespace surprisal
