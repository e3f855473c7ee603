#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "surprisal/corpus.hpp"
#include "surprisal/evaluation.hpp"
#include "surprisal/model.hpp"
#include "surprisal/rng.hpp"

namespace surprisal {

/// Normalized Shannon entropy of per-node publication counts. Only nodes
/// with nonzero count enter, and m counts those included nodes; a single
/// active node yields 0 by convention.
inline double entropy_of_attention(std::span<const double> counts) {
    double total = 0.0;
    std::size_t active = 0;
    for (double c : counts) {
        if (c < 0.0) fail("entropy_of_attention: negative count");
        if (c > 0.0) {
            total += c;
            ++active;
        }
    }
    if (active == 0) fail("entropy_of_attention: all counts are zero");
    if (active == 1) return 0.0;
    double h = 0.0;
    for (double c : counts) {
        if (c <= 0.0) continue;
        double p = c / total;
        h -= p * std::log(p);
    }
    return h / std::log(static_cast<double>(active));
}

/// Ordered prior publications of one author.
struct AuthorHistory {
    std::string author_id;
    struct Entry {
        int year;
        std::string venue;
        std::string record_id;
    };
    std::vector<Entry> entries; // nondecreasing year

    /// Distinct venues published in strictly before `year` (no look-ahead).
    std::vector<std::string> venues_before(int year) const {
        std::set<std::string> vs;
        for (const auto& e : entries) {
            if (e.year >= year) break;
            if (!e.venue.empty()) vs.insert(e.venue);
        }
        return {vs.begin(), vs.end()};
    }
};

inline std::map<std::string, AuthorHistory>
build_author_histories(std::span<const CorpusRecord> records) {
    std::map<std::string, AuthorHistory> out;
    for (const auto& r : records)
        for (const auto& a : r.authors) {
            AuthorHistory& h = out[a];
            h.author_id = a;
            h.entries.push_back({r.year, r.venue, r.record_id});
        }
    for (auto& [id, h] : out)
        std::sort(h.entries.begin(), h.entries.end(),
                  [](const AuthorHistory::Entry& a, const AuthorHistory::Entry& b) {
                      if (a.year != b.year) return a.year < b.year;
                      return a.record_id < b.record_id;
                  });
    return out;
}

/// Content loadings of one venue: counts of its publications containing each
/// content node, L1-normalized.
struct VenueContentVector {
    std::string venue;
    std::unordered_map<NodeId, double> weights;
    bool empty_profile = true;
};

inline VenueContentVector
venue_content_vector(const std::string& venue,
                     std::span<const CorpusRecord> records,
                     const NodeRegistry& content_registry, int up_to_year) {
    VenueContentVector v;
    v.venue = venue;
    double total = 0.0;
    bool seen = false;
    for (const auto& r : records) {
        if (r.venue != venue || r.year > up_to_year) continue;
        seen = true;
        for (const auto& c : r.content_codes) {
            if (!content_registry.contains(c)) continue;
            v.weights[content_registry.id(c)] += 1.0;
            total += 1.0;
        }
    }
    if (!seen) fail("venue_content_vector: unknown venue '" + venue + "'");
    if (total > 0.0) {
        for (auto& [id, w] : v.weights) w /= total;
        v.empty_profile = false;
    }
    return v;
}

inline std::unordered_map<std::string, VenueContentVector>
build_venue_vectors(std::span<const CorpusRecord> records,
                    const NodeRegistry& content_registry, int up_to_year) {
    std::unordered_map<std::string, VenueContentVector> out;
    std::unordered_map<std::string, double> totals;
    for (const auto& r : records) {
        if (r.venue.empty() || r.year > up_to_year) continue;
        VenueContentVector& v = out[r.venue];
        v.venue = r.venue;
        for (const auto& c : r.content_codes) {
            if (!content_registry.contains(c)) continue;
            v.weights[content_registry.id(c)] += 1.0;
            totals[r.venue] += 1.0;
        }
    }
    for (auto& [venue, v] : out) {
        double total = totals[venue];
        if (total > 0.0) {
            for (auto& [id, w] : v.weights) w /= total;
            v.empty_profile = false;
        }
    }
    return out;
}

struct CosineResult {
    double value = 0.0;
    bool degenerate = false; // a restricted vector was zero
};

/// Cosine similarity of two venue vectors restricted to the focus content
/// nodes of the citing record.
inline CosineResult conditional_cosine(const VenueContentVector& a,
                                       const VenueContentVector& b,
                                       std::span<const NodeId> focus) {
    if (focus.empty()) fail("conditional_cosine: empty focus");
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (NodeId c : focus) {
        auto ia = a.weights.find(c);
        auto ib = b.weights.find(c);
        double va = ia == a.weights.end() ? 0.0 : ia->second;
        double vb = ib == b.weights.end() ? 0.0 : ib->second;
        dot += va * vb;
        na += va * va;
        nb += vb * vb;
    }
    if (na == 0.0 || nb == 0.0) return {0.0, true};
    return {dot / (std::sqrt(na) * std::sqrt(nb)), false};
}

/// Observed-vs-simulated histogram of citing/cited context similarity over
/// fixed-width bins on [0, 1]; the per-bin ratio is the relative likelihood
/// of citing at that similarity.
struct CitationSimilarityCurve {
    int n_bins = 20;
    std::vector<long long> observed;
    std::vector<long long> simulated;
    std::vector<double> ratio;    // NaN where undefined
    std::vector<char> defined;
    long long pairs = 0;
    long long degenerate_pairs = 0;
};

inline CitationSimilarityCurve citation_similarity_ratio(
    std::span<const CorpusRecord> records,
    const std::unordered_map<std::string, VenueContentVector>& vectors,
    const NodeRegistry& content_registry, int n_bins, Rng& rng) {
    if (n_bins < 2) fail("citation_similarity_ratio: need at least 2 bins");
    CitationSimilarityCurve c;
    c.n_bins = n_bins;
    c.observed.assign(static_cast<std::size_t>(n_bins), 0);
    c.simulated.assign(static_cast<std::size_t>(n_bins), 0);

    // Venue universe for the random baseline: context nodes with a content
    // profile to compare against.
    std::vector<const VenueContentVector*> universe;
    {
        std::vector<std::string> names;
        names.reserve(vectors.size());
        for (const auto& [name, v] : vectors)
            if (!v.empty_profile) names.push_back(name);
        std::sort(names.begin(), names.end());
        for (const auto& name : names) universe.push_back(&vectors.at(name));
    }
    if (universe.empty()) fail("citation_similarity_ratio: no venue vectors");

    auto bin_of = [&](double sim) {
        int b = static_cast<int>(sim * n_bins);
        return std::min(std::max(b, 0), n_bins - 1);
    };

    for (const auto& r : records) {
        if (r.venue.empty() || r.context_codes.empty()) continue;
        auto citing = vectors.find(r.venue);
        if (citing == vectors.end() || citing->second.empty_profile) continue;
        std::vector<NodeId> focus;
        for (const auto& code : r.content_codes)
            if (content_registry.contains(code))
                focus.push_back(content_registry.id(code));
        if (focus.empty()) continue;
        long long cited_count = 0;
        for (const auto& cited_name : r.context_codes) {
            auto cited = vectors.find(cited_name);
            if (cited == vectors.end())
                fail("citation_similarity_ratio: no vector for venue '" +
                     cited_name + "'");
            CosineResult cr =
                conditional_cosine(citing->second, cited->second, focus);
            if (cr.degenerate) ++c.degenerate_pairs;
            ++c.observed[static_cast<std::size_t>(bin_of(cr.value))];
            ++c.pairs;
            ++cited_count;
        }
        // Baseline: the same number of uniformly random cited venues.
        for (long long k = 0; k < cited_count; ++k) {
            const VenueContentVector* random_venue =
                universe[uniform_below(rng, universe.size())];
            CosineResult cr =
                conditional_cosine(citing->second, *random_venue, focus);
            ++c.simulated[static_cast<std::size_t>(bin_of(cr.value))];
        }
    }
    if (c.pairs == 0) fail("citation_similarity_ratio: no citation pairs");
    c.ratio.resize(static_cast<std::size_t>(n_bins));
    c.defined.assign(static_cast<std::size_t>(n_bins), 0);
    for (std::size_t b = 0; b < c.ratio.size(); ++b) {
        if (c.simulated[b] > 0) {
            c.defined[b] = 1;
            c.ratio[b] = static_cast<double>(c.observed[b]) /
                         static_cast<double>(c.simulated[b]);
        } else {
            c.ratio[b] = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return c;
}

// ---- background novelties --------------------------------------------------

namespace detail {

inline std::vector<NodeId> venue_ids(std::span<const std::string> venues,
                                     const NodeRegistry& registry) {
    std::vector<NodeId> ids;
    ids.reserve(venues.size());
    for (const auto& v : venues) ids.push_back(registry.id(v));
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    return ids;
}

} // namespace detail

/// Surprisal of the set of contexts one author has ever published in before
/// as_of_year.
inline double career_novelty(const AuthorHistory& history,
                             const ModelParams& theta_context,
                             const NodeRegistry& context_registry,
                             int as_of_year) {
    auto venues = history.venues_before(as_of_year);
    if (venues.empty())
        fail("career_novelty: no prior history for author '" +
             history.author_id + "'");
    auto ids = detail::venue_ids(venues, context_registry);
    return novelty(std::span<const NodeId>(ids), theta_context);
}

/// Surprisal of the union of the team's prior contexts.
inline double team_novelty(std::span<const AuthorHistory> histories,
                           const ModelParams& theta_context,
                           const NodeRegistry& context_registry,
                           int as_of_year) {
    std::set<std::string> venues;
    for (const auto& h : histories) {
        auto vs = h.venues_before(as_of_year);
        venues.insert(vs.begin(), vs.end());
    }
    if (venues.empty()) fail("team_novelty: no member has prior history");
    std::vector<std::string> list(venues.begin(), venues.end());
    auto ids = detail::venue_ids(list, context_registry);
    return novelty(std::span<const NodeId>(ids), theta_context);
}

/// Mean distance between members' venue backgrounds and the publishing
/// venue. A member's background is the mean theta row over their distinct
/// prior venues; the distance is the pairwise surprisal -log(b . theta_v).
/// Distances are accumulated in sorted order, so the result is exactly
/// invariant under member permutation.
inline double expedition_novelty(std::span<const AuthorHistory> histories,
                                 const std::string& venue,
                                 const ModelParams& theta_context,
                                 const NodeRegistry& context_registry,
                                 int as_of_year) {
    NodeId venue_id = context_registry.id(venue);
    std::vector<double> distances;
    std::vector<double> background(static_cast<std::size_t>(theta_context.D));
    for (const auto& h : histories) {
        auto venues = h.venues_before(as_of_year);
        if (venues.empty()) continue;
        auto ids = detail::venue_ids(venues, context_registry);
        std::fill(background.begin(), background.end(), 0.0);
        for (NodeId v : ids)
            for (int d = 0; d < theta_context.D; ++d)
                background[static_cast<std::size_t>(d)] +=
                    theta_context.theta(static_cast<std::size_t>(v),
                                        static_cast<std::size_t>(d));
        double inv = 1.0 / static_cast<double>(ids.size());
        double dot = 0.0;
        for (int d = 0; d < theta_context.D; ++d)
            dot += background[static_cast<std::size_t>(d)] * inv *
                   theta_context.theta(static_cast<std::size_t>(venue_id),
                                       static_cast<std::size_t>(d));
        distances.push_back(dot <= 0.0 ? kInf : std::max(0.0, -std::log(std::min(1.0, dot))));
    }
    if (distances.empty())
        fail("expedition_novelty: no member has prior history");
    std::sort(distances.begin(), distances.end());
    double sum = 0.0;
    for (double d : distances) sum += d;
    return sum / static_cast<double>(distances.size());
}

/// Adjusted Fisher-Pearson sample skewness over the finite values; infinite
/// sentinels are excluded and counted through `excluded`.
inline double sample_skewness(std::span<const double> values,
                              long long* excluded = nullptr) {
    std::vector<double> finite;
    finite.reserve(values.size());
    long long skipped = 0;
    for (double v : values) {
        if (std::isfinite(v))
            finite.push_back(v);
        else
            ++skipped;
    }
    if (excluded) *excluded = skipped;
    const auto m = static_cast<double>(finite.size());
    if (finite.size() < 3) fail("sample_skewness: need at least 3 finite values");
    double mean = 0.0;
    for (double v : finite) mean += v;
    mean /= m;
    double m2 = 0.0, m3 = 0.0;
    for (double v : finite) {
        double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    m2 /= m;
    m3 /= m;
    if (m2 == 0.0) fail("sample_skewness: zero variance");
    double g1 = m3 / std::pow(m2, 1.5);
    return g1 * std::sqrt(m * (m - 1.0)) / (m - 2.0);
}

} // namespace surprisal
