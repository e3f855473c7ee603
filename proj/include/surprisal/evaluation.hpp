#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "surprisal/corpus.hpp"
#include "surprisal/model.hpp"
#include "surprisal/rng.hpp"

namespace surprisal {

struct AucEstimate {
    double value = 0.0;
    long long n_pairs = 0;
    long long wins = 0;
    long long ties = 0;
    long long losses = 0;
    std::uint64_t seed = 0;
};

inline nlohmann::json auc_to_json(const AucEstimate& a) {
    return nlohmann::json{{"auc", a.value},   {"n_pairs", a.n_pairs},
                          {"wins", a.wins},   {"ties", a.ties},
                          {"losses", a.losses}, {"seed", a.seed}};
}

/// Paired-sample AUC: repeatedly draw a uniform hyperedge from the held-out
/// slice and a uniform non-edge of the same size, compare propensities under
/// the fitted parameters; ties earn half credit.
inline AucEstimate estimate_auc(const ModelParams& model_at_T,
                                const Slice& next_slice, long long n_pairs,
                                std::uint64_t seed) {
    if (next_slice.empty()) fail("estimate_auc: next slice is empty");
    if (n_pairs < 1) fail("estimate_auc: n_pairs must be positive");
    const auto& edges = next_slice.edges();
    const NodeId n = model_at_T.n_nodes();
    Rng rng = make_rng(seed, 0x617563); // "auc"
    AucEstimate est;
    est.n_pairs = n_pairs;
    est.seed = seed;
    std::vector<NodeId> neg;
    for (long long k = 0; k < n_pairs; ++k) {
        const Hyperedge& pos = edges[uniform_below(rng, edges.size())];
        const auto s = pos.nodes.size();
        int attempts = 0;
        while (true) {
            if (++attempts > 1000)
                fail("estimate_auc: no negative of size " + std::to_string(s) +
                     " found; universe saturated");
            neg.clear();
            while (neg.size() < s) {
                NodeId v = static_cast<NodeId>(
                    uniform_below(rng, static_cast<std::uint64_t>(n)));
                if (std::find(neg.begin(), neg.end(), v) == neg.end())
                    neg.push_back(v);
            }
            std::sort(neg.begin(), neg.end());
            if (!next_slice.contains(neg)) break;
        }
        double lp = propensity(std::span<const NodeId>(pos.nodes), model_at_T);
        double ln = propensity(std::span<const NodeId>(neg), model_at_T);
        if (lp > ln)
            ++est.wins;
        else if (lp == ln)
            ++est.ties;
        else
            ++est.losses;
    }
    est.value = (static_cast<double>(est.wins) +
                 0.5 * static_cast<double>(est.ties)) /
                static_cast<double>(est.n_pairs);
    return est;
}

/// Maps scores within one group to percentiles 100*(rank-0.5)/m, with
/// average ranks for ties. +inf sorts above every finite value.
inline std::vector<double> percentile_transform(std::span<const double> scores) {
    if (scores.empty()) fail("percentile_transform: empty group");
    const std::size_t m = scores.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] < scores[b];
    });
    std::vector<double> pct(m);
    std::size_t k = 0;
    while (k < m) {
        std::size_t j = k;
        while (j + 1 < m && scores[order[j + 1]] == scores[order[k]]) ++j;
        // average rank of the tie group, 1-based
        double rank = (static_cast<double>(k + 1) + static_cast<double>(j + 1)) / 2.0;
        double p = 100.0 * (rank - 0.5) / static_cast<double>(m);
        for (std::size_t i = k; i <= j; ++i) pct[order[i]] = p;
        k = j + 1;
    }
    return pct;
}

/// Per-year percentile transform over (year, score) pairs, aligned with the
/// input order.
inline std::vector<double> percentile_by_year(std::span<const int> years,
                                              std::span<const double> scores) {
    if (years.size() != scores.size())
        fail("percentile_by_year: length mismatch");
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < years.size(); ++i)
        groups[years[i]].push_back(i);
    std::vector<double> out(scores.size());
    for (const auto& [year, idx] : groups) {
        std::vector<double> vals;
        vals.reserve(idx.size());
        for (std::size_t i : idx) vals.push_back(scores[i]);
        std::vector<double> pct = percentile_transform(vals);
        for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = pct[k];
    }
    return out;
}

/// Top 10% most cited records of each year, ceil(0.1 m) of them, citation
/// ties broken by ascending record id.
inline std::unordered_map<std::string, bool>
label_hits(std::span<const CorpusRecord> records) {
    std::map<int, std::vector<const CorpusRecord*>> by_year;
    for (const auto& r : records) by_year[r.year].push_back(&r);
    std::unordered_map<std::string, bool> hits;
    hits.reserve(records.size());
    for (auto& [year, group] : by_year) {
        std::sort(group.begin(), group.end(),
                  [](const CorpusRecord* a, const CorpusRecord* b) {
                      if (a->citations != b->citations)
                          return a->citations > b->citations;
                      return a->record_id < b->record_id;
                  });
        std::size_t n_hits = static_cast<std::size_t>(std::ceil(
            0.1 * static_cast<double>(group.size())));
        for (std::size_t k = 0; k < group.size(); ++k)
            hits[group[k]->record_id] = k < n_hits;
    }
    return hits;
}

/// Equal-population binning of percentile scores; supports an optional
/// second axis for the joint surface. Cells of the surface can be empty and
/// are flagged rather than zero-filled.
struct BinnedCurve {
    int bins_a = 0;
    int bins_b = 0;                 // 0 for a plain curve
    std::vector<double> edges_a;    // bins_a + 1 percentile boundaries
    std::vector<double> centers_a;  // mean member percentile per bin
    std::vector<double> edges_b;
    std::vector<double> centers_b;
    std::vector<long long> counts;    // bins_a or bins_a*bins_b (row-major)
    std::vector<long long> hit_counts;
    std::vector<double> fractions;    // NaN where undefined
    std::vector<char> defined;

    bool is_surface() const { return bins_b > 0; }
};

namespace detail {

/// Splits m ranked items into n near-equal bins, remainder on leading bins.
/// Returns the bin of each rank position.
inline std::vector<int> equal_count_bins(std::size_t m, int n_bins) {
    std::vector<int> bin_of(m);
    std::size_t base = m / static_cast<std::size_t>(n_bins);
    std::size_t rem = m % static_cast<std::size_t>(n_bins);
    std::size_t pos = 0;
    for (int b = 0; b < n_bins; ++b) {
        std::size_t width = base + (static_cast<std::size_t>(b) < rem ? 1 : 0);
        for (std::size_t k = 0; k < width; ++k) bin_of[pos++] = b;
    }
    return bin_of;
}

inline std::vector<std::size_t> rank_order(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                         return values[a] < values[b];
                     });
    return order;
}

inline void axis_edges_centers(std::span<const double> values,
                               const std::vector<std::size_t>& order,
                               const std::vector<int>& bin_of, int n_bins,
                               std::vector<double>& edges,
                               std::vector<double>& centers) {
    edges.assign(static_cast<std::size_t>(n_bins) + 1, 0.0);
    centers.assign(static_cast<std::size_t>(n_bins), 0.0);
    std::vector<long long> counts(static_cast<std::size_t>(n_bins), 0);
    std::vector<double> lo(static_cast<std::size_t>(n_bins), kInf);
    std::vector<double> hi(static_cast<std::size_t>(n_bins), -kInf);
    for (std::size_t k = 0; k < order.size(); ++k) {
        int b = bin_of[k];
        double v = values[order[k]];
        centers[static_cast<std::size_t>(b)] += v;
        ++counts[static_cast<std::size_t>(b)];
        lo[static_cast<std::size_t>(b)] = std::min(lo[static_cast<std::size_t>(b)], v);
        hi[static_cast<std::size_t>(b)] = std::max(hi[static_cast<std::size_t>(b)], v);
    }
    for (int b = 0; b < n_bins; ++b)
        if (counts[static_cast<std::size_t>(b)] > 0)
            centers[static_cast<std::size_t>(b)] /=
                static_cast<double>(counts[static_cast<std::size_t>(b)]);
    edges[0] = 0.0;
    edges[static_cast<std::size_t>(n_bins)] = 100.0;
    for (int b = 1; b < n_bins; ++b)
        edges[static_cast<std::size_t>(b)] =
            (hi[static_cast<std::size_t>(b - 1)] + lo[static_cast<std::size_t>(b)]) / 2.0;
}

} // namespace detail

/// 30-bin (by default) hit-fraction curve over percentile scores.
inline BinnedCurve bin_curve(std::span<const double> percentiles,
                             std::span<const char> hits, int n_bins = 30) {
    if (n_bins < 2) fail("bin_curve: need at least 2 bins");
    if (percentiles.size() != hits.size()) fail("bin_curve: length mismatch");
    if (percentiles.size() < static_cast<std::size_t>(n_bins))
        fail("bin_curve: fewer records than bins");
    auto order = detail::rank_order(percentiles);
    auto bin_of = detail::equal_count_bins(order.size(), n_bins);
    BinnedCurve c;
    c.bins_a = n_bins;
    c.counts.assign(static_cast<std::size_t>(n_bins), 0);
    c.hit_counts.assign(static_cast<std::size_t>(n_bins), 0);
    for (std::size_t k = 0; k < order.size(); ++k) {
        auto b = static_cast<std::size_t>(bin_of[k]);
        ++c.counts[b];
        if (hits[order[k]]) ++c.hit_counts[b];
    }
    detail::axis_edges_centers(percentiles, order, bin_of, n_bins, c.edges_a,
                               c.centers_a);
    c.fractions.resize(static_cast<std::size_t>(n_bins));
    c.defined.assign(static_cast<std::size_t>(n_bins), 1);
    for (std::size_t b = 0; b < c.fractions.size(); ++b)
        c.fractions[b] = static_cast<double>(c.hit_counts[b]) /
                         static_cast<double>(c.counts[b]);
    return c;
}

/// Joint surface: independent equal-count binning on both axes; empty cells
/// are flagged undefined.
inline BinnedCurve joint_bin_surface(std::span<const double> pct_a,
                                     std::span<const double> pct_b,
                                     std::span<const char> hits,
                                     int n_bins = 30) {
    if (n_bins < 2) fail("joint_bin_surface: need at least 2 bins");
    if (pct_a.size() != pct_b.size() || pct_a.size() != hits.size())
        fail("joint_bin_surface: length mismatch");
    if (pct_a.size() < static_cast<std::size_t>(n_bins))
        fail("joint_bin_surface: fewer records than bins");
    auto order_a = detail::rank_order(pct_a);
    auto order_b = detail::rank_order(pct_b);
    auto split = detail::equal_count_bins(pct_a.size(), n_bins);
    std::vector<int> bin_a(pct_a.size()), bin_b(pct_a.size());
    for (std::size_t k = 0; k < pct_a.size(); ++k) {
        bin_a[order_a[k]] = split[k];
        bin_b[order_b[k]] = split[k];
    }
    BinnedCurve c;
    c.bins_a = n_bins;
    c.bins_b = n_bins;
    auto cells = static_cast<std::size_t>(n_bins) * static_cast<std::size_t>(n_bins);
    c.counts.assign(cells, 0);
    c.hit_counts.assign(cells, 0);
    for (std::size_t k = 0; k < pct_a.size(); ++k) {
        auto cell = static_cast<std::size_t>(bin_a[k]) *
                        static_cast<std::size_t>(n_bins) +
                    static_cast<std::size_t>(bin_b[k]);
        ++c.counts[cell];
        if (hits[k]) ++c.hit_counts[cell];
    }
    detail::axis_edges_centers(pct_a, order_a, split, n_bins, c.edges_a,
                               c.centers_a);
    detail::axis_edges_centers(pct_b, order_b, split, n_bins, c.edges_b,
                               c.centers_b);
    c.fractions.resize(cells);
    c.defined.assign(cells, 0);
    for (std::size_t cell = 0; cell < cells; ++cell) {
        if (c.counts[cell] > 0) {
            c.defined[cell] = 1;
            c.fractions[cell] = static_cast<double>(c.hit_counts[cell]) /
                                static_cast<double>(c.counts[cell]);
        } else {
            c.fractions[cell] = std::numeric_limits<double>::quiet_NaN();
        }
    }
    return c;
}

} // namespace surprisal
