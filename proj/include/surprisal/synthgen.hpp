#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "surprisal/corpus.hpp"
#include "surprisal/model.hpp"
#include "surprisal/rng.hpp"
#include "surprisal/training.hpp"

namespace surprisal {

/// Ground-truth generator configuration. Block structure is planted in the
/// content embeddings; venues, authors and citation counts are synthesized so
/// the analytics pipelines have recoverable signal.
struct PlantedSpec {
    NodeId n_nodes = 40;
    int D = 4;
    std::vector<int> block_assignment; // node -> dominant dimension; empty = round robin
    double within_weight = 0.9;        // mass on the dominant dimension, in (1/D, 1]
    double membership_jitter = 0.0;    // per-node logit noise at year 1
    double avail_lo = 0.5;
    double avail_hi = 1.5;
    std::map<int, double> size_distribution; // edge size -> probability, sums to 1
    double drift = 0.0;                // yearly Gaussian step in unconstrained space
    int years = 1;
    int start_year = 2000;
    // Corpus synthesis.
    int n_authors = 50;
    int n_venues = 8;
    double hit_link_strength = 0.0;    // citation boost per sd of planted novelty
    double edge_rate = 1.0;            // global multiplier on sampling propensity
    double cite_affinity = 0.7;        // probability a citation stays in the venue's block
    double cites_mean = 3.0;           // mean number of cited venues per record
    double team_size_mean = 2.0;       // mean team size
    double author_affinity = 0.7;      // probability a member comes from the record's block

    int block_of(NodeId i) const {
        return block_assignment.empty()
                   ? static_cast<int>(i) % D
                   : block_assignment[static_cast<std::size_t>(i)];
    }

    int max_size() const {
        int m = 0;
        for (const auto& [s, p] : size_distribution) m = std::max(m, s);
        return m;
    }

    void validate() const {
        if (n_nodes < 1 || D < 1 || years < 1) fail("PlantedSpec: counts must be positive");
        if (!(within_weight > 1.0 / D && within_weight <= 1.0))
            fail("PlantedSpec: within_weight must lie in (1/D, 1]");
        if (!(avail_lo > 0.0 && avail_hi >= avail_lo))
            fail("PlantedSpec: bad avail range");
        if (size_distribution.empty()) fail("PlantedSpec: empty size distribution");
        double sum = 0.0;
        for (const auto& [s, p] : size_distribution) {
            if (s < 1 || p < 0.0) fail("PlantedSpec: bad size distribution entry");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            fail("PlantedSpec: size probabilities must sum to 1");
        if (!block_assignment.empty()) {
            if (block_assignment.size() != static_cast<std::size_t>(n_nodes))
                fail("PlantedSpec: block assignment size mismatch");
            for (int b : block_assignment)
                if (b < 0 || b >= D) fail("PlantedSpec: block out of range");
        }
        if (drift < 0.0) fail("PlantedSpec: drift must be nonnegative");
        if (membership_jitter < 0.0)
            fail("PlantedSpec: membership_jitter must be nonnegative");
        if (n_authors < 1 || n_venues < 1) fail("PlantedSpec: need authors and venues");
        if (!(edge_rate > 0.0)) fail("PlantedSpec: edge_rate must be positive");
        if (cite_affinity < 0.0 || cite_affinity > 1.0 || author_affinity < 0.0 ||
            author_affinity > 1.0)
            fail("PlantedSpec: affinities must lie in [0,1]");
    }
};

inline PlantedSpec planted_spec_from_json(const nlohmann::json& j) {
    PlantedSpec s;
    if (j.contains("n_nodes")) s.n_nodes = j["n_nodes"].get<NodeId>();
    if (j.contains("D")) s.D = j["D"].get<int>();
    if (j.contains("block_assignment"))
        s.block_assignment = j["block_assignment"].get<std::vector<int>>();
    if (j.contains("within_weight")) s.within_weight = j["within_weight"].get<double>();
    if (j.contains("membership_jitter"))
        s.membership_jitter = j["membership_jitter"].get<double>();
    if (j.contains("avail_range")) {
        s.avail_lo = j["avail_range"].at(0).get<double>();
        s.avail_hi = j["avail_range"].at(1).get<double>();
    }
    if (j.contains("size_distribution"))
        for (const auto& [k, v] : j["size_distribution"].items())
            s.size_distribution[std::stoi(k)] = v.get<double>();
    if (j.contains("drift")) s.drift = j["drift"].get<double>();
    if (j.contains("years")) s.years = j["years"].get<int>();
    if (j.contains("start_year")) s.start_year = j["start_year"].get<int>();
    if (j.contains("n_authors")) s.n_authors = j["n_authors"].get<int>();
    if (j.contains("n_venues")) s.n_venues = j["n_venues"].get<int>();
    if (j.contains("hit_link_strength"))
        s.hit_link_strength = j["hit_link_strength"].get<double>();
    if (j.contains("edge_rate")) s.edge_rate = j["edge_rate"].get<double>();
    if (j.contains("cite_affinity")) s.cite_affinity = j["cite_affinity"].get<double>();
    if (j.contains("cites_mean")) s.cites_mean = j["cites_mean"].get<double>();
    if (j.contains("team_size_mean")) s.team_size_mean = j["team_size_mean"].get<double>();
    if (j.contains("author_affinity"))
        s.author_affinity = j["author_affinity"].get<double>();
    s.validate();
    return s;
}

inline nlohmann::json planted_spec_to_json(const PlantedSpec& s) {
    nlohmann::json sd = nlohmann::json::object();
    for (const auto& [k, v] : s.size_distribution) sd[std::to_string(k)] = v;
    return nlohmann::json{{"n_nodes", s.n_nodes},
                          {"D", s.D},
                          {"block_assignment", s.block_assignment},
                          {"within_weight", s.within_weight},
                          {"membership_jitter", s.membership_jitter},
                          {"avail_range", {s.avail_lo, s.avail_hi}},
                          {"size_distribution", std::move(sd)},
                          {"drift", s.drift},
                          {"years", s.years},
                          {"start_year", s.start_year},
                          {"n_authors", s.n_authors},
                          {"n_venues", s.n_venues},
                          {"hit_link_strength", s.hit_link_strength},
                          {"edge_rate", s.edge_rate},
                          {"cite_affinity", s.cite_affinity},
                          {"cites_mean", s.cites_mean},
                          {"team_size_mean", s.team_size_mean},
                          {"author_affinity", s.author_affinity}};
}

/// Synthetic content codes "C000"... — zero padded so lexicographic order
/// matches node ids.
inline std::string synth_content_code(NodeId i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "C%04d", static_cast<int>(i));
    return buf;
}

inline std::string synth_venue_code(int v) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "V%03d", v);
    return buf;
}

inline std::string synth_author_code(int a) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "A%04d", a);
    return buf;
}

/// Year-1 memberships put within_weight on the planted block and spread the
/// remainder uniformly; later years follow the HMM: Gaussian steps on the
/// unconstrained parameters. within_weight = 1 yields exact one-hot rows.
inline std::vector<ModelParams> sample_planted_params(const PlantedSpec& spec,
                                                      Rng& rng) {
    spec.validate();
    const NodeId n = spec.n_nodes;
    const int D = spec.D;
    UnconstrainedParams u(n, D);
    double off = spec.within_weight >= 1.0
                     ? 0.0
                     : (1.0 - spec.within_weight) / static_cast<double>(D - 1);
    for (NodeId i = 0; i < n; ++i) {
        auto row = u.logits.row(static_cast<std::size_t>(i));
        for (int d = 0; d < D; ++d) {
            row[static_cast<std::size_t>(d)] =
                d == spec.block_of(i) ? std::log(spec.within_weight)
                                      : std::log(off);
            if (spec.membership_jitter > 0.0 &&
                std::isfinite(row[static_cast<std::size_t>(d)]))
                row[static_cast<std::size_t>(d)] +=
                    spec.membership_jitter * normal01(rng);
        }
        u.log_avail[static_cast<std::size_t>(i)] =
            std::log(spec.avail_lo + (spec.avail_hi - spec.avail_lo) * uniform01(rng));
    }
    std::vector<ModelParams> out;
    out.reserve(static_cast<std::size_t>(spec.years));
    out.push_back(u.to_params(spec.start_year));
    for (int t = 1; t < spec.years; ++t) {
        if (spec.drift > 0.0) {
            for (double& z : u.logits.data)
                if (std::isfinite(z)) z += spec.drift * normal01(rng);
            for (double& r : u.log_avail) r += spec.drift * normal01(rng);
        }
        out.push_back(u.to_params(spec.start_year + t));
    }
    return out;
}

/// Draws x_h ~ Poisson(lambda_h * size_weight) for every combination up to
/// the largest size in the distribution, every year. Exact enumeration; the
/// universe must stay within the enumeration budget.
inline TemporalHypergraph sample_hypergraph(std::span<const ModelParams> params,
                                            const PlantedSpec& spec, Rng& rng) {
    spec.validate();
    if (params.empty()) fail("sample_hypergraph: no parameters");
    const NodeId n = spec.n_nodes;
    const int max_size = spec.max_size();
    if (universe_size(n, max_size, kExactUniverseBudget + 1) > kExactUniverseBudget)
        fail("sample_hypergraph: enumeration budget exceeded; shrink the node "
             "count or the maximum edge size");
    TemporalHypergraph g;
    std::vector<std::string> codes;
    codes.reserve(static_cast<std::size_t>(n));
    for (NodeId i = 0; i < n; ++i) codes.push_back(synth_content_code(i));
    g.registry = NodeRegistry(Kind::content, std::move(codes));
    g.year_lo = spec.start_year;
    g.year_hi = spec.start_year + static_cast<int>(params.size()) - 1;
    for (const auto& p : params) {
        Slice& slice = g.slices[p.year];
        g.skipped[p.year] = 0;
        for_each_combination(n, max_size, [&](std::span<const NodeId> h) {
            auto it = spec.size_distribution.find(static_cast<int>(h.size()));
            if (it == spec.size_distribution.end() || it->second == 0.0) return;
            double lambda = propensity(h, p) * it->second * spec.edge_rate;
            if (lambda == 0.0) return;
            long long x = poisson(rng, lambda);
            if (x >= 1) {
                slice.add({h.begin(), h.end()}, x);
                g.max_edge_size =
                    std::max(g.max_edge_size, static_cast<int>(h.size()));
            }
        });
        slice.canonicalize();
    }
    return g;
}

/// Per-record planted truth emitted alongside a synthetic corpus.
struct PlantedRecordTruth {
    std::string record_id;
    int year = 0;
    double content_novelty = 0.0; // surprisal under the planted params
    int dominant_block = 0;
};

struct SyntheticCorpus {
    std::vector<CorpusRecord> records;
    std::vector<PlantedRecordTruth> truth; // aligned with records
};

/// Materializes every sampled hyperedge occurrence as a record. Venue follows
/// the record's dominant latent dimension; cited venues stay within the
/// venue's block with probability cite_affinity; authors have block homes,
/// which gives them coherent venue histories; citations are log-normal
/// boosted by exp(hit_link_strength * standardized planted novelty).
inline SyntheticCorpus sample_corpus(const PlantedSpec& spec,
                                     std::span<const ModelParams> params,
                                     Rng& rng) {
    spec.validate();
    TemporalHypergraph g = sample_hypergraph(params, spec, rng);
    const int D = spec.D;

    // Venues and authors are assigned round robin to blocks.
    std::vector<std::vector<int>> venues_of_block(static_cast<std::size_t>(D));
    for (int v = 0; v < spec.n_venues; ++v)
        venues_of_block[static_cast<std::size_t>(v % D)].push_back(v);
    std::vector<std::vector<int>> authors_of_block(static_cast<std::size_t>(D));
    for (int a = 0; a < spec.n_authors; ++a)
        authors_of_block[static_cast<std::size_t>(a % D)].push_back(a);
    auto pick = [&](const std::vector<int>& pool, Rng& r) {
        return pool[uniform_below(r, pool.size())];
    };

    SyntheticCorpus out;
    long long seq = 0;
    for (const auto& p : params) {
        const Slice& slice = g.slice(p.year);
        for (const auto& e : slice.edges()) {
            // Dominant dimension of the combination: argmax_d prod theta_id.
            int dominant = 0;
            double best = -kInf;
            for (int d = 0; d < D; ++d) {
                double acc = 0.0;
                for (NodeId i : e.nodes)
                    acc += std::log(p.theta(static_cast<std::size_t>(i),
                                            static_cast<std::size_t>(d)));
                if (acc > best) {
                    best = acc;
                    dominant = d;
                }
            }
            double nov = novelty(std::span<const NodeId>(e.nodes), p);
            for (long long m = 0; m < e.multiplicity; ++m) {
                CorpusRecord r;
                char idbuf[32];
                std::snprintf(idbuf, sizeof(idbuf), "y%d-%06lld", p.year, seq++);
                r.record_id = idbuf;
                r.year = p.year;
                for (NodeId i : e.nodes)
                    r.content_codes.push_back(g.registry.code(i));
                const auto& home_pool =
                    venues_of_block[static_cast<std::size_t>(dominant)].empty()
                        ? venues_of_block[0]
                        : venues_of_block[static_cast<std::size_t>(dominant)];
                int venue = pick(home_pool, rng);
                r.venue = synth_venue_code(venue);
                int venue_block = venue % D;
                long long n_cites =
                    1 + poisson(rng, std::max(0.0, spec.cites_mean - 1.0));
                std::set<std::string> cited;
                for (long long c = 0; c < n_cites; ++c) {
                    int cv;
                    if (uniform01(rng) < spec.cite_affinity &&
                        !venues_of_block[static_cast<std::size_t>(venue_block)].empty())
                        cv = pick(venues_of_block[static_cast<std::size_t>(venue_block)], rng);
                    else
                        cv = static_cast<int>(uniform_below(
                            rng, static_cast<std::uint64_t>(spec.n_venues)));
                    cited.insert(synth_venue_code(cv));
                }
                r.context_codes.assign(cited.begin(), cited.end());
                long long team =
                    1 + poisson(rng, std::max(0.0, spec.team_size_mean - 1.0));
                team = std::min<long long>(team, spec.n_authors);
                std::set<std::string> members;
                while (static_cast<long long>(members.size()) < team) {
                    int a;
                    if (uniform01(rng) < spec.author_affinity &&
                        !authors_of_block[static_cast<std::size_t>(dominant)].empty())
                        a = pick(authors_of_block[static_cast<std::size_t>(dominant)], rng);
                    else
                        a = static_cast<int>(uniform_below(
                            rng, static_cast<std::uint64_t>(spec.n_authors)));
                    members.insert(synth_author_code(a));
                }
                r.authors.assign(members.begin(), members.end());
                out.records.push_back(std::move(r));
                out.truth.push_back(PlantedRecordTruth{
                    out.records.back().record_id, p.year, nov, dominant});
            }
        }
    }

    // Citations in a second pass. Planted novelty is standardized by rank
    // (Gaussianized mid-rank quantile): robust to the heavy right tail and to
    // infinite surprisal, which simply ranks above all finite values.
    const std::size_t m = out.records.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return out.truth[a].content_novelty < out.truth[b].content_novelty;
    });
    std::vector<double> z(m, 0.0);
    if (m > 1) {
        std::size_t k = 0;
        while (k < m) {
            std::size_t j = k;
            while (j + 1 < m && out.truth[order[j + 1]].content_novelty ==
                                    out.truth[order[k]].content_novelty)
                ++j;
            double rank = (static_cast<double>(k + 1) + static_cast<double>(j + 1)) / 2.0;
            double zr = inverse_normal_cdf((rank - 0.5) / static_cast<double>(m));
            for (std::size_t i = k; i <= j; ++i) z[order[i]] = zr;
            k = j + 1;
        }
    }
    for (std::size_t k = 0; k < m; ++k) {
        double base = std::exp(1.0 + normal01(rng)); // log-normal(1, 1)
        double rate = base * std::exp(spec.hit_link_strength * z[k]);
        out.records[k].citations = std::llround(rate);
    }
    return out;
}

} // namespace surprisal
