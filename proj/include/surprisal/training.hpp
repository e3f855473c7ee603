#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "surprisal/corpus.hpp"
#include "surprisal/model.hpp"
#include "surprisal/rng.hpp"

namespace surprisal {

struct TrainConfig {
    int D = 32;
    double learning_rate = 0.05;
    int batch_size = 64;
    int epochs = 100;
    int negative_ratio = 1;
    double sigma = 0.1;
    std::uint64_t seed = 1;
    double init_scale = 0.5;
    double clip_norm = 10.0; // <= 0 disables clipping
    bool degree_weighted_negatives = false;

    void validate() const {
        if (D <= 0) fail("TrainConfig: D must be positive");
        if (!(learning_rate > 0.0)) fail("TrainConfig: learning_rate must be positive");
        if (batch_size <= 0) fail("TrainConfig: batch_size must be positive");
        if (epochs < 0) fail("TrainConfig: epochs must be nonnegative");
        if (negative_ratio < 1) fail("TrainConfig: negative_ratio must be >= 1");
        if (!(sigma > 0.0)) fail("TrainConfig: sigma must be positive");
        if (!(init_scale > 0.0)) fail("TrainConfig: init_scale must be positive");
    }
};

inline nlohmann::json train_config_to_json(const TrainConfig& c) {
    return nlohmann::json{{"D", c.D},
                          {"learning_rate", c.learning_rate},
                          {"batch_size", c.batch_size},
                          {"epochs", c.epochs},
                          {"negative_ratio", c.negative_ratio},
                          {"sigma", c.sigma},
                          {"seed", c.seed},
                          {"init_scale", c.init_scale},
                          {"clip_norm", c.clip_norm},
                          {"degree_weighted_negatives", c.degree_weighted_negatives}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
    TrainConfig c;
    if (j.contains("D")) c.D = j["D"].get<int>();
    if (j.contains("learning_rate")) c.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<int>();
    if (j.contains("epochs")) c.epochs = j["epochs"].get<int>();
    if (j.contains("negative_ratio")) c.negative_ratio = j["negative_ratio"].get<int>();
    if (j.contains("sigma")) c.sigma = j["sigma"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("init_scale")) c.init_scale = j["init_scale"].get<double>();
    if (j.contains("clip_norm")) c.clip_norm = j["clip_norm"].get<double>();
    if (j.contains("degree_weighted_negatives"))
        c.degree_weighted_negatives = j["degree_weighted_negatives"].get<bool>();
    c.validate();
    return c;
}

/// SGD state: theta rows as logits (kept identified with log theta by
/// re-centering after each step), availability as log values. Softmax/exp
/// guarantee the simplex and positivity invariants structurally.
struct UnconstrainedParams {
    Matrix logits;                // n x D
    std::vector<double> log_avail; // n

    UnconstrainedParams() = default;
    UnconstrainedParams(NodeId n, int D)
        : logits(static_cast<std::size_t>(n), static_cast<std::size_t>(D)),
          log_avail(static_cast<std::size_t>(n), 0.0) {}

    NodeId n_nodes() const { return static_cast<NodeId>(log_avail.size()); }
    int D() const { return static_cast<int>(logits.cols); }

    static UnconstrainedParams from_params(const ModelParams& p) {
        UnconstrainedParams u(p.n_nodes(), p.D);
        for (std::size_t k = 0; k < p.theta.data.size(); ++k)
            u.logits.data[k] = std::log(p.theta.data[k]);
        for (std::size_t i = 0; i < p.avail.size(); ++i)
            u.log_avail[i] = std::log(p.avail[i]);
        return u;
    }

    ModelParams to_params(int year) const {
        ModelParams p;
        p.year = year;
        p.D = D();
        p.theta = Matrix(logits.rows, logits.cols);
        for (std::size_t i = 0; i < logits.rows; ++i) {
            auto z = logits.row(i);
            double m = *std::max_element(z.begin(), z.end());
            double sum = 0.0;
            for (std::size_t d = 0; d < logits.cols; ++d) {
                double e = std::exp(z[d] - m);
                p.theta(i, d) = e;
                sum += e;
            }
            for (std::size_t d = 0; d < logits.cols; ++d) p.theta(i, d) /= sum;
        }
        p.avail.resize(log_avail.size());
        for (std::size_t i = 0; i < log_avail.size(); ++i)
            p.avail[i] = std::exp(log_avail[i]);
        return p;
    }

    /// Subtracts each row's log-sum-exp so logits stay equal to log theta.
    void recenter() {
        for (std::size_t i = 0; i < logits.rows; ++i) {
            auto z = logits.row(i);
            double m = *std::max_element(z.begin(), z.end());
            double sum = 0.0;
            for (double v : z) sum += std::exp(v - m);
            double lse = m + std::log(sum);
            for (double& v : z) v -= lse;
        }
    }

    void add_scaled(const UnconstrainedParams& g, double step) {
        for (std::size_t k = 0; k < logits.data.size(); ++k)
            logits.data[k] += step * g.logits.data[k];
        for (std::size_t i = 0; i < log_avail.size(); ++i)
            log_avail[i] += step * g.log_avail[i];
    }

    double norm() const {
        double s = 0.0;
        for (double v : logits.data) s += v * v;
        for (double v : log_avail) s += v * v;
        return std::sqrt(s);
    }

    void scale(double f) {
        for (double& v : logits.data) v *= f;
        for (double& v : log_avail) v *= f;
    }
};

/// One training example: member ids (any order; the trainer passes them in
/// canonical code order) and the Poisson target count.
struct TrainExample {
    std::vector<NodeId> nodes;
    long long count = 0;
};

/// Cold-start state: logits drawn per node from a stream keyed by
/// (seed, node key), log availability from the node's mean incident count.
/// Keying streams by a node's identity rather than one shared sequence makes
/// initialization independent of how ids were assigned.
inline UnconstrainedParams
cold_start(NodeId n, const TrainConfig& cfg,
           std::span<const double> mean_incident = {},
           std::span<const std::uint64_t> node_keys = {}) {
    constexpr std::uint64_t kTagInit = 0x696e6974; // "init"
    UnconstrainedParams u(n, cfg.D);
    for (NodeId i = 0; i < n; ++i) {
        std::uint64_t key =
            node_keys.empty() ? static_cast<std::uint64_t>(i)
                              : node_keys[static_cast<std::size_t>(i)];
        Rng rng = make_rng(cfg.seed, kTagInit, key);
        auto row = u.logits.row(static_cast<std::size_t>(i));
        for (int d = 0; d < cfg.D; ++d)
            row[static_cast<std::size_t>(d)] = cfg.init_scale * normal01(rng);
        double r = mean_incident.empty()
                       ? 1.0
                       : mean_incident[static_cast<std::size_t>(i)];
        u.log_avail[static_cast<std::size_t>(i)] = std::log(std::max(r, 1e-3));
    }
    u.recenter();
    return u;
}

/// Public initializer: copies warm parameters exactly, or cold-starts.
inline ModelParams init_params(NodeId n, const TrainConfig& cfg,
                               const std::optional<ModelParams>& warm,
                               std::span<const double> mean_incident = {}) {
    cfg.validate();
    if (warm) {
        if (warm->n_nodes() != n || warm->D != cfg.D)
            fail("init_params: warm-start dimensions do not match");
        return *warm;
    }
    return cold_start(n, cfg, mean_incident).to_params(0);
}

/// Draws combinations that are not hyperedges of `slice`, one per requested
/// size. Nodes are uniform without replacement (or degree-weighted when
/// `weight_cum` is given); draws colliding with an observed edge are
/// rejection-resampled up to 1000 times. `rank_to_id`, when given, maps the
/// sampled index space to node ids so the draw order is independent of id
/// assignment.
inline std::vector<Combination>
sample_negatives(const Slice& slice, std::span<const int> sizes, NodeId n_nodes,
                 int max_size, Rng& rng,
                 const std::vector<NodeId>* rank_to_id = nullptr,
                 const std::vector<double>* weight_cum = nullptr) {
    if (max_size < 1) fail("sample_negatives: max_size must be >= 1");
    std::vector<Combination> out;
    out.reserve(sizes.size());
    std::vector<NodeId> ranks, ids;
    for (int s : sizes) {
        if (s < 1 || s > max_size) fail("sample_negatives: size out of bounds");
        if (s > n_nodes) fail("sample_negatives: size exceeds node count");
        int attempts = 0;
        while (true) {
            if (++attempts > 1000)
                fail("sample_negatives: retry budget exhausted; universe "
                     "saturated for size " + std::to_string(s));
            ranks.clear();
            while (static_cast<int>(ranks.size()) < s) {
                NodeId r;
                if (weight_cum) {
                    double u = uniform01(rng) * weight_cum->back();
                    r = static_cast<NodeId>(
                        std::upper_bound(weight_cum->begin(), weight_cum->end(), u) -
                        weight_cum->begin());
                    if (r >= n_nodes) r = n_nodes - 1;
                } else {
                    r = static_cast<NodeId>(
                        uniform_below(rng, static_cast<std::uint64_t>(n_nodes)));
                }
                if (std::find(ranks.begin(), ranks.end(), r) == ranks.end())
                    ranks.push_back(r);
            }
            std::sort(ranks.begin(), ranks.end());
            ids = ranks;
            if (rank_to_id)
                for (auto& v : ids)
                    v = (*rank_to_id)[static_cast<std::size_t>(v)];
            std::sort(ids.begin(), ids.end());
            if (!slice.contains(ids)) break;
        }
        out.emplace_back(Combination{std::move(ids)});
        ids = {};
    }
    return out;
}

namespace detail {

/// Poisson terms of a batch plus (optionally) the transition prior scaled by
/// the batch fraction. theta/avail are materialized once per call.
struct ObjectiveWorkspace {
    ModelParams p;

    explicit ObjectiveWorkspace(const UnconstrainedParams& u)
        : p(u.to_params(0)) {}

    /// lambda and complementarity by direct products; training combinations
    /// are capped at the observed max edge size, so no underflow.
    void propensity_parts(std::span<const NodeId> nodes, double& C,
                          double& R) const {
        C = 0.0;
        for (int d = 0; d < p.D; ++d) {
            double prod = 1.0;
            for (NodeId i : nodes)
                prod *= p.theta(static_cast<std::size_t>(i),
                                static_cast<std::size_t>(d));
            C += prod;
        }
        R = 1.0;
        for (NodeId i : nodes) R *= p.avail[static_cast<std::size_t>(i)];
    }
};

inline double prior_log_density(const UnconstrainedParams& u,
                                const UnconstrainedParams& prev, double sigma) {
    double total = 0.0;
    for (std::size_t k = 0; k < u.logits.data.size(); ++k)
        total += gaussian_log_density(u.logits.data[k] - prev.logits.data[k],
                                      sigma);
    for (std::size_t i = 0; i < u.log_avail.size(); ++i)
        total += gaussian_log_density(u.log_avail[i] - prev.log_avail[i],
                                      sigma);
    return total;
}

} // namespace detail

/// Mini-batch objective: sum of Poisson log-pmfs of positives at their
/// observed counts and negatives at zero, plus the transition prior scaled
/// by prior_scale so one epoch applies it exactly once.
inline double sampled_objective(std::span<const TrainExample> positives,
                                std::span<const Combination> negatives,
                                const UnconstrainedParams& u,
                                const UnconstrainedParams* prev, double sigma,
                                double prior_scale = 1.0) {
    detail::ObjectiveWorkspace w(u);
    double total = 0.0;
    double C, R;
    for (const auto& ex : positives) {
        w.propensity_parts(ex.nodes, C, R);
        total += poisson_log_pmf(ex.count, C * R);
    }
    for (const auto& h : negatives) {
        w.propensity_parts(h.nodes, C, R);
        total += poisson_log_pmf(0, C * R);
    }
    if (prev) total += prior_scale * detail::prior_log_density(u, *prev, sigma);
    return total;
}

/// Exact partial derivatives of sampled_objective with respect to all logits
/// and log-availability entries. Dense; node counts here are small.
inline UnconstrainedParams gradient(std::span<const TrainExample> positives,
                                    std::span<const Combination> negatives,
                                    const UnconstrainedParams& u,
                                    const UnconstrainedParams* prev,
                                    double sigma, double prior_scale = 1.0) {
    detail::ObjectiveWorkspace w(u);
    const ModelParams& p = w.p;
    const int D = p.D;
    UnconstrainedParams g(u.n_nodes(), D);

    std::vector<double> pre, suf, prodexc;
    auto accumulate = [&](std::span<const NodeId> nodes, long long x) {
        const std::size_t s = nodes.size();
        double C, R;
        w.propensity_parts(nodes, C, R);
        double lambda = C * R;
        // d/d log r_i = x - lambda for every member.
        double d_logr = static_cast<double>(x) - lambda;
        for (NodeId i : nodes) g.log_avail[static_cast<std::size_t>(i)] += d_logr;
        // d/d z_ie = (x - lambda)/C * theta_ie * (prodexc_ie - C); leave-one-
        // out products per dimension via prefix/suffix sweeps.
        if (C <= 0.0) C = std::numeric_limits<double>::min();
        double coef = (static_cast<double>(x) - lambda) / C;
        pre.assign(s, 1.0);
        suf.assign(s, 1.0);
        prodexc.assign(s, 1.0);
        for (int d = 0; d < D; ++d) {
            for (std::size_t k = 1; k < s; ++k)
                pre[k] = pre[k - 1] *
                         p.theta(static_cast<std::size_t>(nodes[k - 1]),
                                 static_cast<std::size_t>(d));
            for (std::size_t k = s; k-- > 1;)
                suf[k - 1] = suf[k] *
                             p.theta(static_cast<std::size_t>(nodes[k]),
                                     static_cast<std::size_t>(d));
            for (std::size_t k = 0; k < s; ++k) prodexc[k] = pre[k] * suf[k];
            for (std::size_t k = 0; k < s; ++k) {
                auto i = static_cast<std::size_t>(nodes[k]);
                double th = p.theta(i, static_cast<std::size_t>(d));
                g.logits(i, static_cast<std::size_t>(d)) +=
                    coef * th * (prodexc[k] - C);
            }
            pre.assign(s, 1.0);
            suf.assign(s, 1.0);
        }
    };

    for (const auto& ex : positives) accumulate(ex.nodes, ex.count);
    for (const auto& h : negatives) accumulate(h.nodes, 0);

    if (prev) {
        double inv_var = prior_scale / (sigma * sigma);
        for (std::size_t k = 0; k < u.logits.data.size(); ++k)
            g.logits.data[k] -=
                inv_var * (u.logits.data[k] - prev->logits.data[k]);
        for (std::size_t i = 0; i < u.log_avail.size(); ++i)
            g.log_avail[i] -=
                inv_var * (u.log_avail[i] - prev->log_avail[i]);
    }
    return g;
}

// ---- chain fitting ---------------------------------------------------------

struct YearReport {
    int year = 0;
    long long positive_edges = 0;
    long long positive_multiplicity = 0;
    std::vector<double> objective; // one diagnostic value per epoch
    std::vector<double> grad_norm; // mean pre-clip batch gradient norm
    double seconds = 0.0;
    std::string params_digest;
};

struct TrainReport {
    std::vector<YearReport> years;
    double total_seconds = 0.0;
};

inline nlohmann::json train_report_to_json(const TrainReport& r) {
    nlohmann::json years = nlohmann::json::array();
    for (const auto& y : r.years)
        years.push_back(nlohmann::json{{"year", y.year},
                                       {"positive_edges", y.positive_edges},
                                       {"positive_multiplicity", y.positive_multiplicity},
                                       {"objective", y.objective},
                                       {"grad_norm", y.grad_norm},
                                       {"seconds", y.seconds},
                                       {"params_digest", y.params_digest}});
    return nlohmann::json{{"years", std::move(years)},
                          {"total_seconds", r.total_seconds}};
}

namespace detail {

inline std::string params_digest(const ModelParams& p) {
    auto bytes = [](const std::vector<double>& v) {
        return std::string_view(reinterpret_cast<const char*>(v.data()),
                                v.size() * sizeof(double));
    };
    std::uint64_t h = fnv1a64(bytes(p.theta.data));
    h = fnv1a64(bytes(p.avail), h);
    return hex64(h);
}

} // namespace detail

/// Fits the chain by forward filtering: years in order, each warm-started
/// from (and anchored by the Gaussian prior to) the previous year's state.
/// Within a year, every positive edge appears once per epoch with its
/// multiplicity as the Poisson target, paired with negative_ratio fresh
/// negatives. Deterministic given cfg.seed.
inline std::pair<ModelChain, TrainReport>
fit_chain(const TemporalHypergraph& g, const TrainConfig& cfg,
          int year_from = std::numeric_limits<int>::min(),
          int year_to = std::numeric_limits<int>::max()) {
    constexpr std::uint64_t kTagEpoch = 0x65706f63; // "epoc"
    constexpr std::uint64_t kTagDiag = 0x64696167;  // "diag"
    cfg.validate();
    year_from = std::max(year_from, g.year_lo);
    year_to = std::min(year_to, g.year_hi);
    if (year_from > year_to) fail("fit_chain: empty year range");
    bool any = false;
    for (int y = year_from; y <= year_to; ++y)
        if (!g.slice(y).empty()) any = true;
    if (!any) fail("fit_chain: all slices empty");

    const NodeId n = g.registry.size();
    const int n_years = year_to - year_from + 1;

    // Canonical node order: ranks follow the sorted code list, so sampling
    // and iteration do not depend on how ids were assigned.
    std::vector<NodeId> rank_to_id(static_cast<std::size_t>(n));
    std::iota(rank_to_id.begin(), rank_to_id.end(), 0);
    std::sort(rank_to_id.begin(), rank_to_id.end(), [&](NodeId a, NodeId b) {
        return g.registry.code(a) < g.registry.code(b);
    });
    std::vector<NodeId> rank_of(static_cast<std::size_t>(n));
    for (NodeId r = 0; r < n; ++r)
        rank_of[static_cast<std::size_t>(rank_to_id[static_cast<std::size_t>(r)])] = r;

    std::vector<std::uint64_t> node_keys(static_cast<std::size_t>(n));
    for (NodeId i = 0; i < n; ++i)
        node_keys[static_cast<std::size_t>(i)] = fnv1a64(g.registry.code(i));

    std::vector<double> mean_incident(static_cast<std::size_t>(n), 0.0);
    for (int y = year_from; y <= year_to; ++y)
        for (const auto& e : g.slice(y).edges())
            for (NodeId i : e.nodes)
                mean_incident[static_cast<std::size_t>(i)] +=
                    static_cast<double>(e.multiplicity);
    for (double& v : mean_incident) v /= static_cast<double>(n_years);

    UnconstrainedParams u = cold_start(n, cfg, mean_incident, node_keys);

    ModelChain chain;
    chain.sigma = cfg.sigma;
    chain.max_edge_size = g.max_edge_size;
    TrainReport report;
    auto t_start = std::chrono::steady_clock::now();

    std::optional<UnconstrainedParams> prev;
    for (int y = year_from; y <= year_to; ++y) {
        auto y_start = std::chrono::steady_clock::now();
        const Slice& slice = g.slice(y);

        // Positives in canonical order: members by code rank, edges by their
        // rank sequence.
        std::vector<TrainExample> positives;
        positives.reserve(slice.edges().size());
        std::vector<std::vector<NodeId>> rank_keys;
        rank_keys.reserve(slice.edges().size());
        for (const auto& e : slice.edges()) {
            std::vector<NodeId> members = e.nodes;
            std::sort(members.begin(), members.end(), [&](NodeId a, NodeId b) {
                return rank_of[static_cast<std::size_t>(a)] <
                       rank_of[static_cast<std::size_t>(b)];
            });
            std::vector<NodeId> key(members.size());
            for (std::size_t k = 0; k < members.size(); ++k)
                key[k] = rank_of[static_cast<std::size_t>(members[k])];
            positives.push_back(TrainExample{std::move(members), e.multiplicity});
            rank_keys.push_back(std::move(key));
        }
        std::vector<std::size_t> order(positives.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return rank_keys[a] < rank_keys[b];
        });
        {
            std::vector<TrainExample> sorted;
            sorted.reserve(positives.size());
            for (std::size_t k : order) sorted.push_back(std::move(positives[k]));
            positives = std::move(sorted);
        }
        const std::size_t n_pos = positives.size();

        std::vector<double> weight_cum;
        if (cfg.degree_weighted_negatives) {
            weight_cum.resize(static_cast<std::size_t>(n));
            std::vector<double> w(static_cast<std::size_t>(n), 1.0);
            for (const auto& e : slice.edges())
                for (NodeId i : e.nodes)
                    w[static_cast<std::size_t>(rank_of[static_cast<std::size_t>(i)])] +=
                        static_cast<double>(e.multiplicity);
            std::partial_sum(w.begin(), w.end(), weight_cum.begin());
        }
        const std::vector<double>* weights =
            cfg.degree_weighted_negatives ? &weight_cum : nullptr;

        YearReport yr;
        yr.year = y;
        yr.positive_edges = static_cast<long long>(n_pos);
        yr.positive_multiplicity = slice.total_multiplicity();

        // A size whose combinations are all observed has no non-edges to
        // sample (and contributes no zero-count likelihood terms); positives
        // of such a size train without paired negatives.
        std::map<int, long long> edges_of_size;
        for (const auto& ex : positives)
            ++edges_of_size[static_cast<int>(ex.nodes.size())];
        auto saturated = [&](int s) {
            auto it = edges_of_size.find(s);
            return it != edges_of_size.end() &&
                   static_cast<double>(it->second) >= count_combinations(n, s);
        };

        // Fixed negative set for per-epoch diagnostics, disjoint from the
        // training draws.
        std::vector<Combination> diag_negatives;
        if (n_pos > 0) {
            Rng diag_rng = make_rng(cfg.seed, kTagDiag, static_cast<std::uint64_t>(y));
            std::vector<int> sizes;
            sizes.reserve(n_pos * static_cast<std::size_t>(cfg.negative_ratio));
            for (const auto& ex : positives) {
                int s = static_cast<int>(ex.nodes.size());
                if (saturated(s)) continue;
                for (int k = 0; k < cfg.negative_ratio; ++k) sizes.push_back(s);
            }
            diag_negatives = sample_negatives(slice, sizes, n, g.max_edge_size,
                                              diag_rng, &rank_to_id, weights);
        }

        for (int e = 0; e < cfg.epochs; ++e) {
            if (n_pos == 0) break;
            Rng rng = make_rng(cfg.seed, kTagEpoch,
                               static_cast<std::uint64_t>(y),
                               static_cast<std::uint64_t>(e));
            std::vector<std::size_t> perm(n_pos);
            std::iota(perm.begin(), perm.end(), 0);
            for (std::size_t k = n_pos; k > 1; --k) {
                std::size_t j = uniform_below(rng, k);
                std::swap(perm[k - 1], perm[j]);
            }

            double norm_sum = 0.0;
            std::size_t n_batches = 0;
            std::vector<TrainExample> batch_pos;
            std::vector<int> batch_sizes;
            for (std::size_t start = 0; start < n_pos;
                 start += static_cast<std::size_t>(cfg.batch_size)) {
                std::size_t stop = std::min(
                    n_pos, start + static_cast<std::size_t>(cfg.batch_size));
                batch_pos.clear();
                batch_sizes.clear();
                for (std::size_t k = start; k < stop; ++k) {
                    batch_pos.push_back(positives[perm[k]]);
                    int s = static_cast<int>(positives[perm[k]].nodes.size());
                    if (saturated(s)) continue;
                    for (int r = 0; r < cfg.negative_ratio; ++r)
                        batch_sizes.push_back(s);
                }
                std::vector<Combination> batch_neg = sample_negatives(
                    slice, batch_sizes, n, g.max_edge_size, rng, &rank_to_id,
                    weights);
                // Negatives in canonical member order for evaluation.
                for (auto& c : batch_neg)
                    std::sort(c.nodes.begin(), c.nodes.end(),
                              [&](NodeId a, NodeId b) {
                                  return rank_of[static_cast<std::size_t>(a)] <
                                         rank_of[static_cast<std::size_t>(b)];
                              });
                double prior_scale = static_cast<double>(batch_pos.size()) /
                                     static_cast<double>(n_pos);
                UnconstrainedParams grad =
                    gradient(batch_pos, batch_neg, u,
                             prev ? &*prev : nullptr, cfg.sigma, prior_scale);
                double gn = grad.norm();
                norm_sum += gn;
                ++n_batches;
                if (cfg.clip_norm > 0.0 && gn > cfg.clip_norm)
                    grad.scale(cfg.clip_norm / gn);
                u.add_scaled(grad, cfg.learning_rate);
                u.recenter();
            }
            yr.grad_norm.push_back(n_batches ? norm_sum /
                                                   static_cast<double>(n_batches)
                                             : 0.0);
            yr.objective.push_back(sampled_objective(
                positives, diag_negatives, u, prev ? &*prev : nullptr,
                cfg.sigma, 1.0));
        }

        ModelParams fitted = u.to_params(y);
        yr.params_digest = detail::params_digest(fitted);
        yr.seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - y_start)
                         .count();
        report.years.push_back(std::move(yr));
        chain.params_by_year.push_back(std::move(fitted));
        prev = u; // warm start and prior anchor for the next year
    }

    report.total_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    return {std::move(chain), std::move(report)};
}

} // namespace surprisal
