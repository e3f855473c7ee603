#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "surprisal/corpus.hpp"
#include "surprisal/util.hpp"

namespace surprisal {

/// Dense row-major matrix, just enough for membership tables.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) {
        return data[r * cols + c];
    }
    double operator()(std::size_t r, std::size_t c) const {
        return data[r * cols + c];
    }
    std::span<double> row(std::size_t r) {
        return {data.data() + r * cols, cols};
    }
    std::span<const double> row(std::size_t r) const {
        return {data.data() + r * cols, cols};
    }
    bool operator==(const Matrix& o) const = default;
};

/// Latent state for one year: theta rows are membership distributions over
/// the D latent dimensions, avail holds the positive availability scalars.
struct ModelParams {
    int year = 0;
    int D = 0;
    Matrix theta;              // n x D, rows on the simplex
    std::vector<double> avail; // n, strictly positive

    NodeId n_nodes() const { return static_cast<NodeId>(avail.size()); }

    void validate(double tol = 1e-9) const {
        if (D <= 0 || theta.cols != static_cast<std::size_t>(D) ||
            theta.rows != avail.size())
            fail("ModelParams: inconsistent dimensions");
        for (std::size_t i = 0; i < theta.rows; ++i) {
            double sum = 0.0;
            for (double v : theta.row(i)) {
                if (!(v >= 0.0 && v <= 1.0))
                    fail("ModelParams: theta entry outside [0,1]");
                sum += v;
            }
            if (std::abs(sum - 1.0) > tol)
                fail("ModelParams: theta row off the simplex");
        }
        for (double r : avail)
            if (!(r > 0.0) || !std::isfinite(r))
                fail("ModelParams: availability must be positive");
    }
};

/// A candidate node combination (the model's h): ascending distinct ids.
struct Combination {
    std::vector<NodeId> nodes;

    Combination() = default;
    explicit Combination(std::vector<NodeId> ids) : nodes(std::move(ids)) {
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
        if (nodes.empty()) fail("Combination: needs at least one node");
    }

    int size() const { return static_cast<int>(nodes.size()); }
    bool operator==(const Combination& o) const = default;
};

namespace detail {

inline void check_nodes(std::span<const NodeId> nodes, const ModelParams& p) {
    for (NodeId n : nodes)
        if (n < 0 || n >= p.n_nodes())
            fail("node index out of range: " + std::to_string(n));
}

} // namespace detail

/// log of sum_d prod_{i in h} theta_id, computed per dimension in log space
/// so long combinations cannot underflow. -inf when no dimension is shared.
inline double log_complementarity(std::span<const NodeId> nodes,
                                  const ModelParams& p) {
    detail::check_nodes(nodes, p);
    const int D = p.D;
    double max_term = -kInf;
    std::vector<double> terms(static_cast<std::size_t>(D));
    for (int d = 0; d < D; ++d) {
        double acc = 0.0;
        for (NodeId i : nodes) {
            double v = p.theta(static_cast<std::size_t>(i),
                               static_cast<std::size_t>(d));
            acc += std::log(v);
        }
        terms[static_cast<std::size_t>(d)] = acc;
        max_term = std::max(max_term, acc);
    }
    if (max_term == -kInf) return -kInf;
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - max_term);
    return max_term + std::log(sum);
}

/// Probability that all nodes of h load on the same latent dimension.
inline double complementarity(std::span<const NodeId> nodes,
                              const ModelParams& p) {
    if (nodes.size() == 1) {
        detail::check_nodes(nodes, p);
        return 1.0; // row on the simplex: sum_d theta_id = 1
    }
    double lc = log_complementarity(nodes, p);
    return lc == -kInf ? 0.0 : std::min(1.0, std::exp(lc));
}

inline double complementarity(const Combination& h, const ModelParams& p) {
    return complementarity(std::span<const NodeId>(h.nodes), p);
}

/// Expected number of works realizing h: complementarity times the product
/// of member availabilities.
inline double propensity(std::span<const NodeId> nodes, const ModelParams& p) {
    if (nodes.size() == 1) {
        detail::check_nodes(nodes, p);
        return p.avail[static_cast<std::size_t>(nodes[0])];
    }
    double lc = log_complementarity(nodes, p);
    if (lc == -kInf) return 0.0;
    double lr = 0.0;
    for (NodeId i : nodes) lr += std::log(p.avail[static_cast<std::size_t>(i)]);
    return std::exp(lc + lr);
}

inline double propensity(const Combination& h, const ModelParams& p) {
    return propensity(std::span<const NodeId>(h.nodes), p);
}

/// Surprisal of h: -log complementarity. +inf when the combination is
/// impossible under the model; exactly 0 for singletons.
inline double novelty(std::span<const NodeId> nodes, const ModelParams& p) {
    if (nodes.size() == 1) {
        detail::check_nodes(nodes, p);
        return 0.0;
    }
    double lc = log_complementarity(nodes, p);
    if (lc == -kInf) return kInf;
    return std::max(0.0, -lc);
}

inline double novelty(const Combination& h, const ModelParams& p) {
    return novelty(std::span<const NodeId>(h.nodes), p);
}

/// log P(X = x) for X ~ Poisson(lambda). Conventions: (0, 0) -> 0 and
/// (x>0, 0) -> -inf, matching the limit of the pmf.
inline double poisson_log_pmf(long long x, double lambda) {
    if (x < 0 || lambda < 0.0) fail("poisson_log_pmf: bad arguments");
    if (lambda == 0.0) return x == 0 ? 0.0 : -kInf;
    if (x == 0) return -lambda;
    return static_cast<double>(x) * std::log(lambda) - lambda -
           std::lgamma(static_cast<double>(x) + 1.0);
}

// ---- combination universes -------------------------------------------------

/// Number of size-s combinations over n nodes (floating point; exact for the
/// small sizes used here).
inline double count_combinations(NodeId n, int s) {
    if (s < 0 || s > n) return 0.0;
    double c = 1.0;
    for (int k = 0; k < s; ++k)
        c = c * static_cast<double>(n - k) / static_cast<double>(k + 1);
    return c;
}

/// Number of size-1..max_size combinations over n nodes, capped at `cap`.
inline double universe_size(NodeId n, int max_size,
                            double cap = 1e18) {
    double total = 0.0;
    for (int s = 1; s <= max_size; ++s) {
        double c = 1.0;
        for (int k = 0; k < s; ++k)
            c = c * static_cast<double>(n - k) / static_cast<double>(k + 1);
        total += c;
        if (total > cap) return cap;
    }
    return total;
}

/// Visits every size-1..max_size combination over [0, n) in ascending size,
/// lexicographic order. fn receives a span valid only during the call.
template <typename Fn>
void for_each_combination(NodeId n, int max_size, Fn&& fn) {
    std::vector<NodeId> idx;
    for (int s = 1; s <= std::min<int>(max_size, n); ++s) {
        idx.resize(static_cast<std::size_t>(s));
        for (int k = 0; k < s; ++k) idx[static_cast<std::size_t>(k)] = k;
        while (true) {
            fn(std::span<const NodeId>(idx));
            int pos = s - 1;
            while (pos >= 0 &&
                   idx[static_cast<std::size_t>(pos)] == n - s + pos)
                --pos;
            if (pos < 0) break;
            ++idx[static_cast<std::size_t>(pos)];
            for (int k = pos + 1; k < s; ++k)
                idx[static_cast<std::size_t>(k)] =
                    idx[static_cast<std::size_t>(k - 1)] + 1;
        }
    }
}

inline constexpr double kExactUniverseBudget = 1e7;

/// Exact log-likelihood of one slice: sums the Poisson term of every
/// combination in the enumerated universe. Only feasible for small n; the
/// trainer never calls this.
inline double slice_log_likelihood(const Slice& slice, const ModelParams& p,
                                   int max_size) {
    if (universe_size(p.n_nodes(), max_size, kExactUniverseBudget + 1) >
        kExactUniverseBudget)
        fail("slice_log_likelihood: universe too large for exact mode; use "
             "the sampled training objective instead");
    double total = 0.0;
    std::vector<NodeId> key;
    for_each_combination(p.n_nodes(), max_size, [&](std::span<const NodeId> h) {
        key.assign(h.begin(), h.end());
        long long x = slice.multiplicity(key);
        total += poisson_log_pmf(x, propensity(h, p));
    });
    return total;
}

/// Same sum over an explicit universe (tests exercise specific combinations).
inline double slice_log_likelihood(const Slice& slice, const ModelParams& p,
                                   std::span<const Combination> universe) {
    double total = 0.0;
    for (const auto& h : universe) {
        long long x = slice.multiplicity(h.nodes);
        total += poisson_log_pmf(x, propensity(h, p));
    }
    return total;
}

// ---- chain -----------------------------------------------------------------

/// Fitted artifact: consecutive yearly parameters plus the transition scale.
struct ModelChain {
    std::vector<ModelParams> params_by_year;
    double sigma = 0.1;
    int max_edge_size = 0;

    void validate() const {
        if (params_by_year.empty()) fail("ModelChain: empty");
        if (!(sigma > 0.0)) fail("ModelChain: sigma must be positive");
        for (std::size_t t = 0; t < params_by_year.size(); ++t) {
            params_by_year[t].validate();
            if (t > 0) {
                if (params_by_year[t].year != params_by_year[t - 1].year + 1)
                    fail("ModelChain: years not consecutive");
                if (params_by_year[t].D != params_by_year[t - 1].D ||
                    params_by_year[t].n_nodes() !=
                        params_by_year[t - 1].n_nodes())
                    fail("ModelChain: shape mismatch across years");
            }
        }
    }

    const ModelParams& at_year(int year) const {
        for (const auto& p : params_by_year)
            if (p.year == year) return p;
        fail("ModelChain: no parameters for year " + std::to_string(year));
    }
};

inline double gaussian_log_density(double dev, double sigma) {
    return -0.5 * (dev / sigma) * (dev / sigma) - std::log(sigma) -
           0.5 * std::log(2.0 * M_PI);
}

/// The unconstrained view the HMM transition is measured in: log theta
/// entries followed by log availability.
inline std::vector<double> unconstrained_view(const ModelParams& p) {
    std::vector<double> u;
    u.reserve(p.theta.data.size() + p.avail.size());
    for (double v : p.theta.data) u.push_back(std::log(v));
    for (double r : p.avail) u.push_back(std::log(r));
    return u;
}

/// Exact-universe chain objective: yearly slice likelihoods plus Gaussian
/// transition log-densities between consecutive unconstrained states.
inline double chain_log_posterior(const ModelChain& chain,
                                  const TemporalHypergraph& g, int max_size) {
    chain.validate();
    double total = 0.0;
    std::vector<double> prev;
    for (std::size_t t = 0; t < chain.params_by_year.size(); ++t) {
        const ModelParams& p = chain.params_by_year[t];
        auto it = g.slices.find(p.year);
        if (it == g.slices.end())
            fail("chain_log_posterior: graph has no slice for year " +
                 std::to_string(p.year));
        total += slice_log_likelihood(it->second, p, max_size);
        std::vector<double> u = unconstrained_view(p);
        if (t > 0) {
            for (std::size_t k = 0; k < u.size(); ++k)
                total += gaussian_log_density(u[k] - prev[k], chain.sigma);
        }
        prev = std::move(u);
    }
    return total;
}

// ---- checkpoints -----------------------------------------------------------

inline constexpr int kCheckpointFormatVersion = 1;

struct ArtifactMeta {
    std::string tool_version{kToolVersion};
    std::uint64_t seed = 0;
    std::string config_digest;
};

inline void meta_to_json(nlohmann::json& j, const ArtifactMeta& meta) {
    j["tool_version"] = meta.tool_version;
    j["seed"] = meta.seed;
    j["config_digest"] = meta.config_digest;
}

/// One year of fitted parameters. Doubles survive the JSON round trip
/// bit-for-bit (shortest round-trip serialization).
inline nlohmann::json checkpoint_to_json(const ModelParams& p, double sigma,
                                         const std::string& registry_digest,
                                         const ArtifactMeta& meta) {
    nlohmann::json j{{"format_version", kCheckpointFormatVersion},
                     {"year", p.year},
                     {"n", p.n_nodes()},
                     {"D", p.D},
                     {"sigma", sigma},
                     {"registry_digest", registry_digest},
                     {"theta", p.theta.data},
                     {"avail", p.avail}};
    meta_to_json(j, meta);
    return j;
}

struct Checkpoint {
    ModelParams params;
    double sigma = 0.1;
    std::string registry_digest;
};

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
    if (!j.contains("format_version") ||
        j["format_version"].get<int>() != kCheckpointFormatVersion)
        fail("checkpoint: unsupported format version");
    Checkpoint c;
    c.params.year = j.at("year").get<int>();
    c.params.D = j.at("D").get<int>();
    auto n = j.at("n").get<std::size_t>();
    c.params.theta.rows = n;
    c.params.theta.cols = static_cast<std::size_t>(c.params.D);
    c.params.theta.data = j.at("theta").get<std::vector<double>>();
    c.params.avail = j.at("avail").get<std::vector<double>>();
    c.sigma = j.at("sigma").get<double>();
    c.registry_digest = j.at("registry_digest").get<std::string>();
    if (c.params.theta.data.size() != n * c.params.theta.cols ||
        c.params.avail.size() != n)
        fail("checkpoint: array sizes inconsistent with header");
    c.params.validate();
    if (!(c.sigma > 0.0)) fail("checkpoint: sigma must be positive");
    return c;
}

} // namespace surprisal
