// surprisal: fit combination-propensity models to temporal hypergraphs of
// scientific contents and contexts, score novelty, and run the evaluation
// and analytics pipelines. Subcommands: ingest, fit, score, evaluate,
// analytics, generate.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "surprisal/surprisal.hpp"

namespace fs = std::filesystem;
using namespace surprisal;

namespace {

constexpr int kExitError = 1;  // runtime failures
constexpr int kExitInput = 2;  // missing or invalid inputs

struct GlobalOpts {
    std::uint64_t seed = 12345;
    std::string out_dir = ".";
    std::string config_path;
};

std::string digest_of_json(const nlohmann::json& j) {
    return hex64(fnv1a64(j.dump()));
}

ArtifactMeta make_meta(const GlobalOpts& g, const nlohmann::json& effective_config) {
    ArtifactMeta m;
    m.seed = g.seed;
    m.config_digest = digest_of_json(effective_config);
    return m;
}

nlohmann::json load_json_file(const std::string& path) {
    if (!fs::exists(path)) fail("file not found: " + path);
    std::ifstream in(path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) fail("invalid JSON in " + path);
    return j;
}

void write_json(const fs::path& path, nlohmann::json j, const ArtifactMeta& meta) {
    meta_to_json(j, meta);
    atomic_write_file(path, j.dump(2) + "\n");
}

std::string csv_meta_line(const ArtifactMeta& meta) {
    return "# tool_version=" + meta.tool_version +
           " seed=" + std::to_string(meta.seed) +
           " config_digest=" + meta.config_digest + "\n";
}

std::vector<CorpusRecord> load_corpus(const std::string& path) {
    if (!fs::exists(path)) fail("file not found: " + path);
    std::ifstream in(path);
    return parse_corpus(in);
}

TemporalHypergraph load_snapshot(const std::string& path) {
    return snapshot_from_json(load_json_file(path));
}

// ---- ingest ----------------------------------------------------------------

int cmd_ingest(const GlobalOpts& g, const std::string& corpus_path,
               const std::string& kind_str, std::optional<int> year_lo,
               std::optional<int> year_hi, const std::string& out_path) {
    auto records = load_corpus(corpus_path);
    Kind kind = kind_from_name(kind_str);
    int lo = year_lo.value_or(0), hi = year_hi.value_or(0);
    if (!year_lo || !year_hi) {
        if (records.empty()) fail("empty corpus and no year range given");
        lo = hi = records.front().year;
        for (const auto& r : records) {
            lo = std::min(lo, r.year);
            hi = std::max(hi, r.year);
        }
        if (year_lo) lo = *year_lo;
        if (year_hi) hi = *year_hi;
    }
    TemporalHypergraph graph = build_hypergraph(records, kind, lo, hi);

    long long edges = 0, occurrences = 0;
    std::map<int, long long> size_histogram;
    for (const auto& [year, slice] : graph.slices)
        for (const auto& e : slice.edges()) {
            ++edges;
            occurrences += e.multiplicity;
            size_histogram[static_cast<int>(e.nodes.size())] += e.multiplicity;
        }
    if (occurrences == 0)
        std::cerr << "warning: year filter produced no hyperedges\n";

    nlohmann::json cfg{{"corpus", corpus_path}, {"kind", kind_str},
                       {"years", {lo, hi}}};
    ArtifactMeta meta = make_meta(g, cfg);
    nlohmann::json snap = snapshot_to_json(graph);
    write_json(out_path, std::move(snap), meta);

    nlohmann::json hist = nlohmann::json::object();
    for (const auto& [s, c] : size_histogram) hist[std::to_string(s)] = c;
    long long skipped = 0;
    for (const auto& [y, c] : graph.skipped) skipped += c;
    nlohmann::json summary{{"nodes", graph.registry.size()},
                           {"edges", edges},
                           {"occurrences", occurrences},
                           {"size_histogram", std::move(hist)},
                           {"skipped_records", skipped},
                           {"years", {lo, hi}},
                           {"max_edge_size", graph.max_edge_size},
                           {"snapshot", out_path}};
    meta_to_json(summary, meta);
    std::cout << summary.dump(2) << "\n";
    return 0;
}

// ---- fit -------------------------------------------------------------------

int cmd_fit(const GlobalOpts& g, const std::string& snapshot_path,
            std::optional<int> from_year, std::optional<int> to_year,
            const TrainConfig& cfg) {
    TemporalHypergraph graph = load_snapshot(snapshot_path);
    int lo = from_year.value_or(graph.year_lo);
    int hi = to_year.value_or(graph.year_hi);
    auto [chain, report] = fit_chain(graph, cfg, lo, hi);

    nlohmann::json effective = train_config_to_json(cfg);
    effective["snapshot"] = snapshot_path;
    effective["years"] = {lo, hi};
    ArtifactMeta meta = make_meta(g, effective);
    meta.seed = cfg.seed;

    fs::path out_dir(g.out_dir);
    std::string digest = graph.registry.digest();
    nlohmann::json files = nlohmann::json::array();
    for (const auto& p : chain.params_by_year) {
        std::string name = "checkpoint_" + std::to_string(p.year) + ".json";
        write_json(out_dir / name, checkpoint_to_json(p, chain.sigma, digest, meta),
                   meta);
        files.push_back(name);
    }
    nlohmann::json manifest{{"format_version", kCheckpointFormatVersion},
                            {"years", {chain.params_by_year.front().year,
                                       chain.params_by_year.back().year}},
                            {"files", std::move(files)},
                            {"sigma", chain.sigma},
                            {"D", cfg.D},
                            {"n", graph.registry.size()},
                            {"max_edge_size", chain.max_edge_size},
                            {"registry_digest", digest},
                            {"kind", kind_name(graph.registry.kind())},
                            {"snapshot", snapshot_path}};
    write_json(out_dir / "chain.json", std::move(manifest), meta);
    write_json(out_dir / "report.json", train_report_to_json(report), meta);
    std::cout << "fitted years " << chain.params_by_year.front().year << ".."
              << chain.params_by_year.back().year << " -> " << g.out_dir << "\n";
    return 0;
}

// ---- checkpoint loading helpers ---------------------------------------------

Checkpoint load_checkpoint(const std::string& path) {
    return checkpoint_from_json(load_json_file(path));
}

struct LoadedChain {
    ModelChain chain;
    std::string registry_digest;
};

LoadedChain load_chain(const std::string& manifest_path) {
    nlohmann::json m = load_json_file(manifest_path);
    LoadedChain lc;
    lc.chain.sigma = m.at("sigma").get<double>();
    lc.chain.max_edge_size = m.at("max_edge_size").get<int>();
    lc.registry_digest = m.at("registry_digest").get<std::string>();
    fs::path dir = fs::path(manifest_path).parent_path();
    for (const auto& f : m.at("files")) {
        Checkpoint c = load_checkpoint((dir / f.get<std::string>()).string());
        if (c.registry_digest != lc.registry_digest)
            fail("chain manifest and checkpoint registry digests disagree");
        lc.chain.params_by_year.push_back(std::move(c.params));
    }
    lc.chain.validate();
    return lc;
}

// ---- score -----------------------------------------------------------------

int cmd_score(const GlobalOpts& g, const std::string& checkpoint_path,
              const std::string& snapshot_path,
              const std::string& combinations_path, const std::string& out_path) {
    Checkpoint ckpt = load_checkpoint(checkpoint_path);
    TemporalHypergraph graph = load_snapshot(snapshot_path);
    if (graph.registry.digest() != ckpt.registry_digest)
        fail("snapshot registry does not match the checkpoint");

    if (!fs::exists(combinations_path))
        fail("file not found: " + combinations_path);
    std::ifstream in(combinations_path);
    std::vector<std::vector<NodeId>> combos;
    std::vector<std::string> labels;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::vector<NodeId> nodes;
        std::string code, label;
        while (ls >> code) {
            nodes.push_back(graph.registry.id(code)); // throws naming the code
            if (!label.empty()) label += "|";
            label += code;
        }
        if (nodes.empty()) continue;
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
        combos.push_back(std::move(nodes));
        labels.push_back(std::move(label));
    }
    if (combos.empty()) fail("no combinations to score");

    std::vector<double> props, novs;
    for (const auto& h : combos) {
        props.push_back(propensity(std::span<const NodeId>(h), ckpt.params));
        novs.push_back(novelty(std::span<const NodeId>(h), ckpt.params));
    }
    std::vector<double> pct = percentile_transform(novs);

    nlohmann::json cfg{{"checkpoint", checkpoint_path},
                       {"combinations", combinations_path}};
    ArtifactMeta meta = make_meta(g, cfg);
    std::ostringstream csv;
    csv << csv_meta_line(meta);
    csv << "combination,propensity,novelty,percentile\n";
    for (std::size_t k = 0; k < combos.size(); ++k)
        csv << labels[k] << "," << format_double(props[k]) << ","
            << format_double(novs[k]) << "," << format_double(pct[k]) << "\n";
    if (out_path.empty())
        std::cout << csv.str();
    else
        atomic_write_file(out_path, csv.str());
    return 0;
}

// ---- evaluate --------------------------------------------------------------

int cmd_evaluate(const GlobalOpts& g, const std::string& checkpoint_path,
                 const std::string& snapshot_path, std::optional<int> year,
                 long long n_pairs, const std::string& out_path) {
    Checkpoint ckpt = load_checkpoint(checkpoint_path);
    TemporalHypergraph graph = load_snapshot(snapshot_path);
    if (graph.registry.digest() != ckpt.registry_digest)
        fail("snapshot registry does not match the checkpoint");
    int target_year = year.value_or(ckpt.params.year + 1);
    if (graph.slices.find(target_year) == graph.slices.end())
        fail("snapshot has no slice for year " + std::to_string(target_year));
    AucEstimate auc =
        estimate_auc(ckpt.params, graph.slice(target_year), n_pairs, g.seed);

    nlohmann::json cfg{{"checkpoint", checkpoint_path},
                       {"snapshot", snapshot_path},
                       {"year", target_year},
                       {"n_pairs", n_pairs}};
    ArtifactMeta meta = make_meta(g, cfg);
    nlohmann::json out = auc_to_json(auc);
    out["model_year"] = ckpt.params.year;
    out["target_year"] = target_year;
    meta_to_json(out, meta);
    if (out_path.empty())
        std::cout << out.dump(2) << "\n";
    else
        atomic_write_file(out_path, out.dump(2) + "\n");
    return 0;
}

// ---- analytics -------------------------------------------------------------

std::string curve_csv(const BinnedCurve& c, const ArtifactMeta& meta) {
    std::ostringstream csv;
    csv << csv_meta_line(meta);
    csv << "bin_center,fraction,count\n";
    for (int b = 0; b < c.bins_a; ++b) {
        auto i = static_cast<std::size_t>(b);
        csv << format_double(c.centers_a[i]) << "," << format_double(c.fractions[i])
            << "," << c.counts[i] << "\n";
    }
    return csv.str();
}

int run_hits(const GlobalOpts& g, std::span<const CorpusRecord> records,
             const ArtifactMeta& meta) {
    auto hits = label_hits(records);
    std::ostringstream csv;
    csv << csv_meta_line(meta);
    csv << "record_id,year,citations,hit\n";
    for (const auto& r : records)
        csv << r.record_id << "," << r.year << "," << r.citations << ","
            << (hits.at(r.record_id) ? 1 : 0) << "\n";
    atomic_write_file(fs::path(g.out_dir) / "hits.csv", csv.str());
    return 0;
}

int run_entropy(const GlobalOpts& g, std::span<const CorpusRecord> records,
                const ArtifactMeta& meta) {
    TemporalHypergraph graph;
    int lo = records.front().year, hi = records.front().year;
    for (const auto& r : records) {
        lo = std::min(lo, r.year);
        hi = std::max(hi, r.year);
    }
    graph = build_hypergraph(records, Kind::content, lo, hi);
    std::ostringstream csv;
    csv << csv_meta_line(meta);
    csv << "year,entropy,active_nodes\n";
    for (int y = lo; y <= hi; ++y) {
        std::vector<double> counts(static_cast<std::size_t>(graph.registry.size()), 0.0);
        for (const auto& r : records) {
            if (r.year != y) continue;
            for (const auto& code : r.content_codes)
                counts[static_cast<std::size_t>(graph.registry.id(code))] += 1.0;
        }
        long long active = 0;
        for (double c : counts)
            if (c > 0.0) ++active;
        if (active == 0) continue;
        csv << y << "," << format_double(entropy_of_attention(counts)) << ","
            << active << "\n";
    }
    atomic_write_file(fs::path(g.out_dir) / "entropy.csv", csv.str());
    return 0;
}

int run_citesim(const GlobalOpts& g, std::span<const CorpusRecord> records,
                int n_bins, const ArtifactMeta& meta) {
    int hi = records.front().year;
    for (const auto& r : records) hi = std::max(hi, r.year);
    int lo = hi;
    for (const auto& r : records) lo = std::min(lo, r.year);
    TemporalHypergraph content = build_hypergraph(records, Kind::content, lo, hi);
    auto vectors = build_venue_vectors(records, content.registry, hi);
    Rng rng = make_rng(meta.seed, 0x63697465); // "cite"
    auto curve = citation_similarity_ratio(records, vectors, content.registry,
                                           n_bins, rng);
    std::ostringstream csv;
    csv << csv_meta_line(meta);
    csv << "bin_lo,bin_hi,observed,simulated,ratio,defined\n";
    for (int b = 0; b < curve.n_bins; ++b) {
        auto i = static_cast<std::size_t>(b);
        csv << format_double(static_cast<double>(b) / curve.n_bins) << ","
            << format_double(static_cast<double>(b + 1) / curve.n_bins) << ","
            << curve.observed[i] << "," << curve.simulated[i] << ","
            << (curve.defined[i] ? format_double(curve.ratio[i]) : "nan") << ","
            << (curve.defined[i] ? 1 : 0) << "\n";
    }
    atomic_write_file(fs::path(g.out_dir) / "citesim.csv", csv.str());
    return 0;
}

int run_backgrounds(const GlobalOpts& g, std::span<const CorpusRecord> records,
                    const std::string& chain_path, int n_bins,
                    const ArtifactMeta& meta) {
    if (chain_path.empty()) fail("backgrounds requires --chain");
    LoadedChain lc = load_chain(chain_path);
    int lo = records.front().year, hi = records.front().year;
    for (const auto& r : records) {
        lo = std::min(lo, r.year);
        hi = std::max(hi, r.year);
    }
    TemporalHypergraph context = build_hypergraph(records, Kind::context, lo, hi);
    if (context.registry.digest() != lc.registry_digest)
        fail("corpus context registry does not match the chain");
    auto histories = build_author_histories(records);
    auto hits = label_hits(records);

    // Uses the latest fitted year strictly before the record's year; records
    // at or before the first fitted year are skipped.
    int first_year = lc.chain.params_by_year.front().year;
    int last_year = lc.chain.params_by_year.back().year;

    struct Row {
        const CorpusRecord* rec;
        double career, team, expedition;
    };
    std::vector<Row> rows;
    long long skipped = 0;
    for (const auto& r : records) {
        if (r.year <= first_year || r.authors.empty() || r.venue.empty()) {
            ++skipped;
            continue;
        }
        const ModelParams& params =
            lc.chain.at_year(std::min(r.year - 1, last_year));
        if (!context.registry.contains(r.venue)) {
            ++skipped;
            continue;
        }
        std::vector<AuthorHistory> team;
        std::vector<double> careers;
        for (const auto& a : r.authors) {
            auto it = histories.find(a);
            if (it == histories.end()) continue;
            if (it->second.venues_before(r.year).empty()) continue;
            team.push_back(it->second);
            careers.push_back(career_novelty(it->second, params,
                                             context.registry, r.year));
        }
        if (team.empty()) {
            ++skipped;
            continue;
        }
        std::sort(careers.begin(), careers.end());
        double career_mean = 0.0;
        for (double c : careers) career_mean += c;
        career_mean /= static_cast<double>(careers.size());
        double team_nov = team_novelty(team, params, context.registry, r.year);
        double exp_nov = expedition_novelty(team, r.venue, params,
                                            context.registry, r.year);
        rows.push_back(Row{&r, career_mean, team_nov, exp_nov});
    }
    if (rows.empty()) fail("backgrounds: no record has a usable team history");

    std::ostringstream csv;
    csv << csv_meta_line(meta);
    csv << "record_id,year,career,team,expedition,hit\n";
    for (const auto& row : rows)
        csv << row.rec->record_id << "," << row.rec->year << ","
            << format_double(row.career) << "," << format_double(row.team) << ","
            << format_double(row.expedition) << ","
            << (hits.at(row.rec->record_id) ? 1 : 0) << "\n";
    atomic_write_file(fs::path(g.out_dir) / "backgrounds.csv", csv.str());

    std::vector<int> years;
    std::vector<char> hit_flags;
    for (const auto& row : rows) {
        years.push_back(row.rec->year);
        hit_flags.push_back(hits.at(row.rec->record_id) ? 1 : 0);
    }
    nlohmann::json summary{{"records", rows.size()}, {"skipped", skipped}};
    const char* names[3] = {"career", "team", "expedition"};
    for (int which = 0; which < 3; ++which) {
        std::vector<double> vals;
        vals.reserve(rows.size());
        for (const auto& row : rows)
            vals.push_back(which == 0 ? row.career
                                      : which == 1 ? row.team : row.expedition);
        auto pct = percentile_by_year(years, vals);
        BinnedCurve curve = bin_curve(pct, hit_flags, n_bins);
        atomic_write_file(fs::path(g.out_dir) /
                              (std::string(names[which]) + "_curve.csv"),
                          curve_csv(curve, meta));
        long long excluded = 0;
        try {
            summary[std::string(names[which]) + "_skewness"] =
                sample_skewness(vals, &excluded);
        } catch (const Error&) {
            summary[std::string(names[which]) + "_skewness"] = nullptr;
        }
        summary[std::string(names[which]) + "_infinite"] = excluded;
    }
    write_json(fs::path(g.out_dir) / "backgrounds_summary.json",
               std::move(summary), meta);
    return 0;
}

int cmd_analytics(const GlobalOpts& g, const std::string& corpus_path,
                  const std::string& which, const std::string& chain_path,
                  int n_bins) {
    auto records = load_corpus(corpus_path);
    if (records.empty()) fail("empty corpus");
    nlohmann::json cfg{{"corpus", corpus_path}, {"which", which},
                       {"chain", chain_path}, {"bins", n_bins}};
    ArtifactMeta meta = make_meta(g, cfg);
    if (which == "hits") return run_hits(g, records, meta);
    if (which == "entropy") return run_entropy(g, records, meta);
    if (which == "citesim") return run_citesim(g, records, n_bins, meta);
    if (which == "backgrounds")
        return run_backgrounds(g, records, chain_path, n_bins, meta);
    fail("unknown analysis '" + which + "'");
}

// ---- generate ---------------------------------------------------------------

int cmd_generate(const GlobalOpts& g, const std::string& spec_path) {
    PlantedSpec spec = planted_spec_from_json(load_json_file(spec_path));
    Rng rng = make_rng(g.seed, 0x67656e); // "gen"
    auto params = sample_planted_params(spec, rng);
    SyntheticCorpus corpus = sample_corpus(spec, params, rng);

    nlohmann::json cfg = planted_spec_to_json(spec);
    ArtifactMeta meta = make_meta(g, cfg);
    fs::path out_dir(g.out_dir);

    std::ostringstream jsonl;
    jsonl << csv_meta_line(meta);
    for (const auto& r : corpus.records) jsonl << record_to_json(r).dump() << "\n";
    atomic_write_file(out_dir / "corpus.jsonl", jsonl.str());

    TemporalHypergraph graph =
        build_hypergraph(corpus.records, Kind::content, spec.start_year,
                         spec.start_year + spec.years - 1);
    write_json(out_dir / "snapshot.json", snapshot_to_json(graph), meta);

    nlohmann::json truth_params = nlohmann::json::array();
    for (const auto& p : params)
        truth_params.push_back(nlohmann::json{{"year", p.year},
                                              {"theta", p.theta.data},
                                              {"avail", p.avail}});
    nlohmann::json truth_records = nlohmann::json::array();
    for (const auto& t : corpus.truth)
        truth_records.push_back(
            nlohmann::json{{"id", t.record_id},
                           {"year", t.year},
                           {"content_novelty",
                            std::isfinite(t.content_novelty)
                                ? nlohmann::json(t.content_novelty)
                                : nlohmann::json("inf")},
                           {"dominant_block", t.dominant_block}});
    nlohmann::json truth{{"spec", planted_spec_to_json(spec)},
                         {"null_hit_linkage", spec.hit_link_strength == 0.0},
                         {"n", spec.n_nodes},
                         {"D", spec.D},
                         {"params", std::move(truth_params)},
                         {"records", std::move(truth_records)}};
    write_json(out_dir / "truth.json", std::move(truth), meta);
    std::cout << "generated " << corpus.records.size() << " records -> "
              << g.out_dir << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hypergraph combination-propensity models and novelty scoring"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "global RNG seed");
    app.add_option("--out-dir", g.out_dir, "output directory");
    app.add_option("--config", g.config_path, "JSON config file");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "build a hypergraph snapshot from a corpus");
    std::string corpus_path, kind_str = "content", out_path = "snapshot.json";
    std::optional<int> year_lo, year_hi;
    ingest->add_option("--corpus", corpus_path, "corpus JSON Lines")->required();
    ingest->add_option("--kind", kind_str, "content|context");
    ingest->add_option("--from-year", year_lo, "first year (default: data min)");
    ingest->add_option("--to-year", year_hi, "last year (default: data max)");
    ingest->add_option("--out", out_path, "snapshot output path");

    // fit
    auto* fit = app.add_subcommand("fit", "fit the yearly parameter chain");
    std::string snapshot_path;
    std::optional<int> fit_from, fit_to;
    std::optional<int> opt_epochs, opt_D;
    std::optional<std::uint64_t> opt_seed;
    fit->add_option("--snapshot", snapshot_path, "hypergraph snapshot")->required();
    fit->add_option("--from-year", fit_from, "first year to fit");
    fit->add_option("--to-year", fit_to, "last year to fit");
    fit->add_option("--epochs", opt_epochs, "override config epochs");
    fit->add_option("--d", opt_D, "override latent dimensions");
    fit->add_option("--train-seed", opt_seed, "override training seed");

    // score
    auto* score = app.add_subcommand("score", "score combinations from a checkpoint");
    std::string ckpt_path, combos_path, score_snapshot, score_out;
    score->add_option("--checkpoint", ckpt_path, "checkpoint JSON")->required();
    score->add_option("--snapshot", score_snapshot, "snapshot (for the registry)")->required();
    score->add_option("--combinations", combos_path,
                      "text file, one whitespace-separated combination per line")
        ->required();
    score->add_option("--out", score_out, "CSV output (default stdout)");

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "held-out AUC for the next year");
    std::string eval_ckpt, eval_snapshot, eval_out;
    std::optional<int> eval_year;
    long long n_pairs = 10000;
    evaluate->add_option("--checkpoint", eval_ckpt, "checkpoint at year T")->required();
    evaluate->add_option("--snapshot", eval_snapshot, "snapshot containing year T+1")
        ->required();
    evaluate->add_option("--year", eval_year, "target year (default: T+1)");
    evaluate->add_option("--n-pairs", n_pairs, "sampled positive/negative pairs");
    evaluate->add_option("--out", eval_out, "JSON output (default stdout)");

    // analytics
    auto* analytics = app.add_subcommand("analytics", "corpus-level statistics");
    std::string an_corpus, an_which, an_chain;
    int an_bins = 30;
    analytics->add_option("--corpus", an_corpus, "corpus JSON Lines")->required();
    analytics->add_option("--which", an_which, "hits|entropy|citesim|backgrounds")
        ->required();
    analytics->add_option("--chain", an_chain, "chain manifest (for backgrounds)");
    analytics->add_option("--bins", an_bins, "bin count for curves");

    // generate
    auto* generate = app.add_subcommand("generate", "sample a synthetic corpus");
    std::string gen_spec;
    generate->add_option("--spec", gen_spec, "planted spec JSON")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*ingest)
            return cmd_ingest(g, corpus_path, kind_str, year_lo, year_hi, out_path);
        if (*fit) {
            TrainConfig cfg;
            if (!g.config_path.empty())
                cfg = train_config_from_json(load_json_file(g.config_path));
            if (opt_epochs) cfg.epochs = *opt_epochs;
            if (opt_D) cfg.D = *opt_D;
            if (opt_seed) cfg.seed = *opt_seed;
            cfg.validate();
            return cmd_fit(g, snapshot_path, fit_from, fit_to, cfg);
        }
        if (*score)
            return cmd_score(g, ckpt_path, score_snapshot, combos_path, score_out);
        if (*evaluate)
            return cmd_evaluate(g, eval_ckpt, eval_snapshot, eval_year, n_pairs,
                                eval_out);
        if (*analytics)
            return cmd_analytics(g, an_corpus, an_which, an_chain, an_bins);
        if (*generate) return cmd_generate(g, gen_spec);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return 0;
}
