#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "surprisal/util.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code;
    std::string stdout_text;
    std::string stderr_text;
};

fs::path scratch_root() {
    auto dir = fs::temp_directory_path() / "surprisal_cli_tests";
    fs::create_directories(dir);
    return dir;
}

fs::path fresh_dir(const std::string& name) {
    auto dir = scratch_root() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunResult run(const std::string& args) {
    static int counter = 0;
    auto out = scratch_root() / ("stdout." + std::to_string(counter));
    auto err = scratch_root() / ("stderr." + std::to_string(counter));
    ++counter;
    std::string cmd = std::string(SURPRISAL_BIN) + " " + args + " >" +
                      out.string() + " 2>" + err.string();
    int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.stdout_text = surprisal::read_file(out);
    r.stderr_text = surprisal::read_file(err);
    return r;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    f << text;
}

std::string tiny_corpus() {
    std::ostringstream s;
    s << R"({"id":"p1","year":2000,"content":["A","B"],"context":["X"],"venue":"X","authors":["a1"],"citations":5})" << "\n"
      << R"({"id":"p2","year":2000,"content":["A","B"],"context":["Y"],"venue":"Y","authors":["a2"],"citations":1})" << "\n"
      << R"({"id":"p3","year":2001,"content":["B","C"],"context":["X","Y"],"venue":"X","authors":["a1","a2"],"citations":9})" << "\n";
    return s.str();
}

std::string planted_spec(double strength = 0.0, int years = 3) {
    nlohmann::json j{{"n_nodes", 16},
                     {"D", 2},
                     {"within_weight", 0.9},
                     {"avail_range", {0.8, 1.2}},
                     {"size_distribution", {{"1", 0.2}, {"2", 0.8}}},
                     {"drift", 0.01},
                     {"years", years},
                     {"start_year", 2000},
                     {"n_authors", 20},
                     {"n_venues", 4},
                     {"hit_link_strength", strength},
                     {"edge_rate", 1.5}};
    return j.dump();
}

} // namespace

TEST_CASE("ingest writes a snapshot and a summary") {
    auto dir = fresh_dir("ingest");
    write(dir / "corpus.jsonl", tiny_corpus());
    auto r = run("ingest --corpus " + (dir / "corpus.jsonl").string() +
                 " --kind content --out " + (dir / "snap.json").string());
    REQUIRE(r.exit_code == 0);
    auto summary = nlohmann::json::parse(r.stdout_text);
    CHECK(summary["occurrences"] == 3);
    CHECK(summary["nodes"] == 3);
    CHECK(summary["seed"].is_number());
    CHECK(summary["config_digest"].is_string());
    CHECK(fs::exists(dir / "snap.json"));
}

TEST_CASE("ingest: missing corpus file exits 2 with a message") {
    auto r = run("ingest --corpus /nonexistent/corpus.jsonl --out /tmp/x.json");
    CHECK(r.exit_code == 2);
    CHECK(r.stderr_text.find("not found") != std::string::npos);
}

TEST_CASE("ingest: a year filter excluding everything warns but succeeds") {
    auto dir = fresh_dir("ingest_empty");
    write(dir / "corpus.jsonl", tiny_corpus());
    auto r = run("ingest --corpus " + (dir / "corpus.jsonl").string() +
                 " --from-year 1980 --to-year 1985 --out " +
                 (dir / "snap.json").string());
    REQUIRE(r.exit_code == 0);
    CHECK(r.stderr_text.find("warning") != std::string::npos);
    auto summary = nlohmann::json::parse(r.stdout_text);
    CHECK(summary["occurrences"] == 0);
}

TEST_CASE("parse errors surface with line numbers and a nonzero exit") {
    auto dir = fresh_dir("ingest_bad");
    write(dir / "corpus.jsonl", "{broken\n");
    auto r = run("ingest --corpus " + (dir / "corpus.jsonl").string() +
                 " --out " + (dir / "snap.json").string());
    CHECK(r.exit_code == 2);
    CHECK(r.stderr_text.find("line 1") != std::string::npos);
}

TEST_CASE("generate is deterministic and fit twice is byte-identical") {
    auto dir = fresh_dir("determinism");
    write(dir / "spec.json", planted_spec());
    auto r1 = run("--seed 7 --out-dir " + (dir / "g1").string() +
                  " generate --spec " + (dir / "spec.json").string());
    REQUIRE(r1.exit_code == 0);
    auto r2 = run("--seed 7 --out-dir " + (dir / "g2").string() +
                  " generate --spec " + (dir / "spec.json").string());
    REQUIRE(r2.exit_code == 0);
    for (const char* name : {"corpus.jsonl", "snapshot.json", "truth.json"})
        CHECK(surprisal::read_file(dir / "g1" / name) ==
              surprisal::read_file(dir / "g2" / name));

    // different seed, different corpus
    auto r3 = run("--seed 8 --out-dir " + (dir / "g3").string() +
                  " generate --spec " + (dir / "spec.json").string());
    REQUIRE(r3.exit_code == 0);
    CHECK(surprisal::read_file(dir / "g1" / "corpus.jsonl") !=
          surprisal::read_file(dir / "g3" / "corpus.jsonl"));

    nlohmann::json cfg{{"D", 2}, {"epochs", 5}, {"seed", 11}};
    write(dir / "train.json", cfg.dump());
    for (const char* out : {"f1", "f2"}) {
        auto rf = run("--config " + (dir / "train.json").string() +
                      " --out-dir " + (dir / out).string() +
                      " fit --snapshot " + (dir / "g1" / "snapshot.json").string());
        REQUIRE(rf.exit_code == 0);
    }
    for (const char* name :
         {"checkpoint_2000.json", "checkpoint_2001.json", "checkpoint_2002.json",
          "chain.json"})
        CHECK(surprisal::read_file(dir / "f1" / name) ==
              surprisal::read_file(dir / "f2" / name));
}

TEST_CASE("fit with zero epochs equals the initialization and score works") {
    auto dir = fresh_dir("fit_zero");
    write(dir / "spec.json", planted_spec());
    REQUIRE(run("--seed 7 --out-dir " + dir.string() + " generate --spec " +
                (dir / "spec.json").string())
                .exit_code == 0);
    nlohmann::json cfg{{"D", 2}, {"epochs", 0}, {"seed", 11}};
    write(dir / "train.json", cfg.dump());
    auto rf = run("--config " + (dir / "train.json").string() + " --out-dir " +
                  dir.string() + " fit --snapshot " +
                  (dir / "snapshot.json").string());
    REQUIRE(rf.exit_code == 0);
    auto c2000 = nlohmann::json::parse(
        surprisal::read_file(dir / "checkpoint_2000.json"));
    auto c2001 = nlohmann::json::parse(
        surprisal::read_file(dir / "checkpoint_2001.json"));
    CHECK(c2000["theta"] == c2001["theta"]); // untouched warm start

    // score: singleton novelty must be 0, duplicates preserved
    write(dir / "combos.txt", "C0000\nC0000 C0001\nC0000\n");
    auto rs = run("score --checkpoint " + (dir / "checkpoint_2000.json").string() +
                  " --snapshot " + (dir / "snapshot.json").string() +
                  " --combinations " + (dir / "combos.txt").string());
    REQUIRE(rs.exit_code == 0);
    std::istringstream lines(rs.stdout_text);
    std::string line;
    std::getline(lines, line); // meta comment
    std::getline(lines, line);
    CHECK(line == "combination,propensity,novelty,percentile");
    std::vector<std::string> rows;
    while (std::getline(lines, line)) rows.push_back(line);
    REQUIRE(rows.size() == 3); // duplicates not collapsed
    CHECK(rows[0].find("C0000,") == 0);
    CHECK(rows[0].find(",0,") != std::string::npos); // novelty column 0
    CHECK(rows[0] == rows[2]);

    auto runknown = run("score --checkpoint " +
                        (dir / "checkpoint_2000.json").string() + " --snapshot " +
                        (dir / "snapshot.json").string() + " --combinations " +
                        (dir / "missing_code.txt").string());
    CHECK(runknown.exit_code != 0);

    write(dir / "bad.txt", "NOPE\n");
    auto rbad = run("score --checkpoint " + (dir / "checkpoint_2000.json").string() +
                    " --snapshot " + (dir / "snapshot.json").string() +
                    " --combinations " + (dir / "bad.txt").string());
    CHECK(rbad.exit_code == 2);
    CHECK(rbad.stderr_text.find("NOPE") != std::string::npos);
}

TEST_CASE("scoring an orthogonal pair renders the inf token") {
    auto dir = fresh_dir("score_inf");
    nlohmann::json spec =
        nlohmann::json::parse(planted_spec());
    spec["within_weight"] = 1.0; // one-hot blocks: cross-block pairs impossible
    spec["drift"] = 0.0;
    write(dir / "spec.json", spec.dump());
    REQUIRE(run("--seed 3 --out-dir " + dir.string() + " generate --spec " +
                (dir / "spec.json").string())
                .exit_code == 0);
    nlohmann::json cfg{{"D", 2}, {"epochs", 0}, {"seed", 1}};
    write(dir / "train.json", cfg.dump());
    REQUIRE(run("--config " + (dir / "train.json").string() + " --out-dir " +
                dir.string() + " fit --snapshot " +
                (dir / "snapshot.json").string())
                .exit_code == 0);
    // score against planted truth instead: build a checkpoint from truth params
    auto truth = nlohmann::json::parse(surprisal::read_file(dir / "truth.json"));
    auto ckpt = nlohmann::json::parse(
        surprisal::read_file(dir / "checkpoint_2000.json"));
    ckpt["theta"] = truth["params"][0]["theta"];
    ckpt["avail"] = truth["params"][0]["avail"];
    write(dir / "truth_ckpt.json", ckpt.dump());
    // nodes 0 and 1 are in different round-robin blocks
    write(dir / "combos.txt", "C0000 C0001\n");
    auto rs = run("score --checkpoint " + (dir / "truth_ckpt.json").string() +
                  " --snapshot " + (dir / "snapshot.json").string() +
                  " --combinations " + (dir / "combos.txt").string());
    REQUIRE(rs.exit_code == 0);
    CHECK(rs.stdout_text.find(",inf,") != std::string::npos);
}

TEST_CASE("evaluate reports AUC JSON with the default 10000 pairs") {
    auto dir = fresh_dir("evaluate");
    write(dir / "spec.json", planted_spec(0.0, 3));
    REQUIRE(run("--seed 21 --out-dir " + dir.string() + " generate --spec " +
                (dir / "spec.json").string())
                .exit_code == 0);
    nlohmann::json cfg{{"D", 2}, {"epochs", 60}, {"seed", 4}};
    write(dir / "train.json", cfg.dump());
    REQUIRE(run("--config " + (dir / "train.json").string() + " --out-dir " +
                dir.string() + " fit --snapshot " +
                (dir / "snapshot.json").string() + " --to-year 2001")
                .exit_code == 0);
    auto r = run("--seed 5 evaluate --checkpoint " +
                 (dir / "checkpoint_2001.json").string() + " --snapshot " +
                 (dir / "snapshot.json").string());
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.stdout_text);
    CHECK(j["n_pairs"] == 10000);
    CHECK(j["target_year"] == 2002);
    CHECK(j["auc"].get<double>() > 0.5);
    CHECK(j["wins"].get<long long>() + j["ties"].get<long long>() +
              j["losses"].get<long long>() ==
          10000);

    auto rmissing = run("evaluate --checkpoint " +
                        (dir / "checkpoint_2001.json").string() + " --snapshot " +
                        (dir / "snapshot.json").string() + " --year 2050");
    CHECK(rmissing.exit_code == 2);
}

TEST_CASE("evaluate: perfectly separated planted blocks score near 1") {
    auto dir = fresh_dir("evaluate_perfect");
    nlohmann::json spec = nlohmann::json::parse(planted_spec(0.0, 3));
    spec["within_weight"] = 1.0; // cross-block combinations are impossible
    spec["drift"] = 0.0;
    spec["size_distribution"] = {{"2", 1.0}}; // pairs only
    spec["edge_rate"] = 8.0; // pure pairs materialize almost surely
    write(dir / "spec.json", spec.dump());
    REQUIRE(run("--seed 29 --out-dir " + dir.string() + " generate --spec " +
                (dir / "spec.json").string())
                .exit_code == 0);
    nlohmann::json cfg{{"D", 2}, {"epochs", 120}, {"seed", 4},
                       {"negative_ratio", 5}};
    write(dir / "train.json", cfg.dump());
    REQUIRE(run("--config " + (dir / "train.json").string() + " --out-dir " +
                dir.string() + " fit --snapshot " +
                (dir / "snapshot.json").string() + " --to-year 2001")
                .exit_code == 0);
    auto r = run("--seed 5 evaluate --checkpoint " +
                 (dir / "checkpoint_2001.json").string() + " --snapshot " +
                 (dir / "snapshot.json").string());
    REQUIRE(r.exit_code == 0);
    auto j = nlohmann::json::parse(r.stdout_text);
    CHECK(j["auc"].get<double>() >= 0.99);
}

TEST_CASE("analytics: hits, entropy, citesim, backgrounds") {
    auto dir = fresh_dir("analytics");
    // ten records in one year: exactly one hit
    std::ostringstream corpus;
    for (int k = 0; k < 10; ++k)
        corpus << nlohmann::json{{"id", "p" + std::to_string(k)},
                                 {"year", 2000},
                                 {"content", {"A", "B"}},
                                 {"context", {"X"}},
                                 {"venue", "X"},
                                 {"authors", {"a" + std::to_string(k)}},
                                 {"citations", k}}
                      .dump()
               << "\n";
    write(dir / "hits.jsonl", corpus.str());
    auto rh = run("--out-dir " + dir.string() + " analytics --corpus " +
                  (dir / "hits.jsonl").string() + " --which hits");
    REQUIRE(rh.exit_code == 0);
    std::string hits_csv = surprisal::read_file(dir / "hits.csv");
    std::istringstream hl(hits_csv);
    std::string line;
    int hit_rows = 0, data_rows = 0;
    while (std::getline(hl, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("record_id", 0) == 0)
            continue;
        ++data_rows;
        if (line.size() >= 2 && line.substr(line.size() - 2) == ",1") ++hit_rows;
    }
    CHECK(data_rows == 10);
    CHECK(hit_rows == 1);

    // entropy: uniform counts over two codes -> 1.0
    std::ostringstream ecorp;
    ecorp << nlohmann::json{{"id", "e1"}, {"year", 2000}, {"content", {"A"}}}.dump()
          << "\n"
          << nlohmann::json{{"id", "e2"}, {"year", 2000}, {"content", {"B"}}}.dump()
          << "\n";
    write(dir / "entropy.jsonl", ecorp.str());
    auto re = run("--out-dir " + dir.string() + " analytics --corpus " +
                  (dir / "entropy.jsonl").string() + " --which entropy");
    REQUIRE(re.exit_code == 0);
    std::string entropy_csv = surprisal::read_file(dir / "entropy.csv");
    CHECK(entropy_csv.find("2000,1,2") != std::string::npos);

    // citesim + backgrounds on a planted corpus
    write(dir / "spec.json", planted_spec(0.0, 4));
    REQUIRE(run("--seed 17 --out-dir " + dir.string() + " generate --spec " +
                (dir / "spec.json").string())
                .exit_code == 0);
    auto rc = run("--seed 2 --out-dir " + dir.string() + " analytics --corpus " +
                  (dir / "corpus.jsonl").string() + " --which citesim --bins 10");
    REQUIRE(rc.exit_code == 0);
    CHECK(fs::exists(dir / "citesim.csv"));

    // context chain for backgrounds
    REQUIRE(run("--out-dir " + dir.string() + " ingest --corpus " +
                (dir / "corpus.jsonl").string() + " --kind context --out " +
                (dir / "ctx.json").string())
                .exit_code == 0);
    nlohmann::json cfg{{"D", 2}, {"epochs", 10}, {"seed", 6}};
    write(dir / "train.json", cfg.dump());
    REQUIRE(run("--config " + (dir / "train.json").string() + " --out-dir " +
                (dir / "ctxfit").string() + " fit --snapshot " +
                (dir / "ctx.json").string())
                .exit_code == 0);
    auto rb = run("--out-dir " + dir.string() + " analytics --corpus " +
                  (dir / "corpus.jsonl").string() +
                  " --which backgrounds --bins 30 --chain " +
                  (dir / "ctxfit" / "chain.json").string());
    REQUIRE(rb.exit_code == 0);
    for (const char* name :
         {"career_curve.csv", "team_curve.csv", "expedition_curve.csv"}) {
        std::string csv = surprisal::read_file(dir / name);
        std::istringstream cs(csv);
        int rows = 0;
        while (std::getline(cs, line)) {
            if (line.empty() || line[0] == '#' || line.rfind("bin_center", 0) == 0)
                continue;
            ++rows;
        }
        CHECK(rows == 30);
    }
    CHECK(fs::exists(dir / "backgrounds.csv"));
    CHECK(fs::exists(dir / "backgrounds_summary.json"));
}

TEST_CASE("fit report shows ascent of the per-epoch objective") {
    auto dir = fresh_dir("monotone");
    write(dir / "spec.json", planted_spec());
    REQUIRE(run("--seed 17 --out-dir " + dir.string() + " generate --spec " +
                (dir / "spec.json").string())
                .exit_code == 0);
    // small constant learning rate keeps the run in the ascent regime
    nlohmann::json cfg{
        {"D", 2}, {"epochs", 40}, {"seed", 6}, {"learning_rate", 0.002}};
    write(dir / "train.json", cfg.dump());
    REQUIRE(run("--config " + (dir / "train.json").string() + " --out-dir " +
                dir.string() + " fit --snapshot " +
                (dir / "snapshot.json").string())
                .exit_code == 0);
    auto report =
        nlohmann::json::parse(surprisal::read_file(dir / "report.json"));
    long long steps = 0, violations = 0;
    for (const auto& year : report["years"]) {
        auto obj = year["objective"].get<std::vector<double>>();
        for (std::size_t e = 1; e < obj.size(); ++e) {
            ++steps;
            if (obj[e] < obj[e - 1]) ++violations;
        }
    }
    REQUIRE(steps > 0);
    CHECK(violations * 100 <= steps); // at most 1% decreasing steps
}

TEST_CASE("generate flags null hit linkage in the truth file") {
    auto dir = fresh_dir("truth_flags");
    write(dir / "spec0.json", planted_spec(0.0));
    REQUIRE(run("--seed 9 --out-dir " + (dir / "null").string() +
                " generate --spec " + (dir / "spec0.json").string())
                .exit_code == 0);
    auto t0 = nlohmann::json::parse(
        surprisal::read_file(dir / "null" / "truth.json"));
    CHECK(t0["null_hit_linkage"] == true);

    write(dir / "spec2.json", planted_spec(2.0));
    REQUIRE(run("--seed 9 --out-dir " + (dir / "linked").string() +
                " generate --spec " + (dir / "spec2.json").string())
                .exit_code == 0);
    auto t2 = nlohmann::json::parse(
        surprisal::read_file(dir / "linked" / "truth.json"));
    CHECK(t2["null_hit_linkage"] == false);

    // zero drift: planted params identical across years
    nlohmann::json spec = nlohmann::json::parse(planted_spec());
    spec["drift"] = 0.0;
    write(dir / "spec_nodrift.json", spec.dump());
    REQUIRE(run("--seed 9 --out-dir " + (dir / "nodrift").string() +
                " generate --spec " + (dir / "spec_nodrift.json").string())
                .exit_code == 0);
    auto tn = nlohmann::json::parse(
        surprisal::read_file(dir / "nodrift" / "truth.json"));
    CHECK(tn["params"][0]["theta"] == tn["params"][1]["theta"]);
}
