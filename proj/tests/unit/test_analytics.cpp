#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "surprisal/analytics.hpp"

using namespace surprisal;

namespace {

ModelParams make_params(std::vector<std::vector<double>> theta,
                        std::vector<double> avail, int year = 2000) {
    ModelParams p;
    p.year = year;
    p.D = static_cast<int>(theta[0].size());
    p.theta = Matrix(theta.size(), theta[0].size());
    for (std::size_t i = 0; i < theta.size(); ++i)
        for (std::size_t d = 0; d < theta[i].size(); ++d)
            p.theta(i, d) = theta[i][d];
    p.avail = std::move(avail);
    return p;
}

CorpusRecord rec(std::string id, int year, std::vector<std::string> content,
                 std::string venue, std::vector<std::string> authors = {},
                 std::vector<std::string> context = {}) {
    CorpusRecord r;
    r.record_id = std::move(id);
    r.year = year;
    r.content_codes = std::move(content);
    std::sort(r.content_codes.begin(), r.content_codes.end());
    r.context_codes = std::move(context);
    std::sort(r.context_codes.begin(), r.context_codes.end());
    r.venue = std::move(venue);
    r.authors = std::move(authors);
    return r;
}

AuthorHistory history(std::string id,
                      std::vector<std::pair<int, std::string>> entries) {
    AuthorHistory h;
    h.author_id = std::move(id);
    int k = 0;
    for (auto& [year, venue] : entries)
        h.entries.push_back({year, venue, "r" + std::to_string(k++)});
    return h;
}

} // namespace

TEST_CASE("entropy_of_attention on reference inputs") {
    CHECK_THAT(entropy_of_attention(std::vector<double>{5, 5, 5, 5}),
               Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK(entropy_of_attention(std::vector<double>{7, 0, 0, 0}) == 0.0);
    // counts (2,2,4): 1.5 ln2 / ln3
    double expected = 1.5 * std::log(2.0) / std::log(3.0);
    CHECK_THAT(entropy_of_attention(std::vector<double>{2, 2, 4}),
               Catch::Matchers::WithinAbs(expected, 1e-6));
    CHECK_THAT(entropy_of_attention(std::vector<double>{2, 2, 4}),
               Catch::Matchers::WithinAbs(0.9463946303571860, 1e-9));
    CHECK_THROWS(entropy_of_attention(std::vector<double>{0.0, 0.0}));
    CHECK_THROWS(entropy_of_attention(std::vector<double>{1.0, -2.0}));
}

TEST_CASE("entropy_of_attention is invariant to permutation and scaling") {
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> u(0.0, 10.0);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> counts(8);
        for (auto& c : counts) c = rng() % 4 == 0 ? 0.0 : u(rng);
        counts[0] = 1.0 + u(rng); // keep at least two active
        counts[1] = 1.0 + u(rng);
        double base = entropy_of_attention(counts);
        auto shuffled = counts;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK_THAT(entropy_of_attention(shuffled),
                   Catch::Matchers::WithinAbs(base, 1e-12));
        auto scaled = counts;
        for (auto& c : scaled) c *= 3.7;
        CHECK_THAT(entropy_of_attention(scaled),
                   Catch::Matchers::WithinAbs(base, 1e-12));
    }
}

TEST_CASE("venue_content_vector counts and normalizes") {
    NodeRegistry reg(Kind::content, {"A", "B", "C"});
    std::vector<CorpusRecord> one{rec("p1", 2000, {"A", "B"}, "V")};
    auto v = venue_content_vector("V", one, reg, 2005);
    CHECK_THAT(v.weights.at(0), Catch::Matchers::WithinAbs(0.5, 1e-15));
    CHECK_THAT(v.weights.at(1), Catch::Matchers::WithinAbs(0.5, 1e-15));

    std::vector<CorpusRecord> twice{rec("p1", 2000, {"A"}, "V"),
                                    rec("p2", 2001, {"A"}, "V")};
    auto v2 = venue_content_vector("V", twice, reg, 2005);
    CHECK_THAT(v2.weights.at(0), Catch::Matchers::WithinAbs(1.0, 1e-15));

    std::vector<CorpusRecord> mixed{rec("p1", 2000, {"A", "B"}, "V"),
                                    rec("p2", 2001, {"B", "C"}, "V")};
    auto v3 = venue_content_vector("V", mixed, reg, 2005);
    CHECK_THAT(v3.weights.at(0), Catch::Matchers::WithinAbs(0.25, 1e-15));
    CHECK_THAT(v3.weights.at(1), Catch::Matchers::WithinAbs(0.5, 1e-15));
    CHECK_THAT(v3.weights.at(2), Catch::Matchers::WithinAbs(0.25, 1e-15));

    // temporal cut excludes later records
    auto v4 = venue_content_vector("V", mixed, reg, 2000);
    CHECK(v4.weights.count(2) == 0);

    CHECK_THROWS(venue_content_vector("missing", mixed, reg, 2005));
}

TEST_CASE("conditional_cosine restricts to the focus nodes") {
    VenueContentVector a{"X", {{0, 0.2}, {1, 0.1}, {2, 0.9}}, false};
    VenueContentVector b{"Y", {{0, 0.1}, {1, 0.2}, {3, 0.9}}, false};
    std::vector<NodeId> focus{0, 1};
    auto r = conditional_cosine(a, b, focus);
    CHECK_FALSE(r.degenerate);
    CHECK_THAT(r.value, Catch::Matchers::WithinAbs(0.8, 1e-9));

    // identical restrictions
    auto same = conditional_cosine(a, a, focus);
    CHECK_THAT(same.value, Catch::Matchers::WithinAbs(1.0, 1e-12));

    // disjoint support within focus
    VenueContentVector c{"Z", {{0, 0.5}}, false};
    VenueContentVector d{"W", {{1, 0.5}}, false};
    auto zero = conditional_cosine(c, d, focus);
    CHECK(zero.value == 0.0);
    CHECK_FALSE(zero.degenerate);

    // zero restriction flags degenerate
    VenueContentVector e{"U", {{5, 1.0}}, false};
    auto deg = conditional_cosine(e, a, focus);
    CHECK(deg.value == 0.0);
    CHECK(deg.degenerate);
    CHECK_THROWS(conditional_cosine(a, b, std::vector<NodeId>{}));
}

TEST_CASE("conditional_cosine is symmetric and scale invariant") {
    std::mt19937_64 rng(16);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        VenueContentVector a{"A", {}, false}, b{"B", {}, false};
        for (NodeId c = 0; c < 6; ++c) {
            if (rng() % 3) a.weights[c] = u(rng);
            if (rng() % 3) b.weights[c] = u(rng);
        }
        std::vector<NodeId> focus{0, 1, 2, 3};
        auto ab = conditional_cosine(a, b, focus);
        auto ba = conditional_cosine(b, a, focus);
        CHECK(ab.value == ba.value);
        auto scaled = a;
        for (auto& [k, v] : scaled.weights) v *= 4.2;
        auto s = conditional_cosine(scaled, b, focus);
        CHECK_THAT(s.value, Catch::Matchers::WithinAbs(ab.value, 1e-12));
    }
}

TEST_CASE("citation_similarity_ratio: uniform citations give flat ratios") {
    // two blocks of venues with distinct content profiles
    std::vector<CorpusRecord> records;
    std::mt19937_64 seed_rng(17);
    int id = 0;
    for (int k = 0; k < 1500; ++k) {
        int venue = static_cast<int>(seed_rng() % 4);
        std::string vname = "V" + std::to_string(venue);
        std::string code = venue < 2 ? "A" : "B";
        std::string other = "C" + std::to_string(seed_rng() % 3);
        // cite two venues uniformly at random: matches the null baseline
        std::vector<std::string> cited{
            "V" + std::to_string(seed_rng() % 4),
            "V" + std::to_string(seed_rng() % 4)};
        std::sort(cited.begin(), cited.end());
        cited.erase(std::unique(cited.begin(), cited.end()), cited.end());
        records.push_back(
            rec("p" + std::to_string(id++), 2000, {code, other}, vname, {}, cited));
    }
    auto g = build_hypergraph(records, Kind::content, 2000, 2000);
    auto vectors = build_venue_vectors(records, g.registry, 2000);
    Rng rng = make_rng(23);
    auto curve = citation_similarity_ratio(records, vectors, g.registry, 10, rng);
    CHECK(curve.pairs > 0);
    for (std::size_t b = 0; b < curve.ratio.size(); ++b) {
        if (!curve.defined[b]) continue;
        if (curve.observed[b] + curve.simulated[b] < 50) continue;
        double o = static_cast<double>(curve.observed[b]);
        double s = static_cast<double>(curve.simulated[b]);
        double sigma = curve.ratio[b] * std::sqrt(1.0 / o + 1.0 / s);
        CHECK(std::abs(curve.ratio[b] - 1.0) <= 3.0 * sigma + 1e-9);
    }
}

TEST_CASE("citation_similarity_ratio: self-citation mass sits in the top bin") {
    std::vector<CorpusRecord> records{
        rec("p1", 2000, {"A", "B"}, "V0", {}, {"V0"})};
    auto g = build_hypergraph(records, Kind::content, 2000, 2000);
    auto vectors = build_venue_vectors(records, g.registry, 2000);
    Rng rng = make_rng(29);
    auto curve = citation_similarity_ratio(records, vectors, g.registry, 20, rng);
    CHECK(curve.observed.back() == 1); // cosine(self, self | own content) = 1
    CHECK(curve.pairs == 1);
}

TEST_CASE("career_novelty over prior venues") {
    // venues: contexts with one-hot or mixed memberships
    auto p = make_params({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}},
                         {1.0, 1.0, 1.0, 1.0});
    NodeRegistry reg(Kind::context, {"v0", "v1", "v2", "v3"});

    auto single = history("a", {{1995, "v0"}});
    CHECK(career_novelty(single, p, reg, 2000) == 0.0);

    auto same_dim = history("b", {{1995, "v0"}, {1996, "v1"}});
    CHECK(career_novelty(same_dim, p, reg, 2000) == 0.0);

    auto orthogonal = history("c", {{1995, "v0"}, {1996, "v2"}});
    CHECK(career_novelty(orthogonal, p, reg, 2000) == kInf);

    // no look-ahead: entries at or after the focal year are invisible
    auto future = history("d", {{2000, "v0"}, {2001, "v2"}});
    CHECK_THROWS(career_novelty(future, p, reg, 2000));

    // repeat venues count once (distinct set)
    auto repeat = history("e", {{1995, "v3"}, {1996, "v3"}});
    CHECK(career_novelty(repeat, p, reg, 2000) == 0.0);
}

TEST_CASE("team_novelty unions member histories") {
    auto p = make_params({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, {1.0, 1.0, 1.0});
    NodeRegistry reg(Kind::context, {"v0", "v1", "v2"});
    auto m1 = history("a", {{1995, "v0"}});
    auto m2 = history("b", {{1996, "v2"}});

    // single-member team equals that member's career novelty, exactly
    std::vector<AuthorHistory> solo{m1};
    CHECK(team_novelty(solo, p, reg, 2000) ==
          career_novelty(m1, p, reg, 2000));

    // identical venue sets: idempotent union
    std::vector<AuthorHistory> duo_same{m1, m1};
    CHECK(team_novelty(duo_same, p, reg, 2000) ==
          career_novelty(m1, p, reg, 2000));

    // orthogonal union
    std::vector<AuthorHistory> duo{m1, m2};
    CHECK(team_novelty(duo, p, reg, 2000) == kInf);

    std::vector<AuthorHistory> empty{history("c", {{2005, "v0"}})};
    CHECK_THROWS(team_novelty(empty, p, reg, 2000));
}

TEST_CASE("team_novelty: adding a subset member changes nothing") {
    std::mt19937_64 rng(18);
    auto p = make_params({{0.6, 0.4}, {0.3, 0.7}, {0.5, 0.5}, {0.9, 0.1}},
                         {1.0, 1.0, 1.0, 1.0});
    NodeRegistry reg(Kind::context, {"v0", "v1", "v2", "v3"});
    std::vector<std::string> venues{"v0", "v1", "v2", "v3"};
    for (int t = 0; t < 1000; ++t) {
        std::vector<std::pair<int, std::string>> e1, e2;
        std::vector<std::string> pool;
        for (const auto& v : venues)
            if (rng() % 2) pool.push_back(v);
        if (pool.empty()) pool.push_back("v0");
        for (const auto& v : pool) e1.emplace_back(1995, v);
        // subset of the pool
        for (const auto& v : pool)
            if (rng() % 2) e2.emplace_back(1996, v);
        auto m1 = history("a", e1);
        auto m2 = history("b", e2);
        std::vector<AuthorHistory> base{m1};
        std::vector<AuthorHistory> extended{m1, m2};
        CHECK(team_novelty(extended, p, reg, 2000) ==
              team_novelty(base, p, reg, 2000));
    }
}

TEST_CASE("expedition_novelty distances and invariance") {
    auto p = make_params({{1.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}},
                         {1.0, 1.0, 1.0});
    NodeRegistry reg(Kind::context, {"v0", "v1", "vmix"});

    // publishing in the only venue of a one-hot background: distance 0
    auto loyal = history("a", {{1995, "v0"}});
    std::vector<AuthorHistory> team1{loyal};
    CHECK(expedition_novelty(team1, "v0", p, reg, 2000) == 0.0);

    // orthogonal background
    std::vector<AuthorHistory> team2{loyal};
    CHECK(expedition_novelty(team2, "v1", p, reg, 2000) == kInf);

    // background (0.5, 0.5) against venue (0.5, 0.5): -ln 0.5
    auto mixed = history("b", {{1995, "v0"}, {1996, "v1"}});
    std::vector<AuthorHistory> team3{mixed};
    CHECK_THAT(expedition_novelty(team3, "vmix", p, reg, 2000),
               Catch::Matchers::WithinAbs(0.6931471805599453, 1e-12));

    // exact permutation invariance
    auto other = history("c", {{1995, "vmix"}});
    std::vector<AuthorHistory> fwd{loyal, mixed, other};
    std::vector<AuthorHistory> rev{other, loyal, mixed};
    CHECK(expedition_novelty(fwd, "vmix", p, reg, 2000) ==
          expedition_novelty(rev, "vmix", p, reg, 2000));

    std::vector<AuthorHistory> no_history{history("d", {{2005, "v0"}})};
    CHECK_THROWS(expedition_novelty(no_history, "v0", p, reg, 2000));
}

TEST_CASE("sample_skewness closed-form checks") {
    CHECK(sample_skewness(std::vector<double>{-1.0, 0.0, 1.0}) == 0.0);
    CHECK_THAT(sample_skewness(std::vector<double>{0.0, 0.0, 0.0, 1.0}),
               Catch::Matchers::WithinAbs(2.0, 1e-9));
    // mirroring negates exactly
    std::vector<double> v{0.3, 1.7, 2.2, -0.4, 5.0};
    std::vector<double> neg;
    for (double x : v) neg.push_back(-x);
    CHECK(sample_skewness(neg) == -sample_skewness(v));
    // infinities are excluded and counted
    std::vector<double> with_inf{0.0, 1.0, 2.0, 5.0, kInf, kInf};
    long long excluded = 0;
    double s = sample_skewness(with_inf, &excluded);
    CHECK(excluded == 2);
    CHECK(s == sample_skewness(std::vector<double>{0.0, 1.0, 2.0, 5.0}));
    CHECK_THROWS(sample_skewness(std::vector<double>{1.0, 1.0, 1.0}));
    CHECK_THROWS(sample_skewness(std::vector<double>{1.0, kInf}));
}

TEST_CASE("the novelty family never goes negative") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(0.05, 1.0);
    std::vector<std::string> venue_names{"v0", "v1", "v2", "v3", "v4"};
    NodeRegistry reg(Kind::context, venue_names);
    for (int t = 0; t < 200; ++t) {
        std::vector<std::vector<double>> theta;
        for (int i = 0; i < 5; ++i) {
            std::vector<double> row(3);
            double sum = 0.0;
            for (auto& v : row) {
                v = u(rng);
                sum += v;
            }
            for (auto& v : row) v /= sum;
            theta.push_back(row);
        }
        auto p = make_params(theta, {1.0, 1.0, 1.0, 1.0, 1.0});
        std::vector<AuthorHistory> team;
        for (int m = 0; m < 1 + static_cast<int>(rng() % 3); ++m) {
            std::vector<std::pair<int, std::string>> entries;
            for (int e = 0; e < 1 + static_cast<int>(rng() % 3); ++e)
                entries.emplace_back(1990,
                                     venue_names[rng() % venue_names.size()]);
            team.push_back(history("m" + std::to_string(m), entries));
        }
        CHECK(career_novelty(team[0], p, reg, 2000) >= 0.0);
        CHECK(team_novelty(team, p, reg, 2000) >= 0.0);
        CHECK(expedition_novelty(team, venue_names[rng() % venue_names.size()],
                                 p, reg, 2000) >= 0.0);
    }
}

TEST_CASE("build_author_histories is ordered and complete") {
    std::vector<CorpusRecord> records{
        rec("p2", 2001, {"A"}, "V1", {"alice", "bob"}),
        rec("p1", 2000, {"A"}, "V0", {"alice"})};
    auto histories = build_author_histories(records);
    REQUIRE(histories.count("alice") == 1);
    CHECK(histories.at("alice").entries.size() == 2);
    CHECK(histories.at("alice").entries[0].year == 2000);
    CHECK(histories.at("alice").venues_before(2001) ==
          std::vector<std::string>{"V0"});
    CHECK(histories.at("bob").venues_before(2001).empty());
}
