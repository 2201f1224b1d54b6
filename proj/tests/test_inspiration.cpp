#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "gywi/authorgraph.hpp"
#include "gywi/corpus.hpp"
#include "gywi/inspiration.hpp"
#include "gywi/util.hpp"

using namespace gywi;
using authorgraph::BipartiteGraph;
using corpus::AuthorId;
using corpus::PaperRecord;

namespace {

AuthorId aid(const std::string& s) { return AuthorId{s}; }

PaperRecord paper(const std::string& id, std::vector<std::string> authors) {
    PaperRecord rec;
    rec.id = id;
    rec.title = "Title " + id;
    rec.abstract_text = "Abstract " + id;
    rec.authors = std::move(authors);
    rec.year = 2020;
    return rec;
}

struct Fixture {
    corpus::Corpus corpus;
    BipartiteGraph graph;
    PaperRecord target;
};

// Random corpus over `n_authors` authors; every author is core so the
// bipartite graph covers the full corpus.
Fixture random_fixture(SeededRng& rng, std::size_t n_authors, std::size_t n_papers) {
    Fixture f;
    std::set<AuthorId> core;
    for (std::size_t p = 0; p < n_papers; ++p) {
        std::vector<std::string> authors;
        const std::size_t count = 1 + rng.below(3);
        std::set<std::size_t> chosen;
        while (chosen.size() < count) chosen.insert(rng.below(n_authors));
        for (std::size_t a : chosen) authors.push_back("author" + std::to_string(a));
        f.corpus.add(paper("p" + std::to_string(p), authors));
    }
    for (const auto& id : f.corpus.ids())
        for (const auto& a : f.corpus.get(id).normalized_authors()) core.insert(a);
    f.graph = authorgraph::build_bipartite(f.corpus, core);
    f.target = f.corpus.get(f.corpus.ids()[rng.below(n_papers)]);
    return f;
}

// Independent BFS oracle over the raw paper -> author sets.
std::set<AuthorId> bfs_oracle(const Fixture& f, int n_hops) {
    std::set<AuthorId> visited;
    for (const auto& a : f.target.normalized_authors()) visited.insert(a);
    for (int hop = 0; hop < n_hops; ++hop) {
        std::set<AuthorId> next = visited;
        for (const auto& id : f.corpus.ids()) {
            if (!f.graph.has_paper(id)) continue;
            const auto authors = f.graph.paper_authors.at(id);
            const bool touches = std::any_of(authors.begin(), authors.end(),
                                             [&](const AuthorId& a) { return visited.count(a); });
            if (touches) next.insert(authors.begin(), authors.end());
        }
        if (next == visited) break;
        visited = next;
    }
    return visited;
}

}  // namespace

TEST_CASE("adjacent_authors equals the BFS oracle on 100 random graphs") {
    SeededRng rng(314);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n_authors = 3 + rng.below(28);  // up to 30
        const std::size_t n_papers = 2 + rng.below(12);
        auto f = random_fixture(rng, n_authors, n_papers);
        const int n_hops = 1 + static_cast<int>(rng.below(3));
        CHECK(inspiration::adjacent_authors(f.graph, f.target, n_hops) == bfs_oracle(f, n_hops));
    }
}

TEST_CASE("adjacent_papers excludes the target and is sorted") {
    SeededRng rng(271);
    auto f = random_fixture(rng, 8, 10);
    const auto papers = inspiration::adjacent_papers(f.graph, f.target, 2);
    CHECK(std::is_sorted(papers.begin(), papers.end()));
    CHECK(std::find(papers.begin(), papers.end(), f.target.id) == papers.end());
}

TEST_CASE("sampled sets are disjoint and target-free across 1000 seeded draws") {
    SeededRng rng(999);
    auto f = random_fixture(rng, 10, 16);
    for (int draw = 0; draw < 1000; ++draw) {
        inspiration::SamplingParams params;
        params.n_hops = 1;
        params.k_adjacent = 3;
        params.k_random = 3;
        params.seed = static_cast<std::uint64_t>(draw);
        const auto set = inspiration::sample_inspiration(f.graph, f.target, params);

        std::set<std::string> seen;
        const auto adjacent_pool = inspiration::adjacent_papers(f.graph, f.target, params.n_hops);
        const std::set<std::string> adjacent_set(adjacent_pool.begin(), adjacent_pool.end());
        for (const auto& e : set.entries) {
            CHECK(e.paper_id != f.target.id);
            CHECK(seen.insert(e.paper_id).second);  // no duplicates anywhere
            if (e.tag == inspiration::Provenance::Adjacent)
                CHECK(adjacent_set.count(e.paper_id) == 1);
            else
                CHECK(adjacent_set.count(e.paper_id) == 0);
        }
    }
}

TEST_CASE("random sampling is uniform: chi-square over 10000 draws, 4 candidates") {
    // Target plus its one adjacent paper are fixed; four papers by unrelated
    // authors form the random pool.
    corpus::Corpus c;
    c.add(paper("t", {"A", "B"}));
    c.add(paper("adj", {"B"}));
    c.add(paper("r1", {"C"}));
    c.add(paper("r2", {"D"}));
    c.add(paper("r3", {"E"}));
    c.add(paper("r4", {"F"}));
    std::set<AuthorId> core;
    for (const auto& id : c.ids())
        for (const auto& a : c.get(id).normalized_authors()) core.insert(a);
    const auto graph = authorgraph::build_bipartite(c, core);
    const auto target = c.get("t");

    std::map<std::string, int> counts;
    for (int draw = 0; draw < 10000; ++draw) {
        inspiration::SamplingParams params;
        params.k_adjacent = 0;
        params.k_random = 1;
        params.seed = static_cast<std::uint64_t>(draw);
        const auto picks = inspiration::sample_random(graph, target, {}, params);
        REQUIRE(picks.size() == 1);
        ++counts[picks[0]];
    }
    REQUIRE(counts.size() == 4);
    double chi2 = 0.0;
    for (const auto& [id, n] : counts) {
        const double expected = 2500.0;
        chi2 += (n - expected) * (n - expected) / expected;
    }
    CHECK(chi2 < 7.815);  // chi-square 95% critical value, 3 degrees of freedom
}

TEST_CASE("pool shortfalls produce warnings, not errors") {
    SeededRng rng(5);
    auto f = random_fixture(rng, 4, 4);
    inspiration::SamplingParams params;
    params.k_adjacent = 50;
    params.k_random = 50;
    params.seed = 1;
    const auto set = inspiration::sample_inspiration(f.graph, f.target, params);
    CHECK(!set.warnings.empty());
    CHECK(set.entries.size() < 100);
}

TEST_CASE("same seed reproduces the same inspiration set") {
    SeededRng rng(8);
    auto f = random_fixture(rng, 12, 20);
    inspiration::SamplingParams params;
    params.k_adjacent = 4;
    params.k_random = 2;
    params.seed = 123;
    const auto s1 = inspiration::sample_inspiration(f.graph, f.target, params);
    const auto s2 = inspiration::sample_inspiration(f.graph, f.target, params);
    REQUIRE(s1.entries.size() == s2.entries.size());
    for (std::size_t i = 0; i < s1.entries.size(); ++i) {
        CHECK(s1.entries[i].paper_id == s2.entries[i].paper_id);
        CHECK(s1.entries[i].tag == s2.entries[i].tag);
    }
}

TEST_CASE("invalid sampling parameters are rejected") {
    inspiration::SamplingParams params;
    params.n_hops = 0;
    CHECK_THROWS_AS(params.validate(), std::invalid_argument);
    params.n_hops = 1;
    params.k_adjacent = -1;
    CHECK_THROWS_AS(params.validate(), std::invalid_argument);
}

TEST_CASE("export writes one record per entry with parameters echoed") {
    SeededRng rng(21);
    auto f = random_fixture(rng, 10, 14);
    inspiration::SamplingParams params;
    params.k_adjacent = 3;
    params.k_random = 2;
    params.seed = 17;
    const auto set = inspiration::sample_inspiration(f.graph, f.target, params);
    const std::string path = "/tmp/gywi_test_inspiration.jsonl";
    inspiration::export_inspiration(set, f.target, params, path);
    std::ifstream in(path);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++lines;
        CHECK(line.find("\"seed\":17") != std::string::npos);
        CHECK(line.find(f.target.id) != std::string::npos);
    }
    CHECK(lines == set.entries.size());
    std::remove(path.c_str());
}
