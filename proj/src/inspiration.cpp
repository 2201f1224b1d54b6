#include "gywi/inspiration.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>

#include "gywi/util.hpp"

namespace gywi::inspiration {

using nlohmann::json;

void SamplingParams::validate() const {
    if (n_hops < 1) throw std::invalid_argument("sampling: n_hops must be >= 1");
    if (k_adjacent < 0 || k_random < 0)
        throw std::invalid_argument("sampling: k_adjacent and k_random must be >= 0");
}

std::string provenance_name(Provenance p) {
    return p == Provenance::Adjacent ? "adjacent" : "random";
}

std::vector<std::string> InspirationSet::ids_with_tag(Provenance tag) const {
    std::vector<std::string> out;
    for (const auto& e : entries)
        if (e.tag == tag) out.push_back(e.paper_id);
    return out;
}

std::set<AuthorId> adjacent_authors(const BipartiteGraph& graph, const PaperRecord& target,
                                    int n_hops) {
    if (n_hops < 1) throw std::invalid_argument("adjacent_authors: n_hops must be >= 1");
    auto hop0 = target.normalized_authors();
    if (hop0.empty()) throw std::invalid_argument("adjacent_authors: target has no authors");

    std::set<AuthorId> visited(hop0.begin(), hop0.end());
    std::set<AuthorId> frontier = visited;
    for (int hop = 0; hop < n_hops && !frontier.empty(); ++hop) {
        std::set<AuthorId> next;
        for (const auto& a : frontier) {
            auto it = graph.author_papers.find(a);
            if (it == graph.author_papers.end()) continue;
            for (const auto& paper : it->second)
                for (const auto& co : graph.paper_authors.at(paper))
                    if (!visited.count(co)) next.insert(co);
        }
        visited.insert(next.begin(), next.end());
        frontier = std::move(next);
    }
    return visited;
}

std::vector<std::string> adjacent_papers(const BipartiteGraph& graph, const PaperRecord& target,
                                         int n_hops) {
    std::set<std::string> pool;
    for (const auto& a : adjacent_authors(graph, target, n_hops)) {
        auto it = graph.author_papers.find(a);
        if (it == graph.author_papers.end()) continue;
        pool.insert(it->second.begin(), it->second.end());
    }
    pool.erase(target.id);
    return {pool.begin(), pool.end()};
}

namespace {

std::vector<std::string> draw(const std::vector<std::string>& pool, std::size_t k,
                              std::uint64_t seed, const char* label,
                              std::vector<std::string>* warnings) {
    if (k > pool.size() && warnings)
        warnings->push_back(std::string(label) + " pool shortfall: requested " + std::to_string(k) +
                            ", available " + std::to_string(pool.size()));
    SeededRng rng(seed);
    std::vector<std::string> out;
    for (std::size_t idx : rng.sample_without_replacement(pool.size(), k)) out.push_back(pool[idx]);
    return out;
}

}  // namespace

std::vector<std::string> sample_adjacent(const BipartiteGraph& graph, const PaperRecord& target,
                                         const SamplingParams& params,
                                         std::vector<std::string>* warnings) {
    params.validate();
    if (params.k_adjacent == 0) return {};
    const auto pool = adjacent_papers(graph, target, params.n_hops);
    return draw(pool, static_cast<std::size_t>(params.k_adjacent),
                stage_seed(params.seed, "sample-adjacent"), "adjacent", warnings);
}

std::vector<std::string> sample_random(const BipartiteGraph& graph, const PaperRecord& target,
                                       const std::set<std::string>& exclude,
                                       const SamplingParams& params,
                                       std::vector<std::string>* warnings) {
    params.validate();
    if (params.k_random == 0) return {};
    std::set<std::string> adj;
    for (const auto& p : adjacent_papers(graph, target, params.n_hops)) adj.insert(p);
    std::vector<std::string> pool;
    for (const auto& [paper, authors] : graph.paper_authors) {
        if (paper == target.id || adj.count(paper) || exclude.count(paper)) continue;
        pool.push_back(paper);
    }
    return draw(pool, static_cast<std::size_t>(params.k_random),
                stage_seed(params.seed, "sample-random"), "random", warnings);
}

InspirationSet sample_inspiration(const BipartiteGraph& graph, const PaperRecord& target,
                                  const SamplingParams& params) {
    params.validate();
    InspirationSet set;
    std::set<std::string> seen;
    for (const auto& id : sample_adjacent(graph, target, params, &set.warnings)) {
        set.entries.push_back({id, Provenance::Adjacent});
        seen.insert(id);
    }
    for (const auto& id : sample_random(graph, target, seen, params, &set.warnings))
        set.entries.push_back({id, Provenance::Random});
    return set;
}

void export_inspiration(const InspirationSet& set, const PaperRecord& target,
                        const SamplingParams& params, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write inspiration file: " + path);
    for (const auto& e : set.entries) {
        out << json{{"paper_id", e.paper_id},
                    {"provenance", provenance_name(e.tag)},
                    {"target_id", target.id},
                    {"seed", params.seed},
                    {"n_hops", params.n_hops},
                    {"k_adj", params.k_adjacent},
                    {"k_rand", params.k_random}}
                   .dump()
            << '\n';
    }
}

}  // namespace gywi::inspiration
