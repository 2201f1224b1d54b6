#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gywi/corpus.hpp"

namespace gywi::authorgraph {

using corpus::AuthorId;
using corpus::Corpus;

struct GraphError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Undirected weighted co-author graph. Edge weight = number of jointly
/// authored papers. No self-loops; adjacency kept symmetric.
class CoAuthorGraph {
public:
    CoAuthorGraph() = default;
    /// Nodes are indexed in sorted AuthorId order, fixed at construction.
    explicit CoAuthorGraph(const std::set<AuthorId>& nodes);

    void add_edge_weight(const AuthorId& a, const AuthorId& b, double w);

    std::size_t node_count() const { return nodes_.size(); }
    const std::vector<AuthorId>& nodes() const { return nodes_; }
    bool has_node(const AuthorId& a) const { return index_.count(a) != 0; }
    int index_of(const AuthorId& a) const;

    /// Sorted neighbor map of node i: neighbor index -> weight.
    const std::map<int, double>& neighbors(int i) const { return adj_[static_cast<std::size_t>(i)]; }

    /// Sum of edge weights, each undirected edge counted once.
    double total_weight() const;

private:
    std::vector<AuthorId> nodes_;            // sorted
    std::map<AuthorId, int> index_;
    std::vector<std::map<int, double>> adj_;
};

struct CommunityPartition {
    std::map<AuthorId, int> assignment;  // community indices contiguous from 0
    double modularity = 0.0;

    int community_count() const;
};

/// Bipartite author-paper graph over the core author set and their papers.
struct BipartiteGraph {
    std::map<AuthorId, std::vector<std::string>> author_papers;
    std::map<std::string, std::vector<AuthorId>> paper_authors;

    bool has_paper(const std::string& id) const { return paper_authors.count(id) != 0; }
    std::size_t author_count() const { return author_papers.size(); }
    std::size_t paper_count() const { return paper_authors.size(); }
};

/// Co-author graph over all authors of papers containing at least one seed
/// author; errors if no paper matches any seed.
CoAuthorGraph build_coauthor_graph(const Corpus& corpus, const std::set<AuthorId>& seeds);

/// Weighted Newman modularity of a full-cover partition; 0 on edgeless graphs.
double modularity(const CoAuthorGraph& graph, const std::map<AuthorId, int>& assignment);

/// Louvain local-move + aggregation. Deterministic given the seed: level-0
/// nodes are visited in sorted AuthorId order, modularity-gain ties break to
/// the smallest community index, and the seed only shuffles the visit order
/// of aggregated levels.
CommunityPartition louvain(const CoAuthorGraph& graph, std::uint64_t seed);

/// Union of all communities containing at least one seed author (the core
/// author set); errors if no seed is present in the partition.
std::set<AuthorId> merge_seed_communities(const CommunityPartition& partition,
                                          const std::set<AuthorId>& seeds);

/// Bipartite graph over core authors and every corpus paper with at least one
/// core author; errors if that paper set is empty.
BipartiteGraph build_bipartite(const Corpus& corpus, const std::set<AuthorId>& core);

/// Node/edge list export (JSON lines) for visualization.
void export_bipartite(const BipartiteGraph& graph, const std::string& path);
void export_coauthor(const CoAuthorGraph& graph, const std::string& path);

}  // namespace gywi::authorgraph
