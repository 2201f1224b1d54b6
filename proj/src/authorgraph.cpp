#include "gywi/authorgraph.hpp"

#include <algorithm>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>

#include "gywi/util.hpp"

namespace gywi::authorgraph {

using nlohmann::json;

CoAuthorGraph::CoAuthorGraph(const std::set<AuthorId>& nodes) {
    nodes_.assign(nodes.begin(), nodes.end());
    for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) index_[nodes_[static_cast<std::size_t>(i)]] = i;
    adj_.resize(nodes_.size());
}

int CoAuthorGraph::index_of(const AuthorId& a) const {
    auto it = index_.find(a);
    if (it == index_.end()) throw GraphError("author not in graph: " + a.canonical);
    return it->second;
}

void CoAuthorGraph::add_edge_weight(const AuthorId& a, const AuthorId& b, double w) {
    if (a == b) throw GraphError("self-loop rejected for author: " + a.canonical);
    int i = index_of(a);
    int j = index_of(b);
    adj_[static_cast<std::size_t>(i)][j] += w;
    adj_[static_cast<std::size_t>(j)][i] += w;
}

double CoAuthorGraph::total_weight() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < adj_.size(); ++i)
        for (const auto& [j, w] : adj_[i])
            if (static_cast<int>(i) < j) sum += w;
    return sum;
}

int CommunityPartition::community_count() const {
    int max_idx = -1;
    for (const auto& [a, c] : assignment) max_idx = std::max(max_idx, c);
    return max_idx + 1;
}

CoAuthorGraph build_coauthor_graph(const Corpus& corpus, const std::set<AuthorId>& seeds) {
    if (seeds.empty()) throw GraphError("seed author set is empty");

    std::vector<std::vector<AuthorId>> seed_papers;
    std::set<AuthorId> all_authors;
    for (const auto& id : corpus.ids()) {
        auto authors = corpus.get(id).normalized_authors();
        std::sort(authors.begin(), authors.end());
        authors.erase(std::unique(authors.begin(), authors.end()), authors.end());
        bool has_seed = std::any_of(authors.begin(), authors.end(),
                                    [&](const AuthorId& a) { return seeds.count(a) != 0; });
        if (!has_seed) continue;
        all_authors.insert(authors.begin(), authors.end());
        seed_papers.push_back(std::move(authors));
    }
    if (seed_papers.empty()) throw GraphError("no corpus paper contains any seed author");

    CoAuthorGraph graph(all_authors);
    for (const auto& authors : seed_papers)
        for (std::size_t i = 0; i < authors.size(); ++i)
            for (std::size_t j = i + 1; j < authors.size(); ++j)
                graph.add_edge_weight(authors[i], authors[j], 1.0);
    return graph;
}

double modularity(const CoAuthorGraph& graph, const std::map<AuthorId, int>& assignment) {
    const std::size_t n = graph.node_count();
    std::vector<int> comm(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto it = assignment.find(graph.nodes()[i]);
        if (it == assignment.end())
            throw GraphError("partition missing node: " + graph.nodes()[i].canonical);
        comm[i] = it->second;
    }

    const double m = graph.total_weight();
    if (m <= 0.0) return 0.0;
    const double two_m = 2.0 * m;

    std::map<int, double> in_c, tot_c;
    for (std::size_t i = 0; i < n; ++i) {
        double k_i = 0.0;
        for (const auto& [j, w] : graph.neighbors(static_cast<int>(i))) {
            k_i += w;
            if (comm[static_cast<std::size_t>(j)] == comm[i]) in_c[comm[i]] += w;
        }
        tot_c[comm[i]] += k_i;
    }

    double q = 0.0;
    for (const auto& [c, tot] : tot_c) {
        const double in = in_c.count(c) ? in_c[c] : 0.0;
        q += in / two_m - (tot / two_m) * (tot / two_m);
    }
    return q;
}

namespace {

// Working representation for one aggregation level. Adjacency is stored in
// both directions; self_weight holds the full diagonal A_ii (twice the
// internal edge weight of an aggregated community).
struct LevelGraph {
    int n = 0;
    std::vector<std::vector<std::pair<int, double>>> adj;
    std::vector<double> self_weight;

    double degree(int i) const {
        double k = self_weight[static_cast<std::size_t>(i)];
        for (const auto& [j, w] : adj[static_cast<std::size_t>(i)]) k += w;
        return k;
    }
};

// One round of local moves over the whole level; returns true if any node moved.
bool local_move_pass(const LevelGraph& g, const std::vector<int>& order, double two_m,
                     std::vector<int>& node_comm, std::vector<double>& comm_tot,
                     const std::vector<double>& k) {
    bool moved = false;
    for (int i : order) {
        const int old_comm = node_comm[static_cast<std::size_t>(i)];
        std::map<int, double> links;  // community -> weight from i (ordered: smallest index first)
        links[old_comm] += 0.0;
        for (const auto& [j, w] : g.adj[static_cast<std::size_t>(i)])
            links[node_comm[static_cast<std::size_t>(j)]] += w;

        comm_tot[static_cast<std::size_t>(old_comm)] -= k[static_cast<std::size_t>(i)];

        int best_comm = old_comm;
        double best_gain = links[old_comm] -
                           comm_tot[static_cast<std::size_t>(old_comm)] * k[static_cast<std::size_t>(i)] / two_m;
        for (const auto& [c, w_ic] : links) {
            const double gain = w_ic - comm_tot[static_cast<std::size_t>(c)] * k[static_cast<std::size_t>(i)] / two_m;
            if (gain > best_gain + 1e-12) {  // strict improvement; map order breaks ties low
                best_gain = gain;
                best_comm = c;
            }
        }

        comm_tot[static_cast<std::size_t>(best_comm)] += k[static_cast<std::size_t>(i)];
        if (best_comm != old_comm) {
            node_comm[static_cast<std::size_t>(i)] = best_comm;
            moved = true;
        }
    }
    return moved;
}

// Renumbers communities contiguously (ascending old index) and returns the
// node -> new community map plus the community count.
int renumber(std::vector<int>& node_comm) {
    std::map<int, int> remap;
    for (int c : node_comm)
        if (!remap.count(c)) remap[c] = 0;
    int next = 0;
    for (auto& [old_c, new_c] : remap) new_c = next++;
    for (int& c : node_comm) c = remap[c];
    return next;
}

LevelGraph aggregate(const LevelGraph& g, const std::vector<int>& node_comm, int n_comm) {
    LevelGraph out;
    out.n = n_comm;
    out.self_weight.assign(static_cast<std::size_t>(n_comm), 0.0);
    std::map<std::pair<int, int>, double> edges;
    for (int i = 0; i < g.n; ++i) {
        const int ci = node_comm[static_cast<std::size_t>(i)];
        out.self_weight[static_cast<std::size_t>(ci)] += g.self_weight[static_cast<std::size_t>(i)];
        for (const auto& [j, w] : g.adj[static_cast<std::size_t>(i)]) {
            const int cj = node_comm[static_cast<std::size_t>(j)];
            if (ci == cj)
                out.self_weight[static_cast<std::size_t>(ci)] += w;
            else
                edges[{ci, cj}] += w;
        }
    }
    out.adj.resize(static_cast<std::size_t>(n_comm));
    for (const auto& [key, w] : edges)
        out.adj[static_cast<std::size_t>(key.first)].push_back({key.second, w});
    return out;
}

}  // namespace

CommunityPartition louvain(const CoAuthorGraph& graph, std::uint64_t seed) {
    const std::size_t n = graph.node_count();
    if (n == 0) throw GraphError("louvain on empty graph");

    LevelGraph level;
    level.n = static_cast<int>(n);
    level.adj.resize(n);
    level.self_weight.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& [j, w] : graph.neighbors(static_cast<int>(i)))
            level.adj[i].push_back({j, w});

    // Mapping from original node index to current level's node index.
    std::vector<int> membership(n);
    std::iota(membership.begin(), membership.end(), 0);

    SeededRng rng(seed);
    bool first_level = true;
    while (true) {
        double two_m = 0.0;
        std::vector<double> k(static_cast<std::size_t>(level.n));
        for (int i = 0; i < level.n; ++i) {
            k[static_cast<std::size_t>(i)] = level.degree(i);
            two_m += k[static_cast<std::size_t>(i)];
        }
        if (two_m <= 0.0) break;  // edgeless: every node stays singleton

        std::vector<int> node_comm(static_cast<std::size_t>(level.n));
        std::iota(node_comm.begin(), node_comm.end(), 0);
        std::vector<double> comm_tot = k;

        std::vector<int> order(static_cast<std::size_t>(level.n));
        std::iota(order.begin(), order.end(), 0);
        if (!first_level) rng.shuffle(order);  // level 0 stays in sorted author order

        bool any_move = false;
        while (local_move_pass(level, order, two_m, node_comm, comm_tot, k)) any_move = true;
        if (!any_move) break;

        const int n_comm = renumber(node_comm);
        for (std::size_t orig = 0; orig < n; ++orig)
            membership[orig] = node_comm[static_cast<std::size_t>(membership[orig])];
        if (n_comm == level.n) break;
        level = aggregate(level, node_comm, n_comm);
        first_level = false;
    }

    // Contiguous final indices in order of first appearance over sorted nodes.
    std::map<int, int> remap;
    CommunityPartition part;
    for (std::size_t i = 0; i < n; ++i) {
        const int c = membership[i];
        if (!remap.count(c)) remap[c] = static_cast<int>(remap.size());
        part.assignment[graph.nodes()[i]] = remap[c];
    }
    part.modularity = modularity(graph, part.assignment);
    return part;
}

std::set<AuthorId> merge_seed_communities(const CommunityPartition& partition,
                                          const std::set<AuthorId>& seeds) {
    std::set<int> seed_comms;
    for (const auto& s : seeds) {
        auto it = partition.assignment.find(s);
        if (it != partition.assignment.end()) seed_comms.insert(it->second);
    }
    if (seed_comms.empty()) throw GraphError("no seed author present in the partition");
    std::set<AuthorId> core;
    for (const auto& [a, c] : partition.assignment)
        if (seed_comms.count(c)) core.insert(a);
    return core;
}

BipartiteGraph build_bipartite(const Corpus& corpus, const std::set<AuthorId>& core) {
    if (core.empty()) throw GraphError("core author set is empty");
    BipartiteGraph g;
    for (const auto& id : corpus.ids()) {
        auto authors = corpus.get(id).normalized_authors();
        std::sort(authors.begin(), authors.end());
        authors.erase(std::unique(authors.begin(), authors.end()), authors.end());
        std::vector<AuthorId> members;
        for (const auto& a : authors)
            if (core.count(a)) members.push_back(a);
        if (members.empty()) continue;
        g.paper_authors[id] = members;
        for (const auto& a : members) g.author_papers[a].push_back(id);
    }
    if (g.paper_authors.empty()) throw GraphError("no corpus paper is authored by any core author");
    return g;
}

void export_bipartite(const BipartiteGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw GraphError("cannot write graph export: " + path);
    for (const auto& [author, papers] : graph.author_papers) {
        json edges = json::array();
        for (const auto& p : papers) edges.push_back({{"to", p}, {"weight", 1.0}});
        out << json{{"id", author.canonical}, {"kind", "author"}, {"edges", edges}}.dump() << '\n';
    }
    for (const auto& [paper, authors] : graph.paper_authors) {
        json edges = json::array();
        for (const auto& a : authors) edges.push_back({{"to", a.canonical}, {"weight", 1.0}});
        out << json{{"id", paper}, {"kind", "paper"}, {"edges", edges}}.dump() << '\n';
    }
}

void export_coauthor(const CoAuthorGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw GraphError("cannot write graph export: " + path);
    for (std::size_t i = 0; i < graph.node_count(); ++i) {
        json edges = json::array();
        for (const auto& [j, w] : graph.neighbors(static_cast<int>(i)))
            edges.push_back({{"to", graph.nodes()[static_cast<std::size_t>(j)].canonical}, {"weight", w}});
        out << json{{"id", graph.nodes()[i].canonical}, {"kind", "author"}, {"edges", edges}}.dump()
            << '\n';
    }
}

}  // namespace gywi::authorgraph
