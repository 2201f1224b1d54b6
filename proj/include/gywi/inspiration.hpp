#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "gywi/authorgraph.hpp"
#include "gywi/corpus.hpp"

namespace gywi::inspiration {

using authorgraph::BipartiteGraph;
using corpus::AuthorId;
using corpus::PaperRecord;

struct SamplingParams {
    int n_hops = 1;
    int k_adjacent = 4;
    int k_random = 2;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class Provenance { Adjacent, Random };

std::string provenance_name(Provenance p);

struct InspirationEntry {
    std::string paper_id;
    Provenance tag;
};

struct InspirationSet {
    std::vector<InspirationEntry> entries;
    std::vector<std::string> warnings;  // sampling shortfalls, non-fatal

    std::vector<std::string> ids_with_tag(Provenance tag) const;
};

/// Breadth-first closure on the co-author relation: hop 0 is the target's own
/// normalized authors; hop i adds anyone sharing a paper (in the graph or the
/// target itself) with hop i-1. Returns the union of hops 0..n_hops.
std::set<AuthorId> adjacent_authors(const BipartiteGraph& graph, const PaperRecord& target,
                                    int n_hops);

/// Papers (excluding the target) authored by the adjacent author set.
std::vector<std::string> adjacent_papers(const BipartiteGraph& graph, const PaperRecord& target,
                                         int n_hops);

/// Uniform sample without replacement from the adjacent paper pool.
std::vector<std::string> sample_adjacent(const BipartiteGraph& graph, const PaperRecord& target,
                                         const SamplingParams& params,
                                         std::vector<std::string>* warnings = nullptr);

/// Uniform sample without replacement from the remaining graph papers,
/// disjoint from `exclude` and the target.
std::vector<std::string> sample_random(const BipartiteGraph& graph, const PaperRecord& target,
                                       const std::set<std::string>& exclude,
                                       const SamplingParams& params,
                                       std::vector<std::string>* warnings = nullptr);

/// Whole sampling procedure: adjacent (exploitation) then random
/// (exploration), provenance-tagged, duplicate- and target-free.
InspirationSet sample_inspiration(const BipartiteGraph& graph, const PaperRecord& target,
                                  const SamplingParams& params);

/// CLI artifact: one JSON record per entry with params echoed for provenance.
void export_inspiration(const InspirationSet& set, const PaperRecord& target,
                        const SamplingParams& params, const std::string& path);

}  // namespace gywi::inspiration
