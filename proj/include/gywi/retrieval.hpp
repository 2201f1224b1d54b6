#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gywi/authorgraph.hpp"
#include "gywi/corpus.hpp"
#include "gywi/inspiration.hpp"
#include "gywi/providers.hpp"

namespace gywi::retrieval {

using corpus::PaperRecord;

struct RetrievalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ChunkProvenance { Self, Neighbor, Random };

std::string chunk_provenance_name(ChunkProvenance p);

struct Chunk {
    std::string paper_id;
    int ordinal = 0;
    std::string text;
    ChunkProvenance provenance = ChunkProvenance::Self;
};

struct ScoredChunk {
    Chunk chunk;
    double score = 0.0;
};

struct VectorIndex {
    std::vector<std::pair<Chunk, std::vector<double>>> entries;
    std::size_t dimension = 0;
};

struct GraphReport {
    std::string title;
    std::vector<std::pair<std::string, std::vector<std::string>>> sections;  // heading -> bullets
};

struct HybridContext {
    std::string graph_summary;             // rendered GraphReport text
    std::vector<ScoredChunk> ranked_chunks;  // non-increasing by score
};

/// Sliding-window chunks over body (abstract fallback): window `size` chars,
/// consecutive windows overlap by `overlap` chars; ordinals from 0.
std::vector<Chunk> chunk_paper(const PaperRecord& record, std::size_t size, std::size_t overlap,
                               ChunkProvenance provenance);

double cosine(const std::vector<double>& u, const std::vector<double>& v);

/// Chunks + embeds the target (self) and every inspiration paper
/// (adjacent -> neighbor tag, random -> random tag) into one index.
VectorIndex build_index(const corpus::Corpus& corpus, const PaperRecord& target,
                        const inspiration::InspirationSet& sources,
                        providers::EmbedProvider& embedder, std::size_t chunk_size,
                        std::size_t chunk_overlap);

void save_index(const VectorIndex& index, const std::string& path);
VectorIndex load_index(const std::string& path);

/// Exact top-k by cosine; ties broken by (paper_id, ordinal) ascending.
std::vector<ScoredChunk> retrieve_depth(const VectorIndex& index, const std::vector<double>& query,
                                        std::size_t k);

/// Default retrieval query: embedding of target title + abstract.
std::vector<double> target_query(const PaperRecord& target, providers::EmbedProvider& embedder);

/// Prompts the provider with the target and its neighborhood titles,
/// requiring the three report headings, and parses the reply.
GraphReport build_graph_report(const PaperRecord& target, const std::vector<std::string>& hop_titles,
                               providers::ChatProvider& provider);

std::string render_report(const GraphReport& report);

/// Two-layer context: graph report text plus provenance-tagged chunk lines
/// ("[Chunk i] From Paper <id> (<provenance>, Score: <4 decimals>)"),
/// kept as separate blocks.
HybridContext assemble_context(const GraphReport& report, std::vector<ScoredChunk> ranked);

std::string render_chunks(const std::vector<ScoredChunk>& ranked);
std::string render_context(const HybridContext& context);

}  // namespace gywi::retrieval
