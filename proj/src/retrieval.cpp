#include "gywi/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "gywi/util.hpp"

namespace gywi::retrieval {

using nlohmann::json;

std::string chunk_provenance_name(ChunkProvenance p) {
    switch (p) {
        case ChunkProvenance::Self: return "self";
        case ChunkProvenance::Neighbor: return "neighbor";
        case ChunkProvenance::Random: return "random";
    }
    return "self";
}

namespace {

ChunkProvenance chunk_provenance_from_name(const std::string& name) {
    if (name == "self") return ChunkProvenance::Self;
    if (name == "neighbor") return ChunkProvenance::Neighbor;
    if (name == "random") return ChunkProvenance::Random;
    throw RetrievalError("unknown chunk provenance: " + name);
}

}  // namespace

std::vector<Chunk> chunk_paper(const PaperRecord& record, std::size_t size, std::size_t overlap,
                               ChunkProvenance provenance) {
    if (size == 0 || size <= overlap)
        throw RetrievalError("chunking requires size > overlap >= 0");
    const std::string& text = record.content_text();
    if (text.empty()) throw RetrievalError("paper " + record.id + " has no text to chunk");

    std::vector<Chunk> chunks;
    if (text.size() <= size) {
        chunks.push_back({record.id, 0, text, provenance});
        return chunks;
    }
    const std::size_t stride = size - overlap;
    int ordinal = 0;
    for (std::size_t start = 0; start < text.size(); start += stride)
        chunks.push_back({record.id, ordinal++, text.substr(start, size), provenance});
    return chunks;
}

double cosine(const std::vector<double>& u, const std::vector<double>& v) {
    if (u.size() != v.size())
        throw RetrievalError("cosine: dimension mismatch (" + std::to_string(u.size()) + " vs " +
                             std::to_string(v.size()) + ")");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0) throw RetrievalError("cosine: zero vector");
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

VectorIndex build_index(const corpus::Corpus& corpus, const PaperRecord& target,
                        const inspiration::InspirationSet& sources,
                        providers::EmbedProvider& embedder, std::size_t chunk_size,
                        std::size_t chunk_overlap) {
    std::vector<Chunk> chunks = chunk_paper(target, chunk_size, chunk_overlap, ChunkProvenance::Self);
    for (const auto& entry : sources.entries) {
        const auto tag = entry.tag == inspiration::Provenance::Adjacent ? ChunkProvenance::Neighbor
                                                                        : ChunkProvenance::Random;
        auto more = chunk_paper(corpus.get(entry.paper_id), chunk_size, chunk_overlap, tag);
        chunks.insert(chunks.end(), more.begin(), more.end());
    }

    std::vector<std::string> texts;
    texts.reserve(chunks.size());
    for (const auto& c : chunks) texts.push_back(c.text);
    auto vectors = embedder.embed_batch(texts);

    VectorIndex index;
    index.dimension = vectors.empty() ? 0 : vectors.front().size();
    for (std::size_t i = 0; i < chunks.size(); ++i)
        index.entries.emplace_back(std::move(chunks[i]), std::move(vectors[i]));
    return index;
}

void save_index(const VectorIndex& index, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw RetrievalError("cannot write index file: " + path);
    for (const auto& [chunk, vec] : index.entries) {
        out << json{{"paper_id", chunk.paper_id},
                    {"ordinal", chunk.ordinal},
                    {"text", chunk.text},
                    {"provenance", chunk_provenance_name(chunk.provenance)},
                    {"vector", vec}}
                   .dump()
            << '\n';
    }
}

VectorIndex load_index(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw RetrievalError("cannot read index file: " + path);
    VectorIndex index;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json j = json::parse(line);
        Chunk chunk{j.at("paper_id").get<std::string>(), j.at("ordinal").get<int>(),
                    j.at("text").get<std::string>(),
                    chunk_provenance_from_name(j.at("provenance").get<std::string>())};
        auto vec = j.at("vector").get<std::vector<double>>();
        if (index.entries.empty())
            index.dimension = vec.size();
        else if (vec.size() != index.dimension)
            throw RetrievalError("index file has inconsistent vector dimensions: " + path);
        index.entries.emplace_back(std::move(chunk), std::move(vec));
    }
    return index;
}

std::vector<ScoredChunk> retrieve_depth(const VectorIndex& index, const std::vector<double>& query,
                                        std::size_t k) {
    if (k < 1) throw RetrievalError("retrieve_depth: k must be >= 1");
    if (index.entries.empty()) throw RetrievalError("retrieve_depth: empty index");

    std::vector<ScoredChunk> scored;
    scored.reserve(index.entries.size());
    for (const auto& [chunk, vec] : index.entries) scored.push_back({chunk, cosine(query, vec)});
    std::sort(scored.begin(), scored.end(), [](const ScoredChunk& a, const ScoredChunk& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.chunk.paper_id != b.chunk.paper_id) return a.chunk.paper_id < b.chunk.paper_id;
        return a.chunk.ordinal < b.chunk.ordinal;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

std::vector<double> target_query(const PaperRecord& target, providers::EmbedProvider& embedder) {
    return embedder.embed(target.title + "\n" + target.abstract_text);
}

GraphReport build_graph_report(const PaperRecord& target, const std::vector<std::string>& hop_titles,
                               providers::ChatProvider& provider) {
    if (hop_titles.empty()) throw RetrievalError("graph report requires at least one neighborhood title");

    std::string prompt;
    prompt += "Write a concise academic report about the graph neighborhood of the target paper.\n\n";
    prompt += "Target paper:\nTitle: " + target.title + "\nAbstract: " + target.abstract_text + "\n\n";
    prompt += "Neighborhood papers:\n";
    for (const auto& t : hop_titles) prompt += "- " + t + "\n";
    prompt += "\nStructure the report exactly as follows, using \"- \" bullet lines under each heading:\n";
    prompt += "Title: <report title>\n";
    prompt += "## Overview of Key Methods\n";
    prompt += "## Implementation Insights\n";
    prompt += "## Performance Considerations\n";

    const std::string response = provider.chat_user(prompt);

    GraphReport report;
    std::istringstream in(response);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("Title: ", 0) == 0 && report.title.empty() && report.sections.empty()) {
            report.title = trim(line.substr(7));
        } else if (line.rfind("## ", 0) == 0) {
            report.sections.push_back({trim(line.substr(3)), {}});
        } else if (line.rfind("- ", 0) == 0 && !report.sections.empty()) {
            report.sections.back().second.push_back(trim(line.substr(2)));
        }
    }
    const bool any_required =
        std::any_of(report.sections.begin(), report.sections.end(), [](const auto& s) {
            return s.first == "Overview of Key Methods" || s.first == "Implementation Insights" ||
                   s.first == "Performance Considerations";
        });
    if (report.sections.empty() || !any_required)
        throw RetrievalError("graph report response is missing every required heading");
    return report;
}

std::string render_report(const GraphReport& report) {
    std::string out;
    if (!report.title.empty()) out += "Title: " + report.title + "\n";
    for (const auto& [heading, bullets] : report.sections) {
        out += "## " + heading + "\n";
        for (const auto& b : bullets) out += "- " + b + "\n";
    }
    return out;
}

std::string render_chunks(const std::vector<ScoredChunk>& ranked) {
    std::string out;
    int i = 1;
    for (const auto& sc : ranked) {
        out += "[Chunk " + std::to_string(i++) + "] From Paper " + sc.chunk.paper_id + " (" +
               chunk_provenance_name(sc.chunk.provenance) + ", Score: " +
               format_fixed(sc.score, 4) + ") " + sc.chunk.text + "\n";
    }
    return out;
}

HybridContext assemble_context(const GraphReport& report, std::vector<ScoredChunk> ranked) {
    for (std::size_t i = 1; i < ranked.size(); ++i) {
        if (ranked[i - 1].score < ranked[i].score)
            throw RetrievalError("assemble_context: ranked chunks must be sorted non-increasing");
        if (!std::isfinite(ranked[i].score))
            throw RetrievalError("assemble_context: non-finite chunk score");
    }
    HybridContext ctx;
    ctx.graph_summary = render_report(report);
    ctx.ranked_chunks = std::move(ranked);
    return ctx;
}

std::string render_context(const HybridContext& context) {
    // The two layers stay separate blocks; downstream prompts rely on that.
    return "=== Graph Summary ===\n" + context.graph_summary + "\n=== Retrieved Chunks ===\n" +
           render_chunks(context.ranked_chunks);
}

}  // namespace gywi::retrieval
