#pragma once

#include <string>
#include <vector>

#include "gywi/corpus.hpp"
#include "gywi/promptopt.hpp"
#include "gywi/providers.hpp"
#include "gywi/retrieval.hpp"

namespace gywi::ideagen {

using corpus::PaperRecord;
using promptopt::PromptTemplate;
using retrieval::HybridContext;

struct IdeaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parsed six-field idea; `raw` keeps the full completion (the model may emit
/// extra material beyond the tags).
struct IdeaRecord {
    std::string topic, motivation, novelty, method, difference, feasibility;
    std::string raw;

    void validate() const;  // all six fields nonempty after trim
};

/// Substitutes the four placeholders exactly once each; placeholder-like text
/// inside substituted values stays literal.
std::string render_prompt(const PromptTemplate& tpl, const PaperRecord& target,
                          const HybridContext& context);

/// Intermediate summarization pass: returns a two-section summary labeled
/// [GraphRAG Context] then [RAG Context]; the sections are never merged.
std::string condense_context(const PaperRecord& target, const HybridContext& context,
                             providers::ChatProvider& provider);

/// Single generation call; the completion is returned verbatim.
std::string generate_idea(providers::ChatProvider& provider, const std::string& rendered_prompt);

/// Lenient tag extraction: first <tag>...</tag> span per field,
/// case-insensitive, multiline, surrounding prose tolerated. Missing or empty
/// tags raise an error naming them.
IdeaRecord parse_idea_xml(const std::string& raw);

/// Inverse of parse_idea_xml on valid records.
std::string serialize_idea_xml(const IdeaRecord& idea);

/// Persistence with provenance (target id, prompt version, context digest,
/// provider identity, seed).
std::string idea_to_json(const IdeaRecord& idea, const std::string& target_id, int prompt_version,
                         const std::string& context_digest, const std::string& provider_identity,
                         std::uint64_t seed);
IdeaRecord idea_from_json(const std::string& json_text);

}  // namespace gywi::ideagen
