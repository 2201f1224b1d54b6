#include "gywi/ideagen.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>

#include "gywi/util.hpp"

namespace gywi::ideagen {

using nlohmann::json;

namespace {

const std::vector<std::string>& idea_tags() {
    static const std::vector<std::string> tags = {"topic",  "motivation", "novelty",
                                                  "method", "difference", "feasibility"};
    return tags;
}

}  // namespace

void IdeaRecord::validate() const {
    std::vector<std::string> missing;
    const std::pair<const char*, const std::string*> fields[] = {
        {"topic", &topic},           {"motivation", &motivation}, {"novelty", &novelty},
        {"method", &method},         {"difference", &difference}, {"feasibility", &feasibility}};
    for (const auto& [name, value] : fields)
        if (trim(*value).empty()) missing.push_back(name);
    if (!missing.empty()) {
        std::string msg = "idea record missing fields:";
        for (const auto& m : missing) msg += " " + m;
        throw IdeaError(msg);
    }
}

std::string render_prompt(const PromptTemplate& tpl, const PaperRecord& target,
                          const HybridContext& context) {
    tpl.validate();
    const std::vector<std::pair<std::string, std::string>> subs = {
        {"{title}", target.title},
        {"{abstract}", target.abstract_text},
        {"{graph_summary}", context.graph_summary},
        {"{chunks}", retrieval::render_chunks(context.ranked_chunks)},
    };

    // Single left-to-right pass: substituted values are copied literally and
    // never rescanned, so braces inside titles or chunks stay inert.
    std::string out;
    out.reserve(tpl.text.size());
    std::size_t i = 0;
    while (i < tpl.text.size()) {
        bool matched = false;
        for (const auto& [ph, value] : subs) {
            if (tpl.text.compare(i, ph.size(), ph) == 0) {
                out += value;
                i += ph.size();
                matched = true;
                break;
            }
        }
        if (!matched) out += tpl.text[i++];
    }
    return out;
}

std::string condense_context(const PaperRecord& target, const HybridContext& context,
                             providers::ChatProvider& provider) {
    if (trim(context.graph_summary).empty())
        throw IdeaError("condense_context: context has no graph summary");

    std::string prompt;
    prompt += "You are a research summarization assistant. Your goal is to help a synthesis model "
              "use contextual documents more effectively.\n\n";
    prompt += "Given a GraphRAG conceptual summary, several RAG semantic chunks, and a target "
              "paper: keep the GraphRAG summary mostly intact, carefully select and compress the "
              "most relevant RAG chunks, and do NOT merge GraphRAG and RAG into one block; treat "
              "them as complementary layers of context.\n\n";
    prompt += "Output a structured 2-section summary:\n   [GraphRAG Context]\n   [RAG Context]\n\n";
    prompt += "<target_paper>\nTitle: " + target.title + "\nAbstract: " + target.abstract_text +
              "\n</target_paper>\n\n";
    prompt += "<GraphRAG_Summary>\n" + context.graph_summary + "\n</GraphRAG_Summary>\n\n";
    prompt += "<RAG_Chunks>\n" + retrieval::render_chunks(context.ranked_chunks) + "</RAG_Chunks>\n\n";
    prompt += "Return ONLY the combined two-part summary in plain text with clear section labels.\n";

    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const std::string response = provider.chat_user(prompt);
        const auto graph_pos = response.find("[GraphRAG Context]");
        const auto rag_pos = response.find("[RAG Context]");
        if (graph_pos == std::string::npos || rag_pos == std::string::npos) {
            last_error = "missing section label";
            continue;
        }
        if (graph_pos > rag_pos) {
            last_error = "[GraphRAG Context] must precede [RAG Context]";
            continue;
        }
        return response;
    }
    throw IdeaError("condensed context invalid after retry: " + last_error);
}

std::string generate_idea(providers::ChatProvider& provider, const std::string& rendered_prompt) {
    if (trim(rendered_prompt).empty()) throw IdeaError("generate_idea: empty prompt");
    return provider.chat_user(rendered_prompt);
}

namespace {

// Case-insensitive search for `needle` in `haystack` starting at `from`.
std::size_t ifind(const std::string& haystack, const std::string& needle, std::size_t from = 0) {
    const std::string h = to_lower(haystack), n = to_lower(needle);
    return h.find(n, from);
}

std::string extract_tag(const std::string& raw, const std::string& tag) {
    const auto open = ifind(raw, "<" + tag);
    if (open == std::string::npos) return "";
    const auto open_end = raw.find('>', open);
    if (open_end == std::string::npos) return "";
    const auto close = ifind(raw, "</" + tag + ">", open_end + 1);
    if (close == std::string::npos) return "";
    return trim(raw.substr(open_end + 1, close - open_end - 1));
}

}  // namespace

IdeaRecord parse_idea_xml(const std::string& raw) {
    IdeaRecord idea;
    idea.raw = raw;
    std::string* slots[] = {&idea.topic,  &idea.motivation, &idea.novelty,
                            &idea.method, &idea.difference, &idea.feasibility};
    std::vector<std::string> missing;
    for (std::size_t i = 0; i < idea_tags().size(); ++i) {
        *slots[i] = extract_tag(raw, idea_tags()[i]);
        if (slots[i]->empty()) missing.push_back(idea_tags()[i]);
    }
    if (!missing.empty()) {
        std::string msg = "idea parse failed; missing or empty tags:";
        for (const auto& m : missing) msg += " " + m;
        throw IdeaError(msg);
    }
    return idea;
}

std::string serialize_idea_xml(const IdeaRecord& idea) {
    idea.validate();
    std::string out;
    const std::string* values[] = {&idea.topic,  &idea.motivation, &idea.novelty,
                                   &idea.method, &idea.difference, &idea.feasibility};
    for (std::size_t i = 0; i < idea_tags().size(); ++i)
        out += "<" + idea_tags()[i] + ">" + *values[i] + "</" + idea_tags()[i] + ">\n";
    return out;
}

std::string idea_to_json(const IdeaRecord& idea, const std::string& target_id, int prompt_version,
                         const std::string& context_digest, const std::string& provider_identity,
                         std::uint64_t seed) {
    idea.validate();
    return json{{"topic", idea.topic},
                {"motivation", idea.motivation},
                {"novelty", idea.novelty},
                {"method", idea.method},
                {"difference", idea.difference},
                {"feasibility", idea.feasibility},
                {"raw", idea.raw},
                {"provenance",
                 {{"target_id", target_id},
                  {"prompt_version", prompt_version},
                  {"context_digest", context_digest},
                  {"provider", provider_identity},
                  {"seed", seed}}}}
        .dump(2);
}

IdeaRecord idea_from_json(const std::string& json_text) {
    const json j = json::parse(json_text);
    IdeaRecord idea;
    idea.topic = j.at("topic").get<std::string>();
    idea.motivation = j.at("motivation").get<std::string>();
    idea.novelty = j.at("novelty").get<std::string>();
    idea.method = j.at("method").get<std::string>();
    idea.difference = j.at("difference").get<std::string>();
    idea.feasibility = j.at("feasibility").get<std::string>();
    if (j.contains("raw")) idea.raw = j.at("raw").get<std::string>();
    idea.validate();
    return idea;
}

}  // namespace gywi::ideagen
