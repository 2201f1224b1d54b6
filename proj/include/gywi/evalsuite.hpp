#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gywi/authorgraph.hpp"
#include "gywi/corpus.hpp"
#include "gywi/ideagen.hpp"
#include "gywi/providers.hpp"
#include "gywi/retrieval.hpp"

namespace gywi::evalsuite {

using corpus::Corpus;
using corpus::PaperRecord;
using ideagen::IdeaRecord;

struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IMCQItem {
    int index = 0;
    std::string title;
    std::string id;
    std::string abstract_text;
    std::map<std::string, std::string> options;  // keys a..d -> motivation text
    std::string answer_option;                   // key of the correct answer

    void validate() const;
};

struct IMCQResult {
    int item_index = 0;
    std::string chosen;
    bool correct = false;
};

/// Per (system label, dimension) scores; dimensions fixed to the five rubric axes.
struct ScoreMatrix {
    std::map<std::string, std::map<std::string, double>> scores;  // system -> dimension -> score

    static const std::vector<std::string>& dimensions();
    double system_mean(const std::string& system) const;
};

struct ProjectedPoint {
    double x = 0, y = 0;
    std::string system;
    std::string component;
};

struct Projection2D {
    std::vector<ProjectedPoint> points;
    bool degenerate = false;          // t-SNE all-identical-input case
    double initial_kl = 0, final_kl = 0;  // t-SNE diagnostics
};

/// Provider-extracted motivation paragraph for a paper (the IMCQ correct answer).
std::string extract_motivation(providers::ChatProvider& provider, const PaperRecord& paper);

/// Top-3 pool entries by embedding cosine to the correct answer, excluding
/// entries from the same source paper; ties by id ascending.
std::vector<std::string> pick_distractors(const std::vector<std::pair<std::string, std::string>>& pool,
                                          const std::string& correct,
                                          const std::string& correct_source_id,
                                          providers::EmbedProvider& embedder, std::size_t count = 3);

/// One IMCQ item per paper: extracted motivation + 3 distractors, option
/// order shuffled by a per-item seeded permutation.
std::vector<IMCQItem> build_imcq(const std::vector<PaperRecord>& papers,
                                 const std::vector<std::pair<std::string, std::string>>& pool,
                                 providers::ChatProvider& chat, providers::EmbedProvider& embedder,
                                 std::uint64_t seed);

enum class AnswerStrategy { EmbedMatch, LlmChoice };

AnswerStrategy answer_strategy_from_name(const std::string& name);
std::string answer_strategy_name(AnswerStrategy s);

/// Answers one item with the generated idea: embed-match picks the option
/// closest to the idea's motivation; llm-choice asks the provider for a letter.
IMCQResult answer_imcq(const IMCQItem& item, const IdeaRecord& generated_idea,
                       AnswerStrategy strategy, providers::ChatProvider& chat,
                       providers::EmbedProvider& embedder);

/// Correct fraction; CLI reports it to 4 decimal places.
double accuracy(const std::vector<IMCQResult>& results);

/// Blind rubric scoring of 2-5 labeled ideas on the five dimensions; system
/// identities are concealed behind shuffled neutral labels A-E in the prompt.
ScoreMatrix score_ideas(const std::map<std::string, IdeaRecord>& ideas, const PaperRecord& target,
                        providers::ChatProvider& provider, std::uint64_t seed);

/// Renders the rubric evaluation prompt for the given blind labels (exposed
/// for golden-file testing).
std::string render_eval_prompt(const PaperRecord& target,
                               const std::vector<std::pair<std::string, IdeaRecord>>& labeled);

/// Mean title-embedding cosine over sampled co-author pairs vs an equal count
/// of sampled non-collaborating pairs.
std::pair<double, double> similarity_study(const Corpus& corpus,
                                           const authorgraph::CoAuthorGraph& graph,
                                           providers::EmbedProvider& embedder, std::uint64_t seed,
                                           std::size_t max_pairs = 200);

/// Projection onto the top-2 principal components of the mean-centered data;
/// sign convention: largest-magnitude loading positive.
Projection2D pca_2d(const std::vector<std::vector<double>>& vectors);

/// Exact (non-accelerated) t-SNE with perplexity-matched bandwidths and
/// momentum gradient descent; seeded and deterministic. All-identical inputs
/// return zero coordinates with the degenerate flag set.
Projection2D tsne_2d(const std::vector<std::vector<double>>& vectors, double perplexity,
                     int iterations, std::uint64_t seed);

/// Pipeline toggles for the ablation ladder.
struct PipelineConfig {
    std::string name;
    bool use_rag = false;
    bool use_graphrag = false;
    bool use_promptopt = false;
};

struct AblationRow {
    std::string config;
    double accuracy = 0;
    double delta = 0;  // vs previous row
};

/// Runs the item-answering routine per config over the same IMCQ set and
/// seed. The runner seam lets tests script outcomes; production code passes
/// the real pipeline.
using ItemRunner = std::function<IMCQResult(const PipelineConfig&, const IMCQItem&)>;
std::vector<AblationRow> ablation_run(const std::vector<PipelineConfig>& configs,
                                      const std::vector<IMCQItem>& items, const ItemRunner& runner);

// IMCQ file round-trip in the fixed on-disk schema
// (index/title/id/abstract/question{a..d}/answer_option).
void save_imcq(const std::vector<IMCQItem>& items, const std::string& path);
std::vector<IMCQItem> load_imcq(const std::string& path);

}  // namespace gywi::evalsuite
