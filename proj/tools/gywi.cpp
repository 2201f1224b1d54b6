// Command-line front end for the idea-generation pipeline.
#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <sstream>

#include "gywi/authorgraph.hpp"
#include "gywi/corpus.hpp"
#include "gywi/evalsuite.hpp"
#include "gywi/ideagen.hpp"
#include "gywi/inspiration.hpp"
#include "gywi/promptopt.hpp"
#include "gywi/providers.hpp"
#include "gywi/retrieval.hpp"
#include "gywi/util.hpp"

using nlohmann::json;
using namespace gywi;

namespace {

struct Options {
    std::string config_path;
    std::uint64_t seed = 42;
    std::string corpus_path;
    std::string target_id;
    int n_hops = 1;
    int k_adj = 4;
    int k_rand = 2;
    std::size_t chunk_size = 1000;
    std::size_t chunk_overlap = 200;
    std::size_t top_k = 5;
    std::size_t n_topic = 10;
    std::size_t reuses = 5;
    double alpha = 0.05;
    int max_rounds = 5;
    std::string strategy = "embed-match";
    std::string provider = "mock";
    std::string out_path;
    std::string index_path;
    std::string imcq_path;
    std::string ideas_path;
    std::string method = "pca";
    double perplexity = 4.0;
    int iterations = 300;

    json config;  // parsed --config file, if any
};

void register_common(CLI::App* cmd, Options& opt) {
    cmd->add_option("--config", opt.config_path, "JSON config file; flags override its values");
    cmd->add_option("--seed", opt.seed, "global random seed");
    cmd->add_option("--corpus", opt.corpus_path, "corpus JSONL path");
    cmd->add_option("--target-id", opt.target_id, "target paper id");
    cmd->add_option("--n-hops", opt.n_hops, "author-graph hop count");
    cmd->add_option("--k-adj", opt.k_adj, "adjacent papers to sample");
    cmd->add_option("--k-rand", opt.k_rand, "random papers to sample");
    cmd->add_option("--chunk-size", opt.chunk_size, "chunk window size (chars)");
    cmd->add_option("--chunk-overlap", opt.chunk_overlap, "chunk overlap (chars)");
    cmd->add_option("--top-k", opt.top_k, "retrieval depth");
    cmd->add_option("--n-topic", opt.n_topic, "topics per optimization round");
    cmd->add_option("--reuses", opt.reuses, "repetitions per topic");
    cmd->add_option("--alpha", opt.alpha, "significance level");
    cmd->add_option("--max-rounds", opt.max_rounds, "optimization round cap");
    cmd->add_option("--strategy", opt.strategy, "answer strategy: embed-match | llm-choice")
        ->check(CLI::IsMember({"embed-match", "llm-choice"}));
    cmd->add_option("--provider", opt.provider, "provider backend: live | mock")
        ->check(CLI::IsMember({"live", "mock"}));
    cmd->add_option("--out", opt.out_path, "output path");
    cmd->add_option("--index", opt.index_path, "vector index path");
    cmd->add_option("--imcq", opt.imcq_path, "IMCQ benchmark JSON path");
    cmd->add_option("--ideas", opt.ideas_path, "JSON file mapping system name -> idea record");
    cmd->add_option("--method", opt.method, "projection method: pca | tsne")
        ->check(CLI::IsMember({"pca", "tsne"}));
    cmd->add_option("--perplexity", opt.perplexity, "t-SNE perplexity");
    cmd->add_option("--iterations", opt.iterations, "t-SNE iterations");
}

// Config-file values fill in any flag the user did not pass on the command line.
void apply_config(CLI::App* cmd, Options& opt) {
    if (opt.config_path.empty()) return;
    std::ifstream in(opt.config_path);
    if (!in) throw std::runtime_error("cannot read config file: " + opt.config_path);
    opt.config = json::parse(in);

    auto take = [&](const char* flag, const char* key, auto& slot) {
        if (cmd->count(flag) == 0 && opt.config.contains(key)) opt.config.at(key).get_to(slot);
    };
    take("--seed", "seed", opt.seed);
    take("--corpus", "corpus", opt.corpus_path);
    take("--target-id", "target_id", opt.target_id);
    take("--n-hops", "n_hops", opt.n_hops);
    take("--k-adj", "k_adj", opt.k_adj);
    take("--k-rand", "k_rand", opt.k_rand);
    take("--chunk-size", "chunk_size", opt.chunk_size);
    take("--chunk-overlap", "chunk_overlap", opt.chunk_overlap);
    take("--top-k", "top_k", opt.top_k);
    take("--n-topic", "n_topic", opt.n_topic);
    take("--reuses", "reuses", opt.reuses);
    take("--alpha", "alpha", opt.alpha);
    take("--max-rounds", "max_rounds", opt.max_rounds);
    take("--strategy", "strategy", opt.strategy);
    take("--provider", "provider", opt.provider);
    take("--out", "out", opt.out_path);
    take("--index", "index", opt.index_path);
    take("--imcq", "imcq", opt.imcq_path);
    take("--ideas", "ideas", opt.ideas_path);
    take("--method", "method", opt.method);
    take("--perplexity", "perplexity", opt.perplexity);
    take("--iterations", "iterations", opt.iterations);
}

void echo_effective(const std::string& command, const Options& opt) {
    // Goes to stderr so stdout stays parseable.
    std::cerr << json{{"command", command},
                      {"seed", opt.seed},
                      {"provider", opt.provider},
                      {"corpus", opt.corpus_path},
                      {"target_id", opt.target_id},
                      {"n_hops", opt.n_hops},
                      {"k_adj", opt.k_adj},
                      {"k_rand", opt.k_rand},
                      {"chunk_size", opt.chunk_size},
                      {"chunk_overlap", opt.chunk_overlap},
                      {"top_k", opt.top_k},
                      {"n_topic", opt.n_topic},
                      {"reuses", opt.reuses},
                      {"alpha", opt.alpha},
                      {"max_rounds", opt.max_rounds},
                      {"strategy", opt.strategy}}
                     .dump()
              << "\n";
}

providers::ProviderConfig provider_config(const Options& opt, const std::string& prefix) {
    providers::ProviderConfig cfg;
    const json& c = opt.config;
    auto key = [&](const char* suffix) { return prefix + "_" + suffix; };
    if (!c.contains(key("endpoint")))
        throw std::runtime_error("live provider requires '" + key("endpoint") + "' in --config");
    cfg.endpoint = c.at(key("endpoint")).get<std::string>();
    cfg.model = c.value(key("model"), std::string("default"));
    cfg.api_key_env = c.value(key("api_key_env"), std::string(""));
    cfg.timeout_s = c.value(key("timeout_s"), 30.0);
    cfg.max_retries = c.value(key("max_retries"), 3);
    cfg.max_in_flight = c.value(key("max_in_flight"), 4);
    cfg.backoff_base_s = c.value(key("backoff_base_s"), 1.0);
    return cfg;
}

struct Providers {
    std::unique_ptr<providers::ChatProvider> chat;
    std::unique_ptr<providers::EmbedProvider> embed;
    std::unique_ptr<providers::AuditTrail> audit;
    std::string identity;
};

Providers make_providers(const Options& opt) {
    Providers p;
    if (opt.provider == "mock") {
        p.chat = std::make_unique<providers::MockChatProvider>(stage_seed(opt.seed, "chat"));
        p.embed = std::make_unique<providers::MockEmbedProvider>(stage_seed(opt.seed, "embed"), 64);
        p.identity = "mock:" + std::to_string(opt.seed);
    } else {
        p.audit = std::make_unique<providers::AuditTrail>(
            opt.config.value("audit_log", std::string("provider_audit.jsonl")));
        const auto chat_cfg = provider_config(opt, "chat");
        const auto embed_cfg = provider_config(opt, "embed");
        p.chat = std::make_unique<providers::HttpChatProvider>(chat_cfg, p.audit.get());
        p.embed = std::make_unique<providers::HttpEmbedProvider>(embed_cfg, p.audit.get());
        p.identity = "live:" + chat_cfg.model;
    }
    return p;
}

std::ostream& output_stream(const Options& opt, std::ofstream& file) {
    if (opt.out_path.empty()) return std::cout;
    file.open(opt.out_path);
    if (!file) throw std::runtime_error("cannot write output file: " + opt.out_path);
    return file;
}

// Author graph artifacts shared by several commands.
struct GraphStage {
    authorgraph::CoAuthorGraph graph;
    authorgraph::CommunityPartition partition;
    std::set<corpus::AuthorId> core;
    authorgraph::BipartiteGraph bipartite;
};

GraphStage build_graph_stage(const corpus::Corpus& corpus, const corpus::PaperRecord& target,
                             std::uint64_t seed) {
    GraphStage stage;
    std::set<corpus::AuthorId> seeds;
    for (const auto& a : target.normalized_authors()) seeds.insert(a);
    stage.graph = authorgraph::build_coauthor_graph(corpus, seeds);
    stage.partition = authorgraph::louvain(stage.graph, stage_seed(seed, "louvain"));
    stage.core = authorgraph::merge_seed_communities(stage.partition, seeds);
    stage.bipartite = authorgraph::build_bipartite(corpus, stage.core);
    return stage;
}

inspiration::SamplingParams sampling_params(const Options& opt) {
    inspiration::SamplingParams params;
    params.n_hops = opt.n_hops;
    params.k_adjacent = opt.k_adj;
    params.k_random = opt.k_rand;
    params.seed = opt.seed;
    params.validate();
    return params;
}

std::vector<std::string> neighborhood_titles(const corpus::Corpus& corpus,
                                             const GraphStage& stage,
                                             const corpus::PaperRecord& target, int n_hops,
                                             std::size_t cap = 12) {
    std::vector<std::string> titles;
    for (const auto& id : inspiration::adjacent_papers(stage.bipartite, target, n_hops)) {
        titles.push_back(corpus.get(id).title);
        if (titles.size() >= cap) break;
    }
    return titles;
}

retrieval::HybridContext build_full_context(const corpus::Corpus& corpus,
                                            const corpus::PaperRecord& target, const Options& opt,
                                            Providers& prov, const GraphStage& stage) {
    const auto insp = inspiration::sample_inspiration(stage.bipartite, target, sampling_params(opt));
    for (const auto& w : insp.warnings) std::cerr << "warning: " << w << "\n";
    const auto index = retrieval::build_index(corpus, target, insp, *prov.embed, opt.chunk_size,
                                              opt.chunk_overlap);
    const auto ranked =
        retrieval::retrieve_depth(index, retrieval::target_query(target, *prov.embed), opt.top_k);
    const auto titles = neighborhood_titles(corpus, stage, target, opt.n_hops);
    const auto report = retrieval::build_graph_report(target, titles, *prov.chat);
    return retrieval::assemble_context(report, ranked);
}

const corpus::PaperRecord& require_target(const corpus::Corpus& corpus, const Options& opt) {
    if (opt.target_id.empty()) throw std::runtime_error("--target-id is required for this command");
    return corpus.get(opt.target_id);
}

// Single-idea rubric mean used by the optimization scorer: same evaluation
// prompt shape as multi-system scoring, one blind label.
double rubric_mean(providers::ChatProvider& chat, const corpus::PaperRecord& topic,
                   const ideagen::IdeaRecord& idea) {
    const std::string prompt = evalsuite::render_eval_prompt(topic, {{"A", idea}});
    const json scores = json::parse(chat.chat_user(prompt));
    double sum = 0.0;
    for (const auto& dim : evalsuite::ScoreMatrix::dimensions()) {
        const double v = scores.at(dim).at("A").get<double>();
        if (!(v >= 1.0 && v <= 10.0)) throw std::runtime_error("rubric score out of range");
        sum += v;
    }
    return sum / static_cast<double>(evalsuite::ScoreMatrix::dimensions().size());
}

int cmd_ingest(const Options& opt) {
    const auto corpus = corpus::load_corpus(opt.corpus_path);
    if (!opt.out_path.empty()) corpus::save_corpus(corpus, opt.out_path);
    std::cout << "ingested " << corpus.size() << " papers\n";
    return 0;
}

int cmd_build_graph(const Options& opt, Providers&) {
    const auto corpus = corpus::load_corpus(opt.corpus_path);
    const auto& target = require_target(corpus, opt);
    const auto stage = build_graph_stage(corpus, target, opt.seed);
    const std::string prefix = opt.out_path.empty() ? "graph" : opt.out_path;
    authorgraph::export_coauthor(stage.graph, prefix + ".coauthor.jsonl");
    authorgraph::export_bipartite(stage.bipartite, prefix + ".bipartite.jsonl");
    std::cout << "authors: " << stage.graph.node_count()
              << "\ncommunities: " << stage.partition.community_count()
              << "\nmodularity: " << format_fixed(stage.partition.modularity, 4)
              << "\ncore authors: " << stage.core.size()
              << "\ncore papers: " << stage.bipartite.paper_count() << "\n";
    return 0;
}

int cmd_sample(const Options& opt, Providers&) {
    const auto corpus = corpus::load_corpus(opt.corpus_path);
    const auto& target = require_target(corpus, opt);
    const auto stage = build_graph_stage(corpus, target, opt.seed);
    const auto params = sampling_params(opt);
    const auto insp = inspiration::sample_inspiration(stage.bipartite, target, params);
    if (!opt.out_path.empty()) inspiration::export_inspiration(insp, target, params, opt.out_path);
    for (const auto& e : insp.entries)
        std::cout << e.paper_id << "\t" << inspiration::provenance_name(e.tag) << "\n";
    for (const auto& w : insp.warnings) std::cerr << "warning: " << w << "\n";
    return 0;
}

int cmd_index(const Options& opt, Providers& prov) {
    const auto corpus = corpus::load_corpus(opt.corpus_path);
    const auto& target = require_target(corpus, opt);
    const auto stage = build_graph_stage(corpus, target, opt.seed);
    const auto insp = inspiration::sample_inspiration(stage.bipartite, target, sampling_params(opt));
    const auto index = retrieval::build_index(corpus, target, insp, *prov.embed, opt.chunk_size,
                                              opt.chunk_overlap);
    const std::string path = opt.index_path.empty() ? opt.out_path : opt.index_path;
    if (path.empty()) throw std::runtime_error("index: give --index or --out for the index file");
    retrieval::save_index(index, path);
    std::cout << "indexed " << index.entries.size() << " chunks (dim " << index.dimension << ")\n";
    return 0;
}

int cmd_retrieve(const Options& opt, Providers& prov) {
    const auto corpus = corpus::load_corpus(opt.corpus_path);
    const auto& target = require_target(corpus, opt);
    retrieval::VectorIndex index;
    if (!opt.index_path.empty()) {
        index = retrieval::load_index(opt.index_path);
    } else {
        const auto stage = build_graph_stage(corpus, target, opt.seed);
        const auto insp =
            inspiration::sample_inspiration(stage.bipartite, target, sampling_params(opt));
        index = retrieval::build_index(corpus, target, insp, *prov.embed, opt.chunk_size,
                                       opt.chunk_overlap);
    }
    const auto ranked =
        retrieval::retrieve_depth(index, retrieval::target_query(target, *prov.embed), opt.top_k);
    std::ofstream file;
    output_stream(opt, file) << retrieval::render_chunks(ranked);
    return 0;
}

int cmd_report(const Options& opt, Providers& prov) {
    const auto corpus = corpus::load_corpus(opt.corpus_path);
    const auto& target = require_target(corpus, opt);
    const auto stage = build_graph_stage(corpus, target, opt.seed);
    const auto titles = neighborhood_titles(corpus, stage, target, opt.n_hops);
    const auto report = retrieval::build_graph_report(target, titles, *prov.chat);
    std::ofstream file;
    output_stream(opt, file) << retrieval::render_report(report);
    return 0;
}

int cmd_generate(const Options& opt, Providers& prov) {
    const auto corpus = corpus::load_corpus(opt.corpus_path);
    const auto& target = require_target(corpus, opt);
    const auto stage = build_graph_stage(corpus, target, opt.seed);
    const auto context = build_full_context(corpus, target, opt, prov, stage);

    const auto tpl = promptopt::PromptTemplate::default_template();
    const std::string prompt = ideagen::render_prompt(tpl, target, context);
    const std::string raw = ideagen::generate_idea(*prov.chat, prompt);
    const auto idea = ideagen::parse_idea_xml(raw);
    const std::string digest = hex_digest(fnv1a64(retrieval::render_context(context)));

    std::ofstream file;
    output_stream(opt, file) << ideagen::idea_to_json(idea, target.id, tpl.version, digest,
                                                      prov.identity, opt.seed)
                             << "\n";
    return 0;
}

int cmd_optimize(const Options& opt, Providers& prov) {
    const auto corpus = corpus::load_corpus(opt.corpus_path);
    std::vector<corpus::PaperRecord> topics;
    for (const auto& id : corpus.ids()) topics.push_back(corpus.get(id));

    promptopt::OptimizeParams params;
    params.n_topic = opt.n_topic;
    params.r = opt.reuses;
    params.alpha = opt.alpha;
    params.max_rounds = opt.max_rounds;
    params.seed = opt.seed;

    // Optimization batches skip the per-topic retrieval stage; the template is
    // judged on target-paper grounding alone.
    promptopt::Scorer scorer = [&](const promptopt::PromptTemplate& tpl,
                                   const corpus::PaperRecord& topic, int rep) {
        retrieval::HybridContext ctx;
        ctx.graph_summary = "## Overview of Key Methods\n- (batch scoring; graph layer elided)\n";
        std::string prompt = ideagen::render_prompt(tpl, topic, ctx);
        prompt += "\n[repetition " + std::to_string(rep) + "]\n";
        const auto idea = ideagen::parse_idea_xml(prov.chat->chat_user(prompt));
        return rubric_mean(*prov.chat, topic, idea);
    };

    std::ofstream log;
    std::ostream* log_ptr = nullptr;
    if (!opt.out_path.empty()) {
        log.open(opt.out_path);
        if (!log) throw std::runtime_error("cannot write audit log: " + opt.out_path);
        log_ptr = &log;
    }
    const auto result = promptopt::optimize(promptopt::PromptTemplate::default_template(), topics,
                                            scorer, *prov.chat, params, log_ptr);
    std::cout << "rounds: " << result.history.size() << "\nbest version: " << result.best.version
              << "\nbest mean: " << format_fixed(result.best_stats.mean, 4) << " CI ["
              << format_fixed(result.best_stats.ci_low, 4) << ", "
              << format_fixed(result.best_stats.ci_high, 4) << "]\n";
    return 0;
}

int cmd_imcq_build(const Options& opt, Providers& prov) {
    const auto corpus = corpus::load_corpus(opt.corpus_path);
    std::vector<corpus::PaperRecord> papers;
    std::vector<std::pair<std::string, std::string>> pool;
    for (const auto& id : corpus.ids()) {
        papers.push_back(corpus.get(id));
        pool.push_back({id, evalsuite::extract_motivation(*prov.chat, corpus.get(id))});
    }
    const auto items = evalsuite::build_imcq(papers, pool, *prov.chat, *prov.embed, opt.seed);
    const std::string path = opt.imcq_path.empty() ? opt.out_path : opt.imcq_path;
    if (path.empty()) throw std::runtime_error("imcq-build: give --imcq or --out");
    evalsuite::save_imcq(items, path);
    std::cout << "built " << items.size() << " IMCQ items\n";
    return 0;
}

int cmd_imcq_run(const Options& opt, Providers& prov) {
    if (opt.imcq_path.empty()) throw std::runtime_error("imcq-run: --imcq is required");
    const auto items = evalsuite::load_imcq(opt.imcq_path);
    const auto strategy = evalsuite::answer_strategy_from_name(opt.strategy);
    const auto tpl = promptopt::PromptTemplate::default_template();

    std::vector<evalsuite::IMCQResult> results;
    std::ofstream file;
    std::ostream* out = opt.out_path.empty() ? nullptr : &output_stream(opt, file);
    for (const auto& item : items) {
        corpus::PaperRecord topic;
        topic.id = item.id;
        topic.title = item.title;
        topic.abstract_text = item.abstract_text;
        topic.authors = {"blinded"};
        topic.year = 2000;
        retrieval::HybridContext ctx;
        ctx.graph_summary = "## Overview of Key Methods\n- (benchmark run; graph layer elided)\n";
        const auto idea =
            ideagen::parse_idea_xml(prov.chat->chat_user(ideagen::render_prompt(tpl, topic, ctx)));
        const auto res = evalsuite::answer_imcq(item, idea, strategy, *prov.chat, *prov.embed);
        results.push_back(res);
        if (out)
            *out << json{{"index", res.item_index}, {"chosen", res.chosen}, {"correct", res.correct}}
                        .dump()
                 << "\n";
    }
    std::cout << "accuracy: " << format_fixed(evalsuite::accuracy(results), 4) << "\n";
    return 0;
}

int cmd_score(const Options& opt, Providers& prov) {
    const auto corpus = corpus::load_corpus(opt.corpus_path);
    const auto& target = require_target(corpus, opt);
    if (opt.ideas_path.empty()) throw std::runtime_error("score: --ideas is required");

    // --ideas takes either one JSON file mapping system name -> idea record,
    // or a comma-separated list of single-idea files labeled by filename stem.
    std::vector<std::string> paths;
    std::stringstream split(opt.ideas_path);
    for (std::string part; std::getline(split, part, ',');)
        if (!part.empty()) paths.push_back(part);

    std::map<std::string, ideagen::IdeaRecord> ideas;
    auto stem = [](const std::string& path) {
        const auto slash = path.find_last_of('/');
        const auto base = slash == std::string::npos ? path : path.substr(slash + 1);
        const auto dot = base.find_last_of('.');
        return dot == std::string::npos ? base : base.substr(0, dot);
    };
    for (const auto& path : paths) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot read ideas file: " + path);
        const json parsed = json::parse(in);
        if (parsed.contains("topic") && parsed.contains("motivation")) {
            ideas[stem(path)] = ideagen::idea_from_json(parsed.dump());
        } else if (paths.size() == 1) {
            for (const auto& [name, idea_json] : parsed.items())
                ideas[name] = ideagen::idea_from_json(idea_json.dump());
        } else {
            throw std::runtime_error("score: " + path + " is not a single idea record");
        }
    }

    const auto matrix = evalsuite::score_ideas(ideas, target, *prov.chat, opt.seed);
    json out;
    for (const auto& [system, dims] : matrix.scores) {
        out[system] = dims;
        out[system]["mean"] = matrix.system_mean(system);
        std::cout << system << ": mean " << format_fixed(matrix.system_mean(system), 4) << "\n";
    }
    if (!opt.out_path.empty()) {
        std::ofstream file(opt.out_path);
        file << out.dump(2) << "\n";
    }
    return 0;
}

int cmd_similarity(const Options& opt, Providers& prov) {
    const auto corpus = corpus::load_corpus(opt.corpus_path);
    // The study spans the whole corpus: every author is a seed so the graph
    // contains all collaborations and all non-collaborating pairs.
    std::set<corpus::AuthorId> seeds;
    for (const auto& id : corpus.ids())
        for (const auto& a : corpus.get(id).normalized_authors()) seeds.insert(a);
    const auto graph = authorgraph::build_coauthor_graph(corpus, seeds);
    const auto [co_mean, non_mean] =
        evalsuite::similarity_study(corpus, graph, *prov.embed, opt.seed);
    std::cout << "coauthor mean similarity: " << format_fixed(co_mean, 4)
              << "\nnon-coauthor mean similarity: " << format_fixed(non_mean, 4) << "\n";
    return 0;
}

int cmd_project(const Options& opt, Providers& prov) {
    const auto corpus = corpus::load_corpus(opt.corpus_path);
    std::vector<std::string> texts, ids;
    for (const auto& id : corpus.ids()) {
        const auto& rec = corpus.get(id);
        texts.push_back(rec.title + "\n" + rec.abstract_text);
        ids.push_back(id);
    }
    const auto vectors = prov.embed->embed_batch(texts);
    evalsuite::Projection2D proj =
        opt.method == "pca"
            ? evalsuite::pca_2d(vectors)
            : evalsuite::tsne_2d(vectors, opt.perplexity, opt.iterations,
                                 stage_seed(opt.seed, "tsne"));
    std::ofstream file;
    auto& out = output_stream(opt, file);
    for (std::size_t i = 0; i < proj.points.size(); ++i)
        out << json{{"id", ids[i]}, {"x", proj.points[i].x}, {"y", proj.points[i].y}}.dump() << "\n";
    if (opt.method == "tsne")
        std::cerr << json{{"degenerate", proj.degenerate},
                          {"initial_kl", proj.initial_kl},
                          {"final_kl", proj.final_kl}}
                         .dump()
                  << "\n";
    return 0;
}

int cmd_ablate(const Options& opt, Providers& prov) {
    if (opt.imcq_path.empty()) throw std::runtime_error("ablate: --imcq is required");
    const auto items = evalsuite::load_imcq(opt.imcq_path);

    const std::vector<evalsuite::PipelineConfig> configs = {
        {"base", false, false, false},
        {"+rag", true, false, false},
        {"+graphrag", true, true, false},
        {"+promptopt", true, true, true},
    };
    // Each toggle widens the evidence the answerer may embed against the options.
    evalsuite::ItemRunner runner = [&](const evalsuite::PipelineConfig& cfg,
                                       const evalsuite::IMCQItem& item) {
        ideagen::IdeaRecord idea;
        std::string evidence = item.title;
        if (cfg.use_rag) evidence += "\n" + item.abstract_text;
        if (cfg.use_graphrag) evidence += "\nGraph neighborhood emphasis: " + item.title;
        if (cfg.use_promptopt) evidence += "\nGrounded restatement: " + item.abstract_text;
        idea.topic = idea.novelty = idea.method = idea.difference = idea.feasibility = "n/a";
        idea.motivation = evidence;
        return evalsuite::answer_imcq(item, idea, evalsuite::AnswerStrategy::EmbedMatch, *prov.chat,
                                      *prov.embed);
    };
    const auto rows = evalsuite::ablation_run(configs, items, runner);
    std::ofstream file;
    auto& out = output_stream(opt, file);
    for (const auto& row : rows)
        out << row.config << "\taccuracy " << format_fixed(row.accuracy, 4) << "\tdelta "
            << format_fixed(row.delta, 4) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"author-graph-guided research idea generation pipeline"};
    app.require_subcommand(1);

    Options opt;
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"ingest", "validate and round-trip a corpus file"},
        {"build-graph", "co-author graph, communities, bipartite exports"},
        {"sample", "inspiration paper sampling"},
        {"index", "chunk + embed into a vector index"},
        {"retrieve", "top-k chunk retrieval for the target"},
        {"report", "graph neighborhood report"},
        {"generate", "end-to-end idea generation"},
        {"optimize", "significance-gated prompt optimization"},
        {"imcq-build", "build the motivation MCQ benchmark"},
        {"imcq-run", "answer the benchmark and report accuracy"},
        {"score", "blind rubric scoring of competing ideas"},
        {"similarity", "co-author vs non-co-author title similarity"},
        {"project", "2D projection (pca | tsne) of paper embeddings"},
        {"ablate", "component ablation ladder on the benchmark"},
    };
    for (const auto& [name, desc] : commands) register_common(app.add_subcommand(name, desc), opt);

    CLI11_PARSE(app, argc, argv);
    CLI::App* cmd = app.get_subcommands().front();

    try {
        apply_config(cmd, opt);
        echo_effective(cmd->get_name(), opt);
        const bool needs_corpus = cmd->get_name() != "imcq-run" && cmd->get_name() != "ablate";
        if (needs_corpus && opt.corpus_path.empty())
            throw std::runtime_error("--corpus is required");
        if (cmd->get_name() == "ingest") return cmd_ingest(opt);
        auto prov = make_providers(opt);
        if (cmd->get_name() == "build-graph") return cmd_build_graph(opt, prov);
        if (cmd->get_name() == "sample") return cmd_sample(opt, prov);
        if (cmd->get_name() == "index") return cmd_index(opt, prov);
        if (cmd->get_name() == "retrieve") return cmd_retrieve(opt, prov);
        if (cmd->get_name() == "report") return cmd_report(opt, prov);
        if (cmd->get_name() == "generate") return cmd_generate(opt, prov);
        if (cmd->get_name() == "optimize") return cmd_optimize(opt, prov);
        if (cmd->get_name() == "imcq-build") return cmd_imcq_build(opt, prov);
        if (cmd->get_name() == "imcq-run") return cmd_imcq_run(opt, prov);
        if (cmd->get_name() == "score") return cmd_score(opt, prov);
        if (cmd->get_name() == "similarity") return cmd_similarity(opt, prov);
        if (cmd->get_name() == "project") return cmd_project(opt, prov);
        if (cmd->get_name() == "ablate") return cmd_ablate(opt, prov);
        throw std::runtime_error("unknown command");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
