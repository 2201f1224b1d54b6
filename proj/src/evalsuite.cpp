#include "gywi/evalsuite.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "gywi/util.hpp"

namespace gywi::evalsuite {

using nlohmann::json;

namespace {
const std::vector<std::string> kOptionKeys = {"a", "b", "c", "d"};
}

void IMCQItem::validate() const {
    if (options.size() != 4) throw EvalError("IMCQ item must have exactly four options");
    for (const auto& key : kOptionKeys) {
        auto it = options.find(key);
        if (it == options.end() || trim(it->second).empty())
            throw EvalError("IMCQ item missing or empty option '" + key + "'");
    }
    if (!options.count(answer_option))
        throw EvalError("IMCQ item answer_option '" + answer_option + "' not among option keys");
}

const std::vector<std::string>& ScoreMatrix::dimensions() {
    static const std::vector<std::string> dims = {"Novelty", "Feasibility", "Clarity", "Relevance",
                                                  "Significance"};
    return dims;
}

double ScoreMatrix::system_mean(const std::string& system) const {
    auto it = scores.find(system);
    if (it == scores.end()) throw EvalError("no scores for system: " + system);
    double sum = 0.0;
    for (const auto& dim : dimensions()) sum += it->second.at(dim);
    return sum / static_cast<double>(dimensions().size());
}

std::string extract_motivation(providers::ChatProvider& provider, const PaperRecord& paper) {
    if (paper.abstract_text.empty())
        throw EvalError("extract_motivation: paper " + paper.id + " has no abstract");
    std::string prompt;
    prompt += "You are reading a research paper. Extract the core research motivation of the paper "
              "as one self-contained paragraph: what gap or problem drives the work. Do not "
              "describe the method or the results.\n\n";
    prompt += "<title>" + paper.title + "</title>\n";
    prompt += "<abstract>" + paper.abstract_text + "</abstract>\n";
    const std::string motivation = trim(provider.chat_user(prompt));
    if (motivation.empty()) throw EvalError("extract_motivation: provider returned empty text");
    return motivation;
}

std::vector<std::string> pick_distractors(const std::vector<std::pair<std::string, std::string>>& pool,
                                          const std::string& correct,
                                          const std::string& correct_source_id,
                                          providers::EmbedProvider& embedder, std::size_t count) {
    std::vector<std::pair<std::string, std::string>> eligible;
    for (const auto& entry : pool)
        if (entry.first != correct_source_id) eligible.push_back(entry);
    if (eligible.size() < count)
        throw EvalError("distractor pool too small: " + std::to_string(eligible.size()) +
                        " eligible, need " + std::to_string(count));

    std::vector<std::string> texts = {correct};
    for (const auto& entry : eligible) texts.push_back(entry.second);
    const auto vectors = embedder.embed_batch(texts);

    std::vector<std::pair<double, std::size_t>> ranked;  // (-score used via custom sort)
    for (std::size_t i = 0; i < eligible.size(); ++i)
        ranked.push_back({retrieval::cosine(vectors[0], vectors[i + 1]), i});
    std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return eligible[a.second].first < eligible[b.second].first;
    });

    std::vector<std::string> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(eligible[ranked[i].second].second);
    return out;
}

std::vector<IMCQItem> build_imcq(const std::vector<PaperRecord>& papers,
                                 const std::vector<std::pair<std::string, std::string>>& pool,
                                 providers::ChatProvider& chat, providers::EmbedProvider& embedder,
                                 std::uint64_t seed) {
    std::vector<IMCQItem> items;
    int index = 0;
    for (const auto& paper : papers) {
        const std::string correct = extract_motivation(chat, paper);
        const auto distractors = pick_distractors(pool, correct, paper.id, embedder);

        std::vector<std::string> texts = {correct, distractors[0], distractors[1], distractors[2]};
        std::vector<std::size_t> order = {0, 1, 2, 3};
        SeededRng rng(stage_seed(seed, "imcq-" + paper.id));
        rng.shuffle(order);

        IMCQItem item;
        item.index = index++;
        item.title = paper.title;
        item.id = paper.id;
        item.abstract_text = paper.abstract_text;
        for (std::size_t slot = 0; slot < 4; ++slot) {
            item.options[kOptionKeys[slot]] = texts[order[slot]];
            if (order[slot] == 0) item.answer_option = kOptionKeys[slot];
        }
        item.validate();
        items.push_back(std::move(item));
    }
    return items;
}

AnswerStrategy answer_strategy_from_name(const std::string& name) {
    if (name == "embed-match") return AnswerStrategy::EmbedMatch;
    if (name == "llm-choice") return AnswerStrategy::LlmChoice;
    throw EvalError("unknown answer strategy: " + name);
}

std::string answer_strategy_name(AnswerStrategy s) {
    return s == AnswerStrategy::EmbedMatch ? "embed-match" : "llm-choice";
}

IMCQResult answer_imcq(const IMCQItem& item, const IdeaRecord& generated_idea,
                       AnswerStrategy strategy, providers::ChatProvider& chat,
                       providers::EmbedProvider& embedder) {
    item.validate();
    std::string chosen;
    if (strategy == AnswerStrategy::EmbedMatch) {
        if (trim(generated_idea.motivation).empty())
            throw EvalError("embed-match requires a nonempty generated motivation");
        std::vector<std::string> texts = {generated_idea.motivation};
        for (const auto& key : kOptionKeys) texts.push_back(item.options.at(key));
        const auto vectors = embedder.embed_batch(texts);
        double best = -2.0;
        for (std::size_t i = 0; i < kOptionKeys.size(); ++i) {
            const double score = retrieval::cosine(vectors[0], vectors[i + 1]);
            if (score > best) {  // ties keep the earlier (ascending) key
                best = score;
                chosen = kOptionKeys[i];
            }
        }
    } else {
        std::string prompt;
        prompt += "You are answering a multiple-choice question about a research paper's true "
                  "motivation. Answer with a single lowercase letter (a, b, c, or d) and nothing "
                  "else.\n\n";
        prompt += "Paper title: \"" + item.title + "\"\n\n";
        prompt += "A research idea generated for this paper states the motivation as:\n" +
                  generated_idea.motivation + "\n\nOptions:\n";
        for (const auto& key : kOptionKeys) prompt += key + ": " + item.options.at(key) + "\n";

        for (int attempt = 0; attempt < 2 && chosen.empty(); ++attempt) {
            const std::string reply = to_lower(trim(chat.chat_user(prompt)));
            if (reply.size() == 1 && reply[0] >= 'a' && reply[0] <= 'd') chosen = reply;
        }
        if (chosen.empty()) throw EvalError("llm-choice reply was not a single letter a-d");
    }
    return {item.index, chosen, chosen == item.answer_option};
}

double accuracy(const std::vector<IMCQResult>& results) {
    if (results.empty()) throw EvalError("accuracy of empty result list");
    std::size_t correct = 0;
    for (const auto& r : results) correct += r.correct ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(results.size());
}

std::string render_eval_prompt(const PaperRecord& target,
                               const std::vector<std::pair<std::string, IdeaRecord>>& labeled) {
    const std::size_t n = labeled.size();
    std::string labels_json = "[";
    for (std::size_t i = 0; i < n; ++i)
        labels_json += std::string(i ? "," : "") + "\"" + labeled[i].first + "\"";
    labels_json += "]";

    std::string prompt;
    prompt += "You are a strict research evaluation expert.\n\n";
    prompt += "Here are " + std::to_string(n) + " research ideas under the same topic: \"" +
              target.title + "\", abstract: \"" + target.abstract_text + "\".\n\n";
    prompt += "Each idea includes: Motivation, Novelty, Method, Difference, and Feasibility.\n\n";
    prompt += "Your task is to evaluate these " + std::to_string(n) +
              " ideas (individually) on each of the following dimensions:\n";
    for (const auto& dim : ScoreMatrix::dimensions()) prompt += "- " + dim + "\n";
    prompt += "\nScore each idea on a scale from 1 to 10 (10 = best, 1 = worst) for **each** "
              "dimension.\n\n";
    prompt += "Respond ONLY in **valid JSON format** like this (no markdown, no explanations):\n\n";
    prompt += "{\n  \"Novelty\": {\n    \"" + labeled.front().first + "\": 9\n  },\n  ...\n}\n\n";
    prompt += "Only use exact model names from this list: " + labels_json + "\n\n";
    prompt += "Here are the " + std::to_string(n) + " ideas:\n";
    for (const auto& [label, idea] : labeled) {
        prompt += label + ":\n";
        prompt += "Motivation: " + idea.motivation + "\n";
        prompt += "Novelty: " + idea.novelty + "\n";
        prompt += "Method: " + idea.method + "\n";
        prompt += "Difference: " + idea.difference + "\n";
        prompt += "Feasibility: " + idea.feasibility + "\n\n";
    }
    return prompt;
}

namespace {

ScoreMatrix parse_score_response(const std::string& response,
                                 const std::vector<std::pair<std::string, std::string>>& label_to_system) {
    json j;
    try {
        j = json::parse(response);
    } catch (const json::exception& e) {
        throw EvalError(std::string("score response is not valid JSON: ") + e.what());
    }
    ScoreMatrix matrix;
    for (const auto& dim : ScoreMatrix::dimensions()) {
        if (!j.contains(dim)) throw EvalError("score response missing dimension: " + dim);
        for (const auto& [label, system] : label_to_system) {
            if (!j[dim].contains(label))
                throw EvalError("score response missing system '" + label + "' in " + dim);
            const double v = j[dim][label].get<double>();
            if (!(v >= 1.0 && v <= 10.0))
                throw EvalError("score out of range [1, 10]: " + std::to_string(v));
            matrix.scores[system][dim] = v;
        }
    }
    return matrix;
}

}  // namespace

ScoreMatrix score_ideas(const std::map<std::string, IdeaRecord>& ideas, const PaperRecord& target,
                        providers::ChatProvider& provider, std::uint64_t seed) {
    if (ideas.size() < 2 || ideas.size() > 5)
        throw EvalError("score_ideas handles 2-5 systems, got " + std::to_string(ideas.size()));

    // Blind labels: the judge sees shuffled A-E, never the system names.
    std::vector<std::string> systems;
    for (const auto& [name, idea] : ideas) systems.push_back(name);
    SeededRng rng(stage_seed(seed, "blind-labels"));
    rng.shuffle(systems);

    static const std::vector<std::string> kLabels = {"A", "B", "C", "D", "E"};
    std::vector<std::pair<std::string, IdeaRecord>> labeled;
    std::vector<std::pair<std::string, std::string>> label_to_system;
    for (std::size_t i = 0; i < systems.size(); ++i) {
        labeled.push_back({kLabels[i], ideas.at(systems[i])});
        label_to_system.push_back({kLabels[i], systems[i]});
    }

    const std::string prompt = render_eval_prompt(target, labeled);
    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        try {
            return parse_score_response(provider.chat_user(prompt), label_to_system);
        } catch (const EvalError& e) {
            last_error = e.what();
        }
    }
    throw EvalError("score response invalid after retry: " + last_error);
}

std::pair<double, double> similarity_study(const Corpus& corpus,
                                           const authorgraph::CoAuthorGraph& graph,
                                           providers::EmbedProvider& embedder, std::uint64_t seed,
                                           std::size_t max_pairs) {
    const auto& nodes = graph.nodes();
    const std::size_t n = nodes.size();

    std::vector<std::pair<int, int>> co_pairs, non_pairs;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& nbrs = graph.neighbors(static_cast<int>(i));
        for (std::size_t j = i + 1; j < n; ++j) {
            if (nbrs.count(static_cast<int>(j)))
                co_pairs.push_back({static_cast<int>(i), static_cast<int>(j)});
            else
                non_pairs.push_back({static_cast<int>(i), static_cast<int>(j)});
        }
    }
    if (co_pairs.empty() || non_pairs.empty())
        throw EvalError("similarity_study needs at least one co-author pair and one non-pair");

    const std::size_t k = std::min({max_pairs, co_pairs.size(), non_pairs.size()});
    SeededRng rng(stage_seed(seed, "similarity-study"));
    auto pick = [&](const std::vector<std::pair<int, int>>& pairs) {
        std::vector<std::pair<int, int>> out;
        for (std::size_t idx : rng.sample_without_replacement(pairs.size(), k))
            out.push_back(pairs[idx]);
        return out;
    };
    const auto co_sample = pick(co_pairs);
    const auto non_sample = pick(non_pairs);

    // Titles per author, then one embedding batch over the distinct titles.
    std::map<corpus::AuthorId, std::vector<std::string>> author_titles;
    for (const auto& id : corpus.ids()) {
        const auto& rec = corpus.get(id);
        for (const auto& a : rec.normalized_authors()) author_titles[a].push_back(rec.title);
    }
    std::map<std::string, std::size_t> title_index;
    std::vector<std::string> titles;
    for (const auto& sample : {co_sample, non_sample})
        for (const auto& [i, j] : sample)
            for (int node : {i, j})
                for (const auto& t : author_titles[nodes[static_cast<std::size_t>(node)]])
                    if (!title_index.count(t)) {
                        title_index[t] = titles.size();
                        titles.push_back(t);
                    }
    const auto vectors = embedder.embed_batch(titles);

    auto group_mean = [&](const std::vector<std::pair<int, int>>& sample) {
        double total = 0.0;
        std::size_t pairs_counted = 0;
        for (const auto& [i, j] : sample) {
            const auto& ti = author_titles[nodes[static_cast<std::size_t>(i)]];
            const auto& tj = author_titles[nodes[static_cast<std::size_t>(j)]];
            double sum = 0.0;
            std::size_t cnt = 0;
            for (const auto& a : ti)
                for (const auto& b : tj) {
                    sum += retrieval::cosine(vectors[title_index[a]], vectors[title_index[b]]);
                    ++cnt;
                }
            if (cnt > 0) {
                total += sum / static_cast<double>(cnt);
                ++pairs_counted;
            }
        }
        if (pairs_counted == 0) throw EvalError("similarity_study: no title pairs in group");
        return total / static_cast<double>(pairs_counted);
    };
    return {group_mean(co_sample), group_mean(non_sample)};
}

Projection2D pca_2d(const std::vector<std::vector<double>>& vectors) {
    if (vectors.size() < 2) throw EvalError("pca_2d needs at least 2 vectors");
    const std::size_t n = vectors.size();
    const std::size_t d = vectors.front().size();
    for (const auto& v : vectors)
        if (v.size() != d) throw EvalError("pca_2d: inconsistent vector dimensions");

    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = vectors[i][j];
    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;

    const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw EvalError("pca_2d: eigendecomposition failed");

    // Eigenvalues ascend; take the last two columns, largest first.
    Eigen::MatrixXd components(static_cast<Eigen::Index>(d), 2);
    for (int c = 0; c < 2; ++c) {
        const Eigen::Index col = static_cast<Eigen::Index>(d) - 1 - c;
        Eigen::VectorXd v = col >= 0 ? solver.eigenvectors().col(col).eval()
                                     : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d)).eval();
        Eigen::Index max_idx = 0;
        v.cwiseAbs().maxCoeff(&max_idx);
        if (v(max_idx) < 0) v = -v;
        components.col(c) = v;
    }

    const Eigen::MatrixXd projected = x * components;
    Projection2D out;
    for (std::size_t i = 0; i < n; ++i)
        out.points.push_back({projected(static_cast<Eigen::Index>(i), 0),
                              projected(static_cast<Eigen::Index>(i), 1), "", ""});
    return out;
}

namespace {

// Perplexity-matched conditional affinities for one point.
void conditional_affinities(const Eigen::MatrixXd& d2, Eigen::Index i, double log_perplexity,
                            Eigen::VectorXd& row) {
    const Eigen::Index n = d2.rows();
    double beta = 1.0, beta_lo = 0.0, beta_hi = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 64; ++iter) {
        double sum = 0.0, weighted = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) {
                row(j) = 0.0;
                continue;
            }
            row(j) = std::exp(-beta * d2(i, j));
            sum += row(j);
            weighted += d2(i, j) * row(j);
        }
        if (sum <= 0.0) {
            beta = beta_lo;  // bandwidth collapsed; fall back to the widest kernel tried
            continue;
        }
        const double entropy = std::log(sum) + beta * weighted / sum;
        const double diff = entropy - log_perplexity;
        if (std::fabs(diff) < 1e-7) break;
        if (diff > 0) {
            beta_lo = beta;
            beta = std::isinf(beta_hi) ? beta * 2.0 : 0.5 * (beta_lo + beta_hi);
        } else {
            beta_hi = beta;
            beta = 0.5 * (beta_lo + beta_hi);
        }
    }
    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) sum += row(j);
    if (sum > 0.0) row /= sum;
}

double kl_divergence(const Eigen::MatrixXd& p, const Eigen::MatrixXd& y) {
    const Eigen::Index n = p.rows();
    Eigen::MatrixXd num(n, n);
    double z = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j) {
                num(i, j) = 0.0;
                continue;
            }
            const double dx = y(i, 0) - y(j, 0), dy = y(i, 1) - y(j, 1);
            num(i, j) = 1.0 / (1.0 + dx * dx + dy * dy);
            z += num(i, j);
        }
    double kl = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            if (i == j || p(i, j) <= 0.0) continue;
            const double q = std::max(num(i, j) / z, 1e-12);
            kl += p(i, j) * std::log(p(i, j) / q);
        }
    return kl;
}

}  // namespace

Projection2D tsne_2d(const std::vector<std::vector<double>>& vectors, double perplexity,
                     int iterations, std::uint64_t seed) {
    const std::size_t n_sz = vectors.size();
    if (n_sz > 2000) throw EvalError("tsne_2d: exact variant is limited to n <= 2000");
    if (!(perplexity >= 3.0 && perplexity < static_cast<double>(n_sz) / 3.0))
        throw EvalError("tsne_2d: perplexity infeasible for n = " + std::to_string(n_sz));
    if (iterations < 1) throw EvalError("tsne_2d: iterations must be >= 1");
    const Eigen::Index n = static_cast<Eigen::Index>(n_sz);
    const std::size_t d = vectors.front().size();
    for (const auto& v : vectors)
        if (v.size() != d) throw EvalError("tsne_2d: inconsistent vector dimensions");

    Eigen::MatrixXd d2(n, n);
    double max_d2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = vectors[static_cast<std::size_t>(i)][k] -
                                    vectors[static_cast<std::size_t>(j)][k];
                s += diff * diff;
            }
            d2(i, j) = s;
            max_d2 = std::max(max_d2, s);
        }

    Projection2D out;
    if (max_d2 <= 1e-18) {
        out.degenerate = true;
        for (Eigen::Index i = 0; i < n; ++i) out.points.push_back({0.0, 0.0, "", ""});
        return out;
    }

    // Symmetrized, normalized affinities.
    Eigen::MatrixXd cond(n, n);
    Eigen::VectorXd row(n);
    const double log_perp = std::log(perplexity);
    for (Eigen::Index i = 0; i < n; ++i) {
        conditional_affinities(d2, i, log_perp, row);
        cond.row(i) = row;
    }
    Eigen::MatrixXd p = (cond + cond.transpose()) / (2.0 * static_cast<double>(n));
    p = p.cwiseMax(1e-12);
    p.diagonal().setZero();

    // Seeded small gaussian init.
    SeededRng rng(seed);
    Eigen::MatrixXd y(n, 2);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int c = 0; c < 2; ++c) {
            const double u1 = std::max(rng.unit(), 1e-12);
            const double u2 = rng.unit();
            y(i, c) = 1e-4 * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        }

    out.initial_kl = kl_divergence(p, y);

    const int exaggeration_iters = std::min(100, iterations / 2);
    Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(n, 2);
    Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);
    const double learning_rate = 200.0;

    for (int t = 0; t < iterations; ++t) {
        const double exaggeration = t < exaggeration_iters ? 4.0 : 1.0;

        Eigen::MatrixXd num(n, n);
        double z = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i == j) {
                    num(i, j) = 0.0;
                    continue;
                }
                const double dx = y(i, 0) - y(j, 0), dy = y(i, 1) - y(j, 1);
                num(i, j) = 1.0 / (1.0 + dx * dx + dy * dy);
                z += num(i, j);
            }
        z = std::max(z, 1e-12);

        Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(n, 2);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                if (i == j) continue;
                const double q = std::max(num(i, j) / z, 1e-12);
                const double mult = 4.0 * (exaggeration * p(i, j) - q) * num(i, j);
                grad(i, 0) += mult * (y(i, 0) - y(j, 0));
                grad(i, 1) += mult * (y(i, 1) - y(j, 1));
            }

        const double momentum = t < 250 ? 0.5 : 0.8;
        for (Eigen::Index i = 0; i < n; ++i)
            for (int c = 0; c < 2; ++c) {
                const bool same_sign = (grad(i, c) > 0) == (velocity(i, c) > 0);
                gains(i, c) = same_sign ? std::max(gains(i, c) * 0.8, 0.01) : gains(i, c) + 0.2;
                velocity(i, c) = momentum * velocity(i, c) - learning_rate * gains(i, c) * grad(i, c);
                y(i, c) += velocity(i, c);
            }
        y.rowwise() -= y.colwise().mean();  // keep the embedding centered
    }

    out.final_kl = kl_divergence(p, y);
    for (Eigen::Index i = 0; i < n; ++i) out.points.push_back({y(i, 0), y(i, 1), "", ""});
    return out;
}

std::vector<AblationRow> ablation_run(const std::vector<PipelineConfig>& configs,
                                      const std::vector<IMCQItem>& items, const ItemRunner& runner) {
    if (configs.empty()) throw EvalError("ablation_run: no configs");
    if (items.empty()) throw EvalError("ablation_run: no IMCQ items");

    std::vector<AblationRow> rows;
    for (const auto& config : configs) {
        std::vector<IMCQResult> results;
        results.reserve(items.size());
        for (const auto& item : items) results.push_back(runner(config, item));
        AblationRow row;
        row.config = config.name;
        row.accuracy = accuracy(results);
        row.delta = rows.empty() ? 0.0 : row.accuracy - rows.back().accuracy;
        rows.push_back(row);
    }
    return rows;
}

void save_imcq(const std::vector<IMCQItem>& items, const std::string& path) {
    json arr = json::array();
    for (const auto& item : items) {
        item.validate();
        arr.push_back({{"index", item.index},
                       {"title", item.title},
                       {"id", item.id},
                       {"abstract", item.abstract_text},
                       {"question",
                        {{"a", item.options.at("a")},
                         {"b", item.options.at("b")},
                         {"c", item.options.at("c")},
                         {"d", item.options.at("d")}}},
                       {"answer_option", item.answer_option}});
    }
    std::ofstream out(path);
    if (!out) throw EvalError("cannot write IMCQ file: " + path);
    out << arr.dump(2) << '\n';
}

std::vector<IMCQItem> load_imcq(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EvalError("cannot read IMCQ file: " + path);
    json arr;
    try {
        arr = json::parse(in);
    } catch (const json::exception& e) {
        throw EvalError("malformed IMCQ file " + path + ": " + e.what());
    }
    std::vector<IMCQItem> items;
    for (const auto& j : arr) {
        IMCQItem item;
        try {
            item.index = j.at("index").get<int>();
            item.title = j.at("title").get<std::string>();
            item.id = j.at("id").is_string() ? j.at("id").get<std::string>()
                                             : j.at("id").dump();  // tolerate numeric ids
            item.abstract_text = j.at("abstract").get<std::string>();
            for (const auto& key : kOptionKeys)
                item.options[key] = j.at("question").at(key).get<std::string>();
            item.answer_option = j.at("answer_option").get<std::string>();
        } catch (const json::exception& e) {
            throw EvalError("IMCQ schema error in " + path + ": " + e.what());
        }
        item.validate();
        items.push_back(std::move(item));
    }
    return items;
}

}  // namespace gywi::evalsuite
