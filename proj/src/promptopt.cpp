#include "gywi/promptopt.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "gywi/util.hpp"

namespace gywi::promptopt {

using nlohmann::json;

const std::vector<std::string>& PromptTemplate::placeholders() {
    static const std::vector<std::string> names = {"{title}", "{abstract}", "{graph_summary}",
                                                   "{chunks}"};
    return names;
}

namespace {

std::size_t count_occurrences(const std::string& text, const std::string& token) {
    std::size_t count = 0;
    for (auto pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos + 1))
        ++count;
    return count;
}

}  // namespace

void PromptTemplate::validate() const {
    if (trim(text).empty()) throw OptError("prompt template text is empty");
    for (const auto& ph : placeholders()) {
        const auto n = count_occurrences(text, ph);
        if (n != 1)
            throw OptError("prompt template must contain " + ph + " exactly once (found " +
                           std::to_string(n) + ")");
    }
}

PromptTemplate PromptTemplate::default_template() {
    PromptTemplate t;
    t.version = 1;
    t.text =
        "You are an expert research innovator specializing in interdisciplinary synthesis. "
        "Generate a novel, high-impact research idea by combining the target paper with the "
        "retrieved context.\n"
        "\n"
        "<context>\n"
        "1. Target Paper:\n"
        "Title: {title}\n"
        "Abstract: {abstract}\n"
        "\n"
        "2. Conceptual Adjacencies (graphRAG synthesis):\n"
        "{graph_summary}\n"
        "\n"
        "3. Foundational Elements (RAG chunks):\n"
        "{chunks}\n"
        "</context>\n"
        "\n"
        "The idea must create synergy between the target paper and at least one adjacent concept, "
        "address an explicit limitation of the original work or an untapped application domain, "
        "and carry clear academic value. Be specific about methods and validation.\n"
        "\n"
        "Please structure your response using the following XML format:\n"
        "<topic>the research question</topic>\n"
        "<motivation>gap analysis grounded in the context</motivation>\n"
        "<novelty>2-3 concrete innovations</novelty>\n"
        "<method>implementation blueprint with at least 2 core steps</method>\n"
        "<difference>point-by-point comparison with the target paper</difference>\n"
        "<feasibility>resources, risks, and alternatives</feasibility>\n";
    return t;
}

void ScoreVector::validate() const {
    for (double v : {novelty, feasibility, clarity, relevance, significance})
        if (!(v >= 1.0 && v <= 10.0))
            throw OptError("score component out of range [1, 10]: " + std::to_string(v));
}

double mean_score(const ScoreVector& v) {
    v.validate();
    return (v.novelty + v.feasibility + v.clarity + v.relevance + v.significance) / 5.0;
}

namespace {

// Continued-fraction evaluation of the regularized incomplete beta function
// (modified Lentz).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;

    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

double betai(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

double student_t_cdf(double t, double df) {
    if (df < 1.0) throw OptError("student_t_cdf: df must be >= 1");
    const double x = df / (df + t * t);
    const double tail = 0.5 * betai(df / 2.0, 0.5, x);
    return t >= 0.0 ? 1.0 - tail : tail;
}

double t_critical(double df, double p) {
    if (df < 1.0) throw OptError("t_critical: df must be >= 1");
    if (!(p > 0.5 && p < 1.0)) throw OptError("t_critical: p must be in (0.5, 1)");

    double lo = 0.0, hi = 1.0;
    while (student_t_cdf(hi, df) < p) {
        hi *= 2.0;
        if (hi > 1e12) throw OptError("t_critical: quantile search did not bracket");
    }
    for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
        const double mid = 0.5 * (lo + hi);
        (student_t_cdf(mid, df) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

BatchStats batch_stats(const std::vector<double>& scores, std::size_t n_topic, std::size_t r,
                       double alpha) {
    if (scores.size() != n_topic * r)
        throw OptError("batch_stats: got " + std::to_string(scores.size()) + " scores, expected " +
                       std::to_string(n_topic) + " x " + std::to_string(r));
    if (scores.size() < 2) throw OptError("batch_stats: fewer than 2 scores");
    if (!(alpha > 0.0 && alpha < 1.0)) throw OptError("batch_stats: alpha must be in (0, 1)");

    BatchStats stats;
    stats.n_eval = scores.size();
    double sum = 0.0;
    for (double s : scores) sum += s;
    stats.mean = sum / static_cast<double>(stats.n_eval);
    double ss = 0.0;
    for (double s : scores) ss += (s - stats.mean) * (s - stats.mean);
    stats.std_dev = std::sqrt(ss / static_cast<double>(stats.n_eval - 1));
    stats.se = stats.std_dev / std::sqrt(static_cast<double>(stats.n_eval));
    const double t = t_critical(static_cast<double>(stats.n_eval - 1), 1.0 - alpha / 2.0);
    stats.ci_low = stats.mean - t * stats.se;
    stats.ci_high = stats.mean + t * stats.se;
    return stats;
}

bool significant_improvement(const BatchStats& candidate, const BatchStats& incumbent, double alpha,
                             bool one_sided) {
    const double var_c = candidate.se * candidate.se;
    const double var_i = incumbent.se * incumbent.se;
    const double denom_sq = var_c + var_i;
    if (denom_sq == 0.0) return candidate.mean > incumbent.mean;

    const double t = (candidate.mean - incumbent.mean) / std::sqrt(denom_sq);
    double df_num = denom_sq * denom_sq;
    double df_den = 0.0;
    if (var_c > 0.0) df_den += var_c * var_c / static_cast<double>(candidate.n_eval - 1);
    if (var_i > 0.0) df_den += var_i * var_i / static_cast<double>(incumbent.n_eval - 1);
    const double df = std::max(1.0, df_num / df_den);
    const double p_value = one_sided ? 1.0 - student_t_cdf(t, df)
                                     : 2.0 * (1.0 - student_t_cdf(std::fabs(t), df));
    return t > 0.0 && p_value < alpha;
}

PromptTemplate propose_prompt(const std::vector<std::pair<PromptTemplate, BatchStats>>& history,
                              providers::ChatProvider& provider) {
    if (history.empty()) throw OptError("propose_prompt: empty history");

    const auto best = std::max_element(history.begin(), history.end(), [](const auto& a, const auto& b) {
        return a.second.mean < b.second.mean;
    });
    int max_version = 0;
    for (const auto& [tpl, stats] : history) max_version = std::max(max_version, tpl.version);

    std::string prompt;
    prompt += "You are a prompt engineering assistant. Refine the prompt template below to raise "
              "its evaluation scores.\n\n";
    prompt += "Best template so far (version " + std::to_string(best->first.version) +
              ", mean score " + format_fixed(best->second.mean, 4) + ", CI [" +
              format_fixed(best->second.ci_low, 4) + ", " + format_fixed(best->second.ci_high, 4) +
              "]):\n";
    prompt += "<current_template>\n" + best->first.text + "\n</current_template>\n\n";
    prompt += "Score history:\n";
    for (const auto& [tpl, stats] : history)
        prompt += "- version " + std::to_string(tpl.version) + ": mean " +
                  format_fixed(stats.mean, 4) + ", std " + format_fixed(stats.std_dev, 4) + "\n";
    prompt += "\nStructural constraints:\n";
    prompt += "- Keep each of the placeholders {title}, {abstract}, {graph_summary}, {chunks} "
              "exactly once.\n";
    prompt += "- Keep the instruction that the response uses the XML tags topic, motivation, "
              "novelty, method, difference, feasibility.\n";
    prompt += "\nReturn only the refined template text.\n";

    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        PromptTemplate proposal{provider.chat_user(prompt), max_version + 1};
        try {
            proposal.validate();
            return proposal;
        } catch (const OptError& e) {
            last_error = e.what();
        }
    }
    throw OptError(std::string("proposed template rejected after retry: ") + last_error);
}

void OptimizeParams::validate() const {
    if (max_rounds < 5 || max_rounds > 10) throw OptError("optimize: max_rounds must be in [5, 10]");
    if (n_topic == 0 || r == 0) throw OptError("optimize: n_topic and r must be positive");
    if (!(alpha > 0.0 && alpha < 1.0)) throw OptError("optimize: alpha must be in (0, 1)");
}

namespace {

std::vector<double> evaluate_template(const PromptTemplate& tpl,
                                      const std::vector<corpus::PaperRecord>& topics,
                                      const Scorer& scorer, const OptimizeParams& params,
                                      int round) {
    SeededRng rng(stage_seed(params.seed, "optimize-round-" + std::to_string(round)));
    const auto picks = rng.sample_without_replacement(topics.size(), params.n_topic);
    std::vector<double> scores;
    scores.reserve(params.n_topic * params.r);
    for (std::size_t idx : picks)
        for (std::size_t rep = 0; rep < params.r; ++rep)
            scores.push_back(scorer(tpl, topics[idx], static_cast<int>(rep)));
    return scores;
}

void log_round(std::ostream* audit_log, const RoundRecord& rec) {
    if (!audit_log) return;
    *audit_log << json{{"round", rec.round},
                       {"version", rec.version},
                       {"n_eval", rec.stats.n_eval},
                       {"mean", rec.stats.mean},
                       {"std", rec.stats.std_dev},
                       {"se", rec.stats.se},
                       {"ci_low", rec.stats.ci_low},
                       {"ci_high", rec.stats.ci_high},
                       {"accepted", rec.accepted},
                       {"stale_rounds", rec.stale_rounds}}
                      .dump()
               << '\n';
}

}  // namespace

OptResult optimize(const PromptTemplate& initial, const std::vector<corpus::PaperRecord>& topics,
                   const Scorer& scorer, providers::ChatProvider& proposer,
                   const OptimizeParams& params, std::ostream* audit_log) {
    params.validate();
    initial.validate();
    if (topics.size() < params.n_topic)
        throw OptError("optimize: need at least n_topic topics (" + std::to_string(params.n_topic) +
                       "), got " + std::to_string(topics.size()));

    OptResult result;
    result.best = initial;

    // Round 1 establishes the baseline incumbent.
    auto scores = evaluate_template(initial, topics, scorer, params, 1);
    result.best_stats = batch_stats(scores, params.n_topic, params.r, params.alpha);
    result.evaluated.push_back({initial, result.best_stats});
    int stale_rounds = 0;
    result.history.push_back({1, initial.version, result.best_stats, true, stale_rounds});
    log_round(audit_log, result.history.back());

    for (int round = 2; round <= params.max_rounds; ++round) {
        PromptTemplate candidate = propose_prompt(result.evaluated, proposer);
        scores = evaluate_template(candidate, topics, scorer, params, round);
        const BatchStats stats = batch_stats(scores, params.n_topic, params.r, params.alpha);
        result.evaluated.push_back({candidate, stats});

        const bool accepted =
            significant_improvement(stats, result.best_stats, params.alpha, params.one_sided);
        if (accepted) {
            result.best = candidate;
            result.best_stats = stats;
            stale_rounds = 0;
        } else {
            ++stale_rounds;
        }
        result.history.push_back({round, candidate.version, stats, accepted, stale_rounds});
        log_round(audit_log, result.history.back());
        if (stale_rounds >= 2) break;
    }
    return result;
}

}  // namespace gywi::promptopt
