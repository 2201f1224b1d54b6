#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gywi/corpus.hpp"
#include "gywi/providers.hpp"

namespace gywi::promptopt {

struct OptError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The generation policy under optimization. The four placeholders must each
/// appear exactly once.
struct PromptTemplate {
    std::string text;
    int version = 1;

    void validate() const;

    static const std::vector<std::string>& placeholders();
    static PromptTemplate default_template();
};

struct ScoreVector {
    double novelty = 0, feasibility = 0, clarity = 0, relevance = 0, significance = 0;

    void validate() const;  // every component in [1, 10]
};

/// Mean of the five rubric components.
double mean_score(const ScoreVector& v);

struct BatchStats {
    std::size_t n_eval = 0;
    double mean = 0, std_dev = 0, se = 0, ci_low = 0, ci_high = 0;
};

/// Sample mean/std (n-1), SE = s/sqrt(n), two-sided (1-alpha) CI with the
/// Student's t critical value at n-1 degrees of freedom.
BatchStats batch_stats(const std::vector<double>& scores, std::size_t n_topic, std::size_t r,
                       double alpha);

/// CDF of Student's t distribution (regularized incomplete beta route).
double student_t_cdf(double t, double df);

/// Quantile of Student's t; |error| <= 1e-6.
double t_critical(double df, double p);

/// Welch two-sample test of candidate mean > incumbent mean at level alpha,
/// one-sided by default (two-sided on |t| when one_sided is false).
/// Degenerate zero-variance pairs fall back to strict mean comparison.
bool significant_improvement(const BatchStats& candidate, const BatchStats& incumbent, double alpha,
                             bool one_sided = true);

/// Asks the provider to refine the best-so-far template given its score
/// profile; proposals must keep all four placeholders (one retry, then error).
PromptTemplate propose_prompt(const std::vector<std::pair<PromptTemplate, BatchStats>>& history,
                              providers::ChatProvider& provider);

/// Scores one (template, topic, repetition) through the full
/// generate -> evaluate path; injected so the loop is testable with scripted
/// rewards.
using Scorer = std::function<double(const PromptTemplate&, const corpus::PaperRecord&, int rep)>;

struct OptimizeParams {
    std::size_t n_topic = 10;
    std::size_t r = 5;
    double alpha = 0.05;
    int max_rounds = 5;  // bounded to [5, 10]
    std::uint64_t seed = 0;
    bool one_sided = true;

    void validate() const;
};

struct RoundRecord {
    int round = 0;
    int version = 0;
    BatchStats stats;
    bool accepted = false;
    int stale_rounds = 0;
};

struct OptResult {
    PromptTemplate best;
    BatchStats best_stats;
    std::vector<RoundRecord> history;
    std::vector<std::pair<PromptTemplate, BatchStats>> evaluated;  // full audit, acceptance order
};

/// The optimization loop: round 1 evaluates the initial template, each later
/// round proposes a candidate and accepts it only on a statistically
/// significant improvement; stops at max_rounds or after two consecutive
/// non-improving rounds. `audit_log`, when set, receives one JSON line per round.
OptResult optimize(const PromptTemplate& initial, const std::vector<corpus::PaperRecord>& topics,
                   const Scorer& scorer, providers::ChatProvider& proposer,
                   const OptimizeParams& params, std::ostream* audit_log = nullptr);

}  // namespace gywi::promptopt
