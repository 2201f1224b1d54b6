#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "gywi/promptopt.hpp"
#include "gywi/providers.hpp"
#include "gywi/util.hpp"

using namespace gywi;
using promptopt::BatchStats;
using promptopt::OptError;
using promptopt::PromptTemplate;

namespace {

// Independent oracle for the t distribution: Simpson quadrature of the pdf,
// quantile by bisection on the quadrature CDF. Shares no code with the
// incomplete-beta implementation under test.
double t_pdf(double x, double df) {
    const double c = std::lgamma((df + 1.0) / 2.0) - std::lgamma(df / 2.0) -
                     0.5 * std::log(df * M_PI);
    return std::exp(c - (df + 1.0) / 2.0 * std::log1p(x * x / df));
}

double t_cdf_oracle(double x, double df) {
    // integrate pdf over [0, |x|] with composite Simpson
    const double a = 0.0, b = std::fabs(x);
    const int n = 20000;  // even
    const double h = (b - a) / n;
    double sum = t_pdf(a, df) + t_pdf(b, df);
    for (int i = 1; i < n; ++i) sum += t_pdf(a + i * h, df) * (i % 2 ? 4.0 : 2.0);
    const double half = sum * h / 3.0;
    return x >= 0 ? 0.5 + half : 0.5 - half;
}

double t_quantile_oracle(double p, double df) {
    double lo = 0.0, hi = 1.0;
    while (t_cdf_oracle(hi, df) < p) hi *= 2.0;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        (t_cdf_oracle(mid, df) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

BatchStats stats_of(double mean, double std_dev, std::size_t n) {
    BatchStats s;
    s.n_eval = n;
    s.mean = mean;
    s.std_dev = std_dev;
    s.se = std_dev / std::sqrt(static_cast<double>(n));
    return s;
}

corpus::PaperRecord topic(int i) {
    corpus::PaperRecord rec;
    rec.id = "t" + std::to_string(i);
    rec.title = "Topic " + std::to_string(i);
    rec.abstract_text = "Abstract " + std::to_string(i);
    rec.authors = {"Author"};
    rec.year = 2020;
    return rec;
}

}  // namespace

TEST_CASE("score vector mean and range validation") {
    CHECK(promptopt::mean_score({8, 8, 8, 8, 8}) == doctest::Approx(8.0));
    CHECK(promptopt::mean_score({9, 7, 8, 8, 8}) == doctest::Approx(8.0));
    CHECK(promptopt::mean_score({1, 1, 1, 1, 10}) == doctest::Approx(2.8));
    CHECK_THROWS_AS(promptopt::mean_score({0.5, 8, 8, 8, 8}), OptError);
    CHECK_THROWS_AS(promptopt::mean_score({8, 8, 8, 8, 11}), OptError);
}

TEST_CASE("t CDF matches the quadrature oracle") {
    for (double df : {1.0, 2.0, 5.0, 30.0, 49.0}) {
        for (double x : {-3.0, -0.7, 0.0, 0.4, 1.5, 2.5}) {
            CHECK(promptopt::student_t_cdf(x, df) ==
                  doctest::Approx(t_cdf_oracle(x, df)).epsilon(1e-8));
        }
    }
}

TEST_CASE("t critical values against the oracle and closed forms") {
    CHECK(promptopt::t_critical(49, 0.975) == doctest::Approx(2.009575).epsilon(1e-4));
    CHECK(promptopt::t_critical(49, 0.975) ==
          doctest::Approx(t_quantile_oracle(0.975, 49)).epsilon(1e-6));
    // df = 1 has the closed form tan(pi*(p - 0.5)).
    CHECK(promptopt::t_critical(1, 0.975) == doctest::Approx(12.7062).epsilon(1e-3));
    CHECK(promptopt::t_critical(1, 0.975) ==
          doctest::Approx(std::tan(M_PI * 0.475)).epsilon(1e-6));
    // df -> infinity approaches the normal quantile.
    CHECK(promptopt::t_critical(1e6, 0.975) == doctest::Approx(1.95996).epsilon(1e-3));

    CHECK_THROWS_AS(promptopt::t_critical(0.5, 0.975), OptError);
    CHECK_THROWS_AS(promptopt::t_critical(5, 0.4), OptError);
    CHECK_THROWS_AS(promptopt::t_critical(5, 1.0), OptError);
}

TEST_CASE("batch_stats hand-computed fixtures") {
    // 50 identical scores: zero variance, collapsed CI.
    const std::vector<double> constant(50, 8.0);
    auto s = promptopt::batch_stats(constant, 10, 5, 0.05);
    CHECK(s.n_eval == 50);
    CHECK(s.mean == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(s.std_dev == 0.0);
    CHECK(s.se == 0.0);
    CHECK(s.ci_low == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(s.ci_high == doctest::Approx(8.0).epsilon(1e-12));

    // {7, 9}: mean 8, std sqrt(2), SE 1, CI 8 +- t_1(0.975).
    s = promptopt::batch_stats({7.0, 9.0}, 2, 1, 0.05);
    CHECK(s.mean == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(s.std_dev == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(s.se == doctest::Approx(1.0).epsilon(1e-12));
    const double t1 = promptopt::t_critical(1, 0.975);
    CHECK(s.ci_low == doctest::Approx(8.0 - t1).epsilon(1e-9));
    CHECK(s.ci_high == doctest::Approx(8.0 + t1).epsilon(1e-9));

    // {2, 4, 6, 9}: mean 5.25, ss = 10.5625+1.5625+0.5625+14.0625 = 26.75,
    // std = sqrt(26.75/3), SE = std/2.
    s = promptopt::batch_stats({2.0, 4.0, 6.0, 9.0}, 4, 1, 0.05);
    CHECK(s.mean == doctest::Approx(5.25).epsilon(1e-12));
    CHECK(s.std_dev == doctest::Approx(std::sqrt(26.75 / 3.0)).epsilon(1e-12));
    CHECK(s.se == doctest::Approx(std::sqrt(26.75 / 3.0) / 2.0).epsilon(1e-12));
    const double t3 = promptopt::t_critical(3, 0.975);
    CHECK(s.ci_low == doctest::Approx(5.25 - t3 * s.se).epsilon(1e-9));
    CHECK(s.ci_high == doctest::Approx(5.25 + t3 * s.se).epsilon(1e-9));

    CHECK_THROWS_AS(promptopt::batch_stats({1.0, 2.0, 3.0}, 2, 2, 0.05), OptError);
    CHECK_THROWS_AS(promptopt::batch_stats({1.0}, 1, 1, 0.05), OptError);
    CHECK_THROWS_AS(promptopt::batch_stats({1.0, 2.0}, 2, 1, 1.5), OptError);
}

TEST_CASE("significant_improvement truth table") {
    const auto base = stats_of(8.0, 1.0, 50);
    CHECK_FALSE(promptopt::significant_improvement(base, base, 0.05));

    // Dominant: Welch statistic around 100.
    CHECK(promptopt::significant_improvement(stats_of(9.0, 0.1, 50), stats_of(7.0, 0.1, 50), 0.05));

    // Marginal: t = 0.05, p ~ 0.48.
    CHECK_FALSE(
        promptopt::significant_improvement(stats_of(8.01, 1.0, 50), stats_of(8.0, 1.0, 50), 0.05));

    // Zero-variance pairs: strict mean comparison.
    CHECK(promptopt::significant_improvement(stats_of(8.1, 0.0, 50), stats_of(8.0, 0.0, 50), 0.05));
    CHECK_FALSE(
        promptopt::significant_improvement(stats_of(8.0, 0.0, 50), stats_of(8.0, 0.0, 50), 0.05));

    // A worse candidate never passes, one- or two-sided.
    CHECK_FALSE(
        promptopt::significant_improvement(stats_of(7.0, 0.1, 50), stats_of(9.0, 0.1, 50), 0.05));
    CHECK_FALSE(promptopt::significant_improvement(stats_of(7.0, 0.1, 50), stats_of(9.0, 0.1, 50),
                                                   0.05, false));

    // Two-sided is more conservative than one-sided on the same gap.
    const auto cand = stats_of(8.3, 1.0, 50);
    const auto inc = stats_of(8.0, 1.0, 50);
    if (promptopt::significant_improvement(cand, inc, 0.05, false))
        CHECK(promptopt::significant_improvement(cand, inc, 0.05, true));
}

TEST_CASE("template validation enforces each placeholder exactly once") {
    auto tpl = PromptTemplate::default_template();
    CHECK_NOTHROW(tpl.validate());

    auto missing = tpl;
    missing.text.erase(missing.text.find("{chunks}"), 8);
    CHECK_THROWS_WITH_AS(missing.validate(), doctest::Contains("{chunks}"), OptError);

    auto doubled = tpl;
    doubled.text += "\n{title}";
    CHECK_THROWS_AS(doubled.validate(), OptError);

    PromptTemplate empty;
    CHECK_THROWS_AS(empty.validate(), OptError);
}

TEST_CASE("propose_prompt: mock proposal, version arithmetic, rejection") {
    providers::MockChatProvider chat(19);
    const auto v1 = PromptTemplate::default_template();
    std::vector<std::pair<PromptTemplate, BatchStats>> history = {{v1, stats_of(7.5, 0.5, 50)}};

    const auto v2 = promptopt::propose_prompt(history, chat);
    CHECK(v2.version == 2);
    CHECK_NOTHROW(v2.validate());
    CHECK(v2.text != v1.text);

    // history of 3 templates -> proposal version 4
    history.push_back({{v2.text, 2}, stats_of(7.6, 0.5, 50)});
    history.push_back({{v2.text + " ", 3}, stats_of(7.7, 0.5, 50)});
    CHECK(promptopt::propose_prompt(history, chat).version == 4);

    // A proposer that keeps dropping {chunks} is rejected after one retry.
    struct Dropper : providers::ChatProvider {
        int calls = 0;
        std::string chat(const std::vector<providers::ChatMessage>&) override {
            ++calls;
            return "broken template with only {title} {abstract} {graph_summary}";
        }
    } dropper;
    CHECK_THROWS_AS(promptopt::propose_prompt(history, dropper), OptError);
    CHECK(dropper.calls == 2);

    CHECK_THROWS_AS(promptopt::propose_prompt({}, chat), OptError);
}

namespace {

promptopt::OptimizeParams small_params(std::uint64_t seed, int max_rounds = 5) {
    promptopt::OptimizeParams p;
    p.n_topic = 3;
    p.r = 2;
    p.alpha = 0.05;
    p.max_rounds = max_rounds;
    p.seed = seed;
    return p;
}

std::vector<corpus::PaperRecord> topics(int n) {
    std::vector<corpus::PaperRecord> out;
    for (int i = 0; i < n; ++i) out.push_back(topic(i));
    return out;
}

}  // namespace

TEST_CASE("optimize: constant scorer keeps the initial template, 3 rounds total") {
    providers::MockChatProvider chat(3);
    promptopt::Scorer scorer = [](const PromptTemplate&, const corpus::PaperRecord&, int) {
        return 8.0;
    };
    const auto initial = PromptTemplate::default_template();
    const auto result = promptopt::optimize(initial, topics(6), scorer, chat, small_params(1));
    CHECK(result.history.size() == 3);  // baseline + two stale rounds
    CHECK(result.best.version == 1);
    CHECK(result.best.text == initial.text);
    CHECK(result.history[1].accepted == false);
    CHECK(result.history[2].stale_rounds == 2);
}

TEST_CASE("optimize: accepts exactly the scripted significant round") {
    providers::MockChatProvider chat(3);
    const std::map<int, double> reward = {{1, 8.0}, {2, 8.0}, {3, 9.5}, {4, 9.5}, {5, 9.5}, {6, 9.5}};
    promptopt::Scorer scorer = [&](const PromptTemplate& tpl, const corpus::PaperRecord&, int) {
        return reward.at(tpl.version);
    };
    const auto result = promptopt::optimize(PromptTemplate::default_template(), topics(6), scorer,
                                            chat, small_params(2, 8));
    // Round 3 is the only acceptance after the baseline; two stale rounds follow.
    REQUIRE(result.history.size() == 5);
    CHECK(result.history[0].accepted);
    CHECK_FALSE(result.history[1].accepted);
    CHECK(result.history[2].accepted);
    CHECK_FALSE(result.history[3].accepted);
    CHECK_FALSE(result.history[4].accepted);
    CHECK(result.best.version == 3);
    CHECK(result.best_stats.mean == doctest::Approx(9.5));
}

TEST_CASE("optimize: always-significant improvements run to max_rounds, monotone") {
    providers::MockChatProvider chat(3);
    promptopt::Scorer scorer = [](const PromptTemplate& tpl, const corpus::PaperRecord&, int) {
        return 5.0 + static_cast<double>(tpl.version);
    };
    const auto result = promptopt::optimize(PromptTemplate::default_template(), topics(6), scorer,
                                            chat, small_params(3, 5));
    REQUIRE(result.history.size() == 5);
    double prev = -1.0;
    for (const auto& rec : result.history) {
        CHECK(rec.accepted);
        CHECK(rec.stats.mean > prev);
        prev = rec.stats.mean;
    }
    CHECK(result.best.version == 5);
}

TEST_CASE("optimize is bit-reproducible and writes one audit line per round") {
    providers::MockChatProvider chat_a(3), chat_b(3);
    promptopt::Scorer scorer = [](const PromptTemplate& tpl, const corpus::PaperRecord& t, int rep) {
        return 5.0 + static_cast<double>((fnv1a64(tpl.text) ^ fnv1a64(t.id)) % 40) / 10.0 +
               0.01 * rep;
    };
    std::ostringstream log_a, log_b;
    const auto r1 = promptopt::optimize(PromptTemplate::default_template(), topics(8), scorer,
                                        chat_a, small_params(77, 6), &log_a);
    const auto r2 = promptopt::optimize(PromptTemplate::default_template(), topics(8), scorer,
                                        chat_b, small_params(77, 6), &log_b);
    CHECK(log_a.str() == log_b.str());
    CHECK(r1.best.text == r2.best.text);
    REQUIRE(r1.history.size() == r2.history.size());
    std::size_t lines = 0;
    std::istringstream in(log_a.str());
    std::string line;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == r1.history.size());
}

TEST_CASE("optimize parameter validation") {
    providers::MockChatProvider chat(3);
    promptopt::Scorer scorer = [](const PromptTemplate&, const corpus::PaperRecord&, int) {
        return 8.0;
    };
    auto params = small_params(1);
    params.max_rounds = 4;
    CHECK_THROWS_AS(
        promptopt::optimize(PromptTemplate::default_template(), topics(6), scorer, chat, params),
        OptError);
    params.max_rounds = 11;
    CHECK_THROWS_AS(
        promptopt::optimize(PromptTemplate::default_template(), topics(6), scorer, chat, params),
        OptError);
    params = small_params(1);
    CHECK_THROWS_AS(
        promptopt::optimize(PromptTemplate::default_template(), topics(2), scorer, chat, params),
        OptError);  // fewer topics than n_topic
}
