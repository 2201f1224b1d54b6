#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gywi::providers {

struct ProviderError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ProviderConfig {
    std::string endpoint;      // e.g. http://host:port/v1
    std::string model;
    std::string api_key_env;   // name of the env var holding the key; never the key itself
    double timeout_s = 30.0;
    int max_retries = 3;
    int max_in_flight = 4;
    double backoff_base_s = 1.0;  // exponential, factor 2, jittered, capped at 30s

    void validate() const;
};

struct ChatMessage {
    std::string role;  // system | user | assistant
    std::string content;
};

/// Append-only record of every provider call. Thread-safe.
class AuditTrail {
public:
    explicit AuditTrail(std::string path);
    void record(const std::string& kind, std::uint64_t request_digest,
                std::uint64_t response_digest, int attempts, double latency_s);

private:
    std::string path_;
    std::mutex mu_;
};

class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual std::string chat(const std::vector<ChatMessage>& messages) = 0;

    std::string chat_user(const std::string& prompt) { return chat({{"user", prompt}}); }
};

class EmbedProvider {
public:
    virtual ~EmbedProvider() = default;
    virtual std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) = 0;

    std::vector<double> embed(const std::string& text) { return embed_batch({text}).front(); }
};

/// Bounded in-flight counter shared by the HTTP providers.
class InFlightLimiter {
public:
    explicit InFlightLimiter(int limit) : limit_(limit) {}
    void acquire();
    void release();

private:
    int limit_;
    int active_ = 0;
    std::mutex mu_;
    std::condition_variable cv_;
};

/// Chat-completions-style HTTP client (model + messages array in, first
/// choice's message content out). Works against any compatible endpoint.
class HttpChatProvider : public ChatProvider {
public:
    HttpChatProvider(ProviderConfig config, AuditTrail* audit = nullptr);
    std::string chat(const std::vector<ChatMessage>& messages) override;

private:
    ProviderConfig config_;
    AuditTrail* audit_;
    InFlightLimiter limiter_;
};

/// Embeddings HTTP client; POST {model, input:[...]} -> data[i].embedding.
class HttpEmbedProvider : public EmbedProvider {
public:
    HttpEmbedProvider(ProviderConfig config, AuditTrail* audit = nullptr);
    std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) override;

private:
    ProviderConfig config_;
    AuditTrail* audit_;
    InFlightLimiter limiter_;
};

/// Deterministic offline chat mock. Responses are a pure function of
/// (seed, prompt); scripted entries keyed by prompt digest take precedence.
/// Recognizes the pipeline's prompt shapes and emits structurally valid
/// replies (idea XML, graph report headings, two-section condensation,
/// scoring JSON, single-letter answers, template proposals).
class MockChatProvider : public ChatProvider {
public:
    explicit MockChatProvider(std::uint64_t seed) : seed_(seed) {}

    /// Registers a canned response for this exact prompt text.
    void script(const std::string& prompt, const std::string& response);

    std::string chat(const std::vector<ChatMessage>& messages) override;

private:
    std::uint64_t seed_;
    std::map<std::uint64_t, std::string> scripted_;
};

/// Deterministic offline embedder: hashed bag-of-tokens, unit-normalized.
/// Identical texts map to identical vectors; texts sharing tokens correlate.
class MockEmbedProvider : public EmbedProvider {
public:
    MockEmbedProvider(std::uint64_t seed, int dimension);
    std::vector<std::vector<double>> embed_batch(const std::vector<std::string>& texts) override;
    int dimension() const { return dimension_; }

private:
    std::vector<double> embed_one(const std::string& text) const;

    std::uint64_t seed_;
    int dimension_;
};

}  // namespace gywi::providers
