#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ragjam {

enum class LlmRole { victim, auxiliary, judge };

const char* role_name(LlmRole role);
LlmRole role_from_name(const std::string& name);

struct CompletionRequest {
    LlmRole role = LlmRole::victim;
    std::string prompt;
    double temperature = 0.0;
    int max_tokens = 1024;
    std::optional<std::int64_t> seed_hint;
};

struct CompletionResult {
    std::string text;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::int64_t latency_ms = 0;
    bool cached = false;
};

struct TokenScore {
    std::string token;
    double logprob = 0.0;
};

// What a backend returns for one raw call; the gateway layers caching,
// retry, rate limiting and accounting on top.
struct ProviderReply {
    std::string text;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

class Provider {
public:
    virtual ~Provider() = default;
    virtual ProviderReply complete(const CompletionRequest& req) = 0;
    virtual bool can_score() const { return false; }
    virtual std::vector<TokenScore> score(const std::string& text);
    virtual std::string id() const = 0;
};

// --- Scripted mock -----------------------------------------------------

enum class ExhaustionPolicy { error, repeat_last };

struct TranscriptEntry {
    std::string pattern;  // substring matched against the prompt; "" matches all
    std::string response;
    std::optional<std::int64_t> prompt_tokens;
    std::optional<std::int64_t> completion_tokens;
};

struct ScriptedTranscript {
    std::vector<TranscriptEntry> entries;
    ExhaustionPolicy exhaustion = ExhaustionPolicy::error;
};

// Deterministic replay provider. Each call consumes the first unconsumed
// entry whose pattern occurs in the prompt; on exhaustion the policy decides
// between an error and replaying the stream's last entry. The magic
// responses "<<UNAVAILABLE>>" and "<<REJECT>>" raise transient and
// non-retryable provider errors.
class ScriptedProvider : public Provider {
public:
    // logprob_mode: "hash" (default) derives each token's log-probability
    // from its FNV hash; "constant:<v>" returns v for every token.
    explicit ScriptedProvider(ScriptedTranscript transcript,
                              std::string logprob_mode = "hash");

    ProviderReply complete(const CompletionRequest& req) override;
    bool can_score() const override { return true; }
    std::vector<TokenScore> score(const std::string& text) override;
    std::string id() const override { return "scripted"; }

    // Deterministic hash-derived log-probability in [-3.0, -1.0).
    static double hash_logprob(const std::string& token);

private:
    ScriptedTranscript transcript_;
    std::vector<bool> consumed_;
    std::string logprob_mode_;
    std::mutex mu_;
};

// Loads {"role","pattern","response",...} JSON Lines; a line carrying
// "exhaustion_policy" sets the policy for every role in the file.
std::map<LlmRole, ScriptedTranscript> load_transcripts(const std::string& path);

// --- OpenAI-compatible HTTP backend ------------------------------------

struct HttpProviderConfig {
    std::string endpoint;  // e.g. https://api.openai.com
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key;
    int timeout_s = 60;
};

class OpenAiHttpProvider : public Provider {
public:
    explicit OpenAiHttpProvider(HttpProviderConfig config);
    ProviderReply complete(const CompletionRequest& req) override;
    std::string id() const override { return "openai:" + config_.model; }

private:
    HttpProviderConfig config_;
};

// --- Accounting, retry, rate limiting -----------------------------------

struct RoleUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::int64_t calls = 0;
    std::int64_t cache_hits = 0;
};

class TokenLedger {
public:
    void record_call(LlmRole role, std::int64_t prompt_tokens,
                     std::int64_t completion_tokens);
    void record_cache_hit(LlmRole role);

    RoleUsage usage(LlmRole role) const;
    std::int64_t total_tokens() const;
    std::map<std::string, RoleUsage> snapshot() const;

private:
    mutable std::mutex mu_;
    std::map<LlmRole, RoleUsage> usage_;
};

struct RetryPolicy {
    int max_retries = 3;             // retries after the first attempt
    int initial_backoff_ms = 1000;   // doubled per retry: 1s/2s/4s
};

// Token bucket, one per role. rpm == 0 disables limiting. The clock is
// injectable so tests can drive it without sleeping.
class RateLimiter {
public:
    using Clock = std::function<double()>;  // seconds, monotonic

    RateLimiter(double requests_per_minute, Clock clock = {});

    // Returns the wait in seconds imposed on this acquisition (0 when a
    // token was available) and consumes one token.
    double acquire();

private:
    double rpm_;
    double tokens_;
    double last_refill_;
    Clock clock_;
    std::mutex mu_;
};

struct GatewayConfig {
    RetryPolicy retry;
    std::map<LlmRole, double> rpm;   // absent role -> unlimited
    std::string cache_dir;           // "" disables the persistent cache
    bool cache_enabled = true;       // in-memory identity cache
    std::function<void(int /*ms*/)> sleeper;  // test hook; defaults to real sleep
};

struct CallLogEntry {
    LlmRole role;
    bool cached = false;
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::string prompt;
    std::string text;
    std::string attribution;  // owning (query, run) tag; "" when untagged
};

// Thread-local tag stamped onto every gateway call made while the scope is
// alive, so per-query token totals stay exact even with a worker pool.
class AttributionScope {
public:
    explicit AttributionScope(std::string tag);
    ~AttributionScope();

    AttributionScope(const AttributionScope&) = delete;
    AttributionScope& operator=(const AttributionScope&) = delete;

    static const std::string& current();

private:
    std::string previous_;
};

// Uniform access to the victim, auxiliary and judge backends. Safe for
// concurrent use; cache and ledger updates are atomic and dispatch is
// serialized per role by the rate limiter.
class Gateway {
public:
    explicit Gateway(GatewayConfig config = {});

    void set_provider(LlmRole role, std::shared_ptr<Provider> provider);
    bool has_provider(LlmRole role) const;
    std::string provider_id(LlmRole role) const;
    bool all_scripted() const;

    CompletionResult complete(const CompletionRequest& req);
    std::vector<TokenScore> score_tokens(LlmRole role, const std::string& text);

    const TokenLedger& ledger() const { return ledger_; }
    std::vector<CallLogEntry> call_log() const;

    // Per-role usage across all logged calls carrying the tag; unlike the
    // ledger this includes cache replays, so repeated runs account alike.
    std::map<std::string, RoleUsage> usage_for(const std::string& tag) const;

    static std::string cache_key(const CompletionRequest& req);

private:
    struct CachedReply {
        std::string text;
        std::int64_t prompt_tokens = 0;
        std::int64_t completion_tokens = 0;
    };

    void persist(const std::string& key, const CachedReply& reply);
    void load_cache_file();

    GatewayConfig config_;
    std::map<LlmRole, std::shared_ptr<Provider>> providers_;
    std::map<LlmRole, std::unique_ptr<RateLimiter>> limiters_;
    std::map<std::string, CachedReply> cache_;
    TokenLedger ledger_;
    std::vector<CallLogEntry> log_;
    mutable std::mutex mu_;
};

}  // namespace ragjam
