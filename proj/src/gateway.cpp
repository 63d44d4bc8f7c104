#include "ragjam/gateway.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include "ragjam/error.hpp"
#include "ragjam/text.hpp"

namespace ragjam {

using nlohmann::json;

const char* role_name(LlmRole role) {
    switch (role) {
        case LlmRole::victim: return "victim";
        case LlmRole::auxiliary: return "auxiliary";
        case LlmRole::judge: return "judge";
    }
    return "victim";
}

LlmRole role_from_name(const std::string& name) {
    if (name == "victim") return LlmRole::victim;
    if (name == "auxiliary") return LlmRole::auxiliary;
    if (name == "judge") return LlmRole::judge;
    throw Error(ErrorCode::malformed_input, "unknown role '" + name + "'");
}

std::vector<TokenScore> Provider::score(const std::string&) {
    throw Error(ErrorCode::capability_missing,
                "provider '" + id() + "' cannot score tokens");
}

// --- ScriptedProvider ----------------------------------------------------

ScriptedProvider::ScriptedProvider(ScriptedTranscript transcript,
                                   std::string logprob_mode)
    : transcript_(std::move(transcript)),
      consumed_(transcript_.entries.size(), false),
      logprob_mode_(std::move(logprob_mode)) {}

namespace {

std::int64_t approx_tokens(const std::string& text) {
    return static_cast<std::int64_t>(tokenize_ws(text).size());
}

void raise_magic(const std::string& response) {
    if (response == "<<UNAVAILABLE>>")
        throw TransientError(ErrorCode::provider_unavailable,
                             "scripted transient fault");
    if (response == "<<REJECT>>")
        throw Error(ErrorCode::provider_rejected, "scripted rejection");
}

}  // namespace

ProviderReply ScriptedProvider::complete(const CompletionRequest& req) {
    std::lock_guard<std::mutex> lock(mu_);
    const TranscriptEntry* hit = nullptr;
    for (std::size_t i = 0; i < transcript_.entries.size(); ++i) {
        if (consumed_[i]) continue;
        const auto& entry = transcript_.entries[i];
        if (entry.pattern.empty() ||
            req.prompt.find(entry.pattern) != std::string::npos) {
            consumed_[i] = true;
            hit = &entry;
            break;
        }
    }
    if (hit == nullptr) {
        if (transcript_.exhaustion == ExhaustionPolicy::repeat_last &&
            !transcript_.entries.empty()) {
            hit = &transcript_.entries.back();
        } else {
            throw Error(ErrorCode::generation_failure,
                        "scripted transcript exhausted (prompt head: " +
                            req.prompt.substr(0, 60) + ")");
        }
    }
    raise_magic(hit->response);
    ProviderReply reply;
    reply.text = hit->response;
    reply.prompt_tokens = hit->prompt_tokens.value_or(approx_tokens(req.prompt));
    reply.completion_tokens =
        hit->completion_tokens.value_or(approx_tokens(hit->response));
    return reply;
}

double ScriptedProvider::hash_logprob(const std::string& token) {
    // Spread tokens across [-3.0, -1.0) so perplexities vary but replay
    // exactly.
    return -1.0 - static_cast<double>(fnv1a64(token) % 2000) / 1000.0;
}

std::vector<TokenScore> ScriptedProvider::score(const std::string& text) {
    std::vector<TokenScore> scores;
    double constant = 0.0;
    bool use_constant = false;
    if (logprob_mode_.rfind("constant:", 0) == 0) {
        use_constant = true;
        constant = std::stod(logprob_mode_.substr(9));
    }
    for (const auto& tok : tokenize_ws(text)) {
        scores.push_back({tok, use_constant ? constant : hash_logprob(tok)});
    }
    return scores;
}

std::map<LlmRole, ScriptedTranscript> load_transcripts(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::io_failure, "cannot open " + path);
    std::map<LlmRole, ScriptedTranscript> out;
    std::string line;
    std::size_t lineno = 0;
    ExhaustionPolicy policy = ExhaustionPolicy::error;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw Error(ErrorCode::malformed_input,
                        path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (j.contains("exhaustion_policy")) {
            const auto p = j["exhaustion_policy"].get<std::string>();
            if (p == "error") policy = ExhaustionPolicy::error;
            else if (p == "repeat_last") policy = ExhaustionPolicy::repeat_last;
            else
                throw Error(ErrorCode::malformed_input,
                            "unknown exhaustion policy '" + p + "'");
            continue;
        }
        TranscriptEntry entry;
        LlmRole role;
        try {
            role = role_from_name(j.at("role").get<std::string>());
            entry.pattern = j.value("pattern", std::string{});
            entry.response = j.at("response").get<std::string>();
        } catch (const json::exception& e) {
            throw Error(ErrorCode::malformed_input,
                        path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (j.contains("prompt_tokens"))
            entry.prompt_tokens = j["prompt_tokens"].get<std::int64_t>();
        if (j.contains("completion_tokens"))
            entry.completion_tokens = j["completion_tokens"].get<std::int64_t>();
        out[role].entries.push_back(std::move(entry));
    }
    for (auto& [role, transcript] : out) transcript.exhaustion = policy;
    return out;
}

// --- OpenAiHttpProvider ---------------------------------------------------
// Implemented in http_provider.cpp to keep the heavyweight HTTP header out
// of every translation unit.

// --- TokenLedger -----------------------------------------------------------

void TokenLedger::record_call(LlmRole role, std::int64_t prompt_tokens,
                              std::int64_t completion_tokens) {
    std::lock_guard<std::mutex> lock(mu_);
    auto& u = usage_[role];
    u.prompt_tokens += prompt_tokens;
    u.completion_tokens += completion_tokens;
    u.calls += 1;
}

void TokenLedger::record_cache_hit(LlmRole role) {
    std::lock_guard<std::mutex> lock(mu_);
    usage_[role].cache_hits += 1;
}

RoleUsage TokenLedger::usage(LlmRole role) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = usage_.find(role);
    return it == usage_.end() ? RoleUsage{} : it->second;
}

std::int64_t TokenLedger::total_tokens() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::int64_t total = 0;
    for (const auto& [role, u] : usage_)
        total += u.prompt_tokens + u.completion_tokens;
    return total;
}

std::map<std::string, RoleUsage> TokenLedger::snapshot() const {
    std::lock_guard<std::mutex> lock(mu_);
    std::map<std::string, RoleUsage> out;
    for (const auto& [role, u] : usage_) out[role_name(role)] = u;
    return out;
}

// --- RateLimiter ------------------------------------------------------------

namespace {

double monotonic_seconds() {
    using namespace std::chrono;
    return duration<double>(steady_clock::now().time_since_epoch()).count();
}

}  // namespace

RateLimiter::RateLimiter(double requests_per_minute, Clock clock)
    : rpm_(requests_per_minute),
      tokens_(requests_per_minute > 0 ? requests_per_minute : 0.0),
      clock_(clock ? std::move(clock) : monotonic_seconds) {
    last_refill_ = clock_();
}

double RateLimiter::acquire() {
    if (rpm_ <= 0) return 0.0;
    std::lock_guard<std::mutex> lock(mu_);
    const double rate = rpm_ / 60.0;  // tokens per second
    const double now = clock_();
    tokens_ = std::min(rpm_, tokens_ + (now - last_refill_) * rate);
    last_refill_ = now;
    if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return 0.0;
    }
    const double wait = (1.0 - tokens_) / rate;
    tokens_ = 0.0;  // the deferred token is spent on this caller
    last_refill_ = now + wait;
    return wait;
}

// --- AttributionScope --------------------------------------------------------

namespace {
thread_local std::string g_attribution;
}

AttributionScope::AttributionScope(std::string tag) : previous_(g_attribution) {
    g_attribution = std::move(tag);
}

AttributionScope::~AttributionScope() { g_attribution = previous_; }

const std::string& AttributionScope::current() { return g_attribution; }

// --- Gateway -----------------------------------------------------------------

Gateway::Gateway(GatewayConfig config) : config_(std::move(config)) {
    if (!config_.sleeper) {
        config_.sleeper = [](int ms) {
            std::this_thread::sleep_for(std::chrono::milliseconds(ms));
        };
    }
    for (const auto& [role, rpm] : config_.rpm)
        limiters_[role] = std::make_unique<RateLimiter>(rpm);
    if (!config_.cache_dir.empty()) load_cache_file();
}

void Gateway::set_provider(LlmRole role, std::shared_ptr<Provider> provider) {
    std::lock_guard<std::mutex> lock(mu_);
    providers_[role] = std::move(provider);
}

bool Gateway::has_provider(LlmRole role) const {
    std::lock_guard<std::mutex> lock(mu_);
    return providers_.count(role) > 0;
}

std::string Gateway::provider_id(LlmRole role) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = providers_.find(role);
    return it == providers_.end() ? "" : it->second->id();
}

bool Gateway::all_scripted() const {
    std::lock_guard<std::mutex> lock(mu_);
    if (providers_.empty()) return false;
    for (const auto& [role, p] : providers_)
        if (p->id() != "scripted") return false;
    return true;
}

std::string Gateway::cache_key(const CompletionRequest& req) {
    // json dumps doubles shortest-round-trip, keeping the key locale-proof.
    std::string material = std::string(role_name(req.role)) + "\x1f" +
                           req.prompt + "\x1f" + json(req.temperature).dump() +
                           "\x1f" + std::to_string(req.max_tokens) + "\x1f" +
                           (req.seed_hint ? std::to_string(*req.seed_hint) : "-");
    return to_hex(fnv1a64(material));
}

CompletionResult Gateway::complete(const CompletionRequest& req) {
    if (req.prompt.empty())
        throw Error(ErrorCode::empty_input, "completion prompt is empty");

    const std::string key = cache_key(req);
    std::shared_ptr<Provider> provider;
    {
        std::lock_guard<std::mutex> lock(mu_);
        if (config_.cache_enabled) {
            auto it = cache_.find(key);
            if (it != cache_.end()) {
                CompletionResult res;
                res.text = it->second.text;
                res.prompt_tokens = it->second.prompt_tokens;
                res.completion_tokens = it->second.completion_tokens;
                res.cached = true;
                ledger_.record_cache_hit(req.role);
                log_.push_back({req.role, true, res.prompt_tokens,
                                res.completion_tokens, req.prompt, res.text,
                                AttributionScope::current()});
                return res;
            }
        }
        auto it = providers_.find(req.role);
        if (it == providers_.end())
            throw Error(ErrorCode::config_invalid,
                        std::string("no provider for role ") + role_name(req.role));
        provider = it->second;
    }

    auto lim = limiters_.find(req.role);
    if (lim != limiters_.end()) {
        const double wait_s = lim->second->acquire();
        if (wait_s > 0) config_.sleeper(static_cast<int>(wait_s * 1000.0));
    }

    ProviderReply reply;
    const bool scripted = provider->id() == "scripted";
    const auto started = std::chrono::steady_clock::now();
    int backoff_ms = config_.retry.initial_backoff_ms;
    for (int attempt = 0;; ++attempt) {
        try {
            reply = provider->complete(req);
            break;
        } catch (const TransientError&) {
            if (attempt >= config_.retry.max_retries) throw;
            config_.sleeper(backoff_ms);
            backoff_ms *= 2;
        }
    }
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);

    CompletionResult res;
    res.text = reply.text;
    res.prompt_tokens = reply.prompt_tokens;
    res.completion_tokens = reply.completion_tokens;
    // Zeroed under replay so run records stay byte-stable.
    res.latency_ms = scripted ? 0 : elapsed.count();
    res.cached = false;

    {
        std::lock_guard<std::mutex> lock(mu_);
        ledger_.record_call(req.role, reply.prompt_tokens, reply.completion_tokens);
        if (config_.cache_enabled) {
            CachedReply cached{reply.text, reply.prompt_tokens,
                               reply.completion_tokens};
            cache_[key] = cached;
            if (!config_.cache_dir.empty()) persist(key, cached);
        }
        log_.push_back({req.role, false, res.prompt_tokens, res.completion_tokens,
                        req.prompt, res.text, AttributionScope::current()});
    }
    return res;
}

std::vector<TokenScore> Gateway::score_tokens(LlmRole role,
                                              const std::string& text) {
    if (text.empty())
        throw Error(ErrorCode::empty_input, "cannot score empty text");
    std::shared_ptr<Provider> provider;
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = providers_.find(role);
        if (it == providers_.end())
            throw Error(ErrorCode::config_invalid,
                        std::string("no provider for role ") + role_name(role));
        provider = it->second;
    }
    if (!provider->can_score())
        throw Error(ErrorCode::capability_missing,
                    "provider '" + provider->id() + "' cannot score tokens");
    return provider->score(text);
}

std::vector<CallLogEntry> Gateway::call_log() const {
    std::lock_guard<std::mutex> lock(mu_);
    return log_;
}

std::map<std::string, RoleUsage> Gateway::usage_for(const std::string& tag) const {
    std::lock_guard<std::mutex> lock(mu_);
    std::map<std::string, RoleUsage> out;
    for (const auto& entry : log_) {
        if (entry.attribution != tag) continue;
        auto& u = out[role_name(entry.role)];
        u.prompt_tokens += entry.prompt_tokens;
        u.completion_tokens += entry.completion_tokens;
        u.calls += 1;
        if (entry.cached) u.cache_hits += 1;
    }
    return out;
}

void Gateway::persist(const std::string& key, const CachedReply& reply) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(config_.cache_dir, ec);
    std::ofstream out(fs::path(config_.cache_dir) / "calls.jsonl", std::ios::app);
    if (!out) return;  // cache persistence is best-effort by design
    json j{{"key", key},
           {"text", reply.text},
           {"prompt_tokens", reply.prompt_tokens},
           {"completion_tokens", reply.completion_tokens}};
    out << j.dump() << '\n';
}

void Gateway::load_cache_file() {
    namespace fs = std::filesystem;
    const auto path = fs::path(config_.cache_dir) / "calls.jsonl";
    std::ifstream in(path);
    if (!in) return;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("key")) continue;  // torn tail write
        CachedReply reply;
        reply.text = j.value("text", std::string{});
        reply.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
        reply.completion_tokens = j.value("completion_tokens", std::int64_t{0});
        cache_[j["key"].get<std::string>()] = std::move(reply);
    }
}

}  // namespace ragjam
