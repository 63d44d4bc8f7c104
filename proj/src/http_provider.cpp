// OpenAI-compatible chat-completions backend. Kept in its own translation
// unit: httplib is header-only and heavy, and only live runs need it.
#include <httplib.h>
#include <json.hpp>

#include "ragjam/error.hpp"
#include "ragjam/gateway.hpp"

namespace ragjam {

using nlohmann::json;

OpenAiHttpProvider::OpenAiHttpProvider(HttpProviderConfig config)
    : config_(std::move(config)) {
    if (config_.endpoint.empty())
        throw Error(ErrorCode::config_invalid, "http provider needs an endpoint");
    if (config_.model.empty())
        throw Error(ErrorCode::config_invalid, "http provider needs a model");
}

ProviderReply OpenAiHttpProvider::complete(const CompletionRequest& req) {
    json body{
        {"model", config_.model},
        {"messages", json::array({json{{"role", "user"}, {"content", req.prompt}}})},
        {"temperature", req.temperature},
        {"max_tokens", req.max_tokens},
    };
    if (req.seed_hint) body["seed"] = *req.seed_hint;

    httplib::Client client(config_.endpoint);
    client.set_connection_timeout(config_.timeout_s, 0);
    client.set_read_timeout(config_.timeout_s, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty())
        headers.emplace("Authorization", "Bearer " + config_.api_key);

    auto res = client.Post(config_.path, headers, body.dump(), "application/json");
    if (!res)
        throw TransientError(ErrorCode::provider_unavailable,
                             "no response from " + config_.endpoint);
    if (res->status == 429 || res->status >= 500)
        throw TransientError(ErrorCode::provider_unavailable,
                             "http " + std::to_string(res->status));
    if (res->status != 200)
        throw Error(ErrorCode::provider_rejected,
                    "http " + std::to_string(res->status) + ": " +
                        res->body.substr(0, 200));

    json j;
    try {
        j = json::parse(res->body);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::malformed_input,
                    std::string("provider reply is not JSON: ") + e.what());
    }
    ProviderReply reply;
    try {
        reply.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::malformed_input,
                    std::string("provider reply missing content: ") + e.what());
    }
    if (j.contains("usage")) {
        reply.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
        reply.completion_tokens =
            j["usage"].value("completion_tokens", std::int64_t{0});
    }
    return reply;
}

}  // namespace ragjam
