#include "agentkit/provider.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace agentkit {

using nlohmann::json;

namespace {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path prefix, no trailing slash
};

SplitUrl split_url(const std::string& base) {
    auto scheme_end = base.find("://");
    if (scheme_end == std::string::npos) {
        throw InvalidConfig("api base must start with http:// or https://: " + base);
    }
    auto path_start = base.find('/', scheme_end + 3);
    SplitUrl out;
    if (path_start == std::string::npos) {
        out.origin = base;
    } else {
        out.origin = base.substr(0, path_start);
        out.prefix = base.substr(path_start);
        while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
    }
    return out;
}

// Extra config parameters pass through unvalidated; values that parse as JSON
// keep their type, anything else goes through as a string.
json passthrough_value(const std::string& raw) {
    json parsed = json::parse(raw, nullptr, false);
    if (!parsed.is_discarded()) return parsed;
    return raw;
}

// One POST with a single retry on transport failure or a 5xx status.
json post_json(const ProviderConfig& config, const std::string& path, const json& body,
               const httplib::Headers& headers) {
    SplitUrl url = split_url(config.api_base);
    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        httplib::Client client(url.origin);
        client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(
            config.timeout));
        client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(
            config.timeout));
        client.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(
            config.timeout));
        client.set_default_headers(headers);
        auto res = client.Post((url.prefix + path).c_str(), body.dump(), "application/json");
        if (!res) {
            last_error = "transport error: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status >= 500) {
            last_error = "backend status " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) {
            throw ProviderUnavailable("backend status " + std::to_string(res->status) +
                                      ": " + res->body.substr(0, 200));
        }
        json reply = json::parse(res->body, nullptr, false);
        if (reply.is_discarded()) {
            throw ProviderUnavailable("backend returned non-JSON body");
        }
        return reply;
    }
    throw ProviderUnavailable(last_error);
}

}  // namespace

OpenAiProvider::OpenAiProvider(ProviderConfig config) : config_(std::move(config)) {
    config_.validate();
    if (config_.api_base.empty()) {
        config_.api_base = "https://api.openai.com/v1";
    }
}

std::string OpenAiProvider::do_chat(const std::string& prompt) {
    json body{{"model", config_.model},
              {"messages", json::array({json{{"role", "user"}, {"content", prompt}}})}};
    if (config_.temperature) body["temperature"] = *config_.temperature;
    if (config_.top_k) body["top_k"] = *config_.top_k;
    for (const auto& [name, value] : config_.extra) {
        body[name] = passthrough_value(value);
    }
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    }
    json reply = post_json(config_, "/chat/completions", body, headers);
    if (!reply.contains("choices") || reply["choices"].empty() ||
        !reply["choices"][0].contains("message")) {
        throw ProviderUnavailable("unexpected chat-completion response shape");
    }
    return reply["choices"][0]["message"].value("content", "");
}

GeminiProvider::GeminiProvider(ProviderConfig config) : config_(std::move(config)) {
    config_.validate();
    if (config_.api_base.empty()) {
        config_.api_base = "https://generativelanguage.googleapis.com/v1beta";
    }
}

std::string GeminiProvider::do_chat(const std::string& prompt) {
    json generation_config = json::object();
    if (config_.temperature) generation_config["temperature"] = *config_.temperature;
    if (config_.top_k) generation_config["topK"] = *config_.top_k;
    for (const auto& [name, value] : config_.extra) {
        generation_config[name] = passthrough_value(value);
    }
    json body{{"contents",
               json::array({json{{"parts", json::array({json{{"text", prompt}}})}}})}};
    if (!generation_config.empty()) body["generationConfig"] = generation_config;

    httplib::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace("x-goog-api-key", config_.api_key);
    }
    json reply = post_json(config_, "/models/" + config_.model + ":generateContent", body,
                           headers);
    if (!reply.contains("candidates") || reply["candidates"].empty()) {
        throw ProviderUnavailable("unexpected generateContent response shape");
    }
    const json& content = reply["candidates"][0].value("content", json::object());
    if (!content.contains("parts") || content["parts"].empty()) {
        throw ProviderUnavailable("generateContent response has no parts");
    }
    return content["parts"][0].value("text", "");
}

}  // namespace agentkit
