#pragma once

#include "agentkit/belief.hpp"
#include "agentkit/errors.hpp"
#include "agentkit/templates.hpp"

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace agentkit {

struct InvalidConfig : Error {
    using Error::Error;
};
struct ScriptMissing : Error {
    using Error::Error;
};
struct NoScriptMatch : Error {
    using Error::Error;
};
struct ProviderUnavailable : Error {
    using Error::Error;
};
struct KeyFileMissing : Error {
    using Error::Error;
};
struct KeyFileEmpty : Error {
    using Error::Error;
};
struct ReplayExhausted : Error {
    using Error::Error;
};
struct ReplayMismatch : Error {
    using Error::Error;
};

enum class ProviderKind { Mock, OpenAi, Gemini };

std::string to_string(ProviderKind kind);
ProviderKind provider_kind_from_string(const std::string& name);  // InvalidConfig

struct ProviderConfig {
    ProviderKind kind = ProviderKind::Mock;
    std::string model;
    std::optional<double> temperature;  // [0, 2]
    std::optional<int> top_k;           // positive
    std::map<std::string, std::string> extra;  // passed through to the backend unvalidated
    std::string api_key;
    std::string api_base;     // endpoint override; defaults to the public service
    std::string script_path;  // mock only
    std::chrono::milliseconds timeout{std::chrono::seconds(60)};

    void validate() const;  // InvalidConfig
};

struct ChatExchange {
    std::string prompt;
    std::string reply;
    std::string provider;
    std::string model;
    std::string ts;  // ISO-8601 wall clock
};

/// Append-only session recording of chat exchanges; serialized as JSONL.
class Recorder {
public:
    std::size_t append(ChatExchange exchange);
    std::size_t size() const;
    ChatExchange at(std::size_t index) const;
    std::vector<ChatExchange> exchanges() const;

    std::string to_jsonl() const;
    void write_file(const std::filesystem::path& path) const;
    static std::vector<ChatExchange> read_file(const std::filesystem::path& path);

private:
    mutable std::mutex mutex_;
    std::vector<ChatExchange> exchanges_;
};

/// Uniform single-turn chat interface over LLM backends. Stateless between
/// calls; safe to share across agents. When a recorder is attached every
/// exchange is appended atomically.
class ChatProvider {
public:
    virtual ~ChatProvider() = default;

    std::string chat(const std::string& prompt);

    void set_recorder(std::shared_ptr<Recorder> recorder);
    std::shared_ptr<Recorder> recorder() const;

    /// Recording index of the most recent exchange, when recording is on.
    std::optional<std::size_t> last_recorded_index() const;

    virtual std::string kind_name() const = 0;
    virtual std::string model() const = 0;

protected:
    virtual std::string do_chat(const std::string& prompt) = 0;

private:
    mutable std::mutex mutex_;
    std::shared_ptr<Recorder> recorder_;
    std::optional<std::size_t> last_index_;
};

struct MockRule {
    enum class Match { Exact, Substring, Default };
    Match match = Match::Default;
    std::string value;                 // unused for Default
    std::vector<std::string> replies;  // consumed in order; the last entry repeats
};

struct MockScript {
    std::vector<MockRule> rules;

    static MockScript parse(const std::string& json_text);        // InvalidConfig
    static MockScript load(const std::filesystem::path& path);    // ScriptMissing, InvalidConfig
    void validate() const;                                        // InvalidConfig
};

/// Deterministic scripted provider: first matching rule wins, sequenced
/// replies pop in order.
class MockProvider : public ChatProvider {
public:
    explicit MockProvider(MockScript script, std::string model = "mock");

    std::string kind_name() const override { return "mock"; }
    std::string model() const override { return model_; }

protected:
    std::string do_chat(const std::string& prompt) override;  // NoScriptMatch

private:
    MockScript script_;
    std::vector<std::size_t> consumed_;
    std::string model_;
    std::mutex mutex_;
};

/// Serves the replies of a recorded session back in order.
class ReplayProvider : public ChatProvider {
public:
    explicit ReplayProvider(std::vector<ChatExchange> session, bool verify_prompts = true);

    std::string kind_name() const override { return "replay"; }
    std::string model() const override;

protected:
    std::string do_chat(const std::string& prompt) override;  // ReplayExhausted, ReplayMismatch

private:
    std::vector<ChatExchange> session_;
    std::size_t next_ = 0;
    bool verify_prompts_;
    std::mutex mutex_;
};

/// HTTP provider for OpenAI-compatible chat-completion endpoints.
class OpenAiProvider : public ChatProvider {
public:
    explicit OpenAiProvider(ProviderConfig config);

    std::string kind_name() const override { return "openai"; }
    std::string model() const override { return config_.model; }

protected:
    std::string do_chat(const std::string& prompt) override;  // ProviderUnavailable

private:
    ProviderConfig config_;
};

/// HTTP provider for Gemini-compatible generateContent endpoints.
class GeminiProvider : public ChatProvider {
public:
    explicit GeminiProvider(ProviderConfig config);

    std::string kind_name() const override { return "gemini"; }
    std::string model() const override { return config_.model; }

protected:
    std::string do_chat(const std::string& prompt) override;  // ProviderUnavailable

private:
    ProviderConfig config_;
};

/// Reads an API key file, stripping trailing whitespace. The key is never
/// echoed into logs or error messages.
std::string load_api_key_from_file(const std::filesystem::path& path);

/// Builds a ready provider from a validated config. Mock configs must name a
/// script file (ScriptMissing otherwise).
std::unique_ptr<ChatProvider> make_provider(const ProviderConfig& config);

// Templated chat: render first (so template errors surface before any network
// activity), then send the rendered prompt.
std::string chat(ChatProvider& provider, const PromptTemplate& prompt);
std::string chat(ChatProvider& provider, const RagTemplate& rag, const BeliefBase& beliefs);
std::string chat(ChatProvider& provider, const CompositeTemplate& composite,
                 const BeliefBase& beliefs);

}  // namespace agentkit
