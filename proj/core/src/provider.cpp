#include "agentkit/provider.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

namespace agentkit {

using nlohmann::json;

std::string to_string(ProviderKind kind) {
    switch (kind) {
        case ProviderKind::Mock: return "mock";
        case ProviderKind::OpenAi: return "openai";
        case ProviderKind::Gemini: return "gemini";
    }
    return "mock";
}

ProviderKind provider_kind_from_string(const std::string& name) {
    if (name == "mock") return ProviderKind::Mock;
    if (name == "openai") return ProviderKind::OpenAi;
    if (name == "gemini") return ProviderKind::Gemini;
    throw InvalidConfig("unknown provider kind '" + name + "'");
}

void ProviderConfig::validate() const {
    if (temperature && (*temperature < 0.0 || *temperature > 2.0)) {
        throw InvalidConfig("temperature must be in [0, 2], got " +
                            std::to_string(*temperature));
    }
    if (top_k && *top_k <= 0) {
        throw InvalidConfig("topK must be positive, got " + std::to_string(*top_k));
    }
    if (kind != ProviderKind::Mock && model.empty()) {
        throw InvalidConfig("model id must be nonempty for " + to_string(kind));
    }
    if (timeout.count() <= 0) {
        throw InvalidConfig("timeout must be positive");
    }
}

static std::string now_iso8601() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch())
                  .count() % 1000;
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                  tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min,
                  tm.tm_sec, static_cast<int>(ms));
    return buf;
}

std::size_t Recorder::append(ChatExchange exchange) {
    std::lock_guard lock(mutex_);
    exchanges_.push_back(std::move(exchange));
    return exchanges_.size() - 1;
}

std::size_t Recorder::size() const {
    std::lock_guard lock(mutex_);
    return exchanges_.size();
}

ChatExchange Recorder::at(std::size_t index) const {
    std::lock_guard lock(mutex_);
    return exchanges_.at(index);
}

std::vector<ChatExchange> Recorder::exchanges() const {
    std::lock_guard lock(mutex_);
    return exchanges_;
}

static json exchange_to_json(const ChatExchange& ex) {
    return json{{"prompt", ex.prompt},
                {"reply", ex.reply},
                {"provider", ex.provider},
                {"model", ex.model},
                {"ts", ex.ts}};
}

std::string Recorder::to_jsonl() const {
    std::lock_guard lock(mutex_);
    std::string out;
    for (const ChatExchange& ex : exchanges_) {
        out += exchange_to_json(ex).dump();
        out += '\n';
    }
    return out;
}

void Recorder::write_file(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open recording file " + path.string());
    }
    out << to_jsonl();
}

std::vector<ChatExchange> Recorder::read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot read recording file " + path.string());
    }
    std::vector<ChatExchange> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw Error("malformed recording line: " + line.substr(0, 80));
        }
        ChatExchange ex;
        ex.prompt = j.value("prompt", "");
        ex.reply = j.value("reply", "");
        ex.provider = j.value("provider", "");
        ex.model = j.value("model", "");
        ex.ts = j.value("ts", "");
        out.push_back(std::move(ex));
    }
    return out;
}

std::string ChatProvider::chat(const std::string& prompt) {
    std::string reply = do_chat(prompt);
    std::lock_guard lock(mutex_);
    if (recorder_) {
        last_index_ = recorder_->append(
            {prompt, reply, kind_name(), model(), now_iso8601()});
    }
    return reply;
}

void ChatProvider::set_recorder(std::shared_ptr<Recorder> recorder) {
    std::lock_guard lock(mutex_);
    recorder_ = std::move(recorder);
}

std::shared_ptr<Recorder> ChatProvider::recorder() const {
    std::lock_guard lock(mutex_);
    return recorder_;
}

std::optional<std::size_t> ChatProvider::last_recorded_index() const {
    std::lock_guard lock(mutex_);
    return last_index_;
}

void MockScript::validate() const {
    int defaults = 0;
    for (const MockRule& rule : rules) {
        if (rule.match == MockRule::Match::Default) ++defaults;
        if (rule.replies.empty()) {
            throw InvalidConfig("mock rule has no replies");
        }
        if (rule.match != MockRule::Match::Default && rule.value.empty()) {
            throw InvalidConfig("exact/substring mock rule has an empty value");
        }
    }
    if (defaults > 1) {
        throw InvalidConfig("mock script has more than one default rule");
    }
}

MockScript MockScript::parse(const std::string& json_text) {
    json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_array()) {
        throw InvalidConfig("mock script must be a JSON array of rules");
    }
    MockScript script;
    for (const json& rule_json : j) {
        if (!rule_json.is_object() || !rule_json.contains("match") ||
            !rule_json.contains("replies")) {
            throw InvalidConfig("mock rule needs 'match' and 'replies'");
        }
        MockRule rule;
        const json& match = rule_json.at("match");
        std::string kind = match.value("kind", "");
        if (kind == "exact") {
            rule.match = MockRule::Match::Exact;
        } else if (kind == "substring") {
            rule.match = MockRule::Match::Substring;
        } else if (kind == "default") {
            rule.match = MockRule::Match::Default;
        } else {
            throw InvalidConfig("mock rule match kind must be exact|substring|default");
        }
        if (rule.match != MockRule::Match::Default) {
            if (!match.contains("value") || !match.at("value").is_string()) {
                throw InvalidConfig("exact/substring mock rule needs a string 'value'");
            }
            rule.value = match.at("value").get<std::string>();
        }
        if (!rule_json.at("replies").is_array()) {
            throw InvalidConfig("mock rule 'replies' must be an array");
        }
        for (const json& reply : rule_json.at("replies")) {
            if (!reply.is_string()) {
                throw InvalidConfig("mock rule replies must be strings");
            }
            rule.replies.push_back(reply.get<std::string>());
        }
        script.rules.push_back(std::move(rule));
    }
    script.validate();
    return script;
}

MockScript MockScript::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ScriptMissing("mock script file not found: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

MockProvider::MockProvider(MockScript script, std::string model)
    : script_(std::move(script)), model_(std::move(model)) {
    script_.validate();
    consumed_.assign(script_.rules.size(), 0);
}

std::string MockProvider::do_chat(const std::string& prompt) {
    std::lock_guard lock(mutex_);
    for (std::size_t i = 0; i < script_.rules.size(); ++i) {
        const MockRule& rule = script_.rules[i];
        bool matched = false;
        switch (rule.match) {
            case MockRule::Match::Exact: matched = (prompt == rule.value); break;
            case MockRule::Match::Substring:
                matched = prompt.find(rule.value) != std::string::npos;
                break;
            case MockRule::Match::Default: matched = true; break;
        }
        if (!matched) continue;
        std::size_t idx = std::min(consumed_[i], rule.replies.size() - 1);
        ++consumed_[i];
        return rule.replies[idx];
    }
    throw NoScriptMatch("no mock rule matches prompt: " +
                        prompt.substr(0, std::min<std::size_t>(prompt.size(), 120)));
}

ReplayProvider::ReplayProvider(std::vector<ChatExchange> session, bool verify_prompts)
    : session_(std::move(session)), verify_prompts_(verify_prompts) {}

std::string ReplayProvider::model() const {
    return session_.empty() ? "replay" : session_.front().model;
}

std::string ReplayProvider::do_chat(const std::string& prompt) {
    std::lock_guard lock(mutex_);
    if (next_ >= session_.size()) {
        throw ReplayExhausted("replay session exhausted after " +
                              std::to_string(session_.size()) + " exchanges");
    }
    const ChatExchange& ex = session_[next_];
    if (verify_prompts_ && ex.prompt != prompt) {
        throw ReplayMismatch("replay prompt #" + std::to_string(next_) +
                             " differs from the recorded session");
    }
    ++next_;
    return ex.reply;
}

std::string load_api_key_from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw KeyFileMissing("key file not found: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string key = buf.str();
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) {
        key.pop_back();
    }
    if (key.empty()) {
        throw KeyFileEmpty("key file is empty: " + path.string());
    }
    return key;
}

std::unique_ptr<ChatProvider> make_provider(const ProviderConfig& config) {
    config.validate();
    switch (config.kind) {
        case ProviderKind::Mock: {
            if (config.script_path.empty()) {
                throw ScriptMissing("mock provider needs a script file");
            }
            return std::make_unique<MockProvider>(
                MockScript::load(config.script_path),
                config.model.empty() ? "mock" : config.model);
        }
        case ProviderKind::OpenAi: return std::make_unique<OpenAiProvider>(config);
        case ProviderKind::Gemini: return std::make_unique<GeminiProvider>(config);
    }
    throw InvalidConfig("unsupported provider kind");
}

std::string chat(ChatProvider& provider, const PromptTemplate& prompt) {
    return provider.chat(prompt.render());
}

std::string chat(ChatProvider& provider, const RagTemplate& rag, const BeliefBase& beliefs) {
    return provider.chat(rag.render(beliefs));
}

std::string chat(ChatProvider& provider, const CompositeTemplate& composite,
                 const BeliefBase& beliefs) {
    return provider.chat(composite.render(beliefs));
}

}  // namespace agentkit
