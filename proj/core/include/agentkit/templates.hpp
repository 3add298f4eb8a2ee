#pragma once

#include "agentkit/belief.hpp"
#include "agentkit/errors.hpp"

#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace agentkit {

struct MalformedTemplate : Error {
    using Error::Error;
};
struct UnknownParameter : Error {
    using Error::Error;
};
struct UnboundParameter : Error {
    using Error::Error;
};
struct NoMatch : Error {
    using Error::Error;
};
struct AmbiguousPattern : Error {
    using Error::Error;
};
struct InconsistentCapture : Error {
    using Error::Error;
};
struct EmptyComposite : Error {
    using Error::Error;
};

/// Template text parsed into literal runs and `${name}` parameters.
/// Reassembling the segments reproduces the source byte for byte.
class TemplateBody {
public:
    TemplateBody() = default;
    explicit TemplateBody(std::string source);  // MalformedTemplate

    struct Segment {
        enum class Kind { Literal, Parameter };
        Kind kind;
        std::string text;  // literal text, or parameter name
    };

    const std::string& source() const { return source_; }
    const std::vector<Segment>& segments() const { return segments_; }

    /// Parameter names in first-appearance order, without duplicates.
    const std::vector<std::string>& parameters() const { return parameters_; }
    bool has_parameter(const std::string& name) const;

private:
    std::string source_;
    std::vector<Segment> segments_;
    std::vector<std::string> parameters_;
};

/// Collapses every run of whitespace to a single space. Used when matching
/// response templates against replies, where LLM output reflows freely.
std::string normalize_whitespace(std::string_view text);

/// Parameterized text with a binding map; base of the prompt/response kinds.
class TextTemplate {
public:
    TextTemplate() = default;
    explicit TextTemplate(std::string source) : body_(std::move(source)) {}

    void add_binding(const std::string& name, std::string value);  // UnknownParameter
    const std::string& get_binding(const std::string& name) const;  // UnboundParameter
    bool is_bound(const std::string& name) const;
    void reset();

    /// Source with each parameter replaced by its binding.
    std::string render() const;  // UnboundParameter, listing all missing names

    const TemplateBody& body() const { return body_; }
    const std::map<std::string, std::string>& bindings() const { return bindings_; }

protected:
    TemplateBody body_;
    std::map<std::string, std::string> bindings_;
};

class PromptTemplate : public TextTemplate {
public:
    PromptTemplate() = default;
    explicit PromptTemplate(std::string source) : TextTemplate(std::move(source)) {}
};

/// A template matched against an LLM reply to recover parameter values.
/// Literal runs (and already-bound parameters) act as anchors; each unbound
/// parameter captures the shortest text between its flanking anchors, with
/// the first match in the reply winning. Whitespace runs are collapsed on
/// both sides before matching.
class ResponseTemplate : public TextTemplate {
public:
    ResponseTemplate() = default;
    explicit ResponseTemplate(std::string source) : TextTemplate(std::move(source)) {}

    /// NoMatch, AmbiguousPattern, InconsistentCapture. On success every
    /// parameter ends bound.
    void infer_bindings(std::string_view reply);
};

/// Introductory text plus belief patterns paired with line templates; rendering
/// mines the belief base for one line per query solution.
class RagTemplate {
public:
    RagTemplate() = default;
    explicit RagTemplate(std::string intro) : intro_(std::move(intro)) {}

    struct Input {
        Predicate pattern;
        TemplateBody line;
    };

    /// Every parameter of `line` must name a variable of `pattern`.
    void add_input(const Predicate& pattern, const std::string& line);

    /// Intro followed by one instantiated line per query solution, joined by
    /// newlines. Inputs are visited in insertion order, solutions in belief
    /// insertion order. Inputs with no matches contribute nothing.
    std::string render(const BeliefBase& beliefs) const;

    const std::string& intro() const { return intro_; }
    const std::vector<Input>& inputs() const { return inputs_; }

private:
    std::string intro_;
    std::vector<Input> inputs_;
};

/// Ordered prompt and RAG parts rendered as a single chat prompt.
class CompositeTemplate {
public:
    using Part = std::variant<PromptTemplate, RagTemplate>;

    void add_part(PromptTemplate part);
    void add_part(RagTemplate part);

    /// Routed to every prompt part that has the parameter.
    void add_binding(const std::string& name, const std::string& value);  // UnknownParameter
    const std::string& get_binding(const std::string& name) const;        // UnboundParameter
    void reset();

    /// Parts rendered in order and joined by single newlines. RAG parts see
    /// `beliefs` at call time.
    std::string render(const BeliefBase& beliefs) const;  // EmptyComposite, UnboundParameter

    const std::vector<Part>& parts() const { return parts_; }
    bool empty() const { return parts_.empty(); }

private:
    std::vector<Part> parts_;
};

}  // namespace agentkit
