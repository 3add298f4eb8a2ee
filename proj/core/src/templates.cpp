#include "agentkit/templates.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace agentkit {

TemplateBody::TemplateBody(std::string source) : source_(std::move(source)) {
    std::size_t pos = 0;
    std::string literal;
    while (pos < source_.size()) {
        std::size_t open = source_.find("${", pos);
        if (open == std::string::npos) {
            literal += source_.substr(pos);
            break;
        }
        literal += source_.substr(pos, open - pos);
        std::size_t close = source_.find('}', open + 2);
        if (close == std::string::npos) {
            throw MalformedTemplate("unclosed parameter at offset " + std::to_string(open));
        }
        std::string name = source_.substr(open + 2, close - open - 2);
        if (name.empty()) {
            throw MalformedTemplate("empty parameter name at offset " + std::to_string(open));
        }
        if (!literal.empty()) {
            segments_.push_back({Segment::Kind::Literal, literal});
            literal.clear();
        }
        segments_.push_back({Segment::Kind::Parameter, name});
        if (std::find(parameters_.begin(), parameters_.end(), name) == parameters_.end()) {
            parameters_.push_back(name);
        }
        pos = close + 1;
    }
    if (!literal.empty()) {
        segments_.push_back({Segment::Kind::Literal, literal});
    }
}

bool TemplateBody::has_parameter(const std::string& name) const {
    return std::find(parameters_.begin(), parameters_.end(), name) != parameters_.end();
}

std::string normalize_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool in_ws = false;
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_ws = true;
            continue;
        }
        if (in_ws) out.push_back(' ');
        in_ws = false;
        out.push_back(c);
    }
    if (in_ws) out.push_back(' ');
    return out;
}

void TextTemplate::add_binding(const std::string& name, std::string value) {
    if (!body_.has_parameter(name)) {
        throw UnknownParameter("no parameter named '" + name + "' in template");
    }
    bindings_[name] = std::move(value);
}

const std::string& TextTemplate::get_binding(const std::string& name) const {
    auto it = bindings_.find(name);
    if (it == bindings_.end()) {
        throw UnboundParameter("parameter '" + name + "' is not bound");
    }
    return it->second;
}

bool TextTemplate::is_bound(const std::string& name) const {
    return bindings_.count(name) != 0;
}

void TextTemplate::reset() {
    bindings_.clear();
}

std::string TextTemplate::render() const {
    std::vector<std::string> missing;
    for (const std::string& p : body_.parameters()) {
        if (!bindings_.count(p)) missing.push_back(p);
    }
    if (!missing.empty()) {
        std::string names;
        for (std::size_t i = 0; i < missing.size(); ++i) {
            if (i) names += ", ";
            names += missing[i];
        }
        throw UnboundParameter("unbound parameters: " + names);
    }
    std::string out;
    for (const auto& seg : body_.segments()) {
        if (seg.kind == TemplateBody::Segment::Kind::Literal) {
            out += seg.text;
        } else {
            out += bindings_.at(seg.text);
        }
    }
    return out;
}

namespace {

// Matching pieces: literal anchors (literal runs merged with pre-bound
// parameter values) alternating with unbound parameters.
struct Piece {
    bool is_param;
    std::string text;  // normalized anchor text, or parameter name
};

std::vector<Piece> build_pieces(const TemplateBody& body,
                                const std::map<std::string, std::string>& bound) {
    std::vector<Piece> pieces;
    std::string run;
    bool run_open = false;  // a literal run exists (possibly empty) since the last param
    auto flush = [&]() {
        if (run_open) {
            std::string anchor = normalize_whitespace(run);
            if (!anchor.empty()) {
                pieces.push_back({false, std::move(anchor)});
            }
            run.clear();
            run_open = false;
        }
    };
    for (const auto& seg : body.segments()) {
        if (seg.kind == TemplateBody::Segment::Kind::Literal) {
            run += seg.text;
            run_open = true;
        } else if (bound.count(seg.text)) {
            run += bound.at(seg.text);
            run_open = true;
        } else {
            flush();
            if (!pieces.empty() && pieces.back().is_param) {
                throw AmbiguousPattern("parameters '" + pieces.back().text + "' and '" +
                                       seg.text + "' have no literal anchor between them");
            }
            pieces.push_back({true, seg.text});
        }
    }
    flush();
    return pieces;
}

}  // namespace

void ResponseTemplate::infer_bindings(std::string_view reply) {
    std::vector<Piece> pieces = build_pieces(body_, bindings_);
    std::string text = normalize_whitespace(reply);

    std::map<std::string, std::string> captured;
    std::size_t pos = 0;
    const Piece* pending = nullptr;  // unbound parameter awaiting its right anchor
    for (const Piece& piece : pieces) {
        if (piece.is_param) {
            pending = &piece;
            continue;
        }
        std::size_t found = text.find(piece.text, pos);
        if (found == std::string::npos) {
            throw NoMatch("reply does not contain anchor \"" + piece.text + "\"");
        }
        if (pending) {
            std::string value = text.substr(pos, found - pos);
            auto [it, inserted] = captured.emplace(pending->text, value);
            if (!inserted && it->second != value) {
                throw InconsistentCapture("parameter '" + pending->text +
                                          "' captured \"" + it->second + "\" and \"" + value +
                                          "\"");
            }
            pending = nullptr;
        }
        pos = found + piece.text.size();
    }
    if (pending) {
        // Trailing parameter with no right anchor: captures the rest of the reply.
        std::string value = text.substr(pos);
        auto [it, inserted] = captured.emplace(pending->text, value);
        if (!inserted && it->second != value) {
            throw InconsistentCapture("parameter '" + pending->text + "' captured \"" +
                                      it->second + "\" and \"" + value + "\"");
        }
    }
    for (auto& [name, value] : captured) {
        bindings_[name] = std::move(value);
    }
}

void RagTemplate::add_input(const Predicate& pattern, const std::string& line) {
    TemplateBody body(line);
    for (const std::string& p : body.parameters()) {
        bool found = std::any_of(pattern.args().begin(), pattern.args().end(),
                                 [&](const Term& t) {
                                     return t.is_variable() && t.var_name() == p;
                                 });
        if (!found) {
            throw UnknownParameter("line parameter '" + p +
                                   "' is not a variable of pattern " + pattern.to_string());
        }
    }
    inputs_.push_back({pattern, std::move(body)});
}

std::string RagTemplate::render(const BeliefBase& beliefs) const {
    std::vector<std::string> lines;
    if (!intro_.empty()) lines.push_back(intro_);
    for (const Input& input : inputs_) {
        for (const Substitution& sub : beliefs.query(input.pattern)) {
            std::string line;
            for (const auto& seg : input.line.segments()) {
                if (seg.kind == TemplateBody::Segment::Kind::Literal) {
                    line += seg.text;
                } else {
                    line += sub.at(seg.text).value_text();
                }
            }
            lines.push_back(std::move(line));
        }
    }
    std::string out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (i) out += '\n';
        out += lines[i];
    }
    return out;
}

void CompositeTemplate::add_part(PromptTemplate part) {
    parts_.emplace_back(std::move(part));
}

void CompositeTemplate::add_part(RagTemplate part) {
    parts_.emplace_back(std::move(part));
}

void CompositeTemplate::add_binding(const std::string& name, const std::string& value) {
    bool routed = false;
    for (Part& part : parts_) {
        if (auto* prompt = std::get_if<PromptTemplate>(&part)) {
            if (prompt->body().has_parameter(name)) {
                prompt->add_binding(name, value);
                routed = true;
            }
        }
    }
    if (!routed) {
        throw UnknownParameter("no part of the composite has parameter '" + name + "'");
    }
}

const std::string& CompositeTemplate::get_binding(const std::string& name) const {
    for (const Part& part : parts_) {
        if (const auto* prompt = std::get_if<PromptTemplate>(&part)) {
            if (prompt->is_bound(name)) return prompt->get_binding(name);
        }
    }
    throw UnboundParameter("parameter '" + name + "' is not bound in any part");
}

void CompositeTemplate::reset() {
    for (Part& part : parts_) {
        if (auto* prompt = std::get_if<PromptTemplate>(&part)) {
            prompt->reset();
        }
    }
}

std::string CompositeTemplate::render(const BeliefBase& beliefs) const {
    if (parts_.empty()) {
        throw EmptyComposite("composite template has no parts");
    }
    std::string out;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
        if (i) out += '\n';
        if (const auto* prompt = std::get_if<PromptTemplate>(&parts_[i])) {
            out += prompt->render();
        } else {
            out += std::get<RagTemplate>(parts_[i]).render(beliefs);
        }
    }
    return out;
}

}  // namespace agentkit
