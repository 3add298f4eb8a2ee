#include "agentkit/belief.hpp"

#include <algorithm>
#include <sstream>

namespace agentkit {

Term Term::text(std::string value) {
    Term t;
    t.kind_ = Kind::Text;
    t.text_ = std::move(value);
    return t;
}

Term Term::integer(std::int64_t value) {
    Term t;
    t.kind_ = Kind::Int;
    t.int_ = value;
    return t;
}

Term Term::var(std::string name, TermType declared_type) {
    if (name.empty()) {
        throw Error("variable name must be nonempty");
    }
    Term t;
    t.kind_ = Kind::Variable;
    t.text_ = std::move(name);
    t.var_type_ = declared_type;
    return t;
}

TermType Term::type() const {
    switch (kind_) {
        case Kind::Text: return TermType::Text;
        case Kind::Int: return TermType::Int;
        case Kind::Variable: return var_type_;
    }
    return TermType::Text;
}

const std::string& Term::text_value() const {
    if (kind_ != Kind::Text) {
        throw Error("term is not a ground text value");
    }
    return text_;
}

std::int64_t Term::int_value() const {
    if (kind_ != Kind::Int) {
        throw Error("term is not a ground integer value");
    }
    return int_;
}

const std::string& Term::var_name() const {
    if (kind_ != Kind::Variable) {
        throw Error("term is not a variable");
    }
    return text_;
}

std::string Term::value_text() const {
    switch (kind_) {
        case Kind::Text: return text_;
        case Kind::Int: return std::to_string(int_);
        case Kind::Variable: throw Error("variable has no value");
    }
    return {};
}

static std::string quote(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    out.push_back('"');
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string Term::to_string() const {
    switch (kind_) {
        case Kind::Text: return quote(text_);
        case Kind::Int: return std::to_string(int_);
        case Kind::Variable: return text_;
    }
    return {};
}

bool operator==(const Term& a, const Term& b) {
    if (a.kind_ != b.kind_) return false;
    switch (a.kind_) {
        case Term::Kind::Text: return a.text_ == b.text_;
        case Term::Kind::Int: return a.int_ == b.int_;
        case Term::Kind::Variable: return a.text_ == b.text_ && a.var_type_ == b.var_type_;
    }
    return false;
}

Predicate::Predicate(std::string functor, std::vector<Term> args)
    : functor_(std::move(functor)), args_(std::move(args)) {
    if (functor_.empty()) {
        throw Error("predicate functor must be nonempty");
    }
}

bool Predicate::is_ground() const {
    return std::all_of(args_.begin(), args_.end(), [](const Term& t) { return t.is_ground(); });
}

std::string Predicate::to_string() const {
    std::ostringstream out;
    out << functor_ << '(';
    for (std::size_t i = 0; i < args_.size(); ++i) {
        if (i) out << ',';
        out << args_[i].to_string();
    }
    out << ')';
    return out.str();
}

bool operator==(const Predicate& a, const Predicate& b) {
    return a.functor_ == b.functor_ && a.args_ == b.args_;
}

std::optional<Substitution> unify(const Predicate& pattern, const Predicate& ground) {
    if (pattern.functor() != ground.functor() || pattern.arity() != ground.arity()) {
        return std::nullopt;
    }
    Substitution sub;
    for (std::size_t i = 0; i < pattern.arity(); ++i) {
        const Term& p = pattern.args()[i];
        const Term& g = ground.args()[i];
        if (!g.is_ground()) {
            return std::nullopt;  // only ground predicates are unified against
        }
        if (p.is_ground()) {
            if (p != g) return std::nullopt;
            continue;
        }
        if (p.type() != g.type()) {
            return std::nullopt;  // typed variable: string vs int mismatch
        }
        auto [it, inserted] = sub.emplace(p.var_name(), g);
        if (!inserted && it->second != g) {
            return std::nullopt;  // repeated variable must bind consistently
        }
    }
    return sub;
}

Predicate substitute(const Substitution& s, const Predicate& pattern) {
    std::vector<Term> args;
    args.reserve(pattern.arity());
    for (const Term& t : pattern.args()) {
        if (t.is_variable()) {
            auto it = s.find(t.var_name());
            args.push_back(it != s.end() ? it->second : t);
        } else {
            args.push_back(t);
        }
    }
    return Predicate(pattern.functor(), std::move(args));
}

void BeliefBase::add(const Predicate& p) {
    if (!p.is_ground()) {
        throw NonGroundBelief("cannot add non-ground belief " + p.to_string());
    }
    if (contains(p)) return;
    entries_.push_back({p, next_seq_++});
}

void BeliefBase::remove(const Predicate& p) {
    if (!p.is_ground()) {
        throw NonGroundBelief("cannot remove non-ground belief " + p.to_string());
    }
    std::erase_if(entries_, [&](const Entry& e) { return e.pred == p; });
}

std::vector<Substitution> BeliefBase::query(const Predicate& pattern) const {
    std::vector<Substitution> out;
    for (const Entry& e : entries_) {
        if (auto sub = unify(pattern, e.pred)) {
            out.push_back(std::move(*sub));
        }
    }
    return out;
}

bool BeliefBase::holds(const Predicate& pattern) const {
    for (const Entry& e : entries_) {
        if (unify(pattern, e.pred)) return true;
    }
    return false;
}

bool BeliefBase::contains(const Predicate& p) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const Entry& e) { return e.pred == p; });
}

std::vector<Predicate> BeliefBase::beliefs() const {
    std::vector<Predicate> out;
    out.reserve(entries_.size());
    for (const Entry& e : entries_) out.push_back(e.pred);
    return out;
}

std::string BeliefBase::to_text() const {
    std::string out;
    for (const Entry& e : entries_) {
        out += e.pred.to_string();
        out += '\n';
    }
    return out;
}

}  // namespace agentkit
