#pragma once

#include "agentkit/errors.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace agentkit {

struct NonGroundBelief : Error {
    using Error::Error;
};

enum class TermType { Text, Int };

/// A predicate argument: a ground text/integer value or a typed variable.
class Term {
public:
    static Term text(std::string value);
    static Term integer(std::int64_t value);
    static Term var(std::string name, TermType declared_type);

    bool is_ground() const { return kind_ != Kind::Variable; }
    bool is_variable() const { return kind_ == Kind::Variable; }

    /// Value type for ground terms, declared type for variables.
    TermType type() const;

    const std::string& text_value() const;
    std::int64_t int_value() const;
    const std::string& var_name() const;

    /// Plain text form of a ground value: the text itself, or the decimal integer.
    std::string value_text() const;

    /// Rendering used in serialized predicates: text quoted, integers bare,
    /// variables as their name.
    std::string to_string() const;

    friend bool operator==(const Term& a, const Term& b);
    friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

private:
    enum class Kind { Text, Int, Variable };

    Kind kind_ = Kind::Text;
    std::string text_;  // ground text value, or variable name
    std::int64_t int_ = 0;
    TermType var_type_ = TermType::Text;
};

/// A named logical atom with a fixed argument list.
class Predicate {
public:
    Predicate(std::string functor, std::vector<Term> args = {});

    const std::string& functor() const { return functor_; }
    const std::vector<Term>& args() const { return args_; }
    std::size_t arity() const { return args_.size(); }
    bool is_ground() const;

    /// `functor(arg1,arg2,...)` — the transcript/serialization form.
    std::string to_string() const;

    friend bool operator==(const Predicate& a, const Predicate& b);
    friend bool operator!=(const Predicate& a, const Predicate& b) { return !(a == b); }

private:
    std::string functor_;
    std::vector<Term> args_;
};

/// Variable name -> ground term.
using Substitution = std::map<std::string, Term>;

/// Matches a variable-bearing pattern against a ground predicate.
/// Typed variables only bind terms of their declared type; a variable used
/// twice must bind the same value. Returns nullopt when there is no match.
std::optional<Substitution> unify(const Predicate& pattern, const Predicate& ground);

/// Instantiates a pattern with a substitution. Unbound variables stay as-is.
Predicate substitute(const Substitution& s, const Predicate& pattern);

/// Ordered store of ground predicates. Duplicates are ignored on add and
/// iteration order is insertion order.
class BeliefBase {
public:
    void add(const Predicate& p);     // NonGroundBelief; duplicate add is a no-op
    void remove(const Predicate& p);  // NonGroundBelief; absent remove is a no-op

    /// One substitution per matching belief, in insertion order.
    std::vector<Substitution> query(const Predicate& pattern) const;
    bool holds(const Predicate& pattern) const;

    bool contains(const Predicate& p) const;
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    /// Beliefs in insertion order.
    std::vector<Predicate> beliefs() const;

    /// Line-oriented text form, one belief per line.
    std::string to_text() const;

private:
    struct Entry {
        Predicate pred;
        std::uint64_t seq;
    };

    std::vector<Entry> entries_;
    std::uint64_t next_seq_ = 0;
};

}  // namespace agentkit
