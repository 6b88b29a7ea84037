#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "formula.hpp"
#include "structure.hpp"

namespace teamlogic {

namespace detail {

// Variable bindings as a stack; later entries shadow earlier ones. Names
// are views into formulas and teams that outlive the evaluation.
class Bindings {
public:
    void push(std::string_view v, Element e) { stack_.emplace_back(v, e); }
    void pop() { stack_.pop_back(); }
    void clear() { stack_.clear(); }
    std::size_t depth() const noexcept { return stack_.size(); }
    void truncate(std::size_t d) { stack_.resize(d); }

    Element lookup(std::string_view v) const {
        for (auto it = stack_.rbegin(); it != stack_.rend(); ++it)
            if (it->first == v) return it->second;
        throw DomainError("unbound variable '" + std::string(v) + "'");
    }

    void load_row(const Team& X, std::size_t row) {
        stack_.clear();
        auto r = X.row(row);
        for (std::size_t c = 0; c < X.arity(); ++c) stack_.emplace_back(X.vars()[c], r[c]);
    }

private:
    std::vector<std::pair<std::string_view, Element>> stack_;
};

inline Element term_value(const Structure& M, const Bindings& b, const Term& t) {
    return t.constant ? M.constant(t.name) : b.lookup(t.name);
}

// Plain recursive Tarskian satisfaction. The hook and implication read
// classically as θ → φ.
inline bool tarski(const Structure& M, Bindings& b, const Formula& f) {
    switch (f.kind()) {
    case Kind::relation: {
        const Relation& rel = M.relation(f.symbol());
        if (rel.arity() != f.terms().size())
            throw DomainError("relation '" + f.symbol() + "' has arity " + std::to_string(rel.arity()) + ", used with " +
                              std::to_string(f.terms().size()) + " arguments");
        Element buf[16];
        std::vector<Element> big;
        Element* args = buf;
        if (f.terms().size() > 16) {
            big.resize(f.terms().size());
            args = big.data();
        }
        for (std::size_t i = 0; i < f.terms().size(); ++i) args[i] = term_value(M, b, f.terms()[i]);
        return rel.contains(std::span<const Element>(args, f.terms().size())) != f.negated();
    }
    case Kind::equality:
        return (term_value(M, b, f.terms()[0]) == term_value(M, b, f.terms()[1])) != f.negated();
    case Kind::dependency:
        throw TypeError("dependency atom in a first-order context");
    case Kind::global_disjunction:
        throw TypeError("global disjunction in a first-order context");
    case Kind::conjunction:
        return tarski(M, b, f.child(0)) && tarski(M, b, f.child(1));
    case Kind::disjunction:
        return tarski(M, b, f.child(0)) || tarski(M, b, f.child(1));
    case Kind::hook:
    case Kind::implication:
        return !tarski(M, b, f.child(0)) || tarski(M, b, f.child(1));
    case Kind::negation:
        return !tarski(M, b, f.child(0));
    case Kind::exists:
    case Kind::forall: {
        const bool want = f.kind() == Kind::exists;
        for (std::uint32_t m = 0; m < M.size(); ++m) {
            b.push(f.symbol(), Element{m});
            bool r = tarski(M, b, f.child(0));
            b.pop();
            if (r == want) return want;
        }
        return !want;
    }
    }
    return false;
}

inline void require_first_order(const Formula& f) {
    if (!f.dependency_free()) throw TypeError("formula is not first order: " + to_string(f));
}

}  // namespace detail

inline bool tarski_eval(const Structure& M, const Assignment& s, const Formula& phi) {
    detail::require_first_order(phi);
    detail::Bindings b;
    for (const auto& [v, e] : s) {
        if (e.index >= M.size()) throw DomainError("assignment value outside the domain");
        b.push(v, e);
    }
    for (const auto& v : phi.free_vars())
        if (!s.count(v)) throw DomainError("free variable '" + v + "' is not assigned");
    return detail::tarski(M, b, phi);
}

inline bool tarski_eval(const Structure& M, const Formula& sentence) { return tarski_eval(M, Assignment{}, sentence); }

// X restricted to the rows satisfying θ.
inline Team restrict_team(const Team& X, const Formula& theta, const Structure& M) {
    detail::require_first_order(theta);
    for (const auto& v : theta.free_vars()) X.column_of(v);
    detail::Bindings b;
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < X.size(); ++i) {
        b.load_row(X, i);
        if (detail::tarski(M, b, theta)) keep.push_back(i);
    }
    if (keep.size() == X.size()) return X;
    return X.select(keep);
}

// Flatness read-out: every row satisfies φ in Tarski semantics.
inline bool tarski_all_rows(const Structure& M, const Team& X, const Formula& phi) {
    detail::require_first_order(phi);
    detail::Bindings b;
    for (std::size_t i = 0; i < X.size(); ++i) {
        b.load_row(X, i);
        if (!detail::tarski(M, b, phi)) return false;
    }
    return true;
}

}  // namespace teamlogic
