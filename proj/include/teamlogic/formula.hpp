#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "structure.hpp"

namespace teamlogic {

enum class Kind : unsigned char {
    relation,           // R(t̄), possibly negated
    equality,           // t = t', or t != t' when negated
    dependency,         // builtin or named dependency atom
    conjunction,
    disjunction,        // team (split) disjunction
    global_disjunction, // ⊔
    hook,               // θ ↪ φ, children = {θ, φ}
    exists,
    forall,
    negation,           // only before NNF normalization
    implication,        // only before NNF normalization
};

enum class AtomKind : unsigned char { functional, constancy, inclusion, independence, anonymity, nonempty, named };

struct Term {
    std::string name;
    bool constant = false;
    friend bool operator==(const Term&, const Term&) = default;
};

inline Term var(std::string name) { return Term{std::move(name), false}; }
inline Term cst(std::string name) { return Term{std::move(name), true}; }

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Immutable formula node. Structural facts (free variables, whether the
// subtree is dependency-free) are computed once at construction.
class Formula {
public:
    Kind kind() const noexcept { return kind_; }
    bool negated() const noexcept { return negated_; }
    // Relation symbol, dependency name for named atoms, or bound variable.
    const std::string& symbol() const noexcept { return symbol_; }
    const std::vector<Term>& terms() const noexcept { return terms_; }
    AtomKind atom() const noexcept { return atom_; }
    // Variable lists of a dependency atom. Single-list atoms use lhs only.
    const std::vector<std::string>& lhs() const noexcept { return lhs_; }
    const std::vector<std::string>& rhs() const noexcept { return rhs_; }
    const std::vector<FormulaPtr>& children() const noexcept { return children_; }
    const Formula& child(std::size_t i) const { return *children_.at(i); }
    const FormulaPtr& child_ptr(std::size_t i) const { return children_.at(i); }

    // Sorted, duplicate-free.
    const std::vector<std::string>& free_vars() const noexcept { return free_; }
    // No dependency atoms and no global disjunction: Tarski semantics apply.
    bool dependency_free() const noexcept { return dep_free_; }
    bool has_named_atoms() const noexcept { return has_named_; }
    bool is_literal() const noexcept { return kind_ == Kind::relation || kind_ == Kind::equality; }
    bool is_quantifier() const noexcept { return kind_ == Kind::exists || kind_ == Kind::forall; }
    bool is_nnf() const noexcept { return nnf_; }

    // Every atom argument: terms of literals, variables of dependency atoms.
    std::vector<std::string> atom_variables() const {
        std::vector<std::string> out;
        for (const auto& t : terms_)
            if (!t.constant) out.push_back(t.name);
        out.insert(out.end(), lhs_.begin(), lhs_.end());
        out.insert(out.end(), rhs_.begin(), rhs_.end());
        return out;
    }

    struct Builder;

private:
    friend struct Builder;
    Kind kind_ = Kind::equality;
    bool negated_ = false;
    AtomKind atom_ = AtomKind::named;
    std::string symbol_;
    std::vector<Term> terms_;
    std::vector<std::string> lhs_, rhs_;
    std::vector<FormulaPtr> children_;
    std::vector<std::string> free_;
    bool dep_free_ = true;
    bool has_named_ = false;
    bool nnf_ = true;
};

struct Formula::Builder {
    static FormulaPtr finish(Formula&& f) {
        std::set<std::string> fv;
        switch (f.kind_) {
        case Kind::relation:
        case Kind::equality:
            for (const auto& t : f.terms_)
                if (!t.constant) fv.insert(t.name);
            break;
        case Kind::dependency:
            fv.insert(f.lhs_.begin(), f.lhs_.end());
            fv.insert(f.rhs_.begin(), f.rhs_.end());
            f.dep_free_ = false;
            f.has_named_ = f.atom_ == AtomKind::named;
            break;
        case Kind::exists:
        case Kind::forall:
            fv.insert(f.children_[0]->free_.begin(), f.children_[0]->free_.end());
            fv.erase(f.symbol_);
            break;
        default:
            for (const auto& c : f.children_) fv.insert(c->free_.begin(), c->free_.end());
        }
        for (const auto& c : f.children_) {
            f.dep_free_ = f.dep_free_ && c->dep_free_;
            f.has_named_ = f.has_named_ || c->has_named_;
            f.nnf_ = f.nnf_ && c->nnf_;
        }
        if (f.kind_ == Kind::global_disjunction) f.dep_free_ = false;
        if (f.kind_ == Kind::negation || f.kind_ == Kind::implication) f.nnf_ = false;
        f.free_.assign(fv.begin(), fv.end());
        return std::make_shared<const Formula>(std::move(f));
    }

    static FormulaPtr relation(std::string name, std::vector<Term> args, bool negated) {
        if (args.empty()) throw DomainError("relational atom '" + name + "' needs arguments");
        Formula f;
        f.kind_ = Kind::relation;
        f.symbol_ = std::move(name);
        f.terms_ = std::move(args);
        f.negated_ = negated;
        return finish(std::move(f));
    }
    static FormulaPtr equality(Term l, Term r, bool negated) {
        Formula f;
        f.kind_ = Kind::equality;
        f.terms_ = {std::move(l), std::move(r)};
        f.negated_ = negated;
        return finish(std::move(f));
    }
    static FormulaPtr dependency(AtomKind atom, std::vector<std::string> lhs, std::vector<std::string> rhs, std::string name) {
        Formula f;
        f.kind_ = Kind::dependency;
        f.atom_ = atom;
        f.lhs_ = std::move(lhs);
        f.rhs_ = std::move(rhs);
        f.symbol_ = std::move(name);
        return finish(std::move(f));
    }
    static FormulaPtr node(Kind kind, std::vector<FormulaPtr> children, std::string symbol = {}) {
        for (const auto& c : children)
            if (!c) throw DomainError("null subformula");
        Formula f;
        f.kind_ = kind;
        f.children_ = std::move(children);
        f.symbol_ = std::move(symbol);
        return finish(std::move(f));
    }
};

// ---- construction helpers -------------------------------------------------

inline FormulaPtr make_relation(std::string name, std::vector<Term> args, bool negated = false) {
    return Formula::Builder::relation(std::move(name), std::move(args), negated);
}
inline FormulaPtr make_equality(Term l, Term r, bool negated = false) {
    return Formula::Builder::equality(std::move(l), std::move(r), negated);
}
inline FormulaPtr make_eq(const std::string& a, const std::string& b) { return make_equality(var(a), var(b)); }
inline FormulaPtr make_neq(const std::string& a, const std::string& b) { return make_equality(var(a), var(b), true); }

inline FormulaPtr make_dependency(AtomKind atom, std::vector<std::string> lhs, std::vector<std::string> rhs = {},
                                  std::string name = {}) {
    if (atom == AtomKind::inclusion && lhs.size() != rhs.size())
        throw DomainError("inclusion atom sides must have equal length");
    if ((atom == AtomKind::constancy || atom == AtomKind::nonempty || atom == AtomKind::named) && !rhs.empty())
        throw DomainError("atom takes a single variable list");
    if (atom == AtomKind::named && name.empty()) throw DomainError("named dependency atom without a name");
    if (atom == AtomKind::functional && lhs.empty()) {
        atom = AtomKind::constancy;
        std::swap(lhs, rhs);
    }
    return Formula::Builder::dependency(atom, std::move(lhs), std::move(rhs), std::move(name));
}
inline FormulaPtr make_dep(std::vector<std::string> v, std::vector<std::string> w) {
    if (v.empty()) return make_dependency(AtomKind::constancy, std::move(w));
    return make_dependency(AtomKind::functional, std::move(v), std::move(w));
}
inline FormulaPtr make_const(std::vector<std::string> w) { return make_dependency(AtomKind::constancy, std::move(w)); }
inline FormulaPtr make_ne(std::vector<std::string> v) { return make_dependency(AtomKind::nonempty, std::move(v)); }
inline FormulaPtr make_named(std::string name, std::vector<std::string> v) {
    return make_dependency(AtomKind::named, std::move(v), {}, std::move(name));
}

inline FormulaPtr make_and(FormulaPtr a, FormulaPtr b) { return Formula::Builder::node(Kind::conjunction, {std::move(a), std::move(b)}); }
inline FormulaPtr make_or(FormulaPtr a, FormulaPtr b) { return Formula::Builder::node(Kind::disjunction, {std::move(a), std::move(b)}); }
inline FormulaPtr make_gor(FormulaPtr a, FormulaPtr b) {
    return Formula::Builder::node(Kind::global_disjunction, {std::move(a), std::move(b)});
}
inline FormulaPtr make_hook(FormulaPtr theta, FormulaPtr body) {
    if (!theta->dependency_free()) throw TypeError("the left side of a hook must be first order");
    return Formula::Builder::node(Kind::hook, {std::move(theta), std::move(body)});
}
inline FormulaPtr make_exists(std::string v, FormulaPtr body) { return Formula::Builder::node(Kind::exists, {std::move(body)}, std::move(v)); }
inline FormulaPtr make_forall(std::string v, FormulaPtr body) { return Formula::Builder::node(Kind::forall, {std::move(body)}, std::move(v)); }
inline FormulaPtr make_exists(const std::vector<std::string>& vs, FormulaPtr body) {
    for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = make_exists(*it, std::move(body));
    return body;
}
inline FormulaPtr make_forall(const std::vector<std::string>& vs, FormulaPtr body) {
    for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = make_forall(*it, std::move(body));
    return body;
}
inline FormulaPtr make_not(FormulaPtr a) { return Formula::Builder::node(Kind::negation, {std::move(a)}); }
inline FormulaPtr make_implies(FormulaPtr a, FormulaPtr b) {
    return Formula::Builder::node(Kind::implication, {std::move(a), std::move(b)});
}

// Left-nested fold; an empty list is an error because the logic has no ⊤.
inline FormulaPtr fold(Kind kind, const std::vector<FormulaPtr>& parts) {
    if (parts.empty()) throw DomainError("empty connective list");
    FormulaPtr acc = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) acc = Formula::Builder::node(kind, {acc, parts[i]});
    return acc;
}
inline FormulaPtr make_and(const std::vector<FormulaPtr>& parts) { return fold(Kind::conjunction, parts); }
inline FormulaPtr make_or(const std::vector<FormulaPtr>& parts) { return fold(Kind::disjunction, parts); }

// Flattens a left/right nested chain of `kind` into its operands.
inline void flatten(const FormulaPtr& f, Kind kind, std::vector<FormulaPtr>& out) {
    if (f->kind() == kind) {
        for (const auto& c : f->children()) flatten(c, kind, out);
    } else {
        out.push_back(f);
    }
}
inline std::vector<FormulaPtr> flatten(const FormulaPtr& f, Kind kind) {
    std::vector<FormulaPtr> out;
    flatten(f, kind, out);
    return out;
}

// τ(x₁…x_k) for an identity type, over the given variable names.
inline FormulaPtr identity_type_formula(const IdentityType& ty, const std::vector<std::string>& vars) {
    if (vars.size() != ty.size()) throw DomainError("identity type rendering needs one variable per position");
    if (vars.size() == 1) return make_eq(vars[0], vars[0]);
    std::vector<FormulaPtr> parts;
    for (std::size_t i = 0; i < vars.size(); ++i)
        for (std::size_t j = i + 1; j < vars.size(); ++j)
            parts.push_back(make_equality(var(vars[i]), var(vars[j]), ty.block[i] != ty.block[j]));
    return make_and(parts);
}

// ---- structural equality ---------------------------------------------------

inline bool same_formula(const Formula& a, const Formula& b) {
    if (&a == &b) return true;
    if (a.kind() != b.kind() || a.negated() != b.negated() || a.symbol() != b.symbol() || a.terms() != b.terms())
        return false;
    if (a.kind() == Kind::dependency && (a.atom() != b.atom() || a.lhs() != b.lhs() || a.rhs() != b.rhs())) return false;
    if (a.children().size() != b.children().size()) return false;
    for (std::size_t i = 0; i < a.children().size(); ++i)
        if (!same_formula(a.child(i), b.child(i))) return false;
    return true;
}
inline bool operator==(const Formula& a, const Formula& b) { return same_formula(a, b); }

// ---- printing ----------------------------------------------------------------

namespace detail {

inline std::string join(const std::vector<std::string>& xs, const char* sep = ",") {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += sep;
        out += xs[i];
    }
    return out;
}

inline const char* atom_keyword(AtomKind k) {
    switch (k) {
    case AtomKind::functional: return "dep";
    case AtomKind::constancy: return "const";
    case AtomKind::inclusion: return "inc";
    case AtomKind::independence: return "ind";
    case AtomKind::anonymity: return "anon";
    case AtomKind::nonempty: return "ne";
    case AtomKind::named: return "D:";
    }
    return "?";
}

// Binding strength used to decide where parentheses are needed.
inline int precedence(Kind k) {
    switch (k) {
    case Kind::exists:
    case Kind::forall: return 0;
    case Kind::global_disjunction: return 1;
    case Kind::disjunction: return 2;
    case Kind::conjunction: return 3;
    case Kind::hook:
    case Kind::implication: return 4;
    default: return 5;
    }
}

inline const char* binary_operator(Kind k) {
    switch (k) {
    case Kind::conjunction: return " & ";
    case Kind::disjunction: return " | ";
    case Kind::global_disjunction: return " <|> ";
    case Kind::hook: return " ->> ";
    case Kind::implication: return " -> ";
    default: return " ? ";
    }
}

void print(std::ostream& os, const Formula& f);

// Children of a binary node are parenthesized unless they are atoms or the
// same associative connective on the left. This keeps output unambiguous
// and readable at the cost of a few redundant parentheses.
inline void print_operand(std::ostream& os, const Formula& parent, const Formula& child, bool left) {
    const bool same_chain = left && child.kind() == parent.kind() && parent.kind() != Kind::hook &&
                            parent.kind() != Kind::implication;
    const bool bare = precedence(child.kind()) == 5 || same_chain;
    if (bare) {
        print(os, child);
    } else {
        os << '(';
        print(os, child);
        os << ')';
    }
}

inline void print(std::ostream& os, const Formula& f) {
    switch (f.kind()) {
    case Kind::relation: {
        if (f.negated()) os << '!';
        os << f.symbol() << '(';
        for (std::size_t i = 0; i < f.terms().size(); ++i) os << (i ? "," : "") << f.terms()[i].name;
        os << ')';
        return;
    }
    case Kind::equality:
        os << f.terms()[0].name << (f.negated() ? "!=" : "=") << f.terms()[1].name;
        return;
    case Kind::dependency:
        if (f.atom() == AtomKind::named) {
            os << "D:" << f.symbol() << '(' << join(f.lhs()) << ')';
        } else if (f.atom() == AtomKind::constancy || f.atom() == AtomKind::nonempty) {
            os << atom_keyword(f.atom()) << '(' << join(f.lhs()) << ')';
        } else {
            os << atom_keyword(f.atom()) << '(' << join(f.lhs()) << ';' << join(f.rhs()) << ')';
        }
        return;
    case Kind::negation:
        os << '!';
        if (precedence(f.child(0).kind()) == 5) {
            print(os, f.child(0));
        } else {
            os << '(';
            print(os, f.child(0));
            os << ')';
        }
        return;
    case Kind::exists:
    case Kind::forall: {
        const Kind k = f.kind();
        os << (k == Kind::exists ? "exists " : "forall ") << f.symbol();
        const Formula* body = &f.child(0);
        while (body->kind() == k) {
            os << ',' << body->symbol();
            body = &body->child(0);
        }
        os << ". ";
        if (precedence(body->kind()) == 5 || body->is_quantifier()) {
            print(os, *body);
        } else {
            os << '(';
            print(os, *body);
            os << ')';
        }
        return;
    }
    default:
        print_operand(os, f, f.child(0), true);
        os << binary_operator(f.kind());
        print_operand(os, f, f.child(1), false);
    }
}

}  // namespace detail

inline std::string to_string(const Formula& f) {
    std::ostringstream os;
    detail::print(os, f);
    return os.str();
}
inline std::string to_string(const FormulaPtr& f) { return to_string(*f); }
inline std::ostream& operator<<(std::ostream& os, const Formula& f) {
    detail::print(os, f);
    return os;
}

// ---- names and substitution ---------------------------------------------------

// Every variable name occurring anywhere (free, bound, or in binders).
inline void collect_names(const Formula& f, std::set<std::string>& out) {
    for (const auto& t : f.terms()) out.insert(t.name);
    out.insert(f.lhs().begin(), f.lhs().end());
    out.insert(f.rhs().begin(), f.rhs().end());
    if (f.is_quantifier()) out.insert(f.symbol());
    for (const auto& c : f.children()) collect_names(*c, out);
}

inline void collect_relations(const Formula& f, std::map<std::string, std::size_t>& out) {
    if (f.kind() == Kind::relation) {
        auto [it, inserted] = out.emplace(f.symbol(), f.terms().size());
        if (!inserted && it->second != f.terms().size())
            throw DomainError("relation '" + f.symbol() + "' used with different arities");
    }
    for (const auto& c : f.children()) collect_relations(*c, out);
}

inline void collect_constants(const Formula& f, std::set<std::string>& out) {
    for (const auto& t : f.terms())
        if (t.constant) out.insert(t.name);
    for (const auto& c : f.children()) collect_constants(*c, out);
}

// Deterministic fresh names: base_1, base_2, ... skipping anything taken.
class FreshNames {
public:
    FreshNames() = default;
    explicit FreshNames(std::set<std::string> taken) : taken_(std::move(taken)) {}
    void reserve(const Formula& f) { collect_names(f, taken_); }
    void reserve(const std::string& n) { taken_.insert(n); }
    std::string fresh(const std::string& base) {
        std::size_t& counter = counters_[base];
        std::string candidate;
        do candidate = base + "_" + std::to_string(++counter);
        while (taken_.count(candidate));
        taken_.insert(candidate);
        return candidate;
    }

private:
    std::set<std::string> taken_;
    std::map<std::string, std::size_t> counters_;
};

// Replaces free occurrences of variables by the mapped names. Binders that
// would capture a substituted name are renamed using `fresh`.
inline FormulaPtr rename_free(const FormulaPtr& f, const std::map<std::string, std::string>& map, FreshNames& fresh) {
    if (map.empty()) return f;
    auto sub = [&](const std::string& v) {
        auto it = map.find(v);
        return it == map.end() ? v : it->second;
    };
    switch (f->kind()) {
    case Kind::relation:
    case Kind::equality: {
        std::vector<Term> ts = f->terms();
        for (auto& t : ts)
            if (!t.constant) t.name = sub(t.name);
        if (f->kind() == Kind::relation) return make_relation(f->symbol(), ts, f->negated());
        return make_equality(ts[0], ts[1], f->negated());
    }
    case Kind::dependency: {
        std::vector<std::string> l = f->lhs(), r = f->rhs();
        for (auto& v : l) v = sub(v);
        for (auto& v : r) v = sub(v);
        return Formula::Builder::dependency(f->atom(), l, r, f->symbol());
    }
    case Kind::exists:
    case Kind::forall: {
        const std::string& v = f->symbol();
        std::map<std::string, std::string> inner;
        for (const auto& [from, to] : map)
            if (from != v) inner.emplace(from, to);
        bool captures = false;
        const auto& body_free = f->child(0).free_vars();
        for (const auto& [from, to] : inner)
            if (to == v && std::binary_search(body_free.begin(), body_free.end(), from)) captures = true;
        std::string bound = v;
        if (captures) {
            bound = fresh.fresh(v);
            inner[v] = bound;
        }
        return Formula::Builder::node(f->kind(), {rename_free(f->child_ptr(0), inner, fresh)}, bound);
    }
    default: {
        std::vector<FormulaPtr> cs;
        for (const auto& c : f->children()) cs.push_back(rename_free(c, map, fresh));
        return Formula::Builder::node(f->kind(), std::move(cs), f->symbol());
    }
    }
}

}  // namespace teamlogic
