#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"
#include "formula.hpp"
#include "structure.hpp"
#include "tarski.hpp"

namespace teamlogic {

enum class DependencyKind { builtin, first_order, extensional };

// What an extensional table answers for (M, R) pairs it does not list.
enum class DefaultPolicy { reject, accept, strict };

// One row of an extensional decision table, by element names.
struct ExtensionalEntry {
    std::vector<std::string> domain;
    std::vector<std::vector<std::string>> tuples;
    bool member = false;
};

using DependencyOracle = std::function<bool(const Structure& domain, const TupleSet& relation)>;

// A k-ary generalized dependency: a class of structures (M, R), R ⊆ M^k.
class Dependency {
public:
    // Dep_{n,m}: relations of arity n+m functional from the first n columns.
    static Dependency functional(std::string name, std::size_t n, std::size_t m) {
        return builtin(std::move(name), AtomKind::functional, n + m, n);
    }
    static Dependency constancy(std::string name, std::size_t k) { return builtin(std::move(name), AtomKind::constancy, k, 0); }
    // π_{1..k}(R) ⊆ π_{k+1..2k}(R), arity 2k.
    static Dependency inclusion(std::string name, std::size_t k) { return builtin(std::move(name), AtomKind::inclusion, 2 * k, k); }
    static Dependency independence(std::string name, std::size_t n, std::size_t m) {
        return builtin(std::move(name), AtomKind::independence, n + m, n);
    }
    static Dependency anonymity(std::string name, std::size_t n, std::size_t m) {
        return builtin(std::move(name), AtomKind::anonymity, n + m, n);
    }
    static Dependency nonempty(std::string name, std::size_t k) { return builtin(std::move(name), AtomKind::nonempty, k, 0); }

    // D = {(M,R) : (M,R) ⊨ sentence}; the sentence may mention only the
    // relation symbol (of arity k) and equality.
    static Dependency first_order(std::string name, std::size_t arity, FormulaPtr sentence, std::string relation = "R") {
        if (!sentence) throw ValidationError("missing sentence for dependency '" + name + "'");
        if (!sentence->dependency_free())
            throw ValidationError("defining sentence of '" + name + "' must be first order");
        if (!sentence->free_vars().empty())
            throw ValidationError("defining sentence of '" + name + "' has free variable '" + sentence->free_vars()[0] + "'");
        std::set<std::string> consts;
        collect_constants(*sentence, consts);
        if (!consts.empty()) throw ValidationError("defining sentence of '" + name + "' mentions constant '" + *consts.begin() + "'");
        std::map<std::string, std::size_t> rels;
        collect_relations(*sentence, rels);
        for (const auto& [r, k] : rels) {
            if (r != relation) throw ValidationError("defining sentence of '" + name + "' mentions relation '" + r + "'");
            if (k != arity) throw ValidationError("relation '" + r + "' used with arity " + std::to_string(k));
        }
        Dependency d(std::move(name), arity, DependencyKind::first_order);
        d.sentence_ = std::move(sentence);
        d.relation_ = std::move(relation);
        return d;
    }

    static Dependency extensional(std::string name, std::size_t arity, DependencyOracle oracle) {
        Dependency d(std::move(name), arity, DependencyKind::extensional);
        d.oracle_ = std::move(oracle);
        return d;
    }

    // Table lookups match the domain (as a set of names) and the relation
    // (as a set of name tuples) exactly.
    static Dependency extensional_table(std::string name, std::size_t arity, std::vector<ExtensionalEntry> entries,
                                        DefaultPolicy policy) {
        using Key = std::pair<std::vector<std::string>, std::vector<std::vector<std::string>>>;
        auto table = std::make_shared<std::map<Key, bool>>();
        for (auto& e : entries) {
            for (const auto& t : e.tuples)
                if (t.size() != arity) throw ValidationError("table entry tuple has the wrong arity");
            std::sort(e.domain.begin(), e.domain.end());
            std::sort(e.tuples.begin(), e.tuples.end());
            e.tuples.erase(std::unique(e.tuples.begin(), e.tuples.end()), e.tuples.end());
            (*table)[Key{e.domain, e.tuples}] = e.member;
        }
        std::string label = name;
        return extensional(std::move(name), arity, [table, policy, label](const Structure& M, const TupleSet& R) {
            Key key;
            key.first = M.domain_names();
            std::sort(key.first.begin(), key.first.end());
            for (std::size_t i = 0; i < R.size(); ++i) {
                std::vector<std::string> t;
                for (Element e : R[i]) t.push_back(M.name(e));
                key.second.push_back(std::move(t));
            }
            std::sort(key.second.begin(), key.second.end());
            auto it = table->find(key);
            if (it != table->end()) return it->second;
            switch (policy) {
            case DefaultPolicy::accept: return true;
            case DefaultPolicy::reject: return false;
            case DefaultPolicy::strict: break;
            }
            throw DomainError("extensional dependency '" + label + "' has no entry for this instance");
        });
    }

    const std::string& name() const noexcept { return name_; }
    std::size_t arity() const noexcept { return arity_; }
    DependencyKind kind() const noexcept { return kind_; }
    AtomKind builtin_kind() const noexcept { return builtin_; }
    // Width of the first variable block for two-sided builtins.
    std::size_t split() const noexcept { return split_; }
    const FormulaPtr& sentence() const noexcept { return sentence_; }
    const std::string& relation_symbol() const noexcept { return relation_; }
    const DependencyOracle& oracle() const noexcept { return oracle_; }

    // Syntactic closure facts used by the evaluator. Extensional classes
    // are never assumed closed.
    bool downward_closed() const {
        switch (kind_) {
        case DependencyKind::builtin: return builtin_ == AtomKind::functional || builtin_ == AtomKind::constancy;
        case DependencyKind::first_order: return polarity(*sentence_, false) != Polarity::positive_or_both;
        case DependencyKind::extensional: return false;
        }
        return false;
    }

private:
    Dependency(std::string name, std::size_t arity, DependencyKind kind) : name_(std::move(name)), arity_(arity), kind_(kind) {
        if (name_.empty()) throw ValidationError("dependency needs a name");
    }

    static Dependency builtin(std::string name, AtomKind kind, std::size_t arity, std::size_t split) {
        if (arity == 0) throw ValidationError("dependency arity must be positive");
        Dependency d(std::move(name), arity, DependencyKind::builtin);
        d.builtin_ = kind;
        d.split_ = split;
        return d;
    }

    enum class Polarity { none, negative_only, positive_or_both };
    // Whether the relation symbol occurs positively anywhere in NNF.
    Polarity polarity(const Formula& f, bool negated) const {
        switch (f.kind()) {
        case Kind::relation:
            if (f.symbol() != relation_) return Polarity::none;
            return (f.negated() != negated) ? Polarity::negative_only : Polarity::positive_or_both;
        case Kind::negation: return polarity(f.child(0), !negated);
        case Kind::implication:
        case Kind::hook: {
            Polarity a = polarity(f.child(0), !negated), b = polarity(f.child(1), negated);
            return std::max(a, b);
        }
        default: {
            Polarity p = Polarity::none;
            for (const auto& c : f.children()) p = std::max(p, polarity(*c, negated));
            return p;
        }
        }
    }

    std::string name_;
    std::size_t arity_ = 0;
    DependencyKind kind_;
    AtomKind builtin_ = AtomKind::named;
    std::size_t split_ = 0;
    FormulaPtr sentence_;
    std::string relation_ = "R";
    DependencyOracle oracle_;
};

namespace detail {

// Rows of R sharing their first `split` columns are adjacent because R is
// sorted; the closed forms below walk those groups.
inline bool prefix_equal(std::span<const Element> a, std::span<const Element> b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (a[i] != b[i]) return false;
    return true;
}

inline TupleSet columns(const TupleSet& R, std::size_t from, std::size_t to) {
    std::vector<Element> cells;
    cells.reserve((to - from) * R.size());
    for (std::size_t i = 0; i < R.size(); ++i)
        for (std::size_t c = from; c < to; ++c) cells.push_back(R[i][c]);
    return TupleSet(to - from, std::move(cells), to == from ? std::min<std::size_t>(R.size(), 1) : R.size());
}

inline bool builtin_holds(AtomKind kind, std::size_t split, const TupleSet& R) {
    const std::size_t k = R.arity();
    switch (kind) {
    case AtomKind::functional:
        for (std::size_t i = 1; i < R.size(); ++i)
            if (prefix_equal(R[i - 1], R[i], split)) return false;
        return true;
    case AtomKind::constancy: return R.size() <= 1;
    case AtomKind::nonempty: return !R.empty();
    case AtomKind::inclusion: return columns(R, 0, split).is_subset_of(columns(R, split, k));
    case AtomKind::independence: {
        if (R.empty()) return true;
        return R.size() == columns(R, 0, split).size() * columns(R, split, k).size();
    }
    case AtomKind::anonymity: {
        // Distinct rows with equal prefixes differ in the suffix, so each
        // prefix group must simply contain at least two rows.
        for (std::size_t i = 0; i < R.size();) {
            std::size_t j = i + 1;
            while (j < R.size() && prefix_equal(R[i], R[j], split)) ++j;
            if (j - i < 2) return false;
            i = j;
        }
        return true;
    }
    case AtomKind::named: break;
    }
    throw DomainError("not a builtin dependency");
}

}  // namespace detail

// (M, R) ∈ D. Only M's domain is consulted.
inline bool dep_holds(const Dependency& D, const Structure& M, const TupleSet& R) {
    if (R.arity() != D.arity())
        throw DomainError("dependency '" + D.name() + "' has arity " + std::to_string(D.arity()) +
                          ", relation has arity " + std::to_string(R.arity()));
    for (Element e : R.cells())
        if (e.index >= M.size()) throw DomainError("relation element outside the domain");
    switch (D.kind()) {
    case DependencyKind::builtin: return detail::builtin_holds(D.builtin_kind(), D.split(), R);
    case DependencyKind::first_order: {
        Structure host = M.bare().with_relation(D.relation_symbol(), R);
        detail::Bindings b;
        return detail::tarski(host, b, *D.sentence());
    }
    case DependencyKind::extensional: return D.oracle()(M, R);
    }
    return false;
}

class DependencyRegistry {
public:
    DependencyRegistry() = default;
    DependencyRegistry(std::initializer_list<Dependency> deps) {
        for (const auto& d : deps) add(d);
    }

    void add(Dependency d) {
        std::string n = d.name();
        if (!deps_.emplace(n, std::make_shared<const Dependency>(std::move(d))).second)
            throw ValidationError("dependency '" + n + "' registered twice");
    }
    const Dependency* find(std::string_view name) const {
        auto it = deps_.find(name);
        return it == deps_.end() ? nullptr : it->second.get();
    }
    const Dependency& at(std::string_view name) const {
        if (auto* d = find(name)) return *d;
        throw DomainError("unregistered dependency '" + std::string(name) + "'");
    }
    std::optional<std::size_t> arity(const std::string& name) const {
        if (auto* d = find(name)) return d->arity();
        return std::nullopt;
    }
    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& [n, _] : deps_) out.push_back(n);
        return out;
    }

    // Outcome of the last isomorphism-closure check, when one was run.
    void record_isomorphism_check(const std::string& name, bool closed) { iso_checked_[name] = closed; }
    std::optional<bool> isomorphism_closed(const std::string& name) const {
        auto it = iso_checked_.find(name);
        if (it == iso_checked_.end()) return std::nullopt;
        return it->second;
    }

private:
    std::map<std::string, std::shared_ptr<const Dependency>, std::less<>> deps_;
    std::map<std::string, bool, std::less<>> iso_checked_;
};

}  // namespace teamlogic
