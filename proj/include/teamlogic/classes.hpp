#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"
#include "formula.hpp"
#include "parser.hpp"

namespace teamlogic {

// ∀x̄(antecedent → ⋁ᵢ ∃ȳᵢ ψᵢ), all atoms positive and inequality-free.
struct DedSentence {
    struct Disjunct {
        std::vector<std::string> exists;
        std::vector<FormulaPtr> atoms;
    };
    std::string relation = "R";
    std::size_t arity = 0;
    std::vector<std::string> universal;
    std::vector<FormulaPtr> antecedent;  // empty means ⊤, rendered as x = x
    std::vector<Disjunct> disjuncts;

    FormulaPtr to_formula() const {
        std::vector<FormulaPtr> alts;
        for (const auto& d : disjuncts) alts.push_back(make_exists(d.exists, make_and(d.atoms)));
        FormulaPtr consequent = make_or(alts);
        FormulaPtr matrix = consequent;
        if (!antecedent.empty()) matrix = make_implies(make_and(antecedent), consequent);
        else if (!universal.empty()) matrix = make_implies(make_eq(universal[0], universal[0]), consequent);
        return make_forall(universal, matrix);
    }
};

// ∃x̄(η ∧ ∀ȳ(Rȳ → θ)) with R only positive in η and absent from θ.
struct USentence {
    std::string relation = "R";
    std::vector<std::string> exists;
    std::vector<FormulaPtr> eta;  // literals; empty means ⊤
    std::vector<std::string> universal;
    FormulaPtr theta;

    std::size_t arity() const noexcept { return universal.size(); }

    FormulaPtr universal_part() const {
        std::vector<Term> ys;
        for (const auto& y : universal) ys.push_back(var(y));
        return make_forall(universal, make_implies(make_relation(relation, ys), theta));
    }
    FormulaPtr to_formula() const {
        std::vector<FormulaPtr> parts = eta;
        parts.push_back(universal_part());
        return make_exists(exists, make_and(parts));
    }
    std::set<std::string> constants() const {
        std::set<std::string> out;
        for (const auto& l : eta) collect_constants(*l, out);
        collect_constants(*theta, out);
        return out;
    }
};

namespace detail {

[[noreturn]] inline void reject(const std::string& what, const Formula& node) {
    throw ValidationError(what + ": " + to_string(node));
}

inline void require_positive_atom(const Formula& f, const char* where) {
    switch (f.kind()) {
    case Kind::relation:
        if (f.negated()) reject(std::string("negated atom in ") + where, f);
        return;
    case Kind::equality:
        if (f.negated()) reject(std::string("inequality in ") + where, f);
        return;
    case Kind::negation: reject(std::string("negation in ") + where, f);
    case Kind::implication: reject("nested implication", f);
    case Kind::forall: reject("nested universal quantifier", f);
    case Kind::exists: reject(std::string("misplaced existential quantifier in ") + where, f);
    case Kind::disjunction: reject(std::string("disjunction inside a conjunction in ") + where, f);
    case Kind::dependency:
    case Kind::hook:
    case Kind::global_disjunction: reject("not a first-order atom", f);
    default: reject(std::string("unexpected node in ") + where, f);
    }
}

inline void strip_prefix(const FormulaPtr& f, Kind kind, std::vector<std::string>& vars, FormulaPtr& rest) {
    rest = f;
    while (rest->kind() == kind) {
        if (std::find(vars.begin(), vars.end(), rest->symbol()) != vars.end())
            reject("repeated quantified variable '" + rest->symbol() + "'", *f);
        vars.push_back(rest->symbol());
        rest = rest->child_ptr(0);
    }
}

inline std::string single_relation(const Formula& f) {
    std::map<std::string, std::size_t> rels;
    collect_relations(f, rels);
    if (rels.size() > 1) reject("more than one relation symbol", f);
    return rels.empty() ? std::string("R") : rels.begin()->first;
}

}  // namespace detail

// Accepts ∀x̄(φ → ψ₁ | … | ψₙ) where φ is a conjunction of positive atoms and
// each ψᵢ is ∃ȳ(conjunction of positive atoms). Without an implication the
// matrix is read as a disjunction whose negated relational literals form
// the antecedent (the NNF reading).
inline DedSentence validate_ded(const FormulaPtr& phi) {
    if (!phi->dependency_free()) detail::reject("not a first-order sentence", *phi);
    if (!phi->free_vars().empty()) detail::reject("free variable '" + phi->free_vars()[0] + "'", *phi);
    std::set<std::string> consts;
    collect_constants(*phi, consts);
    if (!consts.empty()) detail::reject("constant symbol '" + *consts.begin() + "'", *phi);
    DedSentence ded;
    ded.relation = detail::single_relation(*phi);
    std::map<std::string, std::size_t> rels;
    collect_relations(*phi, rels);
    ded.arity = rels.empty() ? 0 : rels.begin()->second;

    FormulaPtr matrix;
    detail::strip_prefix(phi, Kind::forall, ded.universal, matrix);
    FormulaPtr consequent = matrix;
    if (matrix->kind() == Kind::implication) {
        for (const auto& a : flatten(matrix->child_ptr(0), Kind::conjunction)) {
            detail::require_positive_atom(*a, "antecedent");
            ded.antecedent.push_back(a);
        }
        consequent = matrix->child_ptr(1);
    }
    for (const auto& alt : flatten(consequent, Kind::disjunction)) {
        if (matrix->kind() != Kind::implication) {
            // ¬R(..) written either as a negated literal or as a negation node.
            const Formula* lit = alt->kind() == Kind::negation ? &alt->child(0) : alt.get();
            const bool negated = alt->kind() == Kind::negation ? !lit->negated() : lit->negated();
            if (lit->kind() == Kind::relation && negated) {
                ded.antecedent.push_back(make_relation(lit->symbol(), lit->terms()));
                continue;
            }
        }
        DedSentence::Disjunct d;
        FormulaPtr body;
        detail::strip_prefix(alt, Kind::exists, d.exists, body);
        for (const auto& v : d.exists)
            if (std::find(ded.universal.begin(), ded.universal.end(), v) != ded.universal.end())
                detail::reject("existential variable '" + v + "' shadows a universal one", *alt);
        for (const auto& a : flatten(body, Kind::conjunction)) {
            detail::require_positive_atom(*a, "consequent");
            d.atoms.push_back(a);
        }
        ded.disjuncts.push_back(std::move(d));
    }
    if (ded.disjuncts.empty()) detail::reject("no consequent disjunct", *phi);
    return ded;
}

namespace detail {

// The universal conjunct ∀ȳ(Rȳ → θ), in implication, hook or NNF form.
inline bool match_universal(const FormulaPtr& f, const std::string& relation, USentence& out) {
    if (f->kind() != Kind::forall) return false;
    std::vector<std::string> ys;
    FormulaPtr body;
    strip_prefix(f, Kind::forall, ys, body);
    FormulaPtr guard, theta;
    if (body->kind() == Kind::implication || body->kind() == Kind::hook) {
        guard = body->child_ptr(0);
        theta = body->child_ptr(1);
        if (guard->kind() != Kind::relation || guard->negated()) reject("universal part must have the form R(y) -> theta", *f);
    } else if (body->kind() == Kind::disjunction) {
        auto alts = flatten(body, Kind::disjunction);
        if (alts[0]->kind() != Kind::relation || !alts[0]->negated())
            reject("universal part must have the form R(y) -> theta", *f);
        guard = make_relation(alts[0]->symbol(), alts[0]->terms());
        alts.erase(alts.begin());
        theta = make_or(alts);
    } else {
        reject("universal part must have the form R(y) -> theta", *f);
    }
    if (guard->symbol() != relation) reject("guard of the universal part must use " + relation, *f);
    std::vector<std::string> args;
    for (const auto& t : guard->terms()) {
        if (t.constant) reject("guard arguments must be the universal variables", *guard);
        args.push_back(t.name);
    }
    std::vector<std::string> sa = args, sy = ys;
    std::sort(sa.begin(), sa.end());
    std::sort(sy.begin(), sy.end());
    if (std::adjacent_find(sa.begin(), sa.end()) != sa.end() || sa != sy)
        reject("guard arguments must be exactly the universal variables, without repetition", *guard);
    out.universal = args;
    out.theta = theta;
    return true;
}

}  // namespace detail

inline USentence validate_usentence(const FormulaPtr& phi) {
    if (!phi->dependency_free()) detail::reject("not a first-order sentence", *phi);
    if (!phi->free_vars().empty()) detail::reject("free variable '" + phi->free_vars()[0] + "'", *phi);
    USentence u;
    u.relation = detail::single_relation(*phi);
    FormulaPtr matrix;
    detail::strip_prefix(phi, Kind::exists, u.exists, matrix);
    bool found = false;
    for (const auto& c : flatten(matrix, Kind::conjunction)) {
        if (c->kind() == Kind::forall) {
            if (found) detail::reject("more than one universal part", *c);
            found = detail::match_universal(c, u.relation, u);
            continue;
        }
        if (c->kind() == Kind::relation) {
            if (c->negated()) detail::reject(u.relation + " occurs negatively in eta", *c);
        } else if (c->kind() == Kind::negation && c->child(0).kind() == Kind::relation) {
            detail::reject(u.relation + " occurs negatively in eta", *c);
        } else if (c->kind() != Kind::equality) {
            detail::reject("eta must be a conjunction of literals", *c);
        }
        u.eta.push_back(c);
    }
    if (!found) detail::reject("missing universal part forall y. (R(y) -> theta)", *phi);
    for (const auto& y : u.universal)
        if (std::find(u.exists.begin(), u.exists.end(), y) != u.exists.end())
            detail::reject("variable '" + y + "' is both existential and universal", *phi);
    std::map<std::string, std::size_t> rels;
    collect_relations(*u.theta, rels);
    if (rels.count(u.relation)) detail::reject(u.relation + " occurs in theta", *u.theta);
    if (!rels.empty()) detail::reject("theta mentions relation '" + rels.begin()->first + "'", *u.theta);
    return u;
}

}  // namespace teamlogic
