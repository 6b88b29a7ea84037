#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "classes.hpp"
#include "errors.hpp"
#include "formula.hpp"
#include "parser.hpp"
#include "structure.hpp"
#include "tarski.hpp"

namespace teamlogic {

namespace detail {

inline void require_relation_arity(const USentence& u) {
    for (const auto& l : u.eta)
        if (l->kind() == Kind::relation && l->symbol() == u.relation && l->terms().size() != u.arity())
            throw DomainError("arity mismatch: " + u.relation + " has " + std::to_string(u.arity()) +
                              " universal variables but is used with " + std::to_string(l->terms().size()) + " arguments");
}

// Returns u with its universal variables renamed to `ys` and its
// existential variables renamed away from every name in `avoid`.
inline USentence rename_usentence(const USentence& u, const std::vector<std::string>& ys, const std::set<std::string>& avoid,
                                  FreshNames& fresh) {
    if (ys.size() != u.arity()) throw DomainError("arity mismatch between U-sentences");
    std::map<std::string, std::string> map;
    for (const auto& x : u.exists)
        if (avoid.count(x)) map[x] = fresh.fresh(x);
    for (std::size_t i = 0; i < ys.size(); ++i)
        if (u.universal[i] != ys[i]) map[u.universal[i]] = ys[i];
    USentence out;
    out.relation = u.relation;
    for (const auto& x : u.exists) out.exists.push_back(map.count(x) ? map.at(x) : x);
    for (const auto& l : u.eta) out.eta.push_back(rename_free(l, map, fresh));
    out.universal = ys;
    out.theta = rename_free(u.theta, map, fresh);
    return out;
}

inline std::set<std::string> names_of(const USentence& u) {
    std::set<std::string> out(u.exists.begin(), u.exists.end());
    out.insert(u.universal.begin(), u.universal.end());
    for (const auto& l : u.eta) collect_names(*l, out);
    collect_names(*u.theta, out);
    return out;
}

}  // namespace detail

// ∃x̄z̄((η ∧ η′) ∧ ∀ȳ(Rȳ → (θ ∧ θ′))), with ψ renamed apart from φ.
inline USentence usentence_conjoin(const USentence& phi, const USentence& psi) {
    if (phi.relation != psi.relation)
        throw DomainError("cannot conjoin U-sentences over '" + phi.relation + "' and '" + psi.relation + "'");
    if (phi.arity() != psi.arity()) throw DomainError("arity mismatch between U-sentences");
    detail::require_relation_arity(phi);
    detail::require_relation_arity(psi);
    std::set<std::string> taken = detail::names_of(phi);
    for (const auto& n : detail::names_of(psi)) taken.insert(n);
    FreshNames fresh(taken);
    std::set<std::string> avoid = detail::names_of(phi);
    USentence right = detail::rename_usentence(psi, phi.universal, avoid, fresh);
    USentence out = phi;
    out.exists.insert(out.exists.end(), right.exists.begin(), right.exists.end());
    out.eta.insert(out.eta.end(), right.eta.begin(), right.eta.end());
    out.theta = make_and(phi.theta, right.theta);
    return out;
}

// φ′(ȳ) = ∃x̄(const(x̄) ∧ η′ ∧ θ), where every R(z̄) in η becomes
// z̄ = z̄ ∨ (ne(z̄) ∧ z̄ = ȳ). The result mentions no relation symbols.
inline FormulaPtr usentence_translate(const USentence& u) {
    if (auto cs = u.constants(); !cs.empty())
        throw ValidationError("constant '" + *cs.begin() + "' cannot be translated to the empty signature");
    detail::require_relation_arity(u);
    std::vector<FormulaPtr> parts;
    if (!u.exists.empty()) parts.push_back(make_const(u.exists));
    for (const auto& l : u.eta) {
        if (l->kind() != Kind::relation) {
            parts.push_back(to_nnf(l));
            continue;
        }
        std::vector<std::string> zs;
        std::vector<FormulaPtr> refl, match;
        for (std::size_t i = 0; i < l->terms().size(); ++i) {
            const std::string& z = l->terms()[i].name;
            zs.push_back(z);
            refl.push_back(make_eq(z, z));
            match.push_back(make_eq(z, u.universal[i]));
        }
        std::vector<FormulaPtr> hit{make_ne(zs)};
        hit.insert(hit.end(), match.begin(), match.end());
        parts.push_back(make_or(make_and(refl), make_and(hit)));
    }
    parts.push_back(to_nnf(u.theta));
    return make_exists(u.exists, make_and(parts));
}

// ⊔ᵢ φ′ᵢ(ȳ), every disjunct written over the first sentence's ȳ.
inline FormulaPtr disjunction_translate(const std::vector<USentence>& sentences) {
    if (sentences.empty()) throw DomainError("empty list of U-sentences");
    const auto& ys = sentences.front().universal;
    std::set<std::string> taken;
    for (const auto& u : sentences) {
        if (u.arity() != ys.size()) throw DomainError("arity mismatch between U-sentences");
        for (const auto& n : detail::names_of(u)) taken.insert(n);
    }
    FreshNames fresh(taken);
    const std::set<std::string> avoid(ys.begin(), ys.end());
    FormulaPtr out;
    for (const auto& u : sentences) {
        FormulaPtr t = usentence_translate(detail::rename_usentence(u, ys, avoid, fresh));
        out = out ? make_gor(out, t) : t;
    }
    return out;
}

enum class UEmbeddingMode {
    // θ ranges over quantifier-free formulas: identity types relative to A.
    identity_type,
    // θ ranges over all first-order formulas of the empty signature.
    first_order,
};

struct UEmbeddingVerdict {
    bool pass = true;
    std::string reason;
    std::vector<std::string> witness;  // the offending tuple of S, if any
};

// Decides whether (A,R) is U-embedded in (B,S) for finite structures, with
// the parameters ā listing all of A. A ⊆ B is a precondition; an R that is
// not S restricted to A fails the first clause of the definition.
inline UEmbeddingVerdict u_embedding_check(const Structure& sub, const Structure& sup, const std::string& relation = "R",
                                           UEmbeddingMode mode = UEmbeddingMode::identity_type) {
    std::vector<Element> embed(sub.size());
    for (std::size_t i = 0; i < sub.size(); ++i) {
        auto e = sup.find_element(sub.domain_names()[i]);
        if (!e) throw PreconditionError("not a substructure: element '" + sub.domain_names()[i] + "' missing");
        embed[i] = *e;
    }
    const TupleSet& R = sub.relation(relation).tuples();
    const TupleSet& S = sup.relation(relation).tuples();
    if (R.arity() != S.arity()) throw PreconditionError("not a substructure: relation arities differ");
    const std::size_t k = R.arity();
    UEmbeddingVerdict v;
    auto names = [&](std::span<const Element> t) {
        std::vector<std::string> out;
        for (Element e : t) out.push_back(sup.name(e));
        return out;
    };

    std::vector<Element> lifted;
    for (std::size_t i = 0; i < R.size(); ++i) {
        Tuple t;
        for (Element e : R[i]) t.push_back(embed[e.index]);
        lifted.insert(lifted.end(), t.begin(), t.end());
    }
    const TupleSet RB(k, std::move(lifted), R.size());
    std::vector<bool> in_a(sup.size(), false);
    for (Element e : embed) in_a[e.index] = true;
    for (std::size_t i = 0; i < S.size(); ++i) {
        auto t = S[i];
        bool inside = std::all_of(t.begin(), t.end(), [&](Element e) { return in_a[e.index]; });
        if (inside && !RB.contains(t)) {
            v.pass = false;
            v.reason = "not a substructure: R is not S restricted to A";
            v.witness = names(t);
            return v;
        }
    }
    for (std::size_t i = 0; i < RB.size(); ++i)
        if (!S.contains(RB[i])) {
            v.pass = false;
            v.reason = "not a substructure: R is not contained in S";
            v.witness = names(RB[i]);
            return v;
        }

    // Every b̄ ∈ S must share its identity type over ā with some r̄ ∈ R.
    for (std::size_t i = 0; i < S.size(); ++i) {
        Tuple bt(S[i].begin(), S[i].end());
        bt.insert(bt.end(), embed.begin(), embed.end());
        const IdentityType want = identity_type_of(bt);
        bool realized = false;
        for (std::size_t j = 0; j < RB.size() && !realized; ++j) {
            Tuple rt(RB[j].begin(), RB[j].end());
            rt.insert(rt.end(), embed.begin(), embed.end());
            realized = want.matches(rt);
        }
        if (!realized) {
            v.pass = false;
            v.reason = "no tuple of R realizes the identity type of this tuple over A";
            v.witness = names(S[i]);
            return v;
        }
    }
    // With quantifiers, θ can also say "every element is among ā", which
    // holds in A but not in a strictly larger B once S is nonempty.
    if (mode == UEmbeddingMode::first_order && !S.empty() && sub.size() != sup.size()) {
        v.pass = false;
        v.reason = "B has elements outside A and S is nonempty";
        v.witness = names(S[0]);
    }
    return v;
}

}  // namespace teamlogic
