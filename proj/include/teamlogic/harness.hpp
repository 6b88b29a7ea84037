#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "classes.hpp"
#include "dependency.hpp"
#include "dependency_checks.hpp"
#include "errors.hpp"
#include "formula.hpp"
#include "parser.hpp"
#include "structure.hpp"
#include "tarski.hpp"
#include "teameval.hpp"
#include "ulogic.hpp"

namespace teamlogic {

// ---- exhaustive instance enumeration ------------------------------------------

struct Instance {
    Structure structure;
    Team team;
};

struct EnumerationBounds {
    std::size_t max_domain = 1;
    std::vector<std::pair<std::string, std::size_t>> relations;  // name, arity
    std::vector<std::string> vars;
    double max_instances = 5e7;
};

// The team of every assignment of `vars` into M.
inline Team full_team(const Structure& M, const std::vector<std::string>& vars) {
    Team X = Team::unit();
    for (const auto& v : vars) X = extend_universal(X, v, M);
    return X;
}

// Every structure over {a}, {a,b}, ... up to max_domain interpreting the
// given relations, in order: domain size, then relation masks with the
// first relation most significant.
inline std::vector<Structure> enumerate_structures(std::size_t max_domain,
                                                   const std::vector<std::pair<std::string, std::size_t>>& relations) {
    std::vector<Structure> out;
    for (std::size_t n = 1; n <= max_domain; ++n) {
        Structure base(element_names(n));
        std::vector<std::uint64_t> counts;
        for (const auto& [r, k] : relations) {
            if (power(n, k) > 24) throw BudgetExceeded("too many relations to enumerate for '" + r + "'");
            counts.push_back(std::uint64_t{1} << power(n, k));
        }
        std::uint64_t combos = 1;
        for (auto c : counts) combos *= c;
        for (std::uint64_t idx = 0; idx < combos; ++idx) {
            Structure M = base;
            std::uint64_t rest = idx;
            for (std::size_t i = relations.size(); i-- > 0;) {
                M = M.with_relation(relations[i].first, relation_from_mask(n, relations[i].second, rest % counts[i]));
                rest /= counts[i];
            }
            out.push_back(std::move(M));
        }
    }
    return out;
}

// Restartable enumeration of (structure, team) pairs. Teams are the
// subteams of the full team over `vars`, indexed by row masks.
class InstanceEnumerator {
public:
    explicit InstanceEnumerator(EnumerationBounds bounds) : bounds_(std::move(bounds)) {
        if (bounds_.max_domain == 0) throw DomainError("max_domain must be at least 1");
        structures_ = enumerate_structures(bounds_.max_domain, bounds_.relations);
        double total = 0;
        for (const auto& M : structures_) total += std::pow(2.0, static_cast<double>(power(M.size(), bounds_.vars.size())));
        if (total > bounds_.max_instances)
            throw BudgetExceeded("enumeration would produce about " + std::to_string(total) + " instances");
        total_ = static_cast<std::uint64_t>(total);
        reset();
    }

    void reset() {
        s_ = 0;
        mask_ = 0;
        if (!structures_.empty()) full_ = full_team(structures_[0], bounds_.vars);
    }

    std::optional<Instance> next() {
        while (s_ < structures_.size()) {
            if (mask_ < (std::uint64_t{1} << full_.size())) return Instance{structures_[s_], full_.select_mask(mask_++)};
            if (++s_ < structures_.size()) {
                mask_ = 0;
                full_ = full_team(structures_[s_], bounds_.vars);
            }
        }
        return std::nullopt;
    }

    std::uint64_t total() const noexcept { return total_; }
    const std::vector<Structure>& structures() const noexcept { return structures_; }
    const EnumerationBounds& bounds() const noexcept { return bounds_; }

private:
    EnumerationBounds bounds_;
    std::vector<Structure> structures_;
    std::uint64_t total_ = 0;
    std::size_t s_ = 0;
    std::uint64_t mask_ = 0;
    Team full_;
};

inline InstanceEnumerator enumerate_instances(std::size_t max_domain, std::size_t arity, std::vector<std::string> vars,
                                              const std::string& relation = "R") {
    if (arity == 0) throw DomainError("arity must be at least 1");
    return InstanceEnumerator(EnumerationBounds{max_domain, {{relation, arity}}, std::move(vars)});
}

// ---- semantic equivalence -------------------------------------------------------

struct EquivalenceVerdict {
    bool equivalent = true;
    std::size_t bound = 0;
    std::uint64_t instances = 0;
    std::optional<Instance> counterexample;
};

struct EquivalenceBounds {
    std::size_t max_domain = 3;
    double max_instances = 5e7;
};

// Compares team_eval of φ and ψ on every (M, X) with |M| ≤ max_domain and X
// ranging over all teams on the shared free variables.
inline EquivalenceVerdict check_semantic_equivalence(const FormulaPtr& phi, const FormulaPtr& psi, EquivalenceBounds bounds = {},
                                                     const DependencyRegistry& registry = {}, EvalOptions options = {}) {
    if (phi->free_vars() != psi->free_vars()) throw PreconditionError("formulas have different free variables");
    std::set<std::string> consts;
    collect_constants(*phi, consts);
    collect_constants(*psi, consts);
    if (!consts.empty()) throw PreconditionError("constant symbols are not enumerated: '" + *consts.begin() + "'");
    std::map<std::string, std::size_t> rels;
    collect_relations(*phi, rels);
    collect_relations(*psi, rels);
    EnumerationBounds eb{bounds.max_domain, {rels.begin(), rels.end()}, phi->free_vars(), bounds.max_instances};
    InstanceEnumerator en(eb);
    EquivalenceVerdict v;
    v.bound = bounds.max_domain;
    for (const auto& M : en.structures()) {
        const Team U = full_team(M, eb.vars);
        TeamEvaluator a(M, registry, options), b(M, registry, options);
        std::vector<bool> va, vb;
        if (U.size() <= 24) {
            va = a.evaluate_subteams(U, *phi);
            vb = b.evaluate_subteams(U, *psi);
        } else {
            throw BudgetExceeded("team of " + std::to_string(U.size()) + " rows is too large to enumerate");
        }
        for (std::size_t m = 0; m < va.size(); ++m) {
            ++v.instances;
            if (va[m] != vb[m]) {
                v.equivalent = false;
                v.counterexample = Instance{M, U.select_mask(m)};
                return v;
            }
        }
    }
    return v;
}

// Random instead of exhaustive instances: `samples` structures with domain
// size uniform in 1..max_domain, every tuple and every team row included
// with probability 1/2. Deterministic for a given seed.
inline EquivalenceVerdict check_semantic_equivalence_sampled(const FormulaPtr& phi, const FormulaPtr& psi, std::size_t max_domain,
                                                             std::size_t samples, std::uint64_t seed,
                                                             const DependencyRegistry& registry = {}, EvalOptions options = {}) {
    if (max_domain == 0) throw DomainError("max_domain must be at least 1");
    if (phi->free_vars() != psi->free_vars()) throw PreconditionError("formulas have different free variables");
    std::set<std::string> consts;
    collect_constants(*phi, consts);
    collect_constants(*psi, consts);
    if (!consts.empty()) throw PreconditionError("constant symbols are not sampled: '" + *consts.begin() + "'");
    std::map<std::string, std::size_t> rels;
    collect_relations(*phi, rels);
    collect_relations(*psi, rels);
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(0.5);
    EquivalenceVerdict v;
    v.bound = max_domain;
    for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t n = std::uniform_int_distribution<std::size_t>(1, max_domain)(rng);
        Structure M(element_names(n));
        for (const auto& [r, k] : rels) {
            const Team all = full_team(M, element_names(k));
            std::vector<Tuple> ts;
            for (std::size_t i = 0; i < all.size(); ++i)
                if (coin(rng)) ts.emplace_back(all.row(i).begin(), all.row(i).end());
            M = M.with_relation(r, TupleSet(k, ts));
        }
        const Team U = full_team(M, phi->free_vars());
        std::vector<std::size_t> keep;
        for (std::size_t i = 0; i < U.size(); ++i)
            if (coin(rng)) keep.push_back(i);
        const Team X = U.select(keep);
        ++v.instances;
        if (team_eval(M, X, *phi, registry, options) != team_eval(M, X, *psi, registry, options)) {
            v.equivalent = false;
            v.counterexample = Instance{M, X};
            return v;
        }
    }
    return v;
}

// ---- the chain construction -------------------------------------------------------

// One step R_n ⊆ S_n of a chain R₁ ⊆ S₁ ⊆ R₂ ⊆ S₂ ⊆ ...
struct ChainLink {
    TupleSet R;
    TupleSet S;
};

struct ChainInstance {
    Structure structure;
    FormulaPtr sentence;
    DependencyRegistry registry;
    std::size_t d = 0;
};

// Domain: the base elements plus indices "1".."L", L = max(#links, d).
// Relations: N (indices), Lt (index order), R and S of arity k+1 pairing an
// index n with the tuples of R_n and S_n. The sentence is
//   exists i. (Lt(i,d) & forall v1..vk. (S(i,v1..vk) ->> D:name(v1..vk))).
inline ChainInstance build_chain_instance(std::size_t d, const Dependency& D, const std::vector<std::string>& base_domain,
                                          const std::vector<ChainLink>& chain) {
    if (chain.empty()) throw PreconditionError("malformed chain: no links");
    if (d < 1 || d > chain.size()) throw PreconditionError("d must lie between 1 and the chain length");
    const std::size_t k = D.arity();
    for (std::size_t i = 0; i < chain.size(); ++i) {
        if (chain[i].R.arity() != k || chain[i].S.arity() != k)
            throw PreconditionError("malformed chain: relation arity differs from the dependency");
        if (!chain[i].R.is_subset_of(chain[i].S)) throw PreconditionError("malformed chain: R_n is not contained in S_n");
        if (i + 1 < chain.size() && !chain[i].S.is_subset_of(chain[i + 1].R))
            throw PreconditionError("malformed chain: S_n is not contained in R_(n+1)");
        for (Element e : chain[i].S.cells())
            if (e.index >= base_domain.size()) throw PreconditionError("malformed chain: element outside the base domain");
    }
    const std::size_t L = std::max(chain.size(), d);
    std::vector<std::string> names = base_domain;
    for (std::size_t n = 1; n <= L; ++n) {
        if (std::find(base_domain.begin(), base_domain.end(), std::to_string(n)) != base_domain.end())
            throw PreconditionError("base domain clashes with index element '" + std::to_string(n) + "'");
        names.push_back(std::to_string(n));
    }
    Structure M(names);
    const auto index = [&](std::size_t n) { return Element{static_cast<std::uint32_t>(base_domain.size() + n - 1)}; };
    std::vector<Tuple> nrel, lt, rrel, srel;
    for (std::size_t n = 1; n <= L; ++n) {
        nrel.push_back({index(n)});
        for (std::size_t m = n + 1; m <= L; ++m) lt.push_back({index(n), index(m)});
    }
    for (std::size_t n = 1; n <= chain.size(); ++n) {
        for (const auto& [rel, src] : {std::pair{&rrel, &chain[n - 1].R}, std::pair{&srel, &chain[n - 1].S}})
            for (std::size_t i = 0; i < src->size(); ++i) {
                Tuple t{index(n)};
                t.insert(t.end(), (*src)[i].begin(), (*src)[i].end());
                rel->push_back(std::move(t));
            }
    }
    M = M.with_relation("N", TupleSet(1, nrel))
            .with_relation("R", TupleSet(k + 1, rrel))
            .with_relation("S", TupleSet(k + 1, srel))
            .with_constant("d", index(d));
    if (!lt.empty()) M = M.with_relation("Lt", TupleSet(2, lt));
    else M = M.with_relation("Lt", TupleSet(2));

    std::vector<std::string> vs;
    std::vector<Term> sargs{var("i")};
    for (std::size_t j = 1; j <= k; ++j) {
        vs.push_back("v" + std::to_string(j));
        sargs.push_back(var(vs.back()));
    }
    FormulaPtr body = make_forall(vs, make_hook(make_relation("S", sargs), make_named(D.name(), vs)));
    FormulaPtr sentence = make_exists("i", make_and(make_relation("Lt", {var("i"), cst("d")}), body));
    ChainInstance out{M, sentence, DependencyRegistry{D}, d};
    return out;
}

// ---- the parity construction ---------------------------------------------------------

struct ParityInstance {
    Structure structure;
    FormulaPtr sentence;
    Dependency dependency;
    DependencyRegistry registry;
    std::size_t ell = 0;
};

inline Dependency antisymmetry_dependency() {
    return Dependency::first_order("antisym", 2, parse_formula("forall x,y. ((R(x,y) & R(y,x)) -> x=y)"));
}

// Even cardinality of the domain: x ↦ y is a fixed-point-free involution.
inline const char* even_cardinality_text() {
    return "forall x. exists y. forall z. exists w. (dep(x;y) & dep(z;w) & "
           "((x=z & y!=w) ->> x!=x) & ((x=w & y!=z) ->> x!=x) & x!=y)";
}

inline const char* parity_sentence_text() {
    return "forall n,n'. ((N(n) & N(n')) ->> (exists v,v'. ("
           "(n=one ->> v=one) & (n=end ->> v!=one) & "
           "(E(n,n') ->> ((v=one ->> v'!=one) & (v!=one ->> v'=one))) & "
           "(forall z1,z2. (((v=one & Q(n,z1,z2)) | (v!=one & T(n,z1,z2))) ->> D:antisym(z1,z2))) & "
           "(forall w1,w2. (((v'=one & Q(n',w1,w2)) | (v'!=one & T(n',w1,w2))) ->> D:antisym(w1,w2))) & "
           "(n=n' ->> v=v'))))";
}

// M_ℓ over {1..ℓ} ∪ {p_i, q_i : i ≤ ℓ} with Q = {(i,p_i,q_i)}, T = {(i,q_i,p_i)}
// and the antisymmetry class as D, so that R_{I,J} ∈ D iff I ∩ J = ∅.
inline ParityInstance build_parity_instance(std::size_t ell) {
    if (ell < 2) throw PreconditionError("ell must be at least 2");
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= ell; ++i) names.push_back(std::to_string(i));
    for (std::size_t i = 1; i <= ell; ++i) {
        names.push_back("p" + std::to_string(i));
        names.push_back("q" + std::to_string(i));
    }
    Structure M(names);
    std::vector<Tuple> nrel, erel, qrel, trel;
    for (std::size_t i = 1; i <= ell; ++i) {
        const Element n = M.element(std::to_string(i));
        const Element p = M.element("p" + std::to_string(i)), q = M.element("q" + std::to_string(i));
        nrel.push_back({n});
        if (i < ell) erel.push_back({n, M.element(std::to_string(i + 1))});
        qrel.push_back({n, p, q});
        trel.push_back({n, q, p});
    }
    M = M.with_relation("N", TupleSet(1, nrel))
            .with_relation("E", TupleSet(2, erel))
            .with_relation("Q", TupleSet(3, qrel))
            .with_relation("T", TupleSet(3, trel))
            .with_constant("one", M.element("1"))
            .with_constant("end", M.element(std::to_string(ell)));
    Dependency D = antisymmetry_dependency();
    DependencyRegistry reg{D};
    ParseOptions po;
    po.constants = {"one", "end"};
    po.dependency_arity = [&reg](const std::string& n) { return reg.arity(n); };
    FormulaPtr sentence = parse_formula(parity_sentence_text(), po);
    return ParityInstance{M, sentence, D, reg, ell};
}

// ---- transfer of U-sentences ---------------------------------------------------------

struct TransferReport {
    bool pass = true;
    std::vector<std::size_t> violations;  // catalogue indices with A ⊨ φ but B ⊭ φ
};

inline TransferReport u_transfer_check(const Structure& A, const Structure& B, const std::vector<USentence>& catalogue) {
    TransferReport rep;
    for (std::size_t i = 0; i < catalogue.size(); ++i) {
        const FormulaPtr f = catalogue[i].to_formula();
        if (tarski_eval(A, *f) && !tarski_eval(B, *f)) {
            rep.pass = false;
            rep.violations.push_back(i);
        }
    }
    return rep;
}

// ---- catalogue of U-sentences -----------------------------------------------------

struct NamedUSentence {
    std::string name;
    USentence sentence;
};

inline USentence usentence_from_text(const std::string& text) { return validate_usentence(parse_formula_raw(text)); }

// A fixed catalogue of U-sentences of the given arity (1 or 2), followed by
// conjunction-closure outputs of some of its members.
inline std::vector<NamedUSentence> usentence_catalogue(std::size_t arity) {
    std::vector<std::pair<std::string, std::string>> texts;
    if (arity == 1) {
        texts = {
            {"nonempty", "exists x. (R(x) & forall y. (R(y) -> y=y))"},
            {"constancy", "exists x. forall y. (R(y) -> y=x)"},
            {"singleton", "exists x. (R(x) & forall y. (R(y) -> y=x))"},
            {"empty", "exists x. forall y. (R(y) -> y!=y)"},
            {"trivial", "exists x. (x=x & forall y. (R(y) -> y=y))"},
            {"at_most_two", "exists x1,x2. forall y. (R(y) -> (y=x1 | y=x2))"},
            {"two_members", "exists x1,x2. (R(x1) & R(x2) & x1!=x2 & forall y. (R(y) -> y=y))"},
            {"member_excluded", "exists x1,x2. (R(x1) & x1!=x2 & forall y. (R(y) -> y!=x2))"},
            {"all_but_member", "exists x. (R(x) & forall y. (R(y) -> (exists z. (z!=y & z!=x) | y=x)))"},
        };
    } else if (arity == 2) {
        texts = {
            {"nonempty", "exists x1,x2. (R(x1,x2) & forall y1,y2. (R(y1,y2) -> y1=y1))"},
            {"constancy", "exists x1,x2. forall y1,y2. (R(y1,y2) -> (y1=x1 & y2=x2))"},
            {"singleton", "exists x1,x2. (R(x1,x2) & forall y1,y2. (R(y1,y2) -> (y1=x1 & y2=x2)))"},
            {"empty", "exists x. forall y1,y2. (R(y1,y2) -> y1!=y1)"},
            {"trivial", "exists x. (x=x & forall y1,y2. (R(y1,y2) -> y1=y1))"},
            {"diagonal_member", "exists x. (R(x,x) & forall y1,y2. (R(y1,y2) -> y1=y1))"},
            {"irreflexive", "forall y1,y2. (R(y1,y2) -> y1!=y2)"},
            {"first_fixed", "exists x1,x2. (R(x1,x2) & forall y1,y2. (R(y1,y2) -> y1=x1))"},
            {"loop_or_fixed", "exists x. (R(x,x) & forall y1,y2. (R(y1,y2) -> (y1=y2 | y2=x)))"},
        };
    } else {
        throw DomainError("catalogue only covers arity 1 and 2");
    }
    std::vector<NamedUSentence> out;
    for (const auto& [n, t] : texts) out.push_back({n, usentence_from_text(t)});
    auto find = [&](const std::string& n) -> const USentence& {
        for (const auto& e : out)
            if (e.name == n) return e.sentence;
        throw DomainError(n);
    };
    const std::vector<std::pair<std::string, std::string>> pairs =
        arity == 1 ? std::vector<std::pair<std::string, std::string>>{{"nonempty", "constancy"},
                                                                       {"at_most_two", "two_members"},
                                                                       {"singleton", "member_excluded"}}
                   : std::vector<std::pair<std::string, std::string>>{{"nonempty", "constancy"},
                                                                      {"diagonal_member", "irreflexive"},
                                                                      {"first_fixed", "loop_or_fixed"}};
    for (const auto& [a, b] : pairs) out.push_back({a + "+" + b, usentence_conjoin(find(a), find(b))});
    return out;
}

// ---- random formula generators ---------------------------------------------------------

struct GeneratorOptions {
    std::size_t max_depth = 3;
    std::vector<std::pair<std::string, std::size_t>> relations{{"E", 2}};
    std::vector<std::string> free_vars{"x", "y"};
    std::vector<std::string> bound_vars{"x", "y", "z"};
    // Dependency atoms are only generated when this is set.
    bool dependency_atoms = false;
};

// NNF formulas whose free variables lie within free_vars. Quantifiers may
// rebind a variable already in scope.
class FormulaGenerator {
public:
    explicit FormulaGenerator(std::uint64_t seed, GeneratorOptions options = {}) : rng_(seed), opt_(std::move(options)) {}

    FormulaPtr next() { return gen(opt_.max_depth, opt_.free_vars); }
    FormulaPtr first_order(std::size_t depth, const std::vector<std::string>& scope) {
        bool saved = opt_.dependency_atoms;
        opt_.dependency_atoms = false;
        FormulaPtr f = gen(depth, scope);
        opt_.dependency_atoms = saved;
        return f;
    }

private:
    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
    const std::string& pick_var(const std::vector<std::string>& scope) { return scope[pick(scope.size())]; }

    FormulaPtr literal(const std::vector<std::string>& scope) {
        const bool negated = pick(2) == 1;
        if (!opt_.relations.empty() && pick(3) != 0) {
            const auto& [r, k] = opt_.relations[pick(opt_.relations.size())];
            std::vector<Term> ts;
            for (std::size_t i = 0; i < k; ++i) ts.push_back(var(pick_var(scope)));
            return make_relation(r, ts, negated);
        }
        return make_equality(var(pick_var(scope)), var(pick_var(scope)), negated);
    }

    FormulaPtr dependency_atom(const std::vector<std::string>& scope) {
        switch (pick(4)) {
        case 0: return make_dep({pick_var(scope)}, {pick_var(scope)});
        case 1: return make_const({pick_var(scope)});
        case 2: return make_ne({pick_var(scope)});
        default: return make_dependency(AtomKind::inclusion, {pick_var(scope)}, {pick_var(scope)});
        }
    }

    FormulaPtr gen(std::size_t depth, const std::vector<std::string>& scope) {
        if (depth == 0 || pick(5) == 0) {
            if (opt_.dependency_atoms && pick(3) == 0) return dependency_atom(scope);
            return literal(scope);
        }
        switch (pick(4)) {
        case 0: return make_and(gen(depth - 1, scope), gen(depth - 1, scope));
        case 1: return make_or(gen(depth - 1, scope), gen(depth - 1, scope));
        default: {
            const std::string& v = opt_.bound_vars[pick(opt_.bound_vars.size())];
            std::vector<std::string> inner = scope;
            if (std::find(inner.begin(), inner.end(), v) == inner.end()) inner.push_back(v);
            FormulaPtr body = gen(depth - 1, inner);
            return pick(2) == 0 ? make_exists(v, body) : make_forall(v, body);
        }
        }
    }

    std::mt19937_64 rng_;
    GeneratorOptions opt_;
};

// ---- independent oracles --------------------------------------------------------------
//
// None of these call the team evaluator; each decides its question by direct
// search over the objects named in the corresponding construction.

namespace oracle {

// Direct closed forms, written without the dependency module.
inline bool nonempty(const std::vector<Tuple>& rel) { return !rel.empty(); }

inline bool functional_1_1(const std::vector<Tuple>& rel) {
    for (const auto& a : rel)
        for (const auto& b : rel)
            if (a[0] == b[0] && a[1] != b[1]) return false;
    return true;
}

// Some nonempty I ⊆ {1..d-1} has D(⋃_{n∈I} S_n), by subset search.
template <class Member>
bool chain_subset_search(const std::vector<std::vector<Tuple>>& S, std::size_t d, Member&& member) {
    const std::size_t m = std::min(S.size(), d > 0 ? d - 1 : 0);
    for (std::uint64_t I = 1; I < (std::uint64_t{1} << m); ++I) {
        std::vector<Tuple> uni;
        for (std::size_t n = 0; n < m; ++n)
            if (I >> n & 1u)
                for (const auto& t : S[n])
                    if (std::find(uni.begin(), uni.end(), t) == uni.end()) uni.push_back(t);
        if (member(uni)) return true;
    }
    return false;
}

// Search over (I, J) ⊆ {1..ℓ}² for the index sets the parity proof extracts
// from a satisfying team: I ∪ J covers, 1 ∈ I \ J, ℓ ∈ J \ I, successors
// alternate, and the union of Q_i (i ∈ I) and T_j (j ∈ J) is antisymmetric.
// With n = n' forcing I = I′ and J = J′ the primed sets coincide.
inline bool parity_index_sets(std::size_t ell) {
    for (std::uint64_t I = 0; I < (std::uint64_t{1} << ell); ++I)
        for (std::uint64_t J = 0; J < (std::uint64_t{1} << ell); ++J) {
            const std::uint64_t all = (std::uint64_t{1} << ell) - 1;
            if ((I | J) != all) continue;
            if (!(I & 1u) || (J & 1u)) continue;
            const std::uint64_t last = std::uint64_t{1} << (ell - 1);
            if (!(J & last) || (I & last)) continue;
            bool alternate = true;
            for (std::size_t i = 0; i + 1 < ell; ++i) {
                if ((I >> i & 1u) && !(J >> (i + 1) & 1u)) alternate = false;
                if ((J >> i & 1u) && !(I >> (i + 1) & 1u)) alternate = false;
            }
            if (!alternate) continue;
            // Pairs (p_i, q_i) from Q and (q_j, p_j) from T; a 2-cycle needs
            // the same index in both sets.
            std::set<std::pair<std::string, std::string>> rel;
            for (std::size_t i = 0; i < ell; ++i) {
                const std::string p = "p" + std::to_string(i + 1), q = "q" + std::to_string(i + 1);
                if (I >> i & 1u) rel.insert({p, q});
                if (J >> i & 1u) rel.insert({q, p});
            }
            bool antisymmetric = true;
            for (const auto& [a, b] : rel)
                if (a != b && rel.count({b, a})) antisymmetric = false;
            if (antisymmetric) return true;
        }
    return false;
}

// A fixed-point-free involution on n points exists, by exhaustive search.
inline bool fixed_point_free_involution(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    do {
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) ok = p[i] != i && p[p[i]] == i;
        if (ok) return true;
    } while (std::next_permutation(p.begin(), p.end()));
    return false;
}

}  // namespace oracle

}  // namespace teamlogic
