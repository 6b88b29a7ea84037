#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "dependency.hpp"
#include "errors.hpp"
#include "formula.hpp"
#include "structure.hpp"

namespace teamlogic {

// Canonical element names used by every bounded enumeration: a, b, c, ...
inline std::string element_name(std::size_t i) {
    if (i < 26) return std::string(1, static_cast<char>('a' + i));
    return "e" + std::to_string(i);
}
inline std::vector<std::string> element_names(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(element_name(i));
    return out;
}

using NamedTuples = std::vector<std::vector<std::string>>;

inline NamedTuples named_tuples(const Structure& M, const TupleSet& R) {
    NamedTuples out;
    for (std::size_t i = 0; i < R.size(); ++i) {
        std::vector<std::string> t;
        for (Element e : R[i]) t.push_back(M.name(e));
        out.push_back(std::move(t));
    }
    return out;
}

// Outcome of a bounded check. `pass` is only ever claimed at `bound`.
struct CheckResult {
    bool pass = true;
    std::size_t bound = 0;
    std::string property;
    std::vector<std::string> domain;        // M, or A for substructure checks
    NamedTuples relation;                   // R
    std::vector<std::string> other_domain;  // N, or B
    NamedTuples other_relation;             // S
    std::vector<NamedTuples> chain;
};

// The relation over M^k coded by a bitmask over tuples in lexicographic order.
inline TupleSet relation_from_mask(std::size_t n, std::size_t k, std::uint64_t mask) {
    std::vector<Element> cells;
    std::size_t rows = 0;
    std::size_t total = 1;
    for (std::size_t i = 0; i < k; ++i) total *= n;
    for (std::size_t code = 0; code < total; ++code) {
        if (!(mask >> code & 1u)) continue;
        std::size_t c = code;
        std::vector<Element> t(k);
        for (std::size_t i = k; i-- > 0;) {
            t[i] = Element{static_cast<std::uint32_t>(c % n)};
            c /= n;
        }
        cells.insert(cells.end(), t.begin(), t.end());
        ++rows;
    }
    return TupleSet::from_sorted(k, std::move(cells), rows);
}

inline std::size_t power(std::size_t n, std::size_t k) {
    std::size_t p = 1;
    for (std::size_t i = 0; i < k; ++i) p *= n;
    return p;
}

// ∀v̄(¬Rv̄ ∨ (Rv̄ ∧ D v̄)): true in {ε} exactly when (M, R^M) ∈ D.
inline FormulaPtr dep_class_sentence(const Dependency& D, const std::string& relation = "R") {
    std::vector<std::string> vs;
    std::vector<Term> ts;
    for (std::size_t i = 1; i <= D.arity(); ++i) {
        vs.push_back("v" + std::to_string(i));
        ts.push_back(var(vs.back()));
    }
    FormulaPtr body = make_or(make_relation(relation, ts, true), make_and(make_relation(relation, ts), make_named(D.name(), vs)));
    return make_forall(vs, body);
}

namespace detail {

// Nonempty subsets of {0..n-1} ordered by size, then lexicographically.
inline std::vector<std::vector<std::uint32_t>> ordered_subsets(std::size_t n) {
    std::vector<std::vector<std::uint32_t>> out;
    for (std::uint32_t m = 1; m < (1u << n); ++m) {
        std::vector<std::uint32_t> s;
        for (std::uint32_t i = 0; i < n; ++i)
            if (m >> i & 1u) s.push_back(i);
        out.push_back(std::move(s));
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    return out;
}

inline void check_room(double work, double budget) {
    if (work > budget) throw BudgetExceeded("bounded check needs about " + std::to_string(work) + " steps");
}

}  // namespace detail

// Every pair of nonempty domains M, N drawn from {a, b, ...} of size at most
// max_domain and every R ⊆ (M∩N)^k: (M,R) ∈ D ⟺ (N,R) ∈ D.
inline CheckResult check_domain_independence(const Dependency& D, std::size_t k, std::size_t max_domain,
                                             double budget = 1e8) {
    if (max_domain == 0) throw DomainError("max_domain must be at least 1");
    if (k != D.arity()) throw DomainError("arity mismatch");
    CheckResult res;
    res.property = "domain_independence";
    res.bound = max_domain;
    const auto universe = element_names(max_domain);
    const auto subsets = detail::ordered_subsets(max_domain);
    double work = 0;
    for (const auto& ms : subsets)
        for (const auto& ns : subsets) {
            std::size_t common = 0;
            for (auto x : ms) common += std::count(ns.begin(), ns.end(), x);
            work += std::pow(2.0, static_cast<double>(power(common, k)));
        }
    detail::check_room(work, budget);
    for (const auto& ms : subsets) {
        std::vector<std::string> mnames;
        for (auto i : ms) mnames.push_back(universe[i]);
        Structure M(mnames);
        for (const auto& ns : subsets) {
            std::vector<std::string> nnames, common;
            for (auto i : ns) nnames.push_back(universe[i]);
            for (auto i : ms)
                if (std::find(ns.begin(), ns.end(), i) != ns.end()) common.push_back(universe[i]);
            Structure N(nnames);
            const std::size_t c = common.size();
            const std::size_t cells = power(c, k);
            for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << cells); ++mask) {
                TupleSet base = c == 0 ? TupleSet(k) : relation_from_mask(c, k, mask);
                auto translate = [&](const Structure& S) {
                    std::vector<Element> cellsv;
                    for (Element e : base.cells()) cellsv.push_back(S.element(common[e.index]));
                    return TupleSet(k, std::move(cellsv), base.size());
                };
                TupleSet rm = translate(M), rn = translate(N);
                if (dep_holds(D, M, rm) != dep_holds(D, N, rn)) {
                    res.pass = false;
                    res.domain = mnames;
                    res.other_domain = nnames;
                    res.relation = named_tuples(M, rm);
                    return res;
                }
            }
        }
    }
    return res;
}

struct ClosureReport {
    CheckResult downwards, upwards, union_closed, isomorphism_closed;
};

// Bounded exhaustive closure checks over domains {a}, {a,b}, ... of size at
// most max_domain. Union closure is for nonempty families, so pairwise
// unions suffice on finite domains.
inline ClosureReport check_closure_properties(const Dependency& D, std::size_t k, std::size_t max_domain,
                                              double budget = 2e8) {
    if (max_domain == 0) throw DomainError("max_domain must be at least 1");
    if (k != D.arity()) throw DomainError("arity mismatch");
    ClosureReport rep;
    rep.downwards.property = "downwards";
    rep.upwards.property = "upwards";
    rep.union_closed.property = "union_closed";
    rep.isomorphism_closed.property = "isomorphism_closed";
    for (CheckResult* r : {&rep.downwards, &rep.upwards, &rep.union_closed, &rep.isomorphism_closed}) r->bound = max_domain;
    double work = 0;
    for (std::size_t n = 1; n <= max_domain; ++n) {
        const double cells = static_cast<double>(power(n, k));
        if (cells > 24) detail::check_room(std::pow(2.0, cells), 0);
        work += std::pow(3.0, cells) * 2 + std::pow(4.0, cells) / 2 + std::pow(2.0, cells) * std::tgamma(n + 1.0);
    }
    detail::check_room(work, budget);
    auto fail = [](CheckResult& r, const Structure& M, const TupleSet& a, const TupleSet& b) {
        if (!r.pass) return;
        r.pass = false;
        r.domain = M.domain_names();
        r.relation = named_tuples(M, a);
        r.other_domain = M.domain_names();
        r.other_relation = named_tuples(M, b);
    };
    for (std::size_t n = 1; n <= max_domain; ++n) {
        Structure M(element_names(n));
        const std::size_t cells = power(n, k);
        const std::uint64_t count = std::uint64_t{1} << cells;
        std::vector<bool> holds(count);
        for (std::uint64_t m = 0; m < count; ++m) holds[m] = dep_holds(D, M, relation_from_mask(n, k, m));
        auto rel = [&](std::uint64_t m) { return relation_from_mask(n, k, m); };
        for (std::uint64_t r = 0; r < count && rep.downwards.pass; ++r) {
            if (!holds[r]) continue;
            for (std::uint64_t s = 0; s < count; ++s)
                if ((s & r) == s && !holds[s]) {
                    fail(rep.downwards, M, rel(r), rel(s));
                    break;
                }
        }
        for (std::uint64_t r = 0; r < count && rep.upwards.pass; ++r) {
            if (!holds[r]) continue;
            for (std::uint64_t s = 0; s < count; ++s)
                if ((s & r) == r && !holds[s]) {
                    fail(rep.upwards, M, rel(r), rel(s));
                    break;
                }
        }
        for (std::uint64_t a = 0; a < count && rep.union_closed.pass; ++a) {
            if (!holds[a]) continue;
            for (std::uint64_t b = a + 1; b < count; ++b)
                if (holds[b] && !holds[a | b]) {
                    // Report the two members; the union is implied.
                    fail(rep.union_closed, M, rel(a), rel(b));
                    break;
                }
        }
        std::vector<std::uint32_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0u);
        while (rep.isomorphism_closed.pass && std::next_permutation(perm.begin(), perm.end())) {
            for (std::uint64_t r = 0; r < count; ++r) {
                TupleSet R = rel(r);
                std::vector<Element> moved;
                for (Element e : R.cells()) moved.push_back(Element{perm[e.index]});
                TupleSet image(k, std::move(moved), R.size());
                if (holds[r] != dep_holds(D, M, image)) {
                    fail(rep.isomorphism_closed, M, R, image);
                    break;
                }
            }
        }
    }
    return rep;
}

// Finite chains R₁ ⊆ … ⊆ R_n over M: if every member is in D, so is the union.
inline CheckResult check_union_chain_preservation(const Dependency& D, const Structure& M, const std::vector<TupleSet>& chain) {
    CheckResult res;
    res.property = "union_of_chain";
    res.bound = M.size();
    if (chain.empty()) throw PreconditionError("empty chain");
    for (std::size_t i = 0; i + 1 < chain.size(); ++i)
        if (!chain[i].is_subset_of(chain[i + 1])) throw PreconditionError("chain members are not increasing");
    TupleSet U = chain.front();
    bool all = true;
    for (const auto& R : chain) {
        all = all && dep_holds(D, M, R);
        U = U.united(R);
    }
    if (all && !dep_holds(D, M, U)) {
        res.pass = false;
        res.domain = M.domain_names();
        for (const auto& R : chain) res.chain.push_back(named_tuples(M, R));
        res.relation = named_tuples(M, U);
    }
    return res;
}

// If a retraction homomorphism (B,S) → (A,R) exists and (B,S) ∈ D, then
// (A,R) ∈ D must hold.
inline CheckResult check_hom_preservation(const Dependency& D, const Structure& sub, const Structure& sup,
                                          const std::string& relation = "R") {
    CheckResult res;
    res.property = "retraction_homomorphism";
    res.bound = sup.size();
    bool has_hom = false;
    for_each_retraction_hom(sub, sup, relation, [&](const RetractionHom&) {
        has_hom = true;
        return false;
    });
    const TupleSet& R = sub.relation(relation).tuples();
    const TupleSet& S = sup.relation(relation).tuples();
    if (has_hom && dep_holds(D, sup, S) && !dep_holds(D, sub, R)) {
        res.pass = false;
        res.domain = sub.domain_names();
        res.relation = named_tuples(sub, R);
        res.other_domain = sup.domain_names();
        res.other_relation = named_tuples(sup, S);
    }
    return res;
}

// Exhaustive search for a retraction-homomorphism violation: B = {a, ...}
// with |B| ≤ max_domain, A a nonempty subset of B, S ⊆ B^k, R = S ∩ A^k.
inline CheckResult search_hom_counterexample(const Dependency& D, std::size_t max_domain, const std::string& relation = "R") {
    const std::size_t k = D.arity();
    CheckResult last;
    last.property = "retraction_homomorphism";
    last.bound = max_domain;
    for (std::size_t nb = 1; nb <= max_domain; ++nb) {
        const auto bnames = element_names(nb);
        detail::check_room(std::pow(2.0, static_cast<double>(power(nb, k))), 1e7);
        const std::uint64_t count = std::uint64_t{1} << power(nb, k);
        for (const auto& as : detail::ordered_subsets(nb)) {
            std::vector<std::string> anames;
            for (auto i : as) anames.push_back(bnames[i]);
            for (std::uint64_t m = 0; m < count; ++m) {
                TupleSet S = relation_from_mask(nb, k, m);
                std::vector<Element> cells;
                std::size_t rows = 0;
                for (std::size_t i = 0; i < S.size(); ++i) {
                    bool inside = true;
                    std::vector<Element> t;
                    for (Element e : S[i]) {
                        auto pos = std::find(as.begin(), as.end(), e.index);
                        if (pos == as.end()) inside = false;
                        else t.push_back(Element{static_cast<std::uint32_t>(pos - as.begin())});
                    }
                    if (!inside) continue;
                    cells.insert(cells.end(), t.begin(), t.end());
                    ++rows;
                }
                Structure B = Structure(bnames).with_relation(relation, S);
                Structure A = Structure(anames).with_relation(relation, TupleSet(k, std::move(cells), rows));
                CheckResult r = check_hom_preservation(D, A, B, relation);
                if (!r.pass) {
                    r.bound = max_domain;
                    return r;
                }
            }
        }
    }
    return last;
}

// Exhaustive union-of-chain search over all chains of length ≤ max_length
// on domains of size ≤ max_domain.
inline CheckResult search_chain_counterexample(const Dependency& D, std::size_t max_domain, std::size_t max_length) {
    const std::size_t k = D.arity();
    CheckResult res;
    res.property = "union_of_chain";
    res.bound = max_domain;
    for (std::size_t n = 1; n <= max_domain; ++n) {
        Structure M(element_names(n));
        const std::size_t cells = power(n, k);
        detail::check_room(std::pow(2.0, static_cast<double>(cells)), 1e7);
        const std::uint64_t count = std::uint64_t{1} << cells;
        std::vector<bool> holds(count);
        for (std::uint64_t m = 0; m < count; ++m) holds[m] = dep_holds(D, M, relation_from_mask(n, k, m));
        // A chain's union is its last member; enumerate chains explicitly so
        // that the checker itself is exercised.
        std::vector<std::uint64_t> chain;
        std::function<bool(std::size_t)> rec = [&](std::size_t len) -> bool {
            if (!chain.empty()) {
                std::vector<TupleSet> rels;
                for (auto m : chain) rels.push_back(relation_from_mask(n, k, m));
                bool all = std::all_of(chain.begin(), chain.end(), [&](std::uint64_t m) { return holds[m]; });
                if (all) {
                    CheckResult r = check_union_chain_preservation(D, M, rels);
                    if (!r.pass) {
                        res = r;
                        res.bound = max_domain;
                        return true;
                    }
                }
            }
            if (len == max_length) return false;
            const std::uint64_t base = chain.empty() ? 0 : chain.back();
            for (std::uint64_t m = 0; m < count; ++m) {
                if ((m & base) != base) continue;
                chain.push_back(m);
                if (rec(len + 1)) return true;
                chain.pop_back();
            }
            return false;
        };
        if (rec(0)) return res;
    }
    return res;
}

}  // namespace teamlogic
