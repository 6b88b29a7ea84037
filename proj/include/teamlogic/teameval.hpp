#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "dependency.hpp"
#include "errors.hpp"
#include "formula.hpp"
#include "parser.hpp"
#include "structure.hpp"
#include "tarski.hpp"

namespace teamlogic {

enum class EvalStrategy { naive, memoized, optimized };

inline const char* to_string(EvalStrategy s) {
    switch (s) {
    case EvalStrategy::naive: return "naive";
    case EvalStrategy::memoized: return "memoized";
    case EvalStrategy::optimized: return "optimized";
    }
    return "?";
}

struct EvalOptions {
    EvalStrategy strategy = EvalStrategy::optimized;
    // Cap on node expansions (recursive calls plus enumerated candidates).
    std::uint64_t budget = 200'000'000;
    // Equality-guard symmetry reduction; unset means "optimized only".
    std::optional<bool> symmetry_reduction;
};

// θ′ ∨ (θ ∧ φ), where θ′ is the NNF negation of θ.
inline FormulaPtr desugar_hook(const FormulaPtr& theta, const FormulaPtr& phi) {
    detail::require_first_order(*theta);
    return make_or(to_nnf(make_not(theta)), make_and(to_nnf(theta), phi));
}

// Set algebra on projections for the builtin atoms. Every builtin reduces to
// a closed-form test on X(v̄ w̄) with the split after |v̄|.
inline bool eval_builtin_atom(const Structure&, const Team& X, const Formula& atom) {
    if (atom.kind() != Kind::dependency || atom.atom() == AtomKind::named)
        throw TypeError("not a builtin dependency atom: " + to_string(atom));
    std::vector<std::string> vars = atom.lhs();
    vars.insert(vars.end(), atom.rhs().begin(), atom.rhs().end());
    const TupleSet R = team_projection(X, vars);
    switch (atom.atom()) {
    case AtomKind::constancy:
    case AtomKind::nonempty: return detail::builtin_holds(atom.atom(), 0, R);
    default: return detail::builtin_holds(atom.atom(), atom.lhs().size(), R);
    }
}

// Rule TS-D: (M, X(v̄)) ∈ D.
inline bool eval_dep_atom(const Structure& M, const Team& X, const Dependency& D, std::span<const std::string> vars) {
    if (vars.size() != D.arity())
        throw DomainError("dependency '" + D.name() + "' has arity " + std::to_string(D.arity()) + " but is applied to " +
                          std::to_string(vars.size()) + " variables");
    return dep_holds(D, M, team_projection(X, vars));
}

// Evaluator state for one evaluation call (memo, budget, analysis cache).
// Not thread-safe; create one per thread.
class TeamEvaluator {
public:
    using Mask = std::uint64_t;

    TeamEvaluator(const Structure& M, const DependencyRegistry& registry, EvalOptions options = {})
        : M_(M), reg_(registry), opt_(options),
          symmetry_(options.symmetry_reduction.value_or(options.strategy == EvalStrategy::optimized)) {}

    bool evaluate(const Team& X, const Formula& phi) {
        check(phi, X);
        return sat(phi, X);
    }

    // Verdicts for every subteam of U, indexed by row masks over U's
    // canonical row order. |U| ≤ 24.
    std::vector<bool> evaluate_subteams(const Team& U, const Formula& phi) {
        if (U.size() > 24) throw DomainError("subteam oracle limited to 24 rows");
        check(phi, U);
        const std::size_t n = U.size();
        std::vector<bool> out(std::size_t{1} << n, false);
        if (opt_.strategy == EvalStrategy::optimized && info(phi).dc) {
            if (auto chain = antichain(phi, U)) {
                for (Mask t : *chain) {
                    // Mark every subset of t.
                    Mask s = t;
                    while (true) {
                        out[s] = true;
                        if (s == 0) break;
                        s = (s - 1) & t;
                    }
                }
                return out;
            }
        }
        for (Mask m = 0; m < out.size(); ++m) out[m] = sat(phi, U.select_mask(m));
        return out;
    }

    std::uint64_t expansions() const noexcept { return spent_; }
    std::size_t memo_size() const noexcept { return memo_count_; }

private:
    // ---- analysis -------------------------------------------------------------

    struct Symmetry {
        bool eligible = false;
        std::vector<Term> constants;
        std::vector<std::string> free_comp;
    };

    struct Block {
        std::vector<std::string> vars;
        const Formula* body = nullptr;
        std::vector<const Formula*> flat, dc, other;
        bool body_dc = false;
        std::vector<Symmetry> sym;
    };

    struct Info {
        bool dc = false;
        bool uc = false;  // closed under unions of nonempty families
        bool up = false;  // closed under supersets
        bool searchy = false;  // contains ∨ or ∃
        std::size_t antichain_fail = std::numeric_limits<std::size_t>::max();
        std::vector<const Formula*> flat_side[2];
        bool side_flat[2] = {false, false};
        bool block_ready = false;
        Block block;
        bool single_ready = false;
        Symmetry single;
        std::vector<const Formula*> conjuncts;  // search-free conjuncts first
    };

    const Info& info(const Formula& f) {
        auto it = info_.find(&f);
        if (it != info_.end()) return it->second;
        Info in;
        switch (f.kind()) {
        case Kind::relation:
        case Kind::equality: in.dc = in.uc = true; break;
        case Kind::dependency:
            if (f.atom() == AtomKind::named) in.dc = reg_.at(f.symbol()).downward_closed();
            else in.dc = f.atom() == AtomKind::functional || f.atom() == AtomKind::constancy;
            in.uc = f.atom() == AtomKind::nonempty || f.atom() == AtomKind::inclusion || f.atom() == AtomKind::anonymity ||
                    trivially_functional(f);
            in.up = f.atom() == AtomKind::nonempty;
            break;
        case Kind::hook:
            in.dc = info(f.child(1)).dc;
            in.uc = info(f.child(1)).uc;
            in.up = info(f.child(1)).up;
            in.searchy = info(f.child(1)).searchy;
            break;
        case Kind::negation:
        case Kind::implication: throw TypeError("formula is not in negation normal form");
        default: {
            in.dc = true;
            in.uc = f.kind() != Kind::global_disjunction;
            // A disjunction grows its upward-closed side; every other
            // connective needs all children upward closed.
            in.up = f.kind() != Kind::disjunction;
            for (const auto& c : f.children()) {
                const Info& ci = info(*c);
                in.dc = in.dc && ci.dc;
                in.uc = in.uc && ci.uc;
                in.up = f.kind() == Kind::disjunction ? in.up || ci.up : in.up && ci.up;
                in.searchy = in.searchy || ci.searchy;
            }
            if (f.kind() == Kind::disjunction || f.kind() == Kind::exists) in.searchy = true;
        }
        }
        if (f.kind() == Kind::conjunction) {
            std::vector<const Formula*> later;
            for (int side = 0; side < 2; ++side)
                for (const auto& c : flatten(f.child_ptr(side), Kind::conjunction))
                    (info(*c).searchy ? later : in.conjuncts).push_back(c.get());
            in.conjuncts.insert(in.conjuncts.end(), later.begin(), later.end());
        }
        if (f.kind() == Kind::disjunction) {
            for (int s = 0; s < 2; ++s) {
                in.side_flat[s] = f.child(s).dependency_free();
                for (const auto& c : flatten(f.child_ptr(s), Kind::conjunction))
                    if (c->dependency_free()) in.flat_side[s].push_back(c.get());
            }
        }
        return info_.emplace(&f, std::move(in)).first->second;
    }

    // Equality-guard symmetry analysis for a variable v bound just above
    // `scope`; `later` are further variables bound by the same block.
    //
    // Let C be v's class under var=var atoms in scope. If v and the members
    // of C bound inside the scope occur only in (in)equalities, then for a
    // fixed row s the transposition of two elements outside
    // {constants compared with C} ∪ {s-values of C's outer members} maps
    // witnesses to witnesses while preserving satisfaction of the scope.
    // Hence trying those values plus one fresh element is complete.
    Symmetry symmetry_for(const std::string& v, const std::vector<std::string>& later, const Formula& scope) const {
        Symmetry sym;
        std::map<std::string, std::string> parent;
        auto find = [&](std::string x) {
            while (parent.count(x) && parent[x] != x) x = parent[x];
            return x;
        };
        auto unite = [&](const std::string& a, const std::string& b) {
            std::string ra = find(a), rb = find(b);
            if (ra != rb) parent[ra] = rb;
        };
        std::map<std::string, int> binders;
        for (const auto& u : later) ++binders[u];
        std::function<void(const Formula&)> walk = [&](const Formula& f) {
            if (f.kind() == Kind::equality && !f.terms()[0].constant && !f.terms()[1].constant)
                unite(f.terms()[0].name, f.terms()[1].name);
            if (f.is_quantifier()) ++binders[f.symbol()];
            for (const auto& c : f.children()) walk(*c);
        };
        walk(scope);
        const std::string root = find(v);
        std::set<std::string> names;
        collect_names(scope, names);
        names.insert(later.begin(), later.end());
        names.insert(v);
        std::set<std::string> comp, bound_comp;
        for (const auto& n : names)
            if (find(n) == root) comp.insert(n);
        if (binders[v] > 0) return sym;
        std::set<std::string> scope_free(scope.free_vars().begin(), scope.free_vars().end());
        for (const auto& u : later) scope_free.erase(u);
        for (const auto& u : comp) {
            if (u == v || binders[u] == 0) continue;
            if (binders[u] > 1 || scope_free.count(u)) return sym;
            bound_comp.insert(u);
        }
        bound_comp.insert(v);
        bool ok = true;
        std::set<std::string> consts;
        std::function<void(const Formula&)> check = [&](const Formula& f) {
            if (!ok) return;
            if (f.kind() == Kind::relation) {
                for (const auto& t : f.terms())
                    if (!t.constant && bound_comp.count(t.name)) ok = false;
            } else if (f.kind() == Kind::dependency) {
                for (const auto& x : f.atom_variables())
                    if (bound_comp.count(x)) ok = false;
            } else if (f.kind() == Kind::equality) {
                const Term& a = f.terms()[0];
                const Term& b = f.terms()[1];
                if (a.constant && !b.constant && comp.count(b.name)) consts.insert(a.name);
                if (b.constant && !a.constant && comp.count(a.name)) consts.insert(b.name);
            }
            for (const auto& c : f.children()) check(*c);
        };
        check(scope);
        if (!ok) return sym;
        sym.eligible = true;
        for (const auto& c : consts) sym.constants.push_back(cst(c));
        for (const auto& u : comp)
            if (!bound_comp.count(u)) sym.free_comp.push_back(u);
        return sym;
    }

    const Symmetry& single_symmetry(const Formula& f) {
        info(f);
        Info& in = info_.at(&f);
        if (!in.single_ready) {
            in.single = symmetry_for(f.symbol(), {}, f.child(0));
            in.single_ready = true;
        }
        return in.single;
    }

    const Block& block(const Formula& f) {
        info(f);
        Info& in = info_.at(&f);
        if (in.block_ready) return in.block;
        Block b;
        const Formula* cur = &f;
        while (cur->kind() == Kind::exists &&
               std::find(b.vars.begin(), b.vars.end(), cur->symbol()) == b.vars.end()) {
            b.vars.push_back(cur->symbol());
            cur = &cur->child(0);
        }
        b.body = cur;
        b.body_dc = info(*cur).dc;
        std::vector<FormulaPtr> parts;
        if (cur->kind() == Kind::conjunction) {
            parts = flatten(cur->child_ptr(0), Kind::conjunction);
            for (const auto& p : flatten(cur->child_ptr(1), Kind::conjunction)) parts.push_back(p);
        }
        if (parts.empty()) {
            if (cur->dependency_free()) b.flat.push_back(cur);
            else if (info(*cur).dc) b.dc.push_back(cur);
            else b.other.push_back(cur);
        } else {
            for (const auto& p : parts) {
                if (p->dependency_free()) b.flat.push_back(p.get());
                else if (info(*p).dc) b.dc.push_back(p.get());
                else b.other.push_back(p.get());
            }
        }
        for (std::size_t j = 0; j < b.vars.size(); ++j) {
            std::vector<std::string> later(b.vars.begin() + static_cast<std::ptrdiff_t>(j) + 1, b.vars.end());
            b.sym.push_back(symmetry_for(b.vars[j], later, *b.body));
        }
        in.block = std::move(b);
        in.block_ready = true;
        return in.block;
    }

    void check(const Formula& f, const Team& X) {
        for (const auto& v : f.free_vars())
            if (!X.has_var(v)) throw DomainError("free variable '" + v + "' is not in the team's domain");
        check_nodes(f);
    }
    void check_nodes(const Formula& f) {
        if (f.kind() == Kind::negation || f.kind() == Kind::implication)
            throw TypeError("formula is not in negation normal form");
        if (f.kind() == Kind::dependency && f.atom() == AtomKind::named) {
            const Dependency& d = reg_.at(f.symbol());
            if (d.arity() != f.lhs().size())
                throw DomainError("dependency '" + f.symbol() + "' has arity " + std::to_string(d.arity()) +
                                  " but is applied to " + std::to_string(f.lhs().size()) + " variables");
        }
        for (const auto& c : f.children()) check_nodes(*c);
    }

    // ---- budget and memo ------------------------------------------------------

    void charge(std::uint64_t n = 1) {
        spent_ += n;
        if (spent_ > opt_.budget)
            throw BudgetExceeded("node budget of " + std::to_string(opt_.budget) + " expansions exceeded");
    }
    // Refuses an enumeration that cannot fit in the remaining budget.
    void require_room(double candidates) {
        const double room = static_cast<double>(opt_.budget) - static_cast<double>(spent_);
        if (candidates > room)
            throw BudgetExceeded("enumeration of " + std::to_string(candidates) + " candidates exceeds the node budget");
    }

    struct MemoEntry {
        const Formula* f;
        Team X;
        bool value;
    };
    static std::size_t memo_hash(const Formula& f, const Team& X) {
        return X.hash() ^ (reinterpret_cast<std::uintptr_t>(&f) * 0x9e3779b97f4a7c15ull);
    }
    const bool* memo_find(const Formula& f, const Team& X, std::size_t h) const {
        auto it = memo_.find(h);
        if (it == memo_.end()) return nullptr;
        for (const auto& e : it->second)
            if (e.f == &f && e.X == X) return &e.value;
        return nullptr;
    }
    bool memo_store(const Formula& f, const Team& X, std::size_t h, bool value) {
        memo_[h].push_back(MemoEntry{&f, X, value});
        ++memo_count_;
        return value;
    }

    // ---- core -----------------------------------------------------------------

    bool sat(const Formula& f, const Team& X) {
        charge();
        const bool memoize = opt_.strategy != EvalStrategy::naive &&
                             (f.kind() == Kind::disjunction || f.kind() == Kind::exists || f.kind() == Kind::forall ||
                              f.kind() == Kind::hook || f.kind() == Kind::global_disjunction);
        if (!memoize) return dispatch(f, X);
        const std::size_t h = memo_hash(f, X);
        if (const bool* hit = memo_find(f, X, h)) return *hit;
        return memo_store(f, X, h, dispatch(f, X));
    }

    bool dispatch(const Formula& f, const Team& X) {
        if (opt_.strategy == EvalStrategy::optimized && !f.is_literal() && X.size() <= 64) {
            const Info& in = info(f);
            if (in.dc && in.searchy && X.size() < in.antichain_fail) {
                if (auto chain = antichain(f, X)) {
                    const Mask full = X.size() == 64 ? ~Mask{0} : (Mask{1} << X.size()) - 1;
                    for (Mask t : *chain)
                        if ((t & full) == full) return true;
                    return false;
                }
                Info& mut = info_.at(&f);
                mut.antichain_fail = std::min(mut.antichain_fail, X.size());
            }
        }
        if (opt_.strategy == EvalStrategy::optimized && !f.is_literal()) {
            const Info& in = info(f);
            if (in.uc && in.searchy) {
                const auto keep = largest_subteam(f, X);
                return keep && std::all_of(keep->begin(), keep->end(), [](char c) { return c != 0; });
            }
        }
        switch (f.kind()) {
        case Kind::relation:
        case Kind::equality: return literal(f, X);
        case Kind::dependency:
            if (f.atom() == AtomKind::named) return eval_dep_atom(M_, X, reg_.at(f.symbol()), f.lhs());
            return eval_builtin_atom(M_, X, f);
        case Kind::conjunction:
            if (opt_.strategy == EvalStrategy::optimized) {
                for (const Formula* c : info(f).conjuncts)
                    if (!sat(*c, X)) return false;
                return true;
            }
            return sat(f.child(0), X) && sat(f.child(1), X);
        case Kind::global_disjunction: return sat(f.child(0), X) || sat(f.child(1), X);
        case Kind::disjunction: return disjunction(f, X);
        case Kind::hook: return sat(f.child(1), restrict_team(X, f.child(0), M_));
        case Kind::forall: return sat(f.child(0), extend_universal(X, f.symbol(), M_));
        case Kind::exists:
            if (opt_.strategy == EvalStrategy::optimized) return exists_block(f, X);
            return exists_single(f, X, opt_.strategy == EvalStrategy::memoized && info(f.child(0)).dc);
        case Kind::negation:
        case Kind::implication: throw TypeError("formula is not in negation normal form");
        }
        return false;
    }

    // TS-lit: every row satisfies the literal.
    bool literal(const Formula& f, const Team& X) {
        for (std::size_t i = 0; i < X.size(); ++i) {
            bindings_.load_row(X, i);
            if (!detail::tarski(M_, bindings_, f)) return false;
        }
        return true;
    }

    Mask rows_satisfying(const std::vector<const Formula*>& conj, const Team& X) {
        Mask m = 0;
        for (std::size_t i = 0; i < X.size(); ++i) {
            bindings_.load_row(X, i);
            bool ok = true;
            for (const Formula* c : conj)
                if (!(ok = detail::tarski(M_, bindings_, *c))) break;
            if (ok) m |= Mask{1} << i;
        }
        return m;
    }

    // ---- TS-∨ --------------------------------------------------------------------

    bool disjunction(const Formula& f, const Team& X) {
        const Formula& L = f.child(0);
        const Formula& R = f.child(1);
        const std::size_t n = X.size();
        if (n == 0) return sat(L, X) && sat(R, X);
        if (n > 62) {
            require_room(std::pow(2.0, static_cast<double>(n)));
            throw BudgetExceeded("team too large for disjunction splitting");
        }
        const Mask full = (Mask{1} << n) - 1;
        if (opt_.strategy == EvalStrategy::naive) return covers(L, R, X, 0, 0, full);
        const bool some_dc = info(L).dc || info(R).dc;
        if (opt_.strategy == EvalStrategy::memoized) {
            if (some_dc) return partitions(L, R, X, 0, full);
            return covers(L, R, X, 0, 0, full);
        }
        // Flat-part filtering: a row violating a flat conjunct of one side
        // can only be covered by the other side.
        const Info& in = info(f);
        const Mask gl = in.flat_side[0].empty() ? full : rows_satisfying(in.flat_side[0], X);
        const Mask gr = in.flat_side[1].empty() ? full : rows_satisfying(in.flat_side[1], X);
        const Mask only_right = full & ~gl;
        const Mask only_left = full & ~gr;
        if (only_left & only_right) return false;
        const Mask free = gl & gr;
        if (in.side_flat[0] || in.side_flat[1]) {
            // A flat side accepts any subset of its good rows, so only the
            // other side's share matters.
            const int other = in.side_flat[0] ? 1 : 0;
            const Formula& O = f.child(other);
            const Mask forced = other == 1 ? only_right : only_left;
            if (info(O).dc) return sat(O, X.select_mask(forced));
            require_room(std::pow(2.0, std::popcount(free)));
            for (Mask s = free;; s = (s - 1) & free) {
                charge();
                if (sat(O, X.select_mask(forced | s))) return true;
                if (s == 0) break;
            }
            return false;
        }
        for (int side = 0; side < 2; ++side) {
            if (!info(f.child(side)).up) continue;
            // The upward-closed side may take all of X, leaving the other
            // side any subteam it likes.
            return sat(f.child(side), X) && some_subteam(f.child(1 - side), X);
        }
        for (int side = 0; side < 2; ++side) {
            if (!info(f.child(side)).uc) continue;
            // The largest subteam satisfying the union-closed side contains
            // every share that side could take, so only the other side's
            // share is searched: it must cover the remaining rows.
            const auto keep = largest_subteam(f.child(side), X);
            if (!keep) return false;
            Mask big = 0;
            for (std::size_t i = 0; i < n; ++i)
                if ((*keep)[i]) big |= Mask{1} << i;
            const Formula& O = f.child(1 - side);
            const Mask need = full & ~big;
            if (info(O).dc) return sat(O, X.select_mask(need));
            require_room(std::pow(2.0, std::popcount(big)));
            for (Mask s = big;; s = (s - 1) & big) {
                charge();
                if (sat(O, X.select_mask(need | s))) return true;
                if (s == 0) break;
            }
            return false;
        }
        if (some_dc) return partitions(L, R, X, only_left, free);
        return covers(L, R, X, only_left, only_right, free);
    }

    // Whether some subteam of X, possibly ∅, satisfies f.
    bool some_subteam(const Formula& f, const Team& X) {
        if (sat(f, Team::empty_over(X.vars()))) return true;
        const Info& in = info(f);
        if (in.dc) return false;
        if (in.uc) return largest_subteam(f, X).has_value();
        if (in.up) return sat(f, X);
        // Smallest subteams first: witnesses are usually a row or two.
        const std::size_t n = X.size();
        require_room(std::pow(2.0, static_cast<double>(n)));
        for (std::size_t k = 1; k <= n; ++k) {
            Mask s = (Mask{1} << k) - 1;
            while (s < (Mask{1} << n)) {
                charge();
                if (sat(f, X.select_mask(s))) return true;
                const Mask low = s & (~s + 1), ripple = s + low;
                s = (((ripple ^ s) >> 2) / low) | ripple;
            }
        }
        return false;
    }

    // ---- largest satisfying subteams of union-closed formulas --------------------
    //
    // For a formula whose satisfying teams are closed under unions, the
    // satisfying subteams of X (if any) have a largest element. It is
    // computed bottom-up: ∨ unites the two sides, ∧ and ∀ iterate to a
    // greatest fixpoint, ∃ and the hook read it off an extended or
    // restricted team. Returns nullopt when no subteam, not even ∅,
    // satisfies f. Flags are indexed by X's rows.

    using Keep = std::vector<char>;

    static std::vector<Element> project_row(const Team& X, std::size_t i, const std::vector<std::size_t>& cols) {
        std::vector<Element> out;
        out.reserve(cols.size());
        auto r = X.row(i);
        for (std::size_t c : cols) out.push_back(r[c]);
        return out;
    }
    static std::vector<std::size_t> columns_of(const Team& X, const std::vector<std::string>& vars) {
        std::vector<std::size_t> out;
        for (const auto& v : vars) out.push_back(X.column_of(v));
        return out;
    }
    static Team kept(const Team& X, const Keep& keep, std::vector<std::size_t>& index) {
        index.clear();
        for (std::size_t i = 0; i < X.size(); ++i)
            if (keep[i]) index.push_back(i);
        return X.select(index);
    }

    std::optional<Keep> largest_subteam(const Formula& f, const Team& X) {
        charge();
        const std::size_t n = X.size();
        switch (f.kind()) {
        case Kind::relation:
        case Kind::equality: {
            Keep k(n, 0);
            for (std::size_t i = 0; i < n; ++i) {
                bindings_.load_row(X, i);
                k[i] = detail::tarski(M_, bindings_, f);
            }
            return k;
        }
        case Kind::dependency: return largest_atom_subteam(f, X);
        case Kind::conjunction: {
            Keep cur(n, 1);
            std::vector<std::size_t> index;
            while (true) {
                Keep next = cur;
                for (int side = 0; side < 2; ++side) {
                    const Team Y = kept(X, next, index);
                    auto k = largest_subteam(f.child(side), Y);
                    if (!k) return std::nullopt;
                    for (std::size_t j = 0; j < index.size(); ++j) next[index[j]] = (*k)[j];
                }
                if (next == cur) return cur;
                cur = std::move(next);
            }
        }
        case Kind::disjunction: {
            auto a = largest_subteam(f.child(0), X);
            if (!a) return std::nullopt;
            auto b = largest_subteam(f.child(1), X);
            if (!b) return std::nullopt;
            for (std::size_t i = 0; i < n; ++i) (*a)[i] = (*a)[i] || (*b)[i];
            return a;
        }
        case Kind::hook: {
            Keep k(n, 1);
            std::vector<std::size_t> index;
            for (std::size_t i = 0; i < n; ++i) {
                bindings_.load_row(X, i);
                if (detail::tarski(M_, bindings_, f.child(0))) index.push_back(i);
            }
            auto r = largest_subteam(f.child(1), X.select(index));
            if (!r) return std::nullopt;
            for (std::size_t j = 0; j < index.size(); ++j) k[index[j]] = (*r)[j];
            return k;
        }
        case Kind::exists:
        case Kind::forall: {
            const std::string& v = f.symbol();
            std::vector<std::string> outer;
            for (const auto& u : X.vars())
                if (u != v) outer.push_back(u);
            const auto xcols = columns_of(X, outer);
            Keep cur(n, 1);
            std::vector<std::size_t> index;
            while (true) {
                const Team Y = kept(X, cur, index);
                const Team base = Team::from_canonical(outer, team_projection(Y, outer));
                const Team E = extend_universal(base, v, M_);
                auto r = largest_subteam(f.child(0), E);
                if (!r) return std::nullopt;
                // Per key of the outer variables: how many extended rows survive.
                const auto ecols = columns_of(E, outer);
                std::map<std::vector<Element>, std::size_t> alive;
                for (std::size_t i = 0; i < E.size(); ++i)
                    if ((*r)[i]) ++alive[project_row(E, i, ecols)];
                Keep next(n, 0);
                for (std::size_t i : index) {
                    auto it = alive.find(project_row(X, i, xcols));
                    const std::size_t c = it == alive.end() ? 0 : it->second;
                    next[i] = f.kind() == Kind::exists ? c > 0 : c == M_.size();
                }
                if (f.kind() == Kind::exists || next == cur) return next;
                cur = std::move(next);
            }
        }
        default: break;
        }
        throw TypeError("not a union-closed formula: " + to_string(f));
    }

    // dep(x̄; ȳ) with every variable of ȳ among x̄ holds on every team.
    static bool trivially_functional(const Formula& f) {
        if (f.atom() != AtomKind::functional) return false;
        for (const auto& v : f.rhs())
            if (std::find(f.lhs().begin(), f.lhs().end(), v) == f.lhs().end()) return false;
        return true;
    }

    std::optional<Keep> largest_atom_subteam(const Formula& f, const Team& X) {
        const std::size_t n = X.size();
        switch (f.atom()) {
        case AtomKind::nonempty:
            if (n == 0) return std::nullopt;
            return Keep(n, 1);
        case AtomKind::inclusion: {
            // Drop rows whose left tuple is missing on the right until stable.
            const auto lc = columns_of(X, f.lhs()), rc = columns_of(X, f.rhs());
            Keep k(n, 1);
            bool changed = true;
            while (changed) {
                changed = false;
                std::set<std::vector<Element>> right;
                for (std::size_t i = 0; i < n; ++i)
                    if (k[i]) right.insert(project_row(X, i, rc));
                for (std::size_t i = 0; i < n; ++i)
                    if (k[i] && !right.count(project_row(X, i, lc))) {
                        k[i] = 0;
                        changed = true;
                    }
            }
            return k;
        }
        case AtomKind::functional:
            if (trivially_functional(f)) return Keep(n, 1);
            break;
        case AtomKind::anonymity: {
            // A row survives when its left tuple occurs with two different right tuples.
            const auto lc = columns_of(X, f.lhs()), rc = columns_of(X, f.rhs());
            std::map<std::vector<Element>, std::set<std::vector<Element>>> seen;
            for (std::size_t i = 0; i < n; ++i) seen[project_row(X, i, lc)].insert(project_row(X, i, rc));
            Keep k(n, 0);
            for (std::size_t i = 0; i < n; ++i) k[i] = seen[project_row(X, i, lc)].size() >= 2;
            return k;
        }
        default: break;
        }
        throw TypeError("not a union-closed atom: " + to_string(f));
    }

    // X₁ = fixed_left ∪ S, X₂ = rest, S ranging over subsets of `free`.
    bool partitions(const Formula& L, const Formula& R, const Team& X, Mask fixed_left, Mask free) {
        const Mask full = X.size() == 64 ? ~Mask{0} : (Mask{1} << X.size()) - 1;
        require_room(std::pow(2.0, std::popcount(free)));
        for (Mask s = free;; s = (s - 1) & free) {
            charge();
            const Mask left = fixed_left | s;
            if (sat(L, X.select_mask(left)) && sat(R, X.select_mask(full & ~left))) return true;
            if (s == 0) break;
        }
        return false;
    }

    // Every cover: each free row goes left, right, or both.
    bool covers(const Formula& L, const Formula& R, const Team& X, Mask fixed_left, Mask fixed_right, Mask free) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < X.size(); ++i)
            if (free >> i & 1u) idx.push_back(i);
        require_room(std::pow(3.0, static_cast<double>(idx.size())));
        std::vector<int> code(idx.size(), 0);
        while (true) {
            charge();
            Mask left = fixed_left, right = fixed_right;
            for (std::size_t k = 0; k < idx.size(); ++k) {
                if (code[k] != 1) left |= Mask{1} << idx[k];
                if (code[k] != 0) right |= Mask{1} << idx[k];
            }
            if (sat(L, X.select_mask(left)) && sat(R, X.select_mask(right))) return true;
            std::size_t p = 0;
            while (p < code.size() && ++code[p] == 3) code[p++] = 0;
            if (p == code.size()) return false;
        }
    }

    // ---- TS-∃ ------------------------------------------------------------------
    //
    // Y ≡_{Dom(X)∖{v}} X holds exactly when Y's projection off v equals X's.
    // Grouping X by that projection, Y is determined by choosing, for each
    // group key g, the nonempty set {m : g[m/v] ∈ Y}; conversely every such
    // choice yields a Y with the same projection. So enumerating nonempty
    // witness sets per group enumerates precisely the Y of the rule.

    struct Groups {
        std::vector<std::string> outer;  // X's variables other than the bound ones
        TupleSet keys;
    };
    Groups group(const Team& X, const std::vector<std::string>& bound) const {
        Groups g;
        for (const auto& v : X.vars())
            if (std::find(bound.begin(), bound.end(), v) == bound.end()) g.outer.push_back(v);
        g.keys = team_projection(X, g.outer);
        return g;
    }

    std::vector<Element> witness_values(const Symmetry* sym, const std::vector<std::string>& visible_vars,
                                        std::span<const Element> visible_values) const {
        std::vector<Element> out;
        if (!sym || !sym->eligible) {
            out = M_.elements();
            return out;
        }
        for (const auto& c : sym->constants) out.push_back(M_.constant(c.name));
        for (const auto& u : sym->free_comp) {
            auto it = std::find(visible_vars.begin(), visible_vars.end(), u);
            if (it == visible_vars.end()) throw DomainError("unbound variable '" + u + "'");
            out.push_back(visible_values[static_cast<std::size_t>(it - visible_vars.begin())]);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        for (std::uint32_t m = 0; m < M_.size(); ++m) {
            if (!std::binary_search(out.begin(), out.end(), Element{m})) {
                out.insert(std::lower_bound(out.begin(), out.end(), Element{m}), Element{m});
                break;
            }
        }
        return out;
    }

    // Literal rule, one variable at a time. With `single_witness` (the body
    // is downward closed) each group takes exactly one value: any satisfying
    // Y contains such a choice, which then satisfies the body too.
    bool exists_single(const Formula& f, const Team& X, bool single_witness) {
        const std::string& v = f.symbol();
        const Formula& body = f.child(0);
        Groups g = group(X, {v});
        const Symmetry* sym = symmetry_ ? &single_symmetry(f) : nullptr;
        std::vector<std::vector<Element>> cand(g.keys.size());
        double total = 1;
        for (std::size_t k = 0; k < g.keys.size(); ++k) {
            cand[k] = witness_values(sym, g.outer, g.keys[k]);
            const double c = static_cast<double>(cand[k].size());
            total *= single_witness ? c : std::pow(2.0, c) - 1;
        }
        require_room(total);
        std::vector<std::string> vars = g.outer;
        vars.push_back(v);
        std::vector<std::uint64_t> pick(cand.size(), 1);
        while (true) {
            charge();
            std::vector<Element> cells;
            std::size_t rows = 0;
            for (std::size_t k = 0; k < cand.size(); ++k) {
                for (std::size_t j = 0; j < cand[k].size(); ++j) {
                    const bool chosen = single_witness ? pick[k] - 1 == j : (pick[k] >> j & 1u);
                    if (!chosen) continue;
                    auto key = g.keys[k];
                    cells.insert(cells.end(), key.begin(), key.end());
                    cells.push_back(cand[k][j]);
                    ++rows;
                }
            }
            if (sat(body, Team::from_cells(vars, std::move(cells), rows))) return true;
            std::size_t p = 0;
            for (; p < cand.size(); ++p) {
                const std::uint64_t limit = single_witness ? cand[p].size() : (std::uint64_t{1} << cand[p].size()) - 1;
                if (++pick[p] <= limit) break;
                pick[p] = 1;
            }
            if (p == cand.size()) return false;
        }
    }

    // Optimized ∃: a chain ∃v₁…∃v_k is searched as one choice of a set of
    // k-tuples per group (a single tuple when the body is downward closed).
    // Candidate tuples are filtered row-wise by the body's flat conjuncts,
    // downward-closed conjuncts are checked on partial teams, and the rest
    // at the leaves.
    bool exists_block(const Formula& f, const Team& X) {
        const Block& b = block(f);
        Groups g = group(X, b.vars);
        const std::size_t width = g.outer.size() + b.vars.size();
        std::vector<std::string> vars = g.outer;
        vars.insert(vars.end(), b.vars.begin(), b.vars.end());
        if (g.keys.empty()) return sat(*b.body, Team::empty_over(vars));

        // Candidate tuples per group.
        std::vector<std::vector<Tuple>> cand(g.keys.size());
        std::vector<Element> row(width);
        for (std::size_t k = 0; k < g.keys.size(); ++k) {
            auto key = g.keys[k];
            std::copy(key.begin(), key.end(), row.begin());
            extend_candidates(b, vars, row, g.outer.size(), 0, cand[k]);
            if (cand[k].empty()) return false;
        }
        std::vector<std::size_t> order(g.keys.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t c) { return cand[a].size() < cand[c].size(); });

        Search s{b, g, vars, cand, order, {}, 0};
        return b.body_dc ? search_single(s, 0) : search_sets(s, 0, 0, false);
    }

    void extend_candidates(const Block& b, const std::vector<std::string>& vars, std::vector<Element>& row,
                           std::size_t outer, std::size_t j, std::vector<Tuple>& out) {
        if (j == b.vars.size()) {
            charge();
            bindings_.clear();
            for (std::size_t c = 0; c < vars.size(); ++c) bindings_.push(vars[c], row[c]);
            for (const Formula* c : b.flat)
                if (!detail::tarski(M_, bindings_, *c)) return;
            out.emplace_back(row.begin() + static_cast<std::ptrdiff_t>(outer), row.end());
            return;
        }
        const Symmetry* sym = symmetry_ ? &b.sym[j] : nullptr;
        std::vector<std::string> visible(vars.begin(), vars.begin() + static_cast<std::ptrdiff_t>(outer + j));
        for (Element e : witness_values(sym, visible, std::span<const Element>(row.data(), outer + j))) {
            row[outer + j] = e;
            extend_candidates(b, vars, row, outer, j + 1, out);
        }
    }

    struct Search {
        const Block& b;
        const Groups& g;
        const std::vector<std::string>& vars;
        const std::vector<std::vector<Tuple>>& cand;
        const std::vector<std::size_t>& order;
        std::vector<Element> cells;
        std::size_t rows;
    };

    void push_row(Search& s, std::size_t group, const Tuple& t) {
        auto key = s.g.keys[group];
        s.cells.insert(s.cells.end(), key.begin(), key.end());
        s.cells.insert(s.cells.end(), t.begin(), t.end());
        ++s.rows;
    }
    void pop_row(Search& s) {
        s.cells.resize(s.cells.size() - s.vars.size());
        --s.rows;
    }
    Team current(const Search& s) const { return Team::from_cells(s.vars, s.cells, s.rows); }

    bool partial_ok(const Search& s) {
        if (s.b.dc.empty()) return true;
        Team Y = current(s);
        for (const Formula* c : s.b.dc)
            if (!sat(*c, Y)) return false;
        return true;
    }

    bool search_single(Search& s, std::size_t depth) {
        if (depth == s.order.size()) return true;
        const std::size_t group = s.order[depth];
        for (const Tuple& t : s.cand[group]) {
            charge();
            push_row(s, group, t);
            if (partial_ok(s) && search_single(s, depth + 1)) return true;
            pop_row(s);
        }
        return false;
    }

    // Chooses a nonempty subset of candidates for each group, index by index.
    bool search_sets(Search& s, std::size_t depth, std::size_t index, bool took_any) {
        if (depth == s.order.size()) {
            Team Y = current(s);
            for (const Formula* c : s.b.other)
                if (!sat(*c, Y)) return false;
            return true;
        }
        const std::size_t group = s.order[depth];
        const auto& cands = s.cand[group];
        if (index == cands.size()) return took_any && search_sets(s, depth + 1, 0, false);
        charge();
        push_row(s, group, cands[index]);
        if (partial_ok(s) && search_sets(s, depth, index + 1, true)) return true;
        pop_row(s);
        return search_sets(s, depth, index + 1, took_any);
    }

    // ---- antichains of maximal satisfying subteams ----------------------------------
    //
    // For a downward-closed φ and a universe U (≤ 64 rows), the subteams of
    // U satisfying φ are exactly the subsets of the masks returned.

    static constexpr std::size_t kAntichainCap = 4096;

    static void maximize(std::vector<Mask>& v) {
        std::sort(v.begin(), v.end(), [](Mask a, Mask b) {
            int pa = std::popcount(a), pb = std::popcount(b);
            return pa != pb ? pa > pb : a < b;
        });
        v.erase(std::unique(v.begin(), v.end()), v.end());
        std::vector<Mask> out;
        for (Mask m : v) {
            bool dominated = false;
            for (Mask o : out)
                if ((m & o) == m) {
                    dominated = true;
                    break;
                }
            if (!dominated) out.push_back(m);
        }
        v = std::move(out);
    }

    std::optional<std::vector<Mask>> antichain(const Formula& f, const Team& U) {
        charge();
        const std::size_t n = U.size();
        if (n > 64) return std::nullopt;
        const Mask full = n == 64 ? ~Mask{0} : (Mask{1} << n) - 1;
        switch (f.kind()) {
        case Kind::relation:
        case Kind::equality: {
            Mask m = 0;
            for (std::size_t i = 0; i < n; ++i) {
                bindings_.load_row(U, i);
                if (detail::tarski(M_, bindings_, f)) m |= Mask{1} << i;
            }
            return std::vector<Mask>{m};
        }
        case Kind::dependency: return atom_antichain(f, U);
        case Kind::conjunction:
        case Kind::disjunction: {
            auto a = antichain(f.child(0), U);
            if (!a) return std::nullopt;
            auto b = antichain(f.child(1), U);
            if (!b) return std::nullopt;
            if (a->size() * b->size() > (std::size_t{1} << 18)) return std::nullopt;
            std::vector<Mask> out;
            out.reserve(a->size() * b->size());
            for (Mask x : *a)
                for (Mask y : *b) out.push_back(f.kind() == Kind::conjunction ? (x & y) : (x | y));
            charge(out.size());
            maximize(out);
            if (out.size() > kAntichainCap) return std::nullopt;
            return out;
        }
        case Kind::global_disjunction: {
            auto a = antichain(f.child(0), U);
            if (!a) return std::nullopt;
            auto b = antichain(f.child(1), U);
            if (!b) return std::nullopt;
            a->insert(a->end(), b->begin(), b->end());
            maximize(*a);
            if (a->size() > kAntichainCap) return std::nullopt;
            return a;
        }
        case Kind::hook: {
            std::vector<std::size_t> good;
            Mask outside = full;
            for (std::size_t i = 0; i < n; ++i) {
                bindings_.load_row(U, i);
                if (detail::tarski(M_, bindings_, f.child(0))) {
                    good.push_back(i);
                    outside &= ~(Mask{1} << i);
                }
            }
            auto inner = antichain(f.child(1), U.select(good));
            if (!inner) return std::nullopt;
            for (Mask& t : *inner) {
                Mask lifted = outside;
                for (std::size_t k = 0; k < good.size(); ++k)
                    if (t >> k & 1u) lifted |= Mask{1} << good[k];
                t = lifted;
            }
            return inner;
        }
        case Kind::exists:
        case Kind::forall: {
            if (!U.has_var(f.symbol()) && n * M_.size() > 64) return std::nullopt;
            Team ext = extend_universal(U, f.symbol(), M_);
            if (ext.size() > 64) return std::nullopt;
            auto inner = antichain(f.child(0), ext);
            if (!inner) return std::nullopt;
            // ext_of[i]: mask of U-row i's extensions inside ext.
            std::vector<Mask> ext_of(n, 0);
            const std::size_t col = ext.column_of(f.symbol());
            std::vector<Element> probe(ext.arity());
            for (std::size_t i = 0; i < n; ++i) {
                auto r = U.row(i);
                std::size_t src = 0;
                for (std::size_t c = 0; c < ext.arity(); ++c) {
                    if (c == col) continue;
                    while (U.vars()[src] == f.symbol()) ++src;
                    probe[c] = r[src++];
                }
                for (std::uint32_t m = 0; m < M_.size(); ++m) {
                    probe[col] = Element{m};
                    ext_of[i] |= Mask{1} << *ext.rows().index_of(probe);
                }
            }
            std::vector<Mask> out;
            for (Mask t : *inner) {
                Mask m = 0;
                for (std::size_t i = 0; i < n; ++i) {
                    const bool keep = f.kind() == Kind::forall ? (ext_of[i] & t) == ext_of[i] : (ext_of[i] & t) != 0;
                    if (keep) m |= Mask{1} << i;
                }
                out.push_back(m);
            }
            maximize(out);
            return out;
        }
        default: return std::nullopt;
        }
    }

    std::optional<std::vector<Mask>> atom_antichain(const Formula& f, const Team& U) {
        const std::size_t n = U.size();
        if (n == 0) {
            if (sat_atom_direct(f, U)) return std::vector<Mask>{0};
            return std::vector<Mask>{};
        }
        if (f.atom() == AtomKind::functional || f.atom() == AtomKind::constancy) {
            // Maximal subteams pick one dependent value per determinant value.
            const std::vector<std::string>& lhs = f.atom() == AtomKind::functional ? f.lhs() : std::vector<std::string>{};
            const std::vector<std::string>& rhs = f.atom() == AtomKind::functional ? f.rhs() : f.lhs();
            std::vector<std::size_t> lc, rc;
            for (const auto& v : lhs) lc.push_back(U.column_of(v));
            for (const auto& v : rhs) rc.push_back(U.column_of(v));
            std::map<Tuple, std::map<Tuple, Mask>> classes;
            for (std::size_t i = 0; i < n; ++i) {
                Tuple a, b;
                for (std::size_t c : lc) a.push_back(U.row(i)[c]);
                for (std::size_t c : rc) b.push_back(U.row(i)[c]);
                classes[a][b] |= Mask{1} << i;
            }
            std::vector<Mask> out{0};
            for (const auto& [_, cls] : classes) {
                if (out.size() * cls.size() > kAntichainCap) return std::nullopt;
                std::vector<Mask> next;
                for (Mask m : out)
                    for (const auto& [__, c] : cls) next.push_back(m | c);
                out = std::move(next);
            }
            charge(out.size());
            return out;
        }
        if (f.atom() != AtomKind::named) return std::nullopt;
        const Dependency& D = reg_.at(f.symbol());
        if (!D.downward_closed()) return std::nullopt;
        const TupleSet P = team_projection(U, f.lhs());
        if (P.size() > 10) return std::nullopt;
        std::vector<Mask> rows_of(P.size(), 0);
        {
            std::vector<std::size_t> cols;
            for (const auto& v : f.lhs()) cols.push_back(U.column_of(v));
            Tuple t(cols.size());
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t c = 0; c < cols.size(); ++c) t[c] = U.row(i)[cols[c]];
                rows_of[*P.index_of(t)] |= Mask{1} << i;
            }
        }
        const std::size_t subsets = std::size_t{1} << P.size();
        charge(subsets);
        std::vector<bool> good(subsets, false);
        for (std::size_t s = 0; s < subsets; ++s) {
            std::vector<Element> cells;
            std::size_t rows = 0;
            for (std::size_t k = 0; k < P.size(); ++k)
                if (s >> k & 1u) {
                    cells.insert(cells.end(), P[k].begin(), P[k].end());
                    ++rows;
                }
            good[s] = dep_holds(D, M_, TupleSet::from_sorted(P.arity(), std::move(cells), rows));
        }
        std::vector<Mask> out;
        for (std::size_t s = 0; s < subsets; ++s) {
            if (!good[s]) continue;
            bool maximal = true;
            for (std::size_t k = 0; k < P.size() && maximal; ++k)
                if (!(s >> k & 1u) && good[s | (std::size_t{1} << k)]) maximal = false;
            if (!maximal) continue;
            Mask m = 0;
            for (std::size_t k = 0; k < P.size(); ++k)
                if (s >> k & 1u) m |= rows_of[k];
            out.push_back(m);
        }
        return out;
    }

    bool sat_atom_direct(const Formula& f, const Team& X) {
        if (f.atom() == AtomKind::named) return eval_dep_atom(M_, X, reg_.at(f.symbol()), f.lhs());
        return eval_builtin_atom(M_, X, f);
    }

    const Structure& M_;
    const DependencyRegistry& reg_;
    EvalOptions opt_;
    bool symmetry_;
    std::uint64_t spent_ = 0;
    std::size_t memo_count_ = 0;
    std::unordered_map<std::size_t, std::vector<MemoEntry>> memo_;
    std::unordered_map<const Formula*, Info> info_;
    detail::Bindings bindings_;
};

// Upper bound on the expansions the naive strategy (without symmetry
// reduction) can spend on phi over a team of `rows` rows whose domain is
// `vars`, in a structure with `domain` elements. It follows the charges made
// by the evaluator: one per call, one per enumerated cover or witness choice.
// Rows never exceed domain^width, where width counts the variables in scope.
inline double naive_expansion_bound(const Formula& phi, std::size_t rows, const std::vector<std::string>& vars,
                                    std::size_t domain) {
    const double m = static_cast<double>(domain);
    auto cap = [&](double n, std::size_t width) { return std::min(n, std::pow(m, static_cast<double>(width))); };
    std::function<double(const Formula&, double, std::vector<std::string>&)> go =
        [&](const Formula& f, double n, std::vector<std::string>& scope) -> double {
        switch (f.kind()) {
        case Kind::relation:
        case Kind::equality:
        case Kind::dependency: return 1;
        case Kind::conjunction:
        case Kind::global_disjunction: return 1 + go(f.child(0), n, scope) + go(f.child(1), n, scope);
        case Kind::hook: return 1 + go(f.child(1), n, scope);
        case Kind::disjunction: {
            const double inner = go(f.child(0), n, scope) + go(f.child(1), n, scope);
            return n == 0 ? 1 + inner : 1 + std::pow(3.0, n) * (1 + inner);
        }
        case Kind::exists:
        case Kind::forall: {
            const bool fresh = std::find(scope.begin(), scope.end(), f.symbol()) == scope.end();
            if (fresh) scope.push_back(f.symbol());
            const double grown = cap(n * m, scope.size());
            double body = go(f.child(0), grown, scope);
            if (fresh) scope.pop_back();
            if (f.kind() == Kind::forall) return 1 + body;
            return 1 + std::pow(std::pow(2.0, m) - 1, n) * (1 + body);
        }
        case Kind::negation:
        case Kind::implication: break;
        }
        throw TypeError("formula is not in negation normal form");
    };
    std::vector<std::string> scope = vars;
    return go(phi, cap(static_cast<double>(rows), scope.size()), scope);
}

inline bool team_eval(const Structure& M, const Team& X, const Formula& phi, const DependencyRegistry& registry,
                      EvalOptions options = {}) {
    return TeamEvaluator(M, registry, options).evaluate(X, phi);
}

inline bool team_eval(const Structure& M, const Team& X, const Formula& phi, EvalOptions options = {}) {
    static const DependencyRegistry empty;
    return TeamEvaluator(M, empty, options).evaluate(X, phi);
}

inline bool team_eval(const Structure& M, const Team& X, const Formula& phi, EvalStrategy strategy) {
    EvalOptions o;
    o.strategy = strategy;
    return team_eval(M, X, phi, o);
}

}  // namespace teamlogic
