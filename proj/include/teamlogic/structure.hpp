#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace teamlogic {

// An element of a structure's domain. The index is only meaningful relative
// to the structure that produced it; names give cross-structure identity.
struct Element {
    std::uint32_t index = 0;
    friend constexpr auto operator<=>(Element, Element) = default;
};

using Tuple = std::vector<Element>;

inline int compare_rows(std::span<const Element> a, std::span<const Element> b) {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i].index != b[i].index) return a[i].index < b[i].index ? -1 : 1;
    }
    if (a.size() == b.size()) return 0;
    return a.size() < b.size() ? -1 : 1;
}

// A finite set of equal-length tuples, stored row-major, sorted and without
// duplicates. Arity 0 is allowed: the set is then either {} or {()}.
class TupleSet {
public:
    TupleSet() = default;
    explicit TupleSet(std::size_t arity) : arity_(arity) {}

    TupleSet(std::size_t arity, std::vector<Element> cells, std::size_t rows)
        : arity_(arity), cells_(std::move(cells)), size_(rows) {
        if (arity_ != 0 && cells_.size() != arity_ * size_) throw DomainError("tuple width mismatch");
        normalize();
    }

    TupleSet(std::size_t arity, const std::vector<Tuple>& tuples) : arity_(arity) {
        cells_.reserve(arity * tuples.size());
        for (const auto& t : tuples) {
            if (t.size() != arity) throw DomainError("tuple of arity " + std::to_string(t.size()) +
                                                     " in a relation of arity " + std::to_string(arity));
            cells_.insert(cells_.end(), t.begin(), t.end());
        }
        size_ = tuples.size();
        normalize();
    }

    // Trusted constructor: caller guarantees sorted, duplicate-free rows.
    static TupleSet from_sorted(std::size_t arity, std::vector<Element> cells, std::size_t rows) {
        TupleSet s(arity);
        s.cells_ = std::move(cells);
        s.size_ = rows;
        return s;
    }

    std::size_t arity() const noexcept { return arity_; }
    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }
    const std::vector<Element>& cells() const noexcept { return cells_; }

    std::span<const Element> operator[](std::size_t i) const {
        return {cells_.data() + i * arity_, arity_};
    }

    std::optional<std::size_t> index_of(std::span<const Element> t) const {
        if (t.size() != arity_) return std::nullopt;
        std::size_t lo = 0, hi = size_;
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            int c = compare_rows((*this)[mid], t);
            if (c == 0) return mid;
            if (c < 0) lo = mid + 1;
            else hi = mid;
        }
        return std::nullopt;
    }

    bool contains(std::span<const Element> t) const { return index_of(t).has_value(); }

    std::vector<Tuple> tuples() const {
        std::vector<Tuple> out;
        out.reserve(size_);
        for (std::size_t i = 0; i < size_; ++i) out.emplace_back((*this)[i].begin(), (*this)[i].end());
        return out;
    }

    bool is_subset_of(const TupleSet& other) const {
        if (other.arity_ != arity_) return false;
        std::size_t j = 0;
        for (std::size_t i = 0; i < size_; ++i) {
            while (j < other.size_ && compare_rows(other[j], (*this)[i]) < 0) ++j;
            if (j == other.size_ || compare_rows(other[j], (*this)[i]) != 0) return false;
        }
        return true;
    }

    TupleSet united(const TupleSet& other) const {
        if (other.arity_ != arity_) throw DomainError("union of relations of different arity");
        std::vector<Element> cells(cells_);
        cells.insert(cells.end(), other.cells_.begin(), other.cells_.end());
        return TupleSet(arity_, std::move(cells), size_ + other.size_);
    }

    friend bool operator==(const TupleSet& a, const TupleSet& b) {
        return a.arity_ == b.arity_ && a.size_ == b.size_ && a.cells_ == b.cells_;
    }
    friend bool operator<(const TupleSet& a, const TupleSet& b) {
        if (a.arity_ != b.arity_) return a.arity_ < b.arity_;
        if (a.size_ != b.size_) return a.size_ < b.size_;
        return a.cells_ < b.cells_;
    }

    std::size_t hash() const noexcept {
        std::size_t h = 1469598103934665603ull ^ (arity_ * 1099511628211ull) ^ (size_ << 17);
        for (Element e : cells_) h = (h ^ e.index) * 1099511628211ull;
        return h;
    }

private:
    void normalize() {
        if (arity_ == 0) {
            size_ = std::min<std::size_t>(size_, 1);
            return;
        }
        std::vector<std::size_t> order(size_);
        std::iota(order.begin(), order.end(), std::size_t{0});
        auto row = [&](std::size_t i) { return std::span<const Element>(cells_.data() + i * arity_, arity_); };
        bool sorted = true;
        for (std::size_t i = 1; i < size_ && sorted; ++i) sorted = compare_rows(row(i - 1), row(i)) < 0;
        if (sorted) return;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return compare_rows(row(a), row(b)) < 0; });
        std::vector<Element> out;
        out.reserve(cells_.size());
        std::size_t kept = 0;
        for (std::size_t k = 0; k < order.size(); ++k) {
            if (kept > 0 && compare_rows(std::span<const Element>(out.data() + (kept - 1) * arity_, arity_), row(order[k])) == 0)
                continue;
            auto r = row(order[k]);
            out.insert(out.end(), r.begin(), r.end());
            ++kept;
        }
        cells_ = std::move(out);
        size_ = kept;
    }

    std::size_t arity_ = 0;
    std::vector<Element> cells_;
    std::size_t size_ = 0;
};

// An interpreted relation: its tuples plus a dense membership bitmap when the
// full power M^k is small enough.
class Relation {
public:
    Relation(std::size_t domain_size, TupleSet tuples) : domain_size_(domain_size), tuples_(std::move(tuples)) {
        for (Element e : tuples_.cells())
            if (e.index >= domain_size_) throw DomainError("relation tuple element outside the domain");
        std::size_t cells = 1;
        for (std::size_t i = 0; i < tuples_.arity() && cells <= kDenseLimit; ++i) cells *= domain_size_;
        if (cells <= kDenseLimit) {
            dense_.assign(cells, false);
            for (std::size_t i = 0; i < tuples_.size(); ++i) dense_[code(tuples_[i])] = true;
        }
    }

    std::size_t arity() const noexcept { return tuples_.arity(); }
    const TupleSet& tuples() const noexcept { return tuples_; }

    bool contains(std::span<const Element> t) const {
        if (!dense_.empty()) return dense_[code(t)];
        return tuples_.contains(t);
    }

private:
    static constexpr std::size_t kDenseLimit = std::size_t{1} << 20;
    std::size_t code(std::span<const Element> t) const {
        std::size_t c = 0;
        for (Element e : t) c = c * domain_size_ + e.index;
        return c;
    }
    std::size_t domain_size_;
    TupleSet tuples_;
    std::vector<bool> dense_;
};

// A finite structure. Values are immutable: the with_* members return
// modified copies that share the domain and unchanged relations.
class Structure {
public:
    explicit Structure(std::vector<std::string> domain) {
        if (domain.empty()) throw DomainError("structures must have a nonempty domain");
        auto data = std::make_shared<DomainData>();
        data->names = std::move(domain);
        for (std::size_t i = 0; i < data->names.size(); ++i) {
            if (!data->index.emplace(data->names[i], static_cast<std::uint32_t>(i)).second)
                throw DomainError("duplicate domain element '" + data->names[i] + "'");
        }
        domain_ = std::move(data);
    }

    std::size_t size() const noexcept { return domain_->names.size(); }
    const std::vector<std::string>& domain_names() const noexcept { return domain_->names; }
    const std::string& name(Element e) const { return domain_->names.at(e.index); }

    std::optional<Element> find_element(std::string_view name) const {
        auto it = domain_->index.find(name);
        if (it == domain_->index.end()) return std::nullopt;
        return Element{it->second};
    }
    Element element(std::string_view name) const {
        if (auto e = find_element(name)) return *e;
        throw DomainError("unknown element '" + std::string(name) + "'");
    }
    Tuple tuple(const std::vector<std::string>& names) const {
        Tuple t;
        for (const auto& n : names) t.push_back(element(n));
        return t;
    }

    bool has_constant(std::string_view c) const { return constants_.find(c) != constants_.end(); }
    Element constant(std::string_view c) const {
        auto it = constants_.find(c);
        if (it == constants_.end()) throw DomainError("uninterpreted constant symbol '" + std::string(c) + "'");
        return it->second;
    }
    const std::map<std::string, Element, std::less<>>& constants() const noexcept { return constants_; }

    const Relation* find_relation(std::string_view r) const {
        auto it = relations_.find(r);
        return it == relations_.end() ? nullptr : it->second.get();
    }
    const Relation& relation(std::string_view r) const {
        if (auto* p = find_relation(r)) return *p;
        throw DomainError("uninterpreted relation symbol '" + std::string(r) + "'");
    }
    std::vector<std::string> relation_names() const {
        std::vector<std::string> out;
        for (const auto& [n, _] : relations_) out.push_back(n);
        return out;
    }

    Structure with_constant(std::string c, Element value) const {
        if (value.index >= size()) throw DomainError("constant '" + c + "' interpreted outside the domain");
        Structure s(*this);
        s.constants_[std::move(c)] = value;
        return s;
    }
    Structure with_relation(std::string r, TupleSet tuples) const {
        if (tuples.arity() == 0) throw DomainError("relation '" + r + "' must have positive arity");
        Structure s(*this);
        s.relations_[std::move(r)] = std::make_shared<const Relation>(size(), std::move(tuples));
        return s;
    }
    // Same domain, no constants and no relations.
    Structure bare() const {
        Structure s(*this);
        s.constants_.clear();
        s.relations_.clear();
        return s;
    }
    bool same_domain(const Structure& other) const {
        return domain_ == other.domain_ || domain_->names == other.domain_->names;
    }

    std::vector<Element> elements() const {
        std::vector<Element> out(size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = Element{static_cast<std::uint32_t>(i)};
        return out;
    }

private:
    struct DomainData {
        std::vector<std::string> names;
        std::map<std::string, std::uint32_t, std::less<>> index;
    };
    std::shared_ptr<const DomainData> domain_;
    std::map<std::string, Element, std::less<>> constants_;
    std::map<std::string, std::shared_ptr<const Relation>, std::less<>> relations_;
};

using Assignment = std::map<std::string, Element, std::less<>>;

// A team in canonical form: variables sorted by name, rows sorted and
// duplicate-free. Two teams are equal exactly when they denote the same set
// of assignments, which is what the evaluator's memo relies on.
class Team {
public:
    Team() = default;

    Team(std::vector<std::string> vars, const std::vector<Tuple>& rows) {
        std::vector<Element> cells;
        cells.reserve(vars.size() * rows.size());
        for (const auto& r : rows) {
            if (r.size() != vars.size()) throw DomainError("team row width does not match its variables");
            cells.insert(cells.end(), r.begin(), r.end());
        }
        *this = from_cells(std::move(vars), std::move(cells), rows.size());
    }

    // Rows given row-major in the column order of `vars` (any order).
    static Team from_cells(std::vector<std::string> vars, std::vector<Element> cells, std::size_t rows) {
        const std::size_t w = vars.size();
        std::vector<std::size_t> perm(w);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) { return vars[a] < vars[b]; });
        for (std::size_t i = 1; i < w; ++i)
            if (vars[perm[i]] == vars[perm[i - 1]]) throw DomainError("duplicate team variable '" + vars[perm[i]] + "'");
        bool identity = true;
        for (std::size_t i = 0; i < w; ++i) identity = identity && perm[i] == i;
        Team t;
        t.vars_.reserve(w);
        for (std::size_t i = 0; i < w; ++i) t.vars_.push_back(std::move(vars[perm[i]]));
        if (!identity) {
            std::vector<Element> permuted(cells.size());
            for (std::size_t r = 0; r < rows; ++r)
                for (std::size_t i = 0; i < w; ++i) permuted[r * w + i] = cells[r * w + perm[i]];
            cells = std::move(permuted);
        }
        t.rows_ = TupleSet(w, std::move(cells), rows);
        return t;
    }

    // Trusted: vars already sorted, rows already canonical.
    static Team from_canonical(std::vector<std::string> vars, TupleSet rows) {
        Team t;
        t.vars_ = std::move(vars);
        t.rows_ = std::move(rows);
        return t;
    }

    // The team {ε} containing only the empty assignment.
    static Team unit() { return from_canonical({}, TupleSet(0, {}, 1)); }

    static Team empty_over(std::vector<std::string> vars) { return from_cells(std::move(vars), {}, 0); }

    const std::vector<std::string>& vars() const noexcept { return vars_; }
    std::size_t arity() const noexcept { return vars_.size(); }
    std::size_t size() const noexcept { return rows_.size(); }
    bool empty() const noexcept { return rows_.empty(); }
    const TupleSet& rows() const noexcept { return rows_; }
    std::span<const Element> row(std::size_t i) const { return rows_[i]; }

    std::optional<std::size_t> column(std::string_view var) const {
        auto it = std::lower_bound(vars_.begin(), vars_.end(), var);
        if (it == vars_.end() || *it != var) return std::nullopt;
        return static_cast<std::size_t>(it - vars_.begin());
    }
    std::size_t column_of(std::string_view var) const {
        if (auto c = column(var)) return *c;
        throw DomainError("variable '" + std::string(var) + "' is not in the team's domain");
    }
    bool has_var(std::string_view var) const { return column(var).has_value(); }

    Assignment assignment(std::size_t i) const {
        Assignment a;
        for (std::size_t c = 0; c < vars_.size(); ++c) a.emplace(vars_[c], rows_[i][c]);
        return a;
    }

    // Subteam made of the listed rows (indices ascending), stays canonical.
    Team select(const std::vector<std::size_t>& indices) const {
        std::vector<Element> cells;
        cells.reserve(indices.size() * arity());
        for (std::size_t i : indices) {
            auto r = rows_[i];
            cells.insert(cells.end(), r.begin(), r.end());
        }
        return from_canonical(vars_, TupleSet::from_sorted(arity(), std::move(cells), indices.size()));
    }
    Team select_mask(std::uint64_t mask) const {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < size(); ++i)
            if (mask >> i & 1u) idx.push_back(i);
        return select(idx);
    }

    friend bool operator==(const Team& a, const Team& b) { return a.vars_ == b.vars_ && a.rows_ == b.rows_; }

    std::size_t hash() const noexcept {
        std::size_t h = rows_.hash();
        for (const auto& v : vars_) h = (h ^ std::hash<std::string>{}(v)) * 1099511628211ull;
        return h;
    }

private:
    std::vector<std::string> vars_;
    TupleSet rows_;
};

// X(v̄) = {s(v̄) : s ∈ X}; repeated variables are allowed.
inline TupleSet team_projection(const Team& X, std::span<const std::string> vars) {
    std::vector<std::size_t> cols;
    cols.reserve(vars.size());
    for (const auto& v : vars) cols.push_back(X.column_of(v));
    if (cols.empty()) return TupleSet(0, {}, X.empty() ? 0 : 1);
    std::vector<Element> cells;
    cells.reserve(cols.size() * X.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        auto r = X.row(i);
        for (std::size_t c : cols) cells.push_back(r[c]);
    }
    return TupleSet(cols.size(), std::move(cells), X.size());
}

inline TupleSet team_projection(const Team& X, std::initializer_list<std::string> vars) {
    std::vector<std::string> v(vars);
    return team_projection(X, std::span<const std::string>(v));
}

// X ≡_V Y. V is given as a list; its order is irrelevant.
inline bool team_equiv_on(const Team& X, const Team& Y, std::span<const std::string> V) {
    std::vector<std::string> vars(V.begin(), V.end());
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    for (const auto& v : vars)
        if (!X.has_var(v) || !Y.has_var(v))
            throw DomainError("variable '" + v + "' is not in both team domains");
    return team_projection(X, vars) == team_projection(Y, vars);
}

// X[M/v] = {s[m/v] : s ∈ X, m ∈ M}.
inline Team extend_universal(const Team& X, const std::string& v, const Structure& M) {
    const std::size_t n = M.size();
    if (n == 0) throw DomainError("empty structure domain");
    std::vector<std::string> vars = X.vars();
    std::optional<std::size_t> col = X.column(v);
    const bool appended = !col && (vars.empty() || vars.back() < v);
    if (!col) vars.push_back(v);
    const std::size_t w = vars.size();
    std::vector<Element> cells;
    cells.reserve(w * X.size() * n);
    for (std::size_t i = 0; i < X.size(); ++i) {
        auto r = X.row(i);
        for (std::uint32_t m = 0; m < n; ++m) {
            cells.insert(cells.end(), r.begin(), r.end());
            if (col) cells[cells.size() - w + *col] = Element{m};
            else cells.push_back(Element{m});
        }
    }
    const std::size_t rows = X.size() * n;
    if (appended) return Team::from_canonical(std::move(vars), TupleSet::from_sorted(w, std::move(cells), rows));
    return Team::from_cells(std::move(vars), std::move(cells), rows);
}

// The equality pattern of a tuple: block[i] is the first position holding
// the same element as position i.
struct IdentityType {
    std::vector<std::size_t> block;

    std::size_t size() const noexcept { return block.size(); }
    bool matches(std::span<const Element> t) const {
        if (t.size() != block.size()) return false;
        for (std::size_t i = 0; i < t.size(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                if ((t[i] == t[j]) != (block[i] == block[j])) return false;
        return true;
    }
    friend bool operator==(const IdentityType&, const IdentityType&) = default;
};

inline IdentityType identity_type_of(std::span<const Element> t) {
    if (t.empty()) throw DomainError("identity type of an empty tuple");
    IdentityType ty;
    ty.block.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        ty.block[i] = i;
        for (std::size_t j = 0; j < i; ++j)
            if (t[j] == t[i]) {
                ty.block[i] = ty.block[j];
                break;
            }
    }
    return ty;
}

// h: B → A given as image[b.index] = element of the substructure.
using RetractionHom = std::vector<Element>;

namespace detail {

// Checks (A,R) ⊆ (B,S) by element names and returns the embedding of A's
// elements into B.
inline std::vector<Element> check_substructure(const Structure& sub, const Structure& sup, std::string_view relation) {
    std::vector<Element> embed(sub.size());
    for (std::size_t i = 0; i < sub.size(); ++i) {
        auto e = sup.find_element(sub.domain_names()[i]);
        if (!e) throw PreconditionError("not a substructure: element '" + sub.domain_names()[i] + "' missing");
        embed[i] = *e;
    }
    const Relation& R = sub.relation(relation);
    const Relation& S = sup.relation(relation);
    if (R.arity() != S.arity()) throw PreconditionError("not a substructure: relation arities differ");
    std::vector<int> back(sup.size(), -1);
    for (std::size_t i = 0; i < embed.size(); ++i) back[embed[i].index] = static_cast<int>(i);
    std::vector<Element> cells;
    std::size_t rows = 0;
    for (std::size_t i = 0; i < S.tuples().size(); ++i) {
        auto t = S.tuples()[i];
        bool inside = std::all_of(t.begin(), t.end(), [&](Element e) { return back[e.index] >= 0; });
        if (!inside) continue;
        for (Element e : t) cells.push_back(Element{static_cast<std::uint32_t>(back[e.index])});
        ++rows;
    }
    if (TupleSet(R.arity(), std::move(cells), rows) != R.tuples())
        throw PreconditionError("not a substructure: R differs from S restricted to A");
    return embed;
}

}  // namespace detail

// Calls fn(h) for every h: B → A fixing A pointwise with h(S) ⊆ R; stops
// early when fn returns false.
template <class Fn>
void for_each_retraction_hom(const Structure& sub, const Structure& sup, std::string_view relation, Fn&& fn) {
    const std::vector<Element> embed = detail::check_substructure(sub, sup, relation);
    std::vector<int> fixed(sup.size(), -1);
    for (std::size_t i = 0; i < embed.size(); ++i) fixed[embed[i].index] = static_cast<int>(i);
    std::vector<std::size_t> free;
    for (std::size_t b = 0; b < sup.size(); ++b)
        if (fixed[b] < 0) free.push_back(b);
    const Relation& R = sub.relation(relation);
    const TupleSet& S = sup.relation(relation).tuples();
    RetractionHom h(sup.size());
    for (std::size_t b = 0; b < sup.size(); ++b)
        if (fixed[b] >= 0) h[b] = Element{static_cast<std::uint32_t>(fixed[b])};
    std::vector<std::uint32_t> choice(free.size(), 0);
    Tuple image(R.arity());
    while (true) {
        for (std::size_t i = 0; i < free.size(); ++i) h[free[i]] = Element{choice[i]};
        bool ok = true;
        for (std::size_t i = 0; i < S.size() && ok; ++i) {
            auto t = S[i];
            for (std::size_t c = 0; c < t.size(); ++c) image[c] = h[t[c].index];
            ok = R.contains(image);
        }
        if (ok && !fn(static_cast<const RetractionHom&>(h))) return;
        std::size_t pos = 0;
        while (pos < free.size() && ++choice[pos] == sub.size()) choice[pos++] = 0;
        if (pos == free.size()) return;
    }
}

inline std::vector<RetractionHom> enumerate_retraction_homs(const Structure& sub, const Structure& sup,
                                                             std::string_view relation = "R") {
    std::vector<RetractionHom> out;
    for_each_retraction_hom(sub, sup, relation, [&](const RetractionHom& h) {
        out.push_back(h);
        return true;
    });
    return out;
}

}  // namespace teamlogic

template <>
struct std::hash<teamlogic::Team> {
    std::size_t operator()(const teamlogic::Team& t) const noexcept { return t.hash(); }
};
