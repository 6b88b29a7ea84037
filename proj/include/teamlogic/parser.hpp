#pragma once

#include <cctype>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "formula.hpp"

namespace teamlogic {

// Pushes negations down to atoms. Negation and classical implication may
// only govern dependency-free subformulas.
inline FormulaPtr to_nnf(const FormulaPtr& f, bool negate = false) {
    if (f->is_nnf() && !negate) return f;
    switch (f->kind()) {
    case Kind::relation:
        return negate ? make_relation(f->symbol(), f->terms(), !f->negated()) : f;
    case Kind::equality:
        return negate ? make_equality(f->terms()[0], f->terms()[1], !f->negated()) : f;
    case Kind::dependency:
        if (negate) throw TypeError("negation over a dependency atom");
        return f;
    case Kind::negation:
        if (!f->child(0).dependency_free()) throw TypeError("negation over a subformula containing a dependency atom");
        return to_nnf(f->child_ptr(0), !negate);
    case Kind::implication: {
        if (!f->child(0).dependency_free())
            throw TypeError("the antecedent of an implication must be first order");
        if (negate) {
            if (!f->child(1).dependency_free())
                throw TypeError("negation over a subformula containing a dependency atom");
            return make_and(to_nnf(f->child_ptr(0)), to_nnf(f->child_ptr(1), true));
        }
        return make_or(to_nnf(f->child_ptr(0), true), to_nnf(f->child_ptr(1)));
    }
    case Kind::conjunction:
    case Kind::disjunction: {
        Kind k = f->kind();
        if (negate) {
            if (!f->dependency_free()) throw TypeError("negation over a subformula containing a dependency atom");
            k = k == Kind::conjunction ? Kind::disjunction : Kind::conjunction;
        }
        return Formula::Builder::node(k, {to_nnf(f->child_ptr(0), negate), to_nnf(f->child_ptr(1), negate)});
    }
    case Kind::global_disjunction:
        if (negate) throw TypeError("negation over a global disjunction");
        return make_gor(to_nnf(f->child_ptr(0)), to_nnf(f->child_ptr(1)));
    case Kind::hook:
        // Classically θ ↪ φ is θ → φ, so its negation is θ ∧ ¬φ.
        if (negate) {
            if (!f->child(1).dependency_free())
                throw TypeError("negation over a subformula containing a dependency atom");
            return make_and(to_nnf(f->child_ptr(0)), to_nnf(f->child_ptr(1), true));
        }
        return make_hook(to_nnf(f->child_ptr(0)), to_nnf(f->child_ptr(1)));
    case Kind::exists:
    case Kind::forall: {
        Kind k = f->kind();
        if (negate) {
            if (!f->dependency_free()) throw TypeError("negation over a subformula containing a dependency atom");
            k = k == Kind::exists ? Kind::forall : Kind::exists;
        }
        return Formula::Builder::node(k, {to_nnf(f->child_ptr(0), negate)}, f->symbol());
    }
    }
    return f;
}

struct ParseOptions {
    // Names read as constant symbols unless bound by an enclosing quantifier.
    std::set<std::string, std::less<>> constants;
    // When set, named atoms are resolved: unknown names and arity mismatches
    // are errors. Returns the arity of a registered dependency.
    std::function<std::optional<std::size_t>(const std::string&)> dependency_arity;
};

namespace detail {

class Parser {
public:
    Parser(std::string_view text, const ParseOptions& options) : text_(text), opt_(options) {}

    FormulaPtr parse() {
        FormulaPtr f = formula();
        skip_ws();
        if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return f;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool peek(std::string_view tok) {
        skip_ws();
        return text_.substr(pos_, tok.size()) == tok;
    }
    bool accept(std::string_view tok) {
        if (!peek(tok)) return false;
        pos_ += tok.size();
        return true;
    }
    void expect(std::string_view tok) {
        if (!accept(tok)) fail("expected '" + std::string(tok) + "'");
    }
    static bool name_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
    }
    bool peek_name() {
        skip_ws();
        return pos_ < text_.size() && name_char(text_[pos_]);
    }
    std::string name() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() && name_char(text_[pos_])) ++pos_;
        if (start == pos_) fail("expected a name");
        return std::string(text_.substr(start, pos_ - start));
    }
    // A keyword is a name followed by a non-name character.
    bool peek_keyword(std::string_view kw) {
        skip_ws();
        if (text_.substr(pos_, kw.size()) != kw) return false;
        std::size_t end = pos_ + kw.size();
        return end >= text_.size() || !name_char(text_[end]);
    }
    // Builtin keyword immediately followed (modulo spaces) by '('.
    bool peek_builtin(std::string_view kw) {
        if (!peek_keyword(kw)) return false;
        std::size_t save = pos_;
        pos_ += kw.size();
        bool paren = peek("(");
        pos_ = save;
        return paren;
    }

    FormulaPtr formula() {
        if (peek_keyword("exists") || peek_keyword("forall")) return quantifier();
        return gdisj();
    }

    FormulaPtr quantifier() {
        const bool ex = peek_keyword("exists");
        pos_ += 6;
        std::vector<std::string> vars{name()};
        while (accept(",")) vars.push_back(name());
        expect(".");
        const std::size_t depth = bound_.size();
        bound_.insert(bound_.end(), vars.begin(), vars.end());
        FormulaPtr body = formula();
        bound_.resize(depth);
        return ex ? make_exists(vars, body) : make_forall(vars, body);
    }

    FormulaPtr gdisj() {
        FormulaPtr f = disj();
        while (accept("<|>")) f = make_gor(f, disj());
        return f;
    }
    FormulaPtr disj() {
        FormulaPtr f = conj();
        while (true) {
            skip_ws();
            if (peek("<|>") || !accept("|")) break;
            f = make_or(f, conj());
        }
        return f;
    }
    FormulaPtr conj() {
        FormulaPtr f = unit();
        while (accept("&")) f = make_and(f, unit());
        return f;
    }
    FormulaPtr unit() {
        const std::size_t at = pos_;
        FormulaPtr left = prefix();
        if (accept("->>")) {
            FormulaPtr right = unit();
            if (!left->dependency_free()) {
                pos_ = at;
                fail("the left operand of '->>' must be first order");
            }
            return make_hook(left, right);
        }
        if (accept("->")) {
            FormulaPtr right = unit();
            if (!left->dependency_free()) {
                pos_ = at;
                fail("the left operand of '->' must be first order");
            }
            return make_implies(left, right);
        }
        return left;
    }
    FormulaPtr prefix() {
        skip_ws();
        const std::size_t at = pos_;
        if (peek("!=")) fail("unexpected '!='");
        if (accept("!")) {
            FormulaPtr inner = prefix();
            if (!inner->dependency_free()) {
                pos_ = at;
                fail(inner->kind() == Kind::dependency ? "negated dependency atom"
                                                       : "negation over a subformula containing a dependency atom");
            }
            return make_not(inner);
        }
        return primary();
    }
    FormulaPtr primary() {
        if (peek_keyword("exists") || peek_keyword("forall")) return quantifier();
        if (accept("(")) {
            FormulaPtr f = formula();
            expect(")");
            return f;
        }
        return atom();
    }

    std::vector<std::string> varlist(std::string_view terminators) {
        std::vector<std::string> out;
        skip_ws();
        if (pos_ < text_.size() && terminators.find(text_[pos_]) != std::string_view::npos) return out;
        out.push_back(name());
        while (accept(",")) out.push_back(name());
        return out;
    }

    Term term(const std::string& n) const {
        bool is_bound = std::find(bound_.begin(), bound_.end(), n) != bound_.end();
        return Term{n, !is_bound && opt_.constants.count(n) > 0};
    }

    FormulaPtr atom() {
        skip_ws();
        const std::size_t at = pos_;
        static constexpr std::pair<std::string_view, AtomKind> two_sided[] = {
            {"dep", AtomKind::functional}, {"inc", AtomKind::inclusion}, {"ind", AtomKind::independence},
            {"anon", AtomKind::anonymity}};
        for (auto [kw, kind] : two_sided) {
            if (!peek_builtin(kw)) continue;
            pos_ += kw.size();
            expect("(");
            auto l = varlist(";)");
            expect(";");
            auto r = varlist(")");
            expect(")");
            if (kind == AtomKind::inclusion && l.size() != r.size()) {
                pos_ = at;
                fail("inclusion atom sides must have equal length");
            }
            if (kind != AtomKind::functional && (l.empty() || r.empty())) {
                pos_ = at;
                fail(std::string(kw) + " atom needs two nonempty variable lists");
            }
            if (r.empty()) {
                pos_ = at;
                fail("dependence atom needs a nonempty dependent list");
            }
            return make_dependency(kind, std::move(l), std::move(r));
        }
        for (auto [kw, kind] : {std::pair<std::string_view, AtomKind>{"const", AtomKind::constancy},
                                {"ne", AtomKind::nonempty}}) {
            if (!peek_builtin(kw)) continue;
            pos_ += kw.size();
            expect("(");
            auto l = varlist(")");
            expect(")");
            return make_dependency(kind, std::move(l));
        }
        if (peek("D:")) {
            pos_ += 2;
            std::string n = name();
            expect("(");
            auto l = varlist(")");
            expect(")");
            if (opt_.dependency_arity) {
                auto arity = opt_.dependency_arity(n);
                if (!arity) {
                    pos_ = at;
                    fail("unknown dependency '" + n + "'");
                }
                if (*arity != l.size()) {
                    pos_ = at;
                    fail("dependency '" + n + "' has arity " + std::to_string(*arity) + " but is applied to " +
                         std::to_string(l.size()) + " variables");
                }
            }
            return make_named(n, std::move(l));
        }
        if (!peek_name()) fail("expected a formula");
        std::string first = name();
        if (accept("(")) {
            std::vector<Term> args;
            for (const auto& n : varlist(")")) args.push_back(term(n));
            expect(")");
            if (args.empty()) {
                pos_ = at;
                fail("relational atom '" + first + "' needs arguments");
            }
            return make_relation(first, std::move(args));
        }
        bool neg;
        if (accept("!=")) neg = true;
        else if (accept("=")) neg = false;
        else fail("expected '(', '=' or '!=' after '" + first + "'");
        std::string second = name();
        return make_equality(term(first), term(second), neg);
    }

    std::string_view text_;
    const ParseOptions& opt_;
    std::size_t pos_ = 0;
    std::vector<std::string> bound_;
};

}  // namespace detail

// Parses without normalizing: the result may contain negation and
// implication nodes.
inline FormulaPtr parse_formula_raw(std::string_view text, const ParseOptions& options = {}) {
    return detail::Parser(text, options).parse();
}

// Parses and normalizes to NNF.
inline FormulaPtr parse_formula(std::string_view text, const ParseOptions& options = {}) {
    return to_nnf(parse_formula_raw(text, options));
}

}  // namespace teamlogic
