#pragma once

// JSON file formats. Kept apart from the umbrella header so that the core
// library does not depend on the JSON package.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dependency.hpp"
#include "dependency_checks.hpp"
#include "errors.hpp"
#include "harness.hpp"
#include "parser.hpp"
#include "structure.hpp"

namespace teamlogic::io {

using nlohmann::json;

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
    }
}

namespace detail {

inline const json& field(const json& j, const char* key, const char* what) {
    if (!j.is_object()) throw ValidationError(std::string(what) + " must be a JSON object");
    auto it = j.find(key);
    if (it == j.end()) throw ValidationError(std::string(what) + " lacks \"" + key + "\"");
    return *it;
}

inline std::string as_string(const json& j, const char* what) {
    if (!j.is_string()) throw ValidationError(std::string(what) + " must be a string");
    return j.get<std::string>();
}

inline std::vector<std::string> as_strings(const json& j, const char* what) {
    if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array");
    std::vector<std::string> out;
    for (const auto& e : j) out.push_back(as_string(e, what));
    return out;
}

inline std::size_t as_size(const json& j, const char* what) {
    if (!j.is_number_integer() || j.get<long long>() < 0) throw ValidationError(std::string(what) + " must be a natural number");
    return j.get<std::size_t>();
}

inline TupleSet tuples_over(const Structure& M, std::size_t arity, const json& rows, const char* what) {
    if (!rows.is_array()) throw ValidationError(std::string(what) + " must be an array of tuples");
    std::vector<Tuple> ts;
    for (const auto& r : rows) {
        auto names = as_strings(r, what);
        if (names.size() != arity)
            throw ValidationError(std::string(what) + " has a tuple of width " + std::to_string(names.size()) + ", expected " +
                                  std::to_string(arity));
        Tuple t;
        for (const auto& n : names) {
            auto e = M.find_element(n);
            if (!e) throw ValidationError(std::string(what) + " mentions unknown element '" + n + "'");
            t.push_back(*e);
        }
        ts.push_back(std::move(t));
    }
    return TupleSet(arity, ts);
}

}  // namespace detail

// {"domain":[...],"constants":{"c":"a"},"relations":{"E":{"arity":2,"tuples":[["a","b"]]}}}
inline Structure structure_from_json(const json& j) {
    Structure M(detail::as_strings(detail::field(j, "domain", "structure"), "domain"));
    if (auto it = j.find("constants"); it != j.end()) {
        if (!it->is_object()) throw ValidationError("constants must be an object");
        for (const auto& [c, v] : it->items()) {
            auto e = M.find_element(detail::as_string(v, "constant value"));
            if (!e) throw ValidationError("constant '" + c + "' names an unknown element");
            M = M.with_constant(c, *e);
        }
    }
    if (auto it = j.find("relations"); it != j.end()) {
        if (!it->is_object()) throw ValidationError("relations must be an object");
        for (const auto& [r, spec] : it->items()) {
            const std::size_t k = detail::as_size(detail::field(spec, "arity", "relation"), "arity");
            if (k == 0) throw ValidationError("relation '" + r + "' must have positive arity");
            M = M.with_relation(r, detail::tuples_over(M, k, detail::field(spec, "tuples", "relation"), "tuples"));
        }
    }
    return M;
}

inline json tuples_to_json(const Structure& M, const TupleSet& R) {
    json rows = json::array();
    for (std::size_t i = 0; i < R.size(); ++i) {
        json t = json::array();
        for (Element e : R[i]) t.push_back(M.name(e));
        rows.push_back(std::move(t));
    }
    return rows;
}

inline json structure_to_json(const Structure& M) {
    json j;
    j["domain"] = M.domain_names();
    json cs = json::object();
    for (const auto& [c, e] : M.constants()) cs[c] = M.name(e);
    j["constants"] = cs;
    json rs = json::object();
    for (const auto& r : M.relation_names()) {
        const Relation& rel = M.relation(r);
        rs[r] = {{"arity", rel.arity()}, {"tuples", tuples_to_json(M, rel.tuples())}};
    }
    j["relations"] = rs;
    return j;
}

// {"vars":["x","y"],"rows":[["a","b"]]}
inline Team team_from_json(const json& j, const Structure& M) {
    auto vars = detail::as_strings(detail::field(j, "vars", "team"), "vars");
    TupleSet rows = detail::tuples_over(M, vars.size(), detail::field(j, "rows", "team"), "rows");
    std::vector<Tuple> ts;
    for (std::size_t i = 0; i < rows.size(); ++i) ts.emplace_back(rows[i].begin(), rows[i].end());
    if (vars.empty() && !detail::field(j, "rows", "team").empty()) ts.assign(1, Tuple{});
    return Team(vars, ts);
}

inline json team_to_json(const Team& X, const Structure& M) {
    json rows = json::array();
    for (std::size_t i = 0; i < X.size(); ++i) {
        json t = json::array();
        for (Element e : X.row(i)) t.push_back(M.name(e));
        rows.push_back(std::move(t));
    }
    return {{"vars", X.vars()}, {"rows", rows}};
}

// {"x":"a","y":"b"}
inline Assignment assignment_from_json(const json& j, const Structure& M) {
    if (!j.is_object()) throw ValidationError("assignment must be an object");
    Assignment s;
    for (const auto& [v, e] : j.items()) {
        auto el = M.find_element(detail::as_string(e, "assignment value"));
        if (!el) throw ValidationError("assignment maps '" + v + "' to an unknown element");
        s[v] = *el;
    }
    return s;
}

// {"name":"antisym","arity":2,"kind":"fo","sentence":"..."}; builtin kinds
// take "lhs" for the width of their first variable block.
inline Dependency dependency_from_json(const json& j) {
    const std::string name = detail::as_string(detail::field(j, "name", "dependency"), "name");
    const std::string kind = detail::as_string(detail::field(j, "kind", "dependency"), "kind");
    const std::size_t arity = detail::as_size(detail::field(j, "arity", "dependency"), "arity");
    auto lhs = [&]() {
        std::size_t n = detail::as_size(detail::field(j, "lhs", "dependency"), "lhs");
        if (n > arity) throw ValidationError("lhs exceeds the arity");
        return n;
    };
    if (kind == "fo") {
        const std::string relation = j.contains("relation") ? detail::as_string(j["relation"], "relation") : "R";
        return Dependency::first_order(name, arity, parse_formula(detail::as_string(detail::field(j, "sentence", "dependency"), "sentence")),
                                       relation);
    }
    if (kind == "functional") {
        const std::size_t n = lhs();
        return Dependency::functional(name, n, arity - n);
    }
    if (kind == "constancy") return Dependency::constancy(name, arity);
    if (kind == "nonempty") return Dependency::nonempty(name, arity);
    if (kind == "inclusion") {
        if (arity % 2) throw ValidationError("inclusion dependencies have even arity");
        return Dependency::inclusion(name, arity / 2);
    }
    if (kind == "independence") {
        const std::size_t n = lhs();
        return Dependency::independence(name, n, arity - n);
    }
    if (kind == "anonymity") {
        const std::size_t n = lhs();
        return Dependency::anonymity(name, n, arity - n);
    }
    if (kind == "table") {
        std::vector<ExtensionalEntry> entries;
        const json& es = detail::field(j, "entries", "dependency");
        if (!es.is_array()) throw ValidationError("entries must be an array");
        for (const auto& e : es) {
            ExtensionalEntry x;
            x.domain = detail::as_strings(detail::field(e, "domain", "entry"), "domain");
            for (const auto& t : detail::field(e, "tuples", "entry")) x.tuples.push_back(detail::as_strings(t, "tuple"));
            const json& m = detail::field(e, "member", "entry");
            if (!m.is_boolean()) throw ValidationError("member must be a boolean");
            x.member = m.get<bool>();
            entries.push_back(std::move(x));
        }
        DefaultPolicy policy = DefaultPolicy::strict;
        if (j.contains("default")) {
            const std::string p = detail::as_string(j["default"], "default");
            if (p == "accept") policy = DefaultPolicy::accept;
            else if (p == "reject") policy = DefaultPolicy::reject;
            else if (p != "strict") throw ValidationError("unknown default policy '" + p + "'");
        }
        return Dependency::extensional_table(name, arity, std::move(entries), policy);
    }
    throw ValidationError("unknown dependency kind '" + kind + "'");
}

inline json check_result_to_json(const CheckResult& r) {
    json j{{"property", r.property}, {"pass", r.pass}, {"bound", r.bound}};
    if (!r.pass) {
        json cx;
        cx["domain"] = r.domain;
        cx["relation"] = r.relation;
        if (!r.other_domain.empty()) cx["other_domain"] = r.other_domain;
        if (!r.other_relation.empty() || !r.other_domain.empty()) cx["other_relation"] = r.other_relation;
        if (!r.chain.empty()) cx["chain"] = r.chain;
        j["counterexample"] = cx;
    }
    return j;
}

// {"domain":["a","b"],"links":[{"R":[["a"]],"S":[["a"],["b"]]}, ...]}; a
// link without "R" reuses the previous S (the empty relation first).
inline std::vector<ChainLink> chain_from_json(const json& j, std::size_t arity, std::vector<std::string>& domain) {
    domain = detail::as_strings(detail::field(j, "domain", "chain"), "domain");
    Structure base(domain);
    const json& links = detail::field(j, "links", "chain");
    if (!links.is_array()) throw ValidationError("links must be an array");
    std::vector<ChainLink> out;
    for (const auto& l : links) {
        TupleSet S = detail::tuples_over(base, arity, detail::field(l, "S", "link"), "S");
        TupleSet R = l.contains("R") ? detail::tuples_over(base, arity, l["R"], "R") : (out.empty() ? TupleSet(arity) : out.back().S);
        out.push_back(ChainLink{std::move(R), std::move(S)});
    }
    return out;
}

}  // namespace teamlogic::io
