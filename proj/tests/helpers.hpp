#pragma once

// Small constructors shared by the unit tests: structures, relations and
// teams written with element names.

#include <string>
#include <vector>

#include "teamlogic/teamlogic.hpp"

namespace testing_helpers {

using namespace teamlogic;
using Rows = std::vector<std::vector<std::string>>;

inline TupleSet tuples(const Structure& M, std::size_t arity, const Rows& rows) {
    std::vector<Tuple> ts;
    for (const auto& r : rows) ts.push_back(M.tuple(r));
    return TupleSet(arity, ts);
}

inline Team team(const Structure& M, std::vector<std::string> vars, const Rows& rows) {
    std::vector<Tuple> ts;
    for (const auto& r : rows) ts.push_back(M.tuple(r));
    return Team(std::move(vars), ts);
}

inline Structure with_R(std::vector<std::string> domain, std::size_t arity, const Rows& rows, const std::string& name = "R") {
    Structure M(std::move(domain));
    return M.with_relation(name, tuples(M, arity, rows));
}

inline bool holds(const Structure& M, const Team& X, const std::string& text, EvalStrategy s = EvalStrategy::optimized) {
    return team_eval(M, X, *parse_formula(text), s);
}

inline bool sentence_holds(const Structure& M, const std::string& text) { return tarski_eval(M, *parse_formula(text)); }

}  // namespace testing_helpers
