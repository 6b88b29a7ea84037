#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"

using namespace teamlogic;
using namespace testing_helpers;

namespace {

constexpr EvalStrategy all_strategies[] = {EvalStrategy::naive, EvalStrategy::memoized, EvalStrategy::optimized};

bool eval_with(const Structure& M, const Team& X, const Formula& f, EvalStrategy s, const DependencyRegistry& reg = {}) {
    EvalOptions o;
    o.strategy = s;
    return team_eval(M, X, f, reg, o);
}

// ---- rule examples ---------------------------------------------------------------------

TEST(TeamEval, LiteralFailsOnOneRow) {
    Structure M = with_R({"a", "b"}, 2, {{"a", "b"}}, "E");
    Team X = team(M, {"x", "y"}, {{"a", "b"}, {"b", "b"}});
    for (auto s : all_strategies) EXPECT_FALSE(holds(M, X, "E(x,y)", s));
    EXPECT_TRUE(holds(M, team(M, {"x", "y"}, {{"a", "b"}}), "E(x,y)"));
}

TEST(TeamEval, EmptyTeamSatisfiesFirstOrderFormulas) {
    Structure M = with_R({"a", "b"}, 2, {{"a", "b"}}, "E");
    FormulaGenerator gen(3);
    for (int i = 0; i < 100; ++i)
        for (auto s : all_strategies) EXPECT_TRUE(eval_with(M, Team::empty_over({"x", "y"}), *gen.next(), s));
}

TEST(TeamEval, EvenCardinality) {
    FormulaPtr f = parse_formula(even_cardinality_text());
    for (std::size_t n = 1; n <= 4; ++n)
        EXPECT_EQ(team_eval(Structure(element_names(n)), Team::unit(), *f), n % 2 == 0) << "|M|=" << n;
}

// With y=w ∧ x≠z as the second guard the sentence only asks for an
// injective fixed-point-free map, which exists on every domain of size ≥ 2.
TEST(TeamEval, InjectiveVariantDoesNotDetectParity) {
    FormulaPtr f = parse_formula(
        "forall x. exists y. forall z. exists w. (dep(x;y) & dep(z;w) & ((x=z & y!=w) ->> x!=x) & "
        "((x!=z & y=w) ->> x!=x) & x!=y)");
    EXPECT_FALSE(team_eval(Structure(element_names(1)), Team::unit(), *f));
    EXPECT_TRUE(team_eval(Structure(element_names(2)), Team::unit(), *f));
    EXPECT_TRUE(team_eval(Structure(element_names(3)), Team::unit(), *f));
}

TEST(TeamEval, DisjunctionRangesOverCovers) {
    // A single row must go to both sides: a partition cannot satisfy ne twice.
    Structure M({"a", "b"});
    Team X = team(M, {"x"}, {{"a"}});
    for (auto s : all_strategies) EXPECT_TRUE(holds(M, X, "ne(x) | ne(x)", s));
    for (auto s : all_strategies) EXPECT_FALSE(holds(M, Team::empty_over({"x"}), "ne(x) | x=x", s));
}

TEST(TeamEval, ExistentialUsesWitnessSets) {
    // X = {x=a}: y must take both values, which one function cannot do.
    Structure M({"a", "b"});
    Team X = team(M, {"x"}, {{"a"}});
    for (auto s : all_strategies) {
        EXPECT_TRUE(holds(M, X, "exists y. (inc(x;y) & ind(x;y) & anon(x;y))", s));
        EXPECT_FALSE(holds(M, X, "exists y. (const(y) & anon(x;y))", s));
    }
}

TEST(TeamEval, GlobalDisjunctionAndHook) {
    Structure M({"a", "b"});
    Team X = team(M, {"x", "y"}, {{"a", "a"}, {"a", "b"}});
    EXPECT_TRUE(holds(M, X, "const(y) <|> const(x)"));
    EXPECT_FALSE(holds(M, X, "const(y) <|> x!=x"));
    EXPECT_TRUE(holds(M, X, "x=y ->> const(y)"));
    EXPECT_FALSE(holds(M, X, "x=x ->> const(y)"));
}

TEST(TeamEval, Errors) {
    Structure M({"a"});
    Team X = team(M, {"x"}, {{"a"}});
    EXPECT_THROW(holds(M, X, "D:missing(x)"), DomainError);
    EXPECT_THROW(holds(M, X, "x=y"), DomainError);
    EXPECT_THROW(team_eval(M, X, *parse_formula_raw("!(x=x)")), TypeError);
    DependencyRegistry reg{Dependency::functional("f", 1, 1)};
    EXPECT_THROW(team_eval(M, X, *parse_formula("D:f(x)"), reg), DomainError);
}

TEST(TeamEval, BudgetExceededIsAnError) {
    const ParityInstance p = build_parity_instance(3);
    EvalOptions o;
    o.strategy = EvalStrategy::naive;
    o.budget = 10'000;
    EXPECT_THROW(team_eval(p.structure, Team::unit(), *p.sentence, p.registry, o), BudgetExceeded);
    o.strategy = EvalStrategy::optimized;
    o.budget = 10;
    EXPECT_THROW(team_eval(p.structure, Team::unit(), *p.sentence, p.registry, o), BudgetExceeded);
}

TEST(TeamEval, ParityUnderNaiveWithSymmetry) {
    const ParityInstance p = build_parity_instance(2);
    EvalOptions o;
    o.strategy = EvalStrategy::naive;
    o.symmetry_reduction = true;
    EXPECT_TRUE(team_eval(p.structure, Team::unit(), *p.sentence, p.registry, o));
}

// ---- builtin atoms ---------------------------------------------------------------------

bool atom_on(const Rows& rows, const std::string& atom) {
    Structure M({"a", "b"});
    return eval_builtin_atom(M, team(M, {"v", "w"}, rows), *parse_formula(atom));
}

TEST(BuiltinAtoms, Independence) {
    EXPECT_TRUE(atom_on({{"a", "a"}, {"a", "b"}, {"b", "a"}, {"b", "b"}}, "ind(v;w)"));
    EXPECT_FALSE(atom_on({{"a", "a"}, {"b", "b"}}, "ind(v;w)"));
}

TEST(BuiltinAtoms, Anonymity) {
    EXPECT_FALSE(atom_on({{"a", "a"}}, "anon(v;w)"));
    EXPECT_TRUE(atom_on({{"a", "a"}, {"a", "b"}}, "anon(v;w)"));
}

TEST(BuiltinAtoms, EmptyTeam) {
    EXPECT_FALSE(atom_on({}, "ne(v)"));
    EXPECT_TRUE(atom_on({}, "const(v)"));
    EXPECT_TRUE(atom_on({}, "dep(v;w)"));
    EXPECT_TRUE(atom_on({}, "inc(v;w)"));
}

TEST(BuiltinAtoms, FunctionalAndInclusion) {
    EXPECT_FALSE(atom_on({{"a", "a"}, {"a", "b"}}, "dep(v;w)"));
    EXPECT_TRUE(atom_on({{"a", "b"}, {"b", "b"}}, "dep(v;w)"));
    EXPECT_TRUE(atom_on({{"a", "b"}, {"b", "a"}}, "inc(v;w)"));
    EXPECT_FALSE(atom_on({{"a", "b"}}, "inc(v;w)"));
}

TEST(BuiltinAtoms, NotABuiltinIsTypeError) {
    Structure M({"a"});
    EXPECT_THROW(eval_builtin_atom(M, team(M, {"v"}, {{"a"}}), *parse_formula("v=v")), TypeError);
}

// ---- generalized dependency atoms ------------------------------------------------------

TEST(DependencyAtoms, FirstOrderDefined) {
    Structure M({"a", "b"});
    Dependency D = Dependency::first_order("some", 1, parse_formula("exists x. R(x)"));
    EXPECT_TRUE(eval_dep_atom(M, team(M, {"x"}, {{"a"}}), D, std::vector<std::string>{"x"}));
    EXPECT_FALSE(eval_dep_atom(M, Team::empty_over({"x"}), D, std::vector<std::string>{"x"}));
}

TEST(DependencyAtoms, Dep11) {
    Structure M({"a", "b"});
    Dependency D = Dependency::first_order("dep11", 2, parse_formula("forall x,y,z. ((R(x,y) & R(x,z)) -> y=z)"));
    EXPECT_FALSE(eval_dep_atom(M, team(M, {"v", "w"}, {{"a", "a"}, {"a", "b"}}), D, std::vector<std::string>{"v", "w"}));
    EXPECT_TRUE(eval_dep_atom(M, Team::empty_over({"v", "w"}), D, std::vector<std::string>{"v", "w"}));
    EXPECT_THROW(eval_dep_atom(M, team(M, {"v"}, {{"a"}}), D, std::vector<std::string>{"v"}), DomainError);
}

TEST(DependencyAtoms, EmptyTeamFollowsDepHolds) {
    Structure M({"a", "b"});
    for (const Dependency& D : {Dependency::nonempty("ne", 1), Dependency::independence("ind", 1, 1),
                                Dependency::constancy("const", 1), Dependency::inclusion("inc", 1)}) {
        std::vector<std::string> vs;
        for (std::size_t i = 0; i < D.arity(); ++i) vs.push_back("v" + std::to_string(i));
        EXPECT_EQ(eval_dep_atom(M, Team::empty_over(vs), D, vs), dep_holds(D, M, TupleSet(D.arity()))) << D.name();
    }
}

// ---- properties ------------------------------------------------------------------------

std::vector<FormulaPtr> corpus(std::uint64_t seed, std::size_t n, bool deps = true) {
    GeneratorOptions o;
    o.dependency_atoms = deps;
    FormulaGenerator gen(seed, o);
    std::vector<FormulaPtr> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(gen.next());
    return out;
}

bool mentions(const Formula& f, AtomKind kind) {
    if (f.kind() == Kind::dependency && f.atom() == kind) return true;
    for (const auto& c : f.children())
        if (mentions(*c, kind)) return true;
    return false;
}

TEST(TeamEvalProperty, FlatnessOnSmallStructures) {
    const auto structures = enumerate_structures(2, {{"E", 2}});
    for (const auto& f : corpus(1, 60, false))
        for (const auto& M : structures) {
            Team U = full_team(M, {"x", "y"});
            for (std::uint64_t m = 0; m < (std::uint64_t{1} << U.size()); ++m) {
                Team X = U.select_mask(m);
                for (auto s : all_strategies) ASSERT_EQ(eval_with(M, X, *f, s), tarski_all_rows(M, X, *f)) << to_string(*f);
            }
        }
}

TEST(TeamEvalProperty, Locality) {
    // Teams over {x,y,z} against their projection onto {x,y}: exhaustive at
    // |M| ≤ 2, sampled at |M| = 3.
    std::mt19937_64 rng(11);
    for (std::size_t n = 1; n <= 3; ++n) {
        Structure M = Structure(element_names(n)).with_relation("E", relation_from_mask(n, 2, 0b100110001 & ((1u << (n * n)) - 1)));
        Team U = full_team(M, {"x", "y", "z"});
        const std::uint64_t count = std::uint64_t{1} << U.size();
        for (const auto& f : corpus(2, 40)) {
            for (std::uint64_t i = 0; i < std::min<std::uint64_t>(count, 256); ++i) {
                const std::uint64_t m = count <= 256 ? i : std::uniform_int_distribution<std::uint64_t>(0, count - 1)(rng);
                Team X = U.select_mask(m);
                Team Y(std::vector<std::string>{"x", "y"}, team_projection(X, {"x", "y"}).tuples());
                ASSERT_EQ(team_eval(M, X, *f), team_eval(M, Y, *f)) << to_string(*f);
            }
        }
    }
}

TEST(TeamEvalProperty, EmptyTeamWithoutNonemptiness) {
    Structure M = with_R({"a", "b"}, 2, {{"a", "b"}}, "E");
    for (const auto& f : corpus(3, 300)) {
        if (mentions(*f, AtomKind::nonempty)) continue;
        EXPECT_TRUE(team_eval(M, Team::empty_over({"x", "y"}), *f)) << to_string(*f);
    }
}

TEST(TeamEvalProperty, GlobalDisjunctionIsEitherSide) {
    Structure M = with_R({"a", "b"}, 2, {{"a", "b"}, {"b", "b"}}, "E");
    Team U = full_team(M, {"x", "y"});
    auto fs = corpus(4, 40);
    for (std::size_t i = 0; i + 1 < fs.size(); i += 2) {
        FormulaPtr g = make_gor(fs[i], fs[i + 1]);
        for (std::uint64_t m = 0; m < 16; ++m) {
            Team X = U.select_mask(m);
            EXPECT_EQ(team_eval(M, X, *g), team_eval(M, X, *fs[i]) || team_eval(M, X, *fs[i + 1]));
        }
    }
}

TEST(TeamEvalProperty, HookCoherence) {
    GeneratorOptions o;
    o.dependency_atoms = true;
    FormulaGenerator gen(5, o);
    const auto structures = enumerate_structures(2, {{"E", 2}});
    for (int i = 0; i < 30; ++i) {
        FormulaPtr theta = gen.first_order(2, {"x", "y"});
        FormulaPtr phi = gen.next();
        FormulaPtr hook = make_hook(theta, phi);
        FormulaPtr sugar = desugar_hook(theta, phi);
        for (const auto& M : structures) {
            Team U = full_team(M, {"x", "y"});
            for (std::uint64_t m = 0; m < (std::uint64_t{1} << U.size()); ++m) {
                Team X = U.select_mask(m);
                const bool direct = team_eval(M, X, *hook);
                ASSERT_EQ(direct, team_eval(M, restrict_team(X, *theta, M), *phi));
                ASSERT_EQ(direct, team_eval(M, X, *sugar));
            }
        }
    }
}

TEST(TeamEvalProperty, DownwardClosure) {
    const auto structures = enumerate_structures(2, {{"E", 2}});
    std::size_t tested = 0;
    for (const auto& f : corpus(6, 200)) {
        if (mentions(*f, AtomKind::nonempty) || mentions(*f, AtomKind::inclusion)) continue;
        ++tested;
        for (const auto& M : structures) {
            Team U = full_team(M, {"x", "y"});
            const std::uint64_t full = (std::uint64_t{1} << U.size()) - 1;
            std::vector<bool> v(full + 1);
            for (std::uint64_t m = 0; m <= full; ++m) v[m] = team_eval(M, U.select_mask(m), *f, EvalStrategy::memoized);
            for (std::uint64_t m = 0; m <= full; ++m) {
                if (!v[m]) continue;
                for (std::uint64_t s = m;; s = (s - 1) & m) {
                    ASSERT_TRUE(v[s]) << to_string(*f);
                    if (s == 0) break;
                }
            }
        }
    }
    EXPECT_GT(tested, 50u);
}

TEST(TeamEvalProperty, SubteamOracleMatchesSingleCalls) {
    const auto structures = enumerate_structures(2, {{"E", 2}});
    for (const auto& f : corpus(7, 60))
        for (const auto& M : structures) {
            Team U = full_team(M, {"x", "y"});
            TeamEvaluator ev(M, DependencyRegistry{});
            auto all = ev.evaluate_subteams(U, *f);
            for (std::uint64_t m = 0; m < all.size(); ++m) ASSERT_EQ(all[m], team_eval(M, U.select_mask(m), *f)) << to_string(*f);
        }
}

// Y ≡ X off v, enumerated directly as subsets of X[M/v].
bool exists_by_definition(const Structure& M, const Team& X, const std::string& v, const Formula& body) {
    Team ext = extend_universal(X, v, M);
    std::vector<std::string> rest;
    for (const auto& u : X.vars())
        if (u != v) rest.push_back(u);
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << ext.size()); ++m) {
        Team Y = ext.select_mask(m);
        if (team_projection(Y, rest) != team_projection(X, rest)) continue;
        if (team_eval(M, Y, body, EvalStrategy::naive)) return true;
    }
    return false;
}

TEST(TeamEvalProperty, ExistentialMatchesTheDefinition) {
    GeneratorOptions o;
    o.dependency_atoms = true;
    FormulaGenerator gen(8, o);
    const auto structures = enumerate_structures(2, {{"E", 2}});
    for (int i = 0; i < 40; ++i) {
        FormulaPtr body = gen.next();
        for (const auto& M : structures) {
            Team U = full_team(M, {"x", "y"});
            for (std::uint64_t m = 0; m < (std::uint64_t{1} << U.size()); ++m) {
                Team X = U.select_mask(m);
                if (X.size() > 2) continue;
                for (auto s : all_strategies)
                    ASSERT_EQ(eval_with(M, X, *make_exists("y", body), s), exists_by_definition(M, X, "y", *body))
                        << to_string(*body);
            }
        }
    }
}

TEST(TeamEvalProperty, StrategiesAgree) {
    const auto structures = enumerate_structures(2, {{"E", 2}});
    for (const auto& f : corpus(9, 150))
        for (const auto& M : structures) {
            Team U = full_team(M, {"x", "y"});
            for (std::uint64_t m = 0; m < (std::uint64_t{1} << U.size()); ++m) {
                Team X = U.select_mask(m);
                EvalOptions o;
                o.strategy = EvalStrategy::naive;
                o.budget = 20'000;
                bool naive;
                try {
                    naive = team_eval(M, X, *f, o);
                } catch (const BudgetExceeded&) {
                    continue;
                }
                ASSERT_EQ(naive, team_eval(M, X, *f, EvalStrategy::memoized)) << to_string(*f);
                ASSERT_EQ(naive, team_eval(M, X, *f, EvalStrategy::optimized)) << to_string(*f);
                o.strategy = EvalStrategy::optimized;
                o.symmetry_reduction = false;
                ASSERT_EQ(naive, team_eval(M, X, *f, o)) << to_string(*f);
            }
        }
}

// Formulas built from inclusion, anonymity and nonemptiness atoms take the
// largest-subteam and superset shortcuts under the optimized strategy.
TEST(TeamEvalProperty, ClosureShortcutsAgreeWithNaive) {
    const char* const formulas[] = {
        "inc(x;y) | const(x)",
        "(inc(x;y) & exists z. inc(z;x)) | dep(x;y)",
        "(forall z. (inc(z;y) | E(x,z))) | (const(y) & E(x,y))",
        "(E(x,y) ->> anon(x;y)) | dep(y;x)",
        "(anon(x;y) | inc(y;x)) | (const(x) | const(y))",
        "(ne(y) & dep(y;x)) | (const(x) | ne(y))",
        "(exists z. (ne(z) & E(z,x))) | dep(x;y)",
        "forall z. ((ne(y) & dep(y;x)) | (const(x) | ne(z)))",
        "(dep(x;x) & inc(x;y)) | (const(y) & ne(x))",
        "((inc(y;x) & const(y)) | (const(y) & ne(y))) & (E(x,y) | ne(x))",
    };
    const auto structures = enumerate_structures(2, {{"E", 2}});
    for (const char* text : formulas) {
        const FormulaPtr f = parse_formula(text);
        for (const auto& M : structures) {
            Team U = full_team(M, {"x", "y"});
            for (std::uint64_t m = 0; m < (std::uint64_t{1} << U.size()); ++m) {
                Team X = U.select_mask(m);
                const bool naive = team_eval(M, X, *f, EvalStrategy::naive);
                ASSERT_EQ(naive, team_eval(M, X, *f, EvalStrategy::optimized)) << text << " mask " << m;
            }
        }
    }
}

TEST(TeamEvalProperty, NaiveBoundCoversActualExpansions) {
    const auto structures = enumerate_structures(3, {{"E", 2}});
    const DependencyRegistry reg;
    std::mt19937_64 rng(10);
    for (const auto& f : corpus(10, 60)) {
        for (int k = 0; k < 20; ++k) {
            const Structure& M = structures[std::uniform_int_distribution<std::size_t>(0, structures.size() - 1)(rng)];
            Team U = full_team(M, {"x", "y"});
            Team X = U.select_mask(std::uniform_int_distribution<std::uint64_t>(0, (std::uint64_t{1} << U.size()) - 1)(rng));
            const double bound = naive_expansion_bound(*f, X.size(), X.vars(), M.size());
            if (bound > 50'000) continue;
            EvalOptions o;
            o.strategy = EvalStrategy::naive;
            TeamEvaluator ev(M, reg, o);
            ev.evaluate(X, *f);
            EXPECT_LE(static_cast<double>(ev.expansions()), bound) << to_string(*f);
        }
    }
}

}  // namespace
