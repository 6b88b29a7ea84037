#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace teamlogic;
using namespace testing_helpers;

namespace {

std::string nnf(const std::string& text) { return to_string(*parse_formula(text)); }

// ---- parser ----------------------------------------------------------------------------

TEST(Parser, DependencyAtoms) {
    FormulaPtr f = parse_formula("dep(x;y)");
    ASSERT_EQ(f->kind(), Kind::dependency);
    EXPECT_EQ(f->atom(), AtomKind::functional);
    EXPECT_EQ(f->lhs(), std::vector<std::string>{"x"});
    EXPECT_EQ(f->rhs(), std::vector<std::string>{"y"});
    EXPECT_EQ(nnf("dep(;w)"), "const(w)");
    EXPECT_EQ(nnf("anon(x;y) & ind(x;y)"), "anon(x;y) & ind(x;y)");
}

TEST(Parser, QuantifiedHook) {
    FormulaPtr f = parse_formula("exists x. (R(x) & forall y. (R(y) ->> y=x))");
    ASSERT_EQ(f->kind(), Kind::exists);
    const Formula& body = f->child(0);
    ASSERT_EQ(body.kind(), Kind::conjunction);
    ASSERT_EQ(body.child(1).kind(), Kind::forall);
    EXPECT_EQ(body.child(1).child(0).kind(), Kind::hook);
}

TEST(Parser, NegatedDependencyAtomIsRejected) {
    EXPECT_THROW(parse_formula("!dep(x;y)"), ParseError);
    EXPECT_THROW(parse_formula("!(ne(x))"), ParseError);
}

TEST(Parser, Precedence) {
    EXPECT_EQ(nnf("x=y <|> ne(x) | const(x) & inc(x;y)"), "x=y <|> (ne(x) | (const(x) & inc(x;y)))");
    EXPECT_EQ(nnf("forall x. R(x) ->> ne(x)"), "forall x. (R(x) ->> ne(x))");
}

TEST(Parser, SyntaxErrorsCarryPositions) {
    try {
        parse_formula("R(x");
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.position(), 3u);
    }
    EXPECT_THROW(parse_formula("exists . R(x)"), ParseError);
    EXPECT_THROW(parse_formula("ne(x) ->> R(x)"), ParseError);
    EXPECT_THROW(parse_formula("x = "), ParseError);
}

TEST(Parser, ResolvesRegisteredDependencies) {
    DependencyRegistry reg{Dependency::functional("f", 1, 1)};
    ParseOptions po;
    po.dependency_arity = [&reg](const std::string& n) { return reg.arity(n); };
    EXPECT_NO_THROW(parse_formula("D:f(x,y)", po));
    EXPECT_THROW(parse_formula("D:g(x,y)", po), ParseError);
    EXPECT_THROW(parse_formula("D:f(x)", po), ParseError);
}

TEST(Parser, ConstantsAreTermsUnlessBound) {
    ParseOptions po;
    po.constants = {"c"};
    FormulaPtr f = parse_formula("x=c & exists c. c=x", po);
    std::set<std::string> cs;
    collect_constants(*f, cs);
    EXPECT_EQ(cs, std::set<std::string>{"c"});
    EXPECT_EQ(f->free_vars(), std::vector<std::string>{"x"});
}

// ---- NNF -------------------------------------------------------------------------------

TEST(ToNnf, Examples) {
    EXPECT_EQ(nnf("!(R(x) & x=y)"), "!R(x) | x!=y");
    EXPECT_EQ(nnf("!exists x. R(x)"), "forall x. !R(x)");
    EXPECT_EQ(nnf("!!R(x)"), "R(x)");
}

TEST(ToNnf, NegationOverDependencyIsTypeError) {
    EXPECT_THROW(to_nnf(make_not(make_and(make_relation("R", {var("x")}), make_ne({"x"})))), TypeError);
    EXPECT_THROW(to_nnf(make_not(make_gor(make_eq("x", "x"), make_eq("x", "x")))), TypeError);
}

TEST(ToNnf, PreservesTarskiSatisfactionExhaustively) {
    FormulaGenerator gen(404);
    const auto structures = enumerate_structures(3, {{"E", 2}});
    for (int i = 0; i < 40; ++i) {
        FormulaPtr f = gen.next();
        FormulaPtr neg = make_not(f);
        FormulaPtr pushed = to_nnf(neg);
        ASSERT_TRUE(pushed->is_nnf());
        for (const auto& M : structures)
            for (const auto& a : M.elements())
                for (const auto& b : M.elements()) {
                    const Assignment s{{"x", a}, {"y", b}};
                    ASSERT_EQ(tarski_eval(M, s, *pushed), !tarski_eval(M, s, *f)) << to_string(*f);
                }
    }
}

// ---- printer round trip ----------------------------------------------------------------

TEST(Printer, RoundTripsGeneratedFormulas) {
    GeneratorOptions opts;
    opts.dependency_atoms = true;
    FormulaGenerator gen(77, opts);
    for (int i = 0; i < 500; ++i) {
        FormulaPtr f = gen.next();
        switch (i % 3) {
        case 1: f = make_hook(gen.first_order(2, {"x", "y"}), f); break;
        case 2: f = make_gor(f, gen.next()); break;
        default: break;
        }
        FormulaPtr g = parse_formula(to_string(*f));
        ASSERT_TRUE(same_formula(*f, *g)) << to_string(*f) << "  vs  " << to_string(*g);
    }
}

TEST(Printer, RoundTripsNamedAtomsAndConstants) {
    ParseOptions po;
    po.constants = {"c"};
    for (const char* text : {"D:antisym(x,y) & R(c,x)", "exists z. (z=c ->> D:foo(z))", "forall x. (x!=c | E(x,x))"}) {
        FormulaPtr f = parse_formula(text, po);
        EXPECT_TRUE(same_formula(*f, *parse_formula(to_string(*f), po))) << text;
    }
}

// ---- DED validation --------------------------------------------------------------------

TEST(ValidateDed, FunctionalDependency) {
    DedSentence d = validate_ded(parse_formula_raw("forall x,y,z. ((R(x,y) & R(x,z)) -> y=z)"));
    EXPECT_EQ(d.universal, (std::vector<std::string>{"x", "y", "z"}));
    EXPECT_EQ(d.antecedent.size(), 2u);
    ASSERT_EQ(d.disjuncts.size(), 1u);
    EXPECT_TRUE(d.disjuncts[0].exists.empty());
    EXPECT_EQ(d.arity, 2u);
}

TEST(ValidateDed, NonEmptiness) {
    DedSentence d = validate_ded(parse_formula_raw("forall x. (x=x -> exists y1,y2. R(y1,y2))"));
    ASSERT_EQ(d.disjuncts.size(), 1u);
    EXPECT_EQ(d.disjuncts[0].exists, (std::vector<std::string>{"y1", "y2"}));
}

TEST(ValidateDed, RejectsShapesOutsideTheClass) {
    const char* bad[] = {
        "forall x,y. (R(x,y) -> exists z. !R(z,x))",
        "forall x,y. (R(x,y) -> x!=y)",
        "forall x,y. (R(x,y) -> (R(y,x) -> x=y))",
        "forall x,y. (R(x,y) -> E(x,y))",
        "forall x. (R(x) -> R(y))",
        "forall x. (R(x) -> exists x. R(x))",
        "forall x. (R(x) & ne(x))",
    };
    for (const char* t : bad) EXPECT_THROW(validate_ded(parse_formula_raw(t)), Error) << t;
}

TEST(ValidateDed, ErrorNamesTheOffendingNode) {
    try {
        validate_ded(parse_formula_raw("forall x,y. (R(x,y) -> exists z. !R(z,x))"));
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("!R(z,x)"), std::string::npos);
    }
}

TEST(ValidateDed, RoundTripIsTarskiEquivalent) {
    const char* texts[] = {
        "forall x,y,z. ((R(x,y) & R(x,z)) -> y=z)",
        "forall x. (x=x -> exists y1,y2. R(y1,y2))",
        "forall x,y. (R(x,y) -> ((exists z. R(y,z)) | x=y))",
        "forall x1,y1,x2,y2. ((R(x1,y1) & R(x2,y2)) -> R(x1,y2))",
        "forall x,y. (!R(x,y) | R(y,x))",
    };
    for (const char* t : texts) {
        FormulaPtr raw = parse_formula(t);
        FormulaPtr back = validate_ded(parse_formula_raw(t)).to_formula();
        for (std::size_t n = 1; n <= 2; ++n)
            for (std::uint64_t m = 0; m < (std::uint64_t{1} << (n * n)); ++m) {
                Structure M = Structure(element_names(n)).with_relation("R", relation_from_mask(n, 2, m));
                EXPECT_EQ(tarski_eval(M, *raw), tarski_eval(M, *back)) << t;
            }
    }
}

// ---- U-sentence validation -------------------------------------------------------------

TEST(ValidateUSentence, ConstancyClass) {
    USentence u = validate_usentence(parse_formula_raw("exists x. (x=x & forall y. (R(y) -> y=x))"));
    EXPECT_EQ(u.exists, std::vector<std::string>{"x"});
    ASSERT_EQ(u.eta.size(), 1u);
    EXPECT_EQ(to_string(*u.eta[0]), "x=x");
    EXPECT_EQ(to_string(*u.theta), "y=x");
    // Holds iff |R| ≤ 1.
    for (std::size_t n = 1; n <= 3; ++n)
        for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
            Structure M = Structure(element_names(n)).with_relation("R", relation_from_mask(n, 1, m));
            EXPECT_EQ(tarski_eval(M, *u.to_formula()), std::popcount(m) <= 1);
        }
}

TEST(ValidateUSentence, SingletonClass) {
    USentence u = validate_usentence(parse_formula_raw("exists x. (R(x) & forall y. (R(y) -> y=x))"));
    for (std::size_t n = 1; n <= 3; ++n)
        for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
            Structure M = Structure(element_names(n)).with_relation("R", relation_from_mask(n, 1, m));
            EXPECT_EQ(tarski_eval(M, *u.to_formula()), std::popcount(m) == 1);
        }
}

TEST(ValidateUSentence, RejectsShapesOutsideTheClass) {
    const char* bad[] = {
        "exists x. (!R(x) & forall y. (R(y) -> y=y))",
        "exists x. (x=x & forall y. (R(y) -> R(x)))",
        "exists x. (x=x & forall x. (R(x) -> x=x))",
        "exists x. R(x)",
        "exists x. (x=x & forall y. (R(y) -> E(y,x)))",
    };
    for (const char* t : bad) EXPECT_THROW(validate_usentence(parse_formula_raw(t)), ValidationError) << t;
}

TEST(ValidateUSentence, AcceptsQuantifiedThetaAndHookForm) {
    EXPECT_NO_THROW(validate_usentence(parse_formula_raw("exists x. (R(x) & forall y. (R(y) -> exists z. z!=y))")));
    EXPECT_NO_THROW(validate_usentence(parse_formula_raw("forall y. (R(y) ->> y=y)")));
}

}  // namespace
