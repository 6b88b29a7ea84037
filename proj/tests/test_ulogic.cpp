#include <gtest/gtest.h>

#include "helpers.hpp"

using namespace teamlogic;
using namespace testing_helpers;

namespace {

const char* const kNonempty = "exists x. (R(x) & forall y. (R(y) -> y=y))";
const char* const kConstancy = "exists x. forall y. (R(y) -> y=x)";
const char* const kSingleton = "exists x. (R(x) & forall y. (R(y) -> y=x))";
const char* const kEmpty = "exists x. forall y. (R(y) -> y!=y)";
const char* const kTrivial = "exists x. (x=x & forall y. (R(y) -> y=y))";

USentence u(const char* text) { return usentence_from_text(text); }

// Tarski truth of two sentences over R agrees on every (M, R) with |M| ≤ 3.
void expect_tarski_equivalent(const FormulaPtr& a, const FormulaPtr& b, std::size_t arity) {
    for (std::size_t n = 1; n <= 3; ++n)
        for (std::uint64_t m = 0; m < (std::uint64_t{1} << power(n, arity)); ++m) {
            Structure M = Structure(element_names(n)).with_relation("R", relation_from_mask(n, arity, m));
            ASSERT_EQ(tarski_eval(M, *a), tarski_eval(M, *b)) << to_string(*a) << " vs " << to_string(*b) << " n=" << n
                                                              << " mask=" << m;
        }
}

// Team truth of the compiled formula on X agrees with φ on (M, X(ȳ)).
void expect_translation_contract(const USentence& s, std::size_t max_domain, bool include_empty_team = true) {
    const FormulaPtr compiled = usentence_translate(s);
    const FormulaPtr plain = s.to_formula();
    for (std::size_t n = 1; n <= max_domain; ++n) {
        Structure M(element_names(n));
        const Team U = full_team(M, s.universal);
        const auto got = TeamEvaluator(M, DependencyRegistry{}).evaluate_subteams(U, *compiled);
        for (std::uint64_t m = include_empty_team ? 0 : 1; m < got.size(); ++m) {
            const TupleSet rel = team_projection(U.select_mask(m), s.universal);
            ASSERT_EQ(got[m], tarski_eval(M.with_relation(s.relation, rel), *plain)) << to_string(*compiled) << " mask " << m;
        }
    }
}

// ---- conjunction -----------------------------------------------------------------------

TEST(Conjoin, NonemptyAndConstancyGiveTheSingletonClass) {
    const USentence c = usentence_conjoin(u(kNonempty), u(kConstancy));
    EXPECT_NO_THROW(validate_usentence(c.to_formula()));
    expect_tarski_equivalent(c.to_formula(), u(kSingleton).to_formula(), 1);
    expect_tarski_equivalent(c.to_formula(), make_and(u(kNonempty).to_formula(), u(kConstancy).to_formula()), 1);
}

TEST(Conjoin, TrivialSentenceIsNeutral) {
    for (const char* t : {kNonempty, kConstancy, kSingleton, kEmpty})
        expect_tarski_equivalent(usentence_conjoin(u(t), u(kTrivial)).to_formula(), u(t).to_formula(), 1);
}

TEST(Conjoin, RenamesApart) {
    const USentence c = usentence_conjoin(u(kSingleton), u(kSingleton));
    EXPECT_EQ(c.exists.size(), 2u);
    EXPECT_NE(c.exists[0], c.exists[1]);
    EXPECT_EQ(c.universal, std::vector<std::string>{"y"});
}

TEST(Conjoin, ArityMismatchIsAnError) {
    const USentence binary = u("exists x. (x=x & forall y1,y2. (R(y1,y2) -> y1=y2))");
    EXPECT_THROW(usentence_conjoin(u(kNonempty), binary), DomainError);
}

TEST(Conjoin, ClosedOverTheCatalogue) {
    for (std::size_t arity : {1u, 2u}) {
        const auto cat = usentence_catalogue(arity);
        for (std::size_t i = 0; i < cat.size(); i += 3)
            for (std::size_t j = 1; j < cat.size(); j += 4) {
                const USentence c = usentence_conjoin(cat[i].sentence, cat[j].sentence);
                expect_tarski_equivalent(c.to_formula(), make_and(cat[i].sentence.to_formula(), cat[j].sentence.to_formula()),
                                         arity);
            }
    }
}

// ---- translation -----------------------------------------------------------------------

TEST(Translate, SingletonClassExample) {
    const FormulaPtr f = usentence_translate(u(kSingleton));
    EXPECT_EQ(to_string(*f), "exists x. (const(x) & (x=x | (ne(x) & x=y)) & y=x)");
    Structure M({"a", "b", "c"});
    EXPECT_TRUE(team_eval(M, team(M, {"y"}, {{"a"}}), *f));
    EXPECT_FALSE(team_eval(M, team(M, {"y"}, {{"a"}, {"b"}}), *f));
    EXPECT_FALSE(team_eval(M, Team::empty_over({"y"}), *f));
}

TEST(Translate, ConstancyClassIsConstancyAtom) {
    const FormulaPtr f = usentence_translate(u(kConstancy));
    EXPECT_EQ(to_string(*f), "exists x. (const(x) & y=x)");
    EXPECT_TRUE(check_semantic_equivalence(f, parse_formula("const(y)")).equivalent);
}

TEST(Translate, ContractOverTheCatalogue) {
    for (const auto& e : usentence_catalogue(1)) expect_translation_contract(e.sentence, 3);
    for (const auto& e : usentence_catalogue(2)) expect_translation_contract(e.sentence, 2);
}

TEST(Translate, EmptyTeamGapWithoutRelationInEta) {
    // η = x1≠x2 does not mention R: the compiled formula is true on the empty
    // team on every M, while (M, ∅) ⊭ φ whenever |M| = 1.
    const USentence s = u("exists x1,x2. (x1!=x2 & forall y. (R(y) -> y=y))");
    Structure M({"a"});
    EXPECT_TRUE(team_eval(M, Team::empty_over({"y"}), *usentence_translate(s)));
    EXPECT_FALSE(tarski_eval(M.with_relation("R", TupleSet(1)), *s.to_formula()));
    expect_translation_contract(s, 3, false);
}

TEST(Translate, ConstantsAreRejected) {
    ParseOptions po;
    po.constants = {"c"};
    const USentence s = validate_usentence(parse_formula_raw("exists x. (R(x) & forall y. (R(y) -> y=c))", po));
    EXPECT_THROW(usentence_translate(s), ValidationError);
}

// ---- global disjunction ----------------------------------------------------------------

TEST(DisjunctionTranslate, EmptyOrNonemptyIsValid) {
    const FormulaPtr f = disjunction_translate({u(kEmpty), u(kNonempty)});
    EXPECT_TRUE(check_semantic_equivalence(f, parse_formula("y=y")).equivalent);
}

TEST(DisjunctionTranslate, SingleSentenceIsThePlainTranslation) {
    EXPECT_TRUE(same_formula(*disjunction_translate({u(kSingleton)}), *usentence_translate(u(kSingleton))));
}

TEST(DisjunctionTranslate, ConstancyOrSingleton) {
    const FormulaPtr f = disjunction_translate({u(kConstancy), u(kSingleton)});
    EXPECT_TRUE(check_semantic_equivalence(f, parse_formula("const(y) <|> (const(y) & ne(y))")).equivalent);
}

TEST(DisjunctionTranslate, ContractForPairsOfCatalogueSentences) {
    const auto cat = usentence_catalogue(1);
    for (std::size_t i = 0; i < cat.size(); ++i)
        for (std::size_t j = i + 1; j < cat.size(); j += 2) {
            const FormulaPtr f = disjunction_translate({cat[i].sentence, cat[j].sentence});
            const FormulaPtr either = make_or(cat[i].sentence.to_formula(), cat[j].sentence.to_formula());
            for (std::size_t n = 1; n <= 3; ++n) {
                Structure M(element_names(n));
                const Team U = full_team(M, {"y"});
                const auto got = TeamEvaluator(M, DependencyRegistry{}).evaluate_subteams(U, *f);
                for (std::uint64_t m = 0; m < got.size(); ++m) {
                    Structure host = M.with_relation("R", team_projection(U.select_mask(m), {"y"}));
                    ASSERT_EQ(got[m], tarski_eval(host, *either)) << cat[i].name << " | " << cat[j].name;
                }
            }
        }
}

TEST(DisjunctionTranslate, Errors) {
    EXPECT_THROW(disjunction_translate({}), DomainError);
    EXPECT_THROW(disjunction_translate({u(kEmpty), u("exists x. forall y1,y2. (R(y1,y2) -> y1=x)")}), DomainError);
}

// ---- U-embeddings ----------------------------------------------------------------------

TEST(UEmbedding, IntoItself) {
    Structure A = with_R({"a", "b"}, 2, {{"a", "b"}, {"b", "b"}});
    EXPECT_TRUE(u_embedding_check(A, A).pass);
}

TEST(UEmbedding, FreshElementNeedsAnAvoidingTuple) {
    Structure A = with_R({"a", "b"}, 1, {{"a"}});
    Structure B = with_R({"a", "b", "c"}, 1, {{"a"}, {"c"}});
    const UEmbeddingVerdict v = u_embedding_check(A, B);
    EXPECT_FALSE(v.pass);
    EXPECT_EQ(v.witness, std::vector<std::string>{"c"});
}

TEST(UEmbedding, RelationThatIsNotInducedFails) {
    Structure A = with_R({"a", "b"}, 2, {{"a", "b"}});
    Structure B = with_R({"a", "b"}, 2, {{"a", "b"}, {"b", "a"}});
    const UEmbeddingVerdict v = u_embedding_check(A, B);
    EXPECT_FALSE(v.pass);
    EXPECT_EQ(v.reason.rfind("not a substructure", 0), 0u);
    EXPECT_EQ(v.witness, (std::vector<std::string>{"b", "a"}));
}

TEST(UEmbedding, DomainOutsideIsPreconditionError) {
    EXPECT_THROW(u_embedding_check(with_R({"z"}, 1, {}), with_R({"a"}, 1, {})), PreconditionError);
}

TEST(UEmbedding, PassImpliesTransferOfTheCatalogue) {
    // Where a U-embedding holds, every catalogue sentence true in A is true in B.
    const auto cat = usentence_catalogue(1);
    std::vector<USentence> sentences;
    for (const auto& e : cat) sentences.push_back(e.sentence);
    for (std::size_t nb = 1; nb <= 3; ++nb)
        for (std::uint64_t sm = 0; sm < (std::uint64_t{1} << nb); ++sm) {
            Structure B = Structure(element_names(nb)).with_relation("R", relation_from_mask(nb, 1, sm));
            for (std::size_t na = 1; na <= nb; ++na) {
                Structure A = Structure(element_names(na));
                std::vector<Tuple> r;
                for (std::size_t i = 0; i < B.relation("R").tuples().size(); ++i)
                    if (B.relation("R").tuples()[i][0].index < na) r.push_back({B.relation("R").tuples()[i][0]});
                A = A.with_relation("R", TupleSet(1, r));
                if (u_embedding_check(A, B, "R", UEmbeddingMode::first_order).pass) {
                    EXPECT_TRUE(u_transfer_check(A, B, sentences).pass) << "nb=" << nb << " na=" << na << " mask=" << sm;
                }
            }
        }
}

}  // namespace
