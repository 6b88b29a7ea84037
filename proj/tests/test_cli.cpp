#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct Outcome {
    int code = -1;
    std::string out, err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string data(const std::string& name) { return std::string(TEAMLOGIC_TEST_DATA) + "/" + name; }

// Runs the command-line tool with the given arguments (shell-quoted by the
// caller) and an optional environment prefix.
Outcome run(const std::string& args, const std::string& env = "") {
    const std::string err_file = testing::TempDir() + "teamlogic_cli_stderr.txt";
    const std::string cmd = env + " '" + std::string(TEAMLOGIC_CLI) + "' " + args + " 2>'" + err_file + "'";
    Outcome r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    std::size_t got;
    while ((got = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, got);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err_file);
    return r;
}

TEST(Cli, EvalFunctionalTeam) {
    const std::string s = data("structure_ab.json");
    Outcome r = run("eval -s '" + s + "' -t '" + data("team_functional.json") + "' -f 'dep(x;y)'");
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "true\n");
    r = run("eval -s '" + s + "' -t '" + data("team_not_functional.json") + "' -f 'dep(x;y)'");
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(r.out, "false\n");
    r = run("eval --strategy naive -s '" + s + "' -f 'exists x. exists y. E(x,y)'");
    EXPECT_EQ(r.code, 0);
}

TEST(Cli, EvalWithRegisteredDependency) {
    const std::string args = "eval -s '" + data("structure_ab.json") + "' -t '" + data("team_functional.json") + "' --dep '" +
                             data("dep_antisym.json") + "' -f 'D:antisym(x,y)'";
    EXPECT_EQ(run(args).code, 0);
}

TEST(Cli, Tarski) {
    const std::string s = data("structure_ab.json");
    EXPECT_EQ(run("tarski -s '" + s + "' -a '" + data("assignment_ab.json") + "' -f 'E(x,y)'").code, 0);
    EXPECT_EQ(run("tarski -s '" + s + "' --set x=b --set y=a -f 'E(x,y)'").code, 1);
}

TEST(Cli, TranslateMatchesTheLibrary) {
    const Outcome r = run("translate -f 'exists x. (R(x) & forall y. (R(y) -> y=x))'");
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "exists x. (const(x) & (x=x | (ne(x) & x=y)) & y=x)\n");
}

TEST(Cli, Parity) {
    Outcome r = run("parity --ell 3 --mode optimized");
    EXPECT_EQ(r.code, 1);
    EXPECT_EQ(r.out, "false\n");
    r = run("parity --ell 2");
    EXPECT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "true\n");
}

TEST(Cli, Equiv) {
    EXPECT_EQ(run("equiv -f 'ne(x)' -g 'const(x)' --max-domain 2").code, 1);
    EXPECT_EQ(run("equiv -f 'E(x,y) ->> dep(x;y)' -g '(!E(x,y)) | (E(x,y) & dep(x;y))' --max-domain 2").code, 0);
}

TEST(Cli, Validate) {
    EXPECT_EQ(run("validate ded -f 'forall x,y,z. ((R(x,y) & R(x,z)) -> y=z)'").code, 0);
    EXPECT_EQ(run("validate usentence -f 'exists x. (R(x) & forall y. (R(y) -> y=x))'").code, 0);
    const Outcome bad = run("validate ded -f 'forall x,y. (R(x,y) -> x!=y)'");
    EXPECT_EQ(bad.code, 2);
    EXPECT_EQ(bad.err.rfind("error:", 0), 0u) << bad.err;
}

TEST(Cli, Classify) {
    EXPECT_EQ(run("classify --dep '" + data("dep_ne.json") + "' --max-domain 2").code, 0);
    EXPECT_EQ(run("classify --dep '" + data("dep_ne.json") + "' --max-domain 2 --require upwards").code, 0);
    EXPECT_EQ(run("classify --dep '" + data("dep_ne.json") + "' --max-domain 2 --require downwards").code, 1);
    EXPECT_EQ(run("classify --dep '" + data("dep_ne.json") + "' --require nonsense").code, 2);
}

TEST(Cli, Chain) {
    const std::string dep = data("dep_ne.json");
    EXPECT_EQ(run("chain --chain '" + data("chain_ne.json") + "' -d 3 --dep '" + dep + "'").code, 0);
    EXPECT_EQ(run("chain --chain '" + data("chain_empty.json") + "' -d 3 --dep '" + dep + "'").code, 1);
    EXPECT_EQ(run("chain --chain '" + data("chain_ne.json") + "' -d 4 --dep '" + dep + "'").code, 2);
}

TEST(Cli, UsageErrors) {
    for (const char* args : {"", "frobnicate", "eval -f 'x=x'", "parity --ell 1", "eval -s /nonexistent.json -f 'x=x'"}) {
        const Outcome r = run(args);
        EXPECT_EQ(r.code, 2) << args;
        EXPECT_EQ(r.err.rfind("error:", 0), 0u) << args << ": " << r.err;
    }
    const Outcome parse = run("eval -s '" + data("structure_ab.json") + "' -f 'E(x'");
    EXPECT_EQ(parse.code, 2);
}

TEST(Cli, BudgetExceeded) {
    Outcome r = run("--budget 10 parity --ell 4");
    EXPECT_EQ(r.code, 3);
    EXPECT_EQ(r.err.rfind("error: budget exceeded", 0), 0u) << r.err;
    r = run("parity --ell 4", "TEAMLOGIC_BUDGET=10");
    EXPECT_EQ(r.code, 3);
    EXPECT_EQ(run("parity --ell 2", "TEAMLOGIC_BUDGET=ten").code, 2);
}

// JSON reports are compared byte for byte with the checked-in golden files.
TEST(Cli, JsonGoldenFiles) {
    const std::string golden = TEAMLOGIC_GOLDEN_DIR;
    EXPECT_EQ(run("--format json parity --ell 3").out, slurp(golden + "/parity_3.json"));
    EXPECT_EQ(run("--format json translate -f 'exists x. (R(x) & forall y. (R(y) -> y=x))'").out, slurp(golden + "/translate_singleton.json"));
    EXPECT_EQ(run("--format json classify --dep '" + data("dep_ne.json") + "' --max-domain 2").out, slurp(golden + "/classify_ne.json"));
    EXPECT_EQ(run("--format json equiv -f 'ne(x)' -g 'const(x)' --max-domain 2").out, slurp(golden + "/equiv_ne_const.json"));
}

TEST(Cli, JsonIsStableAcrossRuns) {
    const std::string args = "--format json classify --dep '" + data("dep_antisym.json") + "' --max-domain 2";
    EXPECT_EQ(run(args).out, run(args).out);
}

}  // namespace
