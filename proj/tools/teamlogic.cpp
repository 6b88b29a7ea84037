#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "teamlogic/io.hpp"
#include "teamlogic/teamlogic.hpp"

namespace {

using namespace teamlogic;
using nlohmann::json;

enum Exit : int { pass = 0, fail = 1, usage = 2, budget = 3 };

struct Common {
    std::string format = "text";
    std::optional<std::uint64_t> budget;
    std::vector<std::string> dep_files;

    bool as_json() const { return format == "json"; }

    std::uint64_t node_budget() const {
        if (budget) return *budget;
        if (const char* env = std::getenv("TEAMLOGIC_BUDGET")) {
            try {
                std::size_t used = 0;
                const unsigned long long v = std::stoull(env, &used);
                if (used == std::string(env).size()) return v;
            } catch (const std::exception&) {
            }
            throw ValidationError("TEAMLOGIC_BUDGET must be a natural number");
        }
        return EvalOptions{}.budget;
    }

    DependencyRegistry registry() const {
        DependencyRegistry reg;
        for (const auto& f : dep_files) reg.add(io::dependency_from_json(io::load_json_file(f)));
        return reg;
    }
};

EvalStrategy parse_strategy(const std::string& s) {
    if (s == "naive") return EvalStrategy::naive;
    if (s == "memoized") return EvalStrategy::memoized;
    if (s == "optimized") return EvalStrategy::optimized;
    throw ValidationError("unknown strategy '" + s + "'");
}

ParseOptions parse_options(const Structure* M, const DependencyRegistry& reg) {
    ParseOptions po;
    if (M)
        for (const auto& [c, _] : M->constants()) po.constants.insert(c);
    po.dependency_arity = [&reg](const std::string& n) { return reg.arity(n); };
    return po;
}

int verdict(bool value, const Common& c, json report) {
    if (c.as_json()) {
        report["result"] = value;
        std::cout << report.dump(2) << "\n";
    } else {
        std::cout << (value ? "true" : "false") << "\n";
    }
    return value ? Exit::pass : Exit::fail;
}

int cmd_eval(const Common& c, const std::string& sfile, const std::string& tfile, const std::string& text, const std::string& strategy,
             const std::string& symmetry) {
    const DependencyRegistry reg = c.registry();
    const Structure M = io::structure_from_json(io::load_json_file(sfile));
    const Team X = tfile.empty() ? Team::unit() : io::team_from_json(io::load_json_file(tfile), M);
    const FormulaPtr phi = parse_formula(text, parse_options(&M, reg));
    EvalOptions opt{parse_strategy(strategy), c.node_budget(), std::nullopt};
    if (symmetry == "on") opt.symmetry_reduction = true;
    else if (symmetry == "off") opt.symmetry_reduction = false;
    const bool v = team_eval(M, X, *phi, reg, opt);
    return verdict(v, c, {{"command", "eval"}, {"formula", to_string(*phi)}, {"strategy", strategy}});
}

int cmd_tarski(const Common& c, const std::string& sfile, const std::string& afile, const std::vector<std::string>& sets,
               const std::string& text) {
    const Structure M = io::structure_from_json(io::load_json_file(sfile));
    Assignment s = afile.empty() ? Assignment{} : io::assignment_from_json(io::load_json_file(afile), M);
    for (const auto& kv : sets) {
        auto eq = kv.find('=');
        if (eq == std::string::npos) throw ValidationError("--set expects var=element, got '" + kv + "'");
        s[kv.substr(0, eq)] = M.element(kv.substr(eq + 1));
    }
    const FormulaPtr phi = parse_formula(text, parse_options(&M, DependencyRegistry{}));
    return verdict(tarski_eval(M, s, *phi), c, {{"command", "tarski"}, {"formula", to_string(*phi)}});
}

int cmd_equiv(const Common& c, const std::string& a, const std::string& b, std::size_t max_domain, const std::string& strategy,
              std::size_t samples, std::uint64_t seed) {
    const DependencyRegistry reg = c.registry();
    const FormulaPtr phi = parse_formula(a, parse_options(nullptr, reg));
    const FormulaPtr psi = parse_formula(b, parse_options(nullptr, reg));
    EvalOptions opt{parse_strategy(strategy), c.node_budget(), std::nullopt};
    const EquivalenceVerdict v = samples > 0 ? check_semantic_equivalence_sampled(phi, psi, max_domain, samples, seed, reg, opt)
                                             : check_semantic_equivalence(phi, psi, EquivalenceBounds{max_domain}, reg, opt);
    if (c.as_json()) {
        json j{{"command", "equiv"},
               {"equivalent", v.equivalent},
               {"bound", v.bound},
               {"instances", v.instances},
               {"sampled", samples > 0}};
        if (v.counterexample)
            j["counterexample"] = {{"structure", io::structure_to_json(v.counterexample->structure)},
                                   {"team", io::team_to_json(v.counterexample->team, v.counterexample->structure)}};
        std::cout << j.dump(2) << "\n";
    } else if (v.equivalent) {
        std::cout << "equivalent at bound " << v.bound << " (" << v.instances << (samples > 0 ? " sampled" : "") << " instances)\n";
    } else {
        std::cout << "counterexample\nstructure: " << io::structure_to_json(v.counterexample->structure).dump()
                  << "\nteam: " << io::team_to_json(v.counterexample->team, v.counterexample->structure).dump() << "\n";
    }
    return v.equivalent ? Exit::pass : Exit::fail;
}

int cmd_translate(const Common& c, const std::vector<std::string>& texts) {
    std::vector<USentence> us;
    for (const auto& t : texts) us.push_back(validate_usentence(parse_formula_raw(t)));
    const FormulaPtr out = us.size() == 1 ? usentence_translate(us[0]) : disjunction_translate(us);
    if (c.as_json()) std::cout << json{{"command", "translate"}, {"formula", to_string(*out)}}.dump(2) << "\n";
    else std::cout << to_string(*out) << "\n";
    return Exit::pass;
}

int cmd_validate(const Common& c, const std::string& cls, const std::string& text) {
    const FormulaPtr raw = parse_formula_raw(text);
    json j{{"command", "validate"}, {"class", cls}, {"valid", true}};
    if (cls == "ded") {
        const DedSentence d = validate_ded(raw);
        j["normalized"] = to_string(*d.to_formula());
        j["disjuncts"] = d.disjuncts.size();
    } else if (cls == "usentence") {
        const USentence u = validate_usentence(raw);
        j["normalized"] = to_string(*u.to_formula());
        j["arity"] = u.arity();
    } else {
        throw ValidationError("unknown class '" + cls + "' (expected ded or usentence)");
    }
    if (c.as_json()) std::cout << j.dump(2) << "\n";
    else std::cout << "valid " << cls << ": " << j["normalized"].get<std::string>() << "\n";
    return Exit::pass;
}

int cmd_classify(const Common& c, const std::string& dfile, std::size_t max_domain, const std::vector<std::string>& require) {
    const Dependency D = io::dependency_from_json(io::load_json_file(dfile));
    const ClosureReport rep = check_closure_properties(D, D.arity(), max_domain);
    const CheckResult indep = check_domain_independence(D, D.arity(), max_domain);
    const std::vector<const CheckResult*> all{&rep.downwards, &rep.upwards, &rep.union_closed, &rep.isomorphism_closed, &indep};
    json props = json::array();
    for (const auto* r : all) props.push_back(io::check_result_to_json(*r));
    bool ok = true;
    for (const auto& want : require) {
        bool known = false;
        for (const auto* r : all)
            if (r->property == want) {
                known = true;
                ok = ok && r->pass;
            }
        if (!known) throw ValidationError("unknown property '" + want + "'");
    }
    if (c.as_json()) {
        std::cout << json{{"command", "classify"}, {"dependency", D.name()}, {"bound", max_domain}, {"properties", props}}.dump(2)
                  << "\n";
    } else {
        std::cout << "dependency " << D.name() << " (arity " << D.arity() << "), bound " << max_domain << "\n";
        for (const auto* r : all) {
            std::cout << "  " << r->property << ": " << (r->pass ? "pass" : "fail");
            if (!r->pass) std::cout << "  counterexample " << io::check_result_to_json(*r)["counterexample"].dump();
            std::cout << "\n";
        }
    }
    return ok ? Exit::pass : Exit::fail;
}

int cmd_parity(const Common& c, std::size_t ell, const std::string& mode, const std::string& symmetry) {
    const ParityInstance P = build_parity_instance(ell);
    EvalOptions opt{parse_strategy(mode), c.node_budget(), std::nullopt};
    if (symmetry == "on") opt.symmetry_reduction = true;
    else if (symmetry == "off") opt.symmetry_reduction = false;
    const bool v = team_eval(P.structure, Team::unit(), *P.sentence, P.registry, opt);
    return verdict(v, c, {{"command", "parity"}, {"ell", ell}, {"mode", mode}});
}

int cmd_chain(const Common& c, const std::string& cfile, std::size_t d, const std::string& dfile) {
    const Dependency D = io::dependency_from_json(io::load_json_file(dfile));
    std::vector<std::string> domain;
    const auto links = io::chain_from_json(io::load_json_file(cfile), D.arity(), domain);
    const ChainInstance inst = build_chain_instance(d, D, domain, links);
    EvalOptions opt;
    opt.budget = c.node_budget();
    const bool v = team_eval(inst.structure, Team::unit(), *inst.sentence, inst.registry, opt);
    return verdict(v, c, {{"command", "chain"}, {"d", d}, {"dependency", D.name()}, {"sentence", to_string(*inst.sentence)}});
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Team semantics model checker for first-order logic with generalized dependencies"};
    app.require_subcommand(1);
    Common common;
    app.add_option("--format", common.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    app.add_option("--budget", common.budget, "Node budget (overrides TEAMLOGIC_BUDGET)");

    std::string sfile, tfile, afile, text, text2, strategy = "optimized", symmetry = "auto", cls, dfile, cfile, mode = "optimized";
    std::vector<std::string> sets, texts, require;
    std::size_t max_domain = 3, ell = 2, d = 1, samples = 0;
    std::uint64_t seed = 0;

    auto* eval = app.add_subcommand("eval", "Team-evaluate a formula");
    eval->add_option("-s,--structure", sfile, "Structure JSON file")->required();
    eval->add_option("-t,--team", tfile, "Team JSON file (default: the team with the empty assignment)");
    eval->add_option("-f,--formula", text, "Formula text")->required();
    eval->add_option("--strategy", strategy)->check(CLI::IsMember({"naive", "memoized", "optimized"}));
    eval->add_option("--symmetry", symmetry)->check(CLI::IsMember({"auto", "on", "off"}));
    eval->add_option("--dep", common.dep_files, "Dependency JSON file (repeatable)");

    auto* tarski = app.add_subcommand("tarski", "Evaluate a first-order formula under one assignment");
    tarski->add_option("-s,--structure", sfile)->required();
    tarski->add_option("-a,--assignment", afile, "Assignment JSON file");
    tarski->add_option("--set", sets, "var=element (repeatable)");
    tarski->add_option("-f,--formula", text)->required();

    auto* equiv = app.add_subcommand("equiv", "Exhaustively compare two formulas on small instances");
    equiv->add_option("-f,--formula", text)->required();
    equiv->add_option("-g,--other", text2)->required();
    equiv->add_option("--max-domain", max_domain)->check(CLI::Range(1, 8));
    equiv->add_option("--strategy", strategy)->check(CLI::IsMember({"naive", "memoized", "optimized"}));
    equiv->add_option("--dep", common.dep_files, "Dependency JSON file (repeatable)");
    equiv->add_option("--samples", samples, "Compare on this many random instances instead of all of them");
    equiv->add_option("--seed", seed, "Seed for --samples");

    auto* translate = app.add_subcommand("translate", "Compile U-sentences into team formulas");
    translate->add_option("-f,--formula", texts, "U-sentence (repeat for a global disjunction)")->required();

    auto* validate = app.add_subcommand("validate", "Check a sentence against a syntactic class");
    validate->add_option("class", cls, "ded or usentence")->required()->check(CLI::IsMember({"ded", "usentence"}));
    validate->add_option("-f,--formula", text)->required();

    auto* classify = app.add_subcommand("classify", "Bounded closure report for a dependency");
    classify->add_option("--dep", dfile, "Dependency JSON file")->required();
    classify->add_option("--max-domain", max_domain)->check(CLI::Range(1, 6));
    classify->add_option("--require", require, "Property whose failure makes the exit code 1 (repeatable)");

    auto* parity = app.add_subcommand("parity", "Evaluate the parity construction on M_ell");
    parity->add_option("--ell", ell)->required()->check(CLI::Range(2, 64));
    parity->add_option("--mode", mode)->check(CLI::IsMember({"naive", "memoized", "optimized"}));
    parity->add_option("--symmetry", symmetry)->check(CLI::IsMember({"auto", "on", "off"}));

    auto* chain = app.add_subcommand("chain", "Evaluate the union-of-chain sentence");
    chain->add_option("--chain", cfile, "Chain JSON file")->required();
    chain->add_option("-d", d, "Index bound d")->required();
    chain->add_option("--dep", dfile, "Dependency JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Exit::usage;
    }

    try {
        if (*eval) return cmd_eval(common, sfile, tfile, text, strategy, symmetry);
        if (*tarski) return cmd_tarski(common, sfile, afile, sets, text);
        if (*equiv) return cmd_equiv(common, text, text2, max_domain, strategy, samples, seed);
        if (*translate) return cmd_translate(common, texts);
        if (*validate) return cmd_validate(common, cls, text);
        if (*classify) return cmd_classify(common, dfile, max_domain, require);
        if (*parity) return cmd_parity(common, ell, mode, symmetry);
        if (*chain) return cmd_chain(common, cfile, d, dfile);
    } catch (const BudgetExceeded& e) {
        std::cerr << "error: budget exceeded: " << e.what() << "\n";
        return Exit::budget;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return Exit::usage;
    }
    return Exit::usage;
}
