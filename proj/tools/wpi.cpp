// wpi: workbench driver for .wpi process models.
//
//   wpi check FILE                 parse + well-formedness + arity lint
//   wpi nf FILE [--trace]          canonical normal form
//   wpi step FILE                  interactive redex stepping
//   wpi run FILE [--strategy ...]  single random/first-redex run
//   wpi explore FILE [...]         exhaustive state-space exploration
//   wpi eq FILE_A FILE_B           structural-congruence test
//
// Exit codes: 0 pass, 1 property failure / not congruent / violations,
// 2 input error, 3 inconclusive (exploration truncated).

#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <webpi/congruence.hpp>
#include <webpi/explore.hpp>
#include <webpi/parse.hpp>
#include <webpi/print.hpp>
#include <webpi/reduction.hpp>
#include <webpi/term.hpp>

namespace {

using namespace webpi;

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitInput = 2;
constexpr int kExitInconclusive = 3;

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// returns nullptr after printing a diagnostic; sets *exit_code
ProcessPtr load(const std::string& path, int* exit_code) {
    auto text = read_file(path);
    if (!text) {
        std::cerr << "error: cannot read " << path << "\n";
        *exit_code = kExitInput;
        return nullptr;
    }
    ParseResult res = parse(*text);
    if (auto* err = std::get_if<ParseError>(&res)) {
        std::cerr << path << ":" << err->span.line << ":" << err->span.column << ": error: "
                  << err->message;
        if (!err->expected.empty()) {
            std::cerr << " (expected";
            for (auto& e : err->expected) std::cerr << " " << e;
            std::cerr << ")";
        }
        std::cerr << "\n";
        *exit_code = kExitInput;
        return nullptr;
    }
    return std::get<ProcessPtr>(res);
}

int cmd_check(const std::string& path) {
    int ec = kExitOk;
    ProcessPtr p = load(path, &ec);
    if (!p) return ec;
    auto violations = well_formed(p);
    for (auto& v : violations) std::cout << "violation: " << v.message << "\n";
    for (auto& w : arity_lint(p)) std::cout << "warning: " << w << "\n";
    if (!violations.empty()) return kExitFail;
    std::cout << "ok\n";
    return kExitOk;
}

int cmd_nf(const std::string& path, bool trace) {
    int ec = kExitOk;
    ProcessPtr p = load(path, &ec);
    if (!p) return ec;
    if (!well_formed(p).empty()) {
        std::cerr << "error: input is not well-formed (run 'wpi check')\n";
        return kExitInput;
    }
    std::vector<TraceStep> steps;
    NormalForm nf = normalize(p, trace ? &steps : nullptr);
    if (trace)
        for (auto& s : steps) std::cout << s.axiom << ": " << s.detail << "\n";
    std::cout << print(nf.term) << "\n";
    return kExitOk;
}

int cmd_step(const std::string& path) {
    int ec = kExitOk;
    ProcessPtr p = load(path, &ec);
    if (!p) return ec;
    NormalForm nf = normalize(p);
    while (true) {
        std::cout << "state: " << print(nf.term) << "\n";
        auto rs = redexes(nf);
        if (rs.empty()) {
            std::cout << "terminal (" << terminal_name(classify_terminal(nf)) << ")\n";
            return kExitOk;
        }
        for (std::size_t i = 0; i < rs.size(); ++i)
            std::cout << "  [" << i << "] " << rule_name(rs[i].rule) << " on "
                      << rs[i].subject.text << "\n";
        std::cout << "redex (or q)> " << std::flush;
        std::string line;
        if (!std::getline(std::cin, line) || line == "q") return kExitOk;
        std::size_t idx = 0;
        try {
            idx = std::stoul(line);
        } catch (...) {
            std::cout << "not a redex index\n";
            continue;
        }
        if (idx >= rs.size()) {
            std::cout << "index out of range\n";
            continue;
        }
        nf = apply(nf, rs[idx]);
    }
}

int cmd_run(const std::string& path, const std::string& strategy, std::uint64_t seed,
            std::uint64_t max_steps, bool json_out) {
    int ec = kExitOk;
    ProcessPtr p = load(path, &ec);
    if (!p) return ec;
    std::mt19937_64 rng(seed);
    NormalForm nf = normalize(p);
    std::map<std::string, std::uint64_t> histogram{{"COM", 0}, {"REP", 0}, {"FAIL", 0}};
    std::uint64_t steps = 0;
    std::string classification;
    while (true) {
        auto rs = redexes(nf);
        if (rs.empty()) {
            classification = terminal_name(classify_terminal(nf));
            break;
        }
        if (steps >= max_steps) {
            classification = "budget-exhausted";
            break;
        }
        std::size_t pick = 0;
        if (strategy == "random")
            pick = std::uniform_int_distribution<std::size_t>(0, rs.size() - 1)(rng);
        histogram[rule_name(rs[pick].rule)]++;
        nf = apply(nf, rs[pick]);
        ++steps;
    }
    if (json_out) {
        nlohmann::json j{{"steps", steps},
                         {"histogram", histogram},
                         {"classification", classification},
                         {"seed", seed},
                         {"final", print(nf.term)}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "steps: " << steps << "\n";
        for (auto& [rule, n] : histogram) std::cout << "  " << rule << ": " << n << "\n";
        std::cout << "final: " << print(nf.term) << "\n";
        std::cout << "classification: " << classification << "\n";
        std::cout << "seed: " << seed << "\n";
    }
    return kExitOk;
}

void print_counterexample(const StateGraph& g, const CheckResult& res) {
    std::cout << "counterexample (length " << res.path.size() << "):\n";
    std::cout << "  " << print(g.states.at(g.initial)) << "\n";
    for (auto& e : res.path)
        std::cout << "  --" << rule_name(e.rule) << " " << e.subject << "--> "
                  << print(g.states.at(e.to)) << "\n";
}

int cmd_explore(const std::string& path, const ExploreLimits& limits,
                const std::string& dot_path, const std::string& json_path,
                const std::vector<std::string>& require_opts) {
    int ec = kExitOk;
    ProcessPtr p = load(path, &ec);
    if (!p) return ec;
    StateGraph g = explore(p, limits);
    std::cout << "states: " << g.states.size() << ", edges: " << g.edges.size();
    if (g.frontier_truncated) {
        std::cout << " (truncated:";
        for (auto& l : g.limits_hit) std::cout << " " << l;
        std::cout << ")";
    }
    std::cout << "\n";
    if (!dot_path.empty()) std::ofstream(dot_path) << to_dot(g);
    if (!json_path.empty()) std::ofstream(json_path) << to_json(g);

    int rc = kExitOk;
    for (auto& req : require_opts) {
        CheckResult res;
        if (req == "committed") {
            res = check_always_terminal(g, [](const NormalForm& nf) { return is_nil(nf.term); });
        } else if (req == "no-stuck") {
            res = check_always_terminal(
                g, [](const NormalForm& nf) { return classify_terminal(nf) != Terminal::Stuck; });
        } else if (req.rfind("observed:", 0) == 0) {
            res = check_observed(g, req.substr(9));
        } else {
            std::cerr << "error: unknown requirement '" << req << "'\n";
            return kExitInput;
        }
        switch (res.verdict) {
            case CheckResult::Verdict::Holds:
                std::cout << req << ": holds\n";
                break;
            case CheckResult::Verdict::Counterexample:
                std::cout << req << ": fails\n";
                print_counterexample(g, res);
                rc = std::max(rc, kExitFail);
                break;
            case CheckResult::Verdict::Inconclusive:
                std::cout << req << ": inconclusive (exploration truncated)\n";
                rc = std::max(rc, kExitInconclusive);
                break;
        }
    }
    return rc;
}

int cmd_eq(const std::string& path_a, const std::string& path_b) {
    int ec = kExitOk;
    ProcessPtr a = load(path_a, &ec);
    if (!a) return ec;
    ProcessPtr b = load(path_b, &ec);
    if (!b) return ec;
    if (congruent(a, b)) {
        std::cout << "congruent\n";
        return kExitOk;
    }
    std::cout << "not congruent\n";
    return kExitFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"workbench for web-service composition models with workunits"};
    app.require_subcommand(1);

    std::string file, file_b, strategy = "random", dot_path, json_path;
    std::uint64_t seed = 0, max_steps = 10000;
    bool trace = false, json_out = false;
    ExploreLimits limits;
    std::vector<std::string> require_opts;

    auto* check = app.add_subcommand("check", "parse and validate a model");
    check->add_option("file", file)->required();

    auto* nf = app.add_subcommand("nf", "print the canonical normal form");
    nf->add_option("file", file)->required();
    nf->add_flag("--trace", trace, "print one rewrite axiom per line");

    auto* step = app.add_subcommand("step", "step through reductions interactively");
    step->add_option("file", file)->required();

    auto* run = app.add_subcommand("run", "run one reduction sequence");
    run->add_option("file", file)->required();
    run->add_option("--strategy", strategy)->check(CLI::IsMember({"random", "first"}));
    run->add_option("--seed", seed);
    run->add_option("--max-steps", max_steps);
    run->add_flag("--json", json_out);

    auto* explore_cmd = app.add_subcommand("explore", "explore the full state space");
    explore_cmd->add_option("file", file)->required();
    explore_cmd->add_option("--max-states", limits.max_states);
    explore_cmd->add_option("--max-depth", limits.max_depth);
    explore_cmd->add_option("--max-seconds", limits.max_seconds);
    explore_cmd->add_option("--dot", dot_path);
    explore_cmd->add_option("--json", json_path);
    explore_cmd->add_option("--require", require_opts,
                            "committed | no-stuck | observed:NAME (repeatable)");

    auto* eq = app.add_subcommand("eq", "test two models for congruence");
    eq->add_option("fileA", file)->required();
    eq->add_option("fileB", file_b)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? kExitInput : kExitOk;
    }

    try {
        if (*check) return cmd_check(file);
        if (*nf) return cmd_nf(file, trace);
        if (*step) return cmd_step(file);
        if (*run) return cmd_run(file, strategy, seed, max_steps, json_out);
        if (*explore_cmd) return cmd_explore(file, limits, dot_path, json_path, require_opts);
        if (*eq) return cmd_eq(file, file_b);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
