#pragma once

// Bounded exhaustive exploration of the reduction relation: breadth-first
// state graph keyed by canonical form, terminal classification, property
// checks with shortest counterexample paths, DOT and JSON export.

#include <chrono>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "print.hpp"
#include "reduction.hpp"

namespace webpi {

struct ExploreLimits {
    std::size_t max_states = 100000;
    std::size_t max_depth = 1000;
    double max_seconds = 0; // 0 = unlimited
};

struct EdgeInfo {
    std::string from;
    Rule rule;
    std::string subject; // channel or unit name of the fired redex
    std::string to;
};

struct StateGraph {
    std::map<std::string, ProcessPtr> states; // canonical key -> NF term
    std::vector<EdgeInfo> edges;
    std::string initial;
    bool frontier_truncated = false;
    std::vector<std::string> limits_hit;
};

inline StateGraph explore(const ProcessPtr& p, const ExploreLimits& limits = {}) {
    auto start = std::chrono::steady_clock::now();
    StateGraph g;
    NormalForm root = normalize(p);
    g.initial = root.canonical_key;
    g.states.emplace(root.canonical_key, root.term);

    struct Item {
        NormalForm nf;
        std::size_t depth;
    };
    std::deque<Item> frontier;
    frontier.push_back({std::move(root), 0});
    auto hit = [&](const std::string& which) {
        g.frontier_truncated = true;
        if (std::find(g.limits_hit.begin(), g.limits_hit.end(), which) == g.limits_hit.end())
            g.limits_hit.push_back(which);
    };

    while (!frontier.empty()) {
        Item item = std::move(frontier.front());
        frontier.pop_front();
        if (item.depth >= limits.max_depth) {
            if (!redexes(item.nf).empty()) hit("max_depth");
            continue;
        }
        if (limits.max_seconds > 0) {
            std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
            if (elapsed.count() > limits.max_seconds) {
                hit("max_seconds");
                break;
            }
        }
        // expand with deterministic edge order: redexes sorted by successor key
        std::map<std::string, std::pair<Rule, std::string>> succ;
        for (auto& r : redexes(item.nf)) {
            NormalForm s = apply(item.nf, r);
            succ.emplace(s.canonical_key, std::make_pair(r.rule, r.subject.text));
            if (!g.states.contains(s.canonical_key)) {
                if (g.states.size() >= limits.max_states) {
                    hit("max_states");
                    continue;
                }
                g.states.emplace(s.canonical_key, s.term);
                frontier.push_back({std::move(s), item.depth + 1});
            }
        }
        for (auto& [key, info] : succ)
            if (g.states.contains(key))
                g.edges.push_back({item.nf.canonical_key, info.first, info.second, key});
    }
    return g;
}

enum class Terminal { Committed, Quiescent, Stuck };

inline std::string terminal_name(Terminal t) {
    switch (t) {
        case Terminal::Committed: return "committed";
        case Terminal::Quiescent: return "quiescent";
        case Terminal::Stuck: return "stuck";
    }
    return "?";
}

inline Terminal classify_terminal(const NormalForm& nf) {
    if (!redexes(nf).empty())
        throw std::invalid_argument("classify_terminal: state still has redexes");
    if (is_nil(nf.term)) return Terminal::Committed;
    detail::Region region = detail::split_region(nf.term);
    for (auto& c : region.components)
        if (!as<Repl>(c)) return Terminal::Stuck;
    return Terminal::Quiescent;
}

struct CheckResult {
    enum class Verdict { Holds, Counterexample, Inconclusive } verdict;
    std::vector<EdgeInfo> path; // initial -> violating terminal, shortest
    std::string violating_state;
};

namespace detail {

inline std::map<std::string, bool> terminal_map(const StateGraph& g) {
    std::map<std::string, bool> terminal;
    for (auto& [k, t] : g.states) terminal[k] = true;
    for (auto& e : g.edges) terminal[e.from] = false;
    return terminal;
}

// shortest path via parent edges from a BFS restricted to `allowed` edges
inline std::vector<EdgeInfo> shortest_path(const StateGraph& g, const std::string& target,
                                           const std::function<bool(const EdgeInfo&)>& allowed) {
    std::map<std::string, std::vector<const EdgeInfo*>> out_edges;
    for (auto& e : g.edges)
        if (allowed(e)) out_edges[e.from].push_back(&e);
    std::map<std::string, const EdgeInfo*> parent;
    std::deque<std::string> queue{g.initial};
    std::map<std::string, bool> seen{{g.initial, true}};
    while (!queue.empty()) {
        std::string cur = queue.front();
        queue.pop_front();
        if (cur == target) break;
        for (auto* e : out_edges[cur]) {
            if (seen[e->to]) continue;
            seen[e->to] = true;
            parent[e->to] = e;
            queue.push_back(e->to);
        }
    }
    std::vector<EdgeInfo> path;
    std::string cur = target;
    while (cur != g.initial) {
        auto it = parent.find(cur);
        if (it == parent.end()) return {}; // unreachable under `allowed`
        path.push_back(*it->second);
        cur = it->second->from;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

} // namespace detail

inline CheckResult check_always_terminal(
    const StateGraph& g, const std::function<bool(const NormalForm&)>& predicate) {
    if (g.frontier_truncated) return {CheckResult::Verdict::Inconclusive, {}, {}};
    auto terminal = detail::terminal_map(g);
    std::vector<std::string> bad;
    for (auto& [key, is_term] : terminal)
        if (is_term && !predicate({g.states.at(key), key})) bad.push_back(key);
    if (bad.empty()) return {CheckResult::Verdict::Holds, {}, {}};
    // pick the violation with the shortest witness path
    CheckResult best{CheckResult::Verdict::Counterexample, {}, bad.front()};
    bool first = true;
    for (auto& key : bad) {
        auto path = detail::shortest_path(g, key, [](const EdgeInfo&) { return true; });
        if (first || path.size() < best.path.size()) {
            best.path = std::move(path);
            best.violating_state = key;
            first = false;
        }
    }
    return best;
}

// Does some top-level output on `name` occur in the term?
inline bool contains_output_on(const ProcessPtr& p, const std::string& name) {
    detail::Region region = detail::split_region(p);
    for (auto& b : region.binders)
        if (b.text == name) return false; // restricted: not the observable name
    for (auto& c : region.components)
        if (auto* o = as<Output>(c))
            if (o->subject.text == name) return true;
    return false;
}

// Holds iff every path to a terminal fires a redex on `name` or ends in a
// terminal that still carries an output on `name`.
inline CheckResult check_observed(const StateGraph& g, const std::string& name) {
    if (g.frontier_truncated) return {CheckResult::Verdict::Inconclusive, {}, {}};
    auto terminal = detail::terminal_map(g);
    auto avoids_name = [&](const EdgeInfo& e) { return e.subject != name; };
    for (auto& [key, is_term] : terminal) {
        if (!is_term || contains_output_on(g.states.at(key), name)) continue;
        if (key == g.initial)
            return {CheckResult::Verdict::Counterexample, {}, key};
        auto path = detail::shortest_path(g, key, avoids_name);
        if (!path.empty())
            return {CheckResult::Verdict::Counterexample, std::move(path), key};
    }
    return {CheckResult::Verdict::Holds, {}, {}};
}

// ---- export ----

namespace detail {

constexpr std::size_t kLabelCap = 60;

inline std::string node_label(const std::string& key, const ProcessPtr& term) {
    std::string text = print(term);
    if (text.size() > kLabelCap) {
        std::size_t h = std::hash<std::string>{}(key);
        text = text.substr(0, kLabelCap) + "...#" + std::to_string(h % 100000);
    }
    return text;
}

inline std::string dot_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

} // namespace detail

inline std::string to_dot(const StateGraph& g) {
    std::map<std::string, std::size_t> index;
    for (auto& [key, term] : g.states) index.emplace(key, index.size());
    std::string out = "digraph states {\n  rankdir=LR;\n";
    for (auto& [key, term] : g.states) {
        out += "  n" + std::to_string(index.at(key)) + " [label=\"" +
               detail::dot_escape(detail::node_label(key, term)) + "\"";
        if (key == g.initial) out += ", shape=doublecircle";
        out += "];\n";
    }
    for (auto& e : g.edges)
        out += "  n" + std::to_string(index.at(e.from)) + " -> n" +
               std::to_string(index.at(e.to)) + " [label=\"" + rule_name(e.rule) + "\"];\n";
    out += "}\n";
    return out;
}

inline std::string to_json(const StateGraph& g) {
    nlohmann::json j;
    j["states"] = nlohmann::json::array();
    for (auto& [key, term] : g.states)
        j["states"].push_back({{"key", key}, {"term", print(term)}});
    j["edges"] = nlohmann::json::array();
    for (auto& e : g.edges)
        j["edges"].push_back({{"from", e.from},
                              {"rule", rule_name(e.rule)},
                              {"subject", e.subject},
                              {"to", e.to}});
    j["initial"] = g.initial;
    j["truncated"] = g.frontier_truncated;
    j["limits_hit"] = g.limits_hit;
    return j.dump(2) + "\n";
}

} // namespace webpi
