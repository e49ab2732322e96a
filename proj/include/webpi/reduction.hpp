#pragma once

// One-step operational semantics over normal forms: message passing
// (COM), lazy replication (REP), and workunit abort (FAIL). Redexes are
// enumerated on the flat normal-form structure; messages cross workunit
// boundaries in both directions, restriction boundaries never.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "congruence.hpp"
#include "term.hpp"

namespace webpi {

enum class Rule { COM, REP, FAIL };

inline std::string rule_name(Rule r) {
    switch (r) {
        case Rule::COM: return "COM";
        case Rule::REP: return "REP";
        case Rule::FAIL: return "FAIL";
    }
    return "?";
}

struct Redex {
    Rule rule;
    int output_index;     // position of the Output in the region
    int target_index;     // position of the Sum/Repl/Workunit in the region
    int inner_index = -1; // position inside the unit body, -1 if top level
    int branch_index = -1;// which Sum branch fires (COM only)
    Name subject;         // channel (COM/REP) or unit name (FAIL)

    friend bool operator==(const Redex&, const Redex&) = default;
};

class StaleRedex : public std::runtime_error {
  public:
    explicit StaleRedex(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

// A normal form is a restriction chain over a flat list of components
// (Output / Sum / Repl / Workunit); unit bodies hold only Sum and Repl.
struct Region {
    std::vector<Name> binders;
    std::vector<ProcessPtr> components;
};

inline Region split_region(const ProcessPtr& p) {
    Region r;
    ProcessPtr rest = p;
    while (auto* rr = as<Restrict>(rest)) {
        r.binders.push_back(rr->bound);
        rest = rr->body;
    }
    if (auto* pp = as<Par>(rest))
        r.components = pp->components;
    else if (!is_nil(rest))
        r.components = {rest};
    return r;
}

inline ProcessPtr rebuild_region(const Region& r) {
    ProcessPtr body;
    if (r.components.empty())
        body = nil();
    else if (r.components.size() == 1)
        body = r.components[0];
    else
        body = par(r.components);
    for (auto it = r.binders.rbegin(); it != r.binders.rend(); ++it)
        body = restrict_(*it, body);
    return body;
}

inline std::vector<ProcessPtr> body_components(const Workunit& w) {
    if (auto* pp = as<Par>(w.body)) return pp->components;
    if (is_nil(w.body)) return {};
    return {w.body};
}

// match an output against one receiving component; emits COM/REP redexes
inline void match_receiver(const Output& o, const ProcessPtr& recv, int oi, int ti,
                           int inner, std::vector<Redex>& out) {
    if (auto* s = as<Sum>(recv)) {
        for (int b = 0; b < static_cast<int>(s->branches.size()); ++b) {
            const auto& br = s->branches[b];
            if (br.subject == o.subject && br.params.size() == o.args.size())
                out.push_back({Rule::COM, oi, ti, inner, b, o.subject});
        }
    } else if (auto* r = as<Repl>(recv)) {
        if (r->subject == o.subject && r->params.size() == o.args.size())
            out.push_back({Rule::REP, oi, ti, inner, -1, o.subject});
    }
}

inline bool fail_enabled(const Output& o, const Workunit& w) {
    if (!o.args.empty() || o.subject != w.unit) return false;
    auto comps = body_components(w);
    if (comps.empty()) return false; // committed units no longer exist in NF anyway
    for (auto& c : comps)
        if (!as<Sum>(c)) return false; // a Repl in the body blocks FAIL
    return true;
}

} // namespace detail

inline std::vector<Redex> redexes(const NormalForm& nf) {
    detail::Region region = detail::split_region(nf.term);
    const auto& cs = region.components;
    std::vector<Redex> out;
    for (int oi = 0; oi < static_cast<int>(cs.size()); ++oi) {
        auto* o = as<Output>(cs[oi]);
        if (!o) continue;
        for (int ti = 0; ti < static_cast<int>(cs.size()); ++ti) {
            if (ti == oi) continue;
            if (auto* w = as<Workunit>(cs[ti])) {
                auto body = detail::body_components(*w);
                for (int k = 0; k < static_cast<int>(body.size()); ++k)
                    detail::match_receiver(*o, body[k], oi, ti, k, out);
                if (detail::fail_enabled(*o, *w))
                    out.push_back({Rule::FAIL, oi, ti, -1, -1, o->subject});
            } else {
                detail::match_receiver(*o, cs[ti], oi, ti, -1, out);
            }
        }
    }
    return out;
}

inline NormalForm apply(const NormalForm& nf, const Redex& r) {
    auto enabled = redexes(nf);
    if (std::find(enabled.begin(), enabled.end(), r) == enabled.end())
        throw StaleRedex("redex is not enabled in this state");

    detail::Region region = detail::split_region(nf.term);
    auto cs = region.components;
    const auto* o = as<Output>(cs[r.output_index]);

    auto fire_branch = [&](const InputBranch& br) {
        Substitution s;
        for (std::size_t i = 0; i < br.params.size(); ++i) s[br.params[i]] = o->args[i];
        return substitute(br.continuation, s);
    };

    switch (r.rule) {
        case Rule::COM: {
            if (r.inner_index < 0) {
                const auto* s = as<Sum>(cs[r.target_index]);
                cs[r.target_index] = fire_branch(s->branches[r.branch_index]);
            } else {
                const auto* w = as<Workunit>(cs[r.target_index]);
                auto body = detail::body_components(*w);
                const auto* s = as<Sum>(body[r.inner_index]);
                body[r.inner_index] = fire_branch(s->branches[r.branch_index]);
                cs[r.target_index] = workunit(body.size() == 1 ? body[0] : par(body),
                                              w->handler, w->unit);
            }
            break;
        }
        case Rule::REP: {
            if (r.inner_index < 0) {
                const auto* rp = as<Repl>(cs[r.target_index]);
                Substitution s;
                for (std::size_t i = 0; i < rp->params.size(); ++i)
                    s[rp->params[i]] = o->args[i];
                cs.push_back(substitute(rp->body, s));
            } else {
                const auto* w = as<Workunit>(cs[r.target_index]);
                auto body = detail::body_components(*w);
                const auto* rp = as<Repl>(body[r.inner_index]);
                Substitution s;
                for (std::size_t i = 0; i < rp->params.size(); ++i)
                    s[rp->params[i]] = o->args[i];
                body.push_back(substitute(rp->body, s));
                cs[r.target_index] = workunit(par(body), w->handler, w->unit);
            }
            break;
        }
        case Rule::FAIL: {
            // body terminated, handler activated inside a closed unit so the
            // handler-running unit cannot itself be aborted
            const auto* w = as<Workunit>(cs[r.target_index]);
            Name z = fresh_reserved("_w", all_names(w->handler));
            cs[r.target_index] = restrict_(z, workunit(w->handler, nil(), z));
            break;
        }
    }
    cs.erase(cs.begin() + r.output_index); // the message is consumed
    region.components = std::move(cs);
    return normalize(detail::rebuild_region(region));
}

inline std::vector<NormalForm> step_all(const NormalForm& nf) {
    std::map<std::string, NormalForm> by_key;
    for (auto& r : redexes(nf)) {
        NormalForm s = apply(nf, r);
        by_key.emplace(s.canonical_key, std::move(s));
    }
    std::vector<NormalForm> out;
    out.reserve(by_key.size());
    for (auto& [k, v] : by_key) out.push_back(std::move(v));
    return out;
}

} // namespace webpi
