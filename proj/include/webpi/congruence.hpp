#pragma once

// Structural congruence as a terminating directed rewrite system.
// normalize() orients the congruence axioms left-to-right (erase committed
// units, flatten nested units, float outputs out of unit bodies, extrude
// restrictions) and canonically orders the monoid structure; equal
// canonical keys of normal forms are the operative congruence test.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

#include "term.hpp"

namespace webpi {

// ---- canonical key ----
//
// Serialization that ignores binder names (de Bruijn levels), sorts the
// multiset structure of Par and Sum, and picks the ordering of each
// adjacent restriction block that minimizes the serialization. Invariant
// under alpha-renaming and component permutation.

namespace detail {

constexpr std::size_t kBlockPermLimit = 6;

inline std::string canon_ser(const ProcessPtr& p, std::map<Name, int>& env, int depth);

inline std::string canon_ser_block(const std::vector<Name>& binders, const ProcessPtr& body,
                                   std::map<Name, int>& env, int depth,
                                   std::vector<std::size_t>* best_order = nullptr) {
    const std::size_t n = binders.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    auto ser_with = [&](const std::vector<std::size_t>& ord) {
        std::map<Name, int> saved;
        std::vector<bool> had(n, false);
        for (std::size_t i = 0; i < n; ++i) {
            const Name& b = binders[ord[i]];
            auto it = env.find(b);
            if (it != env.end() && !saved.contains(b)) saved.emplace(b, it->second);
            env[b] = depth + static_cast<int>(i);
        }
        std::string s = canon_ser(body, env, depth + static_cast<int>(n));
        for (auto& b : binders) {
            auto it = saved.find(b);
            if (it != saved.end())
                env[b] = it->second;
            else
                env.erase(b);
        }
        return s;
    };

    std::string best = ser_with(order);
    std::vector<std::size_t> chosen = order;
    if (n > 1 && n <= kBlockPermLimit) {
        while (std::next_permutation(order.begin(), order.end())) {
            std::string s = ser_with(order);
            if (s < best) {
                best = s;
                chosen = order;
            }
        }
    }
    if (best_order) *best_order = chosen;
    return "N" + std::to_string(n) + "." + best;
}

inline std::string canon_ser(const ProcessPtr& p, std::map<Name, int>& env, int depth) {
    auto ref = [&](const Name& n) {
        auto it = env.find(n);
        if (it != env.end()) return "b" + std::to_string(it->second) + ",";
        return "f" + n.text + (n.uid ? "#" + std::to_string(n.uid) : "") + ",";
    };
    auto under = [&](const std::vector<Name>& params, const ProcessPtr& body) {
        std::map<Name, int> saved;
        int d = depth;
        for (auto& q : params) {
            auto it = env.find(q);
            if (it != env.end() && !saved.contains(q)) saved.emplace(q, it->second);
            env[q] = d++;
        }
        std::string s = canon_ser(body, env, d);
        for (auto& q : params) {
            auto it = saved.find(q);
            if (it != saved.end())
                env[q] = it->second;
            else
                env.erase(q);
        }
        return s;
    };
    struct V {
        decltype(ref)& ref_fn;
        decltype(under)& under_fn;
        std::map<Name, int>& env;
        int depth;
        std::string operator()(const Nil&) { return "0"; }
        std::string operator()(const Output& o) {
            std::string s = "O(" + ref_fn(o.subject) + ";";
            for (auto& a : o.args) s += ref_fn(a);
            return s + ")";
        }
        std::string operator()(const Sum& sm) {
            std::vector<std::string> parts;
            for (auto& b : sm.branches)
                parts.push_back("I(" + ref_fn(b.subject) + std::to_string(b.params.size()) +
                                ";" + under_fn(b.params, b.continuation) + ")");
            std::sort(parts.begin(), parts.end());
            std::string s = "S{";
            for (auto& q : parts) s += q + ",";
            return s + "}";
        }
        std::string operator()(const Restrict& r) {
            std::vector<Name> binders{r.bound};
            ProcessPtr b = r.body;
            while (auto* rr = as<Restrict>(b)) {
                binders.push_back(rr->bound);
                b = rr->body;
            }
            return canon_ser_block(binders, b, env, depth);
        }
        std::string operator()(const Par& pp) {
            std::vector<std::string> parts;
            for (auto& c : pp.components) parts.push_back(canon_ser(c, env, depth));
            std::sort(parts.begin(), parts.end());
            std::string s = "P[";
            for (auto& q : parts) s += q + ",";
            return s + "]";
        }
        std::string operator()(const Repl& r) {
            return "R(" + ref_fn(r.subject) + std::to_string(r.params.size()) + ";" +
                   under_fn(r.params, r.body) + ")";
        }
        std::string operator()(const Workunit& w) {
            return "W(" + ref_fn(w.unit) + ";" + canon_ser(w.body, env, depth) + ";" +
                   canon_ser(w.handler, env, depth) + ")";
        }
    };
    return std::visit(V{ref, under, env, depth}, p->node);
}

} // namespace detail

inline std::string canonical_key(const ProcessPtr& p) {
    std::map<Name, int> env;
    return detail::canon_ser(p, env, 0);
}

// ---- rewrite trace ----

struct TraceStep {
    std::string axiom;  // scope-nil, scope-extrusion-par, scope-extrusion-unit,
                        // unit-commit, unit-flatten, float-output, gc-restriction,
                        // alpha-rename, monoid
    std::string detail;
};

class FuelExhausted : public std::runtime_error {
  public:
    explicit FuelExhausted(const std::string& what) : std::runtime_error(what) {}
};

// ---- normal form ----

struct NormalForm {
    ProcessPtr term;
    std::string canonical_key;
};

namespace detail {

class Normalizer {
  public:
    Normalizer(std::size_t fuel, std::vector<TraceStep>* trace)
        : fuel_(fuel), trace_(trace) {}

    ProcessPtr run(const ProcessPtr& p) { return norm(p); }

  private:
    std::size_t fuel_;
    std::vector<TraceStep>* trace_;

    void spend(const std::string& axiom, const std::string& detail) {
        if (fuel_ == 0)
            throw FuelExhausted("rewrite step budget exhausted (normalizer bug?)");
        --fuel_;
        if (trace_) trace_->push_back({axiom, detail});
    }

    static std::string sort_key(const ProcessPtr& p) {
        std::string k = canonical_key(p);
        // ties broken by subterm count for stability across shapes
        return k + "#" + std::to_string(subterm_count(p));
    }

    // Splits a normalized term into a leading restriction chain and the rest.
    static void split_restricts(ProcessPtr p, std::vector<Name>& binders, ProcessPtr& rest) {
        while (auto* r = as<Restrict>(p)) {
            binders.push_back(r->bound);
            p = r->body;
        }
        rest = p;
    }

    static std::vector<ProcessPtr> par_components(const ProcessPtr& p) {
        if (auto* pp = as<Par>(p)) return pp->components;
        if (is_nil(p)) return {};
        return {p};
    }

    static ProcessPtr rebuild_par(std::vector<ProcessPtr> cs) {
        if (cs.empty()) return nil();
        if (cs.size() == 1) return cs[0];
        return par(std::move(cs));
    }

    ProcessPtr sort_par(std::vector<ProcessPtr> cs) {
        std::stable_sort(cs.begin(), cs.end(), [](const ProcessPtr& a, const ProcessPtr& b) {
            return sort_key(a) < sort_key(b);
        });
        return rebuild_par(std::move(cs));
    }

    // Reorders an adjacent restriction block into the canonical
    // (serialization-minimizing) binder order.
    ProcessPtr order_block(std::vector<Name> binders, ProcessPtr inner) {
        if (binders.empty()) return inner;
        if (binders.size() > 1) {
            std::map<Name, int> env;
            std::vector<std::size_t> order;
            canon_ser_block(binders, inner, env, 0, &order);
            bool identity = true;
            for (std::size_t i = 0; i < order.size(); ++i)
                if (order[i] != i) identity = false;
            if (!identity) {
                std::vector<Name> reordered;
                reordered.reserve(binders.size());
                for (auto i : order) reordered.push_back(binders[i]);
                spend("scope-swap", "reorder adjacent restrictions");
                binders = std::move(reordered);
            }
        }
        for (auto it = binders.rbegin(); it != binders.rend(); ++it)
            inner = restrict_(*it, inner);
        return inner;
    }

    // Renames binder `b` inside `body` if it collides with `avoid`.
    void avoid_collision(Name& b, ProcessPtr& body, const std::set<Name>& avoid) {
        if (!avoid.contains(b)) return;
        std::set<Name> all = avoid;
        auto names = all_names(body);
        all.insert(names.begin(), names.end());
        Name b2 = fresh_name(b, all);
        spend("alpha-rename", b.text + " -> " + b2.text);
        body = substitute(body, {{b, b2}});
        b = b2;
    }

    ProcessPtr norm(const ProcessPtr& p) {
        struct V {
            Normalizer& nz;
            const ProcessPtr& p;
            ProcessPtr operator()(const Nil&) { return p; }
            ProcessPtr operator()(const Output&) { return p; }
            ProcessPtr operator()(const Sum& s) { return nz.norm_sum(s); }
            ProcessPtr operator()(const Restrict& r) { return nz.norm_restrict(r); }
            ProcessPtr operator()(const Par& pp) { return nz.norm_par(pp.components); }
            ProcessPtr operator()(const Repl& r) {
                return repl(r.subject, r.params, nz.norm(r.body));
            }
            ProcessPtr operator()(const Workunit& w) { return nz.norm_unit(w); }
        };
        return std::visit(V{*this, p}, p->node);
    }

    ProcessPtr norm_sum(const Sum& s) {
        std::vector<InputBranch> bs;
        bs.reserve(s.branches.size());
        for (auto& b : s.branches)
            bs.push_back({b.subject, b.params, norm(b.continuation)});
        std::stable_sort(bs.begin(), bs.end(), [](const InputBranch& a, const InputBranch& b) {
            auto key = [](const InputBranch& x) {
                return canonical_key(sum({x})) + "#" + std::to_string(subterm_count(x.continuation));
            };
            return key(a) < key(b);
        });
        return sum(std::move(bs));
    }

    ProcessPtr norm_restrict(const Restrict& r) {
        ProcessPtr body = norm(r.body);
        if (!free_names(body).contains(r.bound)) {
            if (is_nil(body))
                spend("scope-nil", "(" + r.bound.text + ")0 -> 0");
            else
                spend("gc-restriction", "drop unused (" + r.bound.text + ")");
            return body;
        }
        std::vector<Name> binders{r.bound};
        ProcessPtr rest;
        split_restricts(body, binders, rest);
        return order_block(std::move(binders), rest);
    }

    ProcessPtr norm_par(const std::vector<ProcessPtr>& raw) {
        std::vector<ProcessPtr> flat;
        for (auto& c : raw) {
            ProcessPtr n = norm(c);
            if (is_nil(n)) {
                spend("monoid", "drop nil component");
                continue;
            }
            if (auto* pp = as<Par>(n)) {
                spend("monoid", "flatten nested parallel");
                flat.insert(flat.end(), pp->components.begin(), pp->components.end());
            } else {
                flat.push_back(n);
            }
        }
        // hoist restriction chains out of components (scope extrusion)
        std::vector<Name> binders;
        std::vector<ProcessPtr> cs;
        bool hoisted = false;
        for (std::size_t i = 0; i < flat.size(); ++i) {
            if (!as<Restrict>(flat[i])) {
                cs.push_back(flat[i]);
                continue;
            }
            hoisted = true;
            std::set<Name> avoid;
            for (std::size_t j = 0; j < flat.size(); ++j) {
                if (j == i) continue;
                auto fn = free_names(flat[j]);
                avoid.insert(fn.begin(), fn.end());
            }
            avoid.insert(binders.begin(), binders.end());
            std::vector<Name> local;
            ProcessPtr rest;
            split_restricts(flat[i], local, rest);
            for (auto& b : local) {
                avoid_collision(b, rest, avoid);
                avoid.insert(b);
                binders.push_back(b);
                spend("scope-extrusion-par", "hoist (" + b.text + ") over parallel");
            }
            // extruded body may itself be a Par
            auto inner = par_components(rest);
            cs.insert(cs.end(), inner.begin(), inner.end());
        }
        ProcessPtr body = sort_par(std::move(cs));
        if (!hoisted) return body;
        // hoisting may enable further normalization (nested chains, GC)
        return norm(order_block(std::move(binders), body));
    }

    ProcessPtr norm_unit(const Workunit& w) {
        ProcessPtr body = norm(w.body);
        ProcessPtr handler = norm(w.handler);
        if (is_nil(body)) {
            spend("unit-commit", "unit " + w.unit.text + " { 0 ; _ } -> 0");
            return nil();
        }
        // hoist restrictions out of the body, past the unit boundary
        std::vector<Name> binders;
        ProcessPtr rest;
        split_restricts(body, binders, rest);
        if (!binders.empty()) {
            std::set<Name> avoid = free_names(handler);
            avoid.insert(w.unit);
            std::vector<Name> fixed;
            for (auto& b : binders) {
                avoid.insert(fixed.begin(), fixed.end());
                Name nb = b;
                avoid_collision(nb, rest, avoid);
                fixed.push_back(nb);
                spend("scope-extrusion-unit", "hoist (" + nb.text + ") out of unit " +
                                                 w.unit.text);
            }
            binders = std::move(fixed);
        }
        // float outputs and flatten nested units out of the body
        std::vector<ProcessPtr> stay, floated;
        bool moved = false;
        for (auto& c : par_components(rest)) {
            if (as<Output>(c)) {
                spend("float-output", "float " + as<Output>(c)->subject.text +
                                          "!(...) out of unit " + w.unit.text);
                floated.push_back(c);
                moved = true;
            } else if (as<Workunit>(c)) {
                spend("unit-flatten", "flatten unit " + as<Workunit>(c)->unit.text +
                                          " out of unit " + w.unit.text);
                floated.push_back(c);
                moved = true;
            } else {
                stay.push_back(c);
            }
        }
        ProcessPtr unit_part;
        if (stay.empty()) {
            spend("unit-commit", "unit " + w.unit.text + " { 0 ; _ } -> 0");
            unit_part = nil();
        } else {
            unit_part = workunit(sort_par(std::move(stay)), handler, w.unit);
        }
        if (binders.empty() && !moved) return unit_part;
        std::vector<ProcessPtr> cs = std::move(floated);
        if (!is_nil(unit_part)) cs.push_back(unit_part);
        ProcessPtr inner = sort_par(std::move(cs));
        return norm(order_block(std::move(binders), inner));
    }
};

} // namespace detail

inline std::size_t default_fuel(const ProcessPtr& p) {
    std::size_t n = subterm_count(p);
    return std::max<std::size_t>(10 * n * n, 64);
}

inline NormalForm normalize(const ProcessPtr& p, std::vector<TraceStep>* trace = nullptr) {
    detail::Normalizer nz(default_fuel(p), trace);
    ProcessPtr t = nz.run(p);
    return {t, canonical_key(t)};
}

inline bool congruent(const ProcessPtr& p, const ProcessPtr& q) {
    return normalize(p).canonical_key == normalize(q).canonical_key;
}

inline bool is_committed(const ProcessPtr& p) { return is_nil(normalize(p).term); }

} // namespace webpi
