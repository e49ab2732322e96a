#pragma once

// Shared test helpers: literal-term construction via the parser, a random
// well-formed term generator, and a congruence-variant generator that
// applies congruence axioms in either direction at random loci.

#include <cassert>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <webpi/congruence.hpp>
#include <webpi/parse.hpp>
#include <webpi/print.hpp>
#include <webpi/term.hpp>

namespace webpi::testing {

// parse a literal or abort; for terms written inline in tests
inline ProcessPtr wp(const std::string& text) {
    ParseResult res = parse(text);
    if (auto* err = std::get_if<ParseError>(&res))
        throw std::runtime_error("bad test literal '" + text + "': " + err->message);
    ProcessPtr p = std::get<ProcessPtr>(res);
    if (!well_formed(p).empty())
        throw std::runtime_error("ill-formed test literal '" + text + "'");
    return p;
}

class Gen {
  public:
    explicit Gen(std::uint64_t seed) : rng_(seed) {}

    std::mt19937_64& rng() { return rng_; }

    Name name() { return pool_[pick(pool_.size())]; }

    std::vector<Name> distinct_names(std::size_t max) {
        std::vector<Name> out;
        auto shuffled = pool_;
        std::shuffle(shuffled.begin(), shuffled.end(), rng_);
        std::size_t n = pick(max + 1);
        out.assign(shuffled.begin(), shuffled.begin() + n);
        return out;
    }

    // random well-formed term with at most `size` constructors
    ProcessPtr term(int size) {
        if (size <= 1) {
            switch (pick(3)) {
                case 0: return nil();
                default: return output(name(), args());
            }
        }
        switch (pick(10)) {
            case 0: return nil();
            case 1:
            case 2: return output(name(), args());
            case 3:
            case 4: {
                std::size_t n = 1 + pick(2);
                std::vector<InputBranch> bs;
                for (std::size_t i = 0; i < n; ++i)
                    bs.push_back({name(), distinct_names(2), term((size - 1) / static_cast<int>(n))});
                return sum(std::move(bs));
            }
            case 5: return restrict_(name(), term(size - 1));
            case 6: {
                std::size_t n = 2 + pick(2);
                std::vector<ProcessPtr> cs;
                for (std::size_t i = 0; i < n; ++i)
                    cs.push_back(term((size - 1) / static_cast<int>(n)));
                return par(std::move(cs));
            }
            case 7: return repl(name(), distinct_names(2), term(size - 1));
            default:
                return workunit(term((size - 1) / 2), term((size - 1) / 2), name());
        }
    }

    std::size_t pick(std::size_t n) {
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
    }

  private:
    std::mt19937_64 rng_;
    std::vector<Name> pool_{{"a", 0}, {"b", 0}, {"c", 0}, {"x", 0}, {"y", 0},
                            {"z", 0}, {"u", 0}, {"v", 0}, {"w", 0}};

    std::vector<Name> args() {
        std::vector<Name> out;
        std::size_t n = pick(3);
        for (std::size_t i = 0; i < n; ++i) out.push_back(name());
        return out;
    }
};

// ---- congruence-variant generator ----
//
// Rewrites a random subterm with one congruence axiom, picked at random
// and applied in a random direction. Side conditions are checked; an
// inapplicable pick leaves the term unchanged.

class VariantGen {
  public:
    VariantGen(Gen& gen) : gen_(gen) {}

    ProcessPtr variant(const ProcessPtr& p, int mutations) {
        ProcessPtr cur = p;
        for (int i = 0; i < mutations; ++i) cur = mutate(cur);
        return cur;
    }

  private:
    Gen& gen_;

    ProcessPtr mutate(const ProcessPtr& p) {
        // walk to a random subterm, rebuild on the way out
        struct V {
            VariantGen& vg;
            const ProcessPtr& p;
            ProcessPtr operator()(const Nil&) { return vg.mutate_here(p); }
            ProcessPtr operator()(const Output&) { return vg.mutate_here(p); }
            ProcessPtr operator()(const Sum& s) {
                if (vg.gen_.pick(2) == 0) return vg.mutate_here(p);
                auto bs = s.branches;
                std::size_t i = vg.gen_.pick(bs.size());
                bs[i].continuation = vg.mutate(bs[i].continuation);
                return sum(std::move(bs));
            }
            ProcessPtr operator()(const Restrict& r) {
                if (vg.gen_.pick(2) == 0) return vg.mutate_here(p);
                return restrict_(r.bound, vg.mutate(r.body));
            }
            ProcessPtr operator()(const Par& pp) {
                if (vg.gen_.pick(2) == 0) return vg.mutate_here(p);
                auto cs = pp.components;
                std::size_t i = vg.gen_.pick(cs.size());
                cs[i] = vg.mutate(cs[i]);
                return par(std::move(cs));
            }
            ProcessPtr operator()(const Repl& r) {
                if (vg.gen_.pick(2) == 0) return vg.mutate_here(p);
                return repl(r.subject, r.params, vg.mutate(r.body));
            }
            ProcessPtr operator()(const Workunit& w) {
                if (vg.gen_.pick(2) == 0) return vg.mutate_here(p);
                if (vg.gen_.pick(2) == 0)
                    return workunit(vg.mutate(w.body), w.handler, w.unit);
                return workunit(w.body, vg.mutate(w.handler), w.unit);
            }
        };
        return std::visit(V{*this, p}, p->node);
    }

    ProcessPtr mutate_here(const ProcessPtr& p) {
        // try a few random axiom picks; fall back to identity
        for (int attempt = 0; attempt < 4; ++attempt) {
            ProcessPtr q = try_axiom(p, gen_.pick(10));
            if (q) return q;
        }
        return p;
    }

    // returns nullptr when the picked axiom does not apply here
    ProcessPtr try_axiom(const ProcessPtr& p, std::size_t which) {
        switch (which) {
            case 0: { // monoid: permute parallel / sum
                if (auto* pp = as<Par>(p)) {
                    auto cs = pp->components;
                    std::shuffle(cs.begin(), cs.end(), gen_.rng());
                    return par(std::move(cs));
                }
                if (auto* s = as<Sum>(p)) {
                    auto bs = s->branches;
                    std::shuffle(bs.begin(), bs.end(), gen_.rng());
                    return sum(std::move(bs));
                }
                return nullptr;
            }
            case 1: { // monoid: regroup parallel (associativity)
                auto* pp = as<Par>(p);
                if (!pp || pp->components.size() < 3) return nullptr;
                auto cs = pp->components;
                std::vector<ProcessPtr> grouped{par({cs[0], cs[1]})};
                grouped.insert(grouped.end(), cs.begin() + 2, cs.end());
                return par(std::move(grouped));
            }
            case 2: { // monoid: P | 0 <-> P
                if (auto* pp = as<Par>(p)) {
                    auto cs = pp->components;
                    for (std::size_t i = 0; i < cs.size(); ++i)
                        if (is_nil(cs[i]) && cs.size() > 2) {
                            cs.erase(cs.begin() + i);
                            return par(std::move(cs));
                        }
                    cs.push_back(nil());
                    return par(std::move(cs));
                }
                if (!is_nil(p)) return par({p, nil()});
                return nullptr;
            }
            case 3: { // scope: (u)(v)P <-> (v)(u)P
                auto* r = as<Restrict>(p);
                if (!r) return nullptr;
                auto* r2 = as<Restrict>(r->body);
                if (!r2 || r->bound == r2->bound) return nullptr;
                return restrict_(r2->bound, restrict_(r->bound, r2->body));
            }
            case 4: { // scope: P | (u)Q -> (u)(P | Q), u fresh for siblings
                auto* pp = as<Par>(p);
                if (!pp) return nullptr;
                for (std::size_t i = 0; i < pp->components.size(); ++i) {
                    auto* r = as<Restrict>(pp->components[i]);
                    if (!r) continue;
                    bool clash = false;
                    for (std::size_t j = 0; j < pp->components.size(); ++j)
                        if (j != i && free_names(pp->components[j]).contains(r->bound))
                            clash = true;
                    if (clash) continue;
                    auto cs = pp->components;
                    cs[i] = r->body;
                    return restrict_(r->bound, par(std::move(cs)));
                }
                return nullptr;
            }
            case 5: { // scope: (u)(P | Q) -> P | (u)Q, u not free in P
                auto* r = as<Restrict>(p);
                if (!r) return nullptr;
                auto* pp = as<Par>(r->body);
                if (!pp) return nullptr;
                std::vector<ProcessPtr> inside, outside;
                for (auto& c : pp->components) {
                    if (free_names(c).contains(r->bound) || gen_.pick(2) == 0)
                        inside.push_back(c);
                    else
                        outside.push_back(c);
                }
                if (outside.empty()) return nullptr;
                ProcessPtr in_body = inside.empty() ? nil()
                                     : inside.size() == 1 ? inside[0]
                                                          : par(std::move(inside));
                outside.push_back(restrict_(r->bound, std::move(in_body)));
                return outside.size() == 1 ? outside[0] : par(std::move(outside));
            }
            case 6: { // workunit scope: <(z)P ; Q>_x <-> (z)<P ; Q>_x
                if (auto* w = as<Workunit>(p)) {
                    auto* r = as<Restrict>(w->body);
                    if (!r || r->bound == w->unit ||
                        free_names(w->handler).contains(r->bound))
                        return nullptr;
                    return restrict_(r->bound, workunit(r->body, w->handler, w->unit));
                }
                if (auto* r = as<Restrict>(p)) {
                    auto* w = as<Workunit>(r->body);
                    if (!w || r->bound == w->unit ||
                        free_names(w->handler).contains(r->bound))
                        return nullptr;
                    return workunit(restrict_(r->bound, w->body), w->handler, w->unit);
                }
                return nullptr;
            }
            case 7: { // commit: <0 ; Q>_x <-> 0
                if (auto* w = as<Workunit>(p))
                    if (is_nil(w->body)) return nil();
                if (is_nil(p)) return workunit(nil(), gen_.term(3), gen_.name());
                return nullptr;
            }
            case 8: { // flatten: <<P;Q>_y | R ; R'>_x <-> <P;Q>_y | <R;R'>_x
                if (auto* w = as<Workunit>(p)) {
                    auto* pp = as<Par>(w->body);
                    if (!pp) return nullptr;
                    for (std::size_t i = 0; i < pp->components.size(); ++i) {
                        if (!as<Workunit>(pp->components[i])) continue;
                        auto cs = pp->components;
                        ProcessPtr inner = cs[i];
                        cs.erase(cs.begin() + i);
                        ProcessPtr rest = cs.size() == 1 ? cs[0] : par(std::move(cs));
                        return par({inner, workunit(rest, w->handler, w->unit)});
                    }
                    return nullptr;
                }
                if (auto* pp = as<Par>(p)) {
                    for (std::size_t i = 0; i < pp->components.size(); ++i) {
                        auto* inner = as<Workunit>(pp->components[i]);
                        if (!inner) continue;
                        for (std::size_t j = 0; j < pp->components.size(); ++j) {
                            auto* outer = as<Workunit>(pp->components[j]);
                            if (i == j || !outer) continue;
                            auto cs = pp->components;
                            ProcessPtr in = cs[i];
                            ProcessPtr new_outer = workunit(par({in, outer->body}),
                                                            outer->handler, outer->unit);
                            std::size_t lo = std::min(i, j), hi = std::max(i, j);
                            cs.erase(cs.begin() + hi);
                            cs.erase(cs.begin() + lo);
                            cs.push_back(new_outer);
                            return cs.size() == 1 ? cs[0] : par(std::move(cs));
                        }
                    }
                }
                return nullptr;
            }
            case 9: { // float: <out | P ; Q>_x <-> out | <P ; Q>_x
                if (auto* w = as<Workunit>(p)) {
                    auto* pp = as<Par>(w->body);
                    if (pp) {
                        for (std::size_t i = 0; i < pp->components.size(); ++i) {
                            if (!as<Output>(pp->components[i])) continue;
                            auto cs = pp->components;
                            ProcessPtr out = cs[i];
                            cs.erase(cs.begin() + i);
                            ProcessPtr rest = cs.size() == 1 ? cs[0] : par(std::move(cs));
                            return par({out, workunit(rest, w->handler, w->unit)});
                        }
                    } else if (as<Output>(w->body)) {
                        return par({w->body, workunit(nil(), w->handler, w->unit)});
                    }
                    return nullptr;
                }
                if (auto* pp = as<Par>(p)) { // reverse: message re-enters the unit
                    for (std::size_t i = 0; i < pp->components.size(); ++i) {
                        if (!as<Output>(pp->components[i])) continue;
                        for (std::size_t j = 0; j < pp->components.size(); ++j) {
                            auto* w = as<Workunit>(pp->components[j]);
                            if (i == j || !w) continue;
                            auto cs = pp->components;
                            ProcessPtr out = cs[i];
                            ProcessPtr packed = workunit(
                                is_nil(w->body) ? out : par({out, w->body}),
                                w->handler, w->unit);
                            std::size_t lo = std::min(i, j), hi = std::max(i, j);
                            cs.erase(cs.begin() + hi);
                            cs.erase(cs.begin() + lo);
                            cs.push_back(packed);
                            return cs.size() == 1 ? cs[0] : par(std::move(cs));
                        }
                    }
                }
                return nullptr;
            }
        }
        return nullptr;
    }
};

// Renames a random selection of binders to fresh names; the result is
// alpha-equivalent to the input by construction.
inline ProcessPtr alpha_variant(const ProcessPtr& p, Gen& gen) {
    auto rename_params = [&](std::vector<Name> params, ProcessPtr body)
        -> std::pair<std::vector<Name>, ProcessPtr> {
        for (auto& q : params) {
            if (gen.pick(2) != 0) continue;
            std::set<Name> avoid = all_names(body);
            avoid.insert(params.begin(), params.end());
            Name fresh = fresh_name({q.text + "r", 0}, avoid);
            body = substitute(body, {{q, fresh}});
            q = fresh;
        }
        return {std::move(params), std::move(body)};
    };
    struct V {
        Gen& gen;
        decltype(rename_params)& rp;
        const ProcessPtr& p;
        ProcessPtr operator()(const Nil&) { return p; }
        ProcessPtr operator()(const Output&) { return p; }
        ProcessPtr operator()(const Sum& s) {
            std::vector<InputBranch> bs;
            for (auto& b : s.branches) {
                auto [params, cont] = rp(b.params, alpha_variant(b.continuation, gen));
                bs.push_back({b.subject, std::move(params), std::move(cont)});
            }
            return sum(std::move(bs));
        }
        ProcessPtr operator()(const Restrict& r) {
            auto [binders, body] = rp({r.bound}, alpha_variant(r.body, gen));
            return restrict_(binders[0], std::move(body));
        }
        ProcessPtr operator()(const Par& pp) {
            std::vector<ProcessPtr> cs;
            for (auto& c : pp.components) cs.push_back(alpha_variant(c, gen));
            return par(std::move(cs));
        }
        ProcessPtr operator()(const Repl& r) {
            auto [params, body] = rp(r.params, alpha_variant(r.body, gen));
            return repl(r.subject, std::move(params), std::move(body));
        }
        ProcessPtr operator()(const Workunit& w) {
            return workunit(alpha_variant(w.body, gen), alpha_variant(w.handler, gen),
                            w.unit);
        }
    };
    return std::visit(V{gen, rename_params, p}, p->node);
}

} // namespace webpi::testing
