#pragma once

// Process terms for an asynchronous name-passing calculus with
// transactional workunits: AST, free names, capture-avoiding
// substitution, alpha-equivalence, well-formedness.

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace webpi {

// Machine-generated names live in a reserved namespace so they can never
// collide with user input (the parser rejects leading '_').
inline bool is_reserved_name(const std::string& text) {
    return !text.empty() && text[0] == '_';
}

struct Name {
    std::string text;
    int uid = 0; // disambiguation index, 0 for source names

    friend auto operator<=>(const Name&, const Name&) = default;
};

struct Process;
using ProcessPtr = std::shared_ptr<const Process>;

struct Nil {};

struct Output {
    Name subject;
    std::vector<Name> args;
};

struct InputBranch {
    Name subject;
    std::vector<Name> params; // pairwise distinct, bind in continuation
    ProcessPtr continuation;
};

struct Sum {
    std::vector<InputBranch> branches; // non-empty
};

struct Restrict {
    Name bound;
    ProcessPtr body;
};

struct Par {
    std::vector<ProcessPtr> components; // >= 2 in raw AST
};

struct Repl {
    Name subject;
    std::vector<Name> params;
    ProcessPtr body;
};

struct Workunit {
    ProcessPtr body;
    ProcessPtr handler;
    Name unit; // free occurrence, not a binder
};

struct Process {
    std::variant<Nil, Output, Sum, Restrict, Par, Repl, Workunit> node;
};

// ---- constructors ----

inline ProcessPtr make(Process p) { return std::make_shared<Process>(std::move(p)); }

inline ProcessPtr nil() {
    static const ProcessPtr n = make(Process{Nil{}});
    return n;
}
inline ProcessPtr output(Name subject, std::vector<Name> args = {}) {
    return make(Process{Output{std::move(subject), std::move(args)}});
}
inline ProcessPtr sum(std::vector<InputBranch> branches) {
    return make(Process{Sum{std::move(branches)}});
}
inline ProcessPtr input(Name subject, std::vector<Name> params, ProcessPtr cont) {
    return sum({InputBranch{std::move(subject), std::move(params), std::move(cont)}});
}
inline ProcessPtr restrict_(Name bound, ProcessPtr body) {
    return make(Process{Restrict{std::move(bound), std::move(body)}});
}
inline ProcessPtr par(std::vector<ProcessPtr> components) {
    return make(Process{Par{std::move(components)}});
}
inline ProcessPtr repl(Name subject, std::vector<Name> params, ProcessPtr body) {
    return make(Process{Repl{std::move(subject), std::move(params), std::move(body)}});
}
inline ProcessPtr workunit(ProcessPtr body, ProcessPtr handler, Name unit) {
    return make(Process{Workunit{std::move(body), std::move(handler), std::move(unit)}});
}

inline bool is_nil(const ProcessPtr& p) { return std::holds_alternative<Nil>(p->node); }

template <class T>
const T* as(const ProcessPtr& p) {
    return std::get_if<T>(&p->node);
}

// ---- free names ----

namespace detail {
inline void free_names_into(const ProcessPtr& p, std::set<Name>& bound, std::set<Name>& out) {
    struct V {
        std::set<Name>& bound;
        std::set<Name>& out;
        void name(const Name& n) {
            if (!bound.contains(n)) out.insert(n);
        }
        void operator()(const Nil&) {}
        void operator()(const Output& o) {
            name(o.subject);
            for (auto& a : o.args) name(a);
        }
        void operator()(const Sum& s) {
            for (auto& b : s.branches) {
                name(b.subject);
                std::vector<Name> shadowed;
                for (auto& q : b.params)
                    if (bound.insert(q).second) shadowed.push_back(q);
                free_names_into(b.continuation, bound, out);
                for (auto& q : shadowed) bound.erase(q);
            }
        }
        void operator()(const Restrict& r) {
            bool fresh = bound.insert(r.bound).second;
            free_names_into(r.body, bound, out);
            if (fresh) bound.erase(r.bound);
        }
        void operator()(const Par& pp) {
            for (auto& c : pp.components) free_names_into(c, bound, out);
        }
        void operator()(const Repl& r) {
            name(r.subject);
            std::vector<Name> shadowed;
            for (auto& q : r.params)
                if (bound.insert(q).second) shadowed.push_back(q);
            free_names_into(r.body, bound, out);
            for (auto& q : shadowed) bound.erase(q);
        }
        void operator()(const Workunit& w) {
            free_names_into(w.body, bound, out);
            free_names_into(w.handler, bound, out);
            name(w.unit);
        }
    };
    std::visit(V{bound, out}, p->node);
}
} // namespace detail

inline std::set<Name> free_names(const ProcessPtr& p) {
    std::set<Name> bound, out;
    detail::free_names_into(p, bound, out);
    return out;
}

// Every name occurring in p, free or bound (binder positions included).
namespace detail {
inline void all_names_into(const ProcessPtr& p, std::set<Name>& out) {
    struct V {
        std::set<Name>& out;
        void operator()(const Nil&) {}
        void operator()(const Output& o) {
            out.insert(o.subject);
            out.insert(o.args.begin(), o.args.end());
        }
        void operator()(const Sum& s) {
            for (auto& b : s.branches) {
                out.insert(b.subject);
                out.insert(b.params.begin(), b.params.end());
                all_names_into(b.continuation, out);
            }
        }
        void operator()(const Restrict& r) {
            out.insert(r.bound);
            all_names_into(r.body, out);
        }
        void operator()(const Par& pp) {
            for (auto& c : pp.components) all_names_into(c, out);
        }
        void operator()(const Repl& r) {
            out.insert(r.subject);
            out.insert(r.params.begin(), r.params.end());
            all_names_into(r.body, out);
        }
        void operator()(const Workunit& w) {
            all_names_into(w.body, out);
            all_names_into(w.handler, out);
            out.insert(w.unit);
        }
    };
    std::visit(V{out}, p->node);
}
} // namespace detail

inline std::set<Name> all_names(const ProcessPtr& p) {
    std::set<Name> out;
    detail::all_names_into(p, out);
    return out;
}

// Primed variant of base that avoids everything in `avoid`.
inline Name fresh_name(const Name& base, const std::set<Name>& avoid) {
    Name n = base;
    while (avoid.contains(n)) n.text += '\'';
    return n;
}

// Reserved-namespace name "<prefix><k>" not occurring in `avoid`.
inline Name fresh_reserved(const std::string& prefix, const std::set<Name>& avoid) {
    for (int k = 1;; ++k) {
        Name n{prefix + std::to_string(k), 0};
        if (!avoid.contains(n)) return n;
    }
}

// ---- substitution ----

using Substitution = std::map<Name, Name>;

namespace detail {
inline Name apply_subst(const Name& n, const Substitution& s) {
    auto it = s.find(n);
    return it == s.end() ? n : it->second;
}

inline ProcessPtr substitute_rec(const ProcessPtr& p, const Substitution& s);

// Rename binders that would capture a substituted value, then substitute
// in the continuation. Params of one prefix are handled together.
inline void subst_binder(std::vector<Name>& params, ProcessPtr& body, Substitution s) {
    for (auto& q : params) s.erase(q);
    if (s.empty()) return;
    // names that must not be captured by these binders
    std::set<Name> values;
    for (auto& [k, v] : s) values.insert(v);
    std::set<Name> body_free = free_names(body);
    bool relevant = false;
    for (auto& [k, v] : s)
        if (body_free.contains(k)) { relevant = true; break; }
    if (!relevant) return; // nothing to replace below
    Substitution renames;
    std::set<Name> avoid = values;
    avoid.insert(body_free.begin(), body_free.end());
    for (auto& q : params) avoid.insert(q);
    for (auto& q : params) {
        if (values.contains(q)) {
            Name q2 = fresh_name(q, avoid);
            avoid.insert(q2);
            renames[q] = q2;
            q = q2;
        }
    }
    if (!renames.empty()) body = substitute_rec(body, renames);
    body = substitute_rec(body, s);
}

inline ProcessPtr substitute_rec(const ProcessPtr& p, const Substitution& s) {
    if (s.empty()) return p;
    struct V {
        const ProcessPtr& p;
        const Substitution& s;
        ProcessPtr operator()(const Nil&) { return p; }
        ProcessPtr operator()(const Output& o) {
            Output r{apply_subst(o.subject, s), o.args};
            for (auto& a : r.args) a = apply_subst(a, s);
            return make(Process{std::move(r)});
        }
        ProcessPtr operator()(const Sum& sm) {
            std::vector<InputBranch> bs;
            bs.reserve(sm.branches.size());
            for (auto& b : sm.branches) {
                InputBranch nb{apply_subst(b.subject, s), b.params, b.continuation};
                subst_binder(nb.params, nb.continuation, s);
                bs.push_back(std::move(nb));
            }
            return sum(std::move(bs));
        }
        ProcessPtr operator()(const Restrict& r) {
            std::vector<Name> binders{r.bound};
            ProcessPtr body = r.body;
            subst_binder(binders, body, s);
            return restrict_(binders[0], std::move(body));
        }
        ProcessPtr operator()(const Par& pp) {
            std::vector<ProcessPtr> cs;
            cs.reserve(pp.components.size());
            for (auto& c : pp.components) cs.push_back(substitute_rec(c, s));
            return par(std::move(cs));
        }
        ProcessPtr operator()(const Repl& r) {
            Repl nr{apply_subst(r.subject, s), r.params, r.body};
            subst_binder(nr.params, nr.body, s);
            return make(Process{std::move(nr)});
        }
        ProcessPtr operator()(const Workunit& w) {
            return workunit(substitute_rec(w.body, s), substitute_rec(w.handler, s),
                            apply_subst(w.unit, s));
        }
    };
    return std::visit(V{p, s}, p->node);
}
} // namespace detail

inline ProcessPtr substitute(const ProcessPtr& p, const Substitution& s) {
    return detail::substitute_rec(p, s);
}

// ---- alpha-equivalence ----

namespace detail {
// Structural serialization with binders replaced by de-Bruijn-style
// levels; free names keep their identity. No reordering.
inline void alpha_ser(const ProcessPtr& p, std::map<Name, int>& env, int depth,
                      std::string& out) {
    auto ref = [&](const Name& n) {
        auto it = env.find(n);
        if (it != env.end())
            out += "b" + std::to_string(it->second);
        else
            out += "f" + n.text + (n.uid ? "#" + std::to_string(n.uid) : "");
        out += ',';
    };
    auto with_binders = [&](const std::vector<Name>& params, const ProcessPtr& body) {
        std::map<Name, int> saved;
        int d = depth;
        for (auto& q : params) {
            auto it = env.find(q);
            if (it != env.end()) saved.emplace(q, it->second);
            env[q] = d++;
        }
        alpha_ser(body, env, d, out);
        for (auto& q : params) {
            auto it = saved.find(q);
            if (it != saved.end())
                env[q] = it->second;
            else
                env.erase(q);
        }
    };
    struct V {
        decltype(ref)& ref_fn;
        decltype(with_binders)& wb;
        std::map<Name, int>& env;
        int depth;
        std::string& out;
        void operator()(const Nil&) { out += "0"; }
        void operator()(const Output& o) {
            out += "O(";
            ref_fn(o.subject);
            out += ';';
            for (auto& a : o.args) ref_fn(a);
            out += ')';
        }
        void operator()(const Sum& s) {
            out += "S{";
            for (auto& b : s.branches) {
                out += "I(";
                ref_fn(b.subject);
                out += std::to_string(b.params.size()) + ';';
                wb(b.params, b.continuation);
                out += ')';
            }
            out += '}';
        }
        void operator()(const Restrict& r) {
            out += "N.";
            wb({r.bound}, r.body);
        }
        void operator()(const Par& pp) {
            out += "P[";
            for (auto& c : pp.components) {
                alpha_ser(c, env, depth, out);
                out += ',';
            }
            out += ']';
        }
        void operator()(const Repl& r) {
            out += "R(";
            ref_fn(r.subject);
            out += std::to_string(r.params.size()) + ';';
            wb(r.params, r.body);
            out += ')';
        }
        void operator()(const Workunit& w) {
            out += "W(";
            ref_fn(w.unit);
            out += ';';
            alpha_ser(w.body, env, depth, out);
            out += ';';
            alpha_ser(w.handler, env, depth, out);
            out += ')';
        }
    };
    std::visit(V{ref, with_binders, env, depth, out}, p->node);
}
} // namespace detail

inline std::string alpha_key(const ProcessPtr& p) {
    std::map<Name, int> env;
    std::string out;
    detail::alpha_ser(p, env, 0, out);
    return out;
}

inline bool alpha_eq(const ProcessPtr& p, const ProcessPtr& q) {
    return alpha_key(p) == alpha_key(q);
}

// ---- well-formedness ----

struct Violation {
    std::string message;
};

namespace detail {
inline void check_params(const std::vector<Name>& params, const std::string& where,
                         std::vector<Violation>& out) {
    std::set<Name> seen;
    for (auto& q : params)
        if (!seen.insert(q).second)
            out.push_back({"duplicate parameter '" + q.text + "' in " + where});
}

inline void well_formed_rec(const ProcessPtr& p, std::vector<Violation>& out) {
    struct V {
        std::vector<Violation>& out;
        void operator()(const Nil&) {}
        void operator()(const Output&) {}
        void operator()(const Sum& s) {
            if (s.branches.empty()) out.push_back({"empty alternative composition"});
            for (auto& b : s.branches) {
                check_params(b.params, "input on '" + b.subject.text + "'", out);
                well_formed_rec(b.continuation, out);
            }
        }
        void operator()(const Restrict& r) { well_formed_rec(r.body, out); }
        void operator()(const Par& pp) {
            if (pp.components.size() < 2)
                out.push_back({"parallel composition with fewer than 2 components"});
            for (auto& c : pp.components) well_formed_rec(c, out);
        }
        void operator()(const Repl& r) {
            check_params(r.params, "replicated input on '" + r.subject.text + "'", out);
            well_formed_rec(r.body, out);
        }
        void operator()(const Workunit& w) {
            well_formed_rec(w.body, out);
            well_formed_rec(w.handler, out);
        }
    };
    std::visit(V{out}, p->node);
}
} // namespace detail

inline std::vector<Violation> well_formed(const ProcessPtr& p) {
    std::vector<Violation> out;
    detail::well_formed_rec(p, out);
    return out;
}

// Static lint: subjects used with inconsistent arities mask modeling bugs.
inline std::vector<std::string> arity_lint(const ProcessPtr& p) {
    std::map<std::string, std::set<std::size_t>> arities;
    struct Walk {
        std::map<std::string, std::set<std::size_t>>& arities;
        void go(const ProcessPtr& p) {
            struct V {
                Walk& w;
                void operator()(const Nil&) {}
                void operator()(const Output& o) {
                    w.arities[o.subject.text].insert(o.args.size());
                }
                void operator()(const Sum& s) {
                    for (auto& b : s.branches) {
                        w.arities[b.subject.text].insert(b.params.size());
                        w.go(b.continuation);
                    }
                }
                void operator()(const Restrict& r) { w.go(r.body); }
                void operator()(const Par& pp) {
                    for (auto& c : pp.components) w.go(c);
                }
                void operator()(const Repl& r) {
                    w.arities[r.subject.text].insert(r.params.size());
                    w.go(r.body);
                }
                void operator()(const Workunit& wu) {
                    w.go(wu.body);
                    w.go(wu.handler);
                }
            };
            std::visit(V{*this}, p->node);
        }
    };
    Walk{arities}.go(p);
    std::vector<std::string> warnings;
    for (auto& [subject, set] : arities)
        if (set.size() > 1)
            warnings.push_back("subject '" + subject + "' used with inconsistent arities");
    return warnings;
}

inline std::size_t subterm_count(const ProcessPtr& p) {
    struct V {
        std::size_t operator()(const Nil&) const { return 1; }
        std::size_t operator()(const Output&) const { return 1; }
        std::size_t operator()(const Sum& s) const {
            std::size_t n = 1;
            for (auto& b : s.branches) n += subterm_count(b.continuation);
            return n;
        }
        std::size_t operator()(const Restrict& r) const { return 1 + subterm_count(r.body); }
        std::size_t operator()(const Par& pp) const {
            std::size_t n = 1;
            for (auto& c : pp.components) n += subterm_count(c);
            return n;
        }
        std::size_t operator()(const Repl& r) const { return 1 + subterm_count(r.body); }
        std::size_t operator()(const Workunit& w) const {
            return 1 + subterm_count(w.body) + subterm_count(w.handler);
        }
    };
    return std::visit(V{}, p->node);
}

} // namespace webpi
