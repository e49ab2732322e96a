#pragma once

// Canonical pretty-printer. Minimal parentheses: prefix '.' binds
// tightest, then '+', then '|'; 'new ... in' extends maximally right.

#include <string>

#include "term.hpp"

namespace webpi {

namespace detail {

inline std::string print_name(const Name& n) {
    std::string s = n.text;
    for (int i = 0; i < n.uid; ++i) s += '\'';
    return s;
}

inline std::string print_names(const std::vector<Name>& ns) {
    std::string s;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        if (i) s += ", ";
        s += print_name(ns[i]);
    }
    return s;
}

enum class Prec { Par, Sum, Atom };

inline std::string print_rec(const ProcessPtr& p, Prec ctx);

inline std::string print_branch(const InputBranch& b) {
    return print_name(b.subject) + "?(" + print_names(b.params) + ")." +
           print_rec(b.continuation, Prec::Atom);
}

// (z) unit z { P ; Q } with machine-fresh z renders as the anonymous unit
inline const Workunit* anonymous_unit(const Restrict& r) {
    auto* w = as<Workunit>(r.body);
    if (!w || w->unit != r.bound || !is_reserved_name(r.bound.text)) return nullptr;
    if (free_names(w->body).contains(r.bound) || free_names(w->handler).contains(r.bound))
        return nullptr;
    return w;
}

inline std::string print_rec(const ProcessPtr& p, Prec ctx) {
    struct V {
        Prec ctx;
        std::string operator()(const Nil&) const { return "0"; }
        std::string operator()(const Output& o) const {
            return print_name(o.subject) + "!(" + print_names(o.args) + ")";
        }
        std::string operator()(const Sum& s) const {
            std::string out;
            for (std::size_t i = 0; i < s.branches.size(); ++i) {
                if (i) out += " + ";
                out += print_branch(s.branches[i]);
            }
            if (s.branches.size() > 1 && ctx == Prec::Atom) return "(" + out + ")";
            return out;
        }
        std::string operator()(const Restrict& r) const {
            if (auto* w = anonymous_unit(r))
                return "unit { " + print_rec(w->body, Prec::Par) + " ; " +
                       print_rec(w->handler, Prec::Par) + " }";
            std::vector<Name> binders{r.bound};
            ProcessPtr body = r.body;
            while (auto* rr = as<Restrict>(body)) {
                if (anonymous_unit(*rr)) break;
                binders.push_back(rr->bound);
                body = rr->body;
            }
            std::string out = "new " + print_names(binders) + " in " +
                              print_rec(body, Prec::Par);
            if (ctx != Prec::Par) return "(" + out + ")";
            return out;
        }
        std::string operator()(const Par& pp) const {
            std::string out;
            for (std::size_t i = 0; i < pp.components.size(); ++i) {
                if (i) out += " | ";
                out += print_rec(pp.components[i], Prec::Sum);
            }
            if (ctx != Prec::Par) return "(" + out + ")";
            return out;
        }
        std::string operator()(const Repl& r) const {
            return "*" + print_name(r.subject) + "?(" + print_names(r.params) + ")." +
                   print_rec(r.body, Prec::Atom);
        }
        std::string operator()(const Workunit& w) const {
            return "unit " + print_name(w.unit) + " { " + print_rec(w.body, Prec::Par) +
                   " ; " + print_rec(w.handler, Prec::Par) + " }";
        }
    };
    return std::visit(V{ctx}, p->node);
}

} // namespace detail

inline std::string print(const ProcessPtr& p) { return detail::print_rec(p, detail::Prec::Par); }

} // namespace webpi
