#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace abstraq {

// Errors thrown by library operations. Validation-style reports are returned
// as value lists instead; exceptions are reserved for contract violations.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroProbabilityEvidence : Error {
    using Error::Error;
};

struct NonTotalClustering : Error {
    using Error::Error;
};

struct CyclicInducedGraph : Error {
    using Error::Error;
};

struct InconsistentAbstraction : Error {
    using Error::Error;
};

struct HypothesisViolated : Error {
    using Error::Error;
};

struct GenerationExhausted : Error {
    using Error::Error;
};

// Mixed-radix indexing. Convention everywhere: the LAST position varies
// fastest, i.e. index = ((v0*c1 + v1)*c2 + v2)...
inline std::size_t radix_size(const std::vector<int>& cards) {
    std::size_t n = 1;
    for (int c : cards) n *= static_cast<std::size_t>(c);
    return n;
}

inline std::size_t radix_encode(const std::vector<int>& cards, const std::vector<int>& vals) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < cards.size(); ++i)
        idx = idx * static_cast<std::size_t>(cards[i]) + static_cast<std::size_t>(vals[i]);
    return idx;
}

inline void radix_decode(const std::vector<int>& cards, std::size_t idx, std::vector<int>& out) {
    out.resize(cards.size());
    for (std::size_t i = cards.size(); i-- > 0;) {
        out[i] = static_cast<int>(idx % static_cast<std::size_t>(cards[i]));
        idx /= static_cast<std::size_t>(cards[i]);
    }
}

inline std::vector<int> radix_decode(const std::vector<int>& cards, std::size_t idx) {
    std::vector<int> out;
    radix_decode(cards, idx, out);
    return out;
}

struct Variable {
    std::string name;
    std::vector<std::string> domain;  // value labels, index = value

    int card() const { return static_cast<int>(domain.size()); }
};

// Dense functional table for one endogenous variable. The table is indexed
// mixed-radix over endo_parents then exo_parents, last listed parent fastest;
// entries are value indices into the child domain.
struct Mechanism {
    std::string child;
    std::vector<std::string> endo_parents;
    std::vector<std::string> exo_parents;
    std::vector<int> table;
};

// Hard intervention: target endogenous variable names to value indices.
using Intervention = std::map<std::string, int>;

struct Scm {
    std::vector<Variable> endogenous;
    std::vector<Variable> exogenous;
    std::vector<Mechanism> mechanisms;           // one per endogenous variable
    std::vector<std::vector<double>> exo_probs;  // aligned with exogenous

    int endo_index(const std::string& name) const {
        for (std::size_t i = 0; i < endogenous.size(); ++i)
            if (endogenous[i].name == name) return static_cast<int>(i);
        return -1;
    }

    int exo_index(const std::string& name) const {
        for (std::size_t i = 0; i < exogenous.size(); ++i)
            if (exogenous[i].name == name) return static_cast<int>(i);
        return -1;
    }

    const Mechanism* mechanism_of(const std::string& child) const {
        for (const auto& m : mechanisms)
            if (m.child == child) return &m;
        return nullptr;
    }

    std::vector<int> endo_cards() const {
        std::vector<int> c;
        c.reserve(endogenous.size());
        for (const auto& v : endogenous) c.push_back(v.card());
        return c;
    }

    std::vector<int> exo_cards() const {
        std::vector<int> c;
        c.reserve(exogenous.size());
        for (const auto& v : exogenous) c.push_back(v.card());
        return c;
    }
};

// Dense probability table over an ordered list of variables, mixed-radix
// indexed with the last scope variable fastest.
struct Distribution {
    std::vector<std::string> scope;
    std::vector<int> cards;
    std::vector<double> probs;

    int scope_index(const std::string& name) const {
        for (std::size_t i = 0; i < scope.size(); ++i)
            if (scope[i] == name) return static_cast<int>(i);
        return -1;
    }

    double mass() const {
        double s = 0.0;
        for (double p : probs) s += p;
        return s;
    }
};

inline double total_variation(const Distribution& a, const Distribution& b) {
    if (a.scope != b.scope || a.probs.size() != b.probs.size())
        throw Error("total_variation: distributions have different scopes");
    double s = 0.0;
    for (std::size_t i = 0; i < a.probs.size(); ++i) s += std::fabs(a.probs[i] - b.probs[i]);
    return 0.5 * s;
}

inline double max_abs_diff(const Distribution& a, const Distribution& b) {
    if (a.scope != b.scope || a.probs.size() != b.probs.size())
        throw Error("max_abs_diff: distributions have different scopes");
    double m = 0.0;
    for (std::size_t i = 0; i < a.probs.size(); ++i) m = std::max(m, std::fabs(a.probs[i] - b.probs[i]));
    return m;
}

enum class Metric { tv, max_abs };

inline double distance(const Distribution& a, const Distribution& b, Metric m) {
    return m == Metric::tv ? total_variation(a, b) : max_abs_diff(a, b);
}

namespace detail {

// Topological order of the endogenous variables under the declared
// parent relation. Returns empty on a cycle.
inline std::vector<int> endo_topo_order(const Scm& m) {
    const int n = static_cast<int>(m.endogenous.size());
    std::vector<std::vector<int>> children(n);
    std::vector<int> indeg(n, 0);
    for (const auto& f : m.mechanisms) {
        int c = m.endo_index(f.child);
        if (c < 0) continue;
        for (const auto& p : f.endo_parents) {
            int pi = m.endo_index(p);
            if (pi < 0) continue;
            children[pi].push_back(c);
            ++indeg[c];
        }
    }
    std::vector<int> order;
    std::vector<int> queue;
    for (int i = 0; i < n; ++i)
        if (indeg[i] == 0) queue.push_back(i);
    while (!queue.empty()) {
        int v = queue.front();
        queue.erase(queue.begin());
        order.push_back(v);
        for (int c : children[v])
            if (--indeg[c] == 0) queue.push_back(c);
    }
    if (static_cast<int>(order.size()) != n) return {};
    return order;
}

// Precomputed per-variable lookup info so the inner enumeration loop does
// no string work.
struct EvalPlan {
    struct Node {
        int var;                      // endo index
        const std::vector<int>* table;
        std::vector<int> endo_parent_idx;
        std::vector<int> exo_parent_idx;
        std::vector<int> parent_cards;  // endo parents then exo parents
    };
    std::vector<Node> nodes;  // in topological order
};

inline EvalPlan build_eval_plan(const Scm& m, const std::vector<int>& topo) {
    EvalPlan plan;
    plan.nodes.reserve(topo.size());
    for (int vi : topo) {
        const Mechanism* f = m.mechanism_of(m.endogenous[vi].name);
        if (!f) throw Error("missing mechanism for " + m.endogenous[vi].name);
        EvalPlan::Node node;
        node.var = vi;
        node.table = &f->table;
        for (const auto& p : f->endo_parents) {
            node.endo_parent_idx.push_back(m.endo_index(p));
            node.parent_cards.push_back(m.endogenous[m.endo_index(p)].card());
        }
        for (const auto& u : f->exo_parents) {
            node.exo_parent_idx.push_back(m.exo_index(u));
            node.parent_cards.push_back(m.exogenous[m.exo_index(u)].card());
        }
        plan.nodes.push_back(std::move(node));
    }
    return plan;
}

inline void eval_with_plan(const EvalPlan& plan, const std::vector<int>& u, std::vector<int>& v) {
    for (const auto& node : plan.nodes) {
        std::size_t idx = 0;
        std::size_t k = 0;
        for (int pi : node.endo_parent_idx)
            idx = idx * static_cast<std::size_t>(node.parent_cards[k++]) + static_cast<std::size_t>(v[pi]);
        for (int ui : node.exo_parent_idx)
            idx = idx * static_cast<std::size_t>(node.parent_cards[k++]) + static_cast<std::size_t>(u[ui]);
        v[node.var] = (*node.table)[idx];
    }
}

}  // namespace detail

// Structural validation. Returns a list of human-readable violations;
// empty means the model is well formed.
inline std::vector<std::string> validate_scm(const Scm& m) {
    std::vector<std::string> out;
    std::set<std::string> names;
    for (const auto& v : m.endogenous) {
        if (!names.insert(v.name).second) out.push_back("duplicate variable name: " + v.name);
        if (v.domain.empty()) out.push_back("empty domain for variable: " + v.name);
        std::set<std::string> labels(v.domain.begin(), v.domain.end());
        if (labels.size() != v.domain.size()) out.push_back("duplicate domain labels for variable: " + v.name);
    }
    for (const auto& v : m.exogenous) {
        if (!names.insert(v.name).second) out.push_back("duplicate variable name: " + v.name);
        if (v.domain.empty()) out.push_back("empty domain for variable: " + v.name);
        std::set<std::string> labels(v.domain.begin(), v.domain.end());
        if (labels.size() != v.domain.size()) out.push_back("duplicate domain labels for variable: " + v.name);
    }

    std::set<std::string> with_mechanism;
    for (const auto& f : m.mechanisms) {
        if (m.endo_index(f.child) < 0) {
            out.push_back("mechanism child is not an endogenous variable: " + f.child);
            continue;
        }
        if (!with_mechanism.insert(f.child).second) {
            out.push_back("multiple mechanisms for variable: " + f.child);
            continue;
        }
        bool parents_ok = true;
        std::vector<int> cards;
        for (const auto& p : f.endo_parents) {
            if (p == f.child) {
                out.push_back("variable listed as its own parent: " + f.child);
                parents_ok = false;
            } else if (m.endo_index(p) < 0) {
                out.push_back("unknown endogenous parent " + p + " of " + f.child);
                parents_ok = false;
            } else {
                cards.push_back(m.endogenous[m.endo_index(p)].card());
            }
        }
        for (const auto& u : f.exo_parents) {
            if (m.exo_index(u) < 0) {
                out.push_back("unknown exogenous parent " + u + " of " + f.child);
                parents_ok = false;
            } else {
                cards.push_back(m.exogenous[m.exo_index(u)].card());
            }
        }
        if (!parents_ok) continue;
        if (f.table.size() != radix_size(cards)) {
            out.push_back("table size mismatch for " + f.child);
            continue;
        }
        const int child_card = m.endogenous[m.endo_index(f.child)].card();
        for (int e : f.table)
            if (e < 0 || e >= child_card) {
                out.push_back("table entry out of child domain for " + f.child);
                break;
            }
    }
    for (const auto& v : m.endogenous)
        if (!with_mechanism.count(v.name)) out.push_back("missing mechanism for variable: " + v.name);

    if (m.exo_probs.size() != m.exogenous.size()) {
        out.push_back("exogenous distribution count mismatch");
    } else {
        for (std::size_t i = 0; i < m.exogenous.size(); ++i) {
            const auto& p = m.exo_probs[i];
            if (static_cast<int>(p.size()) != m.exogenous[i].card()) {
                out.push_back("distribution length mismatch for " + m.exogenous[i].name);
                continue;
            }
            double s = 0.0;
            bool neg = false;
            for (double x : p) {
                if (x < 0.0) neg = true;
                s += x;
            }
            if (neg) out.push_back("negative probability for " + m.exogenous[i].name);
            if (std::fabs(s - 1.0) > 1e-12)
                out.push_back("distribution not normalized for " + m.exogenous[i].name);
        }
    }

    if (out.empty() && detail::endo_topo_order(m).empty() && !m.endogenous.empty())
        out.push_back("cycle in the declared parent relation");
    return out;
}

// Mechanism replacement semantics of do(X=x): the targets lose their parents
// and are pinned to constants; everything else is untouched.
inline Scm intervene(const Scm& m, const Intervention& dox) {
    Scm out = m;
    for (const auto& [name, value] : dox) {
        int vi = m.endo_index(name);
        if (vi < 0) throw Error("intervene: unknown endogenous variable " + name);
        if (value < 0 || value >= m.endogenous[vi].card())
            throw Error("intervene: value out of domain for " + name);
        for (auto& f : out.mechanisms)
            if (f.child == name) {
                f.endo_parents.clear();
                f.exo_parents.clear();
                f.table = {value};
            }
    }
    return out;
}

// Deterministic propagation of one exogenous assignment through the
// mechanisms of the intervened model. u is indexed by exogenous order.
inline std::vector<int> evaluate(const Scm& m, const std::vector<int>& u, const Intervention& dox) {
    Scm w = dox.empty() ? m : intervene(m, dox);
    auto topo = detail::endo_topo_order(w);
    if (topo.empty() && !w.endogenous.empty()) throw CyclicInducedGraph("evaluate: cyclic parent relation");
    auto plan = detail::build_eval_plan(w, topo);
    std::vector<int> v(w.endogenous.size(), 0);
    detail::eval_with_plan(plan, u, v);
    return v;
}

// Exact joint over all endogenous variables by enumeration of the exogenous
// space: propagate each u in topological order and accumulate its mass.
inline Distribution joint_distribution(const Scm& m, const Intervention& dox = {}) {
    Scm w = dox.empty() ? m : intervene(m, dox);
    auto topo = detail::endo_topo_order(w);
    if (topo.empty() && !w.endogenous.empty()) throw CyclicInducedGraph("joint_distribution: cyclic parent relation");
    auto plan = detail::build_eval_plan(w, topo);

    Distribution d;
    for (const auto& v : w.endogenous) {
        d.scope.push_back(v.name);
        d.cards.push_back(v.card());
    }
    d.probs.assign(radix_size(d.cards), 0.0);

    const auto exo_cards = w.exo_cards();
    const std::size_t n_u = radix_size(exo_cards);
    std::vector<int> u(exo_cards.size(), 0);
    std::vector<int> v(w.endogenous.size(), 0);
    for (std::size_t iu = 0; iu < n_u; ++iu) {
        radix_decode(exo_cards, iu, u);
        double pu = 1.0;
        for (std::size_t k = 0; k < u.size(); ++k) pu *= w.exo_probs[k][u[k]];
        detail::eval_with_plan(plan, u, v);
        d.probs[radix_encode(d.cards, v)] += pu;
    }
    return d;
}

// Sum out everything not in keep; the result scope is exactly keep, in the
// given order (which also permits pure reordering).
inline Distribution marginalize(const Distribution& d, const std::vector<std::string>& keep) {
    std::vector<int> pos;
    pos.reserve(keep.size());
    std::set<std::string> seen;
    for (const auto& name : keep) {
        int i = d.scope_index(name);
        if (i < 0) throw Error("marginalize: variable not in scope: " + name);
        if (!seen.insert(name).second) throw Error("marginalize: duplicate variable: " + name);
        pos.push_back(i);
    }
    Distribution out;
    out.scope = keep;
    for (int i : pos) out.cards.push_back(d.cards[i]);
    out.probs.assign(radix_size(out.cards), 0.0);

    std::vector<int> vals(d.cards.size());
    std::vector<int> kept(pos.size());
    for (std::size_t idx = 0; idx < d.probs.size(); ++idx) {
        radix_decode(d.cards, idx, vals);
        for (std::size_t k = 0; k < pos.size(); ++k) kept[k] = vals[pos[k]];
        out.probs[radix_encode(out.cards, kept)] += d.probs[idx];
    }
    return out;
}

// Renormalized slice at the evidence values. The evidence variables leave
// the scope; remaining variables keep their relative order.
inline Distribution condition(const Distribution& d, const std::map<std::string, int>& evidence) {
    std::vector<int> fixed(d.cards.size(), -1);
    for (const auto& [name, value] : evidence) {
        int i = d.scope_index(name);
        if (i < 0) throw Error("condition: variable not in scope: " + name);
        if (value < 0 || value >= d.cards[i]) throw Error("condition: value out of domain for " + name);
        fixed[i] = value;
    }
    Distribution out;
    std::vector<int> keep_pos;
    for (std::size_t i = 0; i < d.scope.size(); ++i)
        if (fixed[i] < 0) {
            out.scope.push_back(d.scope[i]);
            out.cards.push_back(d.cards[i]);
            keep_pos.push_back(static_cast<int>(i));
        }
    out.probs.assign(radix_size(out.cards), 0.0);

    double z = 0.0;
    std::vector<int> vals(d.cards.size());
    std::vector<int> kept(keep_pos.size());
    for (std::size_t idx = 0; idx < d.probs.size(); ++idx) {
        radix_decode(d.cards, idx, vals);
        bool match = true;
        for (std::size_t i = 0; i < vals.size(); ++i)
            if (fixed[i] >= 0 && vals[i] != fixed[i]) {
                match = false;
                break;
            }
        if (!match) continue;
        for (std::size_t k = 0; k < keep_pos.size(); ++k) kept[k] = vals[keep_pos[k]];
        out.probs[radix_encode(out.cards, kept)] += d.probs[idx];
        z += d.probs[idx];
    }
    if (z <= 1e-12) throw ZeroProbabilityEvidence("condition: evidence has zero probability");
    for (double& p : out.probs) p /= z;
    return out;
}

enum class Layer { l1, l2 };

// P(Y | X=x) at layer 1, P(Y | do(X=x)) at layer 2. X and Y are disjoint
// ordered lists; the result scope is Y in the given order.
inline Distribution interventional_query(const Scm& m, const std::vector<std::string>& y,
                                         const std::vector<std::string>& x, const std::vector<int>& xv,
                                         Layer layer) {
    if (x.size() != xv.size()) throw Error("interventional_query: value list length mismatch");
    std::set<std::string> ys(y.begin(), y.end());
    for (const auto& n : x)
        if (ys.count(n)) throw Error("interventional_query: target and intervention sets overlap at " + n);
    if (layer == Layer::l2) {
        Intervention dox;
        for (std::size_t i = 0; i < x.size(); ++i) dox[x[i]] = xv[i];
        return marginalize(joint_distribution(m, dox), y);
    }
    std::vector<std::string> keep = y;
    keep.insert(keep.end(), x.begin(), x.end());
    Distribution d = marginalize(joint_distribution(m, {}), keep);
    if (x.empty()) return d;
    std::map<std::string, int> ev;
    for (std::size_t i = 0; i < x.size(); ++i) ev[x[i]] = xv[i];
    return condition(d, ev);
}

// P(targets | do(dox), evidence). Shared plumbing for checks that mix the
// two layers in one query.
inline Distribution mixed_query(const Scm& m, const std::vector<std::string>& targets, const Intervention& dox,
                                const std::map<std::string, int>& evidence) {
    std::vector<std::string> keep = targets;
    for (const auto& [name, value] : evidence) {
        (void)value;
        keep.push_back(name);
    }
    Distribution d = marginalize(joint_distribution(m, dox), keep);
    if (evidence.empty()) return d;
    return condition(d, evidence);
}

}  // namespace abstraq
