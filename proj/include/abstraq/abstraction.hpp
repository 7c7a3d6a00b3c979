#pragma once

#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "clustering.hpp"
#include "graph.hpp"
#include "scm.hpp"

namespace abstraq {

// Surjective value map for one abstract variable: `map` is indexed
// mixed-radix over the ordered pre-image members, entries are abstract
// value indices.
struct AlphaMap {
    int codomain_size = 0;
    std::vector<int> map;
};

// Variable-level abstraction: which base variables are relevant, how they
// group into abstract variables, and the per-group value maps. Pre-image
// member order is the order of appearance in `relevant`.
struct Abstraction {
    std::vector<std::string> relevant;
    std::vector<std::pair<std::string, std::vector<std::string>>> preimages;  // abstract var -> ordered members
    std::map<std::string, AlphaMap> alpha;

    std::map<std::string, std::string> phi() const {
        std::map<std::string, std::string> out;
        for (const auto& [av, members] : preimages)
            for (const auto& v : members) out[v] = av;
        return out;
    }

    std::vector<std::string> abstract_vars() const {
        std::vector<std::string> out;
        for (const auto& [av, members] : preimages) out.push_back(av);
        return out;
    }

    const std::vector<std::string>* members_of(const std::string& av) const {
        for (const auto& [v, members] : preimages)
            if (v == av) return &members;
        return nullptr;
    }

    bool bijective() const {
        for (const auto& [av, a] : alpha) {
            if (static_cast<int>(a.map.size()) != a.codomain_size) return false;
            std::vector<bool> hit(a.codomain_size, false);
            for (int x : a.map) {
                if (x < 0 || x >= a.codomain_size || hit[x]) return false;
                hit[x] = true;
            }
        }
        return true;
    }

    Clustering clustering_view(const Scm& base) const {
        Clustering c;
        for (const auto& [av, members] : preimages) c.clusters.push_back({av, members});
        std::set<std::string> rel(relevant.begin(), relevant.end());
        for (const auto& v : base.endogenous)
            if (!rel.count(v.name)) c.remainder.insert(v.name);
        return c;
    }
};

inline std::vector<std::string> validate_abstraction(const Scm& base, const Abstraction& a) {
    std::vector<std::string> out;
    std::set<std::string> rel;
    for (const auto& v : a.relevant) {
        if (base.endo_index(v) < 0) out.push_back("relevant variable not in base model: " + v);
        if (!rel.insert(v).second) out.push_back("duplicate relevant variable: " + v);
    }
    std::set<std::string> covered;
    for (const auto& [av, members] : a.preimages) {
        if (members.empty()) out.push_back("empty pre-image for abstract variable: " + av);
        auto it = a.alpha.find(av);
        if (it == a.alpha.end()) {
            out.push_back("missing alpha map for abstract variable: " + av);
            continue;
        }
        std::vector<int> cards;
        bool ok = true;
        for (const auto& v : members) {
            if (!rel.count(v)) {
                out.push_back("pre-image member not listed as relevant: " + v);
                ok = false;
            }
            if (!covered.insert(v).second) {
                out.push_back("variable in two pre-images: " + v);
                ok = false;
            }
            int vi = base.endo_index(v);
            if (vi >= 0) cards.push_back(base.endogenous[vi].card());
        }
        if (!ok) continue;
        const AlphaMap& am = it->second;
        if (am.map.size() != radix_size(cards)) {
            out.push_back("alpha map length mismatch for " + av);
            continue;
        }
        std::vector<bool> hit(am.codomain_size, false);
        bool in_range = true;
        for (int x : am.map) {
            if (x < 0 || x >= am.codomain_size) {
                in_range = false;
                break;
            }
            hit[x] = true;
        }
        if (!in_range) {
            out.push_back("alpha map value out of range for " + av);
            continue;
        }
        for (bool h : hit)
            if (!h) {
                out.push_back("alpha map not surjective for " + av);
                break;
            }
    }
    for (const auto& v : a.relevant)
        if (!covered.count(v)) out.push_back("relevant variable not covered by any pre-image: " + v);
    return out;
}

// Identity encoding of each cluster's product domain: one abstract variable
// per cluster, codomain size the product of member cardinalities, map the
// identity permutation.
inline Abstraction canonical_alpha(const Scm& m, const Clustering& c) {
    Abstraction a;
    for (const auto& [cid, members] : c.clusters) {
        std::vector<int> cards;
        for (const auto& v : members) {
            int vi = m.endo_index(v);
            if (vi < 0) throw Error("canonical_alpha: unknown variable " + v);
            cards.push_back(m.endogenous[vi].card());
            a.relevant.push_back(v);
        }
        AlphaMap am;
        am.codomain_size = static_cast<int>(radix_size(cards));
        am.map.resize(am.codomain_size);
        for (int i = 0; i < am.codomain_size; ++i) am.map[i] = i;
        a.preimages.push_back({cid, members});
        a.alpha[cid] = am;
    }
    return a;
}

// Pushforward of a base distribution through the abstraction: mass
// aggregation over alpha pre-images. The input scope must be exactly the
// concatenated pre-images of `targets`, cluster by cluster.
inline Distribution pushforward(const Abstraction& a, const Distribution& dist,
                                const std::vector<std::string>& targets) {
    std::vector<std::string> expected;
    std::vector<std::vector<int>> member_pos;
    std::vector<std::vector<int>> member_cards;
    Distribution out;
    for (const auto& av : targets) {
        const auto* members = a.members_of(av);
        if (!members) throw Error("pushforward: unknown abstract variable " + av);
        std::vector<int> pos;
        for (const auto& v : *members) {
            expected.push_back(v);
            pos.push_back(static_cast<int>(expected.size()) - 1);
        }
        member_pos.push_back(pos);
        out.scope.push_back(av);
        out.cards.push_back(a.alpha.at(av).codomain_size);
    }
    if (dist.scope != expected) {
        std::string msg = "pushforward: distribution scope must be the concatenated pre-images (";
        for (std::size_t i = 0; i < expected.size(); ++i) msg += (i ? "," : "") + expected[i];
        msg += ")";
        throw Error(msg);
    }
    for (auto& pos : member_pos) {
        std::vector<int> cards;
        for (int p : pos) cards.push_back(dist.cards[p]);
        member_cards.push_back(cards);
    }
    out.probs.assign(radix_size(out.cards), 0.0);
    std::vector<int> vals(dist.cards.size());
    std::vector<int> avals(targets.size());
    for (std::size_t idx = 0; idx < dist.probs.size(); ++idx) {
        if (dist.probs[idx] == 0.0) continue;
        radix_decode(dist.cards, idx, vals);
        for (std::size_t k = 0; k < targets.size(); ++k) {
            std::vector<int> mv;
            mv.reserve(member_pos[k].size());
            for (int p : member_pos[k]) mv.push_back(vals[p]);
            avals[k] = a.alpha.at(targets[k]).map[radix_encode(member_cards[k], mv)];
        }
        out.probs[radix_encode(out.cards, avals)] += dist.probs[idx];
    }
    return out;
}

namespace detail {

// Dependency closure of one cluster: which base variables get substituted
// into the cluster mechanism, which other clusters feed it, and which
// exogenous variables it reads.
struct ClusterClosure {
    std::set<std::string> internal;        // members plus substituted remainder variables
    std::set<std::string> external_vars;   // variables in other clusters whose values are read
    std::vector<std::string> parent_clusters;  // cluster order
    std::vector<std::string> exo_parents;      // base exogenous order
};

inline ClusterClosure cluster_closure(const Scm& m, const Clustering& c, const std::string& cid) {
    ClusterClosure out;
    const auto* members = c.members_of(cid);
    std::set<std::string> member_set(members->begin(), members->end());
    std::set<std::string> exo;
    std::vector<std::string> work(members->begin(), members->end());
    while (!work.empty()) {
        std::string w = work.back();
        work.pop_back();
        if (!out.internal.insert(w).second) continue;
        const Mechanism* f = m.mechanism_of(w);
        if (!f) throw Error("cluster_closure: missing mechanism for " + w);
        for (const auto& p : f->endo_parents) {
            if (member_set.count(p) || c.remainder.count(p))
                work.push_back(p);
            else
                out.external_vars.insert(p);
        }
        for (const auto& u : f->exo_parents) exo.insert(u);
    }
    std::set<std::string> parent_ids;
    for (const auto& p : out.external_vars) parent_ids.insert(c.cluster_of(p));
    for (const auto& [id, mem] : c.clusters)
        if (parent_ids.count(id)) out.parent_clusters.push_back(id);
    for (const auto& u : m.exogenous)
        if (exo.count(u.name)) out.exo_parents.push_back(u.name);
    return out;
}

inline std::string product_label(const Scm& m, const std::vector<std::string>& members,
                                 const std::vector<int>& cards, std::size_t idx) {
    std::vector<int> vals = radix_decode(cards, idx);
    std::string label;
    for (std::size_t i = 0; i < members.size(); ++i) {
        if (i) label += "|";
        label += m.endogenous[m.endo_index(members[i])].domain[vals[i]];
    }
    return label;
}

}  // namespace detail

// Constructive abstract model over a partial clustering: one variable per
// cluster carrying the product domain under the identity encoding, the
// exogenous part copied verbatim, and each cluster mechanism the member
// mechanisms with remainder and intra-cluster references substituted away.
// The induced graph of the result matches build_pcdag exactly.
inline std::pair<Scm, Abstraction> construct_abstract_scm(const Scm& m, const Clustering& c) {
    auto violations = validate_scm(m);
    if (!violations.empty()) throw Error("construct_abstract_scm: invalid base model: " + violations.front());
    CausalGraph g = induced_graph(m);
    detail::require_valid_partition(g, c, "construct_abstract_scm");
    build_pcdag(g, c);  // throws CyclicInducedGraph when the clustering is unusable

    Abstraction a = canonical_alpha(m, c);

    Scm out;
    out.exogenous = m.exogenous;
    out.exo_probs = m.exo_probs;

    std::map<std::string, std::vector<int>> member_cards;
    for (const auto& [cid, members] : c.clusters) {
        std::vector<int> cards;
        for (const auto& v : members) cards.push_back(m.endogenous[m.endo_index(v)].card());
        member_cards[cid] = cards;
        Variable av;
        av.name = cid;
        const std::size_t n = radix_size(cards);
        for (std::size_t i = 0; i < n; ++i) av.domain.push_back(detail::product_label(m, members, cards, i));
        out.endogenous.push_back(av);
    }

    auto base_topo = detail::endo_topo_order(m);
    for (const auto& [cid, members] : c.clusters) {
        auto closure = detail::cluster_closure(m, c, cid);

        Mechanism f;
        f.child = cid;
        f.endo_parents = closure.parent_clusters;
        f.exo_parents = closure.exo_parents;

        std::vector<int> parent_cards;
        for (const auto& pid : closure.parent_clusters)
            parent_cards.push_back(static_cast<int>(radix_size(member_cards[pid])));
        for (const auto& u : closure.exo_parents) parent_cards.push_back(m.exogenous[m.exo_index(u)].card());

        // Internal evaluation order and per-variable lookup positions in a
        // dense environment indexed by base endogenous position.
        std::vector<int> internal_order;
        for (int vi : base_topo)
            if (closure.internal.count(m.endogenous[vi].name)) internal_order.push_back(vi);

        const std::size_t n_rows = radix_size(parent_cards);
        f.table.resize(n_rows);
        std::vector<int> row(parent_cards.size());
        std::vector<int> env(m.endogenous.size(), -1);
        std::vector<int> exo_env(m.exogenous.size(), -1);
        for (std::size_t r = 0; r < n_rows; ++r) {
            radix_decode(parent_cards, r, row);
            std::fill(env.begin(), env.end(), -1);
            std::fill(exo_env.begin(), exo_env.end(), -1);
            std::size_t k = 0;
            for (const auto& pid : closure.parent_clusters) {
                std::vector<int> vals = radix_decode(member_cards[pid], static_cast<std::size_t>(row[k++]));
                const auto* pm = c.members_of(pid);
                for (std::size_t i = 0; i < pm->size(); ++i) env[m.endo_index((*pm)[i])] = vals[i];
            }
            for (const auto& u : closure.exo_parents) exo_env[m.exo_index(u)] = row[k++];
            for (int vi : internal_order) {
                const Mechanism* mech = m.mechanism_of(m.endogenous[vi].name);
                std::size_t idx = 0;
                for (const auto& p : mech->endo_parents)
                    idx = idx * static_cast<std::size_t>(m.endogenous[m.endo_index(p)].card()) +
                          static_cast<std::size_t>(env[m.endo_index(p)]);
                for (const auto& u : mech->exo_parents)
                    idx = idx * static_cast<std::size_t>(m.exogenous[m.exo_index(u)].card()) +
                          static_cast<std::size_t>(exo_env[m.exo_index(u)]);
                env[vi] = mech->table[idx];
            }
            std::vector<int> mv;
            mv.reserve(members.size());
            for (const auto& v : members) mv.push_back(env[m.endo_index(v)]);
            f.table[r] = static_cast<int>(radix_encode(member_cards[cid], mv));
        }
        out.mechanisms.push_back(std::move(f));
    }
    return {out, a};
}

struct ErrorWitness {
    std::vector<std::string> x_set;  // abstract variables intervened/conditioned on
    std::vector<std::string> y_set;  // abstract target variables
    std::vector<int> x_base_values;  // base-level values over the pre-image of x_set
    double error = 0.0;
};

struct ConsistencyReport {
    Layer layer = Layer::l2;
    Metric metric = Metric::tv;
    double max_error = 0.0;
    std::optional<ErrorWitness> witness;
    int cells_checked = 0;
    int skipped_evidence = 0;  // layer-1 (x-set, x-value) pairs with zero-probability evidence on either side
};

namespace detail {

template <typename Fn>
inline void enumerate_subsets(const std::vector<std::string>& ids, Fn&& fn) {
    const std::size_t n = ids.size();
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        std::vector<std::string> sub;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::size_t{1} << i)) sub.push_back(ids[i]);
        fn(sub);
    }
}

inline std::vector<int> alpha_values(const Abstraction& a, const Scm& base, const std::vector<std::string>& avars,
                                     const std::vector<int>& base_values) {
    std::vector<int> out;
    std::size_t k = 0;
    for (const auto& av : avars) {
        const auto* members = a.members_of(av);
        std::vector<int> cards, vals;
        for (const auto& v : *members) {
            cards.push_back(base.endogenous[base.endo_index(v)].card());
            vals.push_back(base_values[k++]);
        }
        out.push_back(a.alpha.at(av).map[radix_encode(cards, vals)]);
    }
    return out;
}

}  // namespace detail

// Worst-case disagreement between querying the abstract model directly and
// pushing the base answer forward, over every ordered pair of disjoint
// abstract variable sets (the observed/intervened set may be empty) with
// the intervened values enumerated at base granularity.
inline ConsistencyReport abstraction_error(const Scm& base, const Scm& abstract, const Abstraction& a, Layer layer,
                                           Metric metric = Metric::tv) {
    ConsistencyReport rep;
    rep.layer = layer;
    rep.metric = metric;
    const auto avars = a.abstract_vars();

    Distribution base_joint, abstract_joint;
    if (layer == Layer::l1) {
        base_joint = joint_distribution(base, {});
        abstract_joint = joint_distribution(abstract, {});
    }

    detail::enumerate_subsets(avars, [&](const std::vector<std::string>& xset) {
        std::vector<std::string> rest;
        for (const auto& av : avars)
            if (std::find(xset.begin(), xset.end(), av) == xset.end()) rest.push_back(av);
        if (rest.empty()) return;

        const auto x_pre = preimage(a.clustering_view(base), xset);
        std::vector<int> x_cards;
        for (const auto& v : x_pre) x_cards.push_back(base.endogenous[base.endo_index(v)].card());
        const std::size_t n_x = radix_size(x_cards);

        std::vector<int> xv(x_pre.size());
        for (std::size_t ix = 0; ix < n_x; ++ix) {
            radix_decode(x_cards, ix, xv);
            const std::vector<int> axv = detail::alpha_values(a, base, xset, xv);

            // One conditioned/intervened table per side per (x-set, x-value);
            // every y-set below is a marginal of it.
            Distribution base_side, abstract_side;
            if (layer == Layer::l2) {
                Intervention dob;
                for (std::size_t i = 0; i < x_pre.size(); ++i) dob[x_pre[i]] = xv[i];
                base_side = joint_distribution(base, dob);
                Intervention doa;
                for (std::size_t i = 0; i < xset.size(); ++i) doa[xset[i]] = axv[i];
                abstract_side = joint_distribution(abstract, doa);
            } else {
                try {
                    std::map<std::string, int> evb;
                    for (std::size_t i = 0; i < x_pre.size(); ++i) evb[x_pre[i]] = xv[i];
                    base_side = evb.empty() ? base_joint : condition(base_joint, evb);
                    std::map<std::string, int> eva;
                    for (std::size_t i = 0; i < xset.size(); ++i) eva[xset[i]] = axv[i];
                    abstract_side = eva.empty() ? abstract_joint : condition(abstract_joint, eva);
                } catch (const ZeroProbabilityEvidence&) {
                    ++rep.skipped_evidence;
                    continue;
                }
            }

            detail::enumerate_subsets(rest, [&](const std::vector<std::string>& yset) {
                if (yset.empty()) return;
                const auto y_pre = preimage(a.clustering_view(base), yset);
                Distribution left = marginalize(abstract_side, yset);
                Distribution right = pushforward(a, marginalize(base_side, y_pre), yset);
                double d = distance(left, right, metric);
                ++rep.cells_checked;
                if (d > rep.max_error) {
                    rep.max_error = d;
                    ErrorWitness w;
                    w.x_set = xset;
                    w.y_set = yset;
                    w.x_base_values = xv;
                    w.error = d;
                    rep.witness = w;
                }
            });
        }
    });
    return rep;
}

struct RecoveredStructure {
    CausalGraph graph;  // vertices are abstract variable names
    bool surjective_mode = false;
    // Edges present in the graphical construction but not recovered from
    // the distributions; populated in surjective diagnostic mode.
    std::vector<std::pair<std::string, std::string>> omitted_directed;
    std::vector<std::pair<std::string, std::string>> omitted_bidirected;
};

namespace detail {

// Interventional joint cache keyed by the (sorted) intervention assignment.
struct JointCache {
    const Scm* model;
    std::map<std::vector<std::pair<std::string, int>>, Distribution> cache;

    const Distribution& get(const Intervention& dox) {
        std::vector<std::pair<std::string, int>> key(dox.begin(), dox.end());
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        return cache.emplace(std::move(key), joint_distribution(*model, dox)).first->second;
    }
};

inline bool pair_independent(const Distribution& pair_marg, double tol) {
    Distribution ma = marginalize(pair_marg, {pair_marg.scope[0]});
    Distribution mb = marginalize(pair_marg, {pair_marg.scope[1]});
    std::vector<int> vals(2);
    for (std::size_t idx = 0; idx < pair_marg.probs.size(); ++idx) {
        radix_decode(pair_marg.cards, idx, vals);
        if (std::fabs(pair_marg.probs[idx] - ma.probs[vals[0]] * mb.probs[vals[1]]) > tol) return false;
    }
    return true;
}

template <typename Fn>
inline void for_each_assignment(const std::vector<std::string>& vars, const std::vector<int>& cards, Fn&& fn) {
    const std::size_t n = radix_size(cards);
    std::vector<int> vals(cards.size());
    for (std::size_t i = 0; i < n; ++i) {
        radix_decode(cards, i, vals);
        Intervention asg;
        for (std::size_t k = 0; k < vars.size(); ++k) asg[vars[k]] = vals[k];
        fn(asg);
    }
}

}  // namespace detail

// Interventional structure recovery on the abstract model. A directed edge
// Ci -> Cj is recorded iff no intervention context screens Ci off from Cj;
// confounding is tested per the adjacent/non-adjacent criteria. Requires
// the abstraction to be interventionally consistent first.
inline RecoveredStructure recover_structure(const Scm& base, const Scm& abstract, const Abstraction& a,
                                            double tol = 1e-9) {
    auto pre = abstraction_error(base, abstract, a, Layer::l2, Metric::tv);
    if (pre.max_error > tol)
        throw InconsistentAbstraction("recover_structure: interventional abstraction error " +
                                      std::to_string(pre.max_error) + " exceeds tolerance");

    RecoveredStructure out;
    const auto avars = a.abstract_vars();
    out.graph.vertices = avars;
    std::map<std::string, int> card;
    for (const auto& av : avars) card[av] = a.alpha.at(av).codomain_size;

    detail::JointCache joints{&abstract, {}};

    auto contexts = [&](const std::string& ci, const std::string& cj, auto&& fn) {
        // Every intervention set over the other abstract variables, every value.
        std::vector<std::string> others;
        for (const auto& av : avars)
            if (av != ci && av != cj) others.push_back(av);
        bool keep_going = true;
        detail::enumerate_subsets(others, [&](const std::vector<std::string>& zset) {
            if (!keep_going) return;
            std::vector<int> zcards;
            for (const auto& z : zset) zcards.push_back(card[z]);
            detail::for_each_assignment(zset, zcards, [&](const Intervention& z_asg) {
                if (!keep_going) return;
                if (!fn(z_asg)) keep_going = false;
            });
        });
        return keep_going;
    };

    for (const auto& ci : avars)
        for (const auto& cj : avars) {
            if (ci == cj) continue;
            bool every_context_has_effect = contexts(ci, cj, [&](const Intervention& z_asg) {
                Distribution base_d = marginalize(joints.get(z_asg), {cj});
                for (int v = 0; v < card[ci]; ++v) {
                    Intervention with_ci = z_asg;
                    with_ci[ci] = v;
                    if (total_variation(marginalize(joints.get(with_ci), {cj}), base_d) > tol) return true;
                }
                return false;  // this context screens ci off from cj
            });
            if (every_context_has_effect) out.graph.add_directed(ci, cj);
        }

    for (std::size_t i = 0; i < avars.size(); ++i)
        for (std::size_t j = i + 1; j < avars.size(); ++j) {
            const std::string& ci = avars[i];
            const std::string& cj = avars[j];
            const bool adjacent = out.graph.has_directed(ci, cj) || out.graph.has_directed(cj, ci);
            if (!adjacent) {
                bool never_independent = contexts(ci, cj, [&](const Intervention& z_asg) {
                    return !detail::pair_independent(marginalize(joints.get(z_asg), {ci, cj}), tol);
                });
                if (never_independent) out.graph.add_bidirected(ci, cj);
                continue;
            }
            const std::string& cause = out.graph.has_directed(ci, cj) ? ci : cj;
            const std::string& effect = cause == ci ? cj : ci;
            bool always_gap = contexts(cause, effect, [&](const Intervention& z_asg) {
                // Context screens off confounding when conditioning on the
                // cause equals intervening on it, for every observable value.
                const Distribution& jz = joints.get(z_asg);
                for (int v = 0; v < card[cause]; ++v) {
                    Distribution obs;
                    try {
                        obs = condition(marginalize(jz, {effect, cause}), {{cause, v}});
                    } catch (const ZeroProbabilityEvidence&) {
                        continue;
                    }
                    Intervention with_cause = z_asg;
                    with_cause[cause] = v;
                    Distribution intv = marginalize(joints.get(with_cause), {effect});
                    if (total_variation(obs, intv) > tol) return true;
                }
                return false;
            });
            if (always_gap) out.graph.add_bidirected(ci, cj);
        }

    if (!a.bijective()) {
        out.surjective_mode = true;
        ClusterGraph pc = build_pcdag(induced_graph(base), a.clustering_view(base));
        for (const auto& e : pc.graph.directed)
            if (!out.graph.directed.count(e)) out.omitted_directed.push_back(e);
        for (const auto& e : pc.graph.bidirected)
            if (!out.graph.bidirected.count(e)) out.omitted_bidirected.push_back(e);
    }
    return out;
}

struct PreservationTrial {
    std::set<std::string> x;       // abstract variables whose pre-image is queried
    Intervention do1, do2;         // base-level interventions
    std::map<std::string, int> obs1, obs2;  // base-level evidence
    double base_distance = 0.0;
    double pushed_distance = 0.0;
};

struct PreservationReport {
    int trials = 0;
    int passed = 0;
    int failed = 0;
    int skipped = 0;  // zero-probability evidence
    std::optional<PreservationTrial> counterexample;
};

// Random spot check that the pushforward preserves equality/inequality of
// interventional-conditional base queries: both directions for bijective
// abstractions, inequality transport (abstract implies base) otherwise.
inline PreservationReport check_inequality_preservation(const Scm& base, const Abstraction& a, int trials,
                                                        std::uint64_t seed, double tol = 1e-9) {
    PreservationReport rep;
    std::mt19937_64 rng(seed);
    const auto avars = a.abstract_vars();
    const Clustering cview = a.clustering_view(base);
    const bool bij = a.bijective();

    auto sample_query = [&](const std::set<std::string>& xset, Intervention& dox, std::map<std::string, int>& obs) {
        std::vector<std::string> rest;
        for (const auto& av : avars)
            if (!xset.count(av)) rest.push_back(av);
        for (const auto& av : rest) {
            int role = static_cast<int>(rng() % 3);  // 0 skip, 1 intervene, 2 observe
            if (role == 0) continue;
            for (const auto& v : *a.members_of(av)) {
                int vc = base.endogenous[base.endo_index(v)].card();
                int val = static_cast<int>(rng() % static_cast<std::uint64_t>(vc));
                if (role == 1)
                    dox[v] = val;
                else
                    obs[v] = val;
            }
        }
    };

    for (int t = 0; t < trials; ++t) {
        std::set<std::string> xset;
        while (xset.empty())
            for (const auto& av : avars)
                if (rng() % 2) xset.insert(av);

        PreservationTrial trial;
        trial.x = xset;
        sample_query(xset, trial.do1, trial.obs1);
        sample_query(xset, trial.do2, trial.obs2);

        std::vector<std::string> xlist;
        for (const auto& av : avars)
            if (xset.count(av)) xlist.push_back(av);
        const auto x_pre = preimage(cview, xlist);

        Distribution p1, p2;
        try {
            p1 = mixed_query(base, x_pre, trial.do1, trial.obs1);
            p2 = mixed_query(base, x_pre, trial.do2, trial.obs2);
        } catch (const ZeroProbabilityEvidence&) {
            ++rep.skipped;
            continue;
        }
        ++rep.trials;
        trial.base_distance = total_variation(p1, p2);
        trial.pushed_distance = total_variation(pushforward(a, p1, xlist), pushforward(a, p2, xlist));
        const bool base_eq = trial.base_distance <= tol;
        const bool pushed_eq = trial.pushed_distance <= tol;
        const bool ok = bij ? base_eq == pushed_eq : (pushed_eq || !base_eq);
        if (ok) {
            ++rep.passed;
        } else {
            ++rep.failed;
            if (!rep.counterexample) rep.counterexample = trial;
        }
    }
    return rep;
}

}  // namespace abstraq
