#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "graph.hpp"
#include "scm.hpp"

namespace abstraq {

// Partial clustering of a graph's vertices: disjoint nonempty clusters plus
// a remainder set that the cluster-level view marginalizes away. Cluster
// order is the canonical order for everything derived from the clustering.
struct Clustering {
    std::vector<std::pair<std::string, std::vector<std::string>>> clusters;  // id -> ordered members
    std::set<std::string> remainder;

    const std::vector<std::string>* members_of(const std::string& id) const {
        for (const auto& [cid, m] : clusters)
            if (cid == id) return &m;
        return nullptr;
    }

    // Cluster id covering a vertex, or empty string for remainder/unknown.
    std::string cluster_of(const std::string& v) const {
        for (const auto& [cid, m] : clusters)
            for (const auto& w : m)
                if (w == v) return cid;
        return "";
    }

    bool total() const { return remainder.empty(); }
};

struct ClusterGraph {
    CausalGraph graph;  // vertices are cluster ids
    Clustering clustering;
};

struct ValidationIssue {
    std::string code;  // "unknown_vertex" | "duplicate_vertex" | "uncovered_vertex" | "empty_cluster"
                       // | "duplicate_cluster_id" | "cyclic_cluster_graph"
    std::string message;
};

namespace detail {

// Directed cluster edges by mediated adjacency (rule 1 of the partial
// construction); for a total clustering this degenerates to crossing edges.
inline std::set<std::pair<std::string, std::string>> rule1_edges(const CausalGraph& g, const Clustering& c) {
    std::set<std::pair<std::string, std::string>> edges;
    for (const auto& [ci, mi] : c.clusters)
        for (const auto& [cj, mj] : c.clusters) {
            if (ci == cj) continue;
            bool found = false;
            for (const auto& a : mi) {
                for (const auto& b : mj)
                    if (mediated_adjacent(g, c.remainder, a, b)) {
                        found = true;
                        break;
                    }
                if (found) break;
            }
            if (found) edges.insert({ci, cj});
        }
    return edges;
}

}  // namespace detail

// Partition checks, plus (as a distinct code) whether the induced cluster
// graph would be cyclic.
inline std::vector<ValidationIssue> validate_clustering(const CausalGraph& g, const Clustering& c) {
    std::vector<ValidationIssue> out;
    std::set<std::string> vertex_set(g.vertices.begin(), g.vertices.end());
    std::set<std::string> covered;
    std::set<std::string> ids;
    bool partition_ok = true;
    for (const auto& [cid, members] : c.clusters) {
        if (!ids.insert(cid).second) {
            out.push_back({"duplicate_cluster_id", "duplicate cluster id: " + cid});
            partition_ok = false;
        }
        if (members.empty()) out.push_back({"empty_cluster", "empty cluster: " + cid});
        for (const auto& v : members) {
            if (!vertex_set.count(v)) {
                out.push_back({"unknown_vertex", "unknown vertex " + v + " in cluster " + cid});
                partition_ok = false;
            }
            if (!covered.insert(v).second) {
                out.push_back({"duplicate_vertex", "vertex " + v + " assigned twice"});
                partition_ok = false;
            }
        }
    }
    for (const auto& v : c.remainder) {
        if (!vertex_set.count(v)) {
            out.push_back({"unknown_vertex", "unknown vertex " + v + " in remainder"});
            partition_ok = false;
        }
        if (!covered.insert(v).second) {
            out.push_back({"duplicate_vertex", "vertex " + v + " assigned twice"});
            partition_ok = false;
        }
    }
    for (const auto& v : g.vertices)
        if (!covered.count(v)) {
            out.push_back({"uncovered_vertex", "vertex " + v + " not covered"});
            partition_ok = false;
        }

    if (partition_ok) {
        CausalGraph cg;
        for (const auto& [cid, members] : c.clusters) cg.vertices.push_back(cid);
        cg.directed = detail::rule1_edges(g, c);
        auto topo = is_acyclic(cg);
        if (!topo.acyclic) {
            std::string msg = "induced cluster graph is cyclic:";
            for (const auto& v : topo.cycle) msg += " " + v;
            out.push_back({"cyclic_cluster_graph", msg});
        }
    }
    return out;
}

namespace detail {

inline void require_valid_partition(const CausalGraph& g, const Clustering& c, const char* who) {
    std::set<std::string> vertex_set(g.vertices.begin(), g.vertices.end());
    std::set<std::string> covered;
    std::set<std::string> ids;
    for (const auto& [cid, members] : c.clusters) {
        if (!ids.insert(cid).second) throw Error(std::string(who) + ": duplicate cluster id " + cid);
        if (members.empty()) throw Error(std::string(who) + ": empty cluster " + cid);
        for (const auto& v : members) {
            if (!vertex_set.count(v)) throw Error(std::string(who) + ": unknown vertex " + v);
            if (!covered.insert(v).second) throw Error(std::string(who) + ": vertex " + v + " assigned twice");
        }
    }
    for (const auto& v : c.remainder) {
        if (!vertex_set.count(v)) throw Error(std::string(who) + ": unknown vertex " + v);
        if (!covered.insert(v).second) throw Error(std::string(who) + ": vertex " + v + " assigned twice");
    }
    for (const auto& v : g.vertices)
        if (!covered.count(v)) throw Error(std::string(who) + ": vertex " + v + " not covered");
}

inline std::string cycle_message(const TopoResult& topo) {
    std::string msg = "cyclic cluster graph:";
    for (const auto& v : topo.cycle) msg += " " + v;
    return msg;
}

}  // namespace detail

// Total clustering: a cluster edge exists iff some base edge crosses the
// two clusters. Throws NonTotalClustering on a nonempty remainder and
// CyclicInducedGraph when the result has a directed cycle.
inline ClusterGraph build_cdag(const CausalGraph& g, const Clustering& c) {
    if (!c.total()) throw NonTotalClustering("build_cdag: clustering has a nonempty remainder");
    detail::require_valid_partition(g, c, "build_cdag");
    ClusterGraph out;
    out.clustering = c;
    for (const auto& [cid, members] : c.clusters) out.graph.vertices.push_back(cid);
    for (const auto& [a, b] : g.directed) {
        auto ca = c.cluster_of(a), cb = c.cluster_of(b);
        if (ca != cb) out.graph.add_directed(ca, cb);
    }
    for (const auto& [a, b] : g.bidirected) {
        auto ca = c.cluster_of(a), cb = c.cluster_of(b);
        if (ca != cb) out.graph.add_bidirected(ca, cb);
    }
    auto topo = is_acyclic(out.graph);
    if (!topo.acyclic) throw CyclicInducedGraph("build_cdag: " + detail::cycle_message(topo));
    return out;
}

namespace detail {

inline ClusterGraph build_pcdag_with_rules(const CausalGraph& g, const Clustering& c, bool confounding_via_fork) {
    require_valid_partition(g, c, "build_pcdag");
    ClusterGraph out;
    out.clustering = c;
    for (const auto& [cid, members] : c.clusters) out.graph.vertices.push_back(cid);
    out.graph.directed = rule1_edges(g, c);
    for (std::size_t i = 0; i < c.clusters.size(); ++i)
        for (std::size_t j = i + 1; j < c.clusters.size(); ++j) {
            bool found = false;
            for (const auto& a : c.clusters[i].second) {
                for (const auto& b : c.clusters[j].second) {
                    auto link = confounding_link(g, c.remainder, a, b);
                    if (link.kind == ConfoundingLink::via_link ||
                        (confounding_via_fork && link.kind == ConfoundingLink::via_fork)) {
                        found = true;
                        break;
                    }
                }
                if (found) break;
            }
            if (found) out.graph.add_bidirected(c.clusters[i].first, c.clusters[j].first);
        }
    auto topo = is_acyclic(out.graph);
    if (!topo.acyclic) throw CyclicInducedGraph("build_pcdag: " + cycle_message(topo));
    return out;
}

}  // namespace detail

// Partial clustering: directed edges by mediated adjacency through the
// remainder, bidirected links by latent connections surviving remainder
// marginalization (either an explicit bidirected path or a remainder fork).
inline ClusterGraph build_pcdag(const CausalGraph& g, const Clustering& c) {
    return detail::build_pcdag_with_rules(g, c, true);
}

// Union of pre-images of the given clusters, member order within each
// cluster preserved, clusters in the given order.
inline std::vector<std::string> preimage(const Clustering& c, const std::vector<std::string>& cluster_ids) {
    std::vector<std::string> out;
    for (const auto& id : cluster_ids) {
        const auto* m = c.members_of(id);
        if (!m) throw Error("preimage: unknown cluster " + id);
        out.insert(out.end(), m->begin(), m->end());
    }
    return out;
}

struct SepStatement {
    std::set<std::string> x, y, z;   // cluster ids
    int rule = 0;                    // 0 = plain d-separation, 1..3 = do-calculus rule
    std::set<std::string> w;         // conditioning role for do-calculus statements
};

struct ConsistencyCheck {
    bool consistent = true;
    std::vector<SepStatement> counterexamples;
    int checked = 0;
};

struct ClusterSepResult {
    bool cluster_verdict = false;
    bool base_verdict = false;
    bool consistent = false;
};

namespace detail {

inline std::set<std::string> preimage_set(const Clustering& c, const std::set<std::string>& cluster_ids) {
    std::set<std::string> out;
    for (const auto& id : cluster_ids) {
        const auto* m = c.members_of(id);
        if (!m) throw Error("preimage: unknown cluster " + id);
        out.insert(m->begin(), m->end());
    }
    return out;
}

}  // namespace detail

// One cluster-level separation query checked against the base graph on the
// pre-image sets. Remainder vertices never appear in either query.
inline ClusterSepResult cluster_d_sep_check(const CausalGraph& g, const ClusterGraph& cg, const SepQuery& q) {
    ClusterSepResult r;
    r.cluster_verdict = d_separated(cg.graph, q);
    SepQuery base;
    base.x = detail::preimage_set(cg.clustering, q.x);
    base.y = detail::preimage_set(cg.clustering, q.y);
    base.z = detail::preimage_set(cg.clustering, q.z);
    r.base_verdict = d_separated(g, base);
    r.consistent = r.cluster_verdict == r.base_verdict;
    return r;
}

// Graphical applicability of one do-calculus rule on a mixed graph, with
// the usual surgeries. Empty z is vacuously applicable.
inline bool do_rule_applicable(const CausalGraph& g, int rule, const std::set<std::string>& x,
                               const std::set<std::string>& y, const std::set<std::string>& z,
                               const std::set<std::string>& w) {
    if (rule < 1 || rule > 3) throw Error("do_rule_applicable: rule must be 1, 2 or 3");
    if (y.empty()) throw Error("do_rule_applicable: y must be nonempty");
    if (z.empty()) return true;
    std::set<std::string> cond;
    cond.insert(x.begin(), x.end());
    cond.insert(w.begin(), w.end());
    SepQuery q{y, z, cond};
    if (rule == 1) return d_separated(graph_surgery(g, x, {}), q);
    if (rule == 2) return d_separated(graph_surgery(g, x, z), q);
    // Rule 3: also cut incoming edges of the z-vertices that are not
    // ancestors of any w-vertex once x's incoming edges are gone.
    CausalGraph gx = graph_surgery(g, x, {});
    std::set<std::string> anc_w = ancestors_of(gx, w);
    std::set<std::string> zw;
    for (const auto& v : z)
        if (!anc_w.count(v)) zw.insert(v);
    std::set<std::string> cut = x;
    cut.insert(zw.begin(), zw.end());
    return d_separated(graph_surgery(g, cut, {}), q);
}

inline bool do_calculus_applicable(const ClusterGraph& cg, int rule, const std::set<std::string>& x,
                                   const std::set<std::string>& y, const std::set<std::string>& z,
                                   const std::set<std::string>& w) {
    for (const auto& s : {x, y, z, w})
        for (const auto& id : s)
            if (!cg.graph.has_vertex(id)) throw Error("do_calculus_applicable: unknown cluster " + id);
    return do_rule_applicable(cg.graph, rule, x, y, z, w);
}

namespace detail {

// Enumerate assignments of cluster ids to roles. Role -1 means unused.
// When the cluster count exceeds `cap_threshold`, each role is capped at
// `role_cap` members to keep enumeration bounded.
constexpr int kConsistencyRoleCap = 2;
constexpr int kConsistencyCapThreshold = 6;

template <typename Fn>
inline void enumerate_roles(const std::vector<std::string>& ids, int n_roles, Fn&& fn) {
    const bool capped = static_cast<int>(ids.size()) > kConsistencyCapThreshold;
    std::vector<int> role(ids.size(), -1);
    std::vector<int> counts(n_roles, 0);
    auto rec = [&](auto&& self, std::size_t i) -> void {
        if (i == ids.size()) {
            fn(role);
            return;
        }
        self(self, i + 1);
        for (int r = 0; r < n_roles; ++r) {
            if (capped && counts[r] >= kConsistencyRoleCap) continue;
            role[i] = r;
            ++counts[r];
            self(self, i + 1);
            --counts[r];
            role[i] = -1;
        }
    };
    rec(rec, 0);
}

}  // namespace detail

// Layer-1: every d-separation that holds at cluster level must hold on the
// pre-images. Layer-2: every applicable do-calculus rule instance at
// cluster level must be applicable on the pre-images.
inline ConsistencyCheck check_graphical_consistency(const CausalGraph& g, const ClusterGraph& cg, Layer layer) {
    ConsistencyCheck out;
    std::vector<std::string> ids;
    for (const auto& [cid, members] : cg.clustering.clusters) ids.push_back(cid);

    if (layer == Layer::l1) {
        detail::enumerate_roles(ids, 3, [&](const std::vector<int>& role) {
            SepStatement st;
            for (std::size_t i = 0; i < ids.size(); ++i) {
                if (role[i] == 0) st.x.insert(ids[i]);
                if (role[i] == 1) st.y.insert(ids[i]);
                if (role[i] == 2) st.z.insert(ids[i]);
            }
            if (st.x.empty() || st.y.empty()) return;
            ++out.checked;
            SepQuery q{st.x, st.y, st.z};
            if (!d_separated(cg.graph, q)) return;
            SepQuery base;
            base.x = detail::preimage_set(cg.clustering, st.x);
            base.y = detail::preimage_set(cg.clustering, st.y);
            base.z = detail::preimage_set(cg.clustering, st.z);
            if (!d_separated(g, base)) {
                out.consistent = false;
                out.counterexamples.push_back(st);
            }
        });
        return out;
    }

    detail::enumerate_roles(ids, 4, [&](const std::vector<int>& role) {
        SepStatement st;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (role[i] == 0) st.x.insert(ids[i]);
            if (role[i] == 1) st.y.insert(ids[i]);
            if (role[i] == 2) st.z.insert(ids[i]);
            if (role[i] == 3) st.w.insert(ids[i]);
        }
        if (st.y.empty() || st.z.empty()) return;
        for (int rule = 1; rule <= 3; ++rule) {
            ++out.checked;
            if (!do_rule_applicable(cg.graph, rule, st.x, st.y, st.z, st.w)) continue;
            auto px = detail::preimage_set(cg.clustering, st.x);
            auto py = detail::preimage_set(cg.clustering, st.y);
            auto pz = detail::preimage_set(cg.clustering, st.z);
            auto pw = detail::preimage_set(cg.clustering, st.w);
            if (!do_rule_applicable(g, rule, px, py, pz, pw)) {
                out.consistent = false;
                SepStatement bad = st;
                bad.rule = rule;
                out.counterexamples.push_back(bad);
            }
        }
    });
    return out;
}

// Cluster graph rendered with member-list labels.
inline std::string to_dot(const ClusterGraph& cg) {
    std::map<std::string, std::string> labels;
    for (const auto& [cid, members] : cg.clustering.clusters) {
        std::string label = cid + ": {";
        for (std::size_t i = 0; i < members.size(); ++i) {
            if (i) label += ",";
            label += members[i];
        }
        label += "}";
        labels[cid] = label;
    }
    return to_dot(cg.graph, labels);
}

}  // namespace abstraq
