#pragma once

#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "scm.hpp"

namespace abstraq {

// Mixed graph over named vertices: a directed part plus bidirected links
// (stored with endpoints in lexicographic order).
struct CausalGraph {
    std::vector<std::string> vertices;
    std::set<std::pair<std::string, std::string>> directed;
    std::set<std::pair<std::string, std::string>> bidirected;

    bool has_vertex(const std::string& v) const {
        for (const auto& w : vertices)
            if (w == v) return true;
        return false;
    }

    void add_vertex(const std::string& v) {
        if (!has_vertex(v)) vertices.push_back(v);
    }

    void add_directed(const std::string& a, const std::string& b) { directed.insert({a, b}); }

    void add_bidirected(const std::string& a, const std::string& b) {
        bidirected.insert(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
    }

    bool has_directed(const std::string& a, const std::string& b) const { return directed.count({a, b}) > 0; }

    bool has_bidirected(const std::string& a, const std::string& b) const {
        return bidirected.count(a < b ? std::make_pair(a, b) : std::make_pair(b, a)) > 0;
    }

    bool operator==(const CausalGraph& o) const {
        return std::set<std::string>(vertices.begin(), vertices.end()) ==
                   std::set<std::string>(o.vertices.begin(), o.vertices.end()) &&
               directed == o.directed && bidirected == o.bidirected;
    }
};

struct SepQuery {
    std::set<std::string> x, y, z;
};

struct TopoResult {
    bool acyclic = false;
    std::vector<std::string> order;  // topological order of the directed part when acyclic
    std::vector<std::string> cycle;  // witness cycle otherwise
};

// Induced graph of a model: vertices are the endogenous variables, directed
// edges the declared parent relation, bidirected links shared exogenous
// parents between distinct variables.
inline CausalGraph induced_graph(const Scm& m) {
    CausalGraph g;
    for (const auto& v : m.endogenous) g.vertices.push_back(v.name);
    std::map<std::string, std::vector<std::string>> exo_children;
    for (const auto& f : m.mechanisms) {
        for (const auto& p : f.endo_parents) g.add_directed(p, f.child);
        for (const auto& u : f.exo_parents) exo_children[u].push_back(f.child);
    }
    for (const auto& [u, kids] : exo_children)
        for (std::size_t i = 0; i < kids.size(); ++i)
            for (std::size_t j = i + 1; j < kids.size(); ++j)
                if (kids[i] != kids[j]) g.add_bidirected(kids[i], kids[j]);
    return g;
}

inline TopoResult is_acyclic(const CausalGraph& g) {
    TopoResult r;
    std::map<std::string, std::vector<std::string>> children;
    std::map<std::string, int> indeg;
    for (const auto& v : g.vertices) indeg[v] = 0;
    for (const auto& [a, b] : g.directed) {
        children[a].push_back(b);
        ++indeg[b];
    }
    std::deque<std::string> queue;
    for (const auto& v : g.vertices)
        if (indeg[v] == 0) queue.push_back(v);
    while (!queue.empty()) {
        auto v = queue.front();
        queue.pop_front();
        r.order.push_back(v);
        for (const auto& c : children[v])
            if (--indeg[c] == 0) queue.push_back(c);
    }
    if (r.order.size() == g.vertices.size()) {
        r.acyclic = true;
        return r;
    }
    // Recover a witness cycle among the vertices that never drained.
    r.order.clear();
    std::set<std::string> rest;
    for (const auto& [v, d] : indeg)
        if (d > 0) rest.insert(v);
    std::string cur = *rest.begin();
    std::vector<std::string> trail;
    std::map<std::string, int> seen_at;
    while (!seen_at.count(cur)) {
        seen_at[cur] = static_cast<int>(trail.size());
        trail.push_back(cur);
        for (const auto& c : children[cur])
            if (rest.count(c)) {
                cur = c;
                break;
            }
    }
    for (std::size_t i = seen_at[cur]; i < trail.size(); ++i) r.cycle.push_back(trail[i]);
    r.cycle.push_back(cur);
    return r;
}

namespace detail {

// Bidirected links are expanded into explicit latent fork vertices so that
// plain DAG d-separation applies to the result.
struct AugmentedDag {
    std::vector<std::string> vertices;
    std::map<std::string, std::vector<std::string>> parents;
    std::map<std::string, std::vector<std::string>> children;
};

inline AugmentedDag augment_with_latents(const CausalGraph& g) {
    AugmentedDag a;
    a.vertices = g.vertices;
    for (const auto& v : g.vertices) {
        a.parents[v];
        a.children[v];
    }
    for (const auto& [p, c] : g.directed) {
        a.parents[c].push_back(p);
        a.children[p].push_back(c);
    }
    int k = 0;
    for (const auto& [x, y] : g.bidirected) {
        std::string l = "~latent" + std::to_string(k++);
        a.vertices.push_back(l);
        a.parents[l];
        a.children[l] = {x, y};
        a.parents[x].push_back(l);
        a.parents[y].push_back(l);
    }
    return a;
}

// Active-trail reachability with memoization on (vertex, direction of
// entry): "up" means the trail arrived from a child, "down" from a parent.
inline bool d_connected_in_dag(const AugmentedDag& a, const std::set<std::string>& x, const std::set<std::string>& y,
                               const std::set<std::string>& z) {
    std::set<std::string> anc_z = z;
    std::deque<std::string> queue(z.begin(), z.end());
    while (!queue.empty()) {
        auto v = queue.front();
        queue.pop_front();
        auto it = a.parents.find(v);
        if (it == a.parents.end()) continue;
        for (const auto& p : it->second)
            if (anc_z.insert(p).second) queue.push_back(p);
    }

    enum Dir { up = 0, down = 1 };
    std::set<std::pair<std::string, int>> visited;
    std::deque<std::pair<std::string, int>> frontier;
    for (const auto& s : x) frontier.push_back({s, up});
    while (!frontier.empty()) {
        auto [v, dir] = frontier.front();
        frontier.pop_front();
        if (!visited.insert({v, dir}).second) continue;
        if (!z.count(v) && y.count(v)) return true;
        if (dir == up && !z.count(v)) {
            for (const auto& p : a.parents.at(v)) frontier.push_back({p, up});
            for (const auto& c : a.children.at(v)) frontier.push_back({c, down});
        } else if (dir == down) {
            if (!z.count(v))
                for (const auto& c : a.children.at(v)) frontier.push_back({c, down});
            if (anc_z.count(v))
                for (const auto& p : a.parents.at(v)) frontier.push_back({p, up});
        }
    }
    return false;
}

}  // namespace detail

inline bool d_separated(const CausalGraph& g, const SepQuery& q) {
    if (q.x.empty() || q.y.empty()) throw Error("d_separated: x and y must be nonempty");
    for (const auto& s : {q.x, q.y, q.z})
        for (const auto& v : s)
            if (!g.has_vertex(v)) throw Error("d_separated: unknown vertex " + v);
    for (const auto& v : q.x)
        if (q.y.count(v) || q.z.count(v)) throw Error("d_separated: query sets overlap at " + v);
    for (const auto& v : q.y)
        if (q.z.count(v)) throw Error("d_separated: query sets overlap at " + v);
    auto a = detail::augment_with_latents(g);
    return !detail::d_connected_in_dag(a, q.x, q.y, q.z);
}

namespace detail {

// Directed path src -> ... -> dst whose intermediate vertices all lie in
// `allowed`; endpoints are unconstrained. Returns the path (src..dst), or
// empty when none exists.
inline std::vector<std::string> directed_path_within(const CausalGraph& g, const std::set<std::string>& allowed,
                                                     const std::string& src, const std::string& dst) {
    std::map<std::string, std::vector<std::string>> children;
    for (const auto& [a, b] : g.directed) children[a].push_back(b);
    std::map<std::string, std::string> came_from;
    std::deque<std::string> queue{src};
    std::set<std::string> visited{src};
    while (!queue.empty()) {
        auto v = queue.front();
        queue.pop_front();
        for (const auto& c : children[v]) {
            if (visited.count(c)) continue;
            came_from[c] = v;
            if (c == dst) {
                std::vector<std::string> path{dst};
                std::string cur = dst;
                while (cur != src) {
                    cur = came_from[cur];
                    path.push_back(cur);
                }
                std::reverse(path.begin(), path.end());
                return path;
            }
            if (allowed.count(c)) {
                visited.insert(c);
                queue.push_back(c);
            }
        }
    }
    return {};
}

}  // namespace detail

// True when a directed path a -> ... -> b exists whose intermediates all lie
// in the remainder set. Endpoints must be outside the remainder.
inline bool mediated_adjacent(const CausalGraph& g, const std::set<std::string>& remainder, const std::string& a,
                              const std::string& b) {
    if (!g.has_vertex(a) || !g.has_vertex(b)) throw Error("mediated_adjacent: unknown vertex");
    if (a == b) throw Error("mediated_adjacent: endpoints must differ");
    if (remainder.count(a) || remainder.count(b)) throw Error("mediated_adjacent: endpoint in remainder");
    return !detail::directed_path_within(g, remainder, a, b).empty();
}

// Diagnosis of a latent-confounding connection between a and b once the
// remainder is marginalized away. `via_link` is a path a <-...<- p <->
// q ->...-> b whose intermediates are remainder vertices; `via_fork` is a
// remainder vertex with directed remainder paths to both endpoints.
struct ConfoundingLink {
    enum Kind { none, via_link, via_fork } kind = none;
    std::pair<std::string, std::string> link;   // bidirected pair (via_link)
    std::string fork;                           // fork vertex (via_fork)
    std::vector<std::string> left_path;         // source vertex .. a
    std::vector<std::string> right_path;        // source vertex .. b
};

inline ConfoundingLink confounding_link(const CausalGraph& g, const std::set<std::string>& remainder,
                                        const std::string& a, const std::string& b) {
    if (!g.has_vertex(a) || !g.has_vertex(b)) throw Error("confounding_link: unknown vertex");
    if (a == b) throw Error("confounding_link: endpoints must differ");
    if (remainder.count(a) || remainder.count(b)) throw Error("confounding_link: endpoint in remainder");

    auto side = [&](const std::string& p, const std::string& t) -> std::vector<std::string> {
        if (p == t) return {t};
        if (!remainder.count(p)) return {};
        return detail::directed_path_within(g, remainder, p, t);
    };

    ConfoundingLink out;
    for (const auto& [p, q] : g.bidirected) {
        for (const auto& [s, t] : {std::make_pair(p, q), std::make_pair(q, p)}) {
            auto left = side(s, a);
            if (left.empty()) continue;
            auto right = side(t, b);
            if (right.empty()) continue;
            out.kind = ConfoundingLink::via_link;
            out.link = {s, t};
            out.left_path = left;
            out.right_path = right;
            return out;
        }
    }
    for (const auto& q : remainder) {
        auto left = detail::directed_path_within(g, remainder, q, a);
        if (left.empty()) continue;
        auto right = detail::directed_path_within(g, remainder, q, b);
        if (right.empty()) continue;
        out.kind = ConfoundingLink::via_fork;
        out.fork = q;
        out.left_path = left;
        out.right_path = right;
        return out;
    }
    return out;
}

// Do-calculus style surgery: drop directed edges into remove_incoming,
// directed edges out of remove_outgoing, and bidirected links touching
// remove_incoming.
inline CausalGraph graph_surgery(const CausalGraph& g, const std::set<std::string>& remove_incoming,
                                 const std::set<std::string>& remove_outgoing) {
    for (const auto& s : {remove_incoming, remove_outgoing})
        for (const auto& v : s)
            if (!g.has_vertex(v)) throw Error("graph_surgery: unknown vertex " + v);
    CausalGraph out;
    out.vertices = g.vertices;
    for (const auto& [a, b] : g.directed)
        if (!remove_incoming.count(b) && !remove_outgoing.count(a)) out.directed.insert({a, b});
    for (const auto& [a, b] : g.bidirected)
        if (!remove_incoming.count(a) && !remove_incoming.count(b)) out.bidirected.insert({a, b});
    return out;
}

inline std::set<std::string> ancestors_of(const CausalGraph& g, const std::set<std::string>& targets) {
    std::map<std::string, std::vector<std::string>> parents;
    for (const auto& [a, b] : g.directed) parents[b].push_back(a);
    std::set<std::string> anc = targets;
    std::deque<std::string> queue(targets.begin(), targets.end());
    while (!queue.empty()) {
        auto v = queue.front();
        queue.pop_front();
        for (const auto& p : parents[v])
            if (anc.insert(p).second) queue.push_back(p);
    }
    return anc;
}

// DOT rendering; labels may remap vertex display names. Bidirected links are
// drawn as dashed two-headed edges.
inline std::string to_dot(const CausalGraph& g, const std::map<std::string, std::string>& labels = {}) {
    auto quote = [](const std::string& s) { return "\"" + s + "\""; };
    std::ostringstream os;
    os << "digraph G {\n";
    for (const auto& v : g.vertices) {
        auto it = labels.find(v);
        if (it != labels.end())
            os << "  " << quote(v) << " [label=" << quote(it->second) << "];\n";
        else
            os << "  " << quote(v) << ";\n";
    }
    for (const auto& [a, b] : g.directed) os << "  " << quote(a) << " -> " << quote(b) << ";\n";
    for (const auto& [a, b] : g.bidirected)
        os << "  " << quote(a) << " -> " << quote(b) << " [dir=both, style=dashed];\n";
    os << "}\n";
    return os.str();
}

}  // namespace abstraq
