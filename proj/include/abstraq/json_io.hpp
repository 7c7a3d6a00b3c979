#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "abstraction.hpp"
#include "clustering.hpp"
#include "graph.hpp"
#include "scm.hpp"

namespace abstraq {

using nlohmann::json;

inline json to_json(const Scm& m) {
    json vars = json::array();
    for (const auto& v : m.endogenous) vars.push_back({{"name", v.name}, {"kind", "endo"}, {"domain", v.domain}});
    for (const auto& v : m.exogenous) vars.push_back({{"name", v.name}, {"kind", "exo"}, {"domain", v.domain}});
    json mechs = json::array();
    for (const auto& v : m.endogenous) {
        const Mechanism* f = m.mechanism_of(v.name);
        if (!f) continue;
        mechs.push_back({{"child", f->child},
                         {"endo_parents", f->endo_parents},
                         {"exo_parents", f->exo_parents},
                         {"table", f->table}});
    }
    json dist = json::object();
    for (std::size_t i = 0; i < m.exogenous.size(); ++i) dist[m.exogenous[i].name] = m.exo_probs[i];
    return {{"variables", vars}, {"mechanisms", mechs}, {"exo_dist", dist}};
}

inline Scm scm_from_json(const json& j) {
    Scm m;
    if (!j.contains("variables") || !j["variables"].is_array()) throw Error("scm json: missing variables array");
    for (const auto& jv : j["variables"]) {
        Variable v;
        v.name = jv.at("name").get<std::string>();
        v.domain = jv.at("domain").get<std::vector<std::string>>();
        const auto kind = jv.at("kind").get<std::string>();
        if (kind == "endo")
            m.endogenous.push_back(v);
        else if (kind == "exo")
            m.exogenous.push_back(v);
        else
            throw Error("scm json: variable kind must be endo or exo: " + v.name);
    }
    if (!j.contains("mechanisms") || !j["mechanisms"].is_array()) throw Error("scm json: missing mechanisms array");
    for (const auto& jf : j["mechanisms"]) {
        Mechanism f;
        f.child = jf.at("child").get<std::string>();
        f.endo_parents = jf.at("endo_parents").get<std::vector<std::string>>();
        f.exo_parents = jf.at("exo_parents").get<std::vector<std::string>>();
        f.table = jf.at("table").get<std::vector<int>>();
        m.mechanisms.push_back(std::move(f));
    }
    if (!j.contains("exo_dist") || !j["exo_dist"].is_object()) throw Error("scm json: missing exo_dist object");
    m.exo_probs.resize(m.exogenous.size());
    for (std::size_t i = 0; i < m.exogenous.size(); ++i) {
        const auto& name = m.exogenous[i].name;
        if (!j["exo_dist"].contains(name)) throw Error("scm json: exo_dist missing entry for " + name);
        m.exo_probs[i] = j["exo_dist"][name].get<std::vector<double>>();
    }
    return m;
}

inline json to_json(const Clustering& c) {
    json clusters = json::object();
    for (const auto& [cid, members] : c.clusters) clusters[cid] = members;
    return {{"clusters", clusters}, {"remainder", std::vector<std::string>(c.remainder.begin(), c.remainder.end())}};
}

// Cluster order is the lexicographic id order, which is also the iteration
// order of the json object.
inline Clustering clustering_from_json(const json& j) {
    Clustering c;
    if (!j.contains("clusters") || !j["clusters"].is_object()) throw Error("clustering json: missing clusters object");
    for (const auto& [cid, members] : j["clusters"].items())
        c.clusters.push_back({cid, members.get<std::vector<std::string>>()});
    if (j.contains("remainder"))
        for (const auto& v : j["remainder"]) c.remainder.insert(v.get<std::string>());
    return c;
}

inline json to_json(const Abstraction& a) {
    json phi = json::object();
    for (const auto& [v, av] : a.phi()) phi[v] = av;
    json alpha = json::object();
    for (const auto& [av, am] : a.alpha) alpha[av] = {{"domain_size", am.codomain_size}, {"map", am.map}};
    return {{"relevant", a.relevant}, {"phi", phi}, {"alpha", alpha}};
}

// Pre-image member order is the order of appearance in `relevant`;
// abstract variable order is the order of first appearance there.
inline Abstraction abstraction_from_json(const json& j) {
    Abstraction a;
    a.relevant = j.at("relevant").get<std::vector<std::string>>();
    if (!j.contains("phi") || !j["phi"].is_object()) throw Error("abstraction json: missing phi object");
    std::map<std::string, std::string> phi;
    for (const auto& [v, av] : j["phi"].items()) phi[v] = av.get<std::string>();
    for (const auto& v : a.relevant) {
        auto it = phi.find(v);
        if (it == phi.end()) throw Error("abstraction json: phi missing entry for " + v);
        bool found = false;
        for (auto& [av, members] : a.preimages)
            if (av == it->second) {
                members.push_back(v);
                found = true;
            }
        if (!found) a.preimages.push_back({it->second, {v}});
    }
    if (!j.contains("alpha") || !j["alpha"].is_object()) throw Error("abstraction json: missing alpha object");
    for (const auto& [av, jm] : j["alpha"].items()) {
        AlphaMap am;
        am.codomain_size = jm.at("domain_size").get<int>();
        am.map = jm.at("map").get<std::vector<int>>();
        a.alpha[av] = am;
    }
    for (const auto& [av, members] : a.preimages)
        if (!a.alpha.count(av)) throw Error("abstraction json: alpha missing entry for " + av);
    return a;
}

inline json to_json(const CausalGraph& g) {
    json directed = json::array();
    for (const auto& [x, y] : g.directed) directed.push_back({x, y});
    json bidirected = json::array();
    for (const auto& [x, y] : g.bidirected) bidirected.push_back({x, y});
    return {{"vertices", g.vertices}, {"directed", directed}, {"bidirected", bidirected}};
}

inline CausalGraph graph_from_json(const json& j) {
    CausalGraph g;
    g.vertices = j.at("vertices").get<std::vector<std::string>>();
    if (j.contains("directed"))
        for (const auto& e : j["directed"]) g.add_directed(e.at(0).get<std::string>(), e.at(1).get<std::string>());
    if (j.contains("bidirected"))
        for (const auto& e : j["bidirected"]) g.add_bidirected(e.at(0).get<std::string>(), e.at(1).get<std::string>());
    for (const auto& [x, y] : g.directed)
        if (!g.has_vertex(x) || !g.has_vertex(y)) throw Error("graph json: edge endpoint not in vertices");
    for (const auto& [x, y] : g.bidirected)
        if (!g.has_vertex(x) || !g.has_vertex(y)) throw Error("graph json: edge endpoint not in vertices");
    return g;
}

inline json to_json(const Distribution& d) {
    return {{"scope", d.scope}, {"cards", d.cards}, {"probs", d.probs}};
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file: " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error("parse error in " + path + ": " + e.what());
    }
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    out << j.dump(2) << "\n";
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write file: " + path);
    out << text;
}

}  // namespace abstraq
