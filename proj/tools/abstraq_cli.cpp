// Command-line front end: model validation, cluster-graph construction,
// abstraction building and checking, separation/do-calculus queries, and the
// seeded verification fuzzer with replayable counterexample bundles.
//
// Exit codes: 0 = pass, 1 = a check failed, 2 = usage or parse error.
// JSON goes to stdout; prose diagnostics go to stderr.

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <abstraq/abstraq.hpp>

namespace {

using abstraq::json;

// Distinguishes bad invocations/documents (exit 2) from failed checks (exit 1).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double env_tolerance() {
    const char* s = std::getenv("ABSTRAQ_TOLERANCE");
    if (!s || !*s) return 1e-9;
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != std::strlen(s) || !(v >= 0.0)) throw std::invalid_argument("range");
        return v;
    } catch (const std::exception&) {
        throw UsageError(std::string("invalid ABSTRAQ_TOLERANCE value: ") + s);
    }
}

json load_doc(const std::string& path) {
    try {
        return abstraq::load_json_file(path);
    } catch (const abstraq::Error& e) {
        throw UsageError(e.what());
    }
}

abstraq::Scm load_scm(const std::string& path) {
    const json doc = load_doc(path);
    try {
        return abstraq::scm_from_json(doc);
    } catch (const std::exception& e) {
        throw UsageError(path + ": " + e.what());
    }
}

abstraq::Clustering load_clustering(const std::string& path) {
    const json doc = load_doc(path);
    try {
        return abstraq::clustering_from_json(doc);
    } catch (const std::exception& e) {
        throw UsageError(path + ": " + e.what());
    }
}

abstraq::Abstraction load_abstraction(const std::string& path) {
    const json doc = load_doc(path);
    try {
        return abstraq::abstraction_from_json(doc);
    } catch (const std::exception& e) {
        throw UsageError(path + ": " + e.what());
    }
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

// DOT output: "-" means stdout (replacing the JSON), otherwise a file path.
// Returns true when DOT went to stdout.
bool emit_dot(const std::string& dot_target, const std::string& dot) {
    if (dot_target.empty()) return false;
    if (dot_target == "-") {
        std::cout << dot;
        return true;
    }
    abstraq::write_text_file(dot_target, dot);
    return false;
}

json edges_json(const std::vector<std::pair<std::string, std::string>>& edges) {
    json out = json::array();
    for (const auto& [a, b] : edges) out.push_back({a, b});
    return out;
}

json cluster_graph_json(const abstraq::ClusterGraph& cg) {
    json clusters = json::object();
    for (const auto& [id, members] : cg.clustering.clusters) clusters[id] = members;
    return {{"clusters", clusters},
            {"remainder", std::vector<std::string>(cg.clustering.remainder.begin(), cg.clustering.remainder.end())},
            {"graph", abstraq::to_json(cg.graph)}};
}

json consistency_json(const abstraq::ConsistencyReport& r) {
    json j = {{"layer", r.layer == abstraq::Layer::l2 ? "l2" : "l1"},
              {"metric", r.metric == abstraq::Metric::tv ? "tv" : "max-abs"},
              {"max_error", r.max_error},
              {"cells_checked", r.cells_checked},
              {"skipped_evidence", r.skipped_evidence}};
    if (r.witness)
        j["witness"] = {{"x_set", r.witness->x_set},
                        {"y_set", r.witness->y_set},
                        {"x_base_values", r.witness->x_base_values},
                        {"error", r.witness->error}};
    return j;
}

void require_known_vertices(const abstraq::CausalGraph& g, const std::vector<std::string>& names,
                            const char* role) {
    for (const auto& n : names)
        if (!g.has_vertex(n)) throw UsageError(std::string(role) + ": unknown vertex " + n);
}

std::set<std::string> as_set(const std::vector<std::string>& v) { return {v.begin(), v.end()}; }

// ---- validate ----

struct ValidateOpts {
    std::string scm, clustering, abstraction;
};

int cmd_validate(const ValidateOpts& o) {
    std::vector<std::string> issues;
    std::optional<abstraq::Scm> m;
    const json doc = load_doc(o.scm);
    try {
        m = abstraq::scm_from_json(doc);
    } catch (const std::exception& e) {
        issues.push_back(std::string("document: ") + e.what());
    }
    if (m) {
        for (auto& msg : abstraq::validate_scm(*m)) issues.push_back(msg);
        if (issues.empty()) {
            if (!o.clustering.empty()) {
                const json cdoc = load_doc(o.clustering);
                try {
                    auto c = abstraq::clustering_from_json(cdoc);
                    for (auto& issue : abstraq::validate_clustering(abstraq::induced_graph(*m), c))
                        issues.push_back(issue.code + ": " + issue.message);
                } catch (const std::exception& e) {
                    issues.push_back(std::string("clustering document: ") + e.what());
                }
            }
            if (!o.abstraction.empty()) {
                const json adoc = load_doc(o.abstraction);
                try {
                    auto a = abstraq::abstraction_from_json(adoc);
                    for (auto& msg : abstraq::validate_abstraction(*m, a)) issues.push_back(msg);
                } catch (const std::exception& e) {
                    issues.push_back(std::string("abstraction document: ") + e.what());
                }
            }
        }
    }
    emit({{"valid", issues.empty()}, {"issues", issues}});
    return issues.empty() ? 0 : 1;
}

// ---- graph / cdag / pcdag ----

struct GraphOpts {
    std::string scm, clustering, dot;
};

int cmd_graph(const GraphOpts& o) {
    abstraq::CausalGraph g = abstraq::induced_graph(load_scm(o.scm));
    if (emit_dot(o.dot, abstraq::to_dot(g))) return 0;
    emit(abstraq::to_json(g));
    return 0;
}

int cmd_cluster_graph(const GraphOpts& o, bool total) {
    abstraq::Scm m = load_scm(o.scm);
    abstraq::Clustering c = load_clustering(o.clustering);
    abstraq::CausalGraph g = abstraq::induced_graph(m);
    abstraq::ClusterGraph cg = total ? abstraq::build_cdag(g, c) : abstraq::build_pcdag(g, c);
    if (emit_dot(o.dot, abstraq::to_dot(cg))) return 0;
    emit(cluster_graph_json(cg));
    return 0;
}

// ---- build-abstract ----

struct BuildOpts {
    std::string scm, clustering, out_scm, out_abstraction;
};

int cmd_build_abstract(const BuildOpts& o) {
    abstraq::Scm m = load_scm(o.scm);
    abstraq::Clustering c = load_clustering(o.clustering);
    auto [abstract, alpha] = abstraq::construct_abstract_scm(m, c);
    const json jscm = abstraq::to_json(abstract);
    const json jabs = abstraq::to_json(alpha);
    if (!o.out_scm.empty()) abstraq::write_json_file(o.out_scm, jscm);
    if (!o.out_abstraction.empty()) abstraq::write_json_file(o.out_abstraction, jabs);
    emit({{"scm", jscm}, {"abstraction", jabs}});
    return 0;
}

// ---- check ----

struct CheckOpts {
    std::string base, abstract_scm, abstraction;
    std::string layer = "both";
    std::string metric = "tv";
    double tolerance = 1e-9;
};

int cmd_check(const CheckOpts& o) {
    abstraq::Scm base = load_scm(o.base);
    abstraq::Scm abstract = load_scm(o.abstract_scm);
    abstraq::Abstraction a = load_abstraction(o.abstraction);
    const abstraq::Metric metric = o.metric == "tv" ? abstraq::Metric::tv : abstraq::Metric::max_abs;

    json layers = json::object();
    bool pass = true;
    for (const char* name : {"l2", "l1"}) {
        if (o.layer != "both" && o.layer != name) continue;
        const abstraq::Layer layer = std::string(name) == "l2" ? abstraq::Layer::l2 : abstraq::Layer::l1;
        auto rep = abstraq::abstraction_error(base, abstract, a, layer, metric);
        layers[name] = consistency_json(rep);
        pass = pass && rep.max_error <= o.tolerance;
    }
    emit({{"layers", layers}, {"tolerance", o.tolerance}, {"pass", pass}});
    return pass ? 0 : 1;
}

// ---- recover ----

struct RecoverOpts {
    std::string base, abstract_scm, abstraction, clustering, dot;
    double tolerance = 1e-9;
};

int cmd_recover(const RecoverOpts& o) {
    abstraq::Scm base = load_scm(o.base);
    abstraq::Scm abstract;
    abstraq::Abstraction a;
    if (!o.clustering.empty()) {
        auto built = abstraq::construct_abstract_scm(base, load_clustering(o.clustering));
        abstract = std::move(built.first);
        a = std::move(built.second);
    } else {
        abstract = load_scm(o.abstract_scm);
        a = load_abstraction(o.abstraction);
    }
    auto rec = abstraq::recover_structure(base, abstract, a, o.tolerance);
    if (emit_dot(o.dot, abstraq::to_dot(rec.graph))) return 0;
    emit({{"graph", abstraq::to_json(rec.graph)},
          {"surjective_mode", rec.surjective_mode},
          {"omitted_directed", edges_json(rec.omitted_directed)},
          {"omitted_bidirected", edges_json(rec.omitted_bidirected)}});
    return 0;
}

// ---- dsep / docalc ----

struct SepOpts {
    std::string scm, graph, clustering;
    std::vector<std::string> x, y, z, w;
    int rule = 0;
};

abstraq::CausalGraph load_query_graph(const SepOpts& o) {
    if (!o.graph.empty()) {
        const json doc = load_doc(o.graph);
        try {
            return abstraq::graph_from_json(doc);
        } catch (const std::exception& e) {
            throw UsageError(o.graph + ": " + e.what());
        }
    }
    return abstraq::induced_graph(load_scm(o.scm));
}

int cmd_dsep(const SepOpts& o) {
    abstraq::CausalGraph g = load_query_graph(o);
    if (!o.clustering.empty()) {
        abstraq::Clustering c = load_clustering(o.clustering);
        abstraq::ClusterGraph cg = abstraq::build_pcdag(g, c);
        require_known_vertices(cg.graph, o.x, "x");
        require_known_vertices(cg.graph, o.y, "y");
        require_known_vertices(cg.graph, o.z, "z");
        auto r = abstraq::cluster_d_sep_check(g, cg, {as_set(o.x), as_set(o.y), as_set(o.z)});
        emit({{"separated", r.cluster_verdict},
              {"base_separated", r.base_verdict},
              {"consistent", r.consistent}});
        return r.cluster_verdict ? 0 : 1;
    }
    require_known_vertices(g, o.x, "x");
    require_known_vertices(g, o.y, "y");
    require_known_vertices(g, o.z, "z");
    const bool sep = abstraq::d_separated(g, {as_set(o.x), as_set(o.y), as_set(o.z)});
    emit({{"separated", sep}});
    return sep ? 0 : 1;
}

int cmd_docalc(const SepOpts& o) {
    abstraq::CausalGraph g = load_query_graph(o);
    bool applicable = false;
    if (!o.clustering.empty()) {
        abstraq::Clustering c = load_clustering(o.clustering);
        abstraq::ClusterGraph cg = abstraq::build_pcdag(g, c);
        require_known_vertices(cg.graph, o.x, "x");
        require_known_vertices(cg.graph, o.y, "y");
        require_known_vertices(cg.graph, o.z, "z");
        require_known_vertices(cg.graph, o.w, "w");
        applicable = abstraq::do_calculus_applicable(cg, o.rule, as_set(o.x), as_set(o.y), as_set(o.z), as_set(o.w));
    } else {
        require_known_vertices(g, o.x, "x");
        require_known_vertices(g, o.y, "y");
        require_known_vertices(g, o.z, "z");
        require_known_vertices(g, o.w, "w");
        applicable = abstraq::do_rule_applicable(g, o.rule, as_set(o.x), as_set(o.y), as_set(o.z), as_set(o.w));
    }
    emit({{"rule", o.rule}, {"applicable", applicable}});
    return applicable ? 0 : 1;
}

// ---- tau-check ----

struct TauOpts {
    std::string base, abstract_scm, abstraction;
    int max_clusters = 2;
};

int cmd_tau_check(const TauOpts& o) {
    abstraq::Scm base = load_scm(o.base);
    abstraq::Scm abstract = load_scm(o.abstract_scm);
    abstraq::Abstraction a = load_abstraction(o.abstraction);
    abstraq::TauMap tau = abstraq::derive_tau(base, a);
    auto rep = abstraq::check_tau_compatibility(base, abstract, a, o.max_clusters);

    json blocks = json::object();
    for (const auto& [av, members] : tau.blocks) blocks[av] = members;
    json out = {{"compatible", rep.compatible},
                {"full_base_support", rep.full_base_support},
                {"full_abstract_support", rep.full_abstract_support},
                {"tau_u_surjective", rep.tau_u_surjective},
                {"checked_pairs", rep.checked_pairs},
                {"blocks", blocks},
                {"dropped", tau.dropped}};
    if (rep.counterexample) {
        const auto& ce = *rep.counterexample;
        out["counterexample"] = {{"u", ce.u},
                                 {"base_do", json(ce.base_do)},
                                 {"abstract_do", json(ce.abstract_do)},
                                 {"left", ce.left},
                                 {"right", ce.right}};
    }
    emit(out);
    return rep.compatible && rep.tau_u_surjective ? 0 : 1;
}

// ---- fuzz / replay ----

struct FuzzOpts {
    abstraq::SuiteOptions suite;
    std::vector<std::string> suites;
    std::string mutate = "none";
    std::string bundle_dir;
    bool no_timing = false;
};

int cmd_fuzz(const FuzzOpts& o) {
    abstraq::SuiteOptions opt = o.suite;
    for (const auto& s : o.suites) {
        if (!std::count(abstraq::suite_names().begin(), abstraq::suite_names().end(), s))
            throw UsageError("unknown suite: " + s);
        opt.suites.insert(s);
    }
    try {
        opt.mutation = abstraq::mutation_from_string(o.mutate);
    } catch (const abstraq::Error& e) {
        throw UsageError(e.what());
    }

    abstraq::SuiteReport report = abstraq::run_theorem_suite(opt);

    if (!o.bundle_dir.empty()) {
        for (const auto& [suite, outcome] : report.outcomes) {
            for (const auto& ce : outcome.counterexamples) {
                const std::string dir =
                    o.bundle_dir + "/fixture" + std::to_string(ce.fixture) + "_" + ce.suite;
                std::filesystem::create_directories(dir);
                abstraq::write_json_file(dir + "/scm.json", ce.scm);
                abstraq::write_json_file(dir + "/clustering.json", ce.clustering);
                abstraq::write_json_file(dir + "/abstraction.json", ce.abstraction);
                abstraq::write_json_file(dir + "/descriptor.json", ce.descriptor);
                std::cerr << "wrote counterexample bundle " << dir << "\n";
            }
        }
    }
    emit(report.to_json(!o.no_timing));
    return report.all_passed() ? 0 : 1;
}

struct ReplayOpts {
    std::string bundle;
};

int cmd_replay(const ReplayOpts& o) {
    const json descriptor = load_doc(o.bundle + "/descriptor.json");
    const json scm_doc = load_doc(o.bundle + "/scm.json");
    const json clustering_doc = load_doc(o.bundle + "/clustering.json");
    abstraq::CheckResult r;
    try {
        r = abstraq::replay_counterexample(descriptor, scm_doc, clustering_doc);
    } catch (const json::exception& e) {
        throw UsageError(o.bundle + "/descriptor.json: " + e.what());
    }
    emit({{"suite", descriptor.value("suite", "")}, {"reproduced", !r.ok}, {"detail", r.detail}});
    return r.ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    std::ios::sync_with_stdio(false);
    CLI::App app{"finite-domain causal models: clustering, abstraction construction, and verification"};
    app.require_subcommand(1);

    double tol_default = 1e-9;
    try {
        tol_default = env_tolerance();
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    int exit_code = 0;

    {
        auto o = std::make_shared<ValidateOpts>();
        auto* sub = app.add_subcommand("validate", "Validate a model document (optionally with a clustering "
                                                   "and an abstraction against it)");
        sub->add_option("scm", o->scm, "model JSON file")->required();
        sub->add_option("--clustering", o->clustering, "clustering JSON file");
        sub->add_option("--abstraction", o->abstraction, "abstraction JSON file");
        sub->callback([o, &exit_code] { exit_code = cmd_validate(*o); });
    }
    {
        auto o = std::make_shared<GraphOpts>();
        auto* sub = app.add_subcommand("graph", "Induced graph of a model (directed + bidirected edges)");
        sub->add_option("scm", o->scm, "model JSON file")->required();
        sub->add_option("--dot", o->dot, "write DOT to this path ('-' prints DOT instead of JSON)");
        sub->callback([o, &exit_code] { exit_code = cmd_graph(*o); });
    }
    {
        auto o = std::make_shared<GraphOpts>();
        auto* sub = app.add_subcommand("cdag", "Cluster the induced graph with a total clustering");
        sub->add_option("scm", o->scm, "model JSON file")->required();
        sub->add_option("--clustering", o->clustering, "clustering JSON file")->required();
        sub->add_option("--dot", o->dot, "write DOT to this path ('-' prints DOT instead of JSON)");
        sub->callback([o, &exit_code] { exit_code = cmd_cluster_graph(*o, true); });
    }
    {
        auto o = std::make_shared<GraphOpts>();
        auto* sub = app.add_subcommand("pcdag", "Cluster the induced graph with a partial clustering");
        sub->add_option("scm", o->scm, "model JSON file")->required();
        sub->add_option("--clustering", o->clustering, "clustering JSON file")->required();
        sub->add_option("--dot", o->dot, "write DOT to this path ('-' prints DOT instead of JSON)");
        sub->callback([o, &exit_code] { exit_code = cmd_cluster_graph(*o, false); });
    }
    {
        auto o = std::make_shared<BuildOpts>();
        auto* sub = app.add_subcommand("build-abstract", "Construct the abstract model for a clustering");
        sub->add_option("scm", o->scm, "base model JSON file")->required();
        sub->add_option("--clustering", o->clustering, "clustering JSON file")->required();
        sub->add_option("--out-scm", o->out_scm, "also write the abstract model here");
        sub->add_option("--out-abstraction", o->out_abstraction, "also write the abstraction here");
        sub->callback([o, &exit_code] { exit_code = cmd_build_abstract(*o); });
    }
    {
        auto o = std::make_shared<CheckOpts>();
        o->tolerance = tol_default;
        auto* sub = app.add_subcommand("check", "Measure the worst-case abstraction error between two models");
        sub->add_option("--base", o->base, "base model JSON file")->required();
        sub->add_option("--abstract-scm", o->abstract_scm, "abstract model JSON file")->required();
        sub->add_option("--abstraction", o->abstraction, "abstraction JSON file")->required();
        sub->add_option("--layer", o->layer, "l1, l2, or both (default both)")
            ->check(CLI::IsMember({"l1", "l2", "both"}));
        sub->add_option("--metric", o->metric, "tv or max-abs (default tv)")
            ->check(CLI::IsMember({"tv", "max-abs"}));
        sub->add_option("--tolerance", o->tolerance, "pass threshold");
        sub->callback([o, &exit_code] { exit_code = cmd_check(*o); });
    }
    {
        auto o = std::make_shared<RecoverOpts>();
        o->tolerance = tol_default;
        auto* sub = app.add_subcommand("recover", "Recover cluster-level structure from interventional "
                                                  "distributions");
        sub->add_option("--base", o->base, "base model JSON file")->required();
        auto* ab = sub->add_option("--abstract-scm", o->abstract_scm, "abstract model JSON file");
        auto* am = sub->add_option("--abstraction", o->abstraction, "abstraction JSON file");
        auto* cl = sub->add_option("--clustering", o->clustering,
                                   "build the abstract model from this clustering instead");
        ab->needs(am);
        am->needs(ab);
        cl->excludes(ab);
        sub->add_option("--tolerance", o->tolerance, "distribution comparison threshold");
        sub->add_option("--dot", o->dot, "write DOT to this path ('-' prints DOT instead of JSON)");
        sub->callback([o, &exit_code] {
            if (o->clustering.empty() && o->abstract_scm.empty())
                throw UsageError("recover: pass either --clustering or --abstract-scm with --abstraction");
            exit_code = cmd_recover(*o);
        });
    }
    {
        auto o = std::make_shared<SepOpts>();
        auto* sub = app.add_subcommand("dsep", "Separation query on a graph, a model, or a clustered model");
        auto* gs = sub->add_option("--scm", o->scm, "model JSON file (induced graph)");
        auto* gg = sub->add_option("--graph", o->graph, "graph JSON file");
        gs->excludes(gg);
        sub->add_option("--clustering", o->clustering, "query the clustered graph and cross-check the base");
        sub->add_option("-x,--x", o->x, "first vertex set")->required()->delimiter(',');
        sub->add_option("-y,--y", o->y, "second vertex set")->required()->delimiter(',');
        sub->add_option("-z,--z", o->z, "conditioning set")->delimiter(',');
        sub->callback([o, &exit_code] {
            if (o->scm.empty() && o->graph.empty()) throw UsageError("dsep: pass --scm or --graph");
            exit_code = cmd_dsep(*o);
        });
    }
    {
        auto o = std::make_shared<SepOpts>();
        auto* sub = app.add_subcommand("docalc", "Graphical applicability of an intervention-calculus rule");
        auto* gs = sub->add_option("--scm", o->scm, "model JSON file (induced graph)");
        auto* gg = sub->add_option("--graph", o->graph, "graph JSON file");
        gs->excludes(gg);
        sub->add_option("--clustering", o->clustering, "apply the rule on the clustered graph");
        sub->add_option("--rule", o->rule, "rule number: 1, 2, or 3")->required()->check(CLI::Range(1, 3));
        sub->add_option("-x,--x", o->x, "intervention set already in place")->delimiter(',');
        sub->add_option("-y,--y", o->y, "outcome set")->required()->delimiter(',');
        sub->add_option("-z,--z", o->z, "set the rule acts on")->delimiter(',');
        sub->add_option("-w,--w", o->w, "additional conditioning set")->delimiter(',');
        sub->callback([o, &exit_code] {
            if (o->scm.empty() && o->graph.empty()) throw UsageError("docalc: pass --scm or --graph");
            exit_code = cmd_docalc(*o);
        });
    }
    {
        auto o = std::make_shared<TauOpts>();
        auto* sub = app.add_subcommand("tau-check", "Check state-map compatibility between two models");
        sub->add_option("--base", o->base, "base model JSON file")->required();
        sub->add_option("--abstract-scm", o->abstract_scm, "abstract model JSON file")->required();
        sub->add_option("--abstraction", o->abstraction, "abstraction JSON file")->required();
        sub->add_option("--max-clusters", o->max_clusters, "intervention size cap (default 2)");
        sub->callback([o, &exit_code] { exit_code = cmd_tau_check(*o); });
    }
    {
        auto o = std::make_shared<FuzzOpts>();
        o->suite.tolerance = tol_default;
        auto* sub = app.add_subcommand("fuzz", "Run the seeded verification suites on generated fixtures");
        sub->add_option("--seed", o->suite.params.seed, "master seed (default 0)");
        sub->add_option("--fixtures", o->suite.n_fixtures, "number of fixtures (default 20)");
        sub->add_option("--endo", o->suite.params.n_endo, "endogenous variables per fixture (default 5)");
        sub->add_option("--exo", o->suite.params.n_exo, "confounder cap per fixture (default 3)");
        sub->add_option("--max-domain", o->suite.params.max_domain, "maximum domain size (default 3)");
        sub->add_option("--edge-prob", o->suite.params.edge_prob, "directed edge probability (default 0.5)");
        sub->add_option("--confound-prob", o->suite.params.confound_prob,
                        "shared-noise probability (default 0.15)");
        sub->add_option("--gap", o->suite.params.faithfulness_gap,
                        "minimum dependence gap enforced by the generator (default 1e-6)");
        sub->add_option("--remainder-prob", o->suite.remainder_prob,
                        "chance a variable stays unclustered (default 0.25)");
        sub->add_option("--trials", o->suite.inequality_trials,
                        "query pairs per fixture for the inequality suite (default 50)");
        sub->add_option("--tolerance", o->suite.tolerance, "distribution comparison threshold");
        sub->add_option("--suite", o->suites, "suite name (repeatable; default all)")->delimiter(',');
        sub->add_option("--mutate", o->mutate,
                        "self-test mutation: none, drop-fork-confounding, flip-abstract-table")
            ->check(CLI::IsMember({"none", "drop-fork-confounding", "flip-abstract-table"}));
        sub->add_option("--bundle-dir", o->bundle_dir, "write replayable counterexample bundles here");
        sub->add_flag("--no-timing", o->no_timing, "omit wall-clock timings from the report");
        sub->callback([o, &exit_code] { exit_code = cmd_fuzz(*o); });
    }
    {
        auto o = std::make_shared<ReplayOpts>();
        auto* sub = app.add_subcommand("replay", "Re-run a counterexample bundle");
        sub->add_option("bundle", o->bundle, "bundle directory written by fuzz --bundle-dir")->required();
        sub->callback([o, &exit_code] { exit_code = cmd_replay(*o); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: malformed document: " << e.what() << "\n";
        return 2;
    } catch (const abstraq::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}
