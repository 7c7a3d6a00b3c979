#pragma once

#include <algorithm>
#include <chrono>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "abstraction.hpp"
#include "clustering.hpp"
#include "generate.hpp"
#include "json_io.hpp"
#include "scm.hpp"
#include "tau.hpp"

namespace abstraq {

// Self-test mutations: deliberately broken artifacts that the corresponding
// check is expected to flag.
enum class Mutation { none, drop_fork_confounding, flip_abstract_table };

inline std::string to_string(Mutation m) {
    switch (m) {
        case Mutation::drop_fork_confounding: return "drop-fork-confounding";
        case Mutation::flip_abstract_table: return "flip-abstract-table";
        default: return "none";
    }
}

inline Mutation mutation_from_string(const std::string& s) {
    if (s == "none" || s.empty()) return Mutation::none;
    if (s == "drop-fork-confounding") return Mutation::drop_fork_confounding;
    if (s == "flip-abstract-table") return Mutation::flip_abstract_table;
    throw Error("unknown mutation: " + s);
}

struct SuiteOptions {
    GenParams params;
    int n_fixtures = 20;
    std::set<std::string> suites;  // empty means all
    double remainder_prob = 0.25;
    double tolerance = 1e-9;
    int inequality_trials = 50;
    Mutation mutation = Mutation::none;
};

struct SuiteCounterexample {
    int fixture = -1;
    std::string suite;
    std::string detail;
    json scm;
    json clustering;
    json abstraction;
    json descriptor;  // everything replay needs to reproduce the failure
};

struct SuiteOutcome {
    int pass = 0;
    int fail = 0;
    double wall_ms = 0.0;
    std::vector<SuiteCounterexample> counterexamples;
};

struct SuiteReport {
    std::map<std::string, SuiteOutcome> outcomes;

    bool all_passed() const {
        for (const auto& [name, o] : outcomes)
            if (o.fail > 0) return false;
        return true;
    }

    json to_json(bool include_timing = true) const {
        json out = json::object();
        for (const auto& [name, o] : outcomes) {
            json jo = {{"pass", o.pass}, {"fail", o.fail}};
            if (include_timing) jo["wall_ms"] = o.wall_ms;
            json ces = json::array();
            for (const auto& ce : o.counterexamples)
                ces.push_back({{"fixture", ce.fixture}, {"detail", ce.detail}});
            jo["counterexamples"] = ces;
            out[name] = jo;
        }
        return out;
    }
};

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {"abstraction_l2", "abstraction_l1", "roundtrip", "graphical",
                                                   "dsep",           "docalc",         "inequality", "tau"};
    return names;
}

namespace detail {

inline std::string describe_sep_statement(const SepStatement& st) {
    auto join = [](const std::set<std::string>& s) {
        std::string out = "{";
        bool first = true;
        for (const auto& v : s) {
            if (!first) out += ",";
            out += v;
            first = false;
        }
        return out + "}";
    };
    std::string msg;
    if (st.rule > 0) msg = "rule " + std::to_string(st.rule) + " ";
    msg += "x=" + join(st.x) + " y=" + join(st.y) + " z=" + join(st.z);
    if (st.rule > 0) msg += " w=" + join(st.w);
    return msg;
}

// Distributional check of every applicable do-calculus rule instance on the
// abstract model: the equality licensed by the rule must hold within tol.
// Returns an empty string on success, else a description of the violation.
inline std::string docalc_distribution_check(const Scm& abstract, const ClusterGraph& cg, double tol) {
    std::vector<std::string> ids;
    std::map<std::string, int> card;
    for (const auto& [cid, members] : cg.clustering.clusters) {
        ids.push_back(cid);
        card[cid] = abstract.endogenous[abstract.endo_index(cid)].card();
    }
    JointCache joints{&abstract, {}};
    std::string failure;

    enumerate_roles(ids, 4, [&](const std::vector<int>& role) {
        if (!failure.empty()) return;
        std::vector<std::string> xs, ys, zs, ws;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (role[i] == 0) xs.push_back(ids[i]);
            if (role[i] == 1) ys.push_back(ids[i]);
            if (role[i] == 2) zs.push_back(ids[i]);
            if (role[i] == 3) ws.push_back(ids[i]);
        }
        if (ys.empty() || zs.empty()) return;
        std::set<std::string> xset(xs.begin(), xs.end()), yset(ys.begin(), ys.end()), zset(zs.begin(), zs.end()),
            wset(ws.begin(), ws.end());

        for (int rule = 1; rule <= 3 && failure.empty(); ++rule) {
            if (!do_rule_applicable(cg.graph, rule, xset, yset, zset, wset)) continue;

            std::vector<int> xcards, zcards, wcards;
            for (const auto& v : xs) xcards.push_back(card[v]);
            for (const auto& v : zs) zcards.push_back(card[v]);
            for (const auto& v : ws) wcards.push_back(card[v]);

            for_each_assignment(xs, xcards, [&](const Intervention& x_asg) {
                if (!failure.empty()) return;
                for_each_assignment(zs, zcards, [&](const Intervention& z_asg) {
                    if (!failure.empty()) return;
                    for_each_assignment(ws, wcards, [&](const Intervention& w_asg) {
                        if (!failure.empty()) return;
                        std::map<std::string, int> w_ev(w_asg.begin(), w_asg.end());
                        std::map<std::string, int> zw_ev = w_ev;
                        for (const auto& [k, v] : z_asg) zw_ev[k] = v;
                        Intervention xz = x_asg;
                        for (const auto& [k, v] : z_asg) xz[k] = v;

                        Distribution lhs, rhs;
                        try {
                            if (rule == 1) {
                                const Distribution& jx = joints.get(x_asg);
                                lhs = marginalize(condition(jx, zw_ev), ys);
                                rhs = marginalize(w_ev.empty() ? jx : condition(jx, w_ev), ys);
                            } else if (rule == 2) {
                                const Distribution& jxz = joints.get(xz);
                                lhs = marginalize(w_ev.empty() ? jxz : condition(jxz, w_ev), ys);
                                const Distribution& jx = joints.get(x_asg);
                                rhs = marginalize(condition(jx, zw_ev), ys);
                            } else {
                                const Distribution& jxz = joints.get(xz);
                                lhs = marginalize(w_ev.empty() ? jxz : condition(jxz, w_ev), ys);
                                const Distribution& jx = joints.get(x_asg);
                                rhs = marginalize(w_ev.empty() ? jx : condition(jx, w_ev), ys);
                            }
                        } catch (const ZeroProbabilityEvidence&) {
                            return;  // cell undefined on one side; skipped
                        }
                        double d = total_variation(lhs, rhs);
                        if (d > tol) {
                            SepStatement st{xset, yset, zset, rule, wset};
                            failure = "do-calculus equality violated (" + describe_sep_statement(st) +
                                      "), distance " + std::to_string(d);
                        }
                    });
                });
            });
        }
    });
    return failure;
}

// Exhaustive cluster-level separation consistency over disjoint role splits.
inline std::string dsep_consistency_check(const CausalGraph& g, const ClusterGraph& cg) {
    std::vector<std::string> ids;
    for (const auto& [cid, members] : cg.clustering.clusters) ids.push_back(cid);
    std::string failure;
    enumerate_roles(ids, 3, [&](const std::vector<int>& role) {
        if (!failure.empty()) return;
        SepQuery q;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (role[i] == 0) q.x.insert(ids[i]);
            if (role[i] == 1) q.y.insert(ids[i]);
            if (role[i] == 2) q.z.insert(ids[i]);
        }
        if (q.x.empty() || q.y.empty()) return;
        auto r = cluster_d_sep_check(g, cg, q);
        if (!r.consistent) {
            SepStatement st{q.x, q.y, q.z, 0, {}};
            failure = "separation verdicts disagree (" + describe_sep_statement(st) + ")";
        }
    });
    return failure;
}

}  // namespace detail

struct CheckResult {
    bool ok = false;
    std::string detail;
};

// One named check against one concrete fixture. This is the single source of
// truth shared by the fuzz loop and by counterexample replay.
inline CheckResult run_suite_check(const std::string& suite, const Scm& base, const Clustering& c, double tolerance,
                                   int inequality_trials, std::uint64_t inequality_seed,
                                   Mutation mutation = Mutation::none) {
    CausalGraph g = induced_graph(base);
    auto built = construct_abstract_scm(base, c);
    Scm& abstract = built.first;
    const Abstraction& alpha = built.second;
    if (mutation == Mutation::flip_abstract_table) {
        Mechanism& f = abstract.mechanisms.front();
        const int card = abstract.endogenous[abstract.endo_index(f.child)].card();
        f.table[0] = (f.table[0] + 1) % card;
    }
    ClusterGraph cg = detail::build_pcdag_with_rules(g, c, mutation != Mutation::drop_fork_confounding);

    if (suite == "abstraction_l2" || suite == "abstraction_l1") {
        const Layer layer = suite == "abstraction_l2" ? Layer::l2 : Layer::l1;
        auto rep = abstraction_error(base, abstract, alpha, layer, Metric::tv);
        return {rep.max_error <= tolerance, "abstraction error " + std::to_string(rep.max_error)};
    }
    if (suite == "roundtrip") {
        try {
            auto rec = recover_structure(base, abstract, alpha, tolerance);
            if (rec.graph == cg.graph) return {true, ""};
            return {false, "recovered structure differs from the graphical construction"};
        } catch (const InconsistentAbstraction& e) {
            return {false, e.what()};
        }
    }
    if (suite == "graphical") {
        auto r1 = check_graphical_consistency(g, cg, Layer::l1);
        auto r2 = check_graphical_consistency(g, cg, Layer::l2);
        std::string detail;
        if (!r1.consistent) detail = "layer-1: " + detail::describe_sep_statement(r1.counterexamples.front());
        if (!r2.consistent) detail += "layer-2: " + detail::describe_sep_statement(r2.counterexamples.front());
        return {r1.consistent && r2.consistent, detail};
    }
    if (suite == "dsep") {
        std::string failure = detail::dsep_consistency_check(g, cg);
        return {failure.empty(), failure};
    }
    if (suite == "docalc") {
        std::string failure = detail::docalc_distribution_check(abstract, cg, tolerance);
        return {failure.empty(), failure};
    }
    if (suite == "inequality") {
        auto rep = check_inequality_preservation(base, alpha, inequality_trials, inequality_seed, tolerance);
        std::string detail;
        if (rep.failed > 0 && rep.counterexample)
            detail = "pushforward broke distance transport (base distance " +
                     std::to_string(rep.counterexample->base_distance) + ", pushed " +
                     std::to_string(rep.counterexample->pushed_distance) + ")";
        return {rep.failed == 0, detail};
    }
    if (suite == "tau") {
        try {
            auto rep = check_tau_compatibility(base, abstract, alpha);
            if (rep.compatible && rep.tau_u_surjective) return {true, ""};
            std::string detail;
            if (!rep.compatible && rep.counterexample) {
                detail = "state-map compatibility violated at u=(";
                for (std::size_t k = 0; k < rep.counterexample->u.size(); ++k)
                    detail += (k ? "," : "") + std::to_string(rep.counterexample->u[k]);
                detail += ")";
            } else if (!rep.tau_u_surjective) {
                detail = "exogenous class map is not surjective";
            }
            return {false, detail};
        } catch (const HypothesisViolated& e) {
            return {false, e.what()};
        }
    }
    throw Error("unknown suite: " + suite);
}

// Seeded end-to-end verification: per fixture, generate a model and a
// clustering, build the abstract model, and run the selected checks. Each
// failure is recorded with a replayable serialized fixture.
inline SuiteReport run_theorem_suite(const SuiteOptions& opt) {
    SuiteReport report;
    std::set<std::string> enabled = opt.suites;
    if (enabled.empty()) enabled.insert(suite_names().begin(), suite_names().end());
    for (const auto& name : enabled) {
        if (!std::count(suite_names().begin(), suite_names().end(), name)) throw Error("unknown suite: " + name);
        report.outcomes[name];
    }

    using clock = std::chrono::steady_clock;

    for (int i = 0; i < opt.n_fixtures; ++i) {
        GenParams p = opt.params;
        p.seed = split_seed(opt.params.seed, 2 * static_cast<std::uint64_t>(i));
        const std::uint64_t clustering_seed = split_seed(opt.params.seed, 2 * static_cast<std::uint64_t>(i) + 1);

        auto run_one = [&](const std::string& suite, const Scm& base, const Clustering& c, std::uint64_t ineq_seed) {
            auto& o = report.outcomes[suite];
            auto t0 = clock::now();
            CheckResult r = run_suite_check(suite, base, c, opt.tolerance, opt.inequality_trials, ineq_seed,
                                            opt.mutation);
            o.wall_ms += std::chrono::duration<double, std::milli>(clock::now() - t0).count();
            if (r.ok) {
                ++o.pass;
                return;
            }
            ++o.fail;
            SuiteCounterexample ce;
            ce.fixture = i;
            ce.suite = suite;
            ce.detail = r.detail;
            ce.scm = to_json(base);
            ce.clustering = to_json(c);
            ce.abstraction = to_json(construct_abstract_scm(base, c).second);
            ce.descriptor = {{"suite", suite},
                             {"fixture", i},
                             {"detail", r.detail},
                             {"tolerance", opt.tolerance},
                             {"inequality_trials", opt.inequality_trials},
                             {"inequality_seed", ineq_seed},
                             {"mutation", to_string(opt.mutation)}};
            o.counterexamples.push_back(std::move(ce));
        };

        const bool needs_main_fixture =
            enabled.count("abstraction_l2") || enabled.count("abstraction_l1") || enabled.count("roundtrip") ||
            enabled.count("graphical") || enabled.count("dsep") || enabled.count("docalc") ||
            enabled.count("inequality");
        if (needs_main_fixture) {
            Scm base = random_scm(p);
            Clustering c = random_clustering(induced_graph(base), clustering_seed, opt.remainder_prob);
            const std::uint64_t ineq_seed = split_seed(p.seed, 7);
            for (const auto& suite : suite_names()) {
                if (suite == "tau" || !enabled.count(suite)) continue;
                run_one(suite, base, c, ineq_seed);
            }
        }

        if (enabled.count("tau")) {
            GenParams pt = p;
            pt.seed = split_seed(p.seed, 11);
            Scm base = random_scm_full_support(pt);
            Clustering c = random_clustering(induced_graph(base), split_seed(clustering_seed, 11),
                                             opt.remainder_prob);
            run_one("tau", base, c, split_seed(pt.seed, 7));
        }
    }
    return report;
}

// Re-run a bundled counterexample. Returns the fresh check result; the
// failure "reproduces" when ok is still false.
inline CheckResult replay_counterexample(const json& descriptor, const json& scm_doc, const json& clustering_doc) {
    const std::string suite = descriptor.at("suite").get<std::string>();
    const double tolerance = descriptor.value("tolerance", 1e-9);
    const int trials = descriptor.value("inequality_trials", 50);
    const std::uint64_t ineq_seed = descriptor.value("inequality_seed", std::uint64_t{0});
    const Mutation mutation = mutation_from_string(descriptor.value("mutation", "none"));
    Scm base = scm_from_json(scm_doc);
    Clustering c = clustering_from_json(clustering_doc);
    return run_suite_check(suite, base, c, tolerance, trials, ineq_seed, mutation);
}

}  // namespace abstraq
