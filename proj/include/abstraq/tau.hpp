#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "abstraction.hpp"
#include "scm.hpp"

namespace abstraq {

// Blockwise endogenous-state map assembled from the abstraction: one block
// per abstract variable plus a dropped block for the non-relevant
// variables. Applies to full base assignments, producing full abstract
// assignments in abstract variable order.
struct TauMap {
    std::vector<std::pair<std::string, std::vector<std::string>>> blocks;  // abstract var -> ordered members
    std::map<std::string, AlphaMap> alpha;
    std::vector<std::string> dropped;

    std::vector<int> apply(const Scm& base, const std::vector<int>& v) const {
        std::vector<int> out;
        out.reserve(blocks.size());
        for (const auto& [av, members] : blocks) {
            std::vector<int> cards, vals;
            for (const auto& name : members) {
                int vi = base.endo_index(name);
                cards.push_back(base.endogenous[vi].card());
                vals.push_back(v[vi]);
            }
            out.push_back(alpha.at(av).map[radix_encode(cards, vals)]);
        }
        return out;
    }
};

// Assemble the state map and verify per-block surjectivity by image
// enumeration (a product of surjective blocks is surjective).
inline TauMap derive_tau(const Scm& base, const Abstraction& a) {
    auto violations = validate_abstraction(base, a);
    if (!violations.empty()) throw Error("derive_tau: invalid abstraction: " + violations.front());
    TauMap t;
    t.blocks = a.preimages;
    t.alpha = a.alpha;
    std::set<std::string> rel(a.relevant.begin(), a.relevant.end());
    for (const auto& v : base.endogenous)
        if (!rel.count(v.name)) t.dropped.push_back(v.name);
    for (const auto& [av, am] : t.alpha) {
        std::vector<bool> hit(am.codomain_size, false);
        for (int x : am.map) hit[x] = true;
        for (bool h : hit)
            if (!h) throw Error("derive_tau: alpha map not surjective for " + av);
    }
    return t;
}

// Exogenous assignments grouped by the endogenous outcome they induce under
// the null intervention. Classes are keyed by the outcome's mixed-radix
// index; members are exogenous mixed-radix indices in increasing order.
struct ExoClassPartition {
    std::vector<int> endo_cards;
    std::vector<int> exo_cards;
    std::map<std::size_t, std::vector<std::size_t>> classes;  // outcome index -> generating u indices

    std::size_t attainable_outcomes() const { return classes.size(); }
};

inline ExoClassPartition minimal_exogenous_classes(const Scm& m) {
    ExoClassPartition part;
    part.endo_cards = m.endo_cards();
    part.exo_cards = m.exo_cards();
    auto topo = detail::endo_topo_order(m);
    if (topo.empty() && !m.endogenous.empty())
        throw CyclicInducedGraph("minimal_exogenous_classes: cyclic parent relation");
    auto plan = detail::build_eval_plan(m, topo);
    const std::size_t n_u = radix_size(part.exo_cards);
    std::vector<int> u(part.exo_cards.size());
    std::vector<int> v(part.endo_cards.size());
    for (std::size_t iu = 0; iu < n_u; ++iu) {
        radix_decode(part.exo_cards, iu, u);
        detail::eval_with_plan(plan, u, v);
        part.classes[radix_encode(part.endo_cards, v)].push_back(iu);
    }
    return part;
}

struct TauCounterexample {
    std::vector<int> u;            // base exogenous assignment
    Intervention base_do;          // base-level intervention
    Intervention abstract_do;      // its abstract translation
    std::vector<int> left;         // tau of the base outcome
    std::vector<int> right;        // abstract outcome
};

struct TauCompatibility {
    bool compatible = false;
    bool full_base_support = false;
    bool full_abstract_support = false;
    bool tau_u_surjective = false;
    std::size_t checked_pairs = 0;
    std::optional<TauCounterexample> counterexample;
};

namespace detail {

// Base interventions that assign complete clusters, graded by how many
// clusters they touch. Only these translate to abstract hard interventions
// under a blockwise state map.
template <typename Fn>
inline void enumerate_cluster_interventions(const Scm& base, const Abstraction& a, int max_clusters, Fn&& fn) {
    fn(Intervention{}, Intervention{});
    const auto avars = a.abstract_vars();
    auto emit_for = [&](const std::vector<std::string>& chosen) {
        std::vector<std::string> vars;
        std::vector<int> cards;
        for (const auto& av : chosen)
            for (const auto& v : *a.members_of(av)) {
                vars.push_back(v);
                cards.push_back(base.endogenous[base.endo_index(v)].card());
            }
        const std::size_t n = radix_size(cards);
        std::vector<int> vals(cards.size());
        for (std::size_t i = 0; i < n; ++i) {
            radix_decode(cards, i, vals);
            Intervention base_do;
            for (std::size_t k = 0; k < vars.size(); ++k) base_do[vars[k]] = vals[k];
            Intervention abstract_do;
            std::size_t k = 0;
            for (const auto& av : chosen) {
                const auto* members = a.members_of(av);
                std::vector<int> mcards, mvals;
                for (const auto& v : *members) {
                    mcards.push_back(base.endogenous[base.endo_index(v)].card());
                    mvals.push_back(vals[k++]);
                }
                abstract_do[av] = a.alpha.at(av).map[radix_encode(mcards, mvals)];
            }
            fn(base_do, abstract_do);
        }
    };
    for (std::size_t i = 0; i < avars.size(); ++i) {
        emit_for({avars[i]});
        if (max_clusters >= 2)
            for (std::size_t j = i + 1; j < avars.size(); ++j) emit_for({avars[i], avars[j]});
    }
}

}  // namespace detail

// Pointwise compatibility of the state map with both models across the
// hard-intervention set: tau applied to the base outcome must match the
// abstract outcome on the shared exogenous assignment under the translated
// intervention. The full-support hypothesis is checked, not assumed.
inline TauCompatibility check_tau_compatibility(const Scm& base, const Scm& abstract, const Abstraction& a,
                                                int max_intervened_clusters = 2) {
    TauCompatibility rep;
    TauMap t = derive_tau(base, a);

    // The shared-exogenous identification is what makes the pointwise check
    // meaningful; models with different exogenous parts are out of scope.
    if (base.exogenous.size() != abstract.exogenous.size())
        throw HypothesisViolated("check_tau_compatibility: models have different exogenous spaces");
    for (std::size_t i = 0; i < base.exogenous.size(); ++i)
        if (base.exogenous[i].name != abstract.exogenous[i].name ||
            base.exogenous[i].card() != abstract.exogenous[i].card())
            throw HypothesisViolated("check_tau_compatibility: exogenous mismatch at " + base.exogenous[i].name);

    ExoClassPartition base_classes = minimal_exogenous_classes(base);
    ExoClassPartition abstract_classes = minimal_exogenous_classes(abstract);
    rep.full_base_support = base_classes.attainable_outcomes() == radix_size(base_classes.endo_cards);
    rep.full_abstract_support = abstract_classes.attainable_outcomes() == radix_size(abstract_classes.endo_cards);
    if (!rep.full_base_support)
        throw HypothesisViolated("check_tau_compatibility: some base outcome has no generating exogenous assignment");
    if (!rep.full_abstract_support)
        throw HypothesisViolated(
            "check_tau_compatibility: some abstract outcome has no generating exogenous assignment");

    // tau emits values in block order; align with the abstract model's own
    // endogenous order.
    std::vector<int> block_pos;
    for (const auto& [av_name, members] : t.blocks) {
        int pos = abstract.endo_index(av_name);
        if (pos < 0) throw Error("check_tau_compatibility: abstract model lacks variable " + av_name);
        block_pos.push_back(pos);
    }
    if (t.blocks.size() != abstract.endogenous.size())
        throw Error("check_tau_compatibility: abstract model variables do not match the abstraction");

    auto to_abstract_order = [&](const std::vector<int>& block_vals) {
        std::vector<int> out(block_vals.size());
        for (std::size_t k = 0; k < block_pos.size(); ++k) out[block_pos[k]] = block_vals[k];
        return out;
    };

    // Class-level exogenous map: base class -> tau of its outcome -> the
    // abstract class of that outcome. Surjectivity is reported.
    std::set<std::size_t> image;
    std::vector<int> v_buf;
    for (const auto& [v_idx, members] : base_classes.classes) {
        radix_decode(base_classes.endo_cards, v_idx, v_buf);
        auto tv = to_abstract_order(t.apply(base, v_buf));
        std::size_t av_idx = radix_encode(abstract_classes.endo_cards, tv);
        if (!abstract_classes.classes.count(av_idx))
            throw HypothesisViolated("check_tau_compatibility: tau image is not attainable in the abstract model");
        image.insert(av_idx);
    }
    rep.tau_u_surjective = image.size() == abstract_classes.classes.size();

    auto base_topo = detail::endo_topo_order(base);
    auto abs_topo = detail::endo_topo_order(abstract);
    if ((base_topo.empty() && !base.endogenous.empty()) || (abs_topo.empty() && !abstract.endogenous.empty()))
        throw CyclicInducedGraph("check_tau_compatibility: cyclic parent relation");
    const auto exo_cards = base.exo_cards();
    const std::size_t n_u = radix_size(exo_cards);

    rep.compatible = true;
    detail::enumerate_cluster_interventions(base, a, max_intervened_clusters,
                                            [&](const Intervention& base_do, const Intervention& abstract_do) {
        if (!rep.compatible) return;
        Scm base_m = base_do.empty() ? base : intervene(base, base_do);
        Scm abs_m = abstract_do.empty() ? abstract : intervene(abstract, abstract_do);
        auto base_plan = detail::build_eval_plan(base_m, base_topo);
        auto abs_plan = detail::build_eval_plan(abs_m, abs_topo);
        std::vector<int> u(exo_cards.size());
        std::vector<int> bv(base.endogenous.size());
        std::vector<int> av(abstract.endogenous.size());
        for (std::size_t iu = 0; iu < n_u; ++iu) {
            radix_decode(exo_cards, iu, u);
            detail::eval_with_plan(base_plan, u, bv);
            detail::eval_with_plan(abs_plan, u, av);
            auto left = t.apply(base, bv);
            std::vector<int> right(left.size());
            for (std::size_t k = 0; k < block_pos.size(); ++k) right[k] = av[block_pos[k]];
            ++rep.checked_pairs;
            if (left != right) {
                rep.compatible = false;
                TauCounterexample ce;
                ce.u = u;
                ce.base_do = base_do;
                ce.abstract_do = abstract_do;
                ce.left = left;
                ce.right = right;
                rep.counterexample = ce;
                return;
            }
        }
    });
    return rep;
}

}  // namespace abstraq
