#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "clustering.hpp"
#include "graph.hpp"
#include "scm.hpp"

namespace abstraq {

struct GenParams {
    int n_endo = 5;
    int n_exo = 3;  // cap on shared confounder variables; every variable also gets a private noise term
    int max_domain = 3;
    double edge_prob = 0.5;
    double confound_prob = 0.15;
    double faithfulness_gap = 1e-6;
    std::uint64_t seed = 0;
};

inline std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace detail {

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

// Probability vector with every entry at least 0.05.
inline std::vector<double> bounded_probs(std::mt19937_64& rng, int card) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<double> p(card);
        double s = 0.0;
        for (double& x : p) {
            x = 0.05 + uniform01(rng);
            s += x;
        }
        for (double& x : p) x /= s;
        if (*std::min_element(p.begin(), p.end()) >= 0.05) return p;
    }
    throw GenerationExhausted("bounded_probs: could not sample a bounded probability vector");
}

inline std::vector<int> mechanism_cards(const Scm& m, const Mechanism& f) {
    std::vector<int> cards;
    for (const auto& p : f.endo_parents) cards.push_back(m.endogenous[m.endo_index(p)].card());
    for (const auto& u : f.exo_parents) cards.push_back(m.exogenous[m.exo_index(u)].card());
    return cards;
}

// A parent is functionally idle when no input combination of the others
// exposes a change along its axis.
inline bool parent_idle(const std::vector<int>& table, const std::vector<int>& cards, std::size_t axis) {
    std::vector<int> vals(cards.size(), 0);
    const std::size_t n = table.size();
    for (std::size_t idx = 0; idx < n; ++idx) {
        radix_decode(cards, idx, vals);
        if (vals[axis] != 0) continue;
        const int base = table[idx];
        std::vector<int> probe = vals;
        for (int v = 1; v < cards[axis]; ++v) {
            probe[axis] = v;
            if (table[radix_encode(cards, probe)] != base) return false;
        }
    }
    return true;
}

// Re-roll one random output column along the idle axis until it varies.
inline void reroll_idle_column(std::mt19937_64& rng, std::vector<int>& table, const std::vector<int>& cards,
                               std::size_t axis, int child_card) {
    std::vector<int> vals(cards.size());
    for (std::size_t i = 0; i < cards.size(); ++i) vals[i] = i == axis ? 0 : uniform_int(rng, 0, cards[i] - 1);
    for (int round = 0; round < 100; ++round) {
        bool varies = false;
        int first = -1;
        for (int v = 0; v < cards[axis]; ++v) {
            vals[axis] = v;
            int entry = uniform_int(rng, 0, child_card - 1);
            table[radix_encode(cards, vals)] = entry;
            if (first < 0)
                first = entry;
            else if (entry != first)
                varies = true;
        }
        if (varies) return;
    }
    throw GenerationExhausted("reroll_idle_column: could not make the parent matter");
}

struct FaithfulnessProbe {
    const Scm* m;
    double gap;

    // Largest factorization violation of P(a,b | z) over all positive z.
    double dependence_gap(const Distribution& joint, const std::string& a, const std::string& b,
                          const std::vector<std::string>& zs) const {
        std::vector<std::string> keep = {a, b};
        keep.insert(keep.end(), zs.begin(), zs.end());
        Distribution marg = marginalize(joint, keep);
        std::vector<int> zcards(marg.cards.begin() + 2, marg.cards.end());
        const std::size_t nz = radix_size(zcards);
        double best = 0.0;
        std::vector<int> zv(zcards.size());
        for (std::size_t iz = 0; iz < nz; ++iz) {
            radix_decode(zcards, iz, zv);
            std::map<std::string, int> ev;
            for (std::size_t k = 0; k < zs.size(); ++k) ev[zs[k]] = zv[k];
            Distribution slice;
            try {
                slice = ev.empty() ? marg : condition(marg, ev);
            } catch (const ZeroProbabilityEvidence&) {
                continue;
            }
            Distribution pa = marginalize(slice, {a});
            Distribution pb = marginalize(slice, {b});
            std::vector<int> ab(2);
            for (std::size_t idx = 0; idx < slice.probs.size(); ++idx) {
                radix_decode(slice.cards, idx, ab);
                best = std::max(best, std::fabs(slice.probs[idx] - pa.probs[ab[0]] * pb.probs[ab[1]]));
            }
        }
        return best;
    }

    bool accept() const {
        const CausalGraph g = induced_graph(*m);
        const Distribution joint = joint_distribution(*m, {});
        const auto& verts = g.vertices;

        // Directed adjacencies must carry an interventional effect.
        for (const auto& [a, b] : g.directed) {
            const int ca = m->endogenous[m->endo_index(a)].card();
            std::vector<Distribution> effects;
            for (int v = 0; v < ca; ++v) effects.push_back(marginalize(joint_distribution(*m, {{a, v}}), {b}));
            double best = 0.0;
            for (std::size_t i = 0; i < effects.size(); ++i)
                for (std::size_t j = i + 1; j < effects.size(); ++j)
                    best = std::max(best, total_variation(effects[i], effects[j]));
            if (best < gap) return false;
        }

        // Bidirected adjacencies must separate seeing from doing.
        for (const auto& [a, b] : g.bidirected) {
            const int ca = m->endogenous[m->endo_index(a)].card();
            double best = 0.0;
            for (int v = 0; v < ca; ++v) {
                Distribution obs;
                try {
                    obs = condition(marginalize(joint, {b, a}), {{a, v}});
                } catch (const ZeroProbabilityEvidence&) {
                    continue;
                }
                best = std::max(best, total_variation(obs, marginalize(joint_distribution(*m, {{a, v}}), {b})));
            }
            if (best < gap) return false;
        }

        // Every d-connection over conditioning sets of size at most two must
        // manifest as distributional dependence.
        for (std::size_t i = 0; i < verts.size(); ++i)
            for (std::size_t j = i + 1; j < verts.size(); ++j) {
                std::vector<std::string> others;
                for (const auto& v : verts)
                    if (v != verts[i] && v != verts[j]) others.push_back(v);
                std::vector<std::vector<std::string>> zsets = {{}};
                for (std::size_t k = 0; k < others.size(); ++k) {
                    zsets.push_back({others[k]});
                    for (std::size_t l = k + 1; l < others.size(); ++l) zsets.push_back({others[k], others[l]});
                }
                for (const auto& zs : zsets) {
                    SepQuery q{{verts[i]}, {verts[j]}, std::set<std::string>(zs.begin(), zs.end())};
                    if (d_separated(g, q)) continue;
                    if (dependence_gap(joint, verts[i], verts[j], zs) < gap) return false;
                }
            }
        return true;
    }
};

struct ScmDraft {
    Scm m;
    std::vector<std::size_t> private_noise;  // exo index of each variable's own noise term
};

inline ScmDraft draw_structure(std::mt19937_64& rng, const GenParams& p, bool full_support) {
    ScmDraft draft;
    Scm& m = draft.m;
    for (int i = 0; i < p.n_endo; ++i) {
        Variable v;
        v.name = "V" + std::to_string(i + 1);
        const int card = uniform_int(rng, 2, p.max_domain);
        for (int k = 0; k < card; ++k) v.domain.push_back(std::to_string(k));
        m.endogenous.push_back(v);
    }

    std::vector<int> order(p.n_endo);
    for (int i = 0; i < p.n_endo; ++i) order[i] = i;
    for (int i = p.n_endo - 1; i > 0; --i) std::swap(order[i], order[uniform_int(rng, 0, i)]);

    std::vector<std::vector<std::string>> endo_parents(p.n_endo);
    for (int i = 0; i < p.n_endo; ++i)
        for (int j = i + 1; j < p.n_endo; ++j)
            if (uniform01(rng) < p.edge_prob) endo_parents[order[j]].push_back(m.endogenous[order[i]].name);
    for (auto& ps : endo_parents)
        std::sort(ps.begin(), ps.end(), [&](const std::string& a, const std::string& b) {
            return m.endo_index(a) < m.endo_index(b);
        });

    std::vector<std::vector<std::string>> exo_parents(p.n_endo);
    for (int i = 0; i < p.n_endo; ++i) {
        Variable u;
        u.name = "U" + std::to_string(i + 1);
        const int card = full_support ? m.endogenous[i].card() : uniform_int(rng, 2, p.max_domain);
        for (int k = 0; k < card; ++k) u.domain.push_back(std::to_string(k));
        draft.private_noise.push_back(m.exogenous.size());
        m.exogenous.push_back(u);
        exo_parents[i].push_back(u.name);
    }
    int confounders = 0;
    for (int i = 0; i < p.n_endo && confounders < p.n_exo; ++i)
        for (int j = i + 1; j < p.n_endo && confounders < p.n_exo; ++j)
            if (uniform01(rng) < p.confound_prob) {
                Variable w;
                w.name = "W" + std::to_string(++confounders);
                const int card = uniform_int(rng, 2, p.max_domain);
                for (int k = 0; k < card; ++k) w.domain.push_back(std::to_string(k));
                m.exogenous.push_back(w);
                exo_parents[i].push_back(w.name);
                exo_parents[j].push_back(w.name);
            }

    for (int i = 0; i < p.n_endo; ++i) {
        Mechanism f;
        f.child = m.endogenous[i].name;
        f.endo_parents = endo_parents[i];
        f.exo_parents = exo_parents[i];
        m.mechanisms.push_back(std::move(f));
    }
    for (const auto& u : m.exogenous) m.exo_probs.push_back(bounded_probs(rng, u.card()));
    return draft;
}

// Fill one table row (all axes fixed except the private-noise axis) with a
// random surjection onto the child domain.
inline void fill_row_surjective(std::mt19937_64& rng, std::vector<int>& table, const std::vector<int>& cards,
                                std::size_t noise_axis, std::vector<int>& vals, int child_card) {
    std::vector<int> perm(child_card);
    for (int k = 0; k < child_card; ++k) perm[k] = k;
    for (int k = child_card - 1; k > 0; --k) std::swap(perm[k], perm[uniform_int(rng, 0, k)]);
    for (int v = 0; v < cards[noise_axis]; ++v) {
        vals[noise_axis] = v;
        table[radix_encode(cards, vals)] = v < child_card ? perm[v] : uniform_int(rng, 0, child_card - 1);
    }
}

inline bool row_surjective(const std::vector<int>& table, const std::vector<int>& cards, std::size_t noise_axis,
                           std::vector<int>& vals, int child_card) {
    std::set<int> seen;
    for (int v = 0; v < cards[noise_axis]; ++v) {
        vals[noise_axis] = v;
        seen.insert(table[radix_encode(cards, vals)]);
    }
    return static_cast<int>(seen.size()) == child_card;
}

template <typename RowFn>
inline void for_each_row(const std::vector<int>& cards, std::size_t noise_axis, RowFn&& fn) {
    std::vector<int> other_cards;
    std::vector<std::size_t> other_axes;
    for (std::size_t i = 0; i < cards.size(); ++i)
        if (i != noise_axis) {
            other_cards.push_back(cards[i]);
            other_axes.push_back(i);
        }
    const std::size_t n = radix_size(other_cards);
    std::vector<int> ov(other_cards.size());
    std::vector<int> vals(cards.size(), 0);
    for (std::size_t idx = 0; idx < n; ++idx) {
        radix_decode(other_cards, idx, ov);
        for (std::size_t k = 0; k < other_axes.size(); ++k) vals[other_axes[k]] = ov[k];
        fn(vals);
    }
}

inline Scm draw_candidate(std::mt19937_64& rng, const GenParams& p, bool full_support) {
    ScmDraft draft = draw_structure(rng, p, full_support);
    Scm& m = draft.m;
    for (std::size_t i = 0; i < m.mechanisms.size(); ++i) {
        Mechanism& f = m.mechanisms[i];
        const std::vector<int> cards = mechanism_cards(m, f);
        const int child_card = m.endogenous[m.endo_index(f.child)].card();
        f.table.assign(radix_size(cards), 0);
        if (full_support) {
            const std::size_t noise_axis = f.endo_parents.size();  // private noise is the first exo parent
            for_each_row(cards, noise_axis,
                         [&](std::vector<int>& vals) { fill_row_surjective(rng, f.table, cards, noise_axis, vals, child_card); });
        } else {
            for (int& e : f.table) e = uniform_int(rng, 0, child_card - 1);
        }

        // Repair loop: every declared parent must matter, and in
        // full-support mode every noise row must stay surjective.
        for (int round = 0;; ++round) {
            if (round >= 100) throw GenerationExhausted("draw_candidate: table repair did not converge");
            bool changed = false;
            for (std::size_t axis = 0; axis < cards.size(); ++axis)
                if (parent_idle(f.table, cards, axis)) {
                    reroll_idle_column(rng, f.table, cards, axis, child_card);
                    changed = true;
                }
            if (full_support) {
                const std::size_t noise_axis = f.endo_parents.size();
                for_each_row(cards, noise_axis, [&](std::vector<int>& vals) {
                    if (!row_surjective(f.table, cards, noise_axis, vals, child_card)) {
                        fill_row_surjective(rng, f.table, cards, noise_axis, vals, child_card);
                        changed = true;
                    }
                });
            }
            if (!changed) break;
        }
    }
    return m;
}

inline Scm random_scm_impl(const GenParams& p, bool full_support) {
    if (p.n_endo < 1) throw Error("random_scm: n_endo must be positive");
    if (p.max_domain < 2) throw Error("random_scm: max_domain must be at least 2");
    for (int rejection = 0; rejection < 1000; ++rejection) {
        std::mt19937_64 rng(split_seed(p.seed, static_cast<std::uint64_t>(rejection)));
        Scm candidate;
        try {
            candidate = draw_candidate(rng, p, full_support);
        } catch (const GenerationExhausted&) {
            continue;
        }
        FaithfulnessProbe probe{&candidate, p.faithfulness_gap};
        if (probe.accept()) return candidate;
    }
    throw GenerationExhausted("random_scm: no faithful candidate within 1000 rejections");
}

}  // namespace detail

// Seeded random model: random DAG over a shuffled order, one private noise
// term per variable plus up to n_exo shared confounders, uniform tables with
// idle parents repaired, exogenous probabilities bounded away from 0/1 by
// 0.05, rejection-resampled until faithful (gap >= faithfulness_gap).
inline Scm random_scm(const GenParams& p) { return detail::random_scm_impl(p, false); }

// Variant whose noise rows are random surjections, so every endogenous
// outcome has a generating exogenous assignment (full support).
inline Scm random_scm_full_support(const GenParams& p) { return detail::random_scm_impl(p, true); }

// Random valid partial clustering of a graph: each vertex lands in the
// remainder with remainder_prob, the rest are split uniformly into a random
// number of clusters; resampled until the induced cluster graph is acyclic.
inline Clustering random_clustering(const CausalGraph& g, std::uint64_t seed, double remainder_prob) {
    std::mt19937_64 rng(seed);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        std::vector<std::string> pool;
        Clustering c;
        for (const auto& v : g.vertices) {
            if (detail::uniform01(rng) < remainder_prob)
                c.remainder.insert(v);
            else
                pool.push_back(v);
        }
        if (pool.empty()) continue;
        const int k = detail::uniform_int(rng, 1, static_cast<int>(pool.size()));
        std::vector<std::vector<std::string>> groups(k);
        for (const auto& v : pool) groups[detail::uniform_int(rng, 0, k - 1)].push_back(v);
        int cid = 0;
        for (auto& grp : groups) {
            if (grp.empty()) continue;
            c.clusters.push_back({"C" + std::to_string(++cid), grp});
        }
        CausalGraph cg;
        for (const auto& [id, members] : c.clusters) cg.vertices.push_back(id);
        cg.directed = detail::rule1_edges(g, c);
        if (is_acyclic(cg).acyclic) return c;
    }
    throw GenerationExhausted("random_clustering: no acyclic clustering within 1000 attempts");
}

}  // namespace abstraq
