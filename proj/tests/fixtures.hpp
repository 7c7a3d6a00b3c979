#pragma once

// Hand-built models shared across tests: the five-variable diagnostic
// network used by the clustering tests, the parity-collapse model pair,
// confounded two-variable models, and a three-variable chain.

#include <abstraq/abstraq.hpp>

namespace fixtures {

inline abstraq::Variable bin(const std::string& name) { return {name, {"0", "1"}}; }

// X1 and X2 are independent causes of Z (xor with noise); Y1 and Y2 are
// downstream effects of Z. Every variable has a private noise term, so the
// induced graph has no bidirected edges.
inline abstraq::Scm lung_scm() {
    abstraq::Scm m;
    m.endogenous = {bin("X1"), bin("X2"), bin("Z"), bin("Y1"), bin("Y2")};
    m.exogenous = {bin("U1"), bin("U2"), bin("UZ"), bin("U3"), bin("U4")};
    m.exo_probs = {{0.6, 0.4}, {0.7, 0.3}, {0.55, 0.45}, {0.65, 0.35}, {0.75, 0.25}};
    m.mechanisms = {
        {"X1", {}, {"U1"}, {0, 1}},
        {"X2", {}, {"U2"}, {0, 1}},
        {"Z", {"X1", "X2"}, {"UZ"}, {0, 1, 1, 0, 1, 0, 0, 1}},  // X1 xor X2 xor UZ
        {"Y1", {"Z"}, {"U3"}, {0, 1, 1, 0}},                    // Z xor U3
        {"Y2", {"Z"}, {"U4"}, {0, 1, 1, 1}},                    // Z or U4
    };
    return m;
}

// The four total clusterings that group Z with one neighbor.
inline abstraq::Clustering lung_cluster_x1z() {
    return {{{"C_X1Z", {"X1", "Z"}}, {"X2", {"X2"}}, {"Y1", {"Y1"}}, {"Y2", {"Y2"}}}, {}};
}
inline abstraq::Clustering lung_cluster_x2z() {
    return {{{"X1", {"X1"}}, {"C_X2Z", {"X2", "Z"}}, {"Y1", {"Y1"}}, {"Y2", {"Y2"}}}, {}};
}
inline abstraq::Clustering lung_cluster_y1z() {
    return {{{"X1", {"X1"}}, {"X2", {"X2"}}, {"C_Y1Z", {"Y1", "Z"}}, {"Y2", {"Y2"}}}, {}};
}
inline abstraq::Clustering lung_cluster_y2z() {
    return {{{"X1", {"X1"}}, {"X2", {"X2"}}, {"Y1", {"Y1"}}, {"C_Y2Z", {"Y2", "Z"}}}, {}};
}

// Singleton clusters for everything except Z, which stays in the remainder.
inline abstraq::Clustering lung_xy_clustering() {
    return {{{"X1", {"X1"}}, {"X2", {"X2"}}, {"Y1", {"Y1"}}, {"Y2", {"Y2"}}}, {"Z"}};
}

// Base model of the parity collapse: Y is the product of X in {1,2} and
// Z in {1,3}, so Y ranges over {1,2,3,6} and its parity equals "X = 2".
inline abstraq::Scm parity_base() {
    abstraq::Scm m;
    m.endogenous = {{"X", {"1", "2"}}, {"Z", {"1", "3"}}, {"Y", {"1", "2", "3", "6"}}};
    m.exogenous = {{"UX", {"a", "b"}}, {"UZ", {"a", "b"}}};
    m.exo_probs = {{0.5, 0.5}, {0.5, 0.5}};
    m.mechanisms = {
        {"X", {}, {"UX"}, {0, 1}},
        {"Z", {}, {"UZ"}, {0, 1}},
        {"Y", {"X", "Z"}, {}, {0, 2, 1, 3}},  // 1*1=1, 1*3=3, 2*1=2, 2*3=6
    };
    return m;
}

// Abstract counterpart mapping Y to its parity. Z' is declared as a parent
// of Y' but the table ignores it.
inline abstraq::Scm parity_abstract() {
    abstraq::Scm m;
    m.endogenous = {{"X'", {"1", "2"}}, {"Z'", {"1", "3"}}, {"Y'", {"even", "odd"}}};
    m.exogenous = {{"UX", {"a", "b"}}, {"UZ", {"a", "b"}}};
    m.exo_probs = {{0.5, 0.5}, {0.5, 0.5}};
    m.mechanisms = {
        {"X'", {}, {"UX"}, {0, 1}},
        {"Z'", {}, {"UZ"}, {0, 1}},
        {"Y'", {"X'", "Z'"}, {}, {1, 1, 0, 0}},  // odd iff X' = 1
    };
    return m;
}

inline abstraq::Abstraction parity_abstraction() {
    abstraq::Abstraction a;
    a.relevant = {"X", "Z", "Y"};
    a.preimages = {{"X'", {"X"}}, {"Z'", {"Z"}}, {"Y'", {"Y"}}};
    a.alpha = {{"X'", {2, {0, 1}}}, {"Z'", {2, {0, 1}}}, {"Y'", {2, {1, 0, 1, 0}}}};
    return a;
}

// A -> B with a shared noise term: both seeing/doing discrepancy and a
// bidirected edge alongside the directed one.
inline abstraq::Scm confounded_adjacent() {
    abstraq::Scm m;
    m.endogenous = {bin("A"), bin("B")};
    m.exogenous = {bin("UA"), bin("UB"), bin("UC")};
    m.exo_probs = {{0.7, 0.3}, {0.6, 0.4}, {0.65, 0.35}};
    m.mechanisms = {
        {"A", {}, {"UA", "UC"}, {0, 1, 1, 0}},       // UA xor UC
        {"B", {"A"}, {"UB", "UC"}, {0, 1, 1, 0, 1, 0, 0, 1}},  // (A xor UB) xor UC
    };
    return m;
}

// A and B share a noise term but have no directed edge between them.
inline abstraq::Scm confounded_fork() {
    abstraq::Scm m;
    m.endogenous = {bin("A"), bin("B")};
    m.exogenous = {bin("UA"), bin("UB"), bin("UC")};
    m.exo_probs = {{0.7, 0.3}, {0.6, 0.4}, {0.65, 0.35}};
    m.mechanisms = {
        {"A", {}, {"UA", "UC"}, {0, 1, 1, 0}},  // UA xor UC
        {"B", {}, {"UB", "UC"}, {0, 1, 1, 0}},  // UB xor UC
    };
    return m;
}

// Three-variable chain used for mechanism-composition checks.
inline abstraq::Scm chain_scm() {
    abstraq::Scm m;
    m.endogenous = {bin("A"), bin("Q"), bin("B")};
    m.exogenous = {bin("UA"), bin("UQ"), bin("UB")};
    m.exo_probs = {{0.55, 0.45}, {0.6, 0.4}, {0.7, 0.3}};
    m.mechanisms = {
        {"A", {}, {"UA"}, {0, 1}},
        {"Q", {"A"}, {"UQ"}, {0, 1, 1, 0}},  // A xor UQ
        {"B", {"Q"}, {"UB"}, {0, 1, 1, 1}},  // Q or UB
    };
    return m;
}

}  // namespace fixtures
