#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <abstraq/abstraq.hpp>

#include "fixtures.hpp"

using namespace abstraq;

TEST_CASE("model serialization round-trips byte for byte") {
    for (const Scm& m : {fixtures::lung_scm(), fixtures::parity_base(), fixtures::parity_abstract(),
                         fixtures::confounded_adjacent(), fixtures::chain_scm()}) {
        const json j = to_json(m);
        const Scm back = scm_from_json(j);
        REQUIRE(to_json(back).dump() == j.dump());
        REQUIRE(validate_scm(back).empty());
    }
}

TEST_CASE("clustering serialization normalizes cluster order to id order") {
    const json j = to_json(fixtures::lung_cluster_x1z());
    const Clustering back = clustering_from_json(j);
    REQUIRE(to_json(back).dump() == j.dump());
    REQUIRE(back.clusters == fixtures::lung_cluster_x1z().clusters);  // ids already sorted

    Clustering shuffled;
    shuffled.clusters = {{"Zed", {"Y1"}}, {"Alpha", {"X1", "X2"}}};
    shuffled.remainder = {"Z", "Y2"};
    const Clustering normalized = clustering_from_json(to_json(shuffled));
    REQUIRE(normalized.clusters ==
            decltype(normalized.clusters){{"Alpha", {"X1", "X2"}}, {"Zed", {"Y1"}}});
    REQUIRE(normalized.remainder == shuffled.remainder);
}

TEST_CASE("abstraction serialization keeps pre-image member order from relevant") {
    const Abstraction a = fixtures::parity_abstraction();
    const json j = to_json(a);
    const Abstraction back = abstraction_from_json(j);
    REQUIRE(to_json(back).dump() == j.dump());
    REQUIRE(back.preimages == a.preimages);
    REQUIRE(back.relevant == a.relevant);

    // Two-member pre-image: member order follows `relevant`, not phi's keys.
    Abstraction two;
    two.relevant = {"Z", "X"};
    two.preimages = {{"P", {"Z", "X"}}};
    two.alpha = {{"P", {4, {0, 1, 2, 3}}}};
    const Abstraction two_back = abstraction_from_json(to_json(two));
    REQUIRE(two_back.preimages == two.preimages);
}

TEST_CASE("graph serialization carries both edge kinds") {
    const CausalGraph g = induced_graph(fixtures::confounded_adjacent());
    const json j = to_json(g);
    const CausalGraph back = graph_from_json(j);
    REQUIRE(back == g);
    REQUIRE(to_json(back).dump() == j.dump());
}

TEST_CASE("distribution serialization exposes scope, cards and probabilities") {
    const Distribution d = marginalize(joint_distribution(fixtures::parity_base(), {}), {"Y"});
    const json j = to_json(d);
    REQUIRE(j.at("scope") == std::vector<std::string>{"Y"});
    REQUIRE(j.at("cards") == std::vector<int>{4});
    REQUIRE(j.at("probs").size() == 4);
}

TEST_CASE("malformed documents are rejected with a reason") {
    REQUIRE_THROWS_AS(scm_from_json(json::object()), Error);
    REQUIRE_THROWS_AS(scm_from_json({{"variables", json::array()}, {"mechanisms", json::array()}}), Error);
    json bad_kind = to_json(fixtures::chain_scm());
    bad_kind["variables"][0]["kind"] = "sideways";
    REQUIRE_THROWS_AS(scm_from_json(bad_kind), Error);
    json missing_dist = to_json(fixtures::chain_scm());
    missing_dist["exo_dist"].erase("UA");
    REQUIRE_THROWS_AS(scm_from_json(missing_dist), Error);

    REQUIRE_THROWS_AS(clustering_from_json(json::object()), Error);

    json no_phi = to_json(fixtures::parity_abstraction());
    no_phi.erase("phi");
    REQUIRE_THROWS_AS(abstraction_from_json(no_phi), Error);
    json no_alpha = to_json(fixtures::parity_abstraction());
    no_alpha["alpha"].erase("Y'");
    REQUIRE_THROWS_AS(abstraction_from_json(no_alpha), Error);

    json bad_edge = to_json(induced_graph(fixtures::chain_scm()));
    bad_edge["directed"].push_back({"A", "ghost"});
    REQUIRE_THROWS_AS(graph_from_json(bad_edge), Error);
}

TEST_CASE("file loading distinguishes missing files from parse failures") {
    REQUIRE_THROWS_AS(load_json_file("/nonexistent/path.json"), Error);

    const auto dir = std::filesystem::temp_directory_path();
    const auto bad = (dir / "abstraq_bad_fixture.json").string();
    {
        std::ofstream out(bad);
        out << "{ not json";
    }
    REQUIRE_THROWS_AS(load_json_file(bad), Error);

    const auto good = (dir / "abstraq_good_fixture.json").string();
    write_json_file(good, to_json(fixtures::lung_scm()));
    REQUIRE(load_json_file(good).dump() == to_json(fixtures::lung_scm()).dump());
    std::remove(bad.c_str());
    std::remove(good.c_str());
}

#ifdef DATA_DIR
TEST_CASE("bundled fixture files stay in sync with the in-code fixtures") {
    const std::string dir = DATA_DIR;
    auto same = [&](const std::string& file, const json& expect) {
        INFO(file);
        REQUIRE(load_json_file(dir + "/" + file).dump() == expect.dump());
    };
    same("lung_scm.json", to_json(fixtures::lung_scm()));
    same("lung_cluster_x1z.json", to_json(fixtures::lung_cluster_x1z()));
    same("lung_cluster_x2z.json", to_json(fixtures::lung_cluster_x2z()));
    same("lung_cluster_y1z.json", to_json(fixtures::lung_cluster_y1z()));
    same("lung_cluster_y2z.json", to_json(fixtures::lung_cluster_y2z()));
    same("lung_xy_clustering.json", to_json(fixtures::lung_xy_clustering()));
    same("parity_base_scm.json", to_json(fixtures::parity_base()));
    same("parity_abstract_scm.json", to_json(fixtures::parity_abstract()));
    same("parity_abstraction.json", to_json(fixtures::parity_abstraction()));
}
#endif
