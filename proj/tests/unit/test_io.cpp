#include <doctest.h>

#include <json.hpp>
#include <random>
#include <string>

#include "pancake/errors.hpp"
#include "pancake/io.hpp"
#include "test_support.hpp"

using namespace pancake;
using pancake::testing::random_population;

namespace {

using Json = nlohmann::json;

double ring_signed_area(const Json& ring) {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < ring.size(); ++k) {
        s += ring[k][0].get<double>() * ring[k + 1][1].get<double>() -
             ring[k + 1][0].get<double>() * ring[k][1].get<double>();
    }
    return s / 2;
}

// Structural GeoJSON rules for the polygonal output we write.
void check_ring(const Json& ring) {
    REQUIRE(ring.is_array());
    REQUIRE(ring.size() >= 4);
    CHECK(ring.front() == ring.back());
    for (const auto& pos : ring) {
        REQUIRE(pos.is_array());
        REQUIRE(pos.size() == 2);
        CHECK(pos[0].is_number());
        CHECK(pos[1].is_number());
    }
    CHECK(ring_signed_area(ring) > 0.0);  // exterior counterclockwise
}

void check_feature_collection(const Json& fc) {
    REQUIRE(fc.at("type") == "FeatureCollection");
    for (const auto& f : fc.at("features")) {
        CHECK(f.at("type") == "Feature");
        CHECK(f.at("properties").is_object());
        const Json& g = f.at("geometry");
        if (g.at("type") == "Polygon") {
            for (const auto& r : g.at("coordinates")) check_ring(r);
        } else {
            REQUIRE(g.at("type") == "MultiPolygon");
            for (const auto& poly : g.at("coordinates")) {
                for (const auto& r : poly) check_ring(r);
            }
        }
    }
}

const char* kSquare = R"({"type":"Polygon","coordinates":[[[0,0],[0,1],[1,1],[1,0],[0,0]]]})";

}  // namespace

TEST_CASE("population CSV parsing") {
    const auto pts = parse_population_csv("x,y,subpop\r\n1,2,1\n\n# note\n-3.5, 4e2 ,false\n");
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].location == Point2{1, 2});
    CHECK(pts[0].in_subpop);
    CHECK(pts[1].location == Point2{-3.5, 400});
    CHECK_FALSE(pts[1].in_subpop);
    CHECK(parse_population_csv("x,y,subpop\n").empty());

    CHECK_THROWS_AS(parse_population_csv(""), ParseError);
    CHECK_THROWS_AS(parse_population_csv("a,b,c\n1,2,0\n"), ParseError);
    try {
        parse_population_csv("x,y,subpop\n1,2,0\n3,abc,1\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 19);
    }
    CHECK_THROWS_AS(parse_population_csv("x,y,subpop\n1,2\n"), ParseError);
    CHECK_THROWS_AS(parse_population_csv("x,y,subpop\n1,2,yes\n"), ParseError);
    CHECK_THROWS_AS(parse_population_csv("x,y,subpop\n1,inf,0\n"), ParseError);

    std::mt19937_64 rng(1);
    const auto random = random_population(rng, 50, 0.5);
    const auto back = parse_population_csv(population_csv(random));
    REQUIRE(back.size() == random.size());
    for (std::size_t k = 0; k < back.size(); ++k) {
        CHECK(back[k].location == random[k].location);
        CHECK(back[k].in_subpop == random[k].in_subpop);
    }
}

TEST_CASE("population GeoJSON parsing") {
    const auto pts = parse_population_geojson(R"({"type":"FeatureCollection","features":[
        {"type":"Feature","properties":{"subpop":true},"geometry":{"type":"Point","coordinates":[1,2]}},
        {"type":"Feature","properties":{},"geometry":{"type":"MultiPoint","coordinates":[[3,4],[5,6]]}}]})");
    REQUIRE(pts.size() == 3);
    CHECK(pts[0].in_subpop);
    CHECK(pts[2].location == Point2{5, 6});
    CHECK_FALSE(pts[2].in_subpop);
    CHECK_THROWS_AS(parse_population_geojson(
                        R"({"type":"Feature","properties":{"subpop":1},"geometry":{"type":"Point","coordinates":[1,2]}})"),
                    IoError);
    CHECK_THROWS_AS(parse_population_geojson(kSquare), IoError);
}

TEST_CASE("region GeoJSON parsing") {
    const SimplePolygon sq = parse_region_geojson(kSquare);
    CHECK(sq.area() == doctest::Approx(1.0));
    CHECK(sq.size() == 4);
    const std::string feature = std::string(R"({"type":"Feature","properties":null,"geometry":)") + kSquare + "}";
    CHECK(parse_region_geojson(feature).area() == doctest::Approx(1.0));

    try {
        parse_region_geojson(R"({"type":"Polygon","coordinates":[[[0,0],[0,1]],]})");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.offset() == 47);
        CHECK(std::string(e.what()).find("byte 47") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_region_geojson(R"({"type":"Polygon","coordinates":[[[0,0],[0,1],[1,1],[1,0]]]})"),
                    IoError);
    CHECK_THROWS_AS(parse_region_geojson(R"({"type":"FeatureCollection","features":[]})"), IoError);
    CHECK_THROWS_AS(parse_region_geojson(
                        R"({"type":"Polygon","coordinates":[[[0,0],[4,0],[4,4],[0,4],[0,0]],[[1,1],[2,1],[2,2],[1,1]]]})"),
                    IoError);
    CHECK_THROWS_AS(parse_region_geojson(R"({"type":"Polygon","coordinates":[[[0,0],[1,1],[1,0],[0,1],[0,0]]]})"),
                    DomainError);
    CHECK_THROWS_AS(read_region("/nonexistent/region.geojson"), IoError);
}

TEST_CASE("geographic regions") {
    const auto regions = parse_geo_regions(R"({"type":"FeatureCollection","features":[
        {"type":"Feature","properties":{"name":"cell"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[10,0],[10,10],[0,10],[0,0]]]}},
        {"type":"Feature","properties":{},"geometry":{"type":"Polygon","coordinates":[[[0,0],[10,0],[10,10],[0,0]]]}}]})");
    REQUIRE(regions.size() == 2);
    CHECK(regions[0].name == "cell");
    CHECK(regions[1].name == "region 1");
    CHECK(regions[0].ring.size() == 4);
    CHECK(regions[0].ring[1].lon_deg() == doctest::Approx(10.0));
    CHECK(regions[0].ring[1].lat_deg() == doctest::Approx(0.0));
    CHECK_THROWS_AS(parse_geo_regions(R"({"type":"Polygon","coordinates":[[[0,0],[200,0],[0,10],[0,0]]]})"),
                    DomainError);

    const std::string fc = projected_geojson(ProjectionKind::GallPeters, regions);
    check_feature_collection(Json::parse(fc));
    CHECK(Json::parse(fc)["features"][0]["properties"]["map_area"].get<double>() ==
          doctest::Approx(region_map_area(ProjectionKind::GallPeters, regions[0].ring)));
    CHECK(Json::parse(projected_geojson(ProjectionKind::Mercator, {}))["features"].empty());
}

TEST_CASE("plan GeoJSON is valid and round-trips membership") {
    std::mt19937_64 rng(2);
    for (int t = 0; t < 10; ++t) {
        const auto pts = random_population(rng, 30 + 20 * t, 0.4);
        const std::size_t depth = 1 + t % 4;
        const std::size_t n = 1 + t % (std::size_t{1} << depth);
        const BisectionTree tree = recursive_bisect(SimplePolygon::rectangle({0, 0}, {1, 1}), pts, depth);
        const DistrictPlan plan = group_cells(tree, n);
        const std::string text = plan_geojson(tree, plan);
        const Json fc = Json::parse(text);
        check_feature_collection(fc);
        REQUIRE(fc["features"].size() == n);

        const auto membership = read_plan_membership(text);
        REQUIRE(membership.size() == n);
        for (std::size_t d = 0; d < n; ++d) {
            CHECK(fc["features"][d]["properties"]["district_id"] == d);
            CHECK(fc["features"][d]["properties"]["a_count"] == plan.a_counts[d]);
            CHECK(fc["features"][d]["properties"]["b_count"] == plan.b_counts[d]);
            CHECK(membership[d] == plan.district_points(tree, d));
            // Each member lies in its district's geometry.
            for (std::size_t idx : membership[d]) {
                bool inside = false;
                for (const auto& poly : fc["features"][d]["geometry"]["coordinates"]) {
                    std::vector<Point2> ring;
                    for (const auto& pos : poly[0]) ring.push_back({pos[0].get<double>(), pos[1].get<double>()});
                    ring.pop_back();
                    inside = inside || SimplePolygon(ring).contains(pts[idx].location, 1e-9);
                }
                CHECK(inside);
            }
        }
        CHECK(plan_geojson(tree, plan) == text);
    }
    CHECK_THROWS_AS(read_plan_membership(R"({"type":"FeatureCollection","features":[
        {"type":"Feature","properties":{"district_id":1,"point_indices":[]},"geometry":null}]})"),
                    IoError);
}

TEST_CASE("audit JSON and SVG output") {
    std::mt19937_64 rng(3);
    const auto pts = random_population(rng, 60, 0.5);
    const BisectionTree tree = recursive_bisect(SimplePolygon::rectangle({0, 0}, {1, 1}), pts, 3);
    const DistrictPlan plan = group_cells(tree, 3);
    const PlanAudit audit = audit_plan(tree, plan, pts);
    const Json a = Json::parse(audit_json(tree, plan, audit, {5, "index", "p.csv", "r.geojson"}));
    CHECK(a["seed"] == 5);
    CHECK(a["districts"] == 3);
    CHECK(a["within_bound"] == true);
    CHECK(a["A"]["total"] == 60);
    REQUIRE(a["district_details"].size() == 3);
    CHECK(a["district_details"][1]["a_count"] == audit.a_counts[1]);
    CHECK(a["district_details"][1]["connected"].is_boolean());

    const std::string svg = plan_svg(tree, plan, pts);
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("version=\"1.1\"") != std::string::npos);
    CHECK(svg.find("stroke-dasharray") != std::string::npos);
    CHECK(svg.find("#1f78b4") != std::string::npos);
    std::size_t circles = 0;
    for (std::size_t at = svg.find("<circle"); at != std::string::npos; at = svg.find("<circle", at + 1)) ++circles;
    CHECK(circles == pts.size());
    CHECK(svg.substr(svg.size() - 7) == "</svg>\n");
}

TEST_CASE("distortion CSV and outcome dumps") {
    const auto grid = distortion_grid(ProjectionKind::Mercator, 45.0, 45.0);
    const std::string csv = distortion_csv(grid);
    CHECK(csv.rfind("lon_deg,lat_deg,conformality_defect,area_defect\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(grid.size() + 1));
    CHECK(csv.find("\n-180,-45,") != std::string::npos);

    const std::vector<Outcome> outcomes{{{0, 1}, {2}}, {{0}, {1, 2}}};
    CHECK(outcomes_text(outcomes) == "0 1 | 2\n0 | 1 2\n");
}
