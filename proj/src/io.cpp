#include "pancake/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "format.hpp"
#include "json.hpp"
#include "pancake/errors.hpp"

namespace pancake {

namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

Json parse_json(std::string_view text) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const Json::parse_error& e) {
        // e.byte counts from 1.
        const std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
        throw ParseError("malformed JSON at byte " + std::to_string(offset) + ": " + e.what(), offset);
    }
}

[[noreturn]] void bad_geojson(const std::string& what) { throw IoError("invalid GeoJSON: " + what); }

const Json& member(const Json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) bad_geojson(where + " has no \"" + key + "\"");
    return obj.at(key);
}

std::string type_of(const Json& obj, const std::string& where) {
    const Json& t = member(obj, "type", where);
    if (!t.is_string()) bad_geojson(where + " \"type\" is not a string");
    return t.get<std::string>();
}

Point2 position(const Json& pos, const std::string& where) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number()) {
        bad_geojson(where + " is not a [x, y] position");
    }
    return {pos[0].get<double>(), pos[1].get<double>()};
}

// Positions of a linear ring, without the repeated closing vertex.
std::vector<Point2> ring(const Json& coords, const std::string& where) {
    if (!coords.is_array() || coords.size() < 4) bad_geojson(where + " needs at least four positions");
    std::vector<Point2> out;
    for (std::size_t k = 0; k < coords.size(); ++k) {
        out.push_back(position(coords[k], where + " position " + std::to_string(k)));
    }
    if (!(out.front() == out.back())) bad_geojson(where + " is not closed");
    out.pop_back();
    return out;
}

struct Geometry {
    const Json* json;
    const Json* properties;
};

// Geometries of a bare geometry, Feature or FeatureCollection.
std::vector<Geometry> geometries(const Json& root) {
    static const Json kNull;
    const std::string type = type_of(root, "root");
    if (type == "FeatureCollection") {
        const Json& features = member(root, "features", "FeatureCollection");
        if (!features.is_array()) bad_geojson("\"features\" is not an array");
        std::vector<Geometry> out;
        for (std::size_t k = 0; k < features.size(); ++k) {
            const Json& f = features[k];
            const std::string where = "feature " + std::to_string(k);
            if (type_of(f, where) != "Feature") bad_geojson(where + " is not a Feature");
            const Json& g = member(f, "geometry", where);
            const Json* props = f.contains("properties") ? &f.at("properties") : &kNull;
            if (!g.is_null()) out.push_back({&g, props});
        }
        return out;
    }
    if (type == "Feature") {
        const Json& g = member(root, "geometry", "Feature");
        return {{&g, root.contains("properties") ? &root.at("properties") : &kNull}};
    }
    return {{&root, &kNull}};
}

std::vector<Point2> polygon_exterior(const Json& geometry, const std::string& where) {
    const Json& coords = member(geometry, "coordinates", where);
    if (!coords.is_array() || coords.empty()) bad_geojson(where + " has no rings");
    if (coords.size() > 1) bad_geojson(where + " has interior rings, which are not supported");
    return ring(coords[0], where + " ring 0");
}

bool parse_flag(std::string_view s, std::size_t offset) {
    if (s == "1" || s == "true" || s == "TRUE" || s == "True") return true;
    if (s == "0" || s == "false" || s == "FALSE" || s == "False") return false;
    throw ParseError("subpop flag '" + std::string(s) + "' at byte " + std::to_string(offset) +
                         " is not 0/1/true/false",
                     offset);
}

double parse_number(std::string_view s, std::size_t offset) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size() || !std::isfinite(v)) {
        throw ParseError("'" + std::string(s) + "' at byte " + std::to_string(offset) +
                             " is not a finite number",
                         offset);
    }
    return v;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

OrderedJson closed_ring(std::span<const Point2> pts) {
    OrderedJson r = OrderedJson::array();
    for (const Point2& p : pts) r.push_back({p.x, p.y});
    if (!pts.empty()) r.push_back({pts.front().x, pts.front().y});
    return r;
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

std::vector<PopulationPoint> parse_population_csv(std::string_view text) {
    std::vector<PopulationPoint> out;
    std::size_t pos = 0;
    bool header = true;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        const std::string_view line = trim(text.substr(pos, eol - pos));
        const std::size_t line_start = pos;
        pos = eol + 1;
        if (line.empty() || line.front() == '#') continue;

        std::vector<std::string_view> fields;
        std::vector<std::size_t> offsets;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::size_t stop = comma == std::string_view::npos ? line.size() : comma;
            fields.push_back(trim(line.substr(start, stop - start)));
            offsets.push_back(line_start + start);
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (header) {
            header = false;
            if (fields.size() != 3 || fields[0] != "x" || fields[1] != "y" || fields[2] != "subpop") {
                throw ParseError("population CSV must start with the header x,y,subpop", line_start);
            }
            continue;
        }
        if (fields.size() != 3) {
            throw ParseError("population CSV row at byte " + std::to_string(line_start) + " has " +
                                 std::to_string(fields.size()) + " fields, expected 3",
                             line_start);
        }
        out.push_back({{parse_number(fields[0], offsets[0]), parse_number(fields[1], offsets[1])},
                       parse_flag(fields[2], offsets[2])});
    }
    if (header) throw ParseError("population CSV is empty", 0);
    return out;
}

std::string population_csv(std::span<const PopulationPoint> points) {
    std::string out = "x,y,subpop\n";
    for (const auto& p : points) {
        out += detail::shortest(p.location.x) + "," + detail::shortest(p.location.y) + "," +
               (p.in_subpop ? "1" : "0") + "\n";
    }
    return out;
}

std::vector<PopulationPoint> parse_population_geojson(std::string_view text) {
    const Json root = parse_json(text);
    std::vector<PopulationPoint> out;
    for (const auto& [g, props] : geometries(root)) {
        bool subpop = false;
        if (props->is_object() && props->contains("subpop")) {
            const Json& s = props->at("subpop");
            if (!s.is_boolean()) bad_geojson("\"subpop\" must be a boolean");
            subpop = s.get<bool>();
        }
        const std::string type = type_of(*g, "geometry");
        const Json& coords = member(*g, "coordinates", type);
        if (type == "Point") {
            out.push_back({position(coords, "Point"), subpop});
        } else if (type == "MultiPoint") {
            if (!coords.is_array()) bad_geojson("MultiPoint coordinates are not an array");
            for (const Json& c : coords) out.push_back({position(c, "MultiPoint position"), subpop});
        } else {
            bad_geojson("population geometry " + type + " is not a Point");
        }
    }
    for (const auto& p : out) {
        if (!is_finite(p.location)) bad_geojson("population coordinate is not finite");
    }
    return out;
}

std::vector<PopulationPoint> read_population(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    const std::string ext = path.extension().string();
    try {
        if (ext == ".geojson" || ext == ".json") return parse_population_geojson(text);
        return parse_population_csv(text);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.offset());
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

SimplePolygon parse_region_geojson(std::string_view text) {
    const Json root = parse_json(text);
    std::vector<std::vector<Point2>> rings;
    for (const auto& [g, props] : geometries(root)) {
        const std::string type = type_of(*g, "geometry");
        if (type != "Polygon") bad_geojson("region geometry " + type + " is not a Polygon");
        rings.push_back(polygon_exterior(*g, "Polygon"));
    }
    if (rings.size() != 1) {
        bad_geojson("expected exactly one region Polygon, found " + std::to_string(rings.size()));
    }
    return SimplePolygon(std::move(rings.front()));
}

SimplePolygon read_region(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    try {
        return parse_region_geojson(text);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.offset());
    } catch (const IoError& e) {
        throw IoError(path.string() + ": " + e.what());
    } catch (const DomainError& e) {
        throw DomainError(path.string() + ": " + e.what());
    }
}

std::vector<GeoRegion> parse_geo_regions(std::string_view text) {
    const Json root = parse_json(text);
    std::vector<GeoRegion> out;
    for (const auto& [g, props] : geometries(root)) {
        const std::string type = type_of(*g, "geometry");
        if (type != "Polygon") bad_geojson("region geometry " + type + " is not a Polygon");
        GeoRegion r;
        r.name = "region " + std::to_string(out.size());
        if (props->is_object() && props->contains("name") && props->at("name").is_string()) {
            r.name = props->at("name").get<std::string>();
        }
        for (const Point2& p : polygon_exterior(*g, r.name)) {
            const GeoPoint gp = GeoPoint::from_degrees(p.y, p.x);
            validate(gp);
            r.ring.push_back(gp);
        }
        out.push_back(std::move(r));
    }
    return out;
}

std::string plan_geojson(const BisectionTree& tree, const DistrictPlan& plan) {
    OrderedJson features = OrderedJson::array();
    for (std::size_t d = 0; d < plan.size(); ++d) {
        OrderedJson polygons = OrderedJson::array();
        for (std::size_t l : plan.groups[d]) {
            for (const SimplePolygon& piece : tree.leaf(l).pieces) {
                polygons.push_back(OrderedJson::array({closed_ring(piece.vertices())}));
            }
        }
        OrderedJson f;
        f["type"] = "Feature";
        f["properties"] = {{"district_id", d},
                           {"a_count", plan.a_counts[d]},
                           {"b_count", plan.b_counts[d]},
                           {"leaves", plan.groups[d]},
                           {"point_indices", plan.district_points(tree, d)}};
        f["geometry"] = {{"type", "MultiPolygon"}, {"coordinates", std::move(polygons)}};
        features.push_back(std::move(f));
    }
    OrderedJson fc;
    fc["type"] = "FeatureCollection";
    fc["features"] = std::move(features);
    return fc.dump(1) + "\n";
}

std::vector<std::vector<std::size_t>> read_plan_membership(std::string_view geojson) {
    const Json root = parse_json(geojson);
    if (type_of(root, "root") != "FeatureCollection") bad_geojson("a plan is a FeatureCollection");
    const Json& features = member(root, "features", "FeatureCollection");
    if (!features.is_array()) bad_geojson("\"features\" is not an array");
    std::vector<std::vector<std::size_t>> out(features.size());
    std::vector<bool> seen(features.size(), false);
    for (std::size_t k = 0; k < features.size(); ++k) {
        const std::string where = "feature " + std::to_string(k);
        const Json& props = member(features[k], "properties", where);
        const Json& id = member(props, "district_id", where);
        const Json& idx = member(props, "point_indices", where);
        if (!id.is_number_unsigned() || id.get<std::size_t>() >= out.size() || seen[id.get<std::size_t>()]) {
            bad_geojson(where + " has a missing, duplicate or out-of-range district_id");
        }
        if (!idx.is_array()) bad_geojson(where + " point_indices is not an array");
        const auto d = id.get<std::size_t>();
        seen[d] = true;
        for (const Json& v : idx) {
            if (!v.is_number_unsigned()) bad_geojson(where + " point_indices holds a non-index");
            out[d].push_back(v.get<std::size_t>());
        }
    }
    return out;
}

std::string audit_json(const BisectionTree& tree, const DistrictPlan& plan, const PlanAudit& audit,
                       const AuditContext& context) {
    auto population = [](const PopulationDeviation& p) {
        OrderedJson j;
        j["total"] = p.total;
        j["mean"] = p.mean;
        j["max_abs_deviation"] = p.max_abs;
        j["max_rel_deviation"] = p.max_rel;
        j["bound"] = p.bound;
        j["within_bound"] = p.within_bound;
        return j;
    };
    OrderedJson districts = OrderedJson::array();
    for (std::size_t d = 0; d < plan.size(); ++d) {
        OrderedJson j;
        j["district_id"] = d;
        j["leaves"] = plan.groups[d];
        j["a_count"] = audit.a_counts[d];
        j["b_count"] = audit.b_counts[d];
        j["a_deviation"] = static_cast<double>(audit.a_counts[d]) - audit.a.mean;
        j["b_deviation"] = static_cast<double>(audit.b_counts[d]) - audit.b.mean;
        j["connected"] = audit.shapes[d].connected;
        j["simply_connected"] = audit.shapes[d].simply_connected;
        j["boundary_loops"] = audit.shapes[d].boundary_loops;
        districts.push_back(std::move(j));
    }
    OrderedJson root;
    root["population_file"] = context.population_path;
    root["region_file"] = context.region_path;
    root["seed"] = context.seed;
    root["strategy"] = context.strategy;
    root["depth"] = tree.depth;
    root["leaves"] = tree.leaf_count();
    root["districts"] = plan.size();
    root["sizes_ok"] = audit.sizes_ok;
    root["A"] = population(audit.a);
    root["B"] = population(audit.b);
    root["within_bound"] = audit.a.within_bound && audit.b.within_bound;
    root["warnings"] = tree.warnings;
    root["district_details"] = std::move(districts);
    return root.dump(1) + "\n";
}

std::string projected_geojson(ProjectionKind kind, std::span<const GeoRegion> regions,
                              const ProjectionOptions& options) {
    OrderedJson features = OrderedJson::array();
    for (const GeoRegion& r : regions) {
        std::vector<Point2> planar;
        for (const GeoPoint& g : densify(r.ring, kDensifyStep)) planar.push_back(project(kind, g, options));
        if (signed_area(planar) < 0.0) std::reverse(planar.begin(), planar.end());
        OrderedJson f;
        f["type"] = "Feature";
        f["properties"] = {{"name", r.name},
                           {"projection", to_string(kind)},
                           {"map_area", region_map_area(kind, r.ring, options)},
                           {"sphere_area", spherical_polygon_area(r.ring)}};
        f["geometry"] = {{"type", "Polygon"}, {"coordinates", OrderedJson::array({closed_ring(planar)})}};
        features.push_back(std::move(f));
    }
    OrderedJson fc;
    fc["type"] = "FeatureCollection";
    fc["features"] = std::move(features);
    return fc.dump(1) + "\n";
}

std::string distortion_csv(std::span<const DistortionSample> samples) {
    std::string out = "lon_deg,lat_deg,conformality_defect,area_defect\n";
    for (const auto& s : samples) {
        out += detail::shortest(s.lon_deg) + "," + detail::shortest(s.lat_deg) + "," +
               detail::shortest(s.report.conformality_defect) + "," +
               detail::shortest(s.report.area_defect) + "\n";
    }
    return out;
}

std::string outcomes_text(std::span<const Outcome> outcomes) {
    std::string out;
    for (const Outcome& o : outcomes) {
        for (std::size_t d = 0; d < o.size(); ++d) {
            if (d > 0) out += " | ";
            for (std::size_t k = 0; k < o[d].size(); ++k) {
                if (k > 0) out += ' ';
                out += std::to_string(o[d][k]);
            }
        }
        out += '\n';
    }
    return out;
}

}  // namespace pancake
