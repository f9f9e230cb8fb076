#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <tuple>

#include "pancake/districting.hpp"
#include "pancake/errors.hpp"
#include "pancake/geometry.hpp"
#include "pancake/ham_sandwich.hpp"
#include "pancake/io.hpp"
#include "pancake/projections.hpp"

namespace py = pybind11;
using namespace pancake;

namespace {

using XY = std::tuple<double, double>;
using Person = std::tuple<double, double, bool>;

Point2 pt(const XY& p) { return {std::get<0>(p), std::get<1>(p)}; }
XY xy(Point2 p) { return {p.x, p.y}; }

std::vector<PopulationPoint> population(const std::vector<Person>& people) {
    std::vector<PopulationPoint> out;
    out.reserve(people.size());
    for (const auto& [x, y, b] : people) out.push_back({{x, y}, b});
    return out;
}

SimplePolygon polygon(const std::vector<XY>& ring) {
    std::vector<Point2> v;
    for (const auto& p : ring) v.push_back(pt(p));
    return SimplePolygon(std::move(v));
}

std::vector<XY> ring_of(const SimplePolygon& poly) {
    std::vector<XY> out;
    for (Point2 p : poly.vertices()) out.push_back(xy(p));
    return out;
}

MetricKind metric(const std::string& name) {
    if (name == "l2" || name == "euclidean") return MetricKind::Euclidean;
    if (name == "l1" || name == "manhattan") return MetricKind::Manhattan;
    throw DomainError("unknown metric '" + name + "' (l1, l2)");
}

Side side(const std::string& name) {
    if (name == "positive") return Side::Positive;
    if (name == "negative") return Side::Negative;
    throw DomainError("side must be 'positive' or 'negative'");
}

GeoPoint geo(const XY& lat_lon_deg) {
    return GeoPoint::from_degrees(std::get<0>(lat_lon_deg), std::get<1>(lat_lon_deg));
}

py::dict cut_dict(const OrientedCut& cut, const CutBalanceReport& r) {
    py::dict d;
    d["line"] = std::make_tuple(cut.line.a(), cut.line.b(), cut.line.c());
    py::dict on;
    for (const auto& [k, s] : cut.on_line_assignment) on[py::int_(k)] = to_string(s);
    d["on_line"] = on;
    d["a_counts"] = std::make_tuple(r.pos_total, r.neg_total);
    d["b_counts"] = std::make_tuple(r.pos_subpop, r.neg_subpop);
    d["balanced"] = r.balanced;
    return d;
}

py::dict deviation_dict(const PopulationDeviation& p) {
    py::dict d;
    d["total"] = p.total;
    d["mean"] = p.mean;
    d["max_abs"] = p.max_abs;
    d["max_rel"] = p.max_rel;
    d["bound"] = p.bound;
    d["within_bound"] = p.within_bound;
    return d;
}

// A bisection tree bundled with the population it was built from.
struct Districting {
    std::vector<PopulationPoint> points;
    BisectionTree tree;
    DistrictPlan plan;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Pancake-cut districting, metric zones and map projection distortion";

    static py::exception<SizeError> size_error(m, "SizeError", PyExc_ValueError);
    static py::exception<InvariantViolation> invariant(m, "InvariantViolation", PyExc_RuntimeError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const SizeError& e) {
            py::set_error(size_error, e.what());
        } catch (const InvariantViolation& e) {
            py::set_error(invariant, e.what());
        } catch (const DomainError& e) {
            py::set_error(PyExc_ValueError, e.what());
        } catch (const IoError& e) {
            py::set_error(PyExc_OSError, e.what());
        }
    });

    m.def("l2_distance", [](const XY& p, const XY& q) { return l2_distance(pt(p), pt(q)); });
    m.def("l1_distance", [](const XY& p, const XY& q) { return l1_distance(pt(p), pt(q)); });
    m.def(
        "zone_contains",
        [](const XY& center, double radius, const std::string& m, const XY& p) {
            return zone_contains(pt(center), radius, metric(m), pt(p));
        },
        py::arg("center"), py::arg("radius"), py::arg("metric"), py::arg("point"),
        "Closed ball test under 'l1' or 'l2'.");

    m.def("polygon_area", [](const std::vector<XY>& ring) { return polygon(ring).area(); });
    m.def(
        "clip_polygon",
        [](const std::vector<XY>& ring, const std::tuple<double, double, double>& abc, const std::string& s) {
            const auto [a, b, c] = abc;
            std::vector<std::vector<XY>> out;
            for (const auto& piece : clip_polygon(polygon(ring), Line2::from_coefficients(a, b, c), side(s))) {
                out.push_back(ring_of(piece));
            }
            return out;
        },
        py::arg("ring"), py::arg("line"), py::arg("side"),
        "Pieces of the polygon on one side of the line a*x + b*y = c.");

    m.def(
        "find_cut",
        [](const std::vector<Person>& people, std::uint64_t seed, double eps_on) {
            const auto pts = population(people);
            const OrientedCut cut = find_cut(pts, {seed, eps_on});
            return cut_dict(cut, verify_cut(pts, cut, eps_on));
        },
        py::arg("points"), py::arg("seed") = 0, py::arg("eps_on") = 0.0,
        "A line halving both populations. points: (x, y, in_subpop) triples.");

    py::class_<Districting>(m, "Districting")
        .def_property_readonly("depth", [](const Districting& d) { return d.tree.depth; })
        .def_property_readonly("groups", [](const Districting& d) { return d.plan.groups; })
        .def_property_readonly("a_counts", [](const Districting& d) { return d.plan.a_counts; })
        .def_property_readonly("b_counts", [](const Districting& d) { return d.plan.b_counts; })
        .def_property_readonly("warnings", [](const Districting& d) { return d.tree.warnings; })
        .def("district_points", [](const Districting& d, std::size_t k) {
            if (k >= d.plan.size()) throw py::index_error("no such district");
            return d.plan.district_points(d.tree, k);
        })
        .def("leaf_pieces", [](const Districting& d, std::size_t l) {
            if (l >= d.tree.leaf_count()) throw py::index_error("no such leaf");
            std::vector<std::vector<XY>> out;
            for (const auto& piece : d.tree.leaf(l).pieces) out.push_back(ring_of(piece));
            return out;
        })
        .def("audit", [](const Districting& d) {
            const PlanAudit a = audit_plan(d.tree, d.plan, d.points);
            py::dict out;
            out["A"] = deviation_dict(a.a);
            out["B"] = deviation_dict(a.b);
            out["sizes_ok"] = a.sizes_ok;
            py::list connected;
            for (const auto& s : a.shapes) connected.append(s.connected);
            out["connected"] = connected;
            return out;
        })
        .def("geojson", [](const Districting& d) { return plan_geojson(d.tree, d.plan); })
        .def("svg", [](const Districting& d) { return plan_svg(d.tree, d.plan, d.points); });

    m.def(
        "district",
        [](const std::vector<XY>& region, const std::vector<Person>& people, std::size_t depth, std::size_t n,
           const std::string& strategy, std::uint64_t seed, double eps_on) {
            auto pts = population(people);
            BisectionTree tree = recursive_bisect(polygon(region), pts, depth, {seed, eps_on});
            DistrictPlan plan = group_cells(tree, n, parse_grouping_strategy(strategy));
            return Districting{std::move(pts), std::move(tree), std::move(plan)};
        },
        py::arg("region"), py::arg("points"), py::arg("depth"), py::arg("n"), py::arg("strategy") = "index",
        py::arg("seed") = 0, py::arg("eps_on") = 0.0,
        "Bisect the region to 2^depth cells and group them into n districts.");

    m.def(
        "count_outcomes",
        [](const std::vector<XY>& region, const std::vector<Person>& people, std::size_t n, std::size_t depth) {
            return count_outcomes(polygon(region), population(people), n, depth);
        },
        py::arg("region"), py::arg("points"), py::arg("n"), py::arg("depth"));

    m.def(
        "project",
        [](const std::string& kind, const XY& lat_lon_deg) {
            return xy(project(parse_projection(kind), geo(lat_lon_deg)));
        },
        py::arg("kind"), py::arg("lat_lon_deg"), "Forward projection on the unit sphere.");
    m.def(
        "distortion",
        [](const std::string& kind, const XY& lat_lon_deg) {
            const DistortionReport r = distortion_report(parse_projection(kind), geo(lat_lon_deg));
            return std::make_tuple(r.conformality_defect, r.area_defect);
        },
        py::arg("kind"), py::arg("lat_lon_deg"), "(conformality_defect, area_defect)");
    m.def(
        "region_map_area",
        [](const std::string& kind, const std::vector<XY>& ring_lat_lon_deg) {
            std::vector<GeoPoint> ring;
            for (const auto& p : ring_lat_lon_deg) ring.push_back(geo(p));
            return region_map_area(parse_projection(kind), ring);
        },
        py::arg("kind"), py::arg("ring"));
    m.def(
        "spherical_triangle_angle_sum",
        [](const XY& a, const XY& b, const XY& c) { return spherical_triangle_angle_sum(geo(a), geo(b), geo(c)); },
        py::arg("a"), py::arg("b"), py::arg("c"), "Interior angle sum in radians; vertices as (lat, lon) degrees.");
}
