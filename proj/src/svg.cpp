#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "format.hpp"
#include "pancake/io.hpp"

namespace pancake {

namespace {

constexpr std::array<const char*, 12> kPalette = {
    "#a6cee3", "#1f78b4", "#b2df8a", "#33a02c", "#fb9a99", "#e31a1c",
    "#fdbf6f", "#ff7f00", "#cab2d6", "#6a3d9a", "#ffff99", "#b15928"};

constexpr double kCanvas = 600.0;
constexpr double kMargin = 10.0;

// World box to a kCanvas-wide picture, y up.
class Viewport {
public:
    explicit Viewport(const BBox& box) : box_(box) {
        const double w = std::max(box.width(), 1e-300), h = std::max(box.height(), 1e-300);
        scale_ = (kCanvas - 2 * kMargin) / std::max(w, h);
        width_ = w * scale_ + 2 * kMargin;
        height_ = h * scale_ + 2 * kMargin;
    }

    std::string header() const {
        return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
               "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
               detail::fixed(width_, 1) + "\" height=\"" + detail::fixed(height_, 1) +
               "\" viewBox=\"0 0 " + detail::fixed(width_, 1) + " " + detail::fixed(height_, 1) +
               "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    }

    Point2 pixel(Point2 p) const {
        return {kMargin + (p.x - box_.min.x) * scale_, kMargin + (box_.max.y - p.y) * scale_};
    }

    std::string xy(Point2 p) const {
        const Point2 q = pixel(p);
        return detail::fixed(q.x, 2) + "," + detail::fixed(q.y, 2);
    }

    // Attribute pair such as x1="..." y1="...".
    std::string attrs(Point2 p, const char* x, const char* y) const {
        const Point2 q = pixel(p);
        return std::string(x) + "=\"" + detail::fixed(q.x, 2) + "\" " + y + "=\"" + detail::fixed(q.y, 2) + "\"";
    }

    std::string path(std::span<const Point2> ring) const {
        std::string d;
        for (std::size_t k = 0; k < ring.size(); ++k) d += (k == 0 ? "M" : " L") + xy(ring[k]);
        return d + " Z";
    }

private:
    BBox box_;
    double scale_ = 1.0;
    double width_ = 0.0, height_ = 0.0;
};

std::string polyline(const Viewport& view, std::span<const Point2> pts, const std::string& style) {
    std::string s = "<polyline fill=\"none\" " + style + " points=\"";
    for (std::size_t k = 0; k < pts.size(); ++k) s += (k == 0 ? "" : " ") + view.xy(pts[k]);
    return s + "\"/>\n";
}

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string plan_svg(const BisectionTree& tree, const DistrictPlan& plan,
                     std::span<const PopulationPoint> points) {
    const Viewport view(tree.region.bbox());
    std::string s = view.header();

    std::vector<std::size_t> district_of(tree.leaf_count(), 0);
    for (std::size_t d = 0; d < plan.size(); ++d) {
        for (std::size_t l : plan.groups[d]) district_of[l] = d;
    }
    s += "<g id=\"cells\" stroke=\"#333333\" stroke-width=\"0.6\">\n";
    for (std::size_t l = 0; l < tree.leaf_count(); ++l) {
        for (const SimplePolygon& piece : tree.leaf(l).pieces) {
            s += "<path fill=\"" + std::string(kPalette[district_of[l] % kPalette.size()]) + "\" d=\"" +
                 view.path(piece.vertices()) + "\"/>\n";
        }
    }
    s += "</g>\n<g id=\"cuts\" stroke=\"#000000\" stroke-width=\"1\" stroke-dasharray=\"5,3\">\n";
    for (std::size_t id = 0; id < tree.cuts.size(); ++id) {
        for (const SimplePolygon& piece : tree.nodes[id].pieces) {
            for (const Segment& seg : chord_segments(piece, tree.cuts[id].line)) {
                s += "<line " + view.attrs(seg.from, "x1", "y1") + " " + view.attrs(seg.to, "x2", "y2") + "/>\n";
            }
        }
    }
    s += "</g>\n<g id=\"points\" stroke=\"none\">\n";
    for (const auto& p : points) {
        s += "<circle " + view.attrs(p.location, "cx", "cy") + " r=\"" +
             (p.in_subpop ? "2.5\" fill=\"#000000\"" : "2\" fill=\"#777777\"") + "/>\n";
    }
    s += "</g>\n<path fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\" d=\"" +
         view.path(tree.region.vertices()) + "\"/>\n</svg>\n";
    return s;
}

std::string projection_svg(ProjectionKind kind, std::span<const GeoRegion> regions,
                           const ProjectionOptions& options) {
    using std::numbers::pi;
    const double top = kind == ProjectionKind::Mercator ? options.mercator_max_lat : 89.0 * pi / 180.0;
    BBox box = BBox::empty();
    box.expand(project(kind, {-top, -pi}, options));
    box.expand(project(kind, {top, pi}, options));
    const Viewport view(box);
    std::string s = view.header();

    const std::string grid = "stroke=\"#bbbbbb\" stroke-width=\"0.5\"";
    s += "<g id=\"graticule\">\n";
    for (int lon = -180; lon <= 180; lon += 30) {
        const double l = lon * pi / 180.0;
        const std::array<Point2, 2> m{project(kind, {-top, l}, options), project(kind, {top, l}, options)};
        s += polyline(view, m, grid);
    }
    for (int lat = -60; lat <= 60; lat += 30) {
        const double p = lat * pi / 180.0;
        const std::array<Point2, 2> par{project(kind, {p, -pi}, options), project(kind, {p, pi}, options)};
        s += polyline(view, par, grid);
    }
    s += "</g>\n<g id=\"regions\" fill=\"#e3c48d\" fill-opacity=\"0.6\" stroke=\"#5a3e1b\" stroke-width=\"1\">\n";
    for (const GeoRegion& r : regions) {
        std::vector<Point2> planar;
        for (const GeoPoint& g : densify(r.ring, kDensifyStep)) planar.push_back(project(kind, g, options));
        s += "<path d=\"" + view.path(planar) + "\"><title>" + escape(r.name) + "</title></path>\n";
    }
    s += "</g>\n</svg>\n";
    return s;
}

}  // namespace pancake
