#include "pancake/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>

#include "pancake/errors.hpp"

namespace pancake {

namespace {

using Rational = boost::multiprecision::cpp_rational;

// Shewchuk's orient2d stage-A error bound coefficient, (3 + 16 eps) eps.
constexpr double kOrientErrBound = 3.3306690738754716e-16;

int orientation_exact(Point2 a, Point2 b, Point2 c) {
    const Rational ax(a.x), ay(a.y), bx(b.x), by(b.y), cx(c.x), cy(c.y);
    const Rational det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
    return det.sign();
}

bool on_segment_collinear(Point2 p, Point2 q, Point2 r) {
    // r is collinear with p-q; is it within the closed segment?
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
           r.y <= std::max(p.y, q.y);
}

bool segments_touch(Point2 p1, Point2 p2, Point2 q1, Point2 q2) {
    const int o1 = orientation(p1, p2, q1);
    const int o2 = orientation(p1, p2, q2);
    const int o3 = orientation(q1, q2, p1);
    const int o4 = orientation(q1, q2, p2);
    if (o1 * o2 < 0 && o3 * o4 < 0) return true;
    if (o1 == 0 && on_segment_collinear(p1, p2, q1)) return true;
    if (o2 == 0 && on_segment_collinear(p1, p2, q2)) return true;
    if (o3 == 0 && on_segment_collinear(q1, q2, p1)) return true;
    if (o4 == 0 && on_segment_collinear(q1, q2, p2)) return true;
    return false;
}

std::vector<Point2> drop_repeated(std::vector<Point2> ring) {
    std::vector<Point2> out;
    out.reserve(ring.size());
    for (const Point2& p : ring) {
        if (out.empty() || !(out.back() == p)) out.push_back(p);
    }
    while (out.size() > 1 && out.front() == out.back()) out.pop_back();
    return out;
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
    const Point2 ab = b - a;
    const double len2 = dot(ab, ab);
    double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return l2_distance(p, a + t * ab);
}

}  // namespace

bool is_finite(Point2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

int orientation(Point2 a, Point2 b, Point2 c) {
    const double detleft = (b.x - a.x) * (c.y - a.y);
    const double detright = (b.y - a.y) * (c.x - a.x);
    const double det = detleft - detright;
    const double errbound = kOrientErrBound * (std::abs(detleft) + std::abs(detright));
    if (det > errbound) return 1;
    if (-det > errbound) return -1;
    return orientation_exact(a, b, c);
}

const char* to_string(Side side) {
    switch (side) {
        case Side::Positive: return "positive";
        case Side::Negative: return "negative";
        case Side::On: return "on";
    }
    return "?";
}

Side opposite(Side side) {
    switch (side) {
        case Side::Positive: return Side::Negative;
        case Side::Negative: return Side::Positive;
        case Side::On: return Side::On;
    }
    return Side::On;
}

Line2 Line2::from_coefficients(double a, double b, double c) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
        throw DomainError("line coefficients must be finite");
    }
    const double norm = std::hypot(a, b);
    if (norm == 0.0) throw DomainError("line normal (a, b) must be nonzero");
    a /= norm;
    b /= norm;
    c /= norm;
    if (a < 0.0 || (a == 0.0 && b < 0.0)) {
        a = -a;
        b = -b;
        c = -c;
    }
    // Avoid a signed zero leaking into comparisons.
    if (a == 0.0) a = 0.0;
    if (b == 0.0) b = 0.0;
    if (c == 0.0) c = 0.0;
    return Line2(a, b, c);
}

Line2 Line2::through(Point2 p, Point2 q) {
    if (p == q) throw DomainError("a line needs two distinct points");
    return through_with_direction(p, q - p);
}

Line2 Line2::through_with_direction(Point2 p, Point2 direction) {
    if (!is_finite(p) || !is_finite(direction)) throw DomainError("non-finite line data");
    // Left normal of the direction.
    const double a = -direction.y;
    const double b = direction.x;
    const double norm = std::hypot(a, b);
    if (norm == 0.0) throw DomainError("line direction must be nonzero");
    return from_coefficients(a / norm, b / norm, (a * p.x + b * p.y) / norm);
}

Side side_of(const Line2& line, Point2 p, double eps_on) {
    const double r = line.evaluate(p);
    if (std::abs(r) <= eps_on) return Side::On;
    return r > 0.0 ? Side::Positive : Side::Negative;
}

double BBox::diameter() const { return is_empty() ? 0.0 : std::hypot(width(), height()); }

void BBox::expand(Point2 p) {
    min.x = std::min(min.x, p.x);
    min.y = std::min(min.y, p.y);
    max.x = std::max(max.x, p.x);
    max.y = std::max(max.y, p.y);
}

void BBox::expand(const BBox& other) {
    if (other.is_empty()) return;
    expand(other.min);
    expand(other.max);
}

BBox BBox::empty() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {{inf, inf}, {-inf, -inf}};
}

double signed_area(std::span<const Point2> ring) {
    const std::size_t n = ring.size();
    if (n < 3) return 0.0;
    // Shoelace relative to the first vertex to limit cancellation.
    const Point2 o = ring[0];
    double twice = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        twice += cross(ring[i] - o, ring[i + 1] - o);
    }
    return 0.5 * twice;
}

bool is_self_intersecting(std::span<const Point2> ring) {
    const std::size_t n = ring.size();
    if (n < 3) return true;
    for (std::size_t i = 0; i < n; ++i) {
        const Point2 a = ring[i];
        const Point2 b = ring[(i + 1) % n];
        const Point2 c = ring[(i + 2) % n];
        // Adjacent edges a-b and b-c overlap iff they fold back on each other.
        if (orientation(a, b, c) == 0 && dot(a - b, c - b) > 0.0) return true;
        for (std::size_t j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue;  // adjacent through the closing edge
            if (segments_touch(a, b, ring[j], ring[(j + 1) % n])) return true;
        }
    }
    return false;
}

double polygon_area(std::span<const Point2> ring) {
    if (ring.size() < 3) throw DomainError("polygon needs at least three vertices");
    if (is_self_intersecting(ring)) throw DomainError("polygon is self-intersecting");
    return std::abs(signed_area(ring));
}

double polygon_area(const SimplePolygon& poly) { return poly.area(); }

SimplePolygon::SimplePolygon(std::vector<Point2> vertices) {
    for (const Point2& p : vertices) {
        if (!is_finite(p)) throw DomainError("polygon vertex is not finite");
    }
    vertices = drop_repeated(std::move(vertices));
    if (vertices.size() < 3) throw DomainError("polygon needs at least three distinct vertices");
    if (is_self_intersecting(vertices)) throw DomainError("polygon is self-intersecting");
    const double a = signed_area(vertices);
    if (a == 0.0) throw DomainError("polygon has zero area");
    if (a < 0.0) std::reverse(vertices.begin(), vertices.end());
    vertices_ = std::move(vertices);
}

double SimplePolygon::area() const { return signed_area(vertices_); }

BBox SimplePolygon::bbox() const {
    BBox box = BBox::empty();
    for (const Point2& p : vertices_) box.expand(p);
    return box;
}

bool SimplePolygon::contains(Point2 p, double tol) const {
    const std::size_t n = vertices_.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point2 a = vertices_[j];
        const Point2 b = vertices_[i];
        if (point_segment_distance(p, a, b) <= tol) return true;
        if ((b.y > p.y) != (a.y > p.y)) {
            const double x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

SimplePolygon SimplePolygon::rectangle(Point2 lo, Point2 hi) {
    return SimplePolygon({{lo.x, lo.y}, {hi.x, lo.y}, {hi.x, hi.y}, {lo.x, hi.y}});
}

double Segment::length() const { return l2_distance(from, to); }

const char* to_string(MetricKind kind) {
    return kind == MetricKind::Euclidean ? "l2" : "l1";
}

double l2_distance(Point2 p, Point2 q) { return std::hypot(p.x - q.x, p.y - q.y); }

double l1_distance(Point2 p, Point2 q) { return std::abs(p.x - q.x) + std::abs(p.y - q.y); }

double distance(MetricKind metric, Point2 p, Point2 q) {
    return metric == MetricKind::Euclidean ? l2_distance(p, q) : l1_distance(p, q);
}

bool zone_contains(Point2 center, double radius, MetricKind metric, Point2 p) {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw DomainError("zone radius must be positive and finite");
    }
    return distance(metric, center, p) <= radius;
}

}  // namespace pancake
