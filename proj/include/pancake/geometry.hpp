#pragma once

#include <compare>
#include <span>
#include <string>
#include <vector>

namespace pancake {

/// A planar location. Units are whatever the caller uses (feet in the
/// drug-free-zone examples, abstract units elsewhere).
struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

inline Point2 operator+(Point2 p, Point2 q) { return {p.x + q.x, p.y + q.y}; }
inline Point2 operator-(Point2 p, Point2 q) { return {p.x - q.x, p.y - q.y}; }
inline Point2 operator*(double s, Point2 p) { return {s * p.x, s * p.y}; }
inline double dot(Point2 p, Point2 q) { return p.x * q.x + p.y * q.y; }
inline double cross(Point2 p, Point2 q) { return p.x * q.y - p.y * q.x; }

bool is_finite(Point2 p);

/// Exact sign of the orientation determinant of (a, b, c):
/// +1 if c is left of the directed line a->b, -1 if right, 0 if collinear.
/// Floating-point filtered, falls back to exact rational arithmetic.
int orientation(Point2 a, Point2 b, Point2 c);

enum class Side { Positive, Negative, On };

const char* to_string(Side side);
Side opposite(Side side);

/// The locus a*x + b*y = c, stored in canonical form: a^2 + b^2 = 1 and
/// (a > 0, or a == 0 and b > 0). Each geometric line has exactly one
/// representative, so lines can be compared and deduplicated.
class Line2 {
public:
    static Line2 from_coefficients(double a, double b, double c);
    static Line2 through(Point2 p, Point2 q);
    static Line2 through_with_direction(Point2 p, Point2 direction);

    double a() const { return a_; }
    double b() const { return b_; }
    double c() const { return c_; }
    Point2 normal() const { return {a_, b_}; }
    /// Unit direction with the Positive side on its left.
    Point2 direction() const { return {b_, -a_}; }

    /// Signed residual a*x + b*y - c (a Euclidean distance, since the
    /// normal has unit length).
    double evaluate(Point2 p) const { return a_ * p.x + b_ * p.y - c_; }

    friend auto operator<=>(const Line2&, const Line2&) = default;

private:
    Line2(double a, double b, double c) : a_(a), b_(b), c_(c) {}
    double a_;
    double b_;
    double c_;
};

/// Sign of the line's residual at p. Residuals with magnitude <= eps_on are
/// reported as On; the default of zero treats inputs as exact.
Side side_of(const Line2& line, Point2 p, double eps_on = 0.0);

struct BBox {
    Point2 min{};
    Point2 max{};

    double width() const { return max.x - min.x; }
    double height() const { return max.y - min.y; }
    Point2 center() const { return {0.5 * (min.x + max.x), 0.5 * (min.y + max.y)}; }
    double diameter() const;
    void expand(Point2 p);
    void expand(const BBox& other);
    static BBox empty();
    bool is_empty() const { return min.x > max.x; }
};

class SimplePolygon;

/// Pieces dropped by clip_polygon because their area fell below the sliver
/// tolerance.
struct ClipAudit {
    std::vector<double> dropped_areas;
};

/// Intersection of poly with the closed halfplane on the given side of line.
/// Non-convex input may produce several pieces; convex input at most one.
/// Pieces with area below 1e-12 of the input area are dropped and logged
/// to audit when provided.
std::vector<SimplePolygon> clip_polygon(const SimplePolygon& poly, const Line2& line, Side side,
                                        ClipAudit* audit = nullptr);

/// A simple (non self-intersecting) polygon without holes, stored
/// counterclockwise and closed implicitly. Clockwise input is reversed.
class SimplePolygon {
public:
    explicit SimplePolygon(std::vector<Point2> vertices);

    const std::vector<Point2>& vertices() const { return vertices_; }
    std::size_t size() const { return vertices_.size(); }
    double area() const;
    BBox bbox() const;

    /// Closed containment: boundary points (within tol) count as inside.
    bool contains(Point2 p, double tol = 0.0) const;

    static SimplePolygon rectangle(Point2 lo, Point2 hi);

private:
    struct Trusted {};
    SimplePolygon(std::vector<Point2> vertices, Trusted) : vertices_(std::move(vertices)) {}
    friend std::vector<SimplePolygon> clip_polygon(const SimplePolygon&, const Line2&, Side,
                                                   ClipAudit*);

    std::vector<Point2> vertices_;
};

/// Signed shoelace area; positive for counterclockwise rings.
double signed_area(std::span<const Point2> ring);

/// Shoelace area of a ring; throws DomainError on self-intersection or
/// fewer than three vertices.
double polygon_area(std::span<const Point2> ring);
double polygon_area(const SimplePolygon& poly);

/// True if any two non-adjacent edges of the closed ring touch, or two
/// adjacent edges overlap.
bool is_self_intersecting(std::span<const Point2> ring);

struct Segment {
    Point2 from;
    Point2 to;
    double length() const;
};

/// Portions of the line lying inside poly, ordered along line.direction().
std::vector<Segment> chord_segments(const SimplePolygon& poly, const Line2& line);

enum class MetricKind { Euclidean, Manhattan };

const char* to_string(MetricKind kind);

double l2_distance(Point2 p, Point2 q);
double l1_distance(Point2 p, Point2 q);
double distance(MetricKind metric, Point2 p, Point2 q);

/// Whether p lies in the closed ball of the given radius around center:
/// a disk for Euclidean, a diamond for Manhattan. Throws DomainError for a
/// non-positive or non-finite radius.
bool zone_contains(Point2 center, double radius, MetricKind metric, Point2 p);

}  // namespace pancake
