#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pancake/errors.hpp"
#include "pancake/geometry.hpp"

namespace pancake {

namespace {

constexpr double kSliverRelTol = 1e-12;
constexpr double kResidualUlps = 8.0;

enum class NodeKind { Vertex, Exit, Entry };

struct RingNode {
    Point2 p;
    NodeKind kind;
    double t = 0.0;    // position along the sweep direction
    double tie = 0.0;  // first-order term of the position under the shift
};

// The polygon boundary with crossing points inserted. Vertices on the
// dropped side are omitted. A vertex lying exactly on the line counts as
// dropped, which is the limit of shifting the line an infinitesimal amount
// into the kept side; the tie key records that shift so coincident
// crossings still sort in a consistent order. Zero-width bridges along the
// line therefore never join two pieces.
struct CrossingRing {
    std::vector<RingNode> nodes;
    std::vector<std::size_t> crossings;  // indices into nodes, sorted along the line
};

CrossingRing build_ring(const SimplePolygon& poly, Point2 kept_normal, double offset) {
    const auto& v = poly.vertices();
    const std::size_t n = v.size();
    const Point2 dir{kept_normal.y, -kept_normal.x};

    std::vector<double> s(n);
    for (std::size_t k = 0; k < n; ++k) {
        s[k] = dot(kept_normal, v[k]) - offset;
        // Residuals within rounding error of the evaluation are exact zeros.
        const double mag = std::abs(kept_normal.x * v[k].x) + std::abs(kept_normal.y * v[k].y) +
                           std::abs(offset);
        if (std::abs(s[k]) <= kResidualUlps * std::numeric_limits<double>::epsilon() * mag) s[k] = 0.0;
    }

    CrossingRing ring;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t next = (k + 1) % n;
        const bool keep_here = s[k] > 0.0;
        const bool keep_next = s[next] > 0.0;
        if (keep_here) ring.nodes.push_back({v[k], NodeKind::Vertex});
        if (keep_here == keep_next) continue;

        Point2 x;
        if (s[k] == 0.0) {
            x = v[k];
        } else if (s[next] == 0.0) {
            x = v[next];
        } else {
            const double u = s[k] / (s[k] - s[next]);
            x = v[k] + u * (v[next] - v[k]);
        }
        RingNode node{x, keep_here ? NodeKind::Exit : NodeKind::Entry};
        node.t = dot(x, dir);
        node.tie = dot(v[next] - v[k], dir) / (s[next] - s[k]);
        ring.crossings.push_back(ring.nodes.size());
        ring.nodes.push_back(node);
    }

    std::sort(ring.crossings.begin(), ring.crossings.end(), [&](std::size_t i, std::size_t j) {
        const RingNode& a = ring.nodes[i];
        const RingNode& b = ring.nodes[j];
        if (a.t != b.t) return a.t < b.t;
        if (a.tie != b.tie) return a.tie < b.tie;
        return i < j;
    });
    for (std::size_t m = 0; m < ring.crossings.size(); ++m) {
        const NodeKind want = (m % 2 == 0) ? NodeKind::Exit : NodeKind::Entry;
        if (ring.nodes[ring.crossings[m]].kind != want) {
            throw InvariantViolation("clip: crossings along the cut line do not alternate");
        }
    }
    return ring;
}

std::vector<Point2> tidy(std::vector<Point2> pts) {
    std::vector<Point2> out;
    for (const Point2& p : pts) {
        if (out.empty() || !(out.back() == p)) out.push_back(p);
    }
    while (out.size() > 1 && out.front() == out.back()) out.pop_back();
    return out;
}

}  // namespace

std::vector<SimplePolygon> clip_polygon(const SimplePolygon& poly, const Line2& line, Side side,
                                        ClipAudit* audit) {
    if (side == Side::On) throw DomainError("clip side must be Positive or Negative");
    const double sign = side == Side::Positive ? 1.0 : -1.0;
    const CrossingRing ring = build_ring(poly, sign * line.normal(), sign * line.c());

    if (ring.crossings.empty()) {
        if (ring.nodes.empty()) return {};
        return {poly};
    }

    const std::size_t m = ring.nodes.size();
    std::vector<std::size_t> next(m);
    for (std::size_t k = 0; k < m; ++k) next[k] = (k + 1) % m;
    for (std::size_t c = 0; c + 1 < ring.crossings.size(); c += 2) {
        // Walk from an exit along the line to the entry that closes the piece.
        next[ring.crossings[c]] = ring.crossings[c + 1];
    }

    const double total = poly.area();
    std::vector<SimplePolygon> pieces;
    std::vector<bool> visited(m, false);
    for (std::size_t start = 0; start < m; ++start) {
        if (visited[start]) continue;
        std::vector<Point2> cycle;
        std::size_t k = start;
        while (!visited[k]) {
            visited[k] = true;
            cycle.push_back(ring.nodes[k].p);
            k = next[k];
        }
        cycle = tidy(std::move(cycle));
        const double a = cycle.size() >= 3 ? signed_area(cycle) : 0.0;
        if (a <= kSliverRelTol * total) {
            if (audit) audit->dropped_areas.push_back(a);
            continue;
        }
        pieces.push_back(SimplePolygon(std::move(cycle), SimplePolygon::Trusted{}));
    }
    return pieces;
}

std::vector<Segment> chord_segments(const SimplePolygon& poly, const Line2& line) {
    const CrossingRing ring = build_ring(poly, line.normal(), line.c());
    std::vector<Segment> out;
    for (std::size_t c = 0; c + 1 < ring.crossings.size(); c += 2) {
        const Segment seg{ring.nodes[ring.crossings[c]].p, ring.nodes[ring.crossings[c + 1]].p};
        if (seg.length() > 0.0) out.push_back(seg);
    }
    return out;
}

}  // namespace pancake
