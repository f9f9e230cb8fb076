#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>

#include "pancake/districting.hpp"

namespace pancake {

namespace {

constexpr double kSharedRelTol = 1e-9;

struct DisjointSets {
    std::vector<std::size_t> parent;

    explicit DisjointSets(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), std::size_t{0});
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

// Parameter interval of `other` along `edge` when the two are collinear
// within tol; empty (lo >= hi) otherwise.
std::pair<double, double> overlap_interval(const Segment& edge, const Segment& other, double tol) {
    const Point2 d = edge.to - edge.from;
    const double len = std::hypot(d.x, d.y);
    if (len == 0.0) return {0.0, 0.0};
    const Point2 u = (1.0 / len) * d;
    if (std::abs(cross(u, other.from - edge.from)) > tol) return {0.0, 0.0};
    if (std::abs(cross(u, other.to - edge.from)) > tol) return {0.0, 0.0};
    const double t0 = dot(u, other.from - edge.from);
    const double t1 = dot(u, other.to - edge.from);
    return {std::max(0.0, std::min(t0, t1)), std::min(len, std::max(t0, t1))};
}

std::vector<Segment> edges_of(const SimplePolygon& poly) {
    const auto& v = poly.vertices();
    std::vector<Segment> out;
    out.reserve(v.size());
    for (std::size_t k = 0; k < v.size(); ++k) out.push_back({v[k], v[(k + 1) % v.size()]});
    return out;
}

double shared_length(const SimplePolygon& p, const SimplePolygon& q, double tol) {
    double total = 0.0;
    const auto qe = edges_of(q);
    for (const Segment& e : edges_of(p)) {
        for (const Segment& f : qe) {
            const auto [lo, hi] = overlap_interval(e, f, tol);
            if (hi > lo) total += hi - lo;
        }
    }
    return total;
}

bool boxes_near(const BBox& a, const BBox& b, double tol) {
    return a.min.x <= b.max.x + tol && b.min.x <= a.max.x + tol && a.min.y <= b.max.y + tol &&
           b.min.y <= a.max.y + tol;
}

const SimplePolygon& piece_at(const BisectionTree& tree, const CellAdjacencyGraph::PieceRef& ref) {
    return tree.leaf(ref.leaf).pieces[ref.piece];
}

}  // namespace

bool CellAdjacencyGraph::adjacent(std::size_t u, std::size_t v) const {
    const auto key = std::minmax(u, v);
    return std::binary_search(edges.begin(), edges.end(), std::pair{key.first, key.second});
}

std::vector<std::vector<std::size_t>> CellAdjacencyGraph::neighbours() const {
    std::vector<std::vector<std::size_t>> out(leaf_count);
    for (const auto& [u, v] : edges) {
        out[u].push_back(v);
        out[v].push_back(u);
    }
    for (auto& list : out) std::sort(list.begin(), list.end());
    return out;
}

CellAdjacencyGraph build_adjacency(const BisectionTree& tree) {
    CellAdjacencyGraph g;
    g.leaf_count = tree.leaf_count();
    g.tolerance = kSharedRelTol * tree.region.bbox().diameter();
    g.multi_piece.resize(g.leaf_count);
    std::vector<BBox> boxes;
    for (std::size_t l = 0; l < g.leaf_count; ++l) {
        const Cell& leaf = tree.leaf(l);
        g.multi_piece[l] = leaf.pieces.size() > 1;
        for (std::size_t k = 0; k < leaf.pieces.size(); ++k) {
            g.pieces.push_back({l, k});
            boxes.push_back(leaf.pieces[k].bbox());
        }
    }

    std::set<std::pair<std::size_t, std::size_t>> leaf_edges;
    for (std::size_t p = 0; p < g.pieces.size(); ++p) {
        for (std::size_t q = p + 1; q < g.pieces.size(); ++q) {
            if (!boxes_near(boxes[p], boxes[q], g.tolerance)) continue;
            const double shared =
                shared_length(piece_at(tree, g.pieces[p]), piece_at(tree, g.pieces[q]), g.tolerance);
            if (shared <= g.tolerance) continue;
            g.piece_edges.emplace_back(p, q);
            const std::size_t u = g.pieces[p].leaf, v = g.pieces[q].leaf;
            if (u != v) leaf_edges.insert(std::minmax(u, v));
        }
    }
    g.edges.assign(leaf_edges.begin(), leaf_edges.end());
    return g;
}

DistrictShape district_shape(const BisectionTree& tree, const CellAdjacencyGraph& graph,
                             std::span<const std::size_t> group) {
    std::vector<bool> in_group(graph.leaf_count, false);
    for (std::size_t l : group) in_group[l] = true;

    std::vector<std::size_t> members;  // piece ids
    std::vector<std::size_t> local(graph.pieces.size(), SIZE_MAX);
    for (std::size_t p = 0; p < graph.pieces.size(); ++p) {
        if (in_group[graph.pieces[p].leaf]) {
            local[p] = members.size();
            members.push_back(p);
        }
    }
    DistrictShape shape;
    if (members.empty()) return shape;

    DisjointSets pieces(members.size());
    std::vector<std::vector<std::size_t>> touching(members.size());
    for (const auto& [p, q] : graph.piece_edges) {
        if (local[p] == SIZE_MAX || local[q] == SIZE_MAX) continue;
        pieces.unite(local[p], local[q]);
        touching[local[p]].push_back(q);
        touching[local[q]].push_back(p);
    }
    std::size_t components = 0;
    for (std::size_t m = 0; m < members.size(); ++m) components += pieces.find(m) == m ? 1 : 0;
    shape.connected = components == 1;

    // Boundary of the union: each edge minus the stretches covered by edges
    // of touching pieces in the same district.
    std::vector<Point2> vertices;
    for (std::size_t p : members) {
        const auto& v = piece_at(tree, graph.pieces[p]).vertices();
        vertices.insert(vertices.end(), v.begin(), v.end());
    }
    auto snap = [&](Point2 x) {
        for (Point2 v : vertices) {
            if (l2_distance(v, x) <= 10.0 * graph.tolerance) return v;
        }
        return x;
    };

    std::map<std::pair<double, double>, std::size_t> endpoint_ids;
    std::vector<std::pair<std::size_t, std::size_t>> boundary;
    auto endpoint = [&](Point2 x) {
        const auto key = std::pair{x.x, x.y};
        auto it = endpoint_ids.find(key);
        if (it == endpoint_ids.end()) it = endpoint_ids.emplace(key, endpoint_ids.size()).first;
        return it->second;
    };
    for (std::size_t m = 0; m < members.size(); ++m) {
        for (const Segment& e : edges_of(piece_at(tree, graph.pieces[members[m]]))) {
            const double len = e.length();
            if (len == 0.0) continue;
            std::vector<std::pair<double, double>> covered;
            for (std::size_t q : touching[m]) {
                for (const Segment& f : edges_of(piece_at(tree, graph.pieces[q]))) {
                    const auto iv = overlap_interval(e, f, graph.tolerance);
                    if (iv.second > iv.first) covered.push_back(iv);
                }
            }
            std::sort(covered.begin(), covered.end());
            const Point2 u = (1.0 / len) * (e.to - e.from);
            double t = 0.0;
            auto emit = [&](double lo, double hi) {
                if (hi - lo <= graph.tolerance) return;
                boundary.emplace_back(endpoint(snap(e.from + lo * u)), endpoint(snap(e.from + hi * u)));
            };
            for (const auto& [lo, hi] : covered) {
                if (lo > t) emit(t, lo);
                t = std::max(t, hi);
            }
            if (t < len) emit(t, len);
        }
    }

    DisjointSets loops(endpoint_ids.size());
    for (const auto& [a, b] : boundary) loops.unite(a, b);
    std::set<std::size_t> roots;
    for (const auto& [a, b] : boundary) roots.insert(loops.find(a));
    shape.boundary_loops = roots.size();
    shape.simply_connected = shape.connected && shape.boundary_loops == 1;
    return shape;
}

}  // namespace pancake
