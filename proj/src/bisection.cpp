#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <tuple>

#include "pancake/districting.hpp"
#include "pancake/errors.hpp"

namespace pancake {

namespace {

struct Split {
    OrientedCut cut;  // keys are population indices
    std::vector<SimplePolygon> pos_pieces, neg_pieces;
    std::vector<std::size_t> pos_points, neg_points;
};

double aspect(const std::vector<SimplePolygon>& pieces) {
    BBox box = BBox::empty();
    for (const auto& p : pieces) box.expand(p.bbox());
    if (box.is_empty()) return std::numeric_limits<double>::infinity();
    const double lo = std::min(box.width(), box.height());
    const double hi = std::max(box.width(), box.height());
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

std::vector<SimplePolygon> clip_all(const std::vector<SimplePolygon>& pieces, const Line2& line,
                                    Side side) {
    std::vector<SimplePolygon> out;
    for (const auto& piece : pieces) {
        for (auto& p : clip_polygon(piece, line, side)) out.push_back(std::move(p));
    }
    return out;
}

Split geometric_split(const Cell& cell, std::span<const PopulationPoint> points, double eps_on) {
    const BBox box = cell.bbox();
    Line2 line = Line2::from_coefficients(1.0, 0.0, 0.0);
    if (!box.is_empty()) {
        const Point2 c = box.center();
        line = box.width() >= box.height() ? Line2::from_coefficients(1.0, 0.0, c.x)
                                           : Line2::from_coefficients(0.0, 1.0, c.y);
    }
    Split s{OrientedCut{line, {}}, clip_all(cell.pieces, line, Side::Positive),
            clip_all(cell.pieces, line, Side::Negative), {}, {}};
    for (std::size_t idx : cell.point_indices) {
        Side side = side_of(line, points[idx].location, eps_on);
        if (side == Side::On) {
            side = Side::Positive;
            s.cut.on_line_assignment.emplace(idx, side);
        }
        (side == Side::Positive ? s.pos_points : s.neg_points).push_back(idx);
    }
    return s;
}

// A line close to cut.line with every mapped point strictly on its
// assigned side and every other point on its current side, found by tilting
// about a pivot between the mapped points. Empty if they do not separate
// along the line or the tilt would move another point.
std::optional<Line2> tilt_off(const OrientedCut& cut, std::span<const PopulationPoint> local,
                              const BBox& extent, double eps_on) {
    const Line2& line = cut.line;
    const Point2 d = line.direction();
    std::vector<std::pair<double, Side>> mapped;
    for (const auto& [k, side] : cut.on_line_assignment) mapped.emplace_back(dot(local[k].location, d), side);
    std::sort(mapped.begin(), mapped.end());

    std::size_t changes = 0, split = 0;
    for (std::size_t m = 1; m < mapped.size(); ++m) {
        if (mapped[m].second != mapped[m - 1].second) {
            ++changes;
            split = m;
        }
    }
    if (changes > 1) return std::nullopt;

    double margin = extent.diameter();
    for (std::size_t k = 0; k < local.size(); ++k) {
        if (cut.on_line_assignment.count(k)) continue;
        margin = std::min(margin, std::abs(line.evaluate(local[k].location)));
    }
    if (!(margin > 0.0)) return std::nullopt;

    // New residual r - (alpha + beta * t); positive offset pushes points
    // to the Negative side.
    double alpha = 0.0, beta = 0.0;
    if (changes == 0) {
        alpha = (mapped.front().second == Side::Positive ? -0.25 : 0.25) * margin;
    } else {
        const double pivot = 0.5 * (mapped[split - 1].first + mapped[split].first);
        double reach = 0.0;
        for (Point2 c : {extent.min, extent.max, Point2{extent.min.x, extent.max.y},
                         Point2{extent.max.x, extent.min.y}}) {
            reach = std::max(reach, std::abs(dot(c, d) - pivot));
        }
        for (const auto& [t, side] : mapped) reach = std::max(reach, std::abs(t - pivot));
        if (!(reach > 0.0)) return std::nullopt;
        beta = (mapped[split].second == Side::Negative ? 0.25 : -0.25) * margin / reach;
        alpha = -beta * pivot;
    }
    const Line2 tilted = Line2::from_coefficients(line.a() - beta * d.x, line.b() - beta * d.y,
                                                  line.c() + alpha);

    const std::vector<Side> before = assign_sides(local, cut, eps_on);
    bool same = true, flipped = true;
    for (std::size_t k = 0; k < local.size(); ++k) {
        const Side now = side_of(tilted, local[k].location, eps_on);
        same = same && now == before[k];
        flipped = flipped && now == opposite(before[k]);
    }
    if (!same && !flipped) return std::nullopt;
    return tilted;
}

Split pancake_split(const Cell& cell, std::span<const PopulationPoint> points,
                    const BisectOptions& options) {
    std::vector<PopulationPoint> local;
    local.reserve(cell.point_indices.size());
    for (std::size_t idx : cell.point_indices) local.push_back(points[idx]);

    const auto candidates = balanced_cuts(local, {options.seed, options.eps_on});
    const OrientedCut* best = nullptr;
    double best_aspect = 0.0;
    std::vector<SimplePolygon> best_pos, best_neg;
    for (const auto& cand : candidates) {
        auto pos = clip_all(cell.pieces, cand.line, Side::Positive);
        auto neg = clip_all(cell.pieces, cand.line, Side::Negative);
        const double a = std::max(aspect(pos), aspect(neg));
        const bool better =
            best == nullptr ||
            std::tie(a, cand.line, cand.on_line_assignment) <
                std::tie(best_aspect, best->line, best->on_line_assignment);
        if (!better) continue;
        best = &cand;
        best_aspect = a;
        best_pos = std::move(pos);
        best_neg = std::move(neg);
    }

    if (std::isinf(best_aspect)) {
        // Every exact candidate leaves a child without area, typically
        // because the points sit on this cell's own boundary.
        const BBox extent = cell.bbox();
        std::optional<OrientedCut> tilted_best;
        for (const auto& cand : candidates) {
            const auto tilted = tilt_off(cand, local, extent, options.eps_on);
            if (!tilted) continue;
            auto pos = clip_all(cell.pieces, *tilted, Side::Positive);
            auto neg = clip_all(cell.pieces, *tilted, Side::Negative);
            const double a = std::max(aspect(pos), aspect(neg));
            if (std::isinf(a)) continue;
            if (tilted_best && std::tie(a, *tilted) >= std::tie(best_aspect, tilted_best->line)) continue;
            tilted_best = OrientedCut{*tilted, {}};
            best_aspect = a;
            best_pos = std::move(pos);
            best_neg = std::move(neg);
        }
        if (tilted_best) {
            const std::vector<Side> sides = assign_sides(local, *tilted_best, options.eps_on);
            Split s{*tilted_best, std::move(best_pos), std::move(best_neg), {}, {}};
            for (std::size_t k = 0; k < local.size(); ++k) {
                (sides[k] == Side::Positive ? s.pos_points : s.neg_points).push_back(cell.point_indices[k]);
            }
            return s;
        }
    }

    const std::vector<Side> sides = assign_sides(local, *best, options.eps_on);
    Split s{OrientedCut{best->line, {}}, std::move(best_pos), std::move(best_neg), {}, {}};
    for (const auto& [k, side] : best->on_line_assignment) {
        s.cut.on_line_assignment.emplace(cell.point_indices[k], side);
    }
    for (std::size_t k = 0; k < local.size(); ++k) {
        (sides[k] == Side::Positive ? s.pos_points : s.neg_points).push_back(cell.point_indices[k]);
    }
    return s;
}

void count_members(Cell& cell, std::span<const PopulationPoint> points) {
    cell.a_count = cell.point_indices.size();
    cell.b_count = 0;
    for (std::size_t idx : cell.point_indices) cell.b_count += points[idx].in_subpop ? 1 : 0;
}

std::size_t absdiff(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

// |count - total/2^depth| < 1, compared in integers.
bool within_leaf_bound(std::size_t count, std::size_t total, std::size_t depth) {
    const std::size_t scale = std::size_t{1} << depth;
    return absdiff(count * scale, total) < scale;
}

}  // namespace

double Cell::area() const {
    double a = 0.0;
    for (const auto& p : pieces) a += p.area();
    return a;
}

BBox Cell::bbox() const {
    BBox box = BBox::empty();
    for (const auto& p : pieces) box.expand(p.bbox());
    return box;
}

BisectionTree BisectionTree::truncated(std::size_t d) const {
    if (d > depth) throw DomainError("cannot truncate a depth " + std::to_string(depth) +
                                     " tree to depth " + std::to_string(d));
    BisectionTree t{region, d, {}, {}, population_size, subpop_size, warnings};
    const std::size_t leaves = std::size_t{1} << d;
    t.nodes.assign(nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(2 * leaves - 1));
    t.cuts.assign(cuts.begin(), cuts.begin() + static_cast<std::ptrdiff_t>(leaves - 1));
    return t;
}

BisectionTree recursive_bisect(const SimplePolygon& region, std::span<const PopulationPoint> points,
                               std::size_t depth, const BisectOptions& options) {
    if (depth > 20) throw SizeError("bisection depth " + std::to_string(depth) + " exceeds 20");
    const double tol = 1e-9 * region.bbox().diameter();
    for (std::size_t k = 0; k < points.size(); ++k) {
        if (!is_finite(points[k].location) || !region.contains(points[k].location, tol)) {
            throw DomainError("population point " + std::to_string(k) + " lies outside the region");
        }
    }

    const std::size_t leaves = std::size_t{1} << depth;
    BisectionTree tree{region, depth, {}, {}, points.size(), 0, {}};
    for (const auto& p : points) tree.subpop_size += p.in_subpop ? 1 : 0;
    if (leaves > points.size()) {
        tree.warnings.push_back(std::to_string(leaves) + " cells for " +
                                std::to_string(points.size()) + " points; some cells are empty");
    }

    tree.nodes.resize(2 * leaves - 1);
    tree.cuts.resize(leaves - 1);
    Cell& root = tree.nodes[0];
    root.pieces.push_back(region);
    root.point_indices.resize(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) root.point_indices[k] = k;
    count_members(root, points);

    for (std::size_t id = 0; id + 1 < leaves; ++id) {
        const Cell& cell = tree.nodes[id];
        Split s = cell.point_indices.size() >= 2 ? pancake_split(cell, points, options)
                                                 : geometric_split(cell, points, options.eps_on);
        Cell& pos = tree.nodes[2 * id + 1];
        Cell& neg = tree.nodes[2 * id + 2];
        pos = Cell{2 * id + 1, std::move(s.pos_pieces), std::move(s.pos_points), cell.depth + 1, id};
        neg = Cell{2 * id + 2, std::move(s.neg_pieces), std::move(s.neg_points), cell.depth + 1, id};
        count_members(pos, points);
        count_members(neg, points);
        if (absdiff(pos.a_count, neg.a_count) > 1 || absdiff(pos.b_count, neg.b_count) > 1) {
            throw InvariantViolation("cell " + std::to_string(id) + " split is unbalanced");
        }
        tree.cuts[id] = std::move(s.cut);
    }
    for (std::size_t id = 0; id < tree.nodes.size(); ++id) tree.nodes[id].id = id;

    for (const Cell& leaf : tree.leaves()) {
        if (!within_leaf_bound(leaf.a_count, tree.population_size, depth) ||
            !within_leaf_bound(leaf.b_count, tree.subpop_size, depth)) {
            throw InvariantViolation("leaf " + std::to_string(leaf.id) +
                                     " deviates by a full person from its share");
        }
    }
    return tree;
}

}  // namespace pancake
