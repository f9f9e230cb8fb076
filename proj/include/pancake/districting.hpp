#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pancake/geometry.hpp"
#include "pancake/ham_sandwich.hpp"

namespace pancake {

/// A node of the bisection tree. Leaves are the small districts.
struct Cell {
    std::size_t id = 0;
    std::vector<SimplePolygon> pieces;
    std::vector<std::size_t> point_indices;  // sorted, into the population
    std::size_t depth = 0;
    std::optional<std::size_t> parent;
    std::size_t a_count = 0;
    std::size_t b_count = 0;

    double area() const;
    BBox bbox() const;
};

struct BisectOptions {
    std::uint64_t seed = 0;
    double eps_on = 0.0;
};

/// Cells stored heap-ordered: node k has children 2k+1 and 2k+2, so the
/// leaves of a depth-i tree are nodes 2^i - 1 .. 2^(i+1) - 2. Cut keys in
/// on_line_assignment are population indices.
struct BisectionTree {
    SimplePolygon region;
    std::size_t depth = 0;
    std::vector<Cell> nodes;
    std::vector<OrientedCut> cuts;  // one per internal node, same ids
    std::size_t population_size = 0;
    std::size_t subpop_size = 0;
    std::vector<std::string> warnings;

    std::size_t leaf_count() const { return std::size_t{1} << depth; }
    const Cell& leaf(std::size_t ordinal) const { return nodes[leaf_count() - 1 + ordinal]; }
    std::span<const Cell> leaves() const {
        return std::span<const Cell>(nodes).subspan(leaf_count() - 1, leaf_count());
    }
    /// The same tree cut off after `d` levels (d <= depth).
    BisectionTree truncated(std::size_t d) const;
};

/// Recursive pancake bisection of `region` to 2^depth leaf cells.
///
/// Each cell with at least two points is split by the balanced cut of its
/// own points whose two children have the most compact bounding boxes
/// (smallest worst aspect ratio), ties broken by canonical line order. Cells
/// with at most one point are halved across their longer bounding-box side.
/// Throws DomainError for points outside the region and InvariantViolation
/// if the leaf balance bound fails.
BisectionTree recursive_bisect(const SimplePolygon& region, std::span<const PopulationPoint> points,
                               std::size_t depth, const BisectOptions& options = {});

struct Dyadic {
    std::int64_t numerator = 0;
    unsigned exponent = 0;

    double value() const;
    friend bool operator==(const Dyadic&, const Dyadic&) = default;
};

/// floor(2^i x) / 2^i. Throws DomainError for non-finite x or i > 62.
Dyadic dyadic_approx(double x, unsigned i);

enum class GroupingStrategy { IndexOrder, ContiguityGreedy, ExhaustiveBest };
const char* to_string(GroupingStrategy strategy);
GroupingStrategy parse_grouping_strategy(const std::string& name);

/// n groups of leaf ordinals with sizes floor(2^i/n) or ceil(2^i/n).
struct DistrictPlan {
    std::size_t depth = 0;
    std::vector<std::vector<std::size_t>> groups;
    std::vector<std::size_t> a_counts;
    std::vector<std::size_t> b_counts;
    double a_deviation = 0.0;  // max |count - |A|/n| / (|A|/n)
    double b_deviation = 0.0;

    std::size_t size() const { return groups.size(); }
    std::vector<std::size_t> district_points(const BisectionTree& tree, std::size_t d) const;
};

/// The sizes each group must have, larger ones first.
std::vector<std::size_t> group_sizes(std::size_t leaves, std::size_t n);

/// Plan from explicit groups; counts and deviations from leaf memberships.
/// Throws DomainError if the groups do not partition the leaves with valid
/// sizes.
DistrictPlan make_plan(const BisectionTree& tree, std::vector<std::vector<std::size_t>> groups);

/// Groups the leaves into n districts. ExhaustiveBest minimizes
/// (disconnected districts, worst relative deviation) over every grouping
/// when there are at most kExhaustiveLimit of them, and falls back to
/// ContiguityGreedy plus pairwise swaps otherwise.
DistrictPlan group_cells(const BisectionTree& tree, std::size_t n,
                         GroupingStrategy strategy = GroupingStrategy::IndexOrder);

constexpr double kExhaustiveLimit = 1e6;

/// Number of distinct groupings of `leaves` cells into n districts.
double grouping_count(std::size_t leaves, std::size_t n);

struct CellAdjacencyGraph {
    struct PieceRef {
        std::size_t leaf;   // leaf ordinal
        std::size_t piece;  // index into that leaf's pieces
    };
    std::size_t leaf_count = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;  // leaf ordinals, first < second
    std::vector<bool> multi_piece;                           // per leaf
    std::vector<PieceRef> pieces;
    std::vector<std::pair<std::size_t, std::size_t>> piece_edges;  // into pieces
    double tolerance = 0.0;

    bool adjacent(std::size_t u, std::size_t v) const;
    std::vector<std::vector<std::size_t>> neighbours() const;
};

/// Leaves are adjacent when their pieces share a boundary stretch longer
/// than 1e-9 of the region diameter. Touching at a corner does not count.
CellAdjacencyGraph build_adjacency(const BisectionTree& tree);

struct DistrictShape {
    bool connected = false;
    bool simply_connected = false;
    std::size_t boundary_loops = 0;
};

/// Connectivity of the union of a group's pieces, through the piece graph,
/// and the number of boundary loops of that union.
DistrictShape district_shape(const BisectionTree& tree, const CellAdjacencyGraph& graph,
                             std::span<const std::size_t> group);

struct PopulationDeviation {
    std::size_t total = 0;
    double mean = 0.0;
    double max_abs = 0.0;  // persons
    double max_rel = 0.0;  // fraction of the mean
    double bound = 0.0;    // |P|/2^i + ceil(2^i/n) persons
    bool within_bound = false;
};

struct PlanAudit {
    PopulationDeviation a;
    PopulationDeviation b;
    bool sizes_ok = false;
    std::vector<std::size_t> a_counts;
    std::vector<std::size_t> b_counts;
    std::vector<DistrictShape> shapes;
};

/// Recounts each district from the population and the leaf memberships.
/// Throws DomainError when the plan does not match the tree or points.
PlanAudit audit_plan(const BisectionTree& tree, const DistrictPlan& plan,
                     std::span<const PopulationPoint> points);

struct ContiguityResult {
    std::size_t depth = 0;
    DistrictPlan plan;
};

/// Smallest depth i <= i_max (with 2^i >= n) at which some grouping has every
/// district connected and both relative deviations <= deviation_cap.
/// Groupings are searched exhaustively when there are at most
/// kExhaustiveLimit, otherwise greedily with local search.
std::optional<ContiguityResult> contiguous_min_depth(const SimplePolygon& region,
                                                     std::span<const PopulationPoint> points,
                                                     std::size_t n, double deviation_cap,
                                                     std::size_t i_max = 8,
                                                     const BisectOptions& options = {});

constexpr std::size_t kEnumerationPointCap = 16;
constexpr std::size_t kEnumerationLeafCap = 8;

/// A districting outcome as a partition of the population indices: each
/// district is a sorted index list, districts sorted.
using Outcome = std::vector<std::vector<std::size_t>>;

/// Every distinct partition of the population reachable by choosing any
/// combinatorially distinct balanced cut at each tree node and any valid
/// grouping. Throws SizeError above 16 points or 8 leaves.
std::vector<Outcome> enumerate_outcomes(const SimplePolygon& region,
                                        std::span<const PopulationPoint> points, std::size_t n,
                                        std::size_t depth);

std::size_t count_outcomes(const SimplePolygon& region, std::span<const PopulationPoint> points,
                           std::size_t n, std::size_t depth);

}  // namespace pancake
