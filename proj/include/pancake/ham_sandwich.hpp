#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "pancake/geometry.hpp"

namespace pancake {

/// One person. Every point belongs to the total population A; in_subpop
/// marks membership in the nested population B (so B is a subset of A).
struct PopulationPoint {
    Point2 location;
    bool in_subpop = false;
};

/// A line together with an explicit side for every population point that
/// sits on it (or too close for the residual sign to be trusted).
struct OrientedCut {
    Line2 line = Line2::from_coefficients(1.0, 0.0, 0.0);
    std::map<std::size_t, Side> on_line_assignment;

    friend bool operator==(const OrientedCut&, const OrientedCut&) = default;
};

struct CutBalanceReport {
    std::size_t pos_total = 0;
    std::size_t neg_total = 0;
    std::size_t pos_subpop = 0;
    std::size_t neg_subpop = 0;
    bool balanced = false;

    friend bool operator==(const CutBalanceReport&, const CutBalanceReport&) = default;
};

struct CutSolverOptions {
    /// Selects the symbolic perturbation direction used to break ties among
    /// collinear or coincident points.
    std::uint64_t seed = 0;
    /// Residuals within eps_on of a cut are treated as lying on it.
    double eps_on = 0.0;
};

/// Counts both populations on each side of the cut. Mapped points are
/// counted by their assignment; every other point by side_of.
/// Throws DomainError if an unmapped point lies on the line, or a mapped
/// point is not on it.
CutBalanceReport verify_cut(std::span<const PopulationPoint> points, const OrientedCut& cut,
                            double eps_on = 0.0);

/// Positive/Negative for each point under the cut (validated as in verify_cut).
std::vector<Side> assign_sides(std::span<const PopulationPoint> points, const OrientedCut& cut,
                               double eps_on = 0.0);

/// A line simultaneously bisecting A and B to within one person each.
///
/// Candidates are lines through pairs of points, each tried with the four
/// ways of pushing the two defining points off the line. Collinear and
/// coincident inputs are handled by simulating a displacement of point k by
/// an infinitesimal multiple of (cos k*theta, sin k*theta), so the search
/// behaves as on points in general position, where a balanced pair line
/// always exists. The first balanced candidate in pair order is returned;
/// throws InvariantViolation if none is found.
OrientedCut find_cut(std::span<const PopulationPoint> points, const CutSolverOptions& options = {});

/// Every balanced pair-line candidate, in scan order.
std::vector<OrientedCut> balanced_cuts(std::span<const PopulationPoint> points,
                                       const CutSolverOptions& options = {});

/// Unordered split of point indices into two groups, stored as a membership
/// mask normalized so that point 0 is in the `false` group.
struct Bipartition {
    std::vector<bool> mask;

    friend auto operator<=>(const Bipartition&, const Bipartition&) = default;
};

Bipartition induced_bipartition(std::span<const PopulationPoint> points, const OrientedCut& cut,
                                double eps_on = 0.0);

constexpr std::size_t kOracleCap = 16;

/// Brute-force enumeration of every combinatorially distinct balanced cut,
/// one representative per induced bipartition. Uses an explicit numeric
/// displacement of the points rather than the solver's symbolic one.
/// Throws SizeError above `cap` points.
std::vector<OrientedCut> oracle_find_all_cuts(std::span<const PopulationPoint> points,
                                              std::size_t cap = kOracleCap,
                                              std::uint64_t seed = 0);

/// Direction of the simulated displacement for point k.
Point2 perturbation_direction(std::size_t k, std::uint64_t seed);

}  // namespace pancake
