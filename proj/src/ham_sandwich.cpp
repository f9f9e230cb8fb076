#include "pancake/ham_sandwich.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <string>

#include "pancake/errors.hpp"

namespace pancake {

namespace {

constexpr double kGoldenAngle = 2.399963229728653;
constexpr double kOrientErrBound = 3.3306690738754716e-16;

double coordinate_scale(std::span<const PopulationPoint> points) {
    double scale = 0.0;
    for (const auto& p : points) {
        scale = std::max({scale, std::abs(p.location.x), std::abs(p.location.y)});
    }
    return 1.0 + scale;
}

double on_line_tolerance(std::span<const PopulationPoint> points, double eps_on) {
    return std::max(eps_on, 1e-9 * coordinate_scale(points));
}

int sign_of(long double v) { return (v > 0) - (v < 0); }

// Orientation of (i, j, k) for points displaced by delta * v_k, as delta -> 0+.
class SymbolicOrientation {
public:
    SymbolicOrientation(std::span<const PopulationPoint> points, std::uint64_t seed)
        : points_(points) {
        offsets_.reserve(points.size());
        for (std::size_t k = 0; k < points.size(); ++k) {
            offsets_.push_back(perturbation_direction(k, seed));
        }
    }

    Point2 offset(std::size_t k) const { return offsets_[k]; }

    int operator()(std::size_t i, std::size_t j, std::size_t k) const {
        const Point2 pi = points_[i].location;
        const Point2 pj = points_[j].location;
        const Point2 pk = points_[k].location;
        const double dl = (pj.x - pi.x) * (pk.y - pi.y);
        const double dr = (pj.y - pi.y) * (pk.x - pi.x);
        const double det = dl - dr;
        const double err = kOrientErrBound * (std::abs(dl) + std::abs(dr));
        if (det > err) return 1;
        if (-det > err) return -1;
        return degenerate(i, j, k);
    }

private:
    int degenerate(std::size_t i, std::size_t j, std::size_t k) const {
        const Point2 pi = points_[i].location;
        const Point2 pj = points_[j].location;
        const Point2 pk = points_[k].location;
        if (!(pi == pj)) {
            if (const int o = orientation(pi, pj, pk); o != 0) return o;
        }
        const Point2 vi = offsets_[i], vj = offsets_[j], vk = offsets_[k];
        const long double first =
            static_cast<long double>(pj.x - pi.x) * (static_cast<long double>(vk.y) - vi.y) -
            static_cast<long double>(pj.y - pi.y) * (static_cast<long double>(vk.x) - vi.x) +
            (static_cast<long double>(vj.x) - vi.x) * (static_cast<long double>(pk.y) - pi.y) -
            (static_cast<long double>(vj.y) - vi.y) * (static_cast<long double>(pk.x) - pi.x);
        if (const int s = sign_of(first); s != 0) return s;
        const long double second =
            (static_cast<long double>(vj.x) - vi.x) * (static_cast<long double>(vk.y) - vi.y) -
            (static_cast<long double>(vj.y) - vi.y) * (static_cast<long double>(vk.x) - vi.x);
        if (const int s = sign_of(second); s != 0) return s;
        return k > j ? 1 : -1;
    }

    std::span<const PopulationPoint> points_;
    std::vector<Point2> offsets_;
};

// The line through points i and j (or, when they coincide, through the
// point along the difference of their displacement directions), and
// whether its canonical Positive side is the right-hand side of i->j.
struct PairLine {
    Line2 line;
    bool flipped;
};

PairLine pair_line(Point2 pi, Point2 pj, Point2 vi, Point2 vj) {
    const Point2 dir = pi == pj ? vj - vi : pj - pi;
    const Line2 line = Line2::through_with_direction(pi, dir);
    const Point2 left{-dir.y, dir.x};
    return {line, dot(line.normal(), left) < 0.0};
}

bool is_balanced(std::size_t pos, std::size_t neg) {
    return (pos > neg ? pos - neg : neg - pos) <= 1;
}

struct Counts {
    std::size_t pos_a = 0, neg_a = 0, pos_b = 0, neg_b = 0;

    void add(Side s, bool in_b) {
        if (s == Side::Positive) {
            ++pos_a;
            if (in_b) ++pos_b;
        } else {
            ++neg_a;
            if (in_b) ++neg_b;
        }
    }
    bool balanced() const { return is_balanced(pos_a, neg_a) && is_balanced(pos_b, neg_b); }
};

constexpr std::pair<Side, Side> kPolarities[] = {
    {Side::Positive, Side::Positive},
    {Side::Positive, Side::Negative},
    {Side::Negative, Side::Positive},
    {Side::Negative, Side::Negative},
};

// Map the two defining points, plus every point whose floating-point side
// under `line` differs from its intended side, so verify_cut reproduces the
// intended split exactly.
OrientedCut realize(std::span<const PopulationPoint> points, const Line2& line, std::size_t i,
                    std::size_t j, const std::vector<Side>& intended, double eps_on) {
    OrientedCut cut{line, {{i, intended[i]}, {j, intended[j]}}};
    for (std::size_t k = 0; k < points.size(); ++k) {
        if (side_of(line, points[k].location, eps_on) != intended[k]) {
            cut.on_line_assignment.emplace(k, intended[k]);
        }
    }
    return cut;
}

OrientedCut single_point_cut(std::span<const PopulationPoint> points) {
    const Point2 p = points[0].location;
    return OrientedCut{Line2::from_coefficients(0.0, 1.0, p.y), {{0, Side::Positive}}};
}

// Other points sorted counterclockwise around pivot i under the symbolic
// orientation, starting from the lowest other index.
std::vector<std::size_t> angular_order(const SymbolicOrientation& orient, std::size_t n,
                                       std::size_t i) {
    std::vector<std::size_t> ord;
    ord.reserve(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
        if (k != i) ord.push_back(k);
    }
    const std::size_t ref = ord.front();
    auto half = [&](std::size_t k) { return k == ref || orient(i, ref, k) > 0 ? 0 : 1; };
    std::vector<int> halves(n);
    for (std::size_t k : ord) halves[k] = half(k);
    std::sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) {
        if (halves[a] != halves[b]) return halves[a] < halves[b];
        return a != b && orient(i, a, b) > 0;
    });
    return ord;
}

// For every j != i, the A and B counts strictly left of the directed line
// i->j (under the symbolic perturbation). Left points form the contiguous
// angular window after j, so a rotating pointer finds them all.
struct LeftCounts {
    std::vector<std::size_t> a, b;
};

LeftCounts left_counts(std::span<const PopulationPoint> points, const SymbolicOrientation& orient,
                       std::size_t i) {
    const std::size_t n = points.size();
    const std::vector<std::size_t> ord = angular_order(orient, n, i);
    const std::size_t m = ord.size();
    std::vector<std::size_t> pre_a(2 * m + 1, 0), pre_b(2 * m + 1, 0);
    for (std::size_t q = 0; q < 2 * m; ++q) {
        pre_a[q + 1] = pre_a[q] + 1;
        pre_b[q + 1] = pre_b[q] + (points[ord[q % m]].in_subpop ? 1 : 0);
    }
    LeftCounts out{std::vector<std::size_t>(n, 0), std::vector<std::size_t>(n, 0)};
    std::size_t e = 1;
    for (std::size_t q = 0; q < m; ++q) {
        const std::size_t j = ord[q];
        e = std::max(e, q + 1);
        while (e < q + m && orient(i, j, ord[e % m]) > 0) ++e;
        out.a[j] = pre_a[e] - pre_a[q + 1];
        out.b[j] = pre_b[e] - pre_b[q + 1];
    }
    return out;
}

template <class Visitor>
void scan_pairs(std::span<const PopulationPoint> points, const CutSolverOptions& options,
                Visitor&& visit) {
    const std::size_t n = points.size();
    const SymbolicOrientation orient(points, options.seed);
    std::size_t total_b = 0;
    for (const auto& p : points) total_b += p.in_subpop ? 1 : 0;
    std::vector<Side> sides(n);

    for (std::size_t i = 0; i + 1 < n; ++i) {
        const LeftCounts left_of = left_counts(points, orient, i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const PairLine pl = pair_line(points[i].location, points[j].location,
                                          orient.offset(i), orient.offset(j));
            const Side left = pl.flipped ? Side::Negative : Side::Positive;
            const Side right = opposite(left);
            const std::size_t pair_b = (points[i].in_subpop ? 1 : 0) + (points[j].in_subpop ? 1 : 0);
            Counts base;
            const std::size_t la = left_of.a[j], lb = left_of.b[j];
            const std::size_t ra = n - 2 - la, rb = total_b - pair_b - lb;
            (left == Side::Positive ? base.pos_a : base.neg_a) = la;
            (left == Side::Positive ? base.pos_b : base.neg_b) = lb;
            (right == Side::Positive ? base.pos_a : base.neg_a) = ra;
            (right == Side::Positive ? base.pos_b : base.neg_b) = rb;

            bool sides_ready = false;
            for (const auto& [si, sj] : kPolarities) {
                Counts c = base;
                c.add(si, points[i].in_subpop);
                c.add(sj, points[j].in_subpop);
                if (!c.balanced()) continue;
                if (!sides_ready) {
                    for (std::size_t k = 0; k < n; ++k) {
                        if (k != i && k != j) sides[k] = orient(i, j, k) > 0 ? left : right;
                    }
                    sides_ready = true;
                }
                sides[i] = si;
                sides[j] = sj;
                if (!visit(realize(points, pl.line, i, j, sides, options.eps_on))) return;
            }
        }
    }
}

void require_nonempty(std::span<const PopulationPoint> points) {
    if (points.empty()) throw DomainError("cut requires at least one population point");
    for (const auto& p : points) {
        if (!is_finite(p.location)) throw DomainError("population point is not finite");
    }
}

}  // namespace

Point2 perturbation_direction(std::size_t k, std::uint64_t seed) {
    const double theta = kGoldenAngle + 1e-3 * static_cast<double>(seed % 1000);
    const double angle = std::fmod(static_cast<double>(k) * theta, 2.0 * M_PI);
    return {std::cos(angle), std::sin(angle)};
}

std::vector<Side> assign_sides(std::span<const PopulationPoint> points, const OrientedCut& cut,
                               double eps_on) {
    const double tol = on_line_tolerance(points, eps_on);
    for (const auto& [idx, side] : cut.on_line_assignment) {
        if (idx >= points.size()) throw DomainError("cut assigns a nonexistent point");
        if (side == Side::On) throw DomainError("on-line assignment must pick a side");
        if (std::abs(cut.line.evaluate(points[idx].location)) > tol) {
            throw DomainError("cut assigns point " + std::to_string(idx) +
                              " which is not on the line");
        }
    }
    std::vector<Side> sides(points.size());
    for (std::size_t k = 0; k < points.size(); ++k) {
        if (auto it = cut.on_line_assignment.find(k); it != cut.on_line_assignment.end()) {
            sides[k] = it->second;
            continue;
        }
        sides[k] = side_of(cut.line, points[k].location, eps_on);
        if (sides[k] == Side::On) {
            throw DomainError("point " + std::to_string(k) + " lies on the cut but has no assignment");
        }
    }
    return sides;
}

CutBalanceReport verify_cut(std::span<const PopulationPoint> points, const OrientedCut& cut,
                            double eps_on) {
    const std::vector<Side> sides = assign_sides(points, cut, eps_on);
    Counts c;
    for (std::size_t k = 0; k < points.size(); ++k) c.add(sides[k], points[k].in_subpop);
    return {c.pos_a, c.neg_a, c.pos_b, c.neg_b, c.balanced()};
}

OrientedCut find_cut(std::span<const PopulationPoint> points, const CutSolverOptions& options) {
    require_nonempty(points);
    if (points.size() == 1) return single_point_cut(points);
    std::optional<OrientedCut> found;
    scan_pairs(points, options, [&](OrientedCut cut) {
        found = std::move(cut);
        return false;
    });
    if (!found) {
        throw InvariantViolation("pancake cut search found no balanced line for " +
                                 std::to_string(points.size()) + " points");
    }
    return *found;
}

std::vector<OrientedCut> balanced_cuts(std::span<const PopulationPoint> points,
                                       const CutSolverOptions& options) {
    require_nonempty(points);
    if (points.size() == 1) return {single_point_cut(points)};
    std::vector<OrientedCut> out;
    scan_pairs(points, options, [&](OrientedCut cut) {
        out.push_back(std::move(cut));
        return true;
    });
    if (out.empty()) {
        throw InvariantViolation("pancake cut search found no balanced line for " +
                                 std::to_string(points.size()) + " points");
    }
    return out;
}

Bipartition induced_bipartition(std::span<const PopulationPoint> points, const OrientedCut& cut,
                                double eps_on) {
    const std::vector<Side> sides = assign_sides(points, cut, eps_on);
    Bipartition bp;
    bp.mask.resize(points.size());
    if (points.empty()) return bp;
    const Side first = sides[0];
    for (std::size_t k = 0; k < points.size(); ++k) bp.mask[k] = sides[k] != first;
    return bp;
}

std::vector<OrientedCut> oracle_find_all_cuts(std::span<const PopulationPoint> points,
                                              std::size_t cap, std::uint64_t seed) {
    require_nonempty(points);
    const std::size_t n = points.size();
    if (n > cap) {
        throw SizeError("oracle is capped at " + std::to_string(cap) + " points, got " +
                        std::to_string(n));
    }
    if (n == 1) return {single_point_cut(points)};

    // Explicitly displaced copies; the displacement is far below any
    // non-degenerate orientation gap of desk-scale inputs.
    const double delta = 1e-10 * coordinate_scale(points);
    std::vector<Point2> moved(n);
    std::vector<Point2> dirs(n);
    for (std::size_t k = 0; k < n; ++k) {
        dirs[k] = perturbation_direction(k, seed);
        moved[k] = points[k].location + delta * dirs[k];
    }

    std::vector<OrientedCut> out;
    std::set<Bipartition> seen;
    std::vector<Side> sides(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const Point2 d = moved[j] - moved[i];
            bool degenerate = false;
            for (std::size_t k = 0; k < n; ++k) {
                if (k == i || k == j) continue;
                const double o = cross(d, moved[k] - moved[i]);
                if (o == 0.0) degenerate = true;
                sides[k] = o > 0.0 ? Side::Positive : Side::Negative;
            }
            if (degenerate) continue;
            const PairLine pl =
                pair_line(points[i].location, points[j].location, dirs[i], dirs[j]);
            for (std::size_t k = 0; k < n; ++k) {
                if (pl.flipped && k != i && k != j) sides[k] = opposite(sides[k]);
            }
            for (const auto& [si, sj] : kPolarities) {
                sides[i] = si;
                sides[j] = sj;
                Counts c;
                for (std::size_t k = 0; k < n; ++k) c.add(sides[k], points[k].in_subpop);
                if (!c.balanced()) continue;
                OrientedCut cut = realize(points, pl.line, i, j, sides, 0.0);
                if (seen.insert(induced_bipartition(points, cut)).second) {
                    out.push_back(std::move(cut));
                }
            }
        }
    }
    if (out.empty()) throw InvariantViolation("oracle found no balanced cut");
    return out;
}

}  // namespace pancake
