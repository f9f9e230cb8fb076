#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <tuple>

#include "pancake/districting.hpp"
#include "pancake/errors.hpp"
#include "grouping_internal.hpp"

namespace pancake {

namespace {

double relative_deviation(std::span<const std::size_t> counts, std::size_t total) {
    if (total == 0) return 0.0;
    const double mean = static_cast<double>(total) / static_cast<double>(counts.size());
    double worst = 0.0;
    for (std::size_t c : counts) worst = std::max(worst, std::abs(static_cast<double>(c) - mean));
    return worst / mean;
}

constexpr std::size_t kGreedyStarts = 16;

void check_district_count(std::size_t leaves, std::size_t n) {
    if (n == 0 || n > leaves) {
        throw DomainError("need 1 <= n <= 2^i, got n = " + std::to_string(n) + " with " +
                          std::to_string(leaves) + " cells");
    }
}

void check_groups(const BisectionTree& tree, const std::vector<std::vector<std::size_t>>& groups) {
    const std::size_t leaves = tree.leaf_count();
    check_district_count(leaves, groups.size());
    std::vector<std::size_t> sizes;
    std::vector<bool> seen(leaves, false);
    for (const auto& g : groups) {
        sizes.push_back(g.size());
        for (std::size_t l : g) {
            if (l >= leaves || seen[l]) {
                throw DomainError("groups do not partition the " + std::to_string(leaves) + " cells");
            }
            seen[l] = true;
        }
    }
    if (std::count(seen.begin(), seen.end(), false) != 0) {
        throw DomainError("groups leave some cells unassigned");
    }
    std::sort(sizes.rbegin(), sizes.rend());
    if (sizes != group_sizes(leaves, groups.size())) {
        throw DomainError("group sizes are not all floor(2^i/n) or ceil(2^i/n)");
    }
}

// Connectivity and balance of candidate groupings, with a per-group cache.
class PlanScorer {
public:
    PlanScorer(const BisectionTree& tree, const CellAdjacencyGraph& graph)
        : tree_(tree), piece_neighbours_(graph.pieces.size()) {
        for (const auto& [p, q] : graph.piece_edges) {
            piece_neighbours_[p].push_back(q);
            piece_neighbours_[q].push_back(p);
        }
        leaf_pieces_.resize(graph.leaf_count);
        for (std::size_t p = 0; p < graph.pieces.size(); ++p) {
            leaf_pieces_[graph.pieces[p].leaf].push_back(p);
        }
    }

    bool connected(std::vector<std::size_t> group) {
        std::sort(group.begin(), group.end());
        auto it = cache_.find(group);
        if (it != cache_.end()) return it->second;
        std::set<std::size_t> members;
        for (std::size_t l : group) members.insert(leaf_pieces_[l].begin(), leaf_pieces_[l].end());
        bool ok = false;
        if (!members.empty()) {
            std::set<std::size_t> reached{*members.begin()};
            std::vector<std::size_t> stack{*members.begin()};
            while (!stack.empty()) {
                const std::size_t p = stack.back();
                stack.pop_back();
                for (std::size_t q : piece_neighbours_[p]) {
                    if (members.count(q) && reached.insert(q).second) stack.push_back(q);
                }
            }
            ok = reached.size() == members.size();
        }
        if (cache_.size() > kCacheLimit) cache_.clear();
        cache_.emplace(std::move(group), ok);
        return ok;
    }

    // (disconnected districts, worst relative deviation over A and B)
    std::pair<std::size_t, double> score(const std::vector<std::vector<std::size_t>>& groups) {
        std::size_t broken = 0;
        std::vector<std::size_t> a, b;
        for (const auto& g : groups) {
            broken += connected(g) ? 0 : 1;
            std::size_t ca = 0, cb = 0;
            for (std::size_t l : g) {
                ca += tree_.leaf(l).a_count;
                cb += tree_.leaf(l).b_count;
            }
            a.push_back(ca);
            b.push_back(cb);
        }
        return {broken, std::max(relative_deviation(a, tree_.population_size),
                                 relative_deviation(b, tree_.subpop_size))};
    }

private:
    static constexpr std::size_t kCacheLimit = 200000;
    const BisectionTree& tree_;
    std::vector<std::vector<std::size_t>> piece_neighbours_;
    std::vector<std::vector<std::size_t>> leaf_pieces_;
    std::map<std::vector<std::size_t>, bool> cache_;
};

std::vector<std::vector<std::size_t>> index_order(std::size_t leaves, std::size_t n) {
    std::vector<std::vector<std::size_t>> groups;
    std::size_t next = 0;
    for (std::size_t s : group_sizes(leaves, n)) {
        groups.emplace_back();
        for (std::size_t k = 0; k < s; ++k) groups.back().push_back(next++);
    }
    return groups;
}

// Region growing: each district starts at the lowest free leaf (the first
// at `first_seed`) and absorbs the lowest-numbered free neighbour.
std::vector<std::vector<std::size_t>> contiguity_greedy(const CellAdjacencyGraph& graph,
                                                        std::size_t n, std::size_t first_seed = 0) {
    const auto nbrs = graph.neighbours();
    std::vector<bool> taken(graph.leaf_count, false);
    std::vector<std::vector<std::size_t>> groups;
    for (std::size_t s : group_sizes(graph.leaf_count, n)) {
        std::vector<std::size_t> group;
        std::set<std::size_t> frontier;
        auto take = [&](std::size_t l) {
            taken[l] = true;
            group.push_back(l);
            for (std::size_t m : nbrs[l]) {
                if (!taken[m]) frontier.insert(m);
            }
        };
        if (groups.empty()) take(first_seed);
        while (group.size() < s) {
            while (!frontier.empty() && taken[*frontier.begin()]) frontier.erase(frontier.begin());
            if (!frontier.empty()) {
                take(*frontier.begin());
            } else {
                take(static_cast<std::size_t>(std::find(taken.begin(), taken.end(), false) -
                                              taken.begin()));
            }
        }
        std::sort(group.begin(), group.end());
        groups.push_back(std::move(group));
    }
    return groups;
}

// Pairwise leaf swaps between districts, first improvement, until stable.
void local_search(std::vector<std::vector<std::size_t>>& groups, PlanScorer& scorer,
                  const std::function<bool(std::pair<std::size_t, double>)>& good_enough) {
    auto best = scorer.score(groups);
    for (int pass = 0; pass < 50 && !good_enough(best); ++pass) {
        bool improved = false;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            for (std::size_t h = g + 1; h < groups.size(); ++h) {
                for (std::size_t x = 0; x < groups[g].size(); ++x) {
                    for (std::size_t y = 0; y < groups[h].size(); ++y) {
                        std::swap(groups[g][x], groups[h][y]);
                        const auto s = scorer.score(groups);
                        if (s < best) {
                            best = s;
                            improved = true;
                        } else {
                            std::swap(groups[g][x], groups[h][y]);
                        }
                    }
                }
            }
        }
        if (!improved) break;
    }
    for (auto& g : groups) std::sort(g.begin(), g.end());
}

}  // namespace

namespace detail {

void for_each_grouping(std::size_t leaves, std::size_t n,
                       const std::function<bool(const std::vector<std::vector<std::size_t>>&)>& visit) {
    const std::size_t q = leaves / n, r = leaves % n;
    std::vector<std::vector<std::size_t>> groups;
    bool stop = false;
    std::function<void(std::size_t, std::size_t)> place = [&](std::size_t leaf, std::size_t big) {
        if (stop) return;
        if (leaf == leaves) {
            if (groups.size() == n && big == r) stop = !visit(groups);
            return;
        }
        std::size_t missing = (n - groups.size()) * q + (r - big);
        for (const auto& g : groups) missing += g.size() < q ? q - g.size() : 0;
        if (missing > leaves - leaf) return;
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const bool grows_big = groups[g].size() == q;
            if (groups[g].size() > q || (grows_big && big == r)) continue;
            groups[g].push_back(leaf);
            place(leaf + 1, big + (grows_big ? 1 : 0));
            groups[g].pop_back();
            if (stop) return;
        }
        if (groups.size() < n) {
            groups.push_back({leaf});
            place(leaf + 1, big + (q == 0 ? 1 : 0));
            groups.pop_back();
        }
    };
    place(0, 0);
}

}  // namespace detail

using detail::for_each_grouping;

double Dyadic::value() const { return std::ldexp(static_cast<double>(numerator), -static_cast<int>(exponent)); }

Dyadic dyadic_approx(double x, unsigned i) {
    if (!std::isfinite(x)) throw DomainError("dyadic_approx needs a finite value");
    if (i > 62) throw DomainError("dyadic exponent above 62");
    const double scaled = std::floor(std::ldexp(x, static_cast<int>(i)));
    if (std::abs(scaled) >= 9.2e18) throw DomainError("dyadic numerator overflows 64 bits");
    return {static_cast<std::int64_t>(scaled), i};
}

const char* to_string(GroupingStrategy strategy) {
    switch (strategy) {
        case GroupingStrategy::IndexOrder: return "index";
        case GroupingStrategy::ContiguityGreedy: return "greedy";
        case GroupingStrategy::ExhaustiveBest: return "exhaustive";
    }
    return "?";
}

GroupingStrategy parse_grouping_strategy(const std::string& name) {
    if (name == "index") return GroupingStrategy::IndexOrder;
    if (name == "greedy") return GroupingStrategy::ContiguityGreedy;
    if (name == "exhaustive") return GroupingStrategy::ExhaustiveBest;
    throw DomainError("unknown grouping strategy '" + name + "' (index, greedy, exhaustive)");
}

std::vector<std::size_t> group_sizes(std::size_t leaves, std::size_t n) {
    check_district_count(leaves, n);
    std::vector<std::size_t> sizes(n, leaves / n);
    for (std::size_t k = 0; k < leaves % n; ++k) ++sizes[k];
    return sizes;
}

double grouping_count(std::size_t leaves, std::size_t n) {
    check_district_count(leaves, n);
    const std::size_t q = leaves / n, r = leaves % n;
    auto lfact = [](std::size_t v) { return std::lgamma(static_cast<double>(v) + 1.0); };
    const double log_count = lfact(leaves) - static_cast<double>(r) * lfact(q + 1) -
                             static_cast<double>(n - r) * lfact(q) - lfact(r) - lfact(n - r);
    return std::round(std::exp(log_count));
}

std::vector<std::size_t> DistrictPlan::district_points(const BisectionTree& tree,
                                                       std::size_t d) const {
    std::vector<std::size_t> out;
    for (std::size_t l : groups.at(d)) {
        const auto& pts = tree.leaf(l).point_indices;
        out.insert(out.end(), pts.begin(), pts.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

DistrictPlan make_plan(const BisectionTree& tree, std::vector<std::vector<std::size_t>> groups) {
    check_groups(tree, groups);
    DistrictPlan plan;
    plan.depth = tree.depth;
    for (auto& g : groups) {
        std::sort(g.begin(), g.end());
        std::size_t a = 0, b = 0;
        for (std::size_t l : g) {
            a += tree.leaf(l).a_count;
            b += tree.leaf(l).b_count;
        }
        plan.a_counts.push_back(a);
        plan.b_counts.push_back(b);
    }
    plan.groups = std::move(groups);
    plan.a_deviation = relative_deviation(plan.a_counts, tree.population_size);
    plan.b_deviation = relative_deviation(plan.b_counts, tree.subpop_size);
    return plan;
}

DistrictPlan group_cells(const BisectionTree& tree, std::size_t n, GroupingStrategy strategy) {
    const std::size_t leaves = tree.leaf_count();
    check_district_count(leaves, n);
    if (strategy == GroupingStrategy::IndexOrder) return make_plan(tree, index_order(leaves, n));

    const CellAdjacencyGraph graph = build_adjacency(tree);
    auto groups = contiguity_greedy(graph, n);
    if (strategy == GroupingStrategy::ContiguityGreedy) return make_plan(tree, std::move(groups));

    PlanScorer scorer(tree, graph);
    if (grouping_count(leaves, n) <= kExhaustiveLimit) {
        auto best = scorer.score(groups);
        for_each_grouping(leaves, n, [&](const auto& candidate) {
            const auto s = scorer.score(candidate);
            if (s < best) {
                best = s;
                groups = candidate;
            }
            return true;
        });
    } else {
        local_search(groups, scorer, [](auto) { return false; });
    }
    return make_plan(tree, std::move(groups));
}

PlanAudit audit_plan(const BisectionTree& tree, const DistrictPlan& plan,
                     std::span<const PopulationPoint> points) {
    if (points.size() != tree.population_size) {
        throw DomainError("plan was built for " + std::to_string(tree.population_size) +
                          " points, audit got " + std::to_string(points.size()));
    }
    if (plan.depth != tree.depth) throw DomainError("plan depth does not match the tree");
    check_groups(tree, plan.groups);
    if (plan.a_counts.size() != plan.size() || plan.b_counts.size() != plan.size()) {
        throw DomainError("plan counts do not match its groups");
    }

    const std::size_t n = plan.size();
    const std::size_t leaves = tree.leaf_count();
    std::vector<std::size_t> owner(points.size(), SIZE_MAX);
    PlanAudit audit;
    audit.a_counts.assign(n, 0);
    audit.b_counts.assign(n, 0);
    for (std::size_t d = 0; d < n; ++d) {
        for (std::size_t l : plan.groups[d]) {
            for (std::size_t idx : tree.leaf(l).point_indices) {
                if (idx >= points.size() || owner[idx] != SIZE_MAX) {
                    throw DomainError("population point " + std::to_string(idx) +
                                      " is not in exactly one cell");
                }
                owner[idx] = d;
                ++audit.a_counts[d];
                audit.b_counts[d] += points[idx].in_subpop ? 1 : 0;
            }
        }
    }
    if (std::count(owner.begin(), owner.end(), SIZE_MAX) != 0) {
        throw DomainError("some population points are in no cell");
    }
    if (audit.a_counts != plan.a_counts || audit.b_counts != plan.b_counts) {
        throw DomainError("plan counts disagree with the recount");
    }

    const double slack = static_cast<double>((leaves + n - 1) / n);
    auto population = [&](const std::vector<std::size_t>& counts) {
        PopulationDeviation dev;
        dev.total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
        dev.mean = static_cast<double>(dev.total) / static_cast<double>(n);
        for (std::size_t c : counts) {
            dev.max_abs = std::max(dev.max_abs, std::abs(static_cast<double>(c) - dev.mean));
        }
        dev.max_rel = dev.total == 0 ? 0.0 : dev.max_abs / dev.mean;
        dev.bound = static_cast<double>(dev.total) / static_cast<double>(leaves) + slack;
        dev.within_bound = dev.max_abs <= dev.bound;
        return dev;
    };
    audit.a = population(audit.a_counts);
    audit.b = population(audit.b_counts);

    std::vector<std::size_t> sizes;
    for (const auto& g : plan.groups) sizes.push_back(g.size());
    std::sort(sizes.rbegin(), sizes.rend());
    audit.sizes_ok = sizes == group_sizes(leaves, n);

    const CellAdjacencyGraph graph = build_adjacency(tree);
    for (const auto& g : plan.groups) audit.shapes.push_back(district_shape(tree, graph, g));
    return audit;
}

std::optional<ContiguityResult> contiguous_min_depth(const SimplePolygon& region,
                                                     std::span<const PopulationPoint> points,
                                                     std::size_t n, double deviation_cap,
                                                     std::size_t i_max, const BisectOptions& options) {
    if (n == 0) throw DomainError("need at least one district");
    std::size_t i_min = 0;
    while ((std::size_t{1} << i_min) < n) ++i_min;
    if (i_min > i_max) return std::nullopt;

    const BisectionTree full = recursive_bisect(region, points, i_max, options);
    auto feasible = [&](std::pair<std::size_t, double> s) {
        return s.first == 0 && s.second <= deviation_cap;
    };
    for (std::size_t i = i_min; i <= i_max; ++i) {
        const BisectionTree tree = full.truncated(i);
        const CellAdjacencyGraph graph = build_adjacency(tree);
        PlanScorer scorer(tree, graph);
        const std::size_t leaves = tree.leaf_count();
        std::optional<std::vector<std::vector<std::size_t>>> found;
        if (grouping_count(leaves, n) <= kExhaustiveLimit) {
            for_each_grouping(leaves, n, [&](const auto& candidate) {
                if (!feasible(scorer.score(candidate))) return true;
                found = candidate;
                return false;
            });
        } else {
            for (std::size_t seed = 0; seed < std::min<std::size_t>(leaves, kGreedyStarts); ++seed) {
                auto groups = contiguity_greedy(graph, n, seed);
                local_search(groups, scorer, feasible);
                if (feasible(scorer.score(groups))) {
                    found = std::move(groups);
                    break;
                }
            }
        }
        if (found) return ContiguityResult{i, make_plan(tree, std::move(*found))};
    }
    return std::nullopt;
}

}  // namespace pancake
