#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <set>
#include <string>

#include "grouping_internal.hpp"
#include "pancake/districting.hpp"
#include "pancake/errors.hpp"

namespace pancake {

namespace {

using Mask = std::uint32_t;
using LeafSets = std::vector<Mask>;  // sorted

class OutcomeSearch {
public:
    explicit OutcomeSearch(std::span<const PopulationPoint> points) : points_(points) {}

    const std::set<LeafSets>& leaves(Mask mask, std::size_t depth) {
        const auto key = std::pair{mask, depth};
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        std::set<LeafSets> out;
        if (depth == 0) {
            out.insert({mask});
        } else {
            for (const auto& [s, t] : splits(mask)) {
                const auto& left = leaves(s, depth - 1);
                const auto& right = leaves(t, depth - 1);
                for (const auto& l : left) {
                    for (const auto& r : right) {
                        LeafSets merged;
                        std::merge(l.begin(), l.end(), r.begin(), r.end(), std::back_inserter(merged));
                        out.insert(std::move(merged));
                    }
                }
            }
        }
        return memo_.emplace(key, std::move(out)).first->second;
    }

private:
    // Unordered balanced splits of the points in mask, one per distinct
    // bipartition the oracle finds.
    std::set<std::pair<Mask, Mask>> splits(Mask mask) {
        if (std::popcount(mask) <= 1) return {{mask, Mask{0}}};
        std::vector<std::size_t> members;
        std::vector<PopulationPoint> local;
        for (std::size_t k = 0; k < points_.size(); ++k) {
            if (mask & (Mask{1} << k)) {
                members.push_back(k);
                local.push_back(points_[k]);
            }
        }
        std::set<std::pair<Mask, Mask>> out;
        for (const auto& cut : oracle_find_all_cuts(local)) {
            const Bipartition bp = induced_bipartition(local, cut);
            Mask side = 0;
            for (std::size_t k = 0; k < members.size(); ++k) {
                if (bp.mask[k]) side |= Mask{1} << members[k];
            }
            out.insert(std::minmax(side, static_cast<Mask>(mask ^ side)));
        }
        return out;
    }

    std::span<const PopulationPoint> points_;
    std::map<std::pair<Mask, std::size_t>, std::set<LeafSets>> memo_;
};

}  // namespace

std::vector<Outcome> enumerate_outcomes(const SimplePolygon& region,
                                        std::span<const PopulationPoint> points, std::size_t n,
                                        std::size_t depth) {
    if (points.size() > kEnumerationPointCap) {
        throw SizeError("outcome enumeration is capped at " + std::to_string(kEnumerationPointCap) +
                        " points, got " + std::to_string(points.size()));
    }
    if (depth > 3 || (std::size_t{1} << depth) > kEnumerationLeafCap) {
        throw SizeError("outcome enumeration is capped at " + std::to_string(kEnumerationLeafCap) +
                        " cells, got depth " + std::to_string(depth));
    }
    const std::size_t leaf_count = std::size_t{1} << depth;
    group_sizes(leaf_count, n);
    const double tol = 1e-9 * region.bbox().diameter();
    for (std::size_t k = 0; k < points.size(); ++k) {
        if (!is_finite(points[k].location) || !region.contains(points[k].location, tol)) {
            throw DomainError("population point " + std::to_string(k) + " lies outside the region");
        }
    }

    OutcomeSearch search(points);
    const Mask all = points.empty() ? 0 : static_cast<Mask>((std::uint64_t{1} << points.size()) - 1);
    std::set<std::vector<Mask>> partitions;
    for (const LeafSets& cells : search.leaves(all, depth)) {
        detail::for_each_grouping(leaf_count, n, [&](const detail::Grouping& groups) {
            std::vector<Mask> districts;
            for (const auto& g : groups) {
                Mask m = 0;
                for (std::size_t l : g) m |= cells[l];
                districts.push_back(m);
            }
            std::sort(districts.begin(), districts.end());
            partitions.insert(std::move(districts));
            return true;
        });
    }

    std::vector<Outcome> out;
    for (const auto& districts : partitions) {
        Outcome outcome;
        for (Mask m : districts) {
            std::vector<std::size_t> idx;
            for (std::size_t k = 0; k < points.size(); ++k) {
                if (m & (Mask{1} << k)) idx.push_back(k);
            }
            outcome.push_back(std::move(idx));
        }
        std::sort(outcome.begin(), outcome.end());
        out.push_back(std::move(outcome));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t count_outcomes(const SimplePolygon& region, std::span<const PopulationPoint> points,
                           std::size_t n, std::size_t depth) {
    return enumerate_outcomes(region, points, n, depth).size();
}

}  // namespace pancake
