#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace pancake::detail {

using Grouping = std::vector<std::vector<std::size_t>>;

// Every grouping of `leaves` cells into n groups of sizes floor/ceil of
// leaves/n, groups ordered by their smallest leaf. The visitor returns
// false to stop.
void for_each_grouping(std::size_t leaves, std::size_t n,
                       const std::function<bool(const Grouping&)>& visit);

}  // namespace pancake::detail
