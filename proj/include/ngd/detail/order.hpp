#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Core>

namespace ngd::detail {

/// Indices sorted by value ascending; equal values keep index order.
inline std::vector<Eigen::Index> ascending_order(const Eigen::VectorXd& v) {
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(v.size()));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return v[a] < v[b]; });
    return idx;
}

}  // namespace ngd::detail
