#pragma once

#include "grouphub/data.hpp"
#include "grouphub/types.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <utility>

namespace grouphub {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log of sum(exp(x)); -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> x);

// sum_j [g_j log A_ij + (1 - g_j) log(1 - A_ij)] with 0 log 0 = 0.
// `row` is a component row index (see types.hpp).
double component_log_density(const HubModelParams& params, std::span<const std::uint8_t> group,
                             std::size_t row);

// Precomputed per-component terms for fast evaluation on sparse groups:
// log P(g | k) = base_k + sum_{j in g} delta_kj, provided every node with
// A_kj = 1 is present in g (otherwise -inf).
class LogDensityCache {
public:
    explicit LogDensityCache(const HubModelParams& params);

    std::size_t num_components() const { return base_.size(); }

    // Component rows that can have nonzero probability for some group that
    // contains exactly `members`. Rows whose forced nodes are absent are
    // skipped; the returned list is ascending.
    void candidates(std::span<const std::uint32_t> members, std::vector<std::uint32_t>& out) const;

    double log_density(std::span<const std::uint32_t> members, std::size_t row) const;

private:
    std::size_t n_ = 0;
    std::vector<double> base_;
    Matrix delta_;
    std::vector<std::vector<std::uint32_t>> required_;  // nodes with A_kj == 1
    // rows indexed by node: components whose only forced node is that node
    std::vector<std::vector<std::uint32_t>> keyed_by_node_;
    std::vector<std::uint32_t> unkeyed_;  // rows with zero or several forced nodes
    Matrix is_required_;
};

// Sparse T x K table of log(rho_k) + log P(g_t | k) restricted to feasible,
// positive-weight components. `rows(t)` lists component rows, `values(t)`
// the matching log terms.
struct SparseLogTable {
    std::size_t K = 0;
    std::vector<std::size_t> offsets;
    std::vector<std::uint32_t> cols;
    std::vector<double> vals;

    std::size_t T() const { return offsets.empty() ? 0 : offsets.size() - 1; }
    std::span<const std::uint32_t> rows(std::size_t t) const {
        return {cols.data() + offsets[t], offsets[t + 1] - offsets[t]};
    }
    std::span<const double> values(std::size_t t) const {
        return {vals.data() + offsets[t], offsets[t + 1] - offsets[t]};
    }
};

// Component log densities (without log rho) for every group, keeping only
// components with finite density. Components listed in `active` (nonempty)
// restrict the support; an empty `active` means all components.
SparseLogTable component_density_table(const HubModelParams& params, const GroupedData& data,
                                       std::span<const std::uint8_t> active = {});

double log_likelihood(const HubModelParams& params, const GroupedData& data);

// Per-group log-likelihood contributions.
std::vector<double> group_log_likelihoods(const HubModelParams& params, const GroupedData& data);

// Draw T groups; labels returned are the truth z*.
std::pair<GroupedData, LabelAssignment> generate(const HubModelParams& params, std::size_t T,
                                                 std::uint64_t seed);

// Maximum likelihood estimates when hub labels are observed.
HubModelParams complete_data_mle(const GroupedData& data, const LabelAssignment& labels,
                                 Variant variant, const std::vector<std::size_t>& hubs);

}  // namespace grouphub
