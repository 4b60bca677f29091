#pragma once

#include "grouphub/types.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace grouphub {

// All node ids in the report are 1-based; 0 stands for the null row.
struct IdentifiabilityReport {
    bool condI = true;
    std::vector<std::pair<std::size_t, std::size_t>> condIViolations;  // (row node, column node)

    bool condII = true;
    std::vector<std::pair<std::size_t, std::size_t>> condIIViolations;  // hub pairs

    // Only meaningful with a null component.
    std::optional<bool> condIII;
    std::vector<std::size_t> condIIIViolations;

    // Evaluated only when follower-only candidates are supplied.
    std::optional<bool> condIVprime;
    std::optional<std::size_t> condIVprimeWitness;

    bool all_pass() const {
        return condI && condII && condIII.value_or(true) && condIVprime.value_or(true);
    }
};

// `pure_follower_candidates` are 0-based node ids that may only act as
// followers (checked against condition iv').
IdentifiabilityReport check_identifiability(
    const HubModelParams& params,
    const std::optional<std::vector<std::size_t>>& pure_follower_candidates = std::nullopt);

}  // namespace grouphub
