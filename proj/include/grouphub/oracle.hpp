#pragma once

#include "grouphub/types.hpp"

#include <cstdint>
#include <vector>

namespace grouphub {

// Single-observation pmf over all 2^n outcomes. Node j (0-based) is bit j of
// the outcome index.
struct PmfTable {
    std::size_t n = 0;
    std::vector<double> probs;

    double sum() const;
};

inline constexpr std::size_t kMaxEnumerationNodes = 20;

// Probability-domain enumeration, independent of the log-domain likelihood.
PmfTable enumerate_pmf(const HubModelParams& params);

double tv_distance(const PmfTable& p, const PmfTable& q);

// Unpacks outcome index g into a 0/1 vector of length n.
std::vector<std::uint8_t> outcome_vector(std::uint64_t g, std::size_t n);

}  // namespace grouphub
