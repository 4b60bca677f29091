#include "grouphub/identifiability.hpp"

#include <algorithm>

namespace grouphub {

IdentifiabilityReport check_identifiability(
    const HubModelParams& params,
    const std::optional<std::vector<std::size_t>>& pure_follower_candidates) {
    params.validate(1e-9);
    IdentifiabilityReport report;
    const std::size_t K = params.num_components();
    const std::size_t first = params.first_hub_row();

    std::vector<bool> is_hub(params.n, false);
    for (auto h : params.hubs) is_hub[h] = true;
    std::vector<std::size_t> followers;
    for (std::size_t j = 0; j < params.n; ++j)
        if (!is_hub[j]) followers.push_back(j);

    auto node_id = [&](std::size_t row) -> std::size_t {
        auto h = params.hub_node(row);
        return h ? *h + 1 : 0;
    };
    auto a = [&](std::size_t row, std::size_t j) {
        return params.A(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(j));
    };

    // (i) no off-diagonal entry (or null entry) equal to 1
    for (std::size_t r = 0; r < K; ++r) {
        const auto h = params.hub_node(r);
        for (std::size_t j = 0; j < params.n; ++j) {
            if (h && *h == j) continue;
            if (a(r, j) >= 1.0) report.condIViolations.emplace_back(node_id(r), j + 1);
        }
    }
    report.condI = report.condIViolations.empty();

    // (ii) hub rows pairwise distinct on follower columns
    for (std::size_t r = first; r < K; ++r)
        for (std::size_t s = r + 1; s < K; ++s) {
            const bool identical = std::all_of(followers.begin(), followers.end(),
                                               [&](std::size_t j) { return a(r, j) == a(s, j); });
            if (identical) report.condIIViolations.emplace_back(node_id(r), node_id(s));
        }
    report.condII = report.condIIViolations.empty();

    // (iii) each hub row differs from pi on at least two followers
    if (params.has_null()) {
        for (std::size_t r = first; r < K; ++r) {
            const auto differing = std::count_if(followers.begin(), followers.end(),
                                                 [&](std::size_t j) { return a(r, j) != a(0, j); });
            if (differing < 2) report.condIIIViolations.push_back(node_id(r));
        }
        report.condIII = report.condIIIViolations.empty();
    }

    // (iv') a follower-only node whose null probability differs from every hub row
    if (pure_follower_candidates && params.has_null()) {
        report.condIVprime = false;
        for (auto k : *pure_follower_candidates) {
            if (k >= params.n || is_hub[k]) continue;
            bool separates = true;
            for (std::size_t r = first; r < K && separates; ++r) separates = a(r, k) != a(0, k);
            if (separates) {
                report.condIVprime = true;
                report.condIVprimeWitness = k + 1;
                break;
            }
        }
    }
    return report;
}

}  // namespace grouphub
