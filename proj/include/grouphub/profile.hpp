#pragma once

#include "grouphub/data.hpp"
#include "grouphub/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace grouphub {

// Profile-likelihood quantities for a fixed labelling z.
struct ProfileQuantities {
    Matrix Ahat;                 // K x n, zero rows where counts == 0
    std::vector<std::size_t> counts;
    double logLik = 0.0;         // L_G(z)
};

struct PopulationQuantities {
    Matrix Abar;                 // K x n
    double logLikP = 0.0;        // L_P(z)
    Matrix P;                    // T x n, P(t, j) = A(z*_t, j)
};

// Bernoulli log-likelihood of a fixed labelling at membership matrix A:
// sum_t sum_j g log A + (1 - g) log(1 - A), with 0 log 0 = 0.
double labelled_log_likelihood(const GroupedData& data, const LabelAssignment& z, Variant variant,
                               const Matrix& A);

ProfileQuantities profile_mle(const GroupedData& data, const LabelAssignment& z, Variant variant,
                              std::size_t num_hubs);

// Population version with observations replaced by their conditional means
// under (trueA, zStar).
PopulationQuantities population_quantities(const Matrix& trueA, const LabelAssignment& zStar,
                                           const LabelAssignment& z, Variant variant);

struct ProfileSearchResult {
    LabelAssignment zHat;
    double logLik = 0.0;
    std::uint64_t evaluated = 0;
};

inline constexpr std::uint64_t kMaxProfileSearch = 10'000'000;

// Global maximiser of L_G(z) over labellings in which every group is
// assigned to a component it can belong to: under Asymmetric, a hub present
// in the group; under WithNull additionally the null label. Ties go to the
// lexicographically smallest labelling.
ProfileSearchResult exhaustive_profile_search(const GroupedData& data,
                                              const std::vector<std::size_t>& hubs, Variant variant,
                                              std::uint64_t limit = kMaxProfileSearch);

// Fraction of groups whose estimated label differs from the truth.
double mislabel_rate(const LabelAssignment& zStar, const LabelAssignment& zHat);

struct AssumptionConstants {
    double cMin = 0.5;
    double cMax = 2.0;
    double d = 0.4;
    double sMin = 1e-6;
    double sMax = 1.0;
    double v = 0.5;
    double c0 = 1.0;
};

struct AssumptionProfile {
    AssumptionConstants constants;
    Variant variant = Variant::Asymmetric;
    std::size_t T = 0, n = 0, numHubs = 0;
    std::vector<std::size_t> counts;  // t_{i*} per component row
    double sObservedMin = 0.0, sObservedMax = 0.0;
    std::size_t minVsetSize = 0;
    double tau = 0.0;
    double maxHubHubEntry = 0.0;
    bool H1 = false, H2 = false, H3 = false, H4 = false;
};

// Vsets[i] lists the preferred followers (0-based nodes) of hub i.
AssumptionProfile check_assumptions(const HubModelParams& trueParams, const LabelAssignment& zStar,
                                    const std::vector<std::vector<std::size_t>>& Vsets,
                                    const AssumptionConstants& constants);

}  // namespace grouphub
