#pragma once

#include "grouphub/data.hpp"
#include "grouphub/em.hpp"
#include "grouphub/penalized.hpp"
#include "grouphub/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace grouphub {

struct ScenarioSpec {
    Variant variant = Variant::Asymmetric;
    std::size_t nL = 10;
    std::size_t n = 100;
    std::size_t T = 500;
    double alpha = 1.0;   // sparsity scale in (0, 1]
    double rho0 = 0.2;    // null weight, WithNull only
    std::size_t M = 0;    // potential-set size; 0 for estimation experiments
    std::uint64_t seed = 42;

    void validate(bool selection = false) const;
};

struct Scenario {
    HubModelParams params;
    std::vector<std::vector<std::size_t>> Vsets;  // preferred followers per hub, 0-based
};

// Hubs are nodes 0..nL-1; followers nL..n-1 are split into nL contiguous
// blocks, the first (n - nL) % nL blocks one larger.
Scenario build_scenario(const ScenarioSpec& spec);

// Root mean square difference over every free entry: all component rows and
// columns except the fixed hub diagonal.
double rmse(const Matrix& Ahat, const Matrix& Atrue, const std::vector<std::size_t>& hubs, Variant variant);

// Same entries, but each row's mean squared error is weighted by the true
// mixing weight rho_k (equivalently, errors pooled over groups).
double rmse_weighted(const Matrix& Ahat, const Matrix& Atrue, const Vector& rho,
                     const std::vector<std::size_t>& hubs, Variant variant);

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& x);

struct ReplicateSummary {
    ScenarioSpec spec;
    std::size_t R = 0;
    MeanSe mislabel, rmse, rmseStar;
    MeanSe rmseWeighted, rmseStarWeighted;
    // Per-replicate values in replicate order, for paired comparisons.
    std::vector<double> mislabels, rmses, rmseStars, rmsesWeighted, rmseStarsWeighted;
};

// Replicate r draws its scenario, data and fit seeds from streams
// (seed, r, 0), (seed, r, 1) and (seed, r, 2). The data stream is shared
// across T, so cells that differ only in T are paired.
ReplicateSummary run_estimation_replicates(const ScenarioSpec& spec, std::size_t R, std::uint64_t seed,
                                           const FitConfig& fit = {});

struct SelectionSummary {
    ScenarioSpec spec;
    std::size_t R = 0;
    std::vector<double> lambdaGrid;
    MeanSe aicTPR, aicFPR, bicTPR, bicFPR;
    std::vector<double> aicLambda, bicLambda;  // chosen lambda per replicate
    std::vector<RateResult> aicRates, bicRates;
};

// Fixed lambda grid used by the selection table.
std::vector<double> default_selection_grid();

// True hubs 0..nL-1 inside the potential set 0..M-1.
SelectionSummary run_selection_replicates(const ScenarioSpec& spec, const std::vector<double>& lambdaGrid,
                                          std::size_t R, std::uint64_t seed, const PathConfig& config);

struct SparsityRow {
    double alpha = 0.0;
    ReplicateSummary summary;
    double ratio = 0.0;  // mean RMSE / mean RMSE*
};

std::vector<SparsityRow> run_sparsity_sweep(const ScenarioSpec& base, const std::vector<double>& alphas,
                                            std::size_t R, std::uint64_t seed, const FitConfig& fit = {});

struct BootstrapTable {
    std::vector<double> lambdas;
    std::vector<std::size_t> nodes;  // potential set, 0-based
    Matrix proportions;              // lambdas x nodes
    std::size_t B = 0;
};

// Resample b draws T group indices with replacement from stream (seed, b)
// and fits the whole lambda path on the resample.
BootstrapTable bootstrap_stability(const GroupedData& data, const std::vector<std::size_t>& potentialSet,
                                   const std::vector<double>& lambdaGrid, std::size_t B, std::uint64_t seed,
                                   const PathConfig& config);

// Plot-ready tables.
std::string estimation_csv(const std::vector<ReplicateSummary>& rows);
std::string selection_csv(const std::vector<SelectionSummary>& rows);
std::string sparsity_csv(const std::vector<SparsityRow>& rows);
std::string bootstrap_csv(const BootstrapTable& table);

// FNV-1a of a canonical description; used in provenance blocks.
std::uint64_t config_hash(const std::string& canonical);

}  // namespace grouphub
