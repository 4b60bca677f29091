#pragma once

#include "grouphub/data.hpp"
#include "grouphub/model.hpp"
#include "grouphub/types.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace grouphub {

struct FitConfig {
    std::size_t maxIter = 1000;
    double relTol = 1e-8;           // on |dL| / (1 + |L|)
    std::size_t numRestarts = 20;
    std::uint64_t seed = 42;
    double probFloor = 1e-10;       // off-diagonal A kept in [floor, 1 - floor]
    std::size_t threads = 0;        // 0 = default_threads()
    // Adds one data-driven start after the random ones: moment_start(), or
    // its heavy-null form in the penalized fit.
    bool momentStart = true;

    void validate() const;
};

// Responsibilities h(t, k); rows sum to one, infeasible components are 0.
struct PosteriorMatrix {
    Matrix h;
};

struct FitResult {
    HubModelParams params;
    PosteriorMatrix posterior;
    double logLik = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::size_t restartIndex = 0;
    std::vector<double> trace;  // log-likelihood after every E-step
};

// Sparse responsibilities over the components that are feasible for each
// group; same layout as SparseLogTable.
using SparsePosterior = SparseLogTable;

HubModelParams init_params(const std::vector<std::size_t>& hubs, Variant variant, std::size_t n,
                           std::uint64_t seed);

// Data-driven start: each hub row is the column mean of the groups that
// contain the hub, with weights proportional to those group counts; the
// null row uses groups without any hub (all groups if there are none).
// Off-diagonal entries are kept in [0.01, 0.99].
HubModelParams moment_start(const GroupedData& data, const std::vector<std::size_t>& hubs, Variant variant);

PosteriorMatrix e_step(const HubModelParams& params, const GroupedData& data);

// E-step on the sparse support; returns the log-likelihood at `params`.
double e_step_sparse(const HubModelParams& params, const GroupedData& data, SparsePosterior& out);

HubModelParams m_step(const GroupedData& data, const PosteriorMatrix& posterior, Variant variant,
                      const std::vector<std::size_t>& hubs, double probFloor = 1e-10);

// Updates A (and rho, when update_rho) of `params` in place from sparse
// responsibilities. Rows whose total responsibility is 0 become zero rows
// (unit hub diagonal kept) with rho 0, or are left untouched when
// keep_idle_rows is set.
void m_step_sparse(const GroupedData& data, const SparsePosterior& h, double probFloor,
                   HubModelParams& params, bool update_rho = true, bool keep_idle_rows = false);

// One EM run from the given start.
FitResult run_em(const GroupedData& data, HubModelParams start, const FitConfig& config);

FitResult fit_em(const GroupedData& data, const std::vector<std::size_t>& hubs, Variant variant,
                 const FitConfig& config);

LabelAssignment map_labels(const PosteriorMatrix& posterior, Variant variant);

PosteriorMatrix densify(const SparsePosterior& h);

// Relative change used by every stopping rule.
inline double relative_change(double prev, double next) {
    return std::abs(next - prev) / (1.0 + std::abs(next));
}

}  // namespace grouphub
