#pragma once

#include "grouphub/data.hpp"
#include "grouphub/em.hpp"
#include "grouphub/model.hpp"
#include "grouphub/types.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace grouphub {

// Log penalty on the hub mixing weights; rho_0 (null) is never penalised.
struct PenaltyConfig {
    double lambda = 0.0;
    double epsilon = 1e-8;
    double zeroThreshold = 1e-6;  // rho_k below this snaps to exactly 0

    void validate() const;
};

// T * lambda * sum_{k >= 1} [log(eps + rho_k) - log eps]
double penalty_term(const Vector& rho, const PenaltyConfig& penalty, std::size_t T);

double penalized_loglik(const HubModelParams& params, const GroupedData& data,
                        const PenaltyConfig& penalty);

// The rho subproblem for fixed A: maximise
//   sum_t log sum_k rho_k exp(logdens(t, k)) - T lambda sum_{k>=1} [log(eps + rho_k) - log eps]
// over the probability simplex.
class RhoObjective {
public:
    RhoObjective(const SparseLogTable& logDensity, const PenaltyConfig& penalty);

    std::size_t K() const { return K_; }
    std::size_t T() const { return T_; }

    double value(const Vector& rho) const;
    // Gradient with respect to unconstrained rho (valid for rho > 0).
    Vector gradient(const Vector& rho) const;
    // Hessian of value() with respect to unconstrained rho.
    Matrix hessian(const Vector& rho) const;

    // Norm of the simplex-projected gradient of value()/T: spread of the
    // gradient over the support plus positive excess off the support.
    double stationarity(const Vector& rho) const;

    // Responsibility mass S_k = sum_t rho_k w_tk / sum_l rho_l w_tl.
    Vector responsibility_mass(const Vector& rho) const;

    // value() and responsibility_mass() from a single pass.
    double value_and_mass(const Vector& rho, Vector& S) const;

private:
    std::size_t K_ = 0, T_ = 0;
    PenaltyConfig penalty_;
    double offset_ = 0.0;  // sum_t max_k logdens(t, k)
    std::vector<std::size_t> offsets_;
    std::vector<std::uint32_t> cols_;
    std::vector<double> w_;  // exp(logdens - row max)
};

struct RhoSolution {
    Vector rho;
    double objective = 0.0;
    double initialObjective = 0.0;
    double stationarity = 0.0;
    std::size_t iterations = 0;
};

// Dense entry point: `logDensity` is T x (M+1) with -inf for infeasible cells.
RhoSolution solve_rho_subproblem(const Matrix& logDensity, const PenaltyConfig& penalty,
                                 const Vector& rhoInit);

RhoSolution solve_rho_subproblem(const SparseLogTable& logDensity, const PenaltyConfig& penalty,
                                 const Vector& rhoInit);

struct SparseFit {
    HubModelParams params;               // WithNull over the potential set
    std::vector<std::size_t> selectedSet;  // 0-based nodes with rho != 0
    double lambda = 0.0;
    double penalizedObjective = 0.0;
    double logLik = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::size_t restartIndex = 0;
    std::vector<double> trace;  // penalised objective after each outer iteration
};

// Algorithm 1 from a given start. Components whose weight reaches 0 stay
// frozen for the rest of the run.
SparseFit run_modified_em(const GroupedData& data, HubModelParams start, const PenaltyConfig& penalty,
                          const FitConfig& config);

SparseFit modified_em(const GroupedData& data, const std::vector<std::size_t>& potentialSet,
                      const PenaltyConfig& penalty, const FitConfig& config);

struct Criteria {
    double k = 0.0;
    double AIC = 0.0;
    double BIC = 0.0;
};

using DofFunction = std::function<double(std::size_t selected, std::size_t n)>;

// |V|(n - 1) + n + |V| free parameters.
double default_dof(std::size_t selected, std::size_t n);

Criteria information_criteria(const SparseFit& fit, const GroupedData& data,
                              const DofFunction& dof = default_dof);

struct PathEntry {
    double lambda = 0.0;
    SparseFit fit;
    Criteria criteria;
};

struct SelectionPath {
    std::vector<PathEntry> entries;
    std::size_t chosenByAIC = 0;
    std::size_t chosenByBIC = 0;

    // Lambdas at which the selected set grew relative to the previous lambda.
    std::vector<double> nestedness_violations() const;
};

struct PathConfig {
    FitConfig fit;
    PenaltyConfig penalty;           // lambda overridden per grid point
    // Fresh random starts for every lambda after the first (the first uses
    // fit.numRestarts); the previous lambda's solution is always added as a
    // warm start.
    std::size_t freshRestarts = 20;
    DofFunction dof = default_dof;
};

SelectionPath lambda_path(const GroupedData& data, const std::vector<std::size_t>& potentialSet,
                          const std::vector<double>& lambdaGrid, const PathConfig& config);

// Smallest lambda on a doubling sequence from `start` at which the selected
// set is empty.
double find_extinction_lambda(const GroupedData& data, const std::vector<std::size_t>& potentialSet,
                              const PathConfig& config, double start = 1e-3);

// `points` log-spaced values on [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t points);

// start:step:end inclusive (within half a step of end).
std::vector<double> parse_lambda_grid(const std::string& spec);

struct RateResult {
    double TPR = 0.0;
    double FPR = 0.0;
};

RateResult tpr_fpr(const std::vector<std::size_t>& trueSet, const std::vector<std::size_t>& selectedSet,
                   std::size_t M);

}  // namespace grouphub
