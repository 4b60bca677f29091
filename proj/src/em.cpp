#include "grouphub/em.hpp"

#include "grouphub/parallel.hpp"
#include "grouphub/rng.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

namespace grouphub {

void FitConfig::validate() const {
    if (maxIter < 1) throw Error(ErrorCode::InvalidConfig, "maxIter must be at least 1");
    if (!(relTol > 0.0 && relTol < 1.0)) throw Error(ErrorCode::InvalidConfig, "relTol must lie in (0, 1)");
    if (numRestarts < 1) throw Error(ErrorCode::InvalidConfig, "numRestarts must be at least 1");
    if (!(probFloor > 0.0 && probFloor <= 1e-3))
        throw Error(ErrorCode::InvalidConfig, "probFloor must lie in (0, 1e-3]");
}

HubModelParams init_params(const std::vector<std::size_t>& hubs, Variant variant, std::size_t n,
                           std::uint64_t seed) {
    if (hubs.size() >= n) throw Error(ErrorCode::InvalidParams, "hub set must be smaller than node set");
    Rng rng = make_stream(seed, {0x696e6974ULL});
    HubModelParams p;
    p.variant = variant;
    p.n = n;
    p.hubs = hubs;
    const auto K = static_cast<Eigen::Index>(p.num_components());
    p.rho.resize(K);
    double total = 0.0;
    for (Eigen::Index k = 0; k < K; ++k) total += (p.rho[k] = exponential1(rng));
    p.rho /= total;
    p.A.resize(K, static_cast<Eigen::Index>(n));
    for (Eigen::Index k = 0; k < K; ++k)
        for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j) p.A(k, j) = uniform(rng, 0.1, 0.9);
    for (std::size_t r = p.first_hub_row(); r < p.num_components(); ++r)
        p.A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(*p.hub_node(r))) = 1.0;
    return p;
}

HubModelParams moment_start(const GroupedData& data, const std::vector<std::size_t>& hubs, Variant variant) {
    if (hubs.size() >= data.n()) throw Error(ErrorCode::InvalidParams, "hub set must be smaller than node set");
    HubModelParams p;
    p.variant = variant;
    p.n = data.n();
    p.hubs = hubs;
    const auto K = static_cast<Eigen::Index>(p.num_components());
    const auto n = static_cast<Eigen::Index>(p.n);
    const std::size_t first = p.first_hub_row();
    std::vector<Eigen::Index> row_of(p.n, -1);
    for (std::size_t i = 0; i < hubs.size(); ++i) row_of[hubs[i]] = static_cast<Eigen::Index>(first + i);

    Matrix sums = Matrix::Zero(K, n);
    Vector counts = Vector::Zero(K);
    Vector all = Vector::Zero(n);
    for (std::size_t t = 0; t < data.T(); ++t) {
        auto members = data.members(t);
        bool hubless = true;
        for (auto j : members) {
            all[j] += 1.0;
            if (const auto r = row_of[j]; r >= 0) {
                hubless = false;
                counts[r] += 1.0;
                for (auto m : members) sums(r, m) += 1.0;
            }
        }
        if (first && hubless) {
            counts[0] += 1.0;
            for (auto m : members) sums(0, m) += 1.0;
        }
    }
    p.A.resize(K, n);
    for (Eigen::Index k = 0; k < K; ++k) {
        if (counts[k] > 0.0)
            p.A.row(k) = sums.row(k) / counts[k];
        else
            p.A.row(k) = all.transpose() / static_cast<double>(std::max<std::size_t>(data.T(), 1));
        for (Eigen::Index j = 0; j < n; ++j) p.A(k, j) = std::clamp(p.A(k, j), 0.01, 0.99);
    }
    for (std::size_t r = first; r < p.num_components(); ++r)
        p.A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(*p.hub_node(r))) = 1.0;
    p.rho = (counts.array() + 1.0).matrix();
    p.rho /= p.rho.sum();
    return p;
}

double e_step_sparse(const HubModelParams& params, const GroupedData& data, SparsePosterior& out) {
    if (data.n() != params.n)
        throw Error(ErrorCode::DimensionMismatch, "data and params disagree on node count");
    const LogDensityCache cache(params);
    const std::size_t K = params.num_components();
    std::vector<double> log_rho(K);
    for (std::size_t k = 0; k < K; ++k) {
        const double r = params.rho[static_cast<Eigen::Index>(k)];
        log_rho[k] = r > 0.0 ? std::log(r) : kNegInf;
    }
    out.K = K;
    out.offsets.assign(1, 0);
    out.offsets.reserve(data.T() + 1);
    out.cols.clear();
    out.vals.clear();
    std::vector<std::uint32_t> cand;
    double loglik = 0.0;
    for (std::size_t t = 0; t < data.T(); ++t) {
        auto members = data.members(t);
        cache.candidates(members, cand);
        const std::size_t start = out.cols.size();
        double m = kNegInf;
        for (auto k : cand) {
            if (log_rho[k] == kNegInf) continue;
            const double v = log_rho[k] + cache.log_density(members, k);
            if (v == kNegInf) continue;
            out.cols.push_back(k);
            out.vals.push_back(v);
            m = std::max(m, v);
        }
        if (out.cols.size() == start) {
            std::ostringstream os;
            os << "group " << t + 1 << " has zero probability under every component";
            throw Error(ErrorCode::ZeroProbabilityGroup, os.str());
        }
        double s = 0.0;
        for (std::size_t i = start; i < out.vals.size(); ++i) s += (out.vals[i] = std::exp(out.vals[i] - m));
        for (std::size_t i = start; i < out.vals.size(); ++i) out.vals[i] /= s;
        loglik += m + std::log(s);
        out.offsets.push_back(out.cols.size());
    }
    return loglik;
}

PosteriorMatrix densify(const SparsePosterior& h) {
    PosteriorMatrix post;
    post.h = Matrix::Zero(static_cast<Eigen::Index>(h.T()), static_cast<Eigen::Index>(h.K));
    for (std::size_t t = 0; t < h.T(); ++t) {
        auto rows = h.rows(t);
        auto vals = h.values(t);
        for (std::size_t m = 0; m < rows.size(); ++m)
            post.h(static_cast<Eigen::Index>(t), rows[m]) = vals[m];
    }
    return post;
}

PosteriorMatrix e_step(const HubModelParams& params, const GroupedData& data) {
    SparsePosterior h;
    e_step_sparse(params, data, h);
    return densify(h);
}

namespace {

// Shared M-step core: weights(t) yields (row, h) pairs for group t.
template <class Weights>
void m_step_core(const GroupedData& data, Weights&& weights, double probFloor, HubModelParams& params,
                 bool update_rho, bool keep_idle_rows) {
    const auto K = static_cast<Eigen::Index>(params.num_components());
    const auto n = static_cast<Eigen::Index>(params.n);
    Matrix num = Matrix::Zero(K, n);
    std::vector<double> mass(static_cast<std::size_t>(K), 0.0);
    for (std::size_t t = 0; t < data.T(); ++t) {
        auto members = data.members(t);
        weights(t, [&](std::size_t k, double w) {
            mass[k] += w;
            auto row = num.row(static_cast<Eigen::Index>(k));
            for (auto j : members) row[j] += w;
        });
    }
    bool any_hub_active = false;
    for (std::size_t r = params.first_hub_row(); r < params.num_components(); ++r)
        any_hub_active = any_hub_active || mass[r] > 0.0;

    const double lo = probFloor, hi = 1.0 - probFloor;
    for (Eigen::Index k = 0; k < K; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        const auto hub = params.hub_node(kk);
        if (mass[kk] > 0.0) {
            params.A.row(k) = num.row(k) / mass[kk];
            // The pure null model is fitted by exact column means, which can
            // never make an observed group infeasible.
            const bool clamp = hub.has_value() || any_hub_active;
            if (clamp)
                for (Eigen::Index j = 0; j < n; ++j) params.A(k, j) = std::clamp(params.A(k, j), lo, hi);
        } else if (keep_idle_rows) {
            continue;
        } else {
            params.A.row(k).setZero();
        }
        if (hub) params.A(k, static_cast<Eigen::Index>(*hub)) = 1.0;
        if (update_rho) params.rho[k] = mass[kk] / static_cast<double>(data.T());
    }
}

}  // namespace

void m_step_sparse(const GroupedData& data, const SparsePosterior& h, double probFloor,
                   HubModelParams& params, bool update_rho, bool keep_idle_rows) {
    if (h.T() != data.T() || h.K != params.num_components())
        throw Error(ErrorCode::DimensionMismatch, "posterior shape does not match data/params");
    m_step_core(
        data,
        [&](std::size_t t, auto&& emit) {
            auto rows = h.rows(t);
            auto vals = h.values(t);
            for (std::size_t m = 0; m < rows.size(); ++m)
                if (vals[m] > 0.0) emit(rows[m], vals[m]);
        },
        probFloor, params, update_rho, keep_idle_rows);
}

HubModelParams m_step(const GroupedData& data, const PosteriorMatrix& posterior, Variant variant,
                      const std::vector<std::size_t>& hubs, double probFloor) {
    HubModelParams p;
    p.variant = variant;
    p.n = data.n();
    p.hubs = hubs;
    const auto K = static_cast<Eigen::Index>(p.num_components());
    if (posterior.h.rows() != static_cast<Eigen::Index>(data.T()) || posterior.h.cols() != K)
        throw Error(ErrorCode::DimensionMismatch, "posterior shape does not match data/hub set");
    p.rho = Vector::Zero(K);
    p.A = Matrix::Zero(K, static_cast<Eigen::Index>(p.n));
    m_step_core(
        data,
        [&](std::size_t t, auto&& emit) {
            for (Eigen::Index k = 0; k < K; ++k) {
                const double w = posterior.h(static_cast<Eigen::Index>(t), k);
                if (w > 0.0) emit(static_cast<std::size_t>(k), w);
            }
        },
        probFloor, p, true, false);
    return p;
}

FitResult run_em(const GroupedData& data, HubModelParams start, const FitConfig& config) {
    FitResult res;
    res.params = std::move(start);
    SparsePosterior h;
    double ll = e_step_sparse(res.params, data, h);
    res.trace.push_back(ll);
    for (std::size_t it = 0; it < config.maxIter; ++it) {
        m_step_sparse(data, h, config.probFloor, res.params);
        const double next = e_step_sparse(res.params, data, h);
        res.trace.push_back(next);
        ++res.iterations;
        const double change = relative_change(ll, next);
        ll = next;
        if (change <= config.relTol) {
            res.converged = true;
            break;
        }
    }
    res.logLik = ll;
    res.posterior = densify(h);
    return res;
}

FitResult fit_em(const GroupedData& data, const std::vector<std::size_t>& hubs, Variant variant,
                 const FitConfig& config) {
    config.validate();
    require_valid(data, variant);
    if (hubs.size() >= data.n())
        throw Error(ErrorCode::InvalidParams, "hub set must be smaller than node set");
    for (auto hnode : hubs)
        if (hnode >= data.n()) throw Error(ErrorCode::IndexOutOfRange, "hub index out of range");

    const std::size_t total = config.numRestarts + (config.momentStart ? 1 : 0);
    std::vector<std::optional<FitResult>> runs(total);
    parallel_for(total, config.threads, [&](std::size_t r) {
        auto start = r < config.numRestarts ? init_params(hubs, variant, data.n(), make_stream(config.seed, {r})())
                                            : moment_start(data, hubs, variant);
        try {
            runs[r] = run_em(data, std::move(start), config);
            runs[r]->restartIndex = r;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ZeroProbabilityGroup) throw;
        }
    });
    std::optional<std::size_t> best;
    for (std::size_t r = 0; r < runs.size(); ++r)
        if (runs[r] && (!best || runs[r]->logLik > runs[*best]->logLik)) best = r;
    if (!best)
        throw Error(ErrorCode::AllRestartsFailed,
                    "every restart hit a group with zero probability under the model");
    return std::move(*runs[*best]);
}

LabelAssignment map_labels(const PosteriorMatrix& posterior, Variant variant) {
    LabelAssignment labels;
    labels.z.resize(static_cast<std::size_t>(posterior.h.rows()));
    for (Eigen::Index t = 0; t < posterior.h.rows(); ++t) {
        Eigen::Index best = 0;
        for (Eigen::Index k = 1; k < posterior.h.cols(); ++k)
            if (posterior.h(t, k) > posterior.h(t, best)) best = k;
        labels.z[static_cast<std::size_t>(t)] = row_to_label(static_cast<std::size_t>(best), variant);
    }
    return labels;
}

}  // namespace grouphub
