#include "grouphub/model.hpp"

#include "grouphub/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace grouphub {

double log_sum_exp(std::span<const double> x) {
    double m = kNegInf;
    for (double v : x) m = std::max(m, v);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double v : x) s += std::exp(v - m);
    return m + std::log(s);
}

namespace {

// log(p) and log(1-p) with log 0 = -inf.
inline double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }
inline double safe_log1m(double p) { return p < 1.0 ? std::log1p(-p) : kNegInf; }

void check_row(const HubModelParams& params, std::size_t row) {
    if (row >= params.num_components()) {
        std::ostringstream os;
        os << "component row " << row << " out of range (K = " << params.num_components() << ")";
        throw Error(ErrorCode::IndexOutOfRange, os.str());
    }
}

}  // namespace

double component_log_density(const HubModelParams& params, std::span<const std::uint8_t> group,
                             std::size_t row) {
    check_row(params, row);
    if (group.size() != params.n)
        throw Error(ErrorCode::DimensionMismatch, "group length does not match node count");
    const auto r = static_cast<Eigen::Index>(row);
    double s = 0.0;
    for (std::size_t j = 0; j < params.n; ++j) {
        const double a = params.A(r, static_cast<Eigen::Index>(j));
        if (group[j] != 0) {
            if (a == 0.0) return kNegInf;
            s += std::log(a);
        } else {
            if (a == 1.0) return kNegInf;
            s += std::log1p(-a);
        }
    }
    return s;
}

LogDensityCache::LogDensityCache(const HubModelParams& params)
    : n_(params.n),
      base_(params.num_components(), 0.0),
      delta_(static_cast<Eigen::Index>(params.num_components()), static_cast<Eigen::Index>(params.n)),
      required_(params.num_components()),
      keyed_by_node_(params.n),
      is_required_(Matrix::Zero(static_cast<Eigen::Index>(params.num_components()),
                                static_cast<Eigen::Index>(params.n))) {
    const auto K = static_cast<Eigen::Index>(params.num_components());
    const auto n = static_cast<Eigen::Index>(params.n);
    for (Eigen::Index k = 0; k < K; ++k) {
        double base = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double a = params.A(k, j);
            if (a == 1.0) {
                required_[k].push_back(static_cast<std::uint32_t>(j));
                is_required_(k, j) = 1.0;
                delta_(k, j) = 0.0;
            } else {
                const double l1m = safe_log1m(a);
                base += l1m;
                delta_(k, j) = safe_log(a) - l1m;
            }
        }
        base_[k] = base;
        if (required_[k].size() == 1)
            keyed_by_node_[required_[k].front()].push_back(static_cast<std::uint32_t>(k));
        else
            unkeyed_.push_back(static_cast<std::uint32_t>(k));
    }
}

void LogDensityCache::candidates(std::span<const std::uint32_t> members,
                                 std::vector<std::uint32_t>& out) const {
    out.clear();
    for (auto j : members)
        for (auto k : keyed_by_node_[j]) out.push_back(k);
    for (auto k : unkeyed_) {
        std::size_t present = 0;
        for (auto j : members) present += is_required_(k, j) != 0.0;
        if (present == required_[k].size()) out.push_back(k);
    }
    std::sort(out.begin(), out.end());
}

double LogDensityCache::log_density(std::span<const std::uint32_t> members, std::size_t row) const {
    const auto k = static_cast<Eigen::Index>(row);
    double s = base_[row];
    std::size_t present = 0;
    for (auto j : members) {
        s += delta_(k, j);
        present += is_required_(k, j) != 0.0;
    }
    return present == required_[row].size() ? s : kNegInf;
}

SparseLogTable component_density_table(const HubModelParams& params, const GroupedData& data,
                                       std::span<const std::uint8_t> active) {
    if (data.n() != params.n)
        throw Error(ErrorCode::DimensionMismatch, "data and params disagree on node count");
    const LogDensityCache cache(params);
    SparseLogTable table;
    table.K = params.num_components();
    table.offsets.reserve(data.T() + 1);
    table.offsets.push_back(0);
    std::vector<std::uint32_t> cand;
    for (std::size_t t = 0; t < data.T(); ++t) {
        auto members = data.members(t);
        cache.candidates(members, cand);
        for (auto k : cand) {
            if (!active.empty() && active[k] == 0) continue;
            const double d = cache.log_density(members, k);
            if (d == kNegInf) continue;
            table.cols.push_back(k);
            table.vals.push_back(d);
        }
        table.offsets.push_back(table.cols.size());
    }
    return table;
}

std::vector<double> group_log_likelihoods(const HubModelParams& params, const GroupedData& data) {
    if (data.n() != params.n)
        throw Error(ErrorCode::DimensionMismatch, "data and params disagree on node count");
    const auto table = component_density_table(params, data);
    std::vector<double> out(data.T());
    std::vector<double> terms;
    for (std::size_t t = 0; t < data.T(); ++t) {
        terms.clear();
        auto rows = table.rows(t);
        auto vals = table.values(t);
        for (std::size_t m = 0; m < rows.size(); ++m) {
            const double r = params.rho[rows[m]];
            if (r > 0.0) terms.push_back(std::log(r) + vals[m]);
        }
        out[t] = log_sum_exp(terms);
    }
    return out;
}

double log_likelihood(const HubModelParams& params, const GroupedData& data) {
    double s = 0.0;
    for (double v : group_log_likelihoods(params, data)) s += v;
    return s;
}

std::pair<GroupedData, LabelAssignment> generate(const HubModelParams& params, std::size_t T,
                                                 std::uint64_t seed) {
    params.validate(1e-9);
    Rng rng = make_stream(seed, {0x67656eULL});
    const std::size_t K = params.num_components();
    std::vector<double> cdf(K);
    double acc = 0.0;
    for (std::size_t k = 0; k < K; ++k) cdf[k] = (acc += params.rho[static_cast<Eigen::Index>(k)]);

    std::vector<std::uint8_t> values(T * params.n, 0);
    LabelAssignment labels;
    labels.z.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
        const double u = uniform01(rng) * acc;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), K - 1);
        labels.z[t] = row_to_label(k, params.variant);
        for (std::size_t j = 0; j < params.n; ++j) {
            const double a = params.A(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
            values[t * params.n + j] = uniform01(rng) < a ? 1 : 0;
        }
    }
    return {GroupedData(T, params.n, std::move(values)), std::move(labels)};
}

HubModelParams complete_data_mle(const GroupedData& data, const LabelAssignment& labels,
                                 Variant variant, const std::vector<std::size_t>& hubs) {
    if (labels.size() != data.T())
        throw Error(ErrorCode::DimensionMismatch, "label count does not match group count");
    validate_labels(labels, variant, hubs.size());
    HubModelParams p;
    p.variant = variant;
    p.n = data.n();
    p.hubs = hubs;
    const auto K = static_cast<Eigen::Index>(p.num_components());
    p.rho = Vector::Zero(K);
    p.A = Matrix::Zero(K, static_cast<Eigen::Index>(p.n));
    std::vector<double> counts(static_cast<std::size_t>(K), 0.0);
    for (std::size_t t = 0; t < data.T(); ++t) {
        const auto k = static_cast<Eigen::Index>(label_to_row(labels.z[t], variant));
        counts[static_cast<std::size_t>(k)] += 1.0;
        for (auto j : data.members(t)) p.A(k, j) += 1.0;
    }
    for (Eigen::Index k = 0; k < K; ++k) {
        const double c = counts[static_cast<std::size_t>(k)];
        p.rho[k] = c / static_cast<double>(data.T());
        if (c > 0.0) {
            p.A.row(k) /= c;
            if (auto h = p.hub_node(static_cast<std::size_t>(k))) p.A(k, static_cast<Eigen::Index>(*h)) = 1.0;
        }
    }
    return p;
}

}  // namespace grouphub
