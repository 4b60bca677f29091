#include "grouphub/profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace grouphub {

namespace {

// x log(p) with the 0 log 0 = 0 convention.
inline double xlogy(double x, double p) {
    if (x == 0.0) return 0.0;
    return x * (p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity());
}

// Profile contribution of one component from its sufficient statistics.
double component_profile(const double* ones, std::size_t n, double count) {
    if (count == 0.0) return 0.0;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double c = ones[j];
        const double a = c / count;
        s += xlogy(c, a) + xlogy(count - c, 1.0 - a);
    }
    return s;
}

}  // namespace

double labelled_log_likelihood(const GroupedData& data, const LabelAssignment& z, Variant variant,
                               const Matrix& A) {
    if (z.size() != data.T() || static_cast<std::size_t>(A.cols()) != data.n())
        throw Error(ErrorCode::DimensionMismatch, "labels/A do not match data");
    double s = 0.0;
    for (std::size_t t = 0; t < data.T(); ++t) {
        const auto k = static_cast<Eigen::Index>(label_to_row(z.z[t], variant));
        if (k >= A.rows()) throw Error(ErrorCode::IndexOutOfRange, "label outside A rows");
        for (std::size_t j = 0; j < data.n(); ++j) {
            const double g = data(t, j);
            const double a = A(k, static_cast<Eigen::Index>(j));
            s += xlogy(g, a) + xlogy(1.0 - g, 1.0 - a);
        }
    }
    return s;
}

ProfileQuantities profile_mle(const GroupedData& data, const LabelAssignment& z, Variant variant,
                              std::size_t num_hubs) {
    if (z.size() != data.T()) throw Error(ErrorCode::DimensionMismatch, "label count does not match data");
    validate_labels(z, variant, num_hubs);
    const std::size_t K = num_hubs + (variant == Variant::WithNull ? 1 : 0);
    ProfileQuantities q;
    q.counts.assign(K, 0);
    Matrix ones = Matrix::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(data.n()));
    for (std::size_t t = 0; t < data.T(); ++t) {
        const auto k = label_to_row(z.z[t], variant);
        ++q.counts[k];
        for (auto j : data.members(t)) ones(static_cast<Eigen::Index>(k), j) += 1.0;
    }
    q.Ahat = Matrix::Zero(ones.rows(), ones.cols());
    q.logLik = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        if (q.counts[k] == 0) continue;
        q.Ahat.row(kk) = ones.row(kk) / static_cast<double>(q.counts[k]);
        q.logLik += component_profile(ones.row(kk).data(), data.n(), static_cast<double>(q.counts[k]));
    }
    return q;
}

PopulationQuantities population_quantities(const Matrix& trueA, const LabelAssignment& zStar,
                                           const LabelAssignment& z, Variant variant) {
    if (zStar.size() != z.size()) throw Error(ErrorCode::DimensionMismatch, "label vectors differ in length");
    const auto T = static_cast<Eigen::Index>(z.size());
    const auto n = trueA.cols();
    const auto K = trueA.rows();
    PopulationQuantities q;
    q.P.resize(T, n);
    q.Abar = Matrix::Zero(K, n);
    std::vector<double> counts(static_cast<std::size_t>(K), 0.0);
    for (Eigen::Index t = 0; t < T; ++t) {
        const auto ks = static_cast<Eigen::Index>(label_to_row(zStar.z[static_cast<std::size_t>(t)], variant));
        const auto k = static_cast<Eigen::Index>(label_to_row(z.z[static_cast<std::size_t>(t)], variant));
        if (ks < 0 || ks >= K || k < 0 || k >= K)
            throw Error(ErrorCode::IndexOutOfRange, "label not covered by trueA");
        q.P.row(t) = trueA.row(ks);
        q.Abar.row(k) += q.P.row(t);
        counts[static_cast<std::size_t>(k)] += 1.0;
    }
    for (Eigen::Index k = 0; k < K; ++k)
        if (counts[static_cast<std::size_t>(k)] > 0.0) q.Abar.row(k) /= counts[static_cast<std::size_t>(k)];
    q.logLikP = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
        const auto k = static_cast<Eigen::Index>(label_to_row(z.z[static_cast<std::size_t>(t)], variant));
        for (Eigen::Index j = 0; j < n; ++j) {
            const double p = q.P(t, j);
            const double a = q.Abar(k, j);
            q.logLikP += xlogy(p, a) + xlogy(1.0 - p, 1.0 - a);
        }
    }
    return q;
}

ProfileSearchResult exhaustive_profile_search(const GroupedData& data,
                                              const std::vector<std::size_t>& hubs, Variant variant,
                                              std::uint64_t limit) {
    const std::size_t T = data.T(), n = data.n();
    const std::size_t K = hubs.size() + (variant == Variant::WithNull ? 1 : 0);
    std::vector<std::size_t> hub_row(n, K);
    for (std::size_t i = 0; i < hubs.size(); ++i) {
        if (hubs[i] >= n) throw Error(ErrorCode::IndexOutOfRange, "hub index out of range");
        hub_row[hubs[i]] = i + (variant == Variant::WithNull ? 1 : 0);
    }

    // Candidate component rows per group, ascending (= ascending labels).
    std::vector<std::vector<std::size_t>> cand(T);
    double space = 1.0;
    for (std::size_t t = 0; t < T; ++t) {
        if (variant == Variant::WithNull) cand[t].push_back(0);
        for (auto j : data.members(t))
            if (hub_row[j] < K) cand[t].push_back(hub_row[j]);
        std::sort(cand[t].begin(), cand[t].end());
        if (cand[t].empty()) {
            std::ostringstream os;
            os << "group " << t + 1 << " contains no hub and cannot be labelled";
            throw Error(ErrorCode::ZeroProbabilityGroup, os.str());
        }
        space *= static_cast<double>(cand[t].size());
    }
    if (space > static_cast<double>(limit)) {
        std::ostringstream os;
        os << "profile search space has " << space << " labellings (limit " << limit << ")";
        throw Error(ErrorCode::SearchSpaceTooLarge, os.str());
    }

    std::vector<std::size_t> pos(T, 0);
    Matrix ones = Matrix::Zero(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(n));
    std::vector<double> counts(K, 0.0), contrib(K, 0.0);
    auto apply = [&](std::size_t t, std::size_t k, double sign) {
        counts[k] += sign;
        for (auto j : data.members(t)) ones(static_cast<Eigen::Index>(k), j) += sign;
    };
    auto refresh = [&](std::size_t k) {
        contrib[k] = component_profile(ones.row(static_cast<Eigen::Index>(k)).data(), n, counts[k]);
    };
    for (std::size_t t = 0; t < T; ++t) apply(t, cand[t][0], 1.0);
    for (std::size_t k = 0; k < K; ++k) refresh(k);

    ProfileSearchResult best;
    best.logLik = -std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_pos;
    std::vector<char> dirty(K, 0);
    for (;;) {
        double total = 0.0;
        for (double c : contrib) total += c;
        ++best.evaluated;
        if (total > best.logLik + 1e-12 * (1.0 + std::abs(best.logLik)) || best_pos.empty()) {
            best.logLik = total;
            best_pos = pos;
        }
        // odometer: last group varies fastest, giving lexicographic order
        std::size_t t = T;
        while (t > 0) {
            --t;
            const std::size_t old_k = cand[t][pos[t]];
            apply(t, old_k, -1.0);
            dirty[old_k] = 1;
            if (++pos[t] < cand[t].size()) {
                apply(t, cand[t][pos[t]], 1.0);
                dirty[cand[t][pos[t]]] = 1;
                break;
            }
            pos[t] = 0;
            apply(t, cand[t][0], 1.0);
            dirty[cand[t][0]] = 1;
            if (t == 0) {
                t = T;  // wrapped around: done
                break;
            }
        }
        if (t == T) break;
        for (std::size_t k = 0; k < K; ++k)
            if (dirty[k]) {
                refresh(k);
                dirty[k] = 0;
            }
    }
    best.zHat.z.resize(T);
    for (std::size_t t = 0; t < T; ++t) best.zHat.z[t] = row_to_label(cand[t][best_pos[t]], variant);
    return best;
}

double mislabel_rate(const LabelAssignment& zStar, const LabelAssignment& zHat) {
    if (zStar.size() != zHat.size())
        throw Error(ErrorCode::DimensionMismatch, "label vectors differ in length");
    if (zStar.size() == 0) return 0.0;
    std::size_t wrong = 0;
    for (std::size_t t = 0; t < zStar.size(); ++t) wrong += zStar.z[t] != zHat.z[t];
    return static_cast<double>(wrong) / static_cast<double>(zStar.size());
}

AssumptionProfile check_assumptions(const HubModelParams& trueParams, const LabelAssignment& zStar,
                                    const std::vector<std::vector<std::size_t>>& Vsets,
                                    const AssumptionConstants& c) {
    trueParams.validate(1e-9);
    validate_labels(zStar, trueParams.variant, trueParams.num_hubs());
    if (Vsets.size() != trueParams.num_hubs())
        throw Error(ErrorCode::DimensionMismatch, "need one preference set per hub");
    AssumptionProfile prof;
    prof.constants = c;
    prof.variant = trueParams.variant;
    prof.T = zStar.size();
    prof.n = trueParams.n;
    prof.numHubs = trueParams.num_hubs();
    const std::size_t K = trueParams.num_components();
    const std::size_t first = trueParams.first_hub_row();
    const double nL = static_cast<double>(prof.numHubs);
    const double T = static_cast<double>(prof.T);
    auto a = [&](std::size_t r, std::size_t j) {
        return trueParams.A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j));
    };

    // H1: component sizes (starred version includes the null row)
    prof.counts.assign(K, 0);
    for (int l : zStar.z) ++prof.counts[label_to_row(l, trueParams.variant)];
    prof.H1 = true;
    for (std::size_t r = 0; r < K; ++r) {
        const double t = static_cast<double>(prof.counts[r]);
        if (t < T * c.cMin / nL || t > T * c.cMax / nL) prof.H1 = false;
    }

    // H2: scaled off-diagonal entries
    prof.sObservedMin = std::numeric_limits<double>::infinity();
    prof.sObservedMax = -std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < K; ++r) {
        const auto h = trueParams.hub_node(r);
        for (std::size_t j = 0; j < trueParams.n; ++j) {
            if (h && *h == j) continue;
            const double s = a(r, j) / c.d;
            prof.sObservedMin = std::min(prof.sObservedMin, s);
            prof.sObservedMax = std::max(prof.sObservedMax, s);
        }
    }
    prof.H2 = prof.sObservedMin >= c.sMin && prof.sObservedMax <= c.sMax;

    // H3: preference sets large enough and separated by tau > 0
    std::vector<bool> is_hub(trueParams.n, false);
    for (auto h : trueParams.hubs) is_hub[h] = true;
    prof.minVsetSize = std::numeric_limits<std::size_t>::max();
    prof.tau = std::numeric_limits<double>::infinity();
    bool sizes_ok = true;
    for (std::size_t i = 0; i < prof.numHubs; ++i) {
        const std::size_t r = i + first;
        prof.minVsetSize = std::min(prof.minVsetSize, Vsets[i].size());
        if (static_cast<double>(Vsets[i].size()) < c.v * static_cast<double>(trueParams.n) / nL) sizes_ok = false;
        for (auto j : Vsets[i]) {
            if (j >= trueParams.n || is_hub[j])
                throw Error(ErrorCode::IndexOutOfRange, "preference sets must contain followers only");
            for (std::size_t r2 = 0; r2 < K; ++r2) {
                if (r2 == r) continue;
                prof.tau = std::min(prof.tau, (a(r, j) - a(r2, j)) / c.d);
            }
        }
    }
    if (prof.numHubs == 0) prof.minVsetSize = 0;
    prof.H3 = sizes_ok && prof.tau > 0.0;

    // H4: small hub-to-hub entries
    prof.maxHubHubEntry = 0.0;
    for (std::size_t r = 0; r < K; ++r) {
        const auto h = trueParams.hub_node(r);
        for (auto hj : trueParams.hubs) {
            if (h && *h == hj) continue;
            prof.maxHubHubEntry = std::max(prof.maxHubHubEntry, a(r, hj));
        }
    }
    prof.H4 = prof.maxHubHubEntry <= c.c0 / nL;
    return prof;
}

}  // namespace grouphub
