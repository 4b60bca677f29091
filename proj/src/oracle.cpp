#include "grouphub/oracle.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

namespace grouphub {

double PmfTable::sum() const {
    return std::accumulate(probs.begin(), probs.end(), 0.0);
}

std::vector<std::uint8_t> outcome_vector(std::uint64_t g, std::size_t n) {
    std::vector<std::uint8_t> v(n);
    for (std::size_t j = 0; j < n; ++j) v[j] = static_cast<std::uint8_t>((g >> j) & 1U);
    return v;
}

PmfTable enumerate_pmf(const HubModelParams& params) {
    if (params.n > kMaxEnumerationNodes) {
        std::ostringstream os;
        os << "n too large for enumeration (n = " << params.n << ", limit " << kMaxEnumerationNodes
           << ")";
        throw Error(ErrorCode::NTooLarge, os.str());
    }
    params.validate(1e-9);
    PmfTable table;
    table.n = params.n;
    const std::uint64_t outcomes = std::uint64_t{1} << params.n;
    table.probs.assign(outcomes, 0.0);
    const auto K = static_cast<Eigen::Index>(params.num_components());
    for (std::uint64_t g = 0; g < outcomes; ++g) {
        double total = 0.0;
        for (Eigen::Index k = 0; k < K; ++k) {
            double p = params.rho[k];
            for (std::size_t j = 0; j < params.n && p != 0.0; ++j) {
                const double a = params.A(k, static_cast<Eigen::Index>(j));
                p *= ((g >> j) & 1U) ? a : 1.0 - a;
            }
            total += p;
        }
        table.probs[g] = total;
    }
    return table;
}

double tv_distance(const PmfTable& p, const PmfTable& q) {
    if (p.n != q.n || p.probs.size() != q.probs.size())
        throw Error(ErrorCode::DimensionMismatch, "pmf tables have different node counts");
    double s = 0.0;
    for (std::size_t g = 0; g < p.probs.size(); ++g) s += std::abs(p.probs[g] - q.probs[g]);
    return 0.5 * s;
}

}  // namespace grouphub
