#include "grouphub/types.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace grouphub {

const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::NonBinaryEntry: return "NonBinaryEntry";
        case ErrorCode::EmptyGroupInfeasible: return "EmptyGroupInfeasible";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::InvalidParams: return "InvalidParams";
        case ErrorCode::NTooLarge: return "NTooLarge";
        case ErrorCode::ZeroProbabilityGroup: return "ZeroProbabilityGroup";
        case ErrorCode::AllRestartsFailed: return "AllRestartsFailed";
        case ErrorCode::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
        case ErrorCode::NonFiniteObjective: return "NonFiniteObjective";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::EmptyTrueSet: return "EmptyTrueSet";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::Io: return "Io";
        case ErrorCode::Parse: return "Parse";
    }
    return "Unknown";
}

const char* to_string(Variant v) {
    return v == Variant::WithNull ? "with_null" : "asymmetric";
}

Variant parse_variant(const std::string& s) {
    if (s == "asymmetric") return Variant::Asymmetric;
    if (s == "with_null") return Variant::WithNull;
    throw Error(ErrorCode::Parse, "unknown variant '" + s + "' (expected asymmetric or with_null)");
}

void HubModelParams::validate(double sum_tol) const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidParams, msg); };
    const std::size_t K = num_components();
    if (n < 2) fail("node count must be at least 2");
    if (hubs.size() >= n) fail("hub set must be smaller than node set");
    if (K == 0) fail("model has no components");
    if (static_cast<std::size_t>(rho.size()) != K) fail("rho length does not match component count");
    if (static_cast<std::size_t>(A.rows()) != K || static_cast<std::size_t>(A.cols()) != n)
        fail("A has wrong shape");
    std::set<std::size_t> seen;
    for (auto h : hubs) {
        if (h >= n) fail("hub index out of range");
        if (!seen.insert(h).second) fail("hub set contains duplicates");
    }
    double sum = 0.0;
    for (Eigen::Index k = 0; k < rho.size(); ++k) {
        if (!(rho[k] >= 0.0 && rho[k] <= 1.0)) fail("rho entries must lie in [0,1]");
        sum += rho[k];
    }
    if (std::abs(sum - 1.0) > sum_tol) {
        std::ostringstream os;
        os << "rho sums to " << sum << ", not 1";
        fail(os.str());
    }
    for (Eigen::Index k = 0; k < A.rows(); ++k)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            if (!(A(k, j) >= 0.0 && A(k, j) <= 1.0)) fail("A entries must lie in [0,1]");
    for (std::size_t r = first_hub_row(); r < K; ++r)
        if (A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(*hub_node(r))) != 1.0)
            fail("hub diagonal entries must equal 1");
}

void validate_labels(const LabelAssignment& labels, Variant v, std::size_t num_hubs) {
    const int lo = v == Variant::WithNull ? 0 : 1;
    const int hi = static_cast<int>(num_hubs);
    for (std::size_t t = 0; t < labels.z.size(); ++t) {
        const int l = labels.z[t];
        if (l < lo || l > hi) {
            std::ostringstream os;
            os << "label " << l << " at group " << t + 1 << " outside [" << lo << ", " << hi << "]";
            throw Error(ErrorCode::IndexOutOfRange, os.str());
        }
    }
}

}  // namespace grouphub
