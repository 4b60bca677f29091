#include "grouphub/data.hpp"

#include <sstream>

namespace grouphub {

GroupedData::GroupedData(std::size_t T, std::size_t n, std::vector<std::uint8_t> values)
    : T_(T), n_(n), values_(std::move(values)) {
    if (values_.size() != T_ * n_)
        throw Error(ErrorCode::DimensionMismatch, "grouped data buffer does not match T x n");
    index_members();
}

GroupedData GroupedData::from_rows(const std::vector<std::vector<int>>& rows) {
    const std::size_t T = rows.size();
    const std::size_t n = T ? rows.front().size() : 0;
    std::vector<std::uint8_t> values;
    values.reserve(T * n);
    for (std::size_t t = 0; t < T; ++t) {
        if (rows[t].size() != n) {
            std::ostringstream os;
            os << "group " << t + 1 << " has " << rows[t].size() << " fields, expected " << n;
            throw Error(ErrorCode::DimensionMismatch, os.str());
        }
        for (int v : rows[t]) {
            if (v < 0 || v > 255) {
                std::ostringstream os;
                os << "entry " << v << " in group " << t + 1 << " is not binary";
                throw Error(ErrorCode::NonBinaryEntry, os.str());
            }
            values.push_back(static_cast<std::uint8_t>(v));
        }
    }
    return GroupedData(T, n, std::move(values));
}

void GroupedData::index_members() {
    members_.clear();
    offsets_.assign(T_ + 1, 0);
    for (std::size_t t = 0; t < T_; ++t) {
        for (std::size_t j = 0; j < n_; ++j)
            if (values_[t * n_ + j] != 0) members_.push_back(static_cast<std::uint32_t>(j));
        offsets_[t + 1] = members_.size();
    }
}

GroupedData GroupedData::subset(std::span<const std::size_t> rows) const {
    std::vector<std::uint8_t> values;
    values.reserve(rows.size() * n_);
    for (auto t : rows) {
        if (t >= T_) throw Error(ErrorCode::IndexOutOfRange, "group index out of range");
        auto r = row(t);
        values.insert(values.end(), r.begin(), r.end());
    }
    return GroupedData(rows.size(), n_, std::move(values));
}

ValidationReport validate_grouped_data(const GroupedData& data, Variant variant,
                                       std::optional<std::size_t> expected_n) {
    ValidationReport report;
    if (expected_n && *expected_n != data.n()) {
        std::ostringstream os;
        os << "data has " << data.n() << " nodes, expected " << *expected_n;
        report.issues.push_back({ErrorCode::DimensionMismatch, 0, 0, os.str()});
        return report;
    }
    if (data.T() < 1 || data.n() < 2) {
        report.issues.push_back(
            {ErrorCode::DimensionMismatch, 0, 0, "grouped data needs T >= 1 and n >= 2"});
        return report;
    }
    for (std::size_t t = 0; t < data.T(); ++t) {
        bool any = false;
        for (std::size_t j = 0; j < data.n(); ++j) {
            const auto v = data(t, j);
            if (v > 1) {
                std::ostringstream os;
                os << "entry (" << t + 1 << ", " << j + 1 << ") = " << int(v) << " is not 0/1";
                report.issues.push_back({ErrorCode::NonBinaryEntry, t, j, os.str()});
            }
            any = any || v != 0;
        }
        if (!any && variant == Variant::Asymmetric) {
            std::ostringstream os;
            os << "group " << t + 1
               << " is empty, which has probability 0 under the asymmetric hub model";
            report.issues.push_back({ErrorCode::EmptyGroupInfeasible, t, 0, os.str()});
        }
    }
    return report;
}

void require_valid(const GroupedData& data, Variant variant, std::optional<std::size_t> expected_n) {
    auto report = validate_grouped_data(data, variant, expected_n);
    if (!report.ok()) throw Error(report.issues.front().code, report.issues.front().message);
}

}  // namespace grouphub
