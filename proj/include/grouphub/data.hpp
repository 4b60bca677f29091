#pragma once

#include "grouphub/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace grouphub {

// T x n membership matrix. Entries are stored as given; binary-ness is
// checked by validate_grouped_data so that malformed input can be reported
// rather than silently coerced.
class GroupedData {
public:
    GroupedData() = default;
    GroupedData(std::size_t T, std::size_t n, std::vector<std::uint8_t> values);

    static GroupedData from_rows(const std::vector<std::vector<int>>& rows);

    std::size_t T() const { return T_; }
    std::size_t n() const { return n_; }

    std::uint8_t operator()(std::size_t t, std::size_t j) const { return values_[t * n_ + j]; }
    std::span<const std::uint8_t> row(std::size_t t) const {
        return {values_.data() + t * n_, n_};
    }
    // Nodes with a nonzero entry in group t, ascending.
    std::span<const std::uint32_t> members(std::size_t t) const {
        return {members_.data() + offsets_[t], offsets_[t + 1] - offsets_[t]};
    }

    const std::vector<std::uint8_t>& values() const { return values_; }

    // Groups selected by index, in the given order (used by the bootstrap).
    GroupedData subset(std::span<const std::size_t> rows) const;

    bool operator==(const GroupedData& o) const {
        return T_ == o.T_ && n_ == o.n_ && values_ == o.values_;
    }

private:
    void index_members();

    std::size_t T_ = 0;
    std::size_t n_ = 0;
    std::vector<std::uint8_t> values_;
    std::vector<std::uint32_t> members_;
    std::vector<std::size_t> offsets_;
};

struct ValidationIssue {
    ErrorCode code;
    std::size_t t = 0;  // 0-based group
    std::size_t j = 0;  // 0-based node
    std::string message;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
};

ValidationReport validate_grouped_data(const GroupedData& data, Variant variant,
                                       std::optional<std::size_t> expected_n = std::nullopt);

// Throws the first issue as an Error.
void require_valid(const GroupedData& data, Variant variant,
                   std::optional<std::size_t> expected_n = std::nullopt);

}  // namespace grouphub
