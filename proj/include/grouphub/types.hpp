#pragma once

// Core value types shared by every grouphub module.
//
// Component rows are indexed 0..K-1. Under WithNull, row 0 is the null
// component (pi) and row k (k >= 1) belongs to hub k. Under Asymmetric,
// row k belongs to hub k+1. Labels follow the public convention: 0 means
// hubless, 1..n_L name a hub by its position in the hub set.
// Node indices are 0-based in memory and 1-based in every file and report.

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace grouphub {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class ErrorCode {
    NonBinaryEntry,
    EmptyGroupInfeasible,
    DimensionMismatch,
    IndexOutOfRange,
    InvalidParams,
    NTooLarge,
    ZeroProbabilityGroup,
    AllRestartsFailed,
    SearchSpaceTooLarge,
    NonFiniteObjective,
    InvalidSpec,
    EmptyTrueSet,
    InvalidConfig,
    Io,
    Parse,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

enum class Variant { Asymmetric, WithNull };

const char* to_string(Variant v);
Variant parse_variant(const std::string& s);

struct HubModelParams {
    Variant variant = Variant::Asymmetric;
    std::size_t n = 0;
    std::vector<std::size_t> hubs;  // 0-based node ids, one per hub component
    Vector rho;                     // length K
    Matrix A;                       // K x n

    bool has_null() const { return variant == Variant::WithNull; }
    std::size_t num_hubs() const { return hubs.size(); }
    std::size_t num_components() const { return hubs.size() + (has_null() ? 1 : 0); }
    std::size_t first_hub_row() const { return has_null() ? 1 : 0; }

    // Node forced present by component row k, if any.
    std::optional<std::size_t> hub_node(std::size_t row) const {
        if (has_null() && row == 0) return std::nullopt;
        return hubs[row - first_hub_row()];
    }

    // Throws InvalidParams when an invariant is violated.
    void validate(double sum_tol = 1e-12) const;
};

// Labels use the public convention (0 = hubless, 1..n_L hubs).
struct LabelAssignment {
    std::vector<int> z;

    std::size_t size() const { return z.size(); }
    bool operator==(const LabelAssignment&) const = default;
};

inline std::size_t label_to_row(int label, Variant v) {
    return v == Variant::WithNull ? static_cast<std::size_t>(label)
                                  : static_cast<std::size_t>(label - 1);
}

inline int row_to_label(std::size_t row, Variant v) {
    return v == Variant::WithNull ? static_cast<int>(row) : static_cast<int>(row) + 1;
}

void validate_labels(const LabelAssignment& labels, Variant v, std::size_t num_hubs);

}  // namespace grouphub
