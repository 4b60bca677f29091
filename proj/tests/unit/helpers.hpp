#pragma once

#include "grouphub/data.hpp"
#include "grouphub/rng.hpp"
#include "grouphub/types.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace testutil {

using grouphub::HubModelParams;
using grouphub::Matrix;
using grouphub::Variant;
using grouphub::Vector;

inline HubModelParams make_params(Variant v, std::size_t n, std::vector<std::size_t> hubs,
                                  std::vector<double> rho, std::vector<std::vector<double>> A) {
    HubModelParams p;
    p.variant = v;
    p.n = n;
    p.hubs = std::move(hubs);
    p.rho = Vector::Map(rho.data(), static_cast<Eigen::Index>(rho.size()));
    p.A = Matrix(static_cast<Eigen::Index>(A.size()), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < A.size(); ++i)
        for (std::size_t j = 0; j < n; ++j) p.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = A[i][j];
    return p;
}

// Random valid params. Some off-diagonal entries are pushed to 0 so that
// structural zeros get exercised.
inline HubModelParams random_params(grouphub::Rng& rng, Variant v, std::size_t n, std::size_t nL) {
    HubModelParams p;
    p.variant = v;
    p.n = n;
    std::vector<std::size_t> nodes(n);
    for (std::size_t j = 0; j < n; ++j) nodes[j] = j;
    for (std::size_t i = 0; i < nL; ++i) {
        const std::size_t k = i + grouphub::uniform_index(rng, n - i);
        std::swap(nodes[i], nodes[k]);
        p.hubs.push_back(nodes[i]);
    }
    const std::size_t K = p.num_components();
    p.rho = Vector(static_cast<Eigen::Index>(K));
    for (auto& r : p.rho) r = 0.05 + grouphub::uniform01(rng);
    p.rho /= p.rho.sum();
    p.A = Matrix(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < n; ++j) {
            const double u = grouphub::uniform01(rng);
            p.A(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = u < 0.1 ? 0.0 : 0.05 + 0.9 * grouphub::uniform01(rng);
        }
    for (std::size_t r = p.first_hub_row(); r < K; ++r)
        p.A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(*p.hub_node(r))) = 1.0;
    return p;
}

// P(g | component row k) as a plain product of probabilities.
inline double component_prob(const HubModelParams& p, const std::vector<std::uint8_t>& g, std::size_t k) {
    double prob = 1.0;
    for (std::size_t j = 0; j < p.n; ++j) {
        const double a = p.A(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
        prob *= g[j] ? a : 1.0 - a;
    }
    return prob;
}

inline double mixture_prob(const HubModelParams& p, const std::vector<std::uint8_t>& g) {
    double s = 0.0;
    for (std::size_t k = 0; k < p.num_components(); ++k) s += p.rho[static_cast<Eigen::Index>(k)] * component_prob(p, g, k);
    return s;
}

inline std::vector<std::uint8_t> bits(std::uint64_t g, std::size_t n) {
    std::vector<std::uint8_t> out(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = (g >> j) & 1u;
    return out;
}

// Identifiability counterexamples: the first pair breaks condition
// (i), second pair breaks condition (ii); the null-model pair breaks (iii).
inline HubModelParams counterexample_i_left() {
    return make_params(Variant::Asymmetric, 3, {0, 1}, {0.5, 0.5}, {{1, 0.5, 0}, {1, 1, 0.5}});
}
inline HubModelParams counterexample_i_right() {
    return make_params(Variant::Asymmetric, 3, {0, 1}, {0.25, 0.75}, {{1, 0, 0}, {1, 1, 1.0 / 3}});
}
inline HubModelParams counterexample_ii_left() {
    return make_params(Variant::Asymmetric, 3, {0, 1}, {0.5, 0.5}, {{1, 0.5, 0.5}, {0.5, 1, 0.5}});
}
inline HubModelParams counterexample_ii_right() {
    return make_params(Variant::Asymmetric, 3, {0, 1}, {0.25, 0.75}, {{1, 0, 0.5}, {2.0 / 3, 1, 0.5}});
}
inline HubModelParams counterexample_iii_left() {
    return make_params(Variant::WithNull, 3, {0}, {0.5, 0.5}, {{0.5, 0, 0.5}, {1, 0.5, 0.5}});
}
inline HubModelParams counterexample_iii_right() {
    return make_params(Variant::WithNull, 3, {0}, {0.25, 0.75}, {{0, 0, 0.5}, {1, 1.0 / 3, 0.5}});
}

}  // namespace testutil
