#include "doctest.h"
#include "helpers.hpp"

#include "grouphub/model.hpp"
#include "grouphub/penalized.hpp"

#include <cmath>

using namespace grouphub;
using namespace testutil;

namespace {

// Dense T x K table of log densities plus its objective, written directly.
struct Table {
    Matrix logd;
    double objective(const Vector& rho, double lambda, double eps) const {
        double s = 0.0;
        for (Eigen::Index t = 0; t < logd.rows(); ++t) {
            double mix = 0.0;
            for (Eigen::Index k = 0; k < logd.cols(); ++k) mix += rho[k] * std::exp(logd(t, k));
            s += std::log(mix);
        }
        double pen = 0.0;
        for (Eigen::Index k = 1; k < rho.size(); ++k) pen += std::log(eps + rho[k]) - std::log(eps);
        return s - static_cast<double>(logd.rows()) * lambda * pen;
    }
};

Table random_table(Rng& rng, Eigen::Index T, Eigen::Index K) {
    Table tb{Matrix(T, K)};
    for (Eigen::Index t = 0; t < T; ++t)
        for (Eigen::Index k = 0; k < K; ++k) tb.logd(t, k) = -3.0 * uniform01(rng) - (k == t % K ? 0.0 : 1.0);
    return tb;
}

Vector random_simplex(Rng& rng, Eigen::Index K) {
    Vector r(K);
    for (auto& x : r) x = exponential1(rng) + 1e-3;
    return r / r.sum();
}

SparseLogTable to_sparse(const Matrix& m) {
    SparseLogTable t;
    t.K = static_cast<std::size_t>(m.cols());
    t.offsets.assign(1, 0);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            if (m(i, k) == kNegInf) continue;
            t.cols.push_back(static_cast<std::uint32_t>(k));
            t.vals.push_back(m(i, k));
        }
        t.offsets.push_back(t.cols.size());
    }
    return t;
}

}  // namespace

TEST_CASE("penalized likelihood identities") {
    auto rng = make_stream(1);
    auto p = random_params(rng, Variant::WithNull, 6, 3);
    auto [d, z] = generate(p, 80, 2);
    PenaltyConfig zero;
    CHECK(penalized_loglik(p, d, zero) == log_likelihood(p, d));

    PenaltyConfig pen;
    pen.lambda = 0.03;
    double s = 0.0;
    for (Eigen::Index k = 1; k < p.rho.size(); ++k) s += std::log(pen.epsilon + p.rho[k]) - std::log(pen.epsilon);
    const double expect = log_likelihood(p, d) - 80.0 * 0.03 * s;
    CHECK(std::abs(penalized_loglik(p, d, pen) - expect) <= 1e-10 * std::abs(expect));

    auto pure = p;
    pure.rho.setZero();
    pure.rho[0] = 1.0;
    CHECK(penalty_term(pure.rho, pen, 80) == 0.0);
    CHECK(penalized_loglik(pure, d, pen) == log_likelihood(pure, d));

    // penalty ignores rho_0
    Vector a(3), b(3);
    a << 0.2, 0.3, 0.5;
    b << 0.9, 0.3, 0.5;
    CHECK(penalty_term(a, pen, 10) == penalty_term(b, pen, 10));

    auto asym = make_params(Variant::Asymmetric, 2, {0}, {1.0}, {{1, 0.5}});
    CHECK_THROWS_AS(penalized_loglik(asym, GroupedData::from_rows({{1, 0}}), pen), Error);
}

TEST_CASE("penalty config validation") {
    PenaltyConfig c;
    c.lambda = -1.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.epsilon = 0.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = {};
    c.zeroThreshold = 1e-3;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("rho objective gradient matches central differences") {
    auto rng = make_stream(2);
    PenaltyConfig pen;
    pen.lambda = 0.05;
    pen.epsilon = 1e-2;
    for (int rep = 0; rep < 100; ++rep) {
        const Eigen::Index K = 2 + rep % 5;
        auto tb = random_table(rng, 30, K);
        RhoObjective obj(to_sparse(tb.logd), pen);
        const Vector rho = random_simplex(rng, K);
        CHECK(std::abs(obj.value(rho) - tb.objective(rho, pen.lambda, pen.epsilon)) <= 1e-9);
        const Vector g = obj.gradient(rho);
        const double h = 1e-6;
        for (Eigen::Index k = 0; k < K; ++k) {
            Vector up = rho, dn = rho;
            up[k] += h;
            dn[k] -= h;
            const double fd = (tb.objective(up, pen.lambda, pen.epsilon) - tb.objective(dn, pen.lambda, pen.epsilon)) / (2 * h);
            CHECK(std::abs(g[k] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
        }
        const Matrix H = obj.hessian(rho);
        for (Eigen::Index k = 0; k < K; ++k) {
            Vector up = rho, dn = rho;
            up[k] += h;
            dn[k] -= h;
            const Vector col = (obj.gradient(up) - obj.gradient(dn)) / (2 * h);
            CHECK((H.col(k) - col).cwiseAbs().maxCoeff() <= 1e-4 * std::max(1.0, col.cwiseAbs().maxCoeff()));
        }
    }
}

TEST_CASE("rho subproblem: huge lambda empties the hub weights") {
    auto rng = make_stream(3);
    auto tb = random_table(rng, 40, 2);
    PenaltyConfig pen;
    pen.lambda = 1e6;
    Vector init(2);
    init << 0.5, 0.5;
    auto sol = solve_rho_subproblem(tb.logd, pen, init);
    CHECK(sol.rho[0] == 1.0);
    CHECK(sol.rho[1] == 0.0);
}

TEST_CASE("rho subproblem matches a grid search on the 1-simplex") {
    auto rng = make_stream(4);
    for (double lambda : {0.0, 0.01, 0.2}) {
        for (int rep = 0; rep < 5; ++rep) {
            Table tb{Matrix(60, 2)};
            for (Eigen::Index t = 0; t < 60; ++t) {
                const bool first = t < 25 + 5 * rep;
                tb.logd(t, 0) = first ? -1.0 - uniform01(rng) : -6.0 - uniform01(rng);
                tb.logd(t, 1) = first ? -6.0 - uniform01(rng) : -1.0 - uniform01(rng);
            }
            PenaltyConfig pen;
            pen.lambda = lambda;
            Vector init(2);
            init << 0.5, 0.5;
            auto sol = solve_rho_subproblem(tb.logd, pen, init);
            double best = -INFINITY;
            for (int i = 0; i <= 10000; ++i) {
                Vector r(2);
                r[1] = i / 10000.0;
                r[0] = 1.0 - r[1];
                best = std::max(best, tb.objective(r, lambda, pen.epsilon));
            }
            CHECK(sol.objective >= best - 1e-6);
            CHECK(std::abs(sol.objective - tb.objective(sol.rho, lambda, pen.epsilon)) <= 1e-8);
        }
    }
}

TEST_CASE("rho subproblem postconditions on random tables") {
    auto rng = make_stream(5);
    for (int rep = 0; rep < 50; ++rep) {
        const Eigen::Index K = 2 + rep % 8;
        auto tb = random_table(rng, 80, K);
        for (Eigen::Index t = 0; t < 80; ++t)
            if (uniform01(rng) < 0.2) tb.logd(t, 1 + static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::uint64_t>(K - 1)))) = kNegInf;
        PenaltyConfig pen;
        pen.lambda = 0.02 * (rep % 4);
        const Vector init = random_simplex(rng, K);
        auto sol = solve_rho_subproblem(tb.logd, pen, init);
        CHECK(sol.rho.minCoeff() >= 0.0);
        CHECK(std::abs(sol.rho.sum() - 1.0) <= 1e-12);
        CHECK(sol.objective >= sol.initialObjective);
        for (auto r : sol.rho) CHECK((r == 0.0 || r >= pen.zeroThreshold));
        CHECK(sol.stationarity <= 1e-6);
    }
}

TEST_CASE("rho subproblem rejects impossible tables") {
    Matrix m(2, 2);
    m << -1.0, -2.0, kNegInf, kNegInf;
    Vector init(2);
    init << 0.5, 0.5;
    try {
        solve_rho_subproblem(m, PenaltyConfig{}, init);
        FAIL("expected NonFiniteObjective");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonFiniteObjective);
    }
    m(1, 0) = NAN;
    CHECK_THROWS_AS(solve_rho_subproblem(m, PenaltyConfig{}, init), Error);
}

TEST_CASE("modified EM objective never decreases") {
    auto rng = make_stream(6);
    std::size_t fits = 0;
    for (int rep = 0; rep < 40; ++rep) {
        const std::size_t n = 6 + rep % 5;
        auto truth = random_params(rng, Variant::WithNull, n, 2);
        auto [d, z] = generate(truth, 40 + rep, static_cast<std::uint64_t>(rep));
        std::vector<std::size_t> pot;
        for (std::size_t j = 0; j < 4; ++j) pot.push_back(j);
        PenaltyConfig pen;
        pen.lambda = 0.01 * (rep % 5);
        FitConfig cfg;
        cfg.probFloor = 1e-12;
        cfg.maxIter = 200;
        auto start = init_params(pot, Variant::WithNull, n, static_cast<std::uint64_t>(rep));
        auto fit = run_modified_em(d, start, pen, cfg);
        for (std::size_t i = 1; i < fit.trace.size(); ++i) CHECK(fit.trace[i] >= fit.trace[i - 1] - 1e-6);
        CHECK(std::abs(fit.logLik - log_likelihood(fit.params, d)) <= 1e-8);
        CHECK(std::abs(fit.penalizedObjective - penalized_loglik(fit.params, d, pen)) <= 1e-8);
        ++fits;
    }
    CHECK(fits == 40);
}

TEST_CASE("selected set mirrors nonzero weights") {
    auto rng = make_stream(7);
    auto truth = random_params(rng, Variant::WithNull, 8, 2);
    auto [d, z] = generate(truth, 150, 1);
    PenaltyConfig pen;
    pen.lambda = 0.02;
    FitConfig cfg;
    cfg.numRestarts = 3;
    std::vector<std::size_t> pot{0, 1, 2, 3, 4};
    auto fit = modified_em(d, pot, pen, cfg);
    std::vector<std::size_t> expect;
    for (std::size_t k = 1; k < fit.params.num_components(); ++k)
        if (fit.params.rho[static_cast<Eigen::Index>(k)] != 0.0) expect.push_back(pot[k - 1]);
    CHECK(fit.selectedSet == expect);
    CHECK(std::abs(fit.params.rho.sum() - 1.0) <= 1e-12);
}

TEST_CASE("information criteria") {
    SparseFit fit;
    fit.logLik = -50.0;
    auto d = GroupedData::from_rows(std::vector<std::vector<int>>(100, {1, 0, 1}));
    auto c0 = information_criteria(fit, d);
    CHECK(c0.k == 3.0);
    CHECK(c0.AIC == 100.0 + 6.0);
    fit.selectedSet = {0};
    auto c1 = information_criteria(fit, d);
    CHECK(c1.k == 6.0);
    CHECK(c1.BIC == doctest::Approx(100.0 + 6.0 * std::log(100.0)));
    fit.selectedSet = {0, 1};
    auto c2 = information_criteria(fit, d);
    CHECK(c2.AIC > c1.AIC);
    CHECK(c2.BIC > c1.BIC);
    auto custom = information_criteria(fit, d, [](std::size_t s, std::size_t) { return static_cast<double>(s); });
    CHECK(custom.k == 2.0);
}

TEST_CASE("tpr and fpr") {
    auto r = tpr_fpr({1, 2}, {1, 3}, 5);
    CHECK(r.TPR == 0.5);
    CHECK(r.FPR == doctest::Approx(1.0 / 3.0));
    auto same = tpr_fpr({0, 4}, {0, 4}, 6);
    CHECK(same.TPR == 1.0);
    CHECK(same.FPR == 0.0);
    auto none = tpr_fpr({0, 4}, {}, 6);
    CHECK(none.TPR == 0.0);
    CHECK(none.FPR == 0.0);
    try {
        tpr_fpr({}, {1}, 3);
        FAIL("expected EmptyTrueSet");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyTrueSet);
    }
}

TEST_CASE("lambda grids") {
    auto g = parse_lambda_grid("0.045:0.005:0.065");
    REQUIRE(g.size() == 5);
    CHECK(g.front() == doctest::Approx(0.045));
    CHECK(g.back() == doctest::Approx(0.065));
    CHECK(parse_lambda_grid("0.3") == std::vector<double>{0.3});
    CHECK_THROWS_AS(parse_lambda_grid("a:b"), Error);
    CHECK_THROWS_AS(parse_lambda_grid("0.1:-0.1:0.2"), Error);
    auto lg = log_grid(1e-3, 1.0, 4);
    REQUIRE(lg.size() == 4);
    CHECK(lg[0] == doctest::Approx(1e-3));
    CHECK(lg[1] == doctest::Approx(1e-2));
    CHECK(lg[3] == doctest::Approx(1.0));
}

TEST_CASE("lambda path: singleton grid and ordering checks") {
    auto rng = make_stream(8);
    auto truth = random_params(rng, Variant::WithNull, 8, 2);
    auto [d, z] = generate(truth, 120, 1);
    PathConfig pc;
    pc.fit.numRestarts = 2;
    pc.freshRestarts = 1;
    std::vector<std::size_t> pot{0, 1, 2};
    auto one = lambda_path(d, pot, {0.01}, pc);
    CHECK(one.entries.size() == 1);
    CHECK(one.chosenByAIC == 0);
    CHECK(one.chosenByBIC == 0);
    CHECK_THROWS_AS(lambda_path(d, pot, {0.02, 0.01}, pc), Error);
    CHECK_THROWS_AS(lambda_path(d, pot, {}, pc), Error);

    auto path = lambda_path(d, pot, {0.0, 0.01, 0.05, 0.5}, pc);
    REQUIRE(path.entries.size() == 4);
    for (const auto& e : path.entries) {
        auto c = information_criteria(e.fit, d);
        CHECK(c.AIC == e.criteria.AIC);
        CHECK(c.BIC == e.criteria.BIC);
    }
    for (std::size_t i = 0; i < 4; ++i) CHECK(path.entries[path.chosenByBIC].criteria.BIC <= path.entries[i].criteria.BIC);
}

TEST_CASE("large lambda degenerates to the column-mean null model") {
    auto rng = make_stream(9);
    auto truth = random_params(rng, Variant::WithNull, 7, 2);
    auto [d, z] = generate(truth, 200, 3);
    PathConfig pc;
    pc.fit.numRestarts = 2;
    pc.freshRestarts = 1;
    std::vector<std::size_t> pot{0, 1, 2};
    const double ext = find_extinction_lambda(d, pot, pc);
    PenaltyConfig pen;
    pen.lambda = 10 * ext;
    auto fit = modified_em(d, pot, pen, pc.fit);
    CHECK(fit.selectedSet.empty());
    double nullLL = 0.0;
    for (std::size_t j = 0; j < d.n(); ++j) {
        double m = 0.0;
        for (std::size_t t = 0; t < d.T(); ++t) m += d(t, j);
        m /= static_cast<double>(d.T());
        for (std::size_t t = 0; t < d.T(); ++t) nullLL += d(t, j) ? std::log(m) : std::log1p(-m);
    }
    CHECK(std::abs(fit.logLik - nullLL) <= 1e-8);
}
