// One PASS/FAIL line per acceptance criterion.
//
//   acceptance [--only 1,4,8] [--known-fail 5] [--r-selection 50]
//
// The exit status is nonzero when a criterion fails, unless it is listed
// with --known-fail; every line is still printed as measured.

#include "../unit/helpers.hpp"

#include "grouphub/em.hpp"
#include "grouphub/experiments.hpp"
#include "grouphub/identifiability.hpp"
#include "grouphub/model.hpp"
#include "grouphub/oracle.hpp"
#include "grouphub/penalized.hpp"
#include "grouphub/profile.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace grouphub;
using namespace testutil;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// ---- oracles ---------------------------------------------------------------

std::size_t outcome_index(const std::vector<std::uint8_t>& g) {
    std::size_t idx = 0;
    for (std::size_t j = 0; j < g.size(); ++j)
        if (g[j]) idx |= std::size_t{1} << j;
    return idx;
}

// Profile log-likelihood of a labelling, computed from raw counts.
double brute_profile(const GroupedData& d, const std::vector<int>& z, Variant v, std::size_t K) {
    std::vector<double> cnt(K, 0.0);
    std::vector<std::vector<double>> ones(K, std::vector<double>(d.n(), 0.0));
    for (std::size_t t = 0; t < d.T(); ++t) {
        const auto k = label_to_row(z[t], v);
        cnt[k] += 1;
        for (std::size_t j = 0; j < d.n(); ++j) ones[k][j] += d(t, j);
    }
    double s = 0.0;
    for (std::size_t t = 0; t < d.T(); ++t) {
        const auto k = label_to_row(z[t], v);
        for (std::size_t j = 0; j < d.n(); ++j) {
            const double a = ones[k][j] / cnt[k];
            const double x = d(t, j);
            if (x > 0) s += std::log(a);
            if (x < 1) s += std::log1p(-a);
        }
    }
    return s;
}

double rho_objective(const Matrix& logd, const Vector& rho, double lambda, double eps) {
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

SparseLogTable to_sparse(const Matrix& logd) {
    SparseLogTable tb;
    tb.K = static_cast<std::size_t>(logd.cols());
    tb.offsets.assign(1, 0);
    for (Eigen::Index t = 0; t < logd.rows(); ++t) {
        for (Eigen::Index k = 0; k < logd.cols(); ++k) {
            tb.cols.push_back(static_cast<std::uint32_t>(k));
            tb.vals.push_back(logd(t, k));
        }
        tb.offsets.push_back(tb.cols.size());
    }
    return tb;
}

double column_mean_null_loglik(const GroupedData& d) {
    double ll = 0.0;
    for (std::size_t j = 0; j < d.n(); ++j) {
        double m = 0.0;
        for (std::size_t t = 0; t < d.T(); ++t) m += d(t, j);
        m /= static_cast<double>(d.T());
        for (std::size_t t = 0; t < d.T(); ++t) {
            if (d(t, j) && m > 0.0) ll += std::log(m);
            if (!d(t, j) && m < 1.0) ll += std::log1p(-m);
        }
    }
    return ll;
}

// ---- criteria ----------------------------------------------------------------

Outcome identifiability_counterexamples() {
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream os;
    bool ok = true;
    double worst = 0.0;
    const std::pair<HubModelParams, HubModelParams> pairs[] = {
        {counterexample_i_left(), counterexample_i_right()},
        {counterexample_ii_left(), counterexample_ii_right()},
        {counterexample_iii_left(), counterexample_iii_right()},
    };
    for (int c = 0; c < 3; ++c) {
        const double tv = tv_distance(enumerate_pmf(pairs[c].first), enumerate_pmf(pairs[c].second));
        worst = std::max(worst, tv);
        ok &= tv < 1e-12;
        for (const auto* p : {&pairs[c].first, &pairs[c].second}) {
            const auto r = check_identifiability(*p);
            const bool i = !r.condI, ii = !r.condII, iii = r.condIII.has_value() && !*r.condIII;
            ok &= i == (c == 0) && ii == (c == 1) && iii == (c == 2);
        }
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    os << "max tv " << fmt("%.3g", worst) << (ok ? ", each pair flags only its own condition" : ", flags wrong")
       << ", " << fmt("%.3f", sec) << " s (limit 1 s)";
    return {ok && sec < 1.0, os.str()};
}

Outcome oracle_equivalence() {
    Rng rng = make_stream(2024, {});
    double llErr = 0.0, postErr = 0.0;
    std::size_t instances = 0;
    for (int rep = 0; rep < 100; ++rep, ++instances) {
        const std::size_t n = 2 + rep % 7;
        const Variant v = rep % 2 ? Variant::WithNull : Variant::Asymmetric;
        const auto p = random_params(rng, v, n, 1 + static_cast<std::size_t>(rep) % (n - 1));
        const auto data = generate(p, 25, static_cast<std::uint64_t>(rep)).first;
        const PmfTable pmf = enumerate_pmf(p);
        const auto ll = group_log_likelihoods(p, data);
        const auto h = e_step(p, data);
        for (std::size_t t = 0; t < data.T(); ++t) {
            std::vector<std::uint8_t> g(data.row(t).begin(), data.row(t).end());
            const double prob = pmf.probs[outcome_index(g)];
            llErr = std::max(llErr, std::abs(std::exp(ll[t]) - prob));
            for (std::size_t k = 0; k < p.num_components(); ++k) {
                const double bayes = p.rho[static_cast<Eigen::Index>(k)] * component_prob(p, g, k) / prob;
                postErr = std::max(postErr,
                                   std::abs(h.h(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) - bayes));
            }
        }
    }

    // Exhaustive profile search against brute force, n_L = 2, T = 6.
    bool searchOk = true;
    std::size_t searches = 0;
    for (int rep = 0; rep < 20; ++rep, ++searches) {
        const Variant v = rep % 2 ? Variant::WithNull : Variant::Asymmetric;
        auto p = random_params(rng, v, 6, 2);
        for (Eigen::Index k = 0; k < p.A.rows(); ++k)
            for (Eigen::Index j = 0; j < 6; ++j)
                if (p.A(k, j) < 1.0) p.A(k, j) = 0.2 + 0.6 * p.A(k, j);
        const auto data = generate(p, 6, static_cast<std::uint64_t>(100 + rep)).first;
        const int lo = v == Variant::WithNull ? 0 : 1;
        std::vector<int> lab(6, lo), best;
        double bestLL = -INFINITY;
        for (;;) {
            bool feasible = true;
            for (std::size_t t = 0; t < 6; ++t)
                if (lab[t] > 0 && !data(t, p.hubs[static_cast<std::size_t>(lab[t] - 1)])) feasible = false;
            if (feasible) {
                const double ll = brute_profile(data, lab, v, p.num_components());
                if (best.empty() || ll > bestLL + 1e-12 * (1.0 + std::abs(bestLL))) {
                    bestLL = ll;
                    best = lab;
                }
            }
            int t = 5;
            while (t >= 0 && ++lab[static_cast<std::size_t>(t)] > 2) lab[static_cast<std::size_t>(t--)] = lo;
            if (t < 0) break;
        }
        const auto r = exhaustive_profile_search(data, p.hubs, v);
        searchOk &= r.zHat.z == best && std::abs(r.logLik - bestLL) <= 1e-10;
    }
    std::ostringstream os;
    os << instances << " instances: max likelihood error " << fmt("%.2g", llErr) << ", max posterior error "
       << fmt("%.2g", postErr) << "; " << searches << " exhaustive searches "
       << (searchOk ? "match" : "DIFFER from") << " brute force";
    return {llErr <= 1e-12 && postErr <= 1e-12 && searchOk, os.str()};
}

Outcome em_monotonicity() {
    Rng rng = make_stream(303, {});
    double worstEm = 0.0, worstPen = 0.0;
    std::size_t emFits = 0, penFits = 0, skipped = 0;
    for (int rep = 0; emFits < 200 && rep < 1000; ++rep) {
        const std::size_t n = 3 + rep % 8;
        const Variant v = rep % 2 ? Variant::WithNull : Variant::Asymmetric;
        const std::size_t nL = 1 + rep % std::min<std::size_t>(3, n - 1);
        const auto truth = random_params(rng, v, n, nL);
        const std::size_t T = 10 + rep % 41;
        const auto data = generate(truth, T, static_cast<std::uint64_t>(rep)).first;
        FitConfig cfg;
        cfg.probFloor = 1e-12;
        cfg.relTol = 1e-12;
        cfg.maxIter = 300;
        try {
            const auto fit = run_em(data, init_params(truth.hubs, v, n, static_cast<std::uint64_t>(rep)), cfg);
            for (std::size_t i = 1; i < fit.trace.size(); ++i)
                worstEm = std::max(worstEm, fit.trace[i - 1] - fit.trace[i]);
            ++emFits;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ZeroProbabilityGroup) throw;
            ++skipped;
        }
    }
    for (int rep = 0; penFits < 200; ++rep) {
        const std::size_t n = 4 + rep % 7;
        const auto truth = random_params(rng, Variant::WithNull, n, 1 + rep % 2);
        const std::size_t T = 10 + rep % 41;
        const auto data = generate(truth, T, static_cast<std::uint64_t>(rep)).first;
        std::vector<std::size_t> pot;
        for (std::size_t j = 0; j < std::min<std::size_t>(n - 1, 4); ++j) pot.push_back(j);
        PenaltyConfig pen;
        pen.lambda = 0.02 * (rep % 6);
        FitConfig cfg;
        cfg.probFloor = 1e-12;
        cfg.maxIter = 200;
        const auto fit =
            run_modified_em(data, init_params(pot, Variant::WithNull, n, static_cast<std::uint64_t>(rep)), pen, cfg);
        for (std::size_t i = 1; i < fit.trace.size(); ++i) worstPen = std::max(worstPen, fit.trace[i - 1] - fit.trace[i]);
        ++penFits;
    }
    std::ostringstream os;
    os << emFits << " EM fits (" << skipped << " infeasible starts skipped), worst drop " << fmt("%.2g", worstEm)
       << " (tol 1e-9); " << penFits << " penalized fits, worst drop " << fmt("%.2g", worstPen) << " (tol 1e-6)";
    return {emFits == 200 && worstEm <= 1e-9 && worstPen <= 1e-6, os.str()};
}

Outcome gradient_check() {
    Rng rng = make_stream(4242, {});
    PenaltyConfig pen;
    pen.lambda = 0.05;
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const Eigen::Index K = 2 + rep % 6, T = 40;
        Matrix logd(T, K);
        for (Eigen::Index t = 0; t < T; ++t)
            for (Eigen::Index k = 0; k < K; ++k) logd(t, k) = -4.0 * uniform01(rng);
        Vector rho(K);
        for (auto& r : rho) r = exponential1(rng) + 0.05;
        rho /= rho.sum();
        const RhoObjective obj(to_sparse(logd), pen);
        const Vector g = obj.gradient(rho);
        const double h = 1e-6;
        for (Eigen::Index k = 0; k < K; ++k) {
            Vector up = rho, dn = rho;
            up[k] += h;
            dn[k] -= h;
            const double fd = (rho_objective(logd, up, pen.lambda, pen.epsilon) -
                               rho_objective(logd, dn, pen.lambda, pen.epsilon)) / (2.0 * h);
            worst = std::max(worst, std::abs(g[k] - fd) / std::max(1.0, std::abs(fd)));
        }
    }

    double gap = 0.0;
    for (double lambda : {0.0, 0.01, 0.05, 0.2}) {
        for (int rep = 0; rep < 5; ++rep) {
            Matrix logd(60, 2);
            for (Eigen::Index t = 0; t < 60; ++t) {
                const bool first = t < 20 + 6 * rep;
                logd(t, 0) = first ? -1.0 - uniform01(rng) : -5.0 - uniform01(rng);
                logd(t, 1) = first ? -5.0 - uniform01(rng) : -1.0 - uniform01(rng);
            }
            PenaltyConfig pc;
            pc.lambda = lambda;
            const auto sol = solve_rho_subproblem(logd, pc, Vector::Constant(2, 0.5));
            double best = -INFINITY;
            for (int i = 0; i <= 10000; ++i) {
                Vector r(2);
                r[1] = i / 10000.0;
                r[0] = 1.0 - r[1];
                best = std::max(best, rho_objective(logd, r, lambda, pc.epsilon));
            }
            gap = std::max(gap, best - sol.objective);
        }
    }
    std::ostringstream os;
    os << "max relative gradient error " << fmt("%.2g", worst) << " (tol 1e-5); grid oracle shortfall "
       << fmt("%.2g", gap) << " (tol 1e-6)";
    return {worst < 1e-5 && gap <= 1e-6, os.str()};
}

std::string cell(const ReplicateSummary& s) {
    std::ostringstream os;
    os << "mislabel " << fmt("%.4f", s.mislabel.mean) << " (se " << fmt("%.4f", s.mislabel.se) << "), RMSE "
       << fmt("%.4f", s.rmse.mean) << ", RMSE* " << fmt("%.4f", s.rmseStar.mean) << "; rho-weighted RMSE "
       << fmt("%.4f", s.rmseWeighted.mean) << ", RMSE* " << fmt("%.4f", s.rmseStarWeighted.mean);
    return os.str();
}

bool within(double x, double centre, double half) { return std::abs(x - centre) <= half; }

ScenarioSpec estimation_spec(Variant v, std::size_t n, std::size_t T) {
    ScenarioSpec s;
    s.variant = v;
    s.nL = 10;
    s.n = n;
    s.T = T;
    return s;
}

constexpr std::uint64_t kSeed = 42;
constexpr std::size_t kTrendR = 200;
const std::size_t kTs[] = {500, 1000, 1500, 2000};

// Trend cells, shared with the estimation cells at T = 500.
std::vector<ReplicateSummary> trend_cells(Variant v) {
    static std::vector<ReplicateSummary> cache[2];
    auto& c = cache[v == Variant::WithNull ? 1 : 0];
    if (c.empty())
        for (auto T : kTs) c.push_back(run_estimation_replicates(estimation_spec(v, 100, T), kTrendR, kSeed));
    return c;
}

Outcome table1_small() {
    const auto s = trend_cells(Variant::Asymmetric).front();
    const bool ok = within(s.mislabel.mean, 0.0479, 0.015) && within(s.rmse.mean, 0.0501, 0.010) &&
                    within(s.rmseStar.mean, 0.0475, 0.010);
    return {ok, "R=200: " + cell(s) + "; bands 0.0479+-0.015, 0.0501+-0.010, 0.0475+-0.010"};
}

Outcome table1_large() {
    const auto s = run_estimation_replicates(estimation_spec(Variant::Asymmetric, 500, 1000), 100, kSeed);
    return {s.mislabel.mean <= 0.005, "R=100: " + cell(s) + "; need mislabel <= 0.005"};
}

Outcome table2_small() {
    const auto s = trend_cells(Variant::WithNull).front();
    return {within(s.mislabel.mean, 0.0842, 0.02), "R=200: " + cell(s) + "; band 0.0842+-0.02"};
}

Outcome table3(std::size_t R) {
    ScenarioSpec s;
    s.variant = Variant::WithNull;
    s.nL = 10;
    s.n = 500;
    s.T = 2000;
    s.M = 80;
    PathConfig pc;
    pc.fit.numRestarts = 3;
    pc.freshRestarts = 1;
    const auto sum = run_selection_replicates(s, default_selection_grid(), R, kSeed, pc);
    const double tprNeed = R >= 50 ? 0.93 : 0.90;
    std::ostringstream os;
    os << "R=" << R << ": BIC TPR " << fmt("%.4f", sum.bicTPR.mean) << " FPR " << fmt("%.4f", sum.bicFPR.mean)
       << " (AIC " << fmt("%.4f", sum.aicTPR.mean) << " / " << fmt("%.4f", sum.aicFPR.mean) << "); need TPR >= "
       << tprNeed << ", FPR <= 0.01";
    // Means of per-replicate fractions carry rounding error; 465/500 must count as 0.93.
    const double slack = 1e-12;
    return {R >= 25 && sum.bicTPR.mean >= tprNeed - slack && sum.bicFPR.mean <= 0.01 + slack, os.str()};
}

Outcome trend() {
    bool ok = true;
    std::ostringstream os;
    for (auto v : {Variant::Asymmetric, Variant::WithNull}) {
        const auto cells = trend_cells(v);
        os << to_string(v) << ":";
        for (std::size_t i = 0; i < cells.size(); ++i) {
            os << ' ' << fmt("%.4f", cells[i].mislabel.mean);
            if (i == 0) continue;
            // Paired replicates: slack from the SE of the per-replicate differences.
            std::vector<double> diff;
            for (std::size_t r = 0; r < kTrendR; ++r)
                diff.push_back(cells[i].mislabels[r] - cells[i - 1].mislabels[r]);
            const auto d = mean_se(diff);
            ok &= d.mean < 2.0 * d.se;
        }
        os << "; ";
    }
    os << "R=200 paired, each step within 2 SE";
    return {ok, os.str()};
}

Outcome null_degeneration() {
    bool ok = true;
    double worst = 0.0;
    std::size_t nonempty = 0;
    for (std::uint64_t s = 0; s < 4; ++s) {
        ScenarioSpec spec;
        spec.variant = Variant::WithNull;
        spec.nL = 3;
        spec.n = 40;
        spec.T = 300;
        spec.M = 8;
        spec.seed = s;
        const auto sc = build_scenario(spec);
        const auto data = generate(sc.params, spec.T, 10 + s).first;
        std::vector<std::size_t> pot{0, 1, 2, 3, 4, 5, 6, 7};
        PathConfig pc;
        pc.fit.numRestarts = 2;
        pc.freshRestarts = 1;
        const double ext = find_extinction_lambda(data, pot, pc);
        PenaltyConfig pen;
        pen.lambda = 10.0 * ext;
        const auto fit = modified_em(data, pot, pen, pc.fit);
        const double gap = std::abs(fit.logLik - column_mean_null_loglik(data));
        worst = std::max(worst, gap);
        if (!fit.selectedSet.empty()) ++nonempty;
        ok &= fit.selectedSet.empty() && gap <= 1e-8;
    }
    std::ostringstream os;
    os << "4 datasets at 10x extinction: " << nonempty << " non-empty selections, max |logLik - null| "
       << fmt("%.2g", worst) << " (tol 1e-8)";
    return {ok, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria"};
    std::vector<int> only, knownFail;
    std::size_t rSelection = 50;
    app.add_option("--only", only, "criteria to run")->delimiter(',');
    app.add_option("--known-fail", knownFail, "criteria whose failure does not set the exit status")->delimiter(',');
    app.add_option("--r-selection", rSelection, "replicates for the selection criterion");
    CLI11_PARSE(app, argc, argv);

    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"identifiability counterexamples", identifiability_counterexamples},
        {"oracle equivalence", oracle_equivalence},
        {"EM monotonicity", em_monotonicity},
        {"gradient check and grid oracle", gradient_check},
        {"asymmetric estimation n=100 T=500", table1_small},
        {"asymmetric estimation n=500 T=1000", table1_large},
        {"with_null estimation n=100 T=500", table2_small},
        {"selection n=500 T=2000 M=80", [&] { return table3(rSelection); }},
        {"mislabel trend in T", trend},
        {"null degeneration", null_degeneration},
    };
    const std::set<int> run(only.begin(), only.end()), known(knownFail.begin(), knownFail.end());
    int failed = 0, passed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!run.empty() && !run.count(id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail.c_str(), sec);
        std::fflush(stdout);
        if (o.pass)
            ++passed;
        else if (!known.count(id))
            ++failed;
    }
    std::printf("%d passed, %d failed outside the known-failure list\n", passed, failed);
    return failed ? 1 : 0;
}
