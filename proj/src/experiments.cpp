#include "grouphub/experiments.hpp"

#include "grouphub/model.hpp"
#include "grouphub/parallel.hpp"
#include "grouphub/profile.hpp"
#include "grouphub/rng.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

namespace grouphub {

void ScenarioSpec::validate(bool selection) const {
    auto bad = [](const char* msg) { return Error(ErrorCode::InvalidSpec, msg); };
    if (nL == 0) throw bad("nL must be at least 1");
    if (nL >= n) throw bad("hub set must be smaller than node set");
    if (T == 0) throw bad("T must be at least 1");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw bad("alpha must lie in (0, 1]");
    if (variant == Variant::WithNull && !(rho0 > 0.0 && rho0 < 1.0)) throw bad("rho0 must lie in (0, 1)");
    if (selection) {
        if (variant != Variant::WithNull) throw bad("selection experiments use the null-component model");
        if (!(nL <= M && M < n)) throw bad("selection requires nL <= M < n");
    }
}

Scenario build_scenario(const ScenarioSpec& spec) {
    spec.validate(spec.M > 0);
    Rng rng = make_stream(spec.seed, {0x7363656eULL});
    Scenario sc;
    auto& p = sc.params;
    p.variant = spec.variant;
    p.n = spec.n;
    p.hubs.resize(spec.nL);
    std::iota(p.hubs.begin(), p.hubs.end(), std::size_t{0});
    const auto K = static_cast<Eigen::Index>(p.num_components());
    const auto first = static_cast<Eigen::Index>(p.first_hub_row());

    p.rho = Vector::Zero(K);
    double total = 0.0;
    for (Eigen::Index r = first; r < K; ++r) total += (p.rho[r] = uniform01(rng));
    const double hubMass = spec.variant == Variant::WithNull ? 1.0 - spec.rho0 : 1.0;
    for (Eigen::Index r = first; r < K; ++r) p.rho[r] *= hubMass / total;
    if (spec.variant == Variant::WithNull) p.rho[0] = spec.rho0;

    const std::size_t followers = spec.n - spec.nL;
    const std::size_t base = followers / spec.nL, extra = followers % spec.nL;
    sc.Vsets.resize(spec.nL);
    std::size_t next = spec.nL;
    for (std::size_t i = 0; i < spec.nL; ++i) {
        const std::size_t size = base + (i < extra ? 1 : 0);
        for (std::size_t s = 0; s < size; ++s) sc.Vsets[i].push_back(next++);
    }

    p.A = Matrix::Zero(K, static_cast<Eigen::Index>(spec.n));
    if (spec.variant == Variant::WithNull) p.A.row(0).setConstant(0.05);
    for (std::size_t i = 0; i < spec.nL; ++i) {
        const auto r = first + static_cast<Eigen::Index>(i);
        std::vector<char> preferred(spec.n, 0);
        for (auto j : sc.Vsets[i]) preferred[j] = 1;
        for (std::size_t j = 0; j < spec.n; ++j) {
            const auto c = static_cast<Eigen::Index>(j);
            if (j == i)
                p.A(r, c) = 1.0;
            else if (preferred[j])
                p.A(r, c) = uniform(rng, 0.2 * spec.alpha, 0.4 * spec.alpha);
            else
                p.A(r, c) = uniform(rng, 0.0, 0.2 * spec.alpha);
        }
    }
    return sc;
}

double rmse(const Matrix& Ahat, const Matrix& Atrue, const std::vector<std::size_t>& hubs, Variant variant) {
    if (Ahat.rows() != Atrue.rows() || Ahat.cols() != Atrue.cols())
        throw Error(ErrorCode::DimensionMismatch, "estimated and true A differ in shape");
    const std::size_t first = variant == Variant::WithNull ? 1 : 0;
    if (static_cast<std::size_t>(Atrue.rows()) != hubs.size() + first)
        throw Error(ErrorCode::DimensionMismatch, "A row count does not match the hub set");
    double s = 0.0;
    std::size_t count = 0;
    for (Eigen::Index r = 0; r < Atrue.rows(); ++r) {
        const auto rr = static_cast<std::size_t>(r);
        for (Eigen::Index j = 0; j < Atrue.cols(); ++j) {
            if (rr >= first && hubs[rr - first] == static_cast<std::size_t>(j)) continue;
            const double d = Ahat(r, j) - Atrue(r, j);
            s += d * d;
            ++count;
        }
    }
    return count ? std::sqrt(s / static_cast<double>(count)) : 0.0;
}

double rmse_weighted(const Matrix& Ahat, const Matrix& Atrue, const Vector& rho,
                     const std::vector<std::size_t>& hubs, Variant variant) {
    if (Ahat.rows() != Atrue.rows() || Ahat.cols() != Atrue.cols() || rho.size() != Atrue.rows())
        throw Error(ErrorCode::DimensionMismatch, "estimated and true A differ in shape");
    const std::size_t first = variant == Variant::WithNull ? 1 : 0;
    if (static_cast<std::size_t>(Atrue.rows()) != hubs.size() + first)
        throw Error(ErrorCode::DimensionMismatch, "A row count does not match the hub set");
    double s = 0.0;
    for (Eigen::Index r = 0; r < Atrue.rows(); ++r) {
        const auto rr = static_cast<std::size_t>(r);
        double row = 0.0;
        std::size_t count = 0;
        for (Eigen::Index j = 0; j < Atrue.cols(); ++j) {
            if (rr >= first && hubs[rr - first] == static_cast<std::size_t>(j)) continue;
            const double d = Ahat(r, j) - Atrue(r, j);
            row += d * d;
            ++count;
        }
        if (count) s += rho[r] * row / static_cast<double>(count);
    }
    return std::sqrt(s);
}

MeanSe mean_se(const std::vector<double>& x) {
    MeanSe out;
    if (x.empty()) return out;
    const double R = static_cast<double>(x.size());
    for (double v : x) out.mean += v;
    out.mean /= R;
    if (x.size() > 1) {
        double ss = 0.0;
        for (double v : x) ss += (v - out.mean) * (v - out.mean);
        out.se = std::sqrt(ss / (R - 1.0) / R);
    }
    return out;
}

namespace {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t r, std::uint64_t which) {
    return make_stream(seed, {r, which})();
}

Error annotate(const Error& e, const char* what, std::size_t index) {
    std::ostringstream os;
    os << what << ' ' << index << ": " << e.what();
    return Error(e.code(), os.str());
}

}  // namespace

ReplicateSummary run_estimation_replicates(const ScenarioSpec& spec, std::size_t R, std::uint64_t seed,
                                           const FitConfig& fit) {
    spec.validate(false);
    fit.validate();
    if (R == 0) throw Error(ErrorCode::InvalidConfig, "R must be at least 1");
    ReplicateSummary out;
    out.spec = spec;
    out.R = R;
    out.mislabels.assign(R, 0.0);
    out.rmses.assign(R, 0.0);
    out.rmseStars.assign(R, 0.0);
    out.rmsesWeighted.assign(R, 0.0);
    out.rmseStarsWeighted.assign(R, 0.0);
    parallel_for(R, fit.threads, [&](std::size_t r) {
        try {
            ScenarioSpec s = spec;
            s.seed = stream_seed(seed, r, 0);
            const Scenario sc = build_scenario(s);
            auto [data, zStar] = generate(sc.params, spec.T, stream_seed(seed, r, 1));
            FitConfig fc = fit;
            fc.seed = stream_seed(seed, r, 2);
            fc.threads = 1;
            const FitResult res = fit_em(data, sc.params.hubs, spec.variant, fc);
            const LabelAssignment zHat = map_labels(res.posterior, spec.variant);
            out.mislabels[r] = mislabel_rate(zStar, zHat);
            out.rmses[r] = rmse(res.params.A, sc.params.A, sc.params.hubs, spec.variant);
            const HubModelParams known = complete_data_mle(data, zStar, spec.variant, sc.params.hubs);
            out.rmseStars[r] = rmse(known.A, sc.params.A, sc.params.hubs, spec.variant);
            out.rmsesWeighted[r] = rmse_weighted(res.params.A, sc.params.A, sc.params.rho, sc.params.hubs, spec.variant);
            out.rmseStarsWeighted[r] =
                rmse_weighted(known.A, sc.params.A, sc.params.rho, sc.params.hubs, spec.variant);
        } catch (const Error& e) {
            throw annotate(e, "replicate", r);
        }
    });
    out.mislabel = mean_se(out.mislabels);
    out.rmse = mean_se(out.rmses);
    out.rmseStar = mean_se(out.rmseStars);
    out.rmseWeighted = mean_se(out.rmsesWeighted);
    out.rmseStarWeighted = mean_se(out.rmseStarsWeighted);
    return out;
}

std::vector<double> default_selection_grid() { return parse_lambda_grid("0.004:0.004:0.06"); }

SelectionSummary run_selection_replicates(const ScenarioSpec& spec, const std::vector<double>& lambdaGrid,
                                          std::size_t R, std::uint64_t seed, const PathConfig& config) {
    spec.validate(true);
    if (R == 0) throw Error(ErrorCode::InvalidConfig, "R must be at least 1");
    SelectionSummary out;
    out.spec = spec;
    out.R = R;
    out.lambdaGrid = lambdaGrid;
    out.aicLambda.assign(R, 0.0);
    out.bicLambda.assign(R, 0.0);
    out.aicRates.assign(R, {});
    out.bicRates.assign(R, {});
    std::vector<std::size_t> potential(spec.M), truth(spec.nL);
    std::iota(potential.begin(), potential.end(), std::size_t{0});
    std::iota(truth.begin(), truth.end(), std::size_t{0});
    parallel_for(R, config.fit.threads, [&](std::size_t r) {
        try {
            ScenarioSpec s = spec;
            s.seed = stream_seed(seed, r, 0);
            const Scenario sc = build_scenario(s);
            const auto data = generate(sc.params, spec.T, stream_seed(seed, r, 1)).first;
            PathConfig pc = config;
            pc.fit.seed = stream_seed(seed, r, 2);
            pc.fit.threads = 1;
            const SelectionPath path = lambda_path(data, potential, lambdaGrid, pc);
            const auto& a = path.entries[path.chosenByAIC];
            const auto& b = path.entries[path.chosenByBIC];
            out.aicLambda[r] = a.lambda;
            out.bicLambda[r] = b.lambda;
            out.aicRates[r] = tpr_fpr(truth, a.fit.selectedSet, spec.M);
            out.bicRates[r] = tpr_fpr(truth, b.fit.selectedSet, spec.M);
        } catch (const Error& e) {
            throw annotate(e, "replicate", r);
        }
    });
    auto collect = [&](const std::vector<RateResult>& v, bool tpr) {
        std::vector<double> x;
        for (const auto& q : v) x.push_back(tpr ? q.TPR : q.FPR);
        return mean_se(x);
    };
    out.aicTPR = collect(out.aicRates, true);
    out.aicFPR = collect(out.aicRates, false);
    out.bicTPR = collect(out.bicRates, true);
    out.bicFPR = collect(out.bicRates, false);
    return out;
}

std::vector<SparsityRow> run_sparsity_sweep(const ScenarioSpec& base, const std::vector<double>& alphas,
                                            std::size_t R, std::uint64_t seed, const FitConfig& fit) {
    std::vector<SparsityRow> rows;
    for (double a : alphas) {
        ScenarioSpec s = base;
        s.alpha = a;
        SparsityRow row;
        row.alpha = a;
        row.summary = run_estimation_replicates(s, R, seed, fit);
        row.ratio = row.summary.rmseStar.mean > 0.0 ? row.summary.rmse.mean / row.summary.rmseStar.mean
                                                     : std::numeric_limits<double>::quiet_NaN();
        rows.push_back(std::move(row));
    }
    return rows;
}

BootstrapTable bootstrap_stability(const GroupedData& data, const std::vector<std::size_t>& potentialSet,
                                   const std::vector<double>& lambdaGrid, std::size_t B, std::uint64_t seed,
                                   const PathConfig& config) {
    if (B == 0) throw Error(ErrorCode::InvalidConfig, "B must be at least 1");
    if (data.T() == 0) throw Error(ErrorCode::InvalidConfig, "cannot bootstrap an empty dataset");
    BootstrapTable table;
    table.lambdas = lambdaGrid;
    table.nodes = potentialSet;
    table.B = B;
    const auto L = static_cast<Eigen::Index>(lambdaGrid.size());
    const auto P = static_cast<Eigen::Index>(potentialSet.size());
    std::vector<Matrix> hits(B, Matrix::Zero(L, P));
    parallel_for(B, config.fit.threads, [&](std::size_t b) {
        try {
            Rng rng = make_stream(seed, {b});
            std::vector<std::size_t> rows(data.T());
            for (auto& t : rows) t = static_cast<std::size_t>(uniform_index(rng, data.T()));
            const GroupedData sample = data.subset(rows);
            PathConfig pc = config;
            pc.fit.seed = make_stream(seed, {b, 2})();
            pc.fit.threads = 1;
            const SelectionPath path = lambda_path(sample, potentialSet, lambdaGrid, pc);
            for (Eigen::Index l = 0; l < L; ++l)
                for (auto node : path.entries[static_cast<std::size_t>(l)].fit.selectedSet)
                    for (Eigen::Index c = 0; c < P; ++c)
                        if (potentialSet[static_cast<std::size_t>(c)] == node) hits[b](l, c) = 1.0;
        } catch (const Error& e) {
            throw annotate(e, "bootstrap sample", b);
        }
    });
    table.proportions = Matrix::Zero(L, P);
    for (const auto& h : hits) table.proportions += h;
    table.proportions /= static_cast<double>(B);
    return table;
}

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

std::string estimation_csv(const std::vector<ReplicateSummary>& rows) {
    std::ostringstream os;
    os << "variant,nL,n,T,alpha,R,mislabel,mislabel_se,rmse,rmse_se,rmse_star,rmse_star_se,"
          "rmse_weighted,rmse_star_weighted\n";
    for (const auto& r : rows)
        os << to_string(r.spec.variant) << ',' << r.spec.nL << ',' << r.spec.n << ',' << r.spec.T << ','
           << num(r.spec.alpha) << ',' << r.R << ',' << num(r.mislabel.mean) << ',' << num(r.mislabel.se)
           << ',' << num(r.rmse.mean) << ',' << num(r.rmse.se) << ',' << num(r.rmseStar.mean) << ','
           << num(r.rmseStar.se) << ',' << num(r.rmseWeighted.mean) << ',' << num(r.rmseStarWeighted.mean)
           << '\n';
    return os.str();
}

std::string selection_csv(const std::vector<SelectionSummary>& rows) {
    std::ostringstream os;
    os << "variant,nL,n,T,M,R,criterion,TPR,TPR_se,FPR,FPR_se\n";
    for (const auto& r : rows) {
        const std::string head = std::string(to_string(r.spec.variant)) + ',' + std::to_string(r.spec.nL) + ',' +
                                 std::to_string(r.spec.n) + ',' + std::to_string(r.spec.T) + ',' +
                                 std::to_string(r.spec.M) + ',' + std::to_string(r.R) + ',';
        os << head << "AIC," << num(r.aicTPR.mean) << ',' << num(r.aicTPR.se) << ',' << num(r.aicFPR.mean)
           << ',' << num(r.aicFPR.se) << '\n';
        os << head << "BIC," << num(r.bicTPR.mean) << ',' << num(r.bicTPR.se) << ',' << num(r.bicFPR.mean)
           << ',' << num(r.bicFPR.se) << '\n';
    }
    return os.str();
}

std::string sparsity_csv(const std::vector<SparsityRow>& rows) {
    std::ostringstream os;
    os << "variant,nL,n,T,alpha,R,rmse,rmse_se,rmse_star,rmse_star_se,ratio\n";
    for (const auto& r : rows) {
        const auto& s = r.summary;
        os << to_string(s.spec.variant) << ',' << s.spec.nL << ',' << s.spec.n << ',' << s.spec.T << ','
           << num(r.alpha) << ',' << s.R << ',' << num(s.rmse.mean) << ',' << num(s.rmse.se) << ','
           << num(s.rmseStar.mean) << ',' << num(s.rmseStar.se) << ',' << num(r.ratio) << '\n';
    }
    return os.str();
}

std::string bootstrap_csv(const BootstrapTable& table) {
    std::ostringstream os;
    os << "lambda";
    for (auto node : table.nodes) os << ",v" << node + 1;
    os << '\n';
    for (Eigen::Index l = 0; l < table.proportions.rows(); ++l) {
        os << num(table.lambdas[static_cast<std::size_t>(l)]);
        for (Eigen::Index c = 0; c < table.proportions.cols(); ++c) os << ',' << num(table.proportions(l, c));
        os << '\n';
    }
    return os.str();
}

std::uint64_t config_hash(const std::string& canonical) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace grouphub
