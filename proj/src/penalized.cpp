#include "grouphub/penalized.hpp"

#include "grouphub/parallel.hpp"
#include "grouphub/rng.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

namespace grouphub {

void PenaltyConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw Error(ErrorCode::InvalidConfig, "lambda must be a finite nonnegative number");
    if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidConfig, "epsilon must be positive");
    if (!(zeroThreshold >= 0.0 && zeroThreshold <= 1e-4))
        throw Error(ErrorCode::InvalidConfig, "zeroThreshold must lie in [0, 1e-4]");
}

double penalty_term(const Vector& rho, const PenaltyConfig& penalty, std::size_t T) {
    double s = 0.0;
    for (Eigen::Index k = 1; k < rho.size(); ++k) s += std::log1p(rho[k] / penalty.epsilon);
    return static_cast<double>(T) * penalty.lambda * s;
}

double penalized_loglik(const HubModelParams& params, const GroupedData& data,
                        const PenaltyConfig& penalty) {
    if (params.variant != Variant::WithNull)
        throw Error(ErrorCode::InvalidParams, "penalized likelihood requires the null-component model");
    return log_likelihood(params, data) - penalty_term(params.rho, penalty, data.T());
}

RhoObjective::RhoObjective(const SparseLogTable& logDensity, const PenaltyConfig& penalty)
    : K_(logDensity.K), T_(logDensity.T()), penalty_(penalty) {
    offsets_.assign(1, 0);
    offsets_.reserve(T_ + 1);
    for (std::size_t t = 0; t < T_; ++t) {
        auto rows = logDensity.rows(t);
        auto vals = logDensity.values(t);
        double m = kNegInf;
        for (double v : vals) m = std::max(m, v);
        if (m == kNegInf) {
            std::ostringstream os;
            os << "group " << t + 1 << " is infeasible under every component";
            throw Error(ErrorCode::NonFiniteObjective, os.str());
        }
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (vals[i] == kNegInf) continue;
            cols_.push_back(rows[i]);
            w_.push_back(std::exp(vals[i] - m));
        }
        offset_ += m;
        offsets_.push_back(cols_.size());
    }
}

double RhoObjective::value(const Vector& rho) const {
    double s = offset_;
    for (std::size_t t = 0; t < T_; ++t) {
        double mix = 0.0;
        for (std::size_t i = offsets_[t]; i < offsets_[t + 1]; ++i) mix += rho[cols_[i]] * w_[i];
        if (!(mix > 0.0)) return kNegInf;
        s += std::log(mix);
    }
    return s - penalty_term(rho, penalty_, T_);
}

Vector RhoObjective::gradient(const Vector& rho) const {
    Vector g = Vector::Zero(static_cast<Eigen::Index>(K_));
    for (std::size_t t = 0; t < T_; ++t) {
        double mix = 0.0;
        for (std::size_t i = offsets_[t]; i < offsets_[t + 1]; ++i) mix += rho[cols_[i]] * w_[i];
        for (std::size_t i = offsets_[t]; i < offsets_[t + 1]; ++i) g[cols_[i]] += w_[i] / mix;
    }
    const double tl = static_cast<double>(T_) * penalty_.lambda;
    for (Eigen::Index k = 1; k < g.size(); ++k) g[k] -= tl / (penalty_.epsilon + rho[k]);
    return g;
}

Matrix RhoObjective::hessian(const Vector& rho) const {
    const auto K = static_cast<Eigen::Index>(K_);
    Matrix H = Matrix::Zero(K, K);
    for (std::size_t t = 0; t < T_; ++t) {
        double mix = 0.0;
        for (std::size_t i = offsets_[t]; i < offsets_[t + 1]; ++i) mix += rho[cols_[i]] * w_[i];
        const double inv2 = 1.0 / (mix * mix);
        for (std::size_t a = offsets_[t]; a < offsets_[t + 1]; ++a)
            for (std::size_t b = offsets_[t]; b < offsets_[t + 1]; ++b)
                H(cols_[a], cols_[b]) -= w_[a] * w_[b] * inv2;
    }
    const double tl = static_cast<double>(T_) * penalty_.lambda;
    for (Eigen::Index k = 1; k < K; ++k) {
        const double e = penalty_.epsilon + rho[k];
        H(k, k) += tl / (e * e);
    }
    return H;
}

double RhoObjective::stationarity(const Vector& rho) const {
    const Vector g = gradient(rho) / static_cast<double>(T_);
    const double mu = rho.dot(g);
    double s = 0.0;
    for (Eigen::Index k = 0; k < g.size(); ++k) {
        const double d = g[k] - mu;
        if (rho[k] > penalty_.zeroThreshold || d > 0.0) s += d * d;
    }
    return std::sqrt(s);
}

Vector RhoObjective::responsibility_mass(const Vector& rho) const {
    Vector S = Vector::Zero(static_cast<Eigen::Index>(K_));
    for (std::size_t t = 0; t < T_; ++t) {
        double mix = 0.0;
        for (std::size_t i = offsets_[t]; i < offsets_[t + 1]; ++i) mix += rho[cols_[i]] * w_[i];
        for (std::size_t i = offsets_[t]; i < offsets_[t + 1]; ++i)
            S[cols_[i]] += rho[cols_[i]] * w_[i] / mix;
    }
    return S;
}

double RhoObjective::value_and_mass(const Vector& rho, Vector& S) const {
    S = Vector::Zero(static_cast<Eigen::Index>(K_));
    double s = offset_;
    for (std::size_t t = 0; t < T_; ++t) {
        double mix = 0.0;
        for (std::size_t i = offsets_[t]; i < offsets_[t + 1]; ++i) mix += rho[cols_[i]] * w_[i];
        if (!(mix > 0.0)) return kNegInf;
        s += std::log(mix);
        const double inv = 1.0 / mix;
        for (std::size_t i = offsets_[t]; i < offsets_[t + 1]; ++i) S[cols_[i]] += rho[cols_[i]] * w_[i] * inv;
    }
    return s - penalty_term(rho, penalty_, T_);
}

namespace {

constexpr std::size_t kMaxMinorize = 5000;
constexpr std::size_t kMaxPolish = 200;
constexpr double kStationarityTarget = 1e-10;

void renormalize(Vector& rho) {
    for (auto& r : rho) r = std::max(r, 0.0);
    rho /= rho.sum();
}

class RhoSolver {
public:
    RhoSolver(const RhoObjective& obj, const PenaltyConfig& penalty) : obj_(obj), penalty_(penalty) {}

    // Minorize-maximize update: the concave penalty is linearised at rho, and
    // the resulting weighted problem has a closed form up to the multiplier mu.
    Vector minorize_step(const Vector& rho, const Vector& S) const {
        const auto K = S.size();
        const double tl = static_cast<double>(obj_.T()) * penalty_.lambda;
        Vector c = Vector::Zero(K);
        for (Eigen::Index k = 1; k < K; ++k) c[k] = tl / (penalty_.epsilon + rho[k]);
        double lo = -std::numeric_limits<double>::infinity();
        for (Eigen::Index k = 0; k < K; ++k)
            if (S[k] > 0.0) lo = std::max(lo, -c[k]);
        double hi = S.sum();
        auto phi = [&](double mu, double& dphi) {
            double v = -1.0;
            dphi = 0.0;
            for (Eigen::Index k = 0; k < K; ++k) {
                if (!(S[k] > 0.0)) continue;
                const double q = 1.0 / (c[k] + mu);
                v += S[k] * q;
                dphi -= S[k] * q * q;
            }
            return v;
        };
        double mu = hi, d = 0.0;
        for (int it = 0; it < 200; ++it) {
            const double f = phi(mu, d);
            if (std::abs(f) <= 1e-15) break;
            if (f > 0.0)
                lo = mu;
            else
                hi = mu;
            if (hi - lo <= 1e-15 * (1.0 + std::abs(mu))) break;
            double next = mu - f / d;
            if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
            mu = next;
        }
        Vector out = Vector::Zero(K);
        for (Eigen::Index k = 0; k < K; ++k)
            if (S[k] > 0.0) out[k] = S[k] / (c[k] + mu);
        renormalize(out);
        return out;
    }

    // One ascent step on the face of weights strictly above the threshold:
    // Newton when the reduced Hessian is negative definite, otherwise
    // projected gradient. Weights sitting at the threshold stay put.
    bool face_step(Vector& rho, double& f) const {
        std::vector<Eigen::Index> F;
        const double thr = penalty_.zeroThreshold;
        for (Eigen::Index k = 0; k < rho.size(); ++k)
            if (rho[k] > thr) F.push_back(k);
        const auto m = static_cast<Eigen::Index>(F.size());
        if (m <= 1) return false;
        const Vector g = obj_.gradient(rho);
        const Matrix H = obj_.hessian(rho);
        Vector gF(m);
        Matrix HF(m, m);
        for (Eigen::Index a = 0; a < m; ++a) {
            gF[a] = g[F[a]];
            for (Eigen::Index b = 0; b < m; ++b) HF(a, b) = H(F[a], F[b]);
        }
        Matrix Z = Matrix::Zero(m, m - 1);
        for (Eigen::Index i = 0; i < m - 1; ++i) {
            Z(i, i) = 1.0;
            Z(m - 1, i) = -1.0;
        }
        const Vector r = Z.transpose() * gF;
        const Matrix negR = -(Z.transpose() * HF * Z);
        Eigen::LLT<Matrix> llt(negR);
        Vector d;
        bool newton = false;
        if (llt.info() == Eigen::Success) {
            d = Z * llt.solve(r);
            newton = d.allFinite() && gF.dot(d) > 0.0;
        }
        if (!newton) d = (gF.array() - gF.mean()).matrix();
        const double slope = gF.dot(d);
        if (!(slope > 0.0) || !d.allFinite()) return false;

        double alphaMax = std::numeric_limits<double>::infinity();
        Eigen::Index blocking = -1;
        for (Eigen::Index a = 0; a < m; ++a)
            if (d[a] < 0.0) {
                const double lim = (rho[F[a]] - thr) / -d[a];
                if (lim < alphaMax) {
                    alphaMax = lim;
                    blocking = a;
                }
            }
        double alpha = newton ? 1.0 : 0.1 / d.cwiseAbs().maxCoeff();
        alpha = std::min(alpha, alphaMax);
        for (int ls = 0; ls < 60; ++ls) {
            Vector trial = rho;
            for (Eigen::Index a = 0; a < m; ++a) trial[F[a]] += alpha * d[a];
            if (alpha == alphaMax && blocking >= 0) trial[F[blocking]] = thr;
            renormalize(trial);
            const double ft = obj_.value(trial);
            if (ft >= f + 1e-4 * alpha * slope && ft > f) {
                rho = trial;
                f = ft;
                return true;
            }
            alpha *= 0.5;
        }
        return false;
    }

    // Zeroes every weight in (0, threshold].
    bool snap(Vector& rho) const {
        bool any = false;
        for (auto& r : rho)
            if (r > 0.0 && r <= penalty_.zeroThreshold) {
                r = 0.0;
                any = true;
            }
        if (any) renormalize(rho);
        return any;
    }

    // Raises every weight in (0, threshold) to the threshold and rescales
    // the rest to keep the sum at one.
    void lift(Vector& rho) const {
        const double thr = penalty_.zeroThreshold;
        double pinned = 0.0, rest = 0.0;
        for (auto& r : rho)
            if (r > 0.0 && r < thr) {
                r = thr;
                pinned += thr;
            } else {
                rest += r;
            }
        const double scale = (1.0 - pinned) / rest;
        for (auto& r : rho)
            if (r > thr) r *= scale;
    }

    static bool has_small(const Vector& rho, double thr) {
        for (auto r : rho)
            if (r > 0.0 && r < thr) return true;
        return false;
    }

    std::size_t ascend(Vector& rho, double& f) const {
        std::size_t iters = 0;
        Vector S, Sn, Ss;
        if (f != kNegInf) f = obj_.value_and_mass(rho, S);
        for (std::size_t it = 0; it < kMaxMinorize && f != kNegInf; ++it, ++iters) {
            Vector next = minorize_step(rho, S);
            double fn;
            if (has_small(next, penalty_.zeroThreshold)) {
                // Weights may not rest strictly between zero and the
                // threshold: take whichever side scores better.
                Vector lifted = next;
                lift(lifted);
                snap(next);
                fn = obj_.value_and_mass(next, Sn);
                const double fl = obj_.value_and_mass(lifted, Ss);
                if (fl > fn) {
                    next = lifted;
                    fn = fl;
                    Sn.swap(Ss);
                }
            } else {
                fn = obj_.value_and_mass(next, Sn);
            }
            if (!(fn >= f)) break;
            const double change = relative_change(f, fn);
            rho = next;
            f = fn;
            S.swap(Sn);
            if (change <= 1e-13) break;
            if (it % 16 == 15 && obj_.stationarity(rho) <= 1e-3) break;
        }
        for (std::size_t it = 0; it < kMaxPolish; ++it, ++iters) {
            if (obj_.stationarity(rho) <= kStationarityTarget) break;
            if (!face_step(rho, f)) break;
        }
        return iters;
    }

private:
    const RhoObjective& obj_;
    const PenaltyConfig& penalty_;
};

SparseLogTable dense_to_sparse(const Matrix& logDensity) {
    SparseLogTable table;
    table.K = static_cast<std::size_t>(logDensity.cols());
    table.offsets.assign(1, 0);
    for (Eigen::Index t = 0; t < logDensity.rows(); ++t) {
        for (Eigen::Index k = 0; k < logDensity.cols(); ++k) {
            const double v = logDensity(t, k);
            if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
                throw Error(ErrorCode::NonFiniteObjective, "log-density table holds NaN or +inf");
            if (v == kNegInf) continue;
            table.cols.push_back(static_cast<std::uint32_t>(k));
            table.vals.push_back(v);
        }
        table.offsets.push_back(table.cols.size());
    }
    return table;
}

}  // namespace

RhoSolution solve_rho_subproblem(const SparseLogTable& logDensity, const PenaltyConfig& penalty,
                                 const Vector& rhoInit) {
    penalty.validate();
    if (rhoInit.size() != static_cast<Eigen::Index>(logDensity.K))
        throw Error(ErrorCode::DimensionMismatch, "rhoInit length does not match the table");
    if (!rhoInit.allFinite() || !(rhoInit.maxCoeff() > 0.0))
        throw Error(ErrorCode::InvalidParams, "rhoInit must be a finite point of the simplex");
    const RhoObjective obj(logDensity, penalty);
    const RhoSolver solver(obj, penalty);

    Vector init = rhoInit;
    renormalize(init);
    const double fInit = obj.value(init);

    RhoSolution sol;
    sol.initialObjective = fInit;
    Vector rho = init;
    double f = fInit;
    if (f == kNegInf) {
        rho = Vector::Constant(init.size(), 1.0 / static_cast<double>(init.size()));
        f = obj.value(rho);
    }
    sol.iterations = solver.ascend(rho, f);

    // Weights held at the threshold get a joint chance to drop to zero; the
    // drop is kept only if it pays after re-optimising.
    for (std::size_t round = 0; round < static_cast<std::size_t>(rho.size()); ++round) {
        Vector snapped = rho;
        if (!solver.snap(snapped)) break;
        double fs = obj.value(snapped);
        sol.iterations += solver.ascend(snapped, fs);
        if (!(fs >= f)) break;
        rho = snapped;
        f = fs;
    }

    // The objective is not concave, so a whole component can be worth more
    // dead than at its local optimum: take the best single drop while one
    // raises the objective, re-optimising after each.
    for (std::size_t round = 0; round < static_cast<std::size_t>(rho.size()); ++round) {
        Eigen::Index drop = -1;
        double fBest = f;
        for (Eigen::Index k = 0; k < rho.size(); ++k) {
            if (!(rho[k] > 0.0) || rho[k] >= 1.0) continue;
            Vector trial = rho;
            trial[k] = 0.0;
            renormalize(trial);
            const double ft = obj.value(trial);
            if (ft > fBest) {
                fBest = ft;
                drop = k;
            }
        }
        if (drop < 0) break;
        rho[drop] = 0.0;
        renormalize(rho);
        f = fBest;
        sol.iterations += solver.ascend(rho, f);
    }

    // Components at zero whose gradient still points inward get one chance
    // to re-enter; the move is kept only if it improves the objective.
    for (std::size_t round = 0; round < static_cast<std::size_t>(rho.size()); ++round) {
        const Vector g = obj.gradient(rho) / static_cast<double>(obj.T());
        const double mu = rho.dot(g);
        Eigen::Index enter = -1;
        double best = kStationarityTarget;
        for (Eigen::Index k = 0; k < rho.size(); ++k)
            if (rho[k] == 0.0 && g[k] - mu > best) {
                best = g[k] - mu;
                enter = k;
            }
        if (enter < 0) break;
        Vector trial = rho * (1.0 - 1e-3);
        trial[enter] += 1e-3;
        double ft = obj.value(trial);
        sol.iterations += solver.ascend(trial, ft);
        if (!(ft > f) || trial[enter] == 0.0) break;
        rho = trial;
        f = ft;
    }

    if (!(f >= fInit)) {
        rho = init;
        f = fInit;
    }
    sol.rho = rho;
    sol.objective = f;
    sol.stationarity = obj.stationarity(rho);
    return sol;
}

RhoSolution solve_rho_subproblem(const Matrix& logDensity, const PenaltyConfig& penalty,
                                 const Vector& rhoInit) {
    return solve_rho_subproblem(dense_to_sparse(logDensity), penalty, rhoInit);
}

namespace {

void require_potential_set(const GroupedData& data, const std::vector<std::size_t>& potentialSet) {
    if (potentialSet.size() >= data.n())
        throw Error(ErrorCode::InvalidParams, "hub set must be smaller than node set");
    for (auto h : potentialSet)
        if (h >= data.n()) throw Error(ErrorCode::IndexOutOfRange, "potential hub index out of range");
}

void finish_fit(SparseFit& fit, const PenaltyConfig& penalty) {
    fit.lambda = penalty.lambda;
    fit.selectedSet.clear();
    for (std::size_t r = 1; r < fit.params.num_components(); ++r)
        if (fit.params.rho[static_cast<Eigen::Index>(r)] != 0.0) fit.selectedSet.push_back(*fit.params.hub_node(r));
    std::sort(fit.selectedSet.begin(), fit.selectedSet.end());
}

}  // namespace

SparseFit run_modified_em(const GroupedData& data, HubModelParams start, const PenaltyConfig& penalty,
                          const FitConfig& config) {
    if (start.variant != Variant::WithNull)
        throw Error(ErrorCode::InvalidParams, "modified EM requires the null-component model");
    SparseFit fit;
    fit.params = std::move(start);
    SparsePosterior h;
    double ll = e_step_sparse(fit.params, data, h);
    double obj = ll - penalty_term(fit.params.rho, penalty, data.T());
    fit.trace.push_back(obj);
    const std::size_t K = fit.params.num_components();
    std::vector<std::uint8_t> active(K);
    for (std::size_t it = 0; it < config.maxIter; ++it) {
        m_step_sparse(data, h, config.probFloor, fit.params, false, true);
        for (std::size_t k = 0; k < K; ++k) active[k] = fit.params.rho[static_cast<Eigen::Index>(k)] > 0.0;
        const auto table = component_density_table(fit.params, data, active);
        fit.params.rho = solve_rho_subproblem(table, penalty, fit.params.rho).rho;
        ll = e_step_sparse(fit.params, data, h);
        const double next = ll - penalty_term(fit.params.rho, penalty, data.T());
        fit.trace.push_back(next);
        ++fit.iterations;
        const double change = relative_change(obj, next);
        obj = next;
        if (change <= config.relTol) {
            fit.converged = true;
            break;
        }
    }
    fit.logLik = ll;
    fit.penalizedObjective = obj;
    finish_fit(fit, penalty);
    return fit;
}

namespace {

// Moment start with a heavy background: the null row is the column mean over
// all groups and holds half the weight, so hub components only claim groups
// they explain clearly better.
HubModelParams background_start(const GroupedData& data, const std::vector<std::size_t>& potentialSet) {
    HubModelParams p = moment_start(data, potentialSet, Variant::WithNull);
    Vector means = Vector::Zero(static_cast<Eigen::Index>(data.n()));
    for (std::size_t t = 0; t < data.T(); ++t)
        for (auto j : data.members(t)) means[j] += 1.0;
    means /= static_cast<double>(data.T());
    for (Eigen::Index j = 0; j < means.size(); ++j) p.A(0, j) = std::clamp(means[j], 0.01, 0.99);
    const double hubMass = p.rho.tail(p.rho.size() - 1).sum();
    p.rho.tail(p.rho.size() - 1) *= 0.5 / hubMass;
    p.rho[0] = 0.5;
    return p;
}

// Runs every start (fresh seeds, the background start, then the optional warm
// start) and keeps the best penalised objective; ties go to the lowest index.
SparseFit best_of(const GroupedData& data, const std::vector<std::size_t>& potentialSet,
                  const PenaltyConfig& penalty, const FitConfig& config, std::size_t fresh,
                  const HubModelParams* warm) {
    const std::size_t moment = config.momentStart ? 1 : 0;
    const std::size_t total = fresh + moment + (warm ? 1 : 0);
    std::vector<std::optional<SparseFit>> runs(total);
    parallel_for(total, config.threads, [&](std::size_t r) {
        HubModelParams start = r < fresh ? init_params(potentialSet, Variant::WithNull, data.n(),
                                                       make_stream(config.seed, {r})())
                               : r < fresh + moment ? background_start(data, potentialSet)
                                                    : *warm;
        try {
            runs[r] = run_modified_em(data, std::move(start), penalty, config);
            runs[r]->restartIndex = r;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ZeroProbabilityGroup && e.code() != ErrorCode::NonFiniteObjective)
                throw;
        }
    });
    std::optional<std::size_t> best;
    for (std::size_t r = 0; r < total; ++r)
        if (runs[r] && (!best || runs[r]->penalizedObjective > runs[*best]->penalizedObjective)) best = r;
    if (!best)
        throw Error(ErrorCode::AllRestartsFailed,
                    "every restart hit a group with zero probability under the model");
    return std::move(*runs[*best]);
}

}  // namespace

SparseFit modified_em(const GroupedData& data, const std::vector<std::size_t>& potentialSet,
                      const PenaltyConfig& penalty, const FitConfig& config) {
    config.validate();
    penalty.validate();
    require_valid(data, Variant::WithNull);
    require_potential_set(data, potentialSet);
    return best_of(data, potentialSet, penalty, config, config.numRestarts, nullptr);
}

double default_dof(std::size_t selected, std::size_t n) {
    const auto v = static_cast<double>(selected);
    return v * static_cast<double>(n - 1) + static_cast<double>(n) + v;
}

Criteria information_criteria(const SparseFit& fit, const GroupedData& data, const DofFunction& dof) {
    Criteria c;
    c.k = dof(fit.selectedSet.size(), data.n());
    c.AIC = -2.0 * fit.logLik + 2.0 * c.k;
    c.BIC = -2.0 * fit.logLik + c.k * std::log(static_cast<double>(data.T()));
    return c;
}

std::vector<double> SelectionPath::nestedness_violations() const {
    std::vector<double> out;
    for (std::size_t i = 1; i < entries.size(); ++i) {
        const auto& prev = entries[i - 1].fit.selectedSet;
        const auto& cur = entries[i].fit.selectedSet;
        if (!std::includes(prev.begin(), prev.end(), cur.begin(), cur.end())) out.push_back(entries[i].lambda);
    }
    return out;
}

SelectionPath lambda_path(const GroupedData& data, const std::vector<std::size_t>& potentialSet,
                          const std::vector<double>& lambdaGrid, const PathConfig& config) {
    config.fit.validate();
    require_valid(data, Variant::WithNull);
    require_potential_set(data, potentialSet);
    if (lambdaGrid.empty()) throw Error(ErrorCode::InvalidConfig, "lambda grid is empty");
    for (std::size_t i = 0; i < lambdaGrid.size(); ++i) {
        if (!(lambdaGrid[i] >= 0.0)) throw Error(ErrorCode::InvalidConfig, "lambda grid must be nonnegative");
        if (i > 0 && !(lambdaGrid[i] > lambdaGrid[i - 1]))
            throw Error(ErrorCode::InvalidConfig, "lambda grid must be strictly increasing");
    }
    SelectionPath path;
    for (std::size_t i = 0; i < lambdaGrid.size(); ++i) {
        PenaltyConfig pen = config.penalty;
        pen.lambda = lambdaGrid[i];
        pen.validate();
        PathEntry entry;
        entry.lambda = pen.lambda;
        try {
            if (i == 0)
                entry.fit = best_of(data, potentialSet, pen, config.fit, config.fit.numRestarts, nullptr);
            else
                entry.fit = best_of(data, potentialSet, pen, config.fit, config.freshRestarts,
                                    &path.entries.back().fit.params);
        } catch (const Error& e) {
            std::ostringstream os;
            os << "lambda=" << pen.lambda << ": " << e.what();
            throw Error(e.code(), os.str());
        }
        entry.criteria = information_criteria(entry.fit, data, config.dof);
        path.entries.push_back(std::move(entry));
    }
    for (std::size_t i = 0; i < path.entries.size(); ++i) {
        if (path.entries[i].criteria.AIC <= path.entries[path.chosenByAIC].criteria.AIC) path.chosenByAIC = i;
        if (path.entries[i].criteria.BIC <= path.entries[path.chosenByBIC].criteria.BIC) path.chosenByBIC = i;
    }
    return path;
}

double find_extinction_lambda(const GroupedData& data, const std::vector<std::size_t>& potentialSet,
                              const PathConfig& config, double start) {
    if (!(start > 0.0)) throw Error(ErrorCode::InvalidConfig, "extinction search must start above 0");
    PenaltyConfig pen = config.penalty;
    const HubModelParams* warm = nullptr;
    SparseFit prev;
    for (int step = 0; step < 64; ++step) {
        pen.lambda = start * std::ldexp(1.0, step);
        config.fit.validate();
        pen.validate();
        require_valid(data, Variant::WithNull);
        require_potential_set(data, potentialSet);
        SparseFit fit = best_of(data, potentialSet, pen, config.fit,
                                warm ? config.freshRestarts : config.fit.numRestarts, warm);
        if (fit.selectedSet.empty()) return pen.lambda;
        prev = std::move(fit);
        warm = &prev.params;
    }
    throw Error(ErrorCode::NonFiniteObjective, "selected set never became empty while doubling lambda");
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
    if (points == 0) throw Error(ErrorCode::InvalidConfig, "grid needs at least one point");
    if (!(lo > 0.0) || !(hi >= lo)) throw Error(ErrorCode::InvalidConfig, "log grid needs 0 < lo <= hi");
    if (points == 1 || hi == lo) return {lo};
    std::vector<double> g(points);
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < points; ++i)
        g[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

std::vector<double> parse_lambda_grid(const std::string& spec) {
    auto bad = [&] { return Error(ErrorCode::InvalidConfig, "lambda grid must look like start:step:end"); };
    std::vector<double> parts;
    std::size_t pos = 0;
    while (true) {
        const auto next = spec.find(':', pos);
        const std::string tok = spec.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw bad();
        } catch (const Error&) {
            throw;
        } catch (...) {
            throw bad();
        }
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    if (parts.size() == 1) {
        if (!(parts[0] >= 0.0)) throw bad();
        return parts;
    }
    if (parts.size() != 3) throw bad();
    const double a = parts[0], s = parts[1], b = parts[2];
    if (!(a >= 0.0) || !(s > 0.0) || !(b >= a)) throw bad();
    std::vector<double> out;
    for (std::size_t i = 0;; ++i) {
        const double v = a + s * static_cast<double>(i);
        if (v > b + 0.5 * s) break;
        out.push_back(v);
    }
    return out;
}

RateResult tpr_fpr(const std::vector<std::size_t>& trueSet, const std::vector<std::size_t>& selectedSet,
                   std::size_t M) {
    if (trueSet.empty()) throw Error(ErrorCode::EmptyTrueSet, "true hub set is empty");
    const std::set<std::size_t> truth(trueSet.begin(), trueSet.end());
    const std::set<std::size_t> chosen(selectedSet.begin(), selectedSet.end());
    if (truth.size() > M) throw Error(ErrorCode::InvalidParams, "true hub set larger than potential set");
    std::size_t tp = 0, fp = 0;
    for (auto s : chosen) (truth.count(s) ? tp : fp) += 1;
    RateResult r;
    r.TPR = static_cast<double>(tp) / static_cast<double>(truth.size());
    const std::size_t negatives = M - truth.size();
    r.FPR = negatives ? static_cast<double>(fp) / static_cast<double>(negatives) : 0.0;
    return r;
}

}  // namespace grouphub
