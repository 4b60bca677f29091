// grouphub command-line interface.

#include "grouphub/em.hpp"
#include "grouphub/experiments.hpp"
#include "grouphub/identifiability.hpp"
#include "grouphub/io.hpp"
#include "grouphub/model.hpp"
#include "grouphub/oracle.hpp"
#include "grouphub/penalized.hpp"
#include "grouphub/profile.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

using namespace grouphub;

namespace {

enum Exit { kOk = 0, kUsage = 2, kIo = 3, kNumerical = 4 };

int exit_code(ErrorCode c) {
    switch (c) {
        case ErrorCode::Io: return kIo;
        case ErrorCode::AllRestartsFailed:
        case ErrorCode::NonFiniteObjective:
        case ErrorCode::ZeroProbabilityGroup: return kNumerical;
        default: return kUsage;
    }
}

struct Globals {
    std::uint64_t seed = 42;
    std::size_t threads = 0;
    std::string format = "csv";
};

// "1-10,15" -> {0..9, 14}
std::vector<std::size_t> parse_nodes(const std::string& s) {
    std::set<std::size_t> out;
    std::stringstream ss(s);
    std::string tok;
    auto num = [&](const std::string& t) {
        try {
            std::size_t used = 0;
            const long v = std::stol(t, &used);
            if (used != t.size() || v < 1) throw 0;
            return static_cast<std::size_t>(v);
        } catch (...) {
            throw Error(ErrorCode::Parse, "bad node id '" + t + "' (1-based ids, ranges like 1-10)");
        }
    };
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        const auto dash = tok.find('-');
        if (dash == std::string::npos) {
            out.insert(num(tok) - 1);
        } else {
            const auto a = num(tok.substr(0, dash)), b = num(tok.substr(dash + 1));
            if (b < a) throw Error(ErrorCode::Parse, "empty node range '" + tok + "'");
            for (auto v = a; v <= b; ++v) out.insert(v - 1);
        }
    }
    return {out.begin(), out.end()};
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty())
        std::cout << text;
    else
        write_text(path, text);
}

std::string as_format(const std::string& csv, const Globals& g) {
    return g.format == "json" ? csv_to_json(csv).dump(2) + "\n" : csv;
}

FitConfig fit_config(const Globals& g, std::size_t restarts, std::size_t maxIter, double relTol, double floor) {
    FitConfig c;
    c.seed = g.seed;
    c.threads = g.threads;
    c.numRestarts = restarts;
    c.maxIter = maxIter;
    c.relTol = relTol;
    c.probFloor = floor;
    return c;
}

// key+number tokens, e.g. nL10,n100,T500,M80,alpha0.5
ScenarioSpec parse_cell(const std::string& cell, ScenarioSpec spec) {
    std::stringstream ss(cell);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t k = 0;
        while (k < tok.size() && std::isalpha(static_cast<unsigned char>(tok[k]))) ++k;
        const std::string key = tok.substr(0, k), val = tok.substr(k);
        try {
            if (key == "nL")
                spec.nL = std::stoul(val);
            else if (key == "n")
                spec.n = std::stoul(val);
            else if (key == "T")
                spec.T = std::stoul(val);
            else if (key == "M")
                spec.M = std::stoul(val);
            else if (key == "alpha")
                spec.alpha = std::stod(val);
            else if (key == "rho0")
                spec.rho0 = std::stod(val);
            else
                throw Error(ErrorCode::Parse, "unknown cell key '" + key + "'");
        } catch (const Error&) {
            throw;
        } catch (...) {
            throw Error(ErrorCode::Parse, "bad cell token '" + tok + "'");
        }
    }
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"grouphub: hub models for grouped co-occurrence data"};
    app.require_subcommand(1);
    Globals g;
    std::optional<std::size_t> threadsFlag;
    app.add_option("--seed", g.seed, "random seed")->capture_default_str();
    app.add_option("--threads", threadsFlag, "worker threads (default: GROUPHUB_THREADS or all cores)");
    app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    app.fallthrough();

    // simulate
    auto* sim = app.add_subcommand("simulate", "draw a scenario and grouped data");
    std::string simVariant = "asymmetric", simOut, simTruth;
    ScenarioSpec simSpec;
    sim->add_option("--variant", simVariant)->check(CLI::IsMember({"asymmetric", "with_null"}));
    sim->add_option("--n-l", simSpec.nL)->capture_default_str();
    sim->add_option("--n", simSpec.n)->capture_default_str();
    sim->add_option("--t", simSpec.T)->capture_default_str();
    sim->add_option("--alpha", simSpec.alpha)->capture_default_str();
    sim->add_option("--rho0", simSpec.rho0)->capture_default_str();
    sim->add_option("--out", simOut, "grouped data CSV")->required();
    sim->add_option("--truth", simTruth, "truth JSON (params, labels, follower sets)")->required();

    // fit
    auto* fit = app.add_subcommand("fit", "fit a hub model with a known hub set");
    std::string fitData, fitHubs, fitVariant = "asymmetric", fitOut, fitPost, fitLabels, fitMethod = "em";
    std::size_t restarts = 20, maxIter = 1000;
    double relTol = 1e-8, probFloor = 1e-10;
    fit->add_option("--data", fitData)->required();
    fit->add_option("--hubs", fitHubs, "1-based hub ids, e.g. 1-10")->required();
    fit->add_option("--variant", fitVariant)->check(CLI::IsMember({"asymmetric", "with_null"}));
    fit->add_option("--method", fitMethod)->check(CLI::IsMember({"em", "exhaustive"}))->capture_default_str();
    fit->add_option("--restarts", restarts)->capture_default_str();
    fit->add_option("--max-iter", maxIter)->capture_default_str();
    fit->add_option("--rel-tol", relTol)->capture_default_str();
    fit->add_option("--prob-floor", probFloor)->capture_default_str();
    fit->add_option("--out", fitOut, "FitResult JSON (stdout if omitted)");
    fit->add_option("--posterior-out", fitPost);
    fit->add_option("--labels-out", fitLabels);

    // select
    auto* sel = app.add_subcommand("select", "hub-set selection along a lambda path");
    std::string selData, selPotential, selGrid, selOut, selAicOut, selBicOut;
    bool selAuto = false;
    std::size_t selFresh = 20;
    PenaltyConfig selPenalty;
    sel->add_option("--data", selData)->required();
    sel->add_option("--potential", selPotential, "1-based potential hub ids")->required();
    auto* gridOpt = sel->add_option("--lambda-grid", selGrid, "start:step:end");
    sel->add_flag("--lambda-auto", selAuto, "20 log-spaced points up to the extinction point")->excludes(gridOpt);
    sel->add_option("--restarts", restarts)->capture_default_str();
    sel->add_option("--fresh-restarts", selFresh, "fresh starts per later lambda")->capture_default_str();
    sel->add_option("--max-iter", maxIter)->capture_default_str();
    sel->add_option("--rel-tol", relTol)->capture_default_str();
    sel->add_option("--epsilon", selPenalty.epsilon)->capture_default_str();
    sel->add_option("--zero-threshold", selPenalty.zeroThreshold)->capture_default_str();
    sel->add_option("--out", selOut, "path table (stdout if omitted)");
    sel->add_option("--aic-fit-out", selAicOut);
    sel->add_option("--bic-fit-out", selBicOut);

    // bootstrap
    auto* boot = app.add_subcommand("bootstrap", "bootstrap selection proportions");
    std::string bootData, bootPotential, bootGrid, bootOut;
    std::size_t bootB = 50, bootFresh = 5;
    boot->add_option("--data", bootData)->required();
    boot->add_option("--potential", bootPotential)->required();
    boot->add_option("--lambda-grid", bootGrid)->required();
    boot->add_option("--b", bootB)->capture_default_str();
    boot->add_option("--restarts", restarts)->capture_default_str();
    boot->add_option("--fresh-restarts", bootFresh)->capture_default_str();
    boot->add_option("--out", bootOut);

    // replicate
    auto* rep = app.add_subcommand("replicate", "Monte Carlo tables");
    std::string repTable, repCell, repOut, repGrid, repAlphas = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0",
                                                      repVariant = "asymmetric";
    std::optional<std::size_t> repR;
    bool paperScale = false;
    std::size_t repRestarts = 20, repFresh = 2;
    rep->add_option("--table", repTable)->required()->check(CLI::IsMember({"1", "2", "3", "sparsity"}));
    rep->add_option("--cell", repCell, "e.g. nL10,n100,T500 (M80 for table 3)");
    rep->add_option("--r", repR, "replicates");
    rep->add_flag("--paper-scale", paperScale, "R = 1000");
    rep->add_option("--restarts", repRestarts)->capture_default_str();
    rep->add_option("--fresh-restarts", repFresh, "table 3: fresh starts per later lambda")->capture_default_str();
    rep->add_option("--lambda-grid", repGrid, "table 3 grid (start:step:end)");
    rep->add_option("--alphas", repAlphas, "sparsity sweep values")->capture_default_str();
    rep->add_option("--variant", repVariant, "sparsity sweep variant")
        ->check(CLI::IsMember({"asymmetric", "with_null"}));
    rep->add_option("--out", repOut);

    // check
    auto* chk = app.add_subcommand("check", "identifiability and assumption report");
    std::string chkParams, chkFollowers, chkOut;
    bool chkAssumptions = false;
    chk->add_option("--params", chkParams)->required();
    chk->add_option("--followers", chkFollowers, "1-based follower-only candidates for condition (iv')");
    chk->add_flag("--assumptions", chkAssumptions, "H1-H4 profile (needs labels and vsets in the file)");
    chk->add_option("--out", chkOut, "JSON report");

    // oracle
    auto* orc = app.add_subcommand("oracle", "exact single-observation pmf");
    std::string orcA, orcB, orcOut;
    orc->add_option("--params", orcA)->required();
    orc->add_option("--params2", orcB, "second params file: print total variation distance");
    orc->add_option("--out", orcOut);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }
    g.threads = threadsFlag.value_or(0);

    try {
        if (*sim) {
            simSpec.variant = parse_variant(simVariant);
            simSpec.seed = g.seed;
            const Scenario sc = build_scenario(simSpec);
            auto [data, z] = generate(sc.params, simSpec.T, g.seed);
            write_text(simOut, groups_csv(data));
            Json truth = params_to_json(sc.params);
            truth["labels"] = labels_to_json(z);
            Json vs = Json::array();
            for (const auto& v : sc.Vsets) {
                Json row = Json::array();
                for (auto j : v) row.push_back(j + 1);
                vs.push_back(row);
            }
            truth["vsets"] = vs;
            write_text(simTruth, truth.dump(2) + "\n");
            std::cout << "simulated T=" << data.T() << " n=" << data.n() << " variant=" << simVariant
                      << " seed=" << g.seed << "\n";
        } else if (*fit) {
            const GroupedData data = read_groups_csv(fitData);
            const Variant v = parse_variant(fitVariant);
            const auto hubs = parse_nodes(fitHubs);
            if (fitMethod == "exhaustive") {
                require_valid(data, v);
                const auto search = exhaustive_profile_search(data, hubs, v);
                emit(search_to_json(search, data, hubs, v).dump(2) + "\n", fitOut);
                if (!fitLabels.empty()) write_text(fitLabels, labels_csv(search.zHat));
            } else {
                const FitResult res = fit_em(data, hubs, v, fit_config(g, restarts, maxIter, relTol, probFloor));
                emit(fit_to_json(res).dump(2) + "\n", fitOut);
                if (!fitPost.empty()) write_text(fitPost, as_format(posterior_csv(res.posterior), g));
                if (!fitLabels.empty())
                    write_text(fitLabels, as_format(labels_csv(map_labels(res.posterior, v)), g));
            }
        } else if (*sel) {
            const GroupedData data = read_groups_csv(selData);
            const auto potential = parse_nodes(selPotential);
            PathConfig pc;
            pc.fit = fit_config(g, restarts, maxIter, relTol, 1e-10);
            pc.penalty = selPenalty;
            pc.freshRestarts = selFresh;
            std::vector<double> grid;
            if (selAuto) {
                const double top = find_extinction_lambda(data, potential, pc);
                grid = top <= 1e-3 ? std::vector<double>{top} : log_grid(1e-3, top, 20);
            } else if (!selGrid.empty()) {
                grid = parse_lambda_grid(selGrid);
            } else {
                throw Error(ErrorCode::InvalidConfig, "give --lambda-grid start:step:end or --lambda-auto");
            }
            const SelectionPath path = lambda_path(data, potential, grid, pc);
            emit(g.format == "json" ? path_to_json(path).dump(2) + "\n" : path_csv(path), selOut);
            if (!selAicOut.empty())
                write_text(selAicOut, sparse_fit_to_json(path.entries[path.chosenByAIC].fit).dump(2) + "\n");
            if (!selBicOut.empty())
                write_text(selBicOut, sparse_fit_to_json(path.entries[path.chosenByBIC].fit).dump(2) + "\n");
        } else if (*boot) {
            const GroupedData data = read_groups_csv(bootData);
            PathConfig pc;
            pc.fit = fit_config(g, restarts, maxIter, relTol, 1e-10);
            pc.freshRestarts = bootFresh;
            const auto table =
                bootstrap_stability(data, parse_nodes(bootPotential), parse_lambda_grid(bootGrid), bootB, g.seed, pc);
            emit(as_format(bootstrap_csv(table), g), bootOut);
        } else if (*rep) {
            ScenarioSpec spec;
            std::string csv;
            std::size_t R = 0;
            FitConfig fc = fit_config(g, repRestarts, 1000, 1e-8, 1e-10);
            if (repTable == "1" || repTable == "2" || repTable == "sparsity") {
                spec.variant = repTable == "2" ? Variant::WithNull
                               : repTable == "1" ? Variant::Asymmetric
                                                 : parse_variant(repVariant);
                spec = parse_cell(repCell, spec);
                R = paperScale ? 1000 : repR.value_or(200);
                if (repTable == "sparsity") {
                    std::vector<double> alphas;
                    std::stringstream ss(repAlphas);
                    std::string tok;
                    while (std::getline(ss, tok, ',')) alphas.push_back(std::stod(tok));
                    csv = sparsity_csv(run_sparsity_sweep(spec, alphas, R, g.seed, fc));
                } else {
                    csv = estimation_csv({run_estimation_replicates(spec, R, g.seed, fc)});
                }
            } else {
                spec.variant = Variant::WithNull;
                spec.n = 500;
                spec.T = 2000;
                spec.M = 80;
                spec = parse_cell(repCell, spec);
                R = paperScale ? 1000 : repR.value_or(50);
                PathConfig pc;
                pc.fit = fc;
                pc.freshRestarts = repFresh;
                const auto grid = repGrid.empty() ? default_selection_grid() : parse_lambda_grid(repGrid);
                csv = selection_csv({run_selection_replicates(spec, grid, R, g.seed, pc)});
            }
            std::ostringstream canon;
            canon << "table=" << repTable << ";variant=" << to_string(spec.variant) << ";nL=" << spec.nL
                  << ";n=" << spec.n << ";T=" << spec.T << ";M=" << spec.M << ";alpha=" << spec.alpha
                  << ";rho0=" << spec.rho0 << ";R=" << R << ";restarts=" << repRestarts
                  << ";fresh=" << repFresh << ";grid=" << repGrid;
            Json prov;
            prov["seed"] = g.seed;
            prov["R"] = R;
            prov["config"] = canon.str();
            char hash[20];
            std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(canon.str())));
            prov["config_hash"] = hash;
            if (g.format == "json") {
                Json out;
                out["provenance"] = prov;
                out["rows"] = csv_to_json(csv);
                emit(out.dump(2) + "\n", repOut);
            } else {
                emit(csv, repOut);
                if (!repOut.empty())
                    write_text(repOut + ".provenance.json", prov.dump(2) + "\n");
                else
                    std::cerr << prov.dump() << "\n";
            }
        } else if (*chk) {
            const std::string text = read_text(chkParams);
            Json j;
            try {
                j = Json::parse(text);
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCode::Parse, chkParams + ": " + e.what());
            }
            const HubModelParams p = params_from_json(j);
            std::optional<std::vector<std::size_t>> followers;
            if (!chkFollowers.empty()) followers = parse_nodes(chkFollowers);
            const auto report = check_identifiability(p, followers);
            Json out;
            out["identifiability"] = identifiability_to_json(report);
            auto mark = [](bool b) { return b ? "pass" : "FAIL"; };
            std::cout << "condition (i):   " << mark(report.condI);
            for (const auto& [r, c] : report.condIViolations) std::cout << " A[" << r << "][" << c << "]=1";
            std::cout << "\ncondition (ii):  " << mark(report.condII);
            for (const auto& [a, b] : report.condIIViolations) std::cout << " hubs " << a << "," << b;
            std::cout << "\n";
            if (report.condIII) {
                std::cout << "condition (iii): " << mark(*report.condIII);
                for (auto h : report.condIIIViolations) std::cout << " hub " << h;
                std::cout << "\n";
            }
            if (report.condIVprime) {
                std::cout << "condition (iv'): " << mark(*report.condIVprime);
                if (report.condIVprimeWitness) std::cout << " witness " << *report.condIVprimeWitness;
                std::cout << "\n";
            }
            if (chkAssumptions) {
                if (!j.contains("labels") || !j.contains("vsets"))
                    throw Error(ErrorCode::Parse, "assumption check needs 'labels' and 'vsets' in the params file");
                const LabelAssignment z = labels_from_json(j["labels"]);
                std::vector<std::vector<std::size_t>> V;
                for (const auto& row : j["vsets"]) {
                    V.emplace_back();
                    for (const auto& id : row) V.back().push_back(id.get<std::size_t>() - 1);
                }
                const auto prof = check_assumptions(p, z, V, AssumptionConstants{});
                out["assumptions"] = assumptions_to_json(prof);
                std::cout << "H1: " << mark(prof.H1) << "\nH2: " << mark(prof.H2) << "\nH3: " << mark(prof.H3)
                          << "\nH4: " << mark(prof.H4) << "\n";
            }
            if (!chkOut.empty()) write_text(chkOut, out.dump(2) + "\n");
        } else if (*orc) {
            const HubModelParams a = read_params(orcA);
            const PmfTable pa = enumerate_pmf(a);
            if (!orcB.empty()) {
                const PmfTable pb = enumerate_pmf(read_params(orcB));
                std::printf("tv_distance: %.15f\n", tv_distance(pa, pb));
            } else {
                if (g.format == "json") {
                    Json rows = Json::array();
                    for (std::size_t k = 0; k < pa.probs.size(); ++k) {
                        std::string bits(pa.n, '0');
                        for (std::size_t jn = 0; jn < pa.n; ++jn)
                            if ((k >> jn) & 1U) bits[jn] = '1';
                        rows.push_back(Json{{"outcome", bits}, {"prob", pa.probs[k]}});
                    }
                    emit(rows.dump(2) + "\n", orcOut);
                } else {
                    emit(pmf_csv(pa), orcOut);
                }
                std::fprintf(orcOut.empty() ? stderr : stdout, "checksum: %.15f\n", pa.sum());
            }
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kOk;
}
