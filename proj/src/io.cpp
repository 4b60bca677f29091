#include "grouphub/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace grouphub {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    out << text;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_long(const std::string& s, long& v) {
    if (s.empty()) return false;
    char* end = nullptr;
    v = std::strtol(s.c_str(), &end, 10);
    return end && *end == '\0';
}

}  // namespace

GroupedData parse_groups_csv(std::istream& in) {
    std::string line;
    std::vector<std::uint8_t> values;
    std::size_t n = 0, T = 0, lineNo = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineNo;
        if (trim(line).empty()) continue;
        auto fields = split(line, ',');
        for (auto& f : fields) f = trim(f);
        long v = 0;
        if (first && !parse_long(fields[0], v)) {
            n = fields.size();
            first = false;
            continue;  // header
        }
        if (first) n = fields.size();
        first = false;
        if (fields.size() != n) {
            std::ostringstream os;
            os << "line " << lineNo << " has " << fields.size() << " fields, expected " << n;
            throw Error(ErrorCode::DimensionMismatch, os.str());
        }
        for (const auto& f : fields) {
            if (!parse_long(f, v)) {
                std::ostringstream os;
                os << "line " << lineNo << ": '" << f << "' is not an integer";
                throw Error(ErrorCode::Parse, os.str());
            }
            values.push_back(v == 0 ? 0 : v == 1 ? 1 : v > 1 && v < 255 ? static_cast<std::uint8_t>(v) : 255);
        }
        ++T;
    }
    return GroupedData(T, n, std::move(values));
}

GroupedData read_groups_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    return parse_groups_csv(in);
}

std::string groups_csv(const GroupedData& data, bool header) {
    std::string out;
    out.reserve(data.T() * (2 * data.n() + 1) + 8 * data.n());
    if (header) {
        for (std::size_t j = 0; j < data.n(); ++j) {
            if (j) out.push_back(',');
            out += "v" + std::to_string(j + 1);
        }
        out.push_back('\n');
    }
    for (std::size_t t = 0; t < data.T(); ++t) {
        for (std::size_t j = 0; j < data.n(); ++j) {
            if (j) out.push_back(',');
            out += std::to_string(data(t, j));
        }
        out.push_back('\n');
    }
    return out;
}

Json params_to_json(const HubModelParams& params) {
    Json j;
    j["variant"] = to_string(params.variant);
    j["n"] = params.n;
    Json hubs = Json::array();
    for (auto h : params.hubs) hubs.push_back(h + 1);
    j["hub_set"] = hubs;
    j["rho"] = std::vector<double>(params.rho.data(), params.rho.data() + params.rho.size());
    Json A = Json::array();
    for (Eigen::Index r = 0; r < params.A.rows(); ++r) {
        Json row = Json::array();
        for (Eigen::Index c = 0; c < params.A.cols(); ++c) row.push_back(params.A(r, c));
        A.push_back(row);
    }
    j["A"] = A;
    return j;
}

HubModelParams params_from_json(const Json& j) {
    try {
        HubModelParams p;
        p.variant = parse_variant(j.at("variant").get<std::string>());
        p.n = j.at("n").get<std::size_t>();
        for (const auto& h : j.at("hub_set")) {
            const auto id = h.get<long long>();
            if (id < 1 || static_cast<std::size_t>(id) > p.n)
                throw Error(ErrorCode::IndexOutOfRange, "hub_set entry out of range 1..n");
            p.hubs.push_back(static_cast<std::size_t>(id - 1));
        }
        if (p.hubs.size() >= p.n) throw Error(ErrorCode::InvalidParams, "hub set must be smaller than node set");
        const auto rho = j.at("rho").get<std::vector<double>>();
        p.rho = Eigen::Map<const Vector>(rho.data(), static_cast<Eigen::Index>(rho.size()));
        const auto& A = j.at("A");
        p.A.resize(static_cast<Eigen::Index>(A.size()), static_cast<Eigen::Index>(p.n));
        for (std::size_t r = 0; r < A.size(); ++r) {
            const auto row = A[r].get<std::vector<double>>();
            if (row.size() != p.n) throw Error(ErrorCode::DimensionMismatch, "A row length differs from n");
            for (std::size_t c = 0; c < p.n; ++c)
                p.A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
        }
        if (static_cast<std::size_t>(p.rho.size()) != p.num_components() ||
            static_cast<std::size_t>(p.A.rows()) != p.num_components())
            throw Error(ErrorCode::DimensionMismatch, "rho/A length does not match hub_set and variant");
        const double s = p.rho.sum();
        if (std::abs(s - 1.0) <= 1e-9 && std::abs(s - 1.0) > 1e-12) p.rho /= s;
        p.validate();
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("malformed params JSON: ") + e.what());
    }
}

HubModelParams read_params(const std::string& path) {
    const std::string text = read_text(path);
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, path + ": " + e.what());
    }
    return params_from_json(j);
}

Json labels_to_json(const LabelAssignment& z) { return Json(z.z); }

LabelAssignment labels_from_json(const Json& j) {
    try {
        LabelAssignment z;
        z.z = j.get<std::vector<int>>();
        return z;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("malformed labels: ") + e.what());
    }
}

Json fit_to_json(const FitResult& fit) {
    Json j = params_to_json(fit.params);
    j["log_lik"] = fit.logLik;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["restart_index"] = fit.restartIndex;
    return j;
}

Json search_to_json(const ProfileSearchResult& search, const GroupedData& data,
                    const std::vector<std::size_t>& hubs, Variant variant) {
    const ProfileQuantities q = profile_mle(data, search.zHat, variant, hubs.size());
    HubModelParams p;
    p.variant = variant;
    p.n = data.n();
    p.hubs = hubs;
    p.A = q.Ahat;
    p.rho = Vector::Zero(static_cast<Eigen::Index>(p.num_components()));
    for (std::size_t k = 0; k < p.num_components(); ++k)
        p.rho[static_cast<Eigen::Index>(k)] = static_cast<double>(q.counts[k]) / static_cast<double>(data.T());
    Json j = params_to_json(p);
    j["log_lik"] = search.logLik;
    j["iterations"] = search.evaluated;
    j["converged"] = true;
    j["restart_index"] = 0;
    j["method"] = "exhaustive_profile";
    j["labels"] = labels_to_json(search.zHat);
    return j;
}

Json sparse_fit_to_json(const SparseFit& fit) {
    Json j = params_to_json(fit.params);
    j["log_lik"] = fit.logLik;
    j["penalized_obj"] = fit.penalizedObjective;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["restart_index"] = fit.restartIndex;
    Json sel = Json::array();
    for (auto s : fit.selectedSet) sel.push_back(s + 1);
    j["selected_set"] = sel;
    j["lambda"] = fit.lambda;
    return j;
}

Json path_to_json(const SelectionPath& path) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < path.entries.size(); ++i) {
        const auto& e = path.entries[i];
        Json r;
        r["lambda"] = e.lambda;
        r["log_lik"] = e.fit.logLik;
        r["penalized_obj"] = e.fit.penalizedObjective;
        r["k"] = e.criteria.k;
        r["AIC"] = e.criteria.AIC;
        r["BIC"] = e.criteria.BIC;
        Json sel = Json::array();
        for (auto s : e.fit.selectedSet) sel.push_back(s + 1);
        r["selected_nodes"] = sel;
        rows.push_back(r);
    }
    Json j;
    j["path"] = rows;
    j["chosen_by_aic"] = path.chosenByAIC;
    j["chosen_by_bic"] = path.chosenByBIC;
    j["nestedness_violations"] = path.nestedness_violations();
    return j;
}

Json identifiability_to_json(const IdentifiabilityReport& report) {
    Json j;
    auto pairs = [](const std::vector<std::pair<std::size_t, std::size_t>>& v) {
        Json a = Json::array();
        for (const auto& [x, y] : v) a.push_back(Json::array({x, y}));
        return a;
    };
    j["condition_i"] = report.condI;
    j["condition_i_violations"] = pairs(report.condIViolations);
    j["condition_ii"] = report.condII;
    j["condition_ii_violations"] = pairs(report.condIIViolations);
    if (report.condIII) {
        j["condition_iii"] = *report.condIII;
        j["condition_iii_violations"] = report.condIIIViolations;
    } else {
        j["condition_iii"] = nullptr;
    }
    if (report.condIVprime) {
        j["condition_iv_prime"] = *report.condIVprime;
        j["condition_iv_prime_witness"] =
            report.condIVprimeWitness ? Json(*report.condIVprimeWitness) : Json(nullptr);
    } else {
        j["condition_iv_prime"] = nullptr;
    }
    j["all_pass"] = report.all_pass();
    return j;
}

Json assumptions_to_json(const AssumptionProfile& a) {
    Json c;
    c["c_min"] = a.constants.cMin;
    c["c_max"] = a.constants.cMax;
    c["d"] = a.constants.d;
    c["s_min"] = a.constants.sMin;
    c["s_max"] = a.constants.sMax;
    c["v"] = a.constants.v;
    c["c0"] = a.constants.c0;
    Json j;
    j["constants"] = c;
    j["variant"] = to_string(a.variant);
    j["T"] = a.T;
    j["n"] = a.n;
    j["n_L"] = a.numHubs;
    j["counts"] = a.counts;
    j["s_observed_min"] = a.sObservedMin;
    j["s_observed_max"] = a.sObservedMax;
    j["min_vset_size"] = a.minVsetSize;
    j["tau"] = a.tau;
    j["max_hub_hub_entry"] = a.maxHubHubEntry;
    j["H1"] = a.H1;
    j["H2"] = a.H2;
    j["H3"] = a.H3;
    j["H4"] = a.H4;
    return j;
}

std::string posterior_csv(const PosteriorMatrix& posterior) {
    std::ostringstream os;
    for (Eigen::Index t = 0; t < posterior.h.rows(); ++t) {
        for (Eigen::Index k = 0; k < posterior.h.cols(); ++k) {
            if (k) os << ',';
            os << format_double(posterior.h(t, k));
        }
        os << '\n';
    }
    return os.str();
}

std::string labels_csv(const LabelAssignment& z) {
    std::ostringstream os;
    os << "group,label\n";
    for (std::size_t t = 0; t < z.z.size(); ++t) os << t + 1 << ',' << z.z[t] << '\n';
    return os.str();
}

std::string path_csv(const SelectionPath& path) {
    std::ostringstream os;
    os << "lambda,log_lik,penalized_obj,k,AIC,BIC,selected_nodes,chosen_aic,chosen_bic\n";
    for (std::size_t i = 0; i < path.entries.size(); ++i) {
        const auto& e = path.entries[i];
        os << format_double(e.lambda) << ',' << format_double(e.fit.logLik) << ','
           << format_double(e.fit.penalizedObjective) << ',' << format_double(e.criteria.k) << ','
           << format_double(e.criteria.AIC) << ',' << format_double(e.criteria.BIC) << ',';
        for (std::size_t s = 0; s < e.fit.selectedSet.size(); ++s) {
            if (s) os << ';';
            os << e.fit.selectedSet[s] + 1;
        }
        os << ',' << (i == path.chosenByAIC ? 1 : 0) << ',' << (i == path.chosenByBIC ? 1 : 0) << '\n';
    }
    return os.str();
}

std::string pmf_csv(const PmfTable& pmf) {
    std::ostringstream os;
    os << "outcome,prob\n";
    for (std::size_t g = 0; g < pmf.probs.size(); ++g) {
        std::string bits(pmf.n, '0');
        for (std::size_t j = 0; j < pmf.n; ++j)
            if ((g >> j) & 1U) bits[j] = '1';
        os << bits << ',' << format_double(pmf.probs[g]) << '\n';
    }
    return os.str();
}

Json csv_to_json(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    std::vector<std::string> header;
    Json rows = Json::array();
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto fields = split(line, ',');
        if (header.empty()) {
            header = fields;
            continue;
        }
        Json row;
        for (std::size_t i = 0; i < fields.size() && i < header.size(); ++i) {
            const std::string& f = fields[i];
            char* end = nullptr;
            const double v = std::strtod(f.c_str(), &end);
            if (!f.empty() && end && *end == '\0' && f.find_first_of("0123456789") != std::string::npos) {
                long iv = 0;
                if (parse_long(f, iv))
                    row[header[i]] = iv;
                else
                    row[header[i]] = v;
            } else {
                row[header[i]] = f;
            }
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace grouphub
