#pragma once

#include "grouphub/data.hpp"
#include "grouphub/em.hpp"
#include "grouphub/identifiability.hpp"
#include "grouphub/oracle.hpp"
#include "grouphub/penalized.hpp"
#include "grouphub/profile.hpp"
#include "grouphub/types.hpp"

#include "json.hpp"

#include <iosfwd>
#include <string>

namespace grouphub {

using Json = nlohmann::ordered_json;

// Grouped data: one row per group, comma-separated 0/1 fields, optional
// header v1,...,vn. Non-binary integers are kept so validation can report
// them.
GroupedData parse_groups_csv(std::istream& in);
GroupedData read_groups_csv(const std::string& path);
std::string groups_csv(const GroupedData& data, bool header = true);

// Params JSON: variant, n, hub_set (1-based), rho, A. A rho whose sum is
// within 1e-9 of 1 is renormalised on read.
Json params_to_json(const HubModelParams& params);
HubModelParams params_from_json(const Json& j);
HubModelParams read_params(const std::string& path);

Json labels_to_json(const LabelAssignment& z);
LabelAssignment labels_from_json(const Json& j);

Json fit_to_json(const FitResult& fit);
Json search_to_json(const ProfileSearchResult& search, const GroupedData& data,
                    const std::vector<std::size_t>& hubs, Variant variant);
Json sparse_fit_to_json(const SparseFit& fit);
Json path_to_json(const SelectionPath& path);
Json identifiability_to_json(const IdentifiabilityReport& report);
Json assumptions_to_json(const AssumptionProfile& profile);

std::string posterior_csv(const PosteriorMatrix& posterior);
std::string labels_csv(const LabelAssignment& z);
// lambda, log_lik, penalized_obj, k, AIC, BIC, selected_nodes, then 0/1
// markers for the AIC and BIC choices.
std::string path_csv(const SelectionPath& path);
// Outcome as a 0/1 string over v1..vn, then its probability.
std::string pmf_csv(const PmfTable& pmf);

// Parses a simple CSV (numbers only, optional header) into a JSON array of
// row objects; used for --format json mirrors.
Json csv_to_json(const std::string& csv);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

// %.17g
std::string format_double(double v);

}  // namespace grouphub
