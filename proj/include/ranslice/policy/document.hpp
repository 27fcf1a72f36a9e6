#pragma once

#include <string>

#include "json.hpp"

#include "ranslice/policy/admission.hpp"
#include "ranslice/policy/template.hpp"

namespace ranslice::policy {

/// Provisioning document <-> RsiTemplate. Schema in docs/template.md.
/// Parse errors throw ValidationError(OutOfRange) with the offending field path.
RsiTemplate template_from_json(const nlohmann::json& doc);
nlohmann::json template_to_json(const RsiTemplate& tpl);

RrmPolicy policy_from_json(const nlohmann::json& doc, const std::string& prefix = "rrm_policy");
nlohmann::json policy_to_json(const RrmPolicy& policy);

nlohmann::json counters_to_json(const SliceCounters& c);

}  // namespace ranslice::policy
