#pragma once

#include <ostream>

#include <json.hpp>

#include "hamosc/criteria.hpp"
#include "hamosc/oracle.hpp"

namespace hamosc {

inline constexpr const char* kToolName = "hamosc";
inline constexpr const char* kToolVersion = "0.1.0";

nlohmann::ordered_json to_json(const CriterionReport& rep);
nlohmann::ordered_json to_json(const OracleOutcome& outcome);

/// CSV of zero events: one row per (trial, zero time).
void write_events_csv(const OracleOutcome& outcome, std::ostream& os);

}  // namespace hamosc
