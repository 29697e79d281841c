#include "hamosc/report.hpp"

#include <cmath>
#include <cstdio>

namespace hamosc {

using json = nlohmann::ordered_json;

json to_json(const CriterionReport& rep) {
    json j;
    j["criterion"] = rep.criterion;
    j["j"] = rep.j;
    j["verdict"] = verdict_name(rep.verdict);
    if (std::isfinite(rep.margin))
        j["margin"] = rep.margin;
    else
        j["margin"] = nullptr;
    j["diagnostics"] = rep.diagnostics;
    return j;
}

json to_json(const OracleOutcome& outcome) {
    json j;
    j["verdict"] = outcome.all_zero ? "AllZero" : "SomeNonZero";
    json trials = json::array();
    for (const OracleTrial& t : outcome.trials) {
        json tj;
        tj["label"] = t.label;
        tj["indeterminate"] = t.indeterminate;
        tj["zero_count"] = t.zeros.size();
        tj["zeros"] = t.zeros;
        tj["threshold"] = t.threshold;
        trials.push_back(std::move(tj));
    }
    j["trials"] = std::move(trials);
    return j;
}

void write_events_csv(const OracleOutcome& outcome, std::ostream& os) {
    os << "trial,label,zero_time\n";
    char buf[40];
    for (std::size_t k = 0; k < outcome.trials.size(); ++k) {
        const OracleTrial& t = outcome.trials[k];
        for (double z : t.zeros) {
            std::snprintf(buf, sizeof buf, "%.17g", z);
            os << k << ',' << t.label << ',' << buf << '\n';
        }
    }
}

}  // namespace hamosc
